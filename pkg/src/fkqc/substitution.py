"""One-dimensional substitution chains with exact coordinates.

A substitution rule on a finite tile alphabet generates a bi-infinite chain
of substrate atoms.  The chain is anchored (an atom sits at 0), coordinates
live in a fixed real quadratic field, and local windows around points can be
compared exactly.  The same expansion machinery also produces, for every
level ``l``, the decomposition of the chain into order-``l`` supertiles,
which is what the tower hierarchy is built from.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, RangeError
from .quadratic import QuadraticField, QuadraticNumber, golden_field, _as_fraction


class SubstitutionRule:
    """A primitive substitution with a positive length per tile type.

    ``images`` maps each letter to a non-empty word over the alphabet;
    ``lengths`` maps each letter to an exact positive length in ``field``.
    Lengths need not be self-similar: heights are recomputed per level.
    """

    def __init__(self, alphabet, images, lengths, field=None):
        self.alphabet = tuple(alphabet)
        if len(set(self.alphabet)) != len(self.alphabet):
            raise DomainError("alphabet letters must be distinct")
        self.images = {c: str(images[c]) for c in self.alphabet}
        for c, w in self.images.items():
            if not w:
                raise DomainError(f"image of {c!r} is empty")
            if any(x not in self.alphabet for x in w):
                raise DomainError(f"image of {c!r} uses letters outside the alphabet")
        self.field = field if field is not None else golden_field()
        self.lengths = {c: self.field.coerce(lengths[c]) for c in self.alphabet}
        for c, ln in self.lengths.items():
            if ln.sign() <= 0:
                raise DomainError(f"length of {c!r} must be positive")
        self._index = {c: i for i, c in enumerate(self.alphabet)}

    # -- combinatorics ---------------------------------------------------------

    def abelianization(self) -> list[list[int]]:
        """Matrix M with M[i][j] = occurrences of letter i in the image of letter j."""
        n = len(self.alphabet)
        m = [[0] * n for _ in range(n)]
        for j, c in enumerate(self.alphabet):
            for x in self.images[c]:
                m[self._index[x]][j] += 1
        return m

    def positivity_power(self) -> int | None:
        """Smallest k with all entries of M^k positive, or None if not primitive."""
        n = len(self.alphabet)
        m = np.array(self.abelianization(), dtype=object)
        power = m
        bound = n * n - 2 * n + 2
        for k in range(1, max(bound, 1) + 1):
            if (power > 0).all():
                return k
            power = power @ m
        return None

    def is_primitive(self) -> bool:
        return self.positivity_power() is not None

    def require_primitive(self) -> None:
        if not self.is_primitive():
            raise DomainError("substitution rule is not primitive")

    def expand(self, word: str, times: int = 1) -> str:
        for _ in range(times):
            word = "".join(self.images[c] for c in word)
        return word

    def first_letter_map(self, c: str, times: int = 1) -> str:
        for _ in range(times):
            c = self.images[c][0]
        return c

    def last_letter_map(self, c: str, times: int = 1) -> str:
        for _ in range(times):
            c = self.images[c][-1]
        return c

    def two_letter_factors(self) -> set[str]:
        """All length-2 words occurring in the substitution language."""
        pairs = set()
        for c in self.alphabet:
            w = self.images[c]
            pairs.update(w[i : i + 2] for i in range(len(w) - 1))
        while True:
            new = set(pairs)
            for xy in pairs:
                wx, wy = self.images[xy[0]], self.images[xy[1]]
                for w in (wx, wy):
                    new.update(w[i : i + 2] for i in range(len(w) - 1))
                new.add(wx[-1] + wy[0])
            if new == pairs:
                return pairs
            pairs = new

    def seed_pair(self) -> tuple[str, str, int]:
        """Deterministic seam letters (a, b) and the power K fixing the word.

        ``a`` is a suffix letter of sigma^K(a), ``b`` a prefix letter of
        sigma^K(b), and "ab" occurs in the language, so the two-sided word
        lim sigma^(nK)(a).sigma^(nK)(b) is a legal fixed point anchored at
        the seam.  The lexicographically first admissible pair at the
        smallest such K is chosen.
        """
        factors = self.two_letter_factors()
        n = len(self.alphabet)
        for K in range(1, 2 * n * n + 3):
            for a in self.alphabet:
                if self.last_letter_map(a, K) != a:
                    continue
                for b in self.alphabet:
                    if self.first_letter_map(b, K) != b:
                        continue
                    if a + b in factors:
                        return a, b, K
        raise DomainError("no admissible two-sided seed pair exists")

    # -- level geometry --------------------------------------------------------

    def level_heights(self, level: int) -> dict[str, QuadraticNumber]:
        """Exact length of the order-``level`` supertile of each type."""
        heights = dict(self.lengths)
        m = self.abelianization()
        for _ in range(level):
            heights = {
                c: sum(
                    (heights[self.alphabet[i]] * m[i][j] for i in range(len(m))),
                    start=self.field.zero(),
                )
                for j, c in enumerate(self.alphabet)
            }
        return heights

    def __repr__(self) -> str:
        rules = ", ".join(f"{c}->{self.images[c]}" for c in self.alphabet)
        return f"SubstitutionRule({rules})"


def fibonacci_rule() -> SubstitutionRule:
    """L -> LS, S -> L with self-similar lengths (phi, 1)."""
    f = golden_field()
    return SubstitutionRule(
        alphabet=("L", "S"),
        images={"L": "LS", "S": "L"},
        lengths={"L": f.lam(), "S": f.one()},
        field=f,
    )


def crystal_rule(length=1, letter: str = "A") -> SubstitutionRule:
    """Degenerate one-letter rule A -> AA: a periodic lattice."""
    f = golden_field()
    return SubstitutionRule(
        alphabet=(letter,),
        images={letter: letter * 2},
        lengths={letter: f.coerce(_as_fraction(length))},
        field=f,
    )


def thue_morse_rule(length_a=1, length_b=1) -> SubstitutionRule:
    f = golden_field()
    return SubstitutionRule(
        alphabet=("A", "B"),
        images={"A": "AB", "B": "BA"},
        lengths={"A": f.coerce(_as_fraction(length_a)), "B": f.coerce(_as_fraction(length_b))},
        field=f,
    )


def expand_word(rule: SubstitutionRule, seed: str, depth: int) -> str:
    """sigma^depth(seed)."""
    if seed not in rule.alphabet:
        raise DomainError(f"unknown seed letter {seed!r}")
    if depth < 0:
        raise DomainError("depth must be non-negative")
    return rule.expand(seed, depth)


def letter_frequencies_exact(rule: SubstitutionRule) -> list[QuadraticNumber] | None:
    """Perron frequency vector as exact field elements, or None if the
    Perron eigenvalue does not live in the rule's quadratic field."""
    rule.require_primitive()
    m = rule.abelianization()
    n = len(m)
    f = rule.field
    if n == 1:
        return [f.one()]
    if n == 2:
        tr = m[0][0] + m[1][1]
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        disc = Fraction(tr * tr - 4 * det)
        lam_pf = _sqrt_in_field(f, disc)
        if lam_pf is None:
            return None
        lam_pf = (lam_pf + tr) / 2
        # kernel of (M - lam_pf I); primitivity forces m[0][1] > 0
        v = [f.coerce(m[0][1]), lam_pf - m[0][0]]
    else:
        lam_int = _integer_perron(m)
        if lam_int is None:
            return None
        v = _rational_kernel(m, lam_int)
        if v is None:
            return None
        v = [f.coerce(x) for x in v]
    total = sum(v[1:], start=v[0])
    out = [x / total for x in v]
    if any(x.sign() <= 0 for x in out):
        return None
    return out


def _sqrt_in_field(f: QuadraticField, disc: Fraction) -> QuadraticNumber | None:
    """An element of Q(lam) whose square is ``disc``, if one exists."""
    if disc < 0:
        return None
    num, den = disc.numerator, disc.denominator
    import math

    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return f.coerce(Fraction(rn, rd))
    # sqrt(disc) = r * sqrt(field discriminant) = r * (2 lam - p) for rational r
    ratio = disc / f.discriminant
    num, den = ratio.numerator, ratio.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        r = Fraction(rn, rd)
        return (f.lam() * 2 - f.p) * r
    return None


def _integer_perron(m) -> int | None:
    vals = np.linalg.eigvals(np.array(m, dtype=float))
    cand = int(round(max(vals.real)))
    a = np.array(m, dtype=object) - cand * np.eye(len(m), dtype=object)
    # exact integer determinant by Fraction elimination
    det = _fraction_det([[Fraction(int(x)) for x in row] for row in a])
    return cand if det == 0 else None


def _fraction_det(a: list[list[Fraction]]) -> Fraction:
    n = len(a)
    a = [row[:] for row in a]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] * inv
            if factor:
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return det


def _rational_kernel(m, lam: int) -> list[Fraction] | None:
    n = len(m)
    a = [[Fraction(m[i][j]) - (lam if i == j else 0) for j in range(n)] for i in range(n)]
    # reduce, then back-substitute with last free variable = 1
    pivots = []
    row = 0
    for col in range(n):
        piv = next((r for r in range(row, n) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        inv = 1 / a[row][col]
        a[row] = [x * inv for x in a[row]]
        for r in range(n):
            if r != row and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    if len(free) != 1:
        return None
    v = [Fraction(0)] * n
    v[free[0]] = Fraction(1)
    for r, col in enumerate(pivots):
        v[col] = -a[r][free[0]]
    return v


def letter_frequencies(rule: SubstitutionRule) -> dict[str, float]:
    """Normalized tile-type frequencies (Perron eigenvector of the
    abelianization, float shadows)."""
    exact = letter_frequencies_exact(rule)
    if exact is not None:
        return {c: float(x) for c, x in zip(rule.alphabet, exact)}
    m = np.array(rule.abelianization(), dtype=float)
    vals, vecs = np.linalg.eig(m)
    i = int(np.argmax(vals.real))
    v = np.abs(vecs[:, i].real)
    v = v / v.sum()
    return {c: float(x) for c, x in zip(rule.alphabet, v)}


# -- chains ---------------------------------------------------------------------


@dataclass(frozen=True)
class LocalPattern:
    """The chain seen through an open window of radius R, recentred at 0.

    Equality is exact equality of atom offsets and of the tile types
    intersecting the window; there is no tolerance anywhere.
    """

    radius: Fraction
    offsets: tuple[QuadraticNumber, ...]
    labels: tuple[str, ...]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalPattern):
            return NotImplemented
        return (
            self.radius == other.radius
            and self.labels == other.labels
            and len(self.offsets) == len(other.offsets)
            and all(x == y for x, y in zip(self.offsets, other.offsets))
        )

    def __hash__(self) -> int:
        return hash((self.radius, self.labels, self.offsets))


class QuasicrystalChain:
    """A window of an anchored two-sided substitution chain.

    Atoms are exact, strictly increasing, with an atom at 0; ``labels[i]``
    is the tile type of ``[atoms[i], atoms[i+1]]``.  Chains are immutable
    after construction; all queries are read-only.
    """

    def __init__(self, rule, window, atoms, labels, origin_index, seed):
        self.rule = rule
        self.window = window  # (lo, hi) as exact Fractions
        self.atoms = tuple(atoms)
        self.labels = tuple(labels)
        self.origin_index = origin_index
        self.seed = seed  # (a, b, K)
        self.atom_floats = np.array([float(s) for s in self.atoms])
        self._level_cache: dict[int, tuple[tuple[QuadraticNumber, ...], tuple[str, ...]]] = {}
        self._pattern_key_cache: dict[int, tuple] = {}

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def min_gap(self) -> QuadraticNumber:
        return min(self.rule.lengths.values())

    @property
    def max_gap(self) -> QuadraticNumber:
        return max(self.rule.lengths.values())

    def gap_types(self) -> set[str]:
        return set(self.labels)

    def atom_index_at_or_left_of(self, x) -> int:
        """Index of the rightmost atom <= x; x may be exact or float."""
        i = bisect.bisect_right(self.atom_floats, float(x)) - 1
        xe = self._exact(x)
        # float bisect can be off by one ulp near an atom
        while i + 1 < len(self.atoms) and self.atoms[i + 1] <= xe:
            i += 1
        while i >= 0 and self.atoms[i] > xe:
            i -= 1
        if i < 0:
            raise RangeError("position left of the covered window")
        return i

    def _exact(self, x) -> QuadraticNumber:
        return self.rule.field.coerce(x)

    def coverage(self) -> tuple[QuadraticNumber, QuadraticNumber]:
        return self.atoms[0], self.atoms[-1]

    def require_coverage(self, lo, hi) -> None:
        a, b = self.coverage()
        if self._exact(lo) < a or self._exact(hi) > b:
            raise RangeError(
                "query window exceeds chain coverage; build the chain on a wider window"
            )

    # -- supertile decompositions ---------------------------------------------

    def level_tiles(self, level: int):
        """Boundaries and types of the complete order-``level`` supertiles
        inside the covered window.

        Returns ``(starts, types)`` with ``len(starts) == len(types) + 1``;
        every start is an atom of the chain and 0 is always a boundary.
        """
        if level < 0:
            raise DomainError("level must be non-negative")
        if level not in self._level_cache:
            self._level_cache[level] = self._build_level_tiles(level)
        return self._level_cache[level]

    def _build_level_tiles(self, level: int):
        if level == 0:
            return self.atoms, self.labels
        rule = self.rule
        a, b, K = self.seed
        r = (-level) % K
        seed_left = rule.last_letter_map(a, r)
        seed_right = rule.first_letter_map(b, r)
        heights = rule.level_heights(level)
        lo, hi = self.coverage()
        right = _grow_word(rule, seed_right, K, float(hi), heights)
        left = _grow_word(rule, seed_left, K, -float(lo), heights)

        starts = [rule.field.zero()]
        types: list[str] = []
        pos = rule.field.zero()
        for c in right:
            nxt = pos + heights[c]
            if nxt > hi:
                break
            types.append(c)
            starts.append(nxt)
            pos = nxt
        lpos = rule.field.zero()
        lstarts: list[QuadraticNumber] = []
        ltypes: list[str] = []
        for c in reversed(left):
            nxt = lpos - heights[c]
            if nxt < lo:
                break
            ltypes.append(c)
            lstarts.append(nxt)
            lpos = nxt
        starts = list(reversed(lstarts)) + starts
        types = list(reversed(ltypes)) + types
        return tuple(starts), tuple(types)

    def pattern_key(self, i: int):
        """(left tile type, right tile type) around atom i, or None at the ends."""
        if i <= 0 or i >= len(self.labels):
            return None
        return (self.labels[i - 1], self.labels[i])

    def to_json_dict(self) -> dict:
        from .serialize import chain_to_dict

        return chain_to_dict(self)


def _grow_word(rule, seed, K, need: float, heights) -> str:
    """Expand sigma^K from ``seed`` until the word is longer than ``need``
    (measured in level heights), plus a safety margin of one supertile."""
    hmax = max(float(h) for h in heights.values())
    target = max(need, 0.0) + 2.0 * hmax
    word = seed
    total = float(heights[seed])
    for _ in range(200):
        if total >= target:
            return word
        word = rule.expand(word, K)
        total = sum(float(heights[c]) for c in word)
    raise RangeError("window too large to cover")  # pragma: no cover


def build_chain(rule: SubstitutionRule, window) -> QuasicrystalChain:
    """Generate the anchored chain covering ``window = (lo, hi)``.

    The label word is the deterministic two-sided fixed point of the
    substitution (seam letters from ``rule.seed_pair``); atoms cover the
    window with one extra atom beyond each end.
    """
    lo, hi = window
    lo_f, hi_f = _as_fraction(lo), _as_fraction(hi)
    if not (lo_f <= 0 <= hi_f):
        raise DomainError("window must contain the anchor 0")
    rule.require_primitive()
    a, b, K = rule.seed_pair()
    lengths = rule.lengths

    right = _grow_word(rule, b, K, float(hi_f), lengths)
    left = _grow_word(rule, a, K, -float(lo_f), lengths)

    zero = rule.field.zero()
    atoms = [zero]
    labels: list[str] = []
    pos = zero
    for c in right:
        if pos > hi_f:
            break
        pos = pos + lengths[c]
        atoms.append(pos)
        labels.append(c)
    latoms: list[QuadraticNumber] = []
    llabels: list[str] = []
    pos = zero
    for c in reversed(left):
        if pos < lo_f:
            break
        pos = pos - lengths[c]
        latoms.append(pos)
        llabels.append(c)
    atoms = list(reversed(latoms)) + atoms
    labels = list(reversed(llabels)) + labels
    return QuasicrystalChain(
        rule=rule,
        window=(lo_f, hi_f),
        atoms=atoms,
        labels=labels,
        origin_index=len(latoms),
        seed=(a, b, K),
    )


def local_window(chain: QuasicrystalChain, x, R) -> LocalPattern:
    """QC intersected with the open ball B_R(x), recentred at x (exact)."""
    R_f = _as_fraction(R)
    if R_f <= 0:
        raise DomainError("radius must be positive")
    xe = chain._exact(x)
    lo, hi = chain.coverage()
    if xe - R_f < lo or xe + R_f > hi:
        raise RangeError("local window exceeds chain coverage")
    offsets = []
    i0 = chain.atom_index_at_or_left_of(xe - R_f)
    first_tile = None
    last_tile = None
    for i in range(i0, len(chain.atoms)):
        off = chain.atoms[i] - xe
        if off <= -R_f:
            continue
        if off >= R_f:
            break
        offsets.append(off)
    # tiles [s_i, s_{i+1}] meeting the open interval (x-R, x+R)
    for i in range(i0, len(chain.labels)):
        if chain.atoms[i + 1] - xe <= -R_f:
            continue
        if chain.atoms[i] - xe >= R_f:
            break
        if first_tile is None:
            first_tile = i
        last_tile = i
    labels = chain.labels[first_tile : last_tile + 1] if first_tile is not None else ()
    return LocalPattern(radius=R_f, offsets=tuple(offsets), labels=tuple(labels))


def equivalent_windows(chain: QuasicrystalChain, x, y, R) -> bool:
    """Exact test that the R-windows at x and y coincide after recentring."""
    return local_window(chain, x, R) == local_window(chain, y, R)
