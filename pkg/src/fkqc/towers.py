"""Tower hierarchy of a substitution chain.

Level ``l`` of the hierarchy has one loop per tile type, realized by the
order-``l`` supertiles of the chain.  Each level carries exact loop heights
(supertile lengths) and transverse measures (supertile frequencies per unit
length) satisfying

    heights[l+1][j] = sum_i M[i][j] * heights[l][i]
    measures[l][i]  = sum_j M[i][j] * measures[l+1][j]
    sum_j measures[l][j] * heights[l][j] = 1

where M is the abelianization of the substitution.  The smallest power k
with M^k entrywise positive is recorded: stepping k levels at a time gives
tower systems in which every loop crosses every loop of the previous system,
which is what the refinement construction requires.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RangeError
from .quadratic import QuadraticNumber
from .substitution import (
    QuasicrystalChain,
    SubstitutionRule,
    letter_frequencies_exact,
    letter_frequencies,
)


@dataclass(frozen=True)
class TowerLevel:
    level: int
    loops: tuple[str, ...]
    heights: tuple
    measures: tuple

    @property
    def loop_count(self) -> int:
        return len(self.loops)

    def height(self, loop: str):
        return self.heights[self.loops.index(loop)]

    def measure(self, loop: str):
        return self.measures[self.loops.index(loop)]

    @property
    def nu_total(self):
        total = self.measures[0]
        for x in self.measures[1:]:
            total = total + x
        return total

    def heights_float(self) -> list[float]:
        return [float(h) for h in self.heights]

    def measures_float(self) -> list[float]:
        return [float(m) for m in self.measures]


class TowerHierarchy:
    """Loop heights, transverse measures and homology for levels 0..depth."""

    def __init__(self, rule: SubstitutionRule, levels, homology, k: int, exact: bool):
        self.rule = rule
        self.levels = tuple(levels)
        self.homology = homology  # constant per level: abelianization of sigma
        self.k = k
        self.exact = exact

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level(self, l: int) -> TowerLevel:
        if not 0 <= l <= self.depth:
            raise DomainError(f"level {l} outside hierarchy (depth {self.depth})")
        return self.levels[l]

    def nu_total(self, l: int) -> float:
        return float(self.level(l).nu_total)

    def stage_matrix(self) -> list[list[int]]:
        """Abelianization of sigma^k (the level-to-level matrix for
        refinement stages, entrywise positive)."""
        m = np.array(self.homology, dtype=object)
        power = m
        for _ in range(self.k - 1):
            power = power @ m
        return [[int(x) for x in row] for row in power]

    def to_json_dict(self) -> dict:
        from .serialize import hierarchy_to_dict

        return hierarchy_to_dict(self)


def build_hierarchy(rule: SubstitutionRule, depth: int) -> TowerHierarchy:
    """Heights and measures for levels 0..depth, exact when the Perron
    eigenvalue lives in the rule's coordinate field."""
    if depth < 1:
        raise DomainError("depth must be at least 1")
    k = rule.positivity_power()
    if k is None:
        raise DomainError("substitution rule is not primitive")
    m = rule.abelianization()
    freq = letter_frequencies_exact(rule)
    exact = freq is not None
    if not exact:
        freq_f = letter_frequencies(rule)
        freq = [freq_f[c] for c in rule.alphabet]

    zero = rule.field.zero()
    heights = [rule.lengths[c] for c in rule.alphabet]
    levels = []
    for l in range(depth + 1):
        if l > 0:
            heights = [
                sum((heights[i] * m[i][j] for i in range(len(m))), start=zero)
                for j in range(len(m))
            ]
        if exact:
            mean = sum((f * h for f, h in zip(freq, heights)), start=zero)
            measures = tuple(f / mean for f in freq)
        else:
            mean = sum(f * float(h) for f, h in zip(freq, heights))
            measures = tuple(f / mean for f in freq)
        levels.append(
            TowerLevel(
                level=l,
                loops=rule.alphabet,
                heights=tuple(heights),
                measures=measures,
            )
        )
    return TowerHierarchy(rule=rule, levels=levels, homology=m, k=k, exact=exact)


@dataclass(frozen=True)
class SkeletonPoint:
    """A point on a level skeleton: loop type plus offset from the loop start.

    Offset 0 on any loop is the singular point (the fiber of the anchor)."""

    level: int
    loop: str
    offset: float
    offset_exact: QuadraticNumber | None = None

    def same_fiber(self, other: SkeletonPoint) -> bool:
        if self.level != other.level or self.loop != other.loop:
            return False
        if self.offset_exact is not None and other.offset_exact is not None:
            return self.offset_exact == other.offset_exact
        return self.offset == other.offset


def project(hierarchy: TowerHierarchy, chain: QuasicrystalChain, x, level: int) -> SkeletonPoint:
    """Project a line position onto the level skeleton: the supertile
    containing x and the exact offset from its left boundary."""
    hierarchy.level(level)
    starts, types = chain.level_tiles(level)
    if len(types) == 0:
        raise RangeError("no complete supertiles at this level in the chain window")
    exact_in = isinstance(x, QuadraticNumber) or not isinstance(x, float)
    xe = chain._exact(x)
    if xe < starts[0] or xe >= starts[-1]:
        raise RangeError("position outside the supertile-decomposable region")
    floats = [float(s) for s in starts]
    import bisect as _b

    i = _b.bisect_right(floats, float(xe)) - 1
    while i + 1 < len(starts) and starts[i + 1] <= xe:
        i += 1
    while i > 0 and starts[i] > xe:
        i -= 1
    off = xe - starts[i]
    return SkeletonPoint(
        level=level,
        loop=types[i],
        offset=float(off),
        offset_exact=off if exact_in else None,
    )


def coarsen(hierarchy: TowerHierarchy, chain: QuasicrystalChain, point: SkeletonPoint, level: int) -> SkeletonPoint:
    """Map a skeleton point down to a shallower level through the supertile
    decomposition (the connecting surjection between skeletons)."""
    if level > point.level:
        raise DomainError("coarsen goes to a shallower level")
    rule = hierarchy.rule
    word = rule.expand(point.loop, point.level - level)
    heights = rule.level_heights(level)
    off = point.offset_exact
    if off is None:
        off = rule.field.coerce(point.offset)
    pos = rule.field.zero()
    for c in word:
        nxt = pos + heights[c]
        if off < nxt or c == word[-1]:
            rel = off - pos
            return SkeletonPoint(
                level=level,
                loop=c,
                offset=float(rel),
                offset_exact=rel if point.offset_exact is not None else None,
            )
        pos = nxt
    raise RangeError("offset beyond supertile height")  # pragma: no cover


def dense_set_value_exact(hierarchy: TowerHierarchy, level: int, counts) -> QuadraticNumber:
    """Exact reciprocal of sum_j N_j * measure[level][j]."""
    if not hierarchy.exact:
        raise DomainError("hierarchy measures are not exact for this rule")
    lvl = hierarchy.level(level)
    ns = _count_vector(hierarchy.rule, counts)
    total = hierarchy.rule.field.zero()
    for n, nu in zip(ns, lvl.measures):
        total = total + nu * n
    return total.inverse()


def dense_set_value(hierarchy: TowerHierarchy, level: int, counts) -> float:
    """Rotation-number value 1 / sum_j N_j nu_{l,j} for positive counts."""
    if hierarchy.exact:
        return float(dense_set_value_exact(hierarchy, level, counts))
    lvl = hierarchy.level(level)
    ns = _count_vector(hierarchy.rule, counts)
    return 1.0 / sum(n * float(nu) for n, nu in zip(ns, lvl.measures))


def _count_vector(rule: SubstitutionRule, counts) -> list[int]:
    if isinstance(counts, dict):
        ns = [counts[c] for c in rule.alphabet]
    else:
        ns = list(counts)
        if len(ns) != len(rule.alphabet):
            raise DomainError("counts must give one entry per tile type")
    for n in ns:
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise DomainError("all counts must be integers >= 1")
    return [int(n) for n in ns]


def loop_occupancy(
    hierarchy: TowerHierarchy,
    chain: QuasicrystalChain,
    level: int,
    config_atoms,
    strict_interior: bool = False,
) -> dict[str, list[int]]:
    """Number of configuration atoms per complete level-``level`` supertile
    crossed by [theta_first, theta_last], grouped by loop type.

    Counts use the half-open convention [t, t') so a partition of the line
    sums exactly.  With ``strict_interior`` the supertiles touching the
    segment endpoints are excluded.
    """
    hierarchy.level(level)
    theta = np.asarray(config_atoms, dtype=float)
    out: dict[str, list[int]] = {c: [] for c in hierarchy.rule.alphabet}
    if theta.size == 0:
        return out
    t_first, t_last = float(theta[0]), float(theta[-1])
    starts, types = chain.level_tiles(level)
    floats = [float(s) for s in starts]
    for i, c in enumerate(types):
        a, b = floats[i], floats[i + 1]
        if strict_interior:
            if not (a > t_first and b < t_last):
                continue
        else:
            if not (a >= t_first and b <= t_last):
                continue
        lo = np.searchsorted(theta, a, side="left")
        hi = np.searchsorted(theta, b, side="left")
        out[c].append(int(hi - lo))
    return out
