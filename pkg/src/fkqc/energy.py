"""Interaction and substrate potentials, and the segment energy.

The energy of a bond is H(t, t') = U(t - t') + V(t).  U is a strictly
convex, superlinear interaction (quadratic by default).  V is a short-range
substrate potential: a C^2 bump is attached to every substrate atom, the
bump shape depending only on the local pattern class of the atom (by
default the ordered pair of neighbouring tile types), so V(x) depends only
on the chain seen through a window of radius ``range R`` around x.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, RangeError
from .quadratic import QuadraticNumber, _as_fraction
from .substitution import QuasicrystalChain, letter_frequencies


class InteractionPotential:
    """Nearest-neighbour interaction U with value/derivative accessors.

    The quadratic form U(x) = (kappa/2)(x + rest)^2 has closed-form inverse
    of U'; user-defined potentials supply callbacks and get their convexity
    spot-checked on a grid (a precondition, not a proof).
    """

    def __init__(self, u, u1, u2, u1_inverse=None, kind="user", kappa=None, rest=None):
        self.kind = kind
        self.kappa = kappa
        self.rest = rest
        self._u, self._u1, self._u2 = u, u1, u2
        self._u1_inverse = u1_inverse
        if kind == "user":
            for x in np.linspace(-50.0, 50.0, 101):
                if u2(float(x)) <= 0:
                    raise DomainError(f"interaction potential not convex at x={x}")

    @classmethod
    def quadratic(cls, kappa: float = 1.0, rest: float = 1.0) -> "InteractionPotential":
        if kappa <= 0:
            raise DomainError("stiffness must be positive")
        k, a = float(kappa), float(rest)
        return cls(
            u=lambda x: 0.5 * k * (x + a) ** 2,
            u1=lambda x: k * (x + a),
            u2=lambda x: k,
            u1_inverse=lambda y: y / k - a,
            kind="quadratic",
            kappa=k,
            rest=a,
        )

    def u(self, x: float) -> float:
        return self._u(x)

    def u1(self, x: float) -> float:
        return self._u1(x)

    def u2(self, x: float) -> float:
        return self._u2(x)

    def u_array(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "quadratic":
            return 0.5 * self.kappa * (x + self.rest) ** 2
        return np.array([self._u(float(t)) for t in x])

    def u1_array(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "quadratic":
            return self.kappa * (x + self.rest)
        return np.array([self._u1(float(t)) for t in x])

    def u2_array(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "quadratic":
            return np.full_like(x, self.kappa)
        return np.array([self._u2(float(t)) for t in x])

    def u1_inverse(self, y: float, tol: float = 1e-12) -> float:
        """Invert the increasing homeomorphism U'."""
        if self._u1_inverse is not None:
            return self._u1_inverse(y)
        # bracket by doubling, then bisection + Newton polish
        lo, hi = -1.0, 1.0
        while self._u1(lo) > y:
            lo *= 2.0
        while self._u1(hi) < y:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self._u1(mid) < y:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-9:
                break
        x = 0.5 * (lo + hi)
        for _ in range(50):
            r = self._u1(x) - y
            if abs(r) <= tol:
                break
            x -= r / self._u2(x)
        return x


@dataclass(frozen=True)
class BumpSpec:
    """C^2 bump h*(1 - (x/w)^2)^3 supported on (-w, w)."""

    half_width: float
    amplitude: float

    def __post_init__(self):
        if self.half_width <= 0:
            raise DomainError("bump half-width must be positive")

    def value(self, t: float) -> float:
        u = t / self.half_width
        if abs(u) >= 1.0:
            return 0.0
        s = 1.0 - u * u
        return self.amplitude * s * s * s

    def d1(self, t: float) -> float:
        w = self.half_width
        u = t / w
        if abs(u) >= 1.0:
            return 0.0
        s = 1.0 - u * u
        return -6.0 * self.amplitude * u * s * s / w

    def d2(self, t: float) -> float:
        w = self.half_width
        u = t / w
        if abs(u) >= 1.0:
            return 0.0
        s = 1.0 - u * u
        return -6.0 * self.amplitude * s * (1.0 - 5.0 * u * u) / (w * w)


class SubstratePotential:
    """Range-R potential: one bump per substrate atom, chosen by the atom's
    local pattern class.

    The default class of an atom is the ordered pair (left tile type, right
    tile type); all ordered pairs are distinct classes unless the caller
    maps several keys to the same bump.  Bumps must satisfy 2w < min tile
    length so supports are pairwise disjoint and V is a C^2 function.
    """

    def __init__(self, chain: QuasicrystalChain, rules: dict, range_R=None):
        self.chain = chain
        self.rules = dict(rules)
        min_gap = float(chain.min_gap)
        max_gap = float(chain.max_gap)
        w_max = 0.0
        for key, bump in self.rules.items():
            if 2.0 * bump.half_width >= min_gap:
                raise DomainError(
                    f"bump for {key!r} too wide: 2w must be below the min tile length"
                )
            w_max = max(w_max, bump.half_width)
        # radius of the window that pins down every bump touching a point
        self.range = float(range_R) if range_R is not None else w_max + max_gap
        if range_R is not None and float(range_R) < w_max + max_gap:
            raise DomainError("declared range too small for the bump/key scheme")

        n = len(chain.atoms)
        self._w = np.zeros(n)
        self._h = np.zeros(n)
        self._bumps: list[BumpSpec | None] = [None] * n
        for i in range(n):
            key = chain.pattern_key(i)
            bump = self.rules.get(key) if key is not None else None
            if bump is not None:
                self._w[i] = bump.half_width
                self._h[i] = bump.amplitude
                self._bumps[i] = bump
        self._atoms = chain.atom_floats
        self._lo = self._atoms[0] + self.range
        self._hi = self._atoms[-1] - self.range

    # -- scalar paths -----------------------------------------------------------

    def _locate(self, x: float) -> int | None:
        """Index of the unique atom whose bump support contains x, if any."""
        i = bisect.bisect_right(self._atoms, x)
        for j in (i - 1, i):
            if 0 <= j < len(self._atoms):
                w = self._w[j]
                if w > 0.0 and abs(x - self._atoms[j]) < w:
                    return j
        return None

    def _check(self, x: float) -> None:
        if x < self._lo or x > self._hi:
            raise RangeError(
                f"substrate potential queried at {x} outside coverage margin"
            )

    def _eval_scalar(self, x, deriv: int) -> float:
        if isinstance(x, (QuadraticNumber, Fraction)) or isinstance(x, int):
            return self._eval_exact(x, deriv)
        xf = float(x)
        self._check(xf)
        j = self._locate(xf)
        if j is None:
            return 0.0
        bump = self._bumps[j]
        t = xf - self._atoms[j]
        return (bump.value, bump.d1, bump.d2)[deriv](t)

    def _eval_exact(self, x, deriv: int) -> float:
        """Evaluate through the exact offset so that points with exactly
        equal local windows give bitwise equal values."""
        chain = self.chain
        xe = chain._exact(x)
        self._check(float(xe))
        i = chain.atom_index_at_or_left_of(xe)
        for j in (i, i + 1):
            if 0 <= j < len(chain.atoms):
                w = self._w[j]
                if w <= 0.0:
                    continue
                off = xe - chain.atoms[j]
                w_frac = _as_fraction(float(w))
                if abs(off) < w_frac:
                    bump = self._bumps[j]
                    t = float(off)
                    return (bump.value, bump.d1, bump.d2)[deriv](t)
        return 0.0

    def value(self, x) -> float:
        return self._eval_scalar(x, 0)

    def d1(self, x) -> float:
        return self._eval_scalar(x, 1)

    def d2(self, x) -> float:
        return self._eval_scalar(x, 2)

    # -- vectorized path ---------------------------------------------------------

    def _eval_array(self, x: np.ndarray, deriv: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size and (x.min() < self._lo or x.max() > self._hi):
            raise RangeError("substrate potential queried outside coverage margin")
        out = np.zeros_like(x)
        idx = np.searchsorted(self._atoms, x)
        for cand in (idx - 1, idx):
            c = np.clip(cand, 0, len(self._atoms) - 1)
            t = x - self._atoms[c]
            w = self._w[c]
            h = self._h[c]
            inside = (w > 0.0) & (np.abs(t) < w)
            if not inside.any():
                continue
            u = np.where(inside, t / np.where(w > 0, w, 1.0), 0.0)
            s = 1.0 - u * u
            if deriv == 0:
                val = h * s * s * s
            elif deriv == 1:
                val = -6.0 * h * u * s * s / np.where(w > 0, w, 1.0)
            else:
                val = -6.0 * h * s * (1.0 - 5.0 * u * u) / np.where(w > 0, w * w, 1.0)
            out = np.where(inside, val, out)
        return out

    def value_array(self, x) -> np.ndarray:
        return self._eval_array(x, 0)

    def d1_array(self, x) -> np.ndarray:
        return self._eval_array(x, 1)

    def d2_array(self, x) -> np.ndarray:
        return self._eval_array(x, 2)

    def to_json_dict(self) -> dict:
        from .serialize import substrate_to_dict

        return substrate_to_dict(self)


class EnergyModel:
    """Interaction potential plus an optional substrate potential."""

    def __init__(self, interaction: InteractionPotential, substrate: SubstratePotential | None):
        self.interaction = interaction
        self.substrate = substrate

    def v(self, x) -> float:
        return self.substrate.value(x) if self.substrate is not None else 0.0

    def v1(self, x) -> float:
        return self.substrate.d1(x) if self.substrate is not None else 0.0

    def v2(self, x) -> float:
        return self.substrate.d2(x) if self.substrate is not None else 0.0

    def v_array(self, x) -> np.ndarray:
        if self.substrate is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.substrate.value_array(x)

    def v1_array(self, x) -> np.ndarray:
        if self.substrate is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.substrate.d1_array(x)

    def v2_array(self, x) -> np.ndarray:
        if self.substrate is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.substrate.d2_array(x)

    @property
    def range(self) -> float:
        return self.substrate.range if self.substrate is not None else 0.0

    def segment_energy(self, theta) -> float:
        """H_p over the segment: the last atom's substrate term is excluded."""
        theta = np.asarray(theta, dtype=float)
        if theta.size < 2:
            raise DomainError("a segment needs at least two atoms")
        gaps = theta[:-1] - theta[1:]
        total = float(self.interaction.u_array(gaps).sum())
        total += float(self.v_array(theta[:-1]).sum())
        return total

    def energy_gradient(self, theta) -> np.ndarray:
        """Gradient over the interior atoms; zero characterizes critical
        segments (the discrete Euler-Lagrange equations)."""
        theta = np.asarray(theta, dtype=float)
        if theta.size < 3:
            raise DomainError("gradient needs at least one interior atom")
        u1 = self.interaction.u1_array(theta[:-1] - theta[1:])
        return u1[1:] - u1[:-1] + self.v1_array(theta[1:-1])

    def hessian_tridiagonal(self, theta) -> tuple[np.ndarray, np.ndarray]:
        """(diagonal, superdiagonal) of the interior Hessian of H_p."""
        theta = np.asarray(theta, dtype=float)
        u2 = self.interaction.u2_array(theta[:-1] - theta[1:])
        diag = u2[1:] + u2[:-1] + self.v2_array(theta[1:-1])
        off = -u2[1:-1]
        return diag, off

    def to_json_dict(self) -> dict:
        from .serialize import model_to_dict

        return model_to_dict(self)


def eval_V(model: EnergyModel, x) -> float:
    return model.v(x)


def eval_V1(model: EnergyModel, x) -> float:
    return model.v1(x)


def eval_V2(model: EnergyModel, x) -> float:
    return model.v2(x)


def segment_energy(model: EnergyModel, theta) -> float:
    return model.segment_energy(theta)


def energy_gradient(model: EnergyModel, theta) -> np.ndarray:
    return model.energy_gradient(theta)


def mean_tile_length(chain: QuasicrystalChain) -> float:
    freq = letter_frequencies(chain.rule)
    return sum(freq[c] * float(chain.rule.lengths[c]) for c in chain.rule.alphabet)


def occurring_pattern_keys(chain: QuasicrystalChain) -> list:
    keys = {chain.pattern_key(i) for i in range(1, len(chain.labels))}
    keys.discard(None)
    return sorted(keys)


def default_model(
    chain: QuasicrystalChain,
    kappa: float = 1.0,
    rest: float | None = None,
    w_factor: float = 0.3,
    amplitude: float = 0.1,
    coarse: bool = False,
) -> EnergyModel:
    """The standard weakly-coupled model on a chain.

    Defaults: unit stiffness, rest length = mean tile length, bump width
    0.3 * min tile length, amplitudes alternating +/-amplitude over the
    sorted occurring pattern keys.  With ``coarse`` the two-tile preset is
    used instead: one bump for equal neighbours, one shared bump for mixed
    neighbours.
    """
    if rest is None:
        rest = mean_tile_length(chain)
    w = w_factor * float(chain.min_gap)
    keys = occurring_pattern_keys(chain)
    rules: dict = {}
    if coarse:
        same = BumpSpec(half_width=w, amplitude=amplitude)
        mixed = BumpSpec(half_width=w, amplitude=-amplitude)
        for key in keys:
            rules[key] = same if key[0] == key[1] else mixed
    else:
        for i, key in enumerate(keys):
            rules[key] = BumpSpec(half_width=w, amplitude=amplitude * (1 if i % 2 == 0 else -1))
    substrate = SubstratePotential(chain, rules)
    return EnergyModel(InteractionPotential.quadratic(kappa, rest), substrate)
