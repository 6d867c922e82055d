"""Counting checks on segments against the substrate's translation structure.

If an interval I and its translates I + u see exactly the same substrate
through every R-window along them, then any two disjoint such translates
inside a minimal segment must contain atom counts within 2 of each other
(counts from {N, N+1, N+2} for a single N).  The same spread bound applies
per skeleton loop to the supertile visits of a minimal configuration.
These are necessary conditions; the checkers report violations rather than
repair anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, RangeError
from .quadratic import QuadraticNumber, _as_fraction
from .substitution import QuasicrystalChain, equivalent_windows
from .towers import TowerHierarchy, loop_occupancy


@dataclass(frozen=True)
class TranslateFamily:
    """Pairwise-disjoint translates I + u_k of a base interval, each shift
    verified exactly to preserve all R-windows along I."""

    base: tuple
    radius: Fraction
    shifts: tuple

    def intervals(self):
        a, b = self.base
        return [(a + u, b + u) for u in self.shifts]


@dataclass(frozen=True)
class CountReport:
    counts: tuple[int, ...]
    n_min: int
    spread: int
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _window_events(chain: QuasicrystalChain, lo, hi, radius):
    """Points of (lo, hi) where the open R-window gains or loses an atom,
    plus the endpoints and the midpoints of consecutive pieces.  The local
    pattern is constant between events, so checking this finite exact set
    checks every point of the interval."""
    events = {lo, hi}
    i0 = chain.atom_index_at_or_left_of(lo - radius)
    for i in range(i0, len(chain.atoms)):
        s = chain.atoms[i]
        if s - radius > hi:
            break
        for e in (s - radius, s + radius):
            if lo < e < hi:
                events.add(e)
    ordered = sorted(events)
    probes = list(ordered)
    for a, b in zip(ordered, ordered[1:]):
        probes.append((a + b) / 2)
    return probes


def find_translates(
    chain: QuasicrystalChain,
    base,
    radius,
    scan,
) -> TranslateFamily:
    """All substrate-exact shifts u inside ``scan`` for which every
    R-window along ``base`` is reproduced at base + u, thinned to a
    pairwise-disjoint family.  The zero shift is always included."""
    R = _as_fraction(radius)
    if R <= 0:
        raise DomainError("radius must be positive")
    a = chain._exact(base[0])
    b = chain._exact(base[1])
    if b < a:
        raise DomainError("base interval is reversed")
    scan_lo = chain._exact(scan[0])
    scan_hi = chain._exact(scan[1])
    chain.require_coverage(scan_lo - R, scan_hi + R)
    chain.require_coverage(a - R, b + R)

    probes = _window_events(chain, a, b, R)

    # any valid shift maps a reference atom near I onto an atom
    ref = None
    i0 = chain.atom_index_at_or_left_of(a - R)
    for i in range(i0, len(chain.atoms)):
        s = chain.atoms[i]
        if s - a > -R and s - b < R:
            ref = s
            break
        if s - b >= R:
            break
    if ref is None:
        return TranslateFamily(base=(a, b), radius=R, shifts=(chain.rule.field.zero(),))

    candidates = []
    for s in chain.atoms:
        u = s - ref
        if a + u < scan_lo or b + u > scan_hi:
            continue
        candidates.append(u)
    if not any(u.sign() == 0 for u in candidates):
        candidates.append(chain.rule.field.zero())

    valid = []
    for u in candidates:
        if u.sign() == 0:
            valid.append(u)
            continue
        ok = all(equivalent_windows(chain, x, x + u, R) for x in probes)
        if ok:
            valid.append(u)

    # greedy disjoint thinning outward from u = 0
    valid.sort(key=float)
    zero_at = next(i for i, u in enumerate(valid) if u.sign() == 0)
    kept = [valid[zero_at]]
    last_hi = b
    for u in valid[zero_at + 1 :]:
        if a + u >= last_hi:
            kept.append(u)
            last_hi = b + u
    first_lo = a
    for u in reversed(valid[:zero_at]):
        if b + u <= first_lo:
            kept.insert(0, u)
            first_lo = a + u
    return TranslateFamily(base=(a, b), radius=R, shifts=tuple(kept))


def count_atoms(config_atoms, interval, closed: bool = False) -> int:
    """Atoms in [a, b) by default; the closed [a, b] variant is available
    for diagnostics but the half-open convention is what tiles the line."""
    theta = np.asarray(config_atoms, dtype=float)
    a, b = float(interval[0]), float(interval[1])
    if b < a:
        return 0
    lo = np.searchsorted(theta, a, side="left")
    hi = np.searchsorted(theta, b, side="right" if closed else "left")
    return int(hi - lo)


def check_translate_bounds(config_atoms, family: TranslateFamily) -> CountReport:
    """Counts per translate; a violation is any pair of translates whose
    counts differ by more than 2."""
    counts = []
    for lo, hi in family.intervals():
        counts.append(count_atoms(config_atoms, (float(lo), float(hi))))
    if not counts:
        return CountReport(counts=(), n_min=0, spread=0, violations=())
    n_min = min(counts)
    n_max = max(counts)
    violations = []
    if n_max - n_min > 2:
        i_min = counts.index(n_min)
        i_max = counts.index(n_max)
        violations.append(
            f"translates u={float(family.shifts[i_min]):.6g} and "
            f"u={float(family.shifts[i_max]):.6g} hold {n_min} and {n_max} atoms "
            f"(spread {n_max - n_min} > 2)"
        )
    return CountReport(
        counts=tuple(counts),
        n_min=n_min,
        spread=n_max - n_min,
        violations=tuple(violations),
    )


def check_loop_spread(
    hierarchy: TowerHierarchy,
    chain: QuasicrystalChain,
    config_atoms,
    level: int,
) -> dict[str, CountReport]:
    """Per-loop visit counts at a level with their spreads.

    Visits touching the segment's end rays are excluded; a loop violates
    the bound when its complete-visit counts spread more than 2.
    """
    occupancy = loop_occupancy(hierarchy, chain, level, config_atoms, strict_interior=True)
    out: dict[str, CountReport] = {}
    for loop, counts in occupancy.items():
        if not counts:
            out[loop] = CountReport(counts=(), n_min=0, spread=0, violations=())
            continue
        n_min, n_max = min(counts), max(counts)
        violations = []
        if n_max - n_min > 2:
            violations.append(
                f"loop {loop!r} at level {level}: visit counts spread "
                f"{n_max - n_min} > 2 (min {n_min}, max {n_max})"
            )
        out[loop] = CountReport(
            counts=tuple(counts),
            n_min=n_min,
            spread=n_max - n_min,
            violations=tuple(violations),
        )
    return out
