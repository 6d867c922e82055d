"""Rotation-number estimation and tower-count bounds.

A configuration's rotation number is the limit of theta_n / n; its inverse
is the atom density.  For a configuration whose per-loop visit counts at
tower level l are at least N_{l,j}, the rotation number is bracketed by

    1 / (sum_j nu_{l,j} N_{l,j} + 2 nu(C_l))  <=  rho  <=  1 / sum_j nu_{l,j} N_{l,j}

with nu(C_l) the total transverse measure of the level.  The bracket width
shrinks with nu(C_l), which is how rotation numbers are pinned and how
continuity is probed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RangeError
from .towers import TowerHierarchy, loop_occupancy
from .substitution import QuasicrystalChain


@dataclass(frozen=True)
class Configuration:
    """A finite window of a non-decreasing configuration."""

    atoms: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        object.__setattr__(self, "atoms", atoms)
        if atoms.ndim != 1:
            raise DomainError("configuration atoms must be a flat sequence")
        if atoms.size >= 2 and np.any(np.diff(atoms) < 0):
            raise DomainError("configuration must be non-decreasing")

    def __len__(self) -> int:
        return int(self.atoms.size)


@dataclass(frozen=True)
class TowerBound:
    level: int
    lo: float
    hi: float
    min_counts: dict
    excluded_loops: tuple[str, ...]

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class RotationEstimate:
    slope: float
    lsq_slope: float
    tower_bounds: tuple[TowerBound, ...] = ()


def estimate_rotation(config: Configuration) -> RotationEstimate:
    """Endpoint slope and least-squares slope of theta_n against n.

    No convergence claim is made for arbitrary configurations."""
    theta = config.atoms
    if theta.size < 2:
        raise DomainError("rotation estimate needs at least two atoms")
    slope = float((theta[-1] - theta[0]) / (theta.size - 1))
    n = np.arange(theta.size, dtype=float)
    lsq = float(np.polyfit(n, theta, 1)[0])
    return RotationEstimate(slope=slope, lsq_slope=lsq)


def tower_bounds(
    hierarchy: TowerHierarchy,
    chain: QuasicrystalChain,
    config: Configuration,
    level: int,
) -> TowerBound:
    """Rotation-number bracket from the minimal complete-visit counts.

    Loops never visited by the window are excluded (a short-window
    artifact) and reported; partial first/last visits are discarded.
    """
    occupancy = loop_occupancy(hierarchy, chain, level, config.atoms)
    lvl = hierarchy.level(level)
    total = 0.0
    min_counts = {}
    excluded = []
    for loop in lvl.loops:
        counts = occupancy[loop]
        if not counts:
            excluded.append(loop)
            continue
        n_min = min(counts)
        min_counts[loop] = n_min
        total += n_min * float(lvl.measure(loop))
    if not min_counts:
        raise RangeError(f"window crosses no complete level-{level} supertile")
    nu_c = hierarchy.nu_total(level)
    hi = 1.0 / total if total > 0 else float("inf")
    lo = 1.0 / (total + 2.0 * nu_c)
    return TowerBound(
        level=level,
        lo=lo,
        hi=hi,
        min_counts=min_counts,
        excluded_loops=tuple(excluded),
    )


def rotation_summary(
    hierarchy: TowerHierarchy,
    chain: QuasicrystalChain,
    config: Configuration,
    levels,
) -> RotationEstimate:
    base = estimate_rotation(config)
    bounds = []
    for l in levels:
        try:
            bounds.append(tower_bounds(hierarchy, chain, config, l))
        except RangeError:
            break
    return RotationEstimate(
        slope=base.slope,
        lsq_slope=base.lsq_slope,
        tower_bounds=tuple(bounds),
    )


def deepest_midpoint(
    hierarchy: TowerHierarchy,
    chain: QuasicrystalChain,
    config: Configuration,
    max_level: int | None = None,
) -> tuple[float, int]:
    """Midpoint of the deepest available tower-bound interval, the point
    estimate used when a single number is required."""
    top = hierarchy.depth if max_level is None else min(max_level, hierarchy.depth)
    best = None
    for l in range(top + 1):
        try:
            b = tower_bounds(hierarchy, chain, config, l)
        except RangeError:
            break
        best = b
    if best is None:
        raise RangeError("no tower level has a complete visit for this window")
    return 0.5 * (best.lo + best.hi), best.level


@dataclass(frozen=True)
class ProbeEntry:
    config_index: int
    level: int
    inv_diff: float
    bound_8nu: float
    bound_2nu: float
    agrees: bool
    within_8nu: bool
    within_2nu: bool
    flagged: bool


@dataclass(frozen=True)
class ContinuityReport:
    entries: tuple[ProbeEntry, ...]
    agreement_index: dict

    @property
    def flagged(self) -> tuple[ProbeEntry, ...]:
        return tuple(e for e in self.entries if e.flagged)


def continuity_probe(
    hierarchy: TowerHierarchy,
    chain: QuasicrystalChain,
    configs,
    limit_config: Configuration,
    levels=None,
) -> ContinuityReport:
    """Compare each configuration's rotation estimate with the limit's.

    At each level l the reciprocal midpoint difference |1/rho_m - 1/rho| is
    reported against 8 nu(C_l) (and the tighter one-sided 2 nu(C_l)).
    A violation is flagged only when the configurations agree at that level
    in the product-topology sense (all per-loop minimal visit counts within
    2 of the limit's) and the 8 nu bound still fails; configurations that do
    not agree are reported as not close rather than as errors.
    """
    if levels is None:
        levels = range(hierarchy.depth + 1)
    levels = list(levels)

    def bounds_by_level(cfg):
        out = {}
        for l in levels:
            try:
                out[l] = tower_bounds(hierarchy, chain, cfg, l)
            except RangeError:
                break
        return out

    limit_bounds = bounds_by_level(limit_config)
    entries = []
    agreement_index: dict[int, int | None] = {}
    for m, cfg in enumerate(configs):
        cfg_bounds = bounds_by_level(cfg)
        for l in levels:
            if l not in limit_bounds or l not in cfg_bounds:
                continue
            lb, cb = limit_bounds[l], cfg_bounds[l]
            rho_limit = 0.5 * (lb.lo + lb.hi)
            rho_m = 0.5 * (cb.lo + cb.hi)
            inv_diff = abs(1.0 / rho_m - 1.0 / rho_limit)
            nu_c = hierarchy.nu_total(l)
            shared = set(lb.min_counts) & set(cb.min_counts)
            agrees = bool(shared) and all(
                abs(lb.min_counts[j] - cb.min_counts[j]) <= 2 for j in shared
            ) and set(lb.min_counts) == set(cb.min_counts)
            within8 = inv_diff <= 8.0 * nu_c + 1e-12
            within2 = inv_diff <= 2.0 * nu_c + 1e-12
            entries.append(
                ProbeEntry(
                    config_index=m,
                    level=l,
                    inv_diff=inv_diff,
                    bound_8nu=8.0 * nu_c,
                    bound_2nu=2.0 * nu_c,
                    agrees=agrees,
                    within_8nu=within8,
                    within_2nu=within2,
                    flagged=agrees and not within8,
                )
            )
        agree_levels = [e.level for e in entries if e.config_index == m and e.agrees]
        agreement_index[m] = max(agree_levels) if agree_levels else None
    return ContinuityReport(entries=tuple(entries), agreement_index=agreement_index)
