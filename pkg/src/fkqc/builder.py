"""Configurations with prescribed rotation number.

Pick a level l0 and per-loop counts N_j >= 1.  Marking each loop with the
energy-minimizing positions of N_j atoms and pulling the marks back to the
line yields a configuration with rotation number exactly

    rho0 = 1 / sum_j N_j nu_{l0, j}.

Refining advances the construction k levels at a time (k the positivity
power of the substitution): the counts transform through the stage matrix,
the marks are re-minimized jointly per new loop, and rho0 is invariant
because counts and measures transform through the same matrix.  Values of
this form are dense in the positive reals, so any target rotation number
can be approximated by a (level, counts) pair.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ApproximationError, DomainError, RangeError
from .energy import EnergyModel
from .minimize import LoopMarks, MinimizeOptions, minimize_loop_segment
from .quadratic import QuadraticNumber
from .rotation import Configuration, rotation_summary
from .substitution import QuasicrystalChain
from .towers import TowerHierarchy, dense_set_value, dense_set_value_exact, loop_occupancy


@dataclass(frozen=True)
class MarkedSkeleton:
    """Minimizing marks on every loop of one skeleton level.

    ``marks[j]`` holds the offsets within loop j, starting with the
    implicit mark at the loop start (offset 0); interior marks are strictly
    inside (0, height)."""

    level: int
    counts: dict
    marks: dict
    heights: dict

    def loop_marks(self, loop: str) -> tuple[float, ...]:
        return self.marks[loop]


@dataclass(frozen=True)
class BuilderState:
    hierarchy: TowerHierarchy
    chain: QuasicrystalChain
    model: EnergyModel
    base_level: int
    mark_level_effective: int
    stage: int
    marked: MarkedSkeleton
    counts_history: tuple
    rho0: float
    rho0_exact: QuadraticNumber | None
    options: MinimizeOptions

    @property
    def level(self) -> int:
        return self.marked.level


def mark_level(
    hierarchy: TowerHierarchy,
    chain: QuasicrystalChain,
    model: EnergyModel,
    level: int,
    counts,
    options: MinimizeOptions | None = None,
) -> MarkedSkeleton:
    """Minimize counts[j] atoms on every level loop (deterministic)."""
    options = options or MinimizeOptions()
    counts = _as_counts(hierarchy, counts)
    marks = {}
    heights = {}
    for loop in hierarchy.rule.alphabet:
        lm = minimize_loop_segment(
            hierarchy, chain, model, level, loop, counts[loop], options=options
        )
        marks[loop] = lm.offsets
        heights[loop] = lm.height
    return MarkedSkeleton(level=level, counts=counts, marks=marks, heights=heights)


def _as_counts(hierarchy: TowerHierarchy, counts) -> dict:
    alphabet = hierarchy.rule.alphabet
    if isinstance(counts, dict):
        out = {c: int(counts[c]) for c in alphabet}
    else:
        seq = list(counts)
        if len(seq) != len(alphabet):
            raise DomainError("counts must give one entry per loop")
        out = {c: int(n) for c, n in zip(alphabet, seq)}
    if any(n < 1 for n in out.values()):
        raise DomainError("all counts must be at least 1")
    return out


def lift(
    marked: MarkedSkeleton,
    chain: QuasicrystalChain,
    window,
) -> Configuration:
    """Pull the marks back to the line over ``window``.

    Atoms are all supertile boundaries of the marked level inside the
    window plus, for every complete supertile, its interior marks shifted
    by the supertile's left boundary.  With the half-open convention every
    complete supertile carries exactly counts[j] atoms.
    """
    starts, types = chain.level_tiles(marked.level)
    lo, hi = float(window[0]), float(window[1])
    if lo < float(starts[0]) or hi > float(starts[-1]):
        raise RangeError("window exceeds the supertile-decomposable region")
    atoms: list[float] = []
    boundary_flags: list[bool] = []
    floats = [float(s) for s in starts]
    for i, a in enumerate(floats):
        if a < lo or a > hi:
            continue
        atoms.append(a)
        boundary_flags.append(True)
        if i < len(types) and floats[i + 1] <= hi:
            for off in marked.marks[types[i]][1:]:
                atoms.append(a + off)
                boundary_flags.append(False)
    arr = np.asarray(atoms, dtype=float)
    if arr.size == 0:
        raise RangeError("window contains no supertile boundary")
    return Configuration(
        atoms=arr,
        provenance={
            "kind": "builder-lift",
            "level": marked.level,
            "counts": dict(marked.counts),
            "boundaries": np.asarray(boundary_flags, dtype=bool),
        },
    )


def transport_counts(hierarchy: TowerHierarchy, counts: dict) -> dict:
    """Counts k levels deeper through the stage matrix; the rotation value
    1 / sum N nu is exactly invariant under this map."""
    stage_m = hierarchy.stage_matrix()
    alphabet = hierarchy.rule.alphabet
    idx = {c: i for i, c in enumerate(alphabet)}
    return {
        j: sum(stage_m[idx[i]][idx[j]] * counts[i] for i in alphabet) for j in alphabet
    }


def admissible_mark_level(
    hierarchy: TowerHierarchy, model: EnergyModel, level: int
) -> int:
    """First level >= ``level`` (stepping by the stage stride) whose
    supertiles are at least as large as the potential range."""
    if model.substrate is None:
        return level
    l = level
    while True:
        if l > hierarchy.depth:
            raise DomainError(
                f"hierarchy depth {hierarchy.depth} too shallow: supertiles must "
                f"reach the potential range {model.range:.6g}"
            )
        if min(float(h) for h in hierarchy.level(l).heights) >= model.range:
            return l
        l += hierarchy.k


def start_builder(
    hierarchy: TowerHierarchy,
    chain: QuasicrystalChain,
    model: EnergyModel,
    level: int,
    counts,
    options: MinimizeOptions | None = None,
) -> BuilderState:
    """Stage 0 of the construction.

    ``(level, counts)`` define the target rotation number.  If supertiles
    at that level are smaller than the potential range, the counts are
    transported (exactly) to the first admissible level before marking.
    """
    options = options or MinimizeOptions()
    counts = _as_counts(hierarchy, counts)
    rho = dense_set_value(hierarchy, level, counts)
    rho_exact = dense_set_value_exact(hierarchy, level, counts) if hierarchy.exact else None

    eff_level = admissible_mark_level(hierarchy, model, level)
    eff_counts = dict(counts)
    history = [counts]
    l = level
    while l < eff_level:
        eff_counts = transport_counts(hierarchy, eff_counts)
        history.append(eff_counts)
        l += hierarchy.k

    marked = mark_level(hierarchy, chain, model, eff_level, eff_counts, options)
    return BuilderState(
        hierarchy=hierarchy,
        chain=chain,
        model=model,
        base_level=level,
        mark_level_effective=eff_level,
        stage=0,
        marked=marked,
        counts_history=tuple(history),
        rho0=rho,
        rho0_exact=rho_exact,
        options=options,
    )


def refine(state: BuilderState) -> BuilderState:
    """Advance one stage: counts through the stage matrix, marks inherited
    into the larger loops and re-minimized jointly with pinned loop ends.

    The prescribed rotation number is asserted unchanged (exactly, when the
    measures are exact)."""
    hierarchy = state.hierarchy
    rule = hierarchy.rule
    k = hierarchy.k
    new_level = state.level + k
    if new_level > hierarchy.depth:
        raise DomainError(
            f"refinement needs level {new_level} but hierarchy depth is {hierarchy.depth}"
        )
    alphabet = rule.alphabet
    new_counts = transport_counts(hierarchy, state.marked.counts)

    old_heights = rule.level_heights(state.level)
    marks = {}
    heights = {}
    for j in alphabet:
        word = rule.expand(j, k)
        inherited: list[float] = []
        pos = 0.0
        for c in word:
            for off in state.marked.marks[c]:
                inherited.append(pos + off)
            pos += float(old_heights[c])
        interior = inherited[1:]  # drop the new loop's own start
        lm = minimize_loop_segment(
            hierarchy,
            state.chain,
            state.model,
            new_level,
            j,
            new_counts[j],
            options=state.options,
            initial=interior,
        )
        marks[j] = lm.offsets
        heights[j] = lm.height

    marked = MarkedSkeleton(level=new_level, counts=new_counts, marks=marks, heights=heights)
    if state.rho0_exact is not None:
        rho_check = dense_set_value_exact(hierarchy, new_level, new_counts)
        if rho_check != state.rho0_exact:
            raise AssertionError(
                "rotation number drifted across refinement; measure recursion broken"
            )
    return replace(
        state,
        stage=state.stage + 1,
        marked=marked,
        counts_history=state.counts_history + (new_counts,),
    )


def build_for_counts(
    hierarchy: TowerHierarchy,
    chain: QuasicrystalChain,
    model: EnergyModel,
    level: int,
    counts,
    refine_depth: int,
    window,
    options: MinimizeOptions | None = None,
) -> tuple[Configuration, dict]:
    """Mark, refine ``refine_depth`` times, lift over ``window``; returns
    the configuration with construction diagnostics."""
    state = start_builder(hierarchy, chain, model, level, counts, options)
    for _ in range(refine_depth):
        state = refine(state)
    config = lift(state.marked, chain, window)

    final_level = state.level
    occupancy = loop_occupancy(hierarchy, chain, final_level, config.atoms)
    occupancy_exact = all(
        all(c == state.marked.counts[loop] for c in counts_list)
        for loop, counts_list in occupancy.items()
    )
    gaps = np.diff(config.atoms)
    max_gap = float(gaps.max()) if gaps.size else 0.0

    residuals = _interior_residuals(state, config, model)
    summary = rotation_summary(
        hierarchy, chain, config, levels=range(0, final_level + 1)
    )
    diagnostics = {
        "rho0": state.rho0,
        "rho0_exact": state.rho0_exact,
        "base_level": state.base_level,
        "mark_level": state.mark_level_effective,
        "final_level": final_level,
        "counts_history": state.counts_history,
        "occupancy_exact": occupancy_exact,
        "occupancy": occupancy,
        "max_gap": max_gap,
        "max_mark_height": max(
            float(h) for h in hierarchy.level(state.mark_level_effective).heights
        ),
        "el_residual_interior": residuals,
        "slope": summary.slope,
        "tower_bounds": summary.tower_bounds,
    }
    config = Configuration(
        atoms=config.atoms,
        provenance={**config.provenance, "rho0": state.rho0, "stage": state.stage},
    )
    return config, diagnostics


def _interior_residuals(state: BuilderState, config: Configuration, model: EnergyModel) -> float:
    """Max Euler-Lagrange residual over atoms interior to the final-level
    loops (loop junctions are endpoints of the construction, not critical
    points)."""
    starts, _ = state.chain.level_tiles(state.level)
    boundary = {float(s) for s in starts}
    theta = config.atoms
    if theta.size < 3:
        return 0.0
    grad = model.energy_gradient(theta)
    worst = 0.0
    for i in range(1, theta.size - 1):
        if float(theta[i]) in boundary:
            continue
        worst = max(worst, abs(float(grad[i - 1])))
    return worst


def approximate_rho(
    hierarchy: TowerHierarchy,
    rho: float,
    tol: float,
    max_level: int | None = None,
) -> tuple[int, dict]:
    """Smallest level and per-loop counts whose rotation value matches
    ``rho`` within relative tolerance ``tol``.

    Counts start uniform near (1/rho)/nu(C_l) and are greedily adjusted by
    +-1 on the best coordinate; the level escalates until the tolerance is
    met.  The returned pair satisfies the tolerance; it is not claimed to
    be the unique or smallest such pair.
    """
    if rho <= 0:
        raise DomainError("target rotation number must be positive")
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    top = hierarchy.depth if max_level is None else min(max_level, hierarchy.depth)
    target = 1.0 / rho
    best_gap = float("inf")
    best = None
    alphabet = hierarchy.rule.alphabet
    for level in range(top + 1):
        lvl = hierarchy.level(level)
        nus = np.array([float(m) for m in lvl.measures])
        base = max(1, round(target / float(nus.sum())))
        counts = np.full(len(alphabet), base, dtype=np.int64)

        def gap_of(c):
            return abs(float(c @ nus) - target)

        gap = gap_of(counts)
        while True:
            best_move = None
            for j in range(len(alphabet)):
                for d in (1, -1):
                    if counts[j] + d < 1:
                        continue
                    counts[j] += d
                    g = gap_of(counts)
                    counts[j] -= d
                    if g < gap - 1e-18 and (best_move is None or g < best_move[0]):
                        best_move = (g, j, d)
            if best_move is None:
                break
            gap = best_move[0]
            counts[best_move[1]] += best_move[2]
        if gap < best_gap:
            best_gap = gap
            best = (level, {c: int(n) for c, n in zip(alphabet, counts)})
        if gap <= tol * target:
            return level, {c: int(n) for c, n in zip(alphabet, counts)}
    raise ApproximationError(
        f"no (level, counts) within relative gap {tol} up to level {top}; "
        f"best gap {best_gap / target:.3e} at level {best[0]}",
        best=best,
    )
