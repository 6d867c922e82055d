"""Minimal segments: global minimization of H_p with pinned endpoints.

The interior Hessian of H_p is tridiagonal (nearest-neighbour couplings
from U'', diagonal corrections from V''), so each Newton step is O(p).
Global minimality cannot be certified for a non-convex substrate term, so
a deterministic multistart (equal spacing, substrate snapping, and
low-discrepancy perturbations) is combined with the counting checks from
the order-structure module as a practical certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, RangeError
from .energy import EnergyModel
from .substitution import QuasicrystalChain
from .towers import TowerHierarchy


@dataclass(frozen=True)
class SegmentProblem:
    """Fixed-endpoint minimization of H_p over p-1 interior atoms."""

    model: EnergyModel
    theta_left: float
    theta_right: float
    atom_count: int  # p + 1 atoms in total

    def __post_init__(self):
        if self.atom_count < 2:
            raise DomainError("a segment needs at least two atoms")
        if self.theta_left > self.theta_right:
            raise DomainError("endpoints must be ordered")

    @property
    def p(self) -> int:
        return self.atom_count - 1


@dataclass(frozen=True)
class MinimizeOptions:
    tol: float = 1e-10
    max_iterations: int = 200
    n_perturbed: int = 8
    perturbation: float = 0.25
    seed: int = 0


@dataclass(frozen=True)
class SegmentResult:
    positions: tuple[float, ...]
    energy: float
    residual: float
    iterations: int
    starts_used: int
    monotone: bool
    converged: bool
    certificate: dict | None = None

    def interior(self) -> tuple[float, ...]:
        return self.positions[1:-1]


def _monotone_projection(x: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators: the l2 projection onto non-decreasing vectors."""
    n = len(x)
    val = list(map(float, x))
    wgt = [1.0] * n
    idx = []
    out_val: list[float] = []
    out_w: list[float] = []
    out_len: list[int] = []
    for i in range(n):
        v, w, ln = val[i], wgt[i], 1
        while out_val and out_val[-1] > v:
            pv, pw, pl = out_val.pop(), out_w.pop(), out_len.pop()
            v = (pv * pw + v * w) / (pw + w)
            w += pw
            ln += pl
        out_val.append(v)
        out_w.append(w)
        out_len.append(ln)
    res = np.empty(n)
    pos = 0
    for v, ln in zip(out_val, out_len):
        res[pos : pos + ln] = v
        pos += ln
    return res


def _project_interior(interior: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return np.clip(_monotone_projection(interior), lo, hi)


def _solve_tridiagonal(diag, off, rhs):
    """Thomas elimination; returns None when a pivot is not safely positive
    (the Hessian is then not positive definite and Newton falls back)."""
    n = len(diag)
    c = np.array(off, dtype=float)
    d = np.array(diag, dtype=float)
    b = np.array(rhs, dtype=float)
    for i in range(n - 1):
        if d[i] <= 1e-14:
            return None
        m = c[i] / d[i]
        d[i + 1] -= m * c[i]
        b[i + 1] -= m * b[i]
    if d[-1] <= 1e-14:
        return None
    x = np.empty(n)
    x[-1] = b[-1] / d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = (b[i] - c[i] * x[i + 1]) / d[i]
    return x


_PERTURB_ALPHAS = (
    math.sqrt(2.0) - 1.0,
    math.sqrt(3.0) - 1.0,
    math.sqrt(5.0) - 2.0,
)


def _starting_points(problem: SegmentProblem, options: MinimizeOptions) -> list[np.ndarray]:
    """Deterministic start enumeration for the interior atoms."""
    p = problem.p
    d = p - 1
    lo, hi = problem.theta_left, problem.theta_right
    equal = np.linspace(lo, hi, p + 1)[1:-1]
    starts = [equal.copy()]

    substrate = problem.model.substrate
    if substrate is not None and d > 0:
        atoms = substrate.chain.atom_floats
        snapped = np.array([atoms[np.argmin(np.abs(atoms - t))] for t in equal])
        snapped = _project_interior(snapped, lo, hi)
        starts.append(snapped)

    spacing = (hi - lo) / p if p > 0 else 0.0
    amp = options.perturbation * spacing
    for n in range(1, options.n_perturbed + 1):
        shift = np.array(
            [
                amp * (2.0 * math.modf((i + 1) * (n + options.seed) * _PERTURB_ALPHAS[(i + n) % 3])[0] - 1.0)
                for i in range(d)
            ]
        )
        starts.append(_project_interior(equal + shift, lo, hi))
    return starts


def _newton_descent(problem: SegmentProblem, interior: np.ndarray, options: MinimizeOptions):
    """Damped Newton with monotone-cone projection; returns
    (interior, energy, residual, iterations, converged)."""
    model = problem.model
    lo, hi = problem.theta_left, problem.theta_right

    def assemble(inner):
        return np.concatenate(([lo], inner, [hi]))

    x = _project_interior(np.asarray(interior, dtype=float), lo, hi)
    if x.size == 0:
        theta = assemble(x)
        return x, model.segment_energy(theta), 0.0, 0, True

    energy = model.segment_energy(assemble(x))
    iterations = 0
    for iterations in range(1, options.max_iterations + 1):
        theta = assemble(x)
        g = model.energy_gradient(theta)
        residual = float(np.abs(g).max())
        if residual <= options.tol:
            return x, energy, residual, iterations - 1, True
        diag, off = model.hessian_tridiagonal(theta)
        step = _solve_tridiagonal(diag, off, g)
        if step is None or not np.isfinite(step).all() or float(g @ step) <= 0.0:
            gnorm = float(np.abs(g).max())
            step = g / max(gnorm, 1.0)
        t = 1.0
        improved = False
        for _ in range(60):
            cand = _project_interior(x - t * step, lo, hi)
            cand_energy = model.segment_energy(assemble(cand))
            if cand_energy < energy:
                x, energy = cand, cand_energy
                improved = True
                break
            t *= 0.5
        if not improved:
            # stuck: either converged to the cone boundary or at numerical floor
            g = model.energy_gradient(assemble(x))
            residual = float(np.abs(g).max())
            return x, energy, residual, iterations, residual <= options.tol
    g = model.energy_gradient(assemble(x))
    residual = float(np.abs(g).max())
    return x, energy, residual, iterations, residual <= options.tol


def minimize_segment(problem: SegmentProblem, options: MinimizeOptions | None = None) -> SegmentResult:
    """Deterministic multistart Newton minimization of a segment.

    The result has its endpoints bit-identical to the problem's, gradient
    max-norm at most ``options.tol``, and the lowest energy over all
    starts (ties broken by the lexicographically smallest positions).
    """
    options = options or MinimizeOptions()
    model = problem.model
    if model.substrate is not None:
        sub = model.substrate
        if problem.theta_left - sub.range < sub._atoms[0] or problem.theta_right + sub.range > sub._atoms[-1]:
            raise RangeError("segment endpoints must sit inside coverage with margin R")

    best = None
    starts = _starting_points(problem, options)
    for start in starts:
        x, energy, residual, iterations, converged = _newton_descent(problem, start, options)
        key = (not converged, energy, tuple(x))
        if best is None or key < best[0]:
            best = (key, x, energy, residual, iterations, converged)

    _, x, energy, residual, iterations, converged = best
    positions = (problem.theta_left, *map(float, x), problem.theta_right)
    monotone = all(a <= b for a, b in zip(positions, positions[1:]))
    result = SegmentResult(
        positions=positions,
        energy=float(energy),
        residual=float(residual),
        iterations=iterations,
        starts_used=len(starts),
        monotone=monotone,
        converged=converged,
    )
    if not converged:
        raise ConvergenceError(
            f"no start reached gradient norm {options.tol} "
            f"(best residual {residual:.3e})",
            best=result,
        )
    return result


def verify_critical(model: EnergyModel, positions) -> float:
    """Max-norm of the discrete Euler-Lagrange residual over interior atoms."""
    theta = np.asarray(positions, dtype=float)
    if theta.size < 3:
        raise DomainError("criticality check needs at least one interior atom")
    return float(np.abs(model.energy_gradient(theta)).max())


@dataclass(frozen=True)
class LoopMarks:
    """Minimizing marked points on one skeleton loop.

    ``offsets`` lists the positions within [0, height): the implicit mark
    at the loop start (offset 0) followed by the minimized interior marks.
    """

    level: int
    loop: str
    count: int
    height: float
    offsets: tuple[float, ...]
    lift_start: float
    result: SegmentResult | None


def canonical_lift(chain: QuasicrystalChain, level: int, loop: str, margin: float):
    """Left boundary of the first occurrence at position >= 0 of the loop's
    supertile whose R-enlargement stays inside the chain coverage."""
    starts, types = chain.level_tiles(level)
    lo, hi = chain.atom_floats[0], chain.atom_floats[-1]
    for i, c in enumerate(types):
        if c != loop:
            continue
        a, b = float(starts[i]), float(starts[i + 1])
        if a < 0.0:
            continue
        if a - margin >= lo and b + margin <= hi:
            return starts[i], starts[i + 1]
    raise RangeError(
        f"no occurrence of loop {loop!r} at level {level} fits the chain window; "
        "build the chain on a wider window"
    )


def minimize_loop_segment(
    hierarchy: TowerHierarchy,
    chain: QuasicrystalChain,
    model: EnergyModel,
    level: int,
    loop: str,
    count: int,
    options: MinimizeOptions | None = None,
    initial=None,
) -> LoopMarks:
    """Minimize ``count`` atoms per loop crossing, endpoints pinned at the
    loop start and end.

    The loop potential is evaluated through a concrete occurrence of the
    supertile in the chain (the canonical lift), which requires supertiles
    at this level to be at least as large as the potential range.
    """
    if count < 1:
        raise DomainError("per-loop count must be at least 1")
    lvl = hierarchy.level(level)
    if loop not in lvl.loops:
        raise DomainError(f"unknown loop {loop!r}")
    height = float(lvl.height(loop))
    if model.substrate is not None:
        min_height = min(float(h) for h in lvl.heights)
        if min_height < model.range:
            raise DomainError(
                f"supertiles at level {level} are smaller than the potential "
                f"range {model.range:.6g}; use a deeper level"
            )
    start, end = canonical_lift(chain, level, loop, model.range)
    problem = SegmentProblem(
        model=model,
        theta_left=float(start),
        theta_right=float(end),
        atom_count=count + 1,
    )
    options = options or MinimizeOptions()
    if initial is not None:
        lifted = np.asarray(initial, dtype=float) + float(start)
        x, energy, residual, iterations, converged = _newton_descent(problem, lifted, options)
        seeded = SegmentResult(
            positions=(problem.theta_left, *map(float, x), problem.theta_right),
            energy=float(energy),
            residual=float(residual),
            iterations=iterations,
            starts_used=1,
            monotone=True,
            converged=converged,
        )
        try:
            multistart = minimize_segment(problem, options)
        except ConvergenceError:
            if not seeded.converged:
                raise
            multistart = None
        if multistart is None or (seeded.converged and seeded.energy <= multistart.energy):
            result = seeded
        else:
            result = multistart
    else:
        result = minimize_segment(problem, options)
    offsets = tuple(float(t) - float(start) for t in result.positions[:-1])
    return LoopMarks(
        level=level,
        loop=loop,
        count=count,
        height=height,
        offsets=offsets,
        lift_start=float(start),
        result=result,
    )
