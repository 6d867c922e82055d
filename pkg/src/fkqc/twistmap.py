"""The induced area-preserving map on (theta, p).

Setting p_n = U'(theta_{n-1} - theta_n) turns the discrete Euler-Lagrange
equations into the recurrence

    p_{n+1}     = p_n - V'(theta_n)
    theta_{n+1} = theta_n - (U')^{-1}(p_n - V'(theta_n))

whose orbits are exactly the critical configurations.  The map is a
composition of shears and preserves the standard area form; orbits are
computed in the line cover, never on the hull itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .energy import EnergyModel


@dataclass(frozen=True)
class PhasePoint:
    theta: float
    p: float


def step(model: EnergyModel, point: PhasePoint) -> PhasePoint:
    """One forward iteration of the induced map."""
    v1 = model.v1(point.theta)
    p_next = point.p - v1
    theta_next = point.theta - model.interaction.u1_inverse(p_next)
    return PhasePoint(theta=theta_next, p=p_next)


def step_back(model: EnergyModel, point: PhasePoint) -> PhasePoint:
    """The inverse map, obtained by solving the recurrence backwards."""
    theta_prev = point.theta + model.interaction.u1_inverse(point.p)
    p_prev = point.p + model.v1(theta_prev)
    return PhasePoint(theta=theta_prev, p=p_prev)


def from_configuration(model: EnergyModel, positions) -> list[PhasePoint]:
    """Phase points (theta_n, p_n) with p_n = U'(theta_{n-1} - theta_n)."""
    theta = np.asarray(positions, dtype=float)
    if theta.size < 2:
        raise DomainError("need at least two atoms to form momenta")
    u1 = model.interaction.u1
    return [
        PhasePoint(theta=float(theta[n]), p=float(u1(float(theta[n - 1] - theta[n]))))
        for n in range(1, theta.size)
    ]


def orbit(model: EnergyModel, start: PhasePoint, steps: int) -> list[PhasePoint]:
    out = [start]
    for _ in range(steps):
        out.append(step(model, out[-1]))
    return out


def jacobian_check(model: EnergyModel, point: PhasePoint, h: float = 1e-6) -> float:
    """|det(J) - 1| for the central-difference Jacobian of the step map."""
    def f(theta, p):
        q = step(model, PhasePoint(theta, p))
        return q.theta, q.p

    t, p = point.theta, point.p
    tp_t, pp_t = f(t + h, p)
    tm_t, pm_t = f(t - h, p)
    tp_p, pp_p = f(t, p + h)
    tm_p, pm_p = f(t, p - h)
    d_theta_d_theta = (tp_t - tm_t) / (2 * h)
    d_p_d_theta = (pp_t - pm_t) / (2 * h)
    d_theta_d_p = (tp_p - tm_p) / (2 * h)
    d_p_d_p = (pp_p - pm_p) / (2 * h)
    det = d_theta_d_theta * d_p_d_p - d_theta_d_p * d_p_d_theta
    return abs(det - 1.0)


def shadow_error(model: EnergyModel, positions, steps: int | None = None) -> float:
    """Max per-coordinate gap between a configuration and the orbit of its
    first phase point.

    Criticality and the orbit condition are equivalent, but the map is
    typically hyperbolic near ground states, so the reproduction horizon is
    finite; callers choose how many steps to compare."""
    theta = np.asarray(positions, dtype=float)
    pts = from_configuration(model, theta)
    n_steps = len(pts) - 1 if steps is None else min(steps, len(pts) - 1)
    cur = pts[0]
    worst = 0.0
    for n in range(1, n_steps + 1):
        cur = step(model, cur)
        worst = max(worst, abs(cur.theta - pts[n].theta), abs(cur.p - pts[n].p))
    return worst
