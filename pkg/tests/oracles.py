"""Independent oracles for the solver tests.

These deliberately avoid the package's Newton/multistart code path: the
grid oracle enumerates ordered interior positions and polishes the best
candidates with scipy's derivative-free Nelder-Mead; derivatives are
checked by central differences of the raw energy.
"""

import itertools

import numpy as np
from scipy.optimize import minimize as sp_minimize


def oracle_minimize(model, left, right, atom_count, coarse=26, top_k=8):
    """Grid search over ordered interior tuples + Nelder-Mead polish."""
    d = atom_count - 2
    if d == 0:
        return model.segment_energy([left, right]), np.array([])
    vals = np.linspace(left, right, coarse + 2)[1:-1]
    candidates = []
    for combo in itertools.combinations_with_replacement(vals, d):
        theta = np.concatenate(([left], combo, [right]))
        candidates.append((model.segment_energy(theta), combo))
    candidates.sort(key=lambda t: t[0])

    def objective(x):
        xs = np.sort(np.clip(x, left, right))
        return model.segment_energy(np.concatenate(([left], xs, [right])))

    best = None
    for _, combo in candidates[:top_k]:
        res = sp_minimize(
            objective,
            np.array(combo),
            method="Nelder-Mead",
            options=dict(xatol=1e-12, fatol=1e-15, maxiter=20000, maxfev=20000),
        )
        xs = np.sort(np.clip(res.x, left, right))
        energy = objective(res.x)
        if best is None or energy < best[0]:
            best = (energy, xs)
    return best


def oracle_scan_1d(model, left, right, n_coarse=4001, refine_iters=80):
    """Dense scan + ternary refinement for a single interior atom."""
    xs = np.linspace(left, right, n_coarse)[1:-1]
    energies = [model.segment_energy([left, x, right]) for x in xs]
    i = int(np.argmin(energies))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, len(xs) - 1)]

    def f(x):
        return model.segment_energy([left, x, right])

    for _ in range(refine_iters):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    x = 0.5 * (lo + hi)
    return f(x), x


def fd_gradient(model, theta, eps=1e-6):
    """Central differences of H_p over the interior atoms."""
    theta = np.asarray(theta, dtype=float)
    out = np.empty(theta.size - 2)
    for n in range(1, theta.size - 1):
        plus = theta.copy()
        minus = theta.copy()
        plus[n] += eps
        minus[n] -= eps
        out[n - 1] = (model.segment_energy(plus) - model.segment_energy(minus)) / (2 * eps)
    return out
