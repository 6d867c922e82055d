from fractions import Fraction

import numpy as np
import pytest

from fkqc import (
    BumpSpec,
    DomainError,
    EnergyModel,
    InteractionPotential,
    RangeError,
    build_chain,
    crystal_rule,
    default_model,
    equivalent_windows,
    eval_V,
    eval_V1,
    eval_V2,
    fibonacci_rule,
    mean_tile_length,
)
from oracles import fd_gradient

PHI = (1 + 5 ** 0.5) / 2


# -- bump shape ------------------------------------------------------------------


def test_bump_vanishes_c2_at_support_edge():
    b = BumpSpec(half_width=0.3, amplitude=0.1)
    for t in (0.3, -0.3, 0.5, -1.0):
        assert b.value(t) == 0.0
        assert b.d1(t) == 0.0
        assert b.d2(t) == 0.0
    assert b.value(0.0) == 0.1
    assert b.d1(0.0) == 0.0


def test_bump_derivatives_match_finite_differences():
    b = BumpSpec(half_width=0.3, amplitude=-0.07)
    h = 1e-6
    for t in np.linspace(-0.29, 0.29, 23):
        fd1 = (b.value(t + h) - b.value(t - h)) / (2 * h)
        fd2 = (b.d1(t + h) - b.d1(t - h)) / (2 * h)
        assert abs(fd1 - b.d1(t)) < 1e-7
        assert abs(fd2 - b.d2(t)) < 1e-7


def test_v_second_derivative_by_sampling(fib_model):
    """V'' matches finite differences of V' at interior points."""
    h = 1e-4
    for x in np.linspace(-20.3, 20.3, 101):
        fd = (fib_model.v1(x + h) - fib_model.v1(x - h)) / (2 * h)
        assert abs(fd - fib_model.v2(x)) < 1e-4


# -- substrate values -------------------------------------------------------------


def test_v_zero_between_atoms(fib_chain, fib_model):
    mid = 0.5 * (fib_chain.atom_floats[60] + fib_chain.atom_floats[61])
    assert eval_V(fib_model, mid) == 0.0
    assert eval_V1(fib_model, mid) == 0.0
    assert eval_V2(fib_model, mid) == 0.0


def test_v_peak_at_atom(fib_chain, fib_model):
    o = fib_chain.origin_index
    for i in range(o, o + 6):
        key = fib_chain.pattern_key(i)
        bump = fib_model.substrate.rules[key]
        assert eval_V(fib_model, float(fib_chain.atoms[i])) == bump.amplitude
        assert eval_V1(fib_model, float(fib_chain.atoms[i])) == 0.0


def test_v_coverage_error(fib_chain, fib_model):
    with pytest.raises(RangeError):
        eval_V(fib_model, float(fib_chain.atoms[-1]))


def test_bump_width_validation(fib_chain):
    with pytest.raises(DomainError):
        default_model(fib_chain, w_factor=0.6)  # 2w >= min tile


def test_default_parameters(fib_chain, fib_model):
    assert fib_model.interaction.kappa == 1.0
    assert fib_model.interaction.rest == pytest.approx(mean_tile_length(fib_chain))
    assert fib_model.interaction.rest == pytest.approx(3 - PHI)
    for bump in fib_model.substrate.rules.values():
        assert bump.half_width == pytest.approx(0.3)
        assert abs(bump.amplitude) == pytest.approx(0.1)


def test_range_property_exact(fib_chain, fib_model):
    """Equal R-windows give bitwise equal V at 1000 exactly shifted pairs."""
    R = fib_model.range
    f = fib_chain.rule.field
    atoms = fib_chain.atoms
    lo_i = fib_chain.atom_index_at_or_left_of(f.coerce(-100))
    hi_i = fib_chain.atom_index_at_or_left_of(f.coerce(100))
    rng = np.random.default_rng(11)
    deltas = [Fraction(k, 97) for k in range(-48, 49)]
    checked = 0
    while checked < 1000:
        i = int(rng.integers(lo_i, hi_i))
        j = int(rng.integers(lo_i, hi_i))
        delta = f.coerce(deltas[int(rng.integers(0, len(deltas)))])
        x = atoms[i] + delta
        y = atoms[j] + delta
        if not equivalent_windows(fib_chain, x, y, R):
            continue
        assert fib_model.v(x) == fib_model.v(y)
        assert fib_model.v1(x) == fib_model.v1(y)
        checked += 1


# -- segment energy ------------------------------------------------------------------


def test_segment_energy_rest_spacing():
    m = EnergyModel(InteractionPotential.quadratic(1.0, 1.0), None)
    assert m.segment_energy([0.0, 1.0, 2.0]) == 0.0


def test_segment_energy_displaced():
    m = EnergyModel(InteractionPotential.quadratic(1.0, 1.0), None)
    assert m.segment_energy([0.0, 0.5, 2.0]) == pytest.approx(0.25)


def test_single_bond_energy(fib_model):
    t0, t1 = 0.35, 1.9
    expected = fib_model.interaction.u(t0 - t1) + fib_model.v(t0)
    assert fib_model.segment_energy([t0, t1]) == pytest.approx(expected, abs=1e-15)


def test_energy_additivity(fib_model):
    theta = [0.0, 1.31, 2.7, 4.05, 5.4, 6.9]
    total = fib_model.segment_energy(theta)
    left = fib_model.segment_energy(theta[:3])
    right = fib_model.segment_energy(theta[2:])
    assert abs(total - (left + right)) < 1e-12


def test_gradient_zero_for_equal_spacing_no_substrate():
    m = EnergyModel(InteractionPotential.quadratic(1.0, 0.7), None)
    g = m.energy_gradient([0.0, 1.1, 2.2, 3.3])
    assert np.abs(g).max() == 0.0


def test_gradient_closed_form():
    m = EnergyModel(InteractionPotential.quadratic(1.0, 1.0), None)
    g = m.energy_gradient([0.0, 0.4, 1.0])
    assert g[0] == pytest.approx(-0.2)


def test_gradient_matches_central_differences(fib_model):
    rng = np.random.default_rng(5)
    for _ in range(12):
        n = int(rng.integers(3, 12))
        base = float(rng.uniform(-60, 40))
        theta = np.sort(base + np.cumsum(rng.uniform(0.7, 1.9, size=n)))
        g = fib_model.energy_gradient(theta)
        fd = fd_gradient(fib_model, theta, eps=1e-6)
        assert np.abs(g - fd).max() < 1e-6


def test_hessian_matches_gradient_differences(fib_model):
    theta = np.array([0.0, 1.4, 2.65, 4.1, 5.5, 6.8])
    diag, off = fib_model.hessian_tridiagonal(theta)
    eps = 1e-6
    d = theta.size - 2
    H = np.zeros((d, d))
    for n in range(d):
        plus = theta.copy()
        minus = theta.copy()
        plus[n + 1] += eps
        minus[n + 1] -= eps
        H[:, n] = (
            fib_model.energy_gradient(plus) - fib_model.energy_gradient(minus)
        ) / (2 * eps)
    assert np.abs(np.diag(H) - diag).max() < 1e-5
    assert np.abs(np.diag(H, 1) - off).max() < 1e-5


def test_user_interaction_convexity_check():
    with pytest.raises(DomainError):
        InteractionPotential(
            u=lambda x: x ** 3, u1=lambda x: 3 * x ** 2, u2=lambda x: 6 * x
        )


def test_user_interaction_u1_inverse():
    pot = InteractionPotential(
        u=lambda x: np.cosh(x),
        u1=lambda x: np.sinh(x),
        u2=lambda x: np.cosh(x),
    )
    for y in (-3.0, -0.4, 0.0, 1.7, 9.2):
        x = pot.u1_inverse(y)
        assert abs(np.sinh(x) - y) < 1e-12
