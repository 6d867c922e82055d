from fractions import Fraction

import pytest

from fkqc import (
    DomainError,
    RangeError,
    build_chain,
    build_hierarchy,
    coarsen,
    crystal_rule,
    default_model,
    dense_set_value,
    dense_set_value_exact,
    loop_occupancy,
    project,
)

PHI = (1 + 5 ** 0.5) / 2


def test_fibonacci_heights(fib_hierarchy, fib_rule):
    f = fib_rule.field
    phi = f.lam()
    expected = {
        0: (phi, f.one()),
        1: (phi + 1, phi),
        2: (phi * 2 + 1, phi + 1),
    }
    for level, heights in expected.items():
        got = fib_hierarchy.level(level).heights
        assert all(x == y for x, y in zip(got, heights))


def test_fibonacci_level0_measures(fib_hierarchy, fib_rule):
    f = fib_rule.field
    phi = f.lam()
    lvl = fib_hierarchy.level(0)
    assert lvl.measures[0] == phi / (phi + 2)
    assert lvl.measures[1] == f.one() / (phi + 2)
    # cross-check nu_L = 1/sqrt(5) = (2 phi - 1)^{-1}
    assert lvl.measures[0] == (phi * 2 - 1).inverse()


def test_recursions_exact_to_depth_12(fib_hierarchy):
    m = fib_hierarchy.homology
    one = fib_hierarchy.rule.field.one()
    for l in range(fib_hierarchy.depth):
        cur, nxt = fib_hierarchy.level(l), fib_hierarchy.level(l + 1)
        for j in range(2):
            assert nxt.heights[j] == sum(
                (cur.heights[i] * m[i][j] for i in range(2)),
                start=fib_hierarchy.rule.field.zero(),
            )
            assert cur.measures[j] == sum(
                (nxt.measures[i] * m[j][i] for i in range(2)),
                start=fib_hierarchy.rule.field.zero(),
            )
        norm = sum(
            (nu * h for nu, h in zip(cur.measures, cur.heights)),
            start=fib_hierarchy.rule.field.zero(),
        )
        assert norm == one


def test_measure_scaling_selfsimilar(fib_hierarchy):
    phi = fib_hierarchy.rule.field.lam()
    for l in range(fib_hierarchy.depth):
        cur, nxt = fib_hierarchy.level(l), fib_hierarchy.level(l + 1)
        for j in range(2):
            assert nxt.measures[j] * phi == cur.measures[j]


def test_crystal_dyadic(cry_hierarchy):
    for l in range(4):
        lvl = cry_hierarchy.level(l)
        assert float(lvl.heights[0]) == 2 ** l
        assert lvl.measures[0] == cry_hierarchy.rule.field.coerce(Fraction(1, 2 ** l))


def test_positivity_power(fib_hierarchy, cry_hierarchy):
    assert fib_hierarchy.k == 2
    assert cry_hierarchy.k == 1
    assert fib_hierarchy.stage_matrix() == [[2, 1], [1, 1]]


def test_depth_validation(fib_rule):
    with pytest.raises(DomainError):
        build_hierarchy(fib_rule, 0)


# -- projection -------------------------------------------------------------------


def test_project_anchor(fib_hierarchy, fib_chain):
    for level in range(4):
        sk = project(fib_hierarchy, fib_chain, 0, level)
        assert sk.offset == 0.0 and sk.offset_exact.sign() == 0
        assert sk.loop == "L"  # every level word starts with L at the origin


def test_project_inside_tile(fib_hierarchy, fib_chain):
    phi = fib_chain.rule.field.lam()
    x = phi + fib_chain.rule.field.coerce(Fraction(3, 10))
    sk = project(fib_hierarchy, fib_chain, x, 0)
    assert sk.level == 0 and sk.loop == "S"
    assert sk.offset_exact == fib_chain.rule.field.coerce(Fraction(3, 10))


def test_project_crystal(cry_hierarchy, cry_chain):
    sk = project(cry_hierarchy, cry_chain, 5.25, 2)
    assert sk.loop == "A" and sk.offset == pytest.approx(1.25)


def test_project_out_of_range(fib_hierarchy, fib_chain):
    with pytest.raises(RangeError):
        project(fib_hierarchy, fib_chain, 1e9, 0)


def test_project_factor_map(fib_hierarchy, fib_chain):
    """Projecting at level l+1 then coarsening equals projecting at level l."""
    from fractions import Fraction as F

    probes = [F(1, 7), F(5, 2), F(-13, 4), F(21, 5), F(-8, 3)]
    for x in probes:
        xe = fib_chain.rule.field.coerce(x)
        for l in range(3):
            fine = project(fib_hierarchy, fib_chain, xe, l + 1)
            down = coarsen(fib_hierarchy, fib_chain, fine, l)
            direct = project(fib_hierarchy, fib_chain, xe, l)
            assert down.loop == direct.loop
            assert down.offset_exact == direct.offset_exact


# -- dense set of rotation values ---------------------------------------------------


def test_dense_value_examples(fib_hierarchy):
    assert dense_set_value(fib_hierarchy, 0, (1, 1)) == pytest.approx(
        1.3819660112501051, abs=1e-12
    )
    assert dense_set_value(fib_hierarchy, 0, (2, 1)) == pytest.approx(
        0.8541019662496845, abs=1e-12
    )


def test_dense_value_is_mean_tile_length(fib_hierarchy, fib_chain):
    from fkqc import mean_tile_length

    assert dense_set_value(fib_hierarchy, 0, (1, 1)) == pytest.approx(
        mean_tile_length(fib_chain), abs=1e-12
    )


def test_dense_value_crystal(cry_hierarchy):
    for q in (1, 2, 3, 5):
        assert dense_set_value(cry_hierarchy, 0, (q,)) == pytest.approx(1.0 / q)


def test_dense_value_exact(fib_hierarchy):
    phi = fib_hierarchy.rule.field.lam()
    rho = dense_set_value_exact(fib_hierarchy, 0, (1, 1))
    assert rho == (phi + 2) / (phi + 1)  # equals 3 - phi


def test_dense_value_rejects_bad_counts(fib_hierarchy):
    with pytest.raises(DomainError):
        dense_set_value(fib_hierarchy, 0, (0, 1))
    with pytest.raises(DomainError):
        dense_set_value(fib_hierarchy, 0, (1,))


# -- occupancy -----------------------------------------------------------------------


def test_substrate_occupancy_is_one(fib_hierarchy, fib_chain):
    occ = loop_occupancy(fib_hierarchy, fib_chain, 0, fib_chain.atom_floats)
    for counts in occ.values():
        assert counts and all(c == 1 for c in counts)


def test_occupancy_empty(fib_hierarchy, fib_chain):
    occ = loop_occupancy(fib_hierarchy, fib_chain, 3, [0.1, 0.2])
    assert all(len(v) == 0 for v in occ.values())


def test_occupancy_counts_partition(fib_hierarchy, fib_chain):
    """Half-open counting tiles the covered region exactly."""
    import numpy as np

    atoms = fib_chain.atom_floats
    occ = loop_occupancy(fib_hierarchy, fib_chain, 2, atoms)
    total = sum(sum(v) for v in occ.values())
    starts, types = fib_chain.level_tiles(2)
    lo = float(starts[0])
    hi = float(starts[-1])
    inside = np.count_nonzero((atoms >= lo) & (atoms < hi))
    assert total == inside


# -- potential compatibility ----------------------------------------------------------


def test_potential_constant_on_fibers(fib_hierarchy, fib_chain, fib_model):
    """At a level whose supertiles dominate the range, V is exactly equal at
    equal offsets (away from the loop ends by R) in different occurrences."""
    from fractions import Fraction as F

    R = fib_model.range
    level = next(
        l
        for l in range(fib_hierarchy.depth + 1)
        if min(float(h) for h in fib_hierarchy.level(l).heights) >= 2 * R + 0.2
    )
    starts, types = fib_chain.level_tiles(level)
    by_type: dict[str, list] = {}
    for i, c in enumerate(types):
        by_type.setdefault(c, []).append(starts[i])
    checked = 0
    for c, occurrences in by_type.items():
        if len(occurrences) < 2:
            continue
        height = float(fib_hierarchy.level(level).height(c))
        for num in range(1, 20):
            off = fib_chain.rule.field.coerce(
                F(int((R + 0.1) * 1000) + num * int((height - 2 * R - 0.2) * 50), 1000
                )
            )
            if float(off) >= height - R:
                break
            a = occurrences[0] + off
            b = occurrences[1] + off
            assert fib_model.v(a) == fib_model.v(b)
            checked += 1
    assert checked > 10
