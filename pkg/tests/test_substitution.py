from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fkqc import (
    DomainError,
    RangeError,
    SubstitutionRule,
    build_chain,
    crystal_rule,
    equivalent_windows,
    expand_word,
    fibonacci_rule,
    letter_frequencies,
    letter_frequencies_exact,
    local_window,
    thue_morse_rule,
)
from fkqc.quadratic import golden_field

PHI = (1 + 5 ** 0.5) / 2


# -- expansion ----------------------------------------------------------------


def test_expand_word_examples(fib_rule):
    assert expand_word(fib_rule, "L", 0) == "L"
    assert expand_word(fib_rule, "L", 3) == "LSLLS"
    assert len(expand_word(fib_rule, "L", 5)) == 13


def test_expand_word_unknown_seed(fib_rule):
    with pytest.raises(DomainError):
        expand_word(fib_rule, "X", 2)


def test_seed_pair_deterministic(fib_rule, cry_rule):
    assert fib_rule.seed_pair() == ("L", "L", 2)
    assert cry_rule.seed_pair() == ("A", "A", 1)


def test_primitivity():
    assert fibonacci_rule().positivity_power() == 2
    assert crystal_rule().positivity_power() == 1
    f = golden_field()
    swap = SubstitutionRule(("A", "B"), {"A": "B", "B": "A"}, {"A": 1, "B": 1}, f)
    assert not swap.is_primitive()


# -- chain construction --------------------------------------------------------


def test_fibonacci_chain_prefix(fib_rule):
    chain = build_chain(fib_rule, (0, 5))
    f = fib_rule.field
    phi = f.lam()
    expected = [f.zero(), phi, phi + 1, phi * 2 + 1, phi * 3 + 1]
    got = chain.atoms[chain.origin_index : chain.origin_index + 5]
    assert all(x == y for x, y in zip(got, expected))


def test_crystal_chain_window():
    chain = build_chain(crystal_rule(1), (-3, 3))
    assert [float(s) for s in chain.atoms] == list(range(-4, 5))


def test_gap_multiset(fib_chain):
    lengths = set(fib_chain.rule.lengths.values())
    for a, b in zip(fib_chain.atoms, fib_chain.atoms[1:]):
        assert b - a in lengths


def test_window_must_contain_zero(fib_rule):
    with pytest.raises(DomainError):
        build_chain(fib_rule, (1, 5))


def test_nonprimitive_chain_rejected():
    f = golden_field()
    swap = SubstitutionRule(("A", "B"), {"A": "B", "B": "A"}, {"A": 1, "B": 1}, f)
    with pytest.raises(DomainError):
        build_chain(swap, (-3, 3))


def test_two_sided_word_near_origin(fib_chain):
    o = fib_chain.origin_index
    # right word starts with the fixed point LSLLS...; the left word is the
    # suffix limit of expansions of L, ending ...S L
    assert fib_chain.labels[o : o + 5] == ("L", "S", "L", "L", "S")
    assert fib_chain.labels[o - 1] == "L"
    assert fib_chain.labels[o - 2] == "S"


# -- local windows --------------------------------------------------------------


def test_local_window_isolated_atom(fib_chain):
    pat = local_window(fib_chain, 0, 0.5)
    assert len(pat.offsets) == 1 and pat.offsets[0].sign() == 0


def test_local_window_around_s1(fib_chain):
    phi = fib_chain.rule.field.lam()
    pat = local_window(fib_chain, phi, 1.2)
    # atoms within (phi - 1.2, phi + 1.2) are phi and phi + 1
    assert [float(x) for x in pat.offsets] == pytest.approx([0.0, 1.0])
    assert pat.labels == ("L", "S", "L")


def test_local_window_crystal():
    chain = build_chain(crystal_rule(1), (-2, 12))
    pat = local_window(chain, 7, 2.5)
    assert [float(x) for x in pat.offsets] == [-2.0, -1.0, 0.0, 1.0, 2.0]


def test_local_window_overflow(fib_chain):
    with pytest.raises(RangeError):
        local_window(fib_chain, float(fib_chain.atoms[-1]), 1.0)


def test_equivalent_windows_identity(fib_chain):
    assert equivalent_windows(fib_chain, 1.25, 1.25, 2.0)


def test_equivalent_windows_crystal_period():
    chain = build_chain(crystal_rule(1), (-2, 12))
    assert equivalent_windows(chain, 3.2, 7.2, 2.0)
    assert not equivalent_windows(chain, 3.2, 7.3, 2.0)


def test_repetitivity_return(fib_chain):
    """The R-window at 0 recurs at some atom within a bounded scan."""
    R = 2 * PHI
    o = fib_chain.origin_index
    hits = []
    for i in range(o + 1, len(fib_chain.atoms)):
        s = fib_chain.atoms[i]
        if float(s) > 100:
            break
        if equivalent_windows(fib_chain, fib_chain.atoms[o], s, R):
            hits.append(float(s))
    assert hits, "pattern at the origin must recur within the scan"


@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0, 2 * PHI])
def test_repetitivity_several_radii(fib_chain, radius):
    o = fib_chain.origin_index
    found = False
    for i in range(o + 1, len(fib_chain.atoms)):
        if float(fib_chain.atoms[i]) > 120:
            break
        if equivalent_windows(fib_chain, fib_chain.atoms[o], fib_chain.atoms[i], radius):
            found = True
            break
    assert found


# -- frequencies -----------------------------------------------------------------


def test_letter_frequencies_fibonacci(fib_rule):
    freq = letter_frequencies(fib_rule)
    assert freq["L"] == pytest.approx(1 / PHI, abs=1e-12)
    assert freq["S"] == pytest.approx(1 / PHI ** 2, abs=1e-12)


def test_letter_frequencies_exact_fibonacci(fib_rule):
    freq = letter_frequencies_exact(fib_rule)
    f = fib_rule.field
    phi = f.lam()
    assert freq[0] == phi - 1  # 1/phi
    assert freq[1] == 2 - phi  # 1/phi^2


def test_letter_frequencies_degenerate_and_symmetric():
    assert letter_frequencies(crystal_rule())["A"] == 1.0
    tm = letter_frequencies(thue_morse_rule())
    assert tm["A"] == pytest.approx(0.5) and tm["B"] == pytest.approx(0.5)


def test_letter_frequencies_nonprimitive():
    f = golden_field()
    swap = SubstitutionRule(("A", "B"), {"A": "B", "B": "A"}, {"A": 1, "B": 1}, f)
    with pytest.raises(DomainError):
        letter_frequencies(swap)


def test_frequency_convergence_large_window(fib_rule):
    chain = build_chain(fib_rule, (0, 10_000))
    freq = letter_frequencies(fib_rule)
    labels = chain.labels
    for letter in fib_rule.alphabet:
        observed = sum(1 for c in labels if c == letter) / len(labels)
        assert abs(observed - freq[letter]) < 1e-2


# -- level decompositions ---------------------------------------------------------


def test_level_tiles_level_zero_is_atoms(fib_chain):
    starts, types = fib_chain.level_tiles(0)
    assert starts == fib_chain.atoms
    assert types == fib_chain.labels


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_level_boundaries_are_atoms(fib_chain, level):
    starts, types = fib_chain.level_tiles(level)
    atom_set = set(fib_chain.atoms)
    assert all(s in atom_set for s in starts)
    heights = fib_chain.rule.level_heights(level)
    for i, c in enumerate(types):
        assert starts[i + 1] - starts[i] == heights[c]


def test_level_tiles_zero_is_boundary(fib_chain):
    for level in range(5):
        starts, _ = fib_chain.level_tiles(level)
        assert any(s.sign() == 0 for s in starts)


@settings(max_examples=20, deadline=None)
@given(lo=st.integers(min_value=-40, max_value=-5), hi=st.integers(min_value=5, max_value=40))
def test_chain_windows_cover(lo, hi):
    chain = build_chain(fibonacci_rule(), (lo, hi))
    assert float(chain.atoms[0]) <= lo
    assert float(chain.atoms[-1]) >= hi
    diffs = np.diff(chain.atom_floats)
    assert (diffs > 0).all()
