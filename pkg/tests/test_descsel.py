from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from naqkit.bitcode import InvalidArgument, length_lex
from naqkit.complexity import CI_CAP, Caps, khat_exact, m_exact
from naqkit.descsel import (
    ADJACENT_SWAP,
    BLOCK_REVERSE,
    C_DSEL,
    C_FA,
    LENGTH_LEX,
    RealizerEnumeration,
    c_cond,
    ceil_log2,
    check_bijective,
    conditional_lb_audit,
    enumeration_distortion,
    feasible_at,
    feature_system,
    fiber_genericity_audit,
    finite_ambiguity_check,
    first_bit_system,
    match_system,
    parity_system,
    planted_system,
    prefix_flag_system,
    prefix_pair_system,
    selection_index,
    two_part_bound,
)


def test_ceil_log2():
    assert [ceil_log2(i) for i in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 2, 2, 3, 3, 4]
    assert ceil_log2(Fraction(3, 2)) == 1 and ceil_log2(Fraction(1, 2)) == -1
    with pytest.raises(InvalidArgument):
        ceil_log2(0)


def test_selection_index_examples():
    fs = parity_system()
    assert selection_index("", "1", fs) == 3  # "", "0", "1"
    assert selection_index("", "0", fs) == 1
    assert selection_index("", "1", fs, cap=2) == float("inf")


def test_enumerations_are_bijective():
    for en in (LENGTH_LEX, ADJACENT_SWAP, BLOCK_REVERSE):
        assert check_bijective(en, 1 << 12)
    broken = RealizerEnumeration("bad", lambda i: "0", lambda r: 1)
    assert not check_bijective(broken, 4)
    with pytest.raises(InvalidArgument):
        LENGTH_LEX.pi(0)


def test_length_lex_enumeration_order():
    assert [LENGTH_LEX.pi(i) for i in range(1, 8)] == list(length_lex(2))


@pytest.mark.parametrize("fs", [parity_system(), match_system(), first_bit_system(),
                                prefix_flag_system(3), prefix_pair_system(3)],
                         ids=lambda fs: fs.id)
def test_predicate_is_circuit_of_features(fs):
    for x in ("", "1", "01"):
        for r in length_lex(10):
            assert fs.predicate(x, r) == fs.circuit(fs.phi(x, r))


def test_feature_system_registry():
    assert feature_system("prefix-flag", k=3).m == 4
    with pytest.raises(InvalidArgument):
        feature_system("nope")
    with pytest.raises(InvalidArgument):
        prefix_flag_system(12)


@pytest.mark.parametrize("name,params,x", [
    ("parity", {}, ""), ("parity", {}, "101"), ("match", {}, "0110"), ("first-bit", {}, "1"),
    ("prefix-flag", {"k": 4}, "01"), ("prefix-pair", {"k": 4}, "110"),
])
def test_two_part_bound_holds(name, params, x):
    fs = feature_system(name, **params)
    res = two_part_bound(x, fs, caps=Caps(CI_CAP))
    assert res.holds and res.m <= res.bound + C_DSEL
    assert res.bound == min(r["bound"] for r in res.table if "bound" in r)


def test_two_part_bound_parity_value():
    res = two_part_bound("", parity_system())
    # y = "1" costs 5 bits at index 3
    assert res.argmin_y == "1" and res.bound == khat_exact("1", 20).value + 2
    assert res.m == khat_exact("1", 20).value


def test_conditional_audit_uses_provable_constant():
    assert c_cond(2) == 7
    cases = [(fs, x, y) for fs in (first_bit_system(), match_system(), parity_system())
             for x in ("", "0", "1", "10") for y in fs.feasible_vectors()]
    reps = [conditional_lb_audit(x, y, fs) for fs, x, y in cases]
    assert len(reps) >= 20
    complete = [r for r in reps if r["complete"]]
    assert complete and all(r["passed"] for r in complete)
    fb = conditional_lb_audit("0", "01", first_bit_system())
    assert fb["k_y_given_x"] == 8 and fb["fiber_min"] == 5 and fb["slack"] == -3


def test_finite_ambiguity_collapse():
    for fs in (prefix_flag_system(4), prefix_pair_system(4)):
        rep = finite_ambiguity_check(["1", "01", "110"], fs)
        assert rep["fixture_valid"] and rep["passed"] and rep["observed_c_fa"] <= C_FA


def test_finite_ambiguity_flags_bad_prototypes():
    rep = finite_ambiguity_check(["1"], prefix_flag_system(3), prototypes=lambda y: ["000"])
    assert not rep["fixture_valid"] and not rep["passed"]
    with pytest.raises(InvalidArgument):
        finite_ambiguity_check(["1"], parity_system())


def test_genericity_singleton_fibers_with_large_c():
    rep = fiber_genericity_audit("1", prefix_flag_system(4), c=7)
    assert rep["all_generic"] and rep["tightness"]["holds"]
    assert rep["tightness"]["m"] == m_exact("1", prefix_flag_system(4).predicate, Caps(20)).value


def test_genericity_fails_for_small_c_on_singletons():
    # floor(i^-alpha) = 0 for i >= 2, so a singleton fiber's own member is an outlier
    assert not fiber_genericity_audit("1", prefix_flag_system(4), c=1)["all_generic"]


def test_planted_outlier_is_detected():
    rep = fiber_genericity_audit("", planted_system(16), c=2)
    (pair,) = rep["pairs"]
    assert not rep["all_generic"] and pair["complete"]
    assert pair["outliers"] == ["1" * 16] and pair["allowed"] == 0


def test_enumeration_distortion():
    fs = prefix_flag_system(4)
    pairs = [(x, "1" + r) for x in ("1", "01") for r in ("1000", "1111", "0110", "0101")
             if r.startswith(x)]
    same = enumeration_distortion(LENGTH_LEX, LENGTH_LEX, fs, pairs)
    assert same["D"] == 1 and same["passed"]
    swap = enumeration_distortion(LENGTH_LEX, ADJACENT_SWAP, fs, pairs)
    assert 1 < swap["D"] <= 2 and swap["passed"]
    rev = enumeration_distortion(LENGTH_LEX, BLOCK_REVERSE, fs, pairs)
    assert rev["D"] < 2 and rev["passed"]


@given(st.integers(1, 1 << 14))
def test_adjacent_swap_within_factor_two(i):
    j = ADJACENT_SWAP.index(LENGTH_LEX.pi(i))
    assert Fraction(1, 2) <= Fraction(j, i) <= 2


def test_feasible_at_first_index():
    feas = feasible_at("", match_system(), cap=64)
    assert feas == {"110": 1}  # only "" matches the empty length
    for y, i in feas.items():
        assert selection_index("", y, match_system()) == i
