import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from naqkit.bitcode import InvalidArgument, check_prefix_free
from naqkit.bounds import (
    C_ID,
    C_VP,
    DiscreteDistribution,
    IdentityFamily,
    SelectionModel,
    binary_entropy,
    collision_certificate,
    entropy,
    fano_lower_bound,
    gc_index_vs_p,
    gc_required,
    gc_simulate,
    gc_success,
    gc_sweep,
    identity_family_bound,
    overlapping_panel,
    panel_overlap,
    separated_panel,
    variant_panel_bound,
    verify_collision_certificate,
)
from naqkit.descsel import parity_system, planted_system
from naqkit.executor import REFERENCE, UNIVERSAL

# --- Fano -----------------------------------------------------------------------


def test_fano_examples():
    assert fano_lower_bound(3, 0, 8, 1) == 2.0
    # 3 - h(0.1) - 0.1 log2 7 - 1 by hand: 3 - 0.468996 - 0.280735 - 1
    assert fano_lower_bound(3, 0.1, 8, 1) == pytest.approx(1.2503, abs=1e-3)
    assert fano_lower_bound(1, 0.5, 2, 1) == 0.0


def test_fano_rejects_bad_arguments():
    for args in [(3, 1.0, 8), (3, -0.1, 8), (0.5, 0, 1), (4, 0, 8), (-1, 0, 8)]:
        with pytest.raises(InvalidArgument):
            fano_lower_bound(*args)


@given(st.floats(0, 0.99), st.floats(0, 0.99), st.integers(2, 64))
def test_fano_monotone_in_epsilon_below_uniform_error(e1, e2, k):
    lo, hi = sorted((e1, e2))
    if hi <= 1 - 1 / k:
        H = math.log2(k)
        assert fano_lower_bound(H, lo, k) >= fano_lower_bound(H, hi, k) - 1e-12


def test_entropy_helpers():
    assert entropy(DiscreteDistribution.uniform(8)) == pytest.approx(3.0)
    assert binary_entropy(0.5) == 1.0 and binary_entropy(0) == 0.0
    d = DiscreteDistribution([("a", 0.25), ("b", 0.75)])
    assert d.support_size == 2 and d.cdf()[-1] == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        DiscreteDistribution([("a", 0.5)])
    with pytest.raises(InvalidArgument):
        binary_entropy(1.5)


# --- pigeonhole -----------------------------------------------------------------


def test_identity_family_shape():
    fam = IdentityFamily(3)
    assert fam.instance("101") == "011101" and fam.identifier("011101") == "101"
    assert fam.predicate("011101", "1011") and not fam.predicate("011101", "101")
    with pytest.raises(InvalidArgument):
        fam.identifier("0111")


@pytest.mark.parametrize("n", [2, 4, 8])
@pytest.mark.parametrize("E,slack", [(REFERENCE, 10), (UNIVERSAL, 12)])
def test_pigeonhole_bound(n, E, slack):
    rep = identity_family_bound(n, E, n + slack)
    assert rep["unresolved"] == 0
    assert rep["holds"] and rep["sup_burden"] >= n - C_ID
    assert rep["witnesses_distinct"] and rep["certificate_valid"]
    assert rep["top_quantile"]["burden_at_least_n_minus_c"]


def test_pigeonhole_sup_values():
    got = [identity_family_bound(n, E, n + s)["sup_burden"]
           for n in (2, 4, 8) for E, s in ((REFERENCE, 10), (UNIVERSAL, 12))]
    assert got == [8, 10, 10, 12, 16, 18]


@pytest.mark.parametrize("n,c", [(2, 0), (4, 0), (8, 0), (8, 3), (3, 5)])
def test_collision_certificate_recheck(n, c):
    cert = collision_certificate(n, c)
    assert verify_collision_certificate(cert)
    if cert["collision"]:
        s1, s2 = cert["collision"]["s1"], cert["collision"]["s2"]
        assert len(s1) == len(s2) == n and s1 != s2


def test_tampered_certificate_is_rejected():
    cert = collision_certificate(4)
    cert["collision"] = dict(cert["collision"], s2="0001")
    assert not verify_collision_certificate(cert)
    cert = collision_certificate(4)
    cert["short_advice"] = 16
    assert not verify_collision_certificate(cert)


def test_identity_family_range():
    with pytest.raises(InvalidArgument):
        identity_family_bound(13, REFERENCE, 20)
    with pytest.raises(InvalidArgument):
        identity_family_bound(4, REFERENCE, 3)


# --- variant panels --------------------------------------------------------------


@pytest.mark.parametrize("size", [1, 2, 4, 8])
def test_separated_panels(size):
    panel = separated_panel(size)
    assert panel_overlap(panel) == 1
    assert check_prefix_free(panel)[0]
    rep = variant_panel_bound(panel)
    assert rep["status"] == "ok" and rep["passed"]
    assert rep["max_m"] >= math.ceil(math.log2(size)) - C_VP


def test_panel_max_values():
    assert [variant_panel_bound(separated_panel(s))["max_m"] for s in (1, 2, 4, 8)] == [1, 5, 8, 9]


def test_overlapping_panel_violates_precondition():
    rep = variant_panel_bound(overlapping_panel(4))
    assert rep["overlap"] == 4 and rep["status"] == "precondition-violated" and not rep["passed"]


def test_panel_overlap_counts():
    assert panel_overlap({}) == 0
    assert panel_overlap({"1": {"a", "b"}, "01": {"b"}, "00": {"c"}}) == 2


# --- selection model -----------------------------------------------------------


def test_gc_closed_form():
    assert gc_success(0.5, 1) == 0.5
    assert gc_success(0.1, 0) == 0.0
    assert gc_success(1.0, 3) == 1.0
    assert gc_required(0.01, 0.05) == 300
    with pytest.raises(InvalidArgument):
        gc_required(0, 0.05)
    with pytest.raises(InvalidArgument):
        SelectionModel(0.5, -1)


@given(st.floats(0.001, 1), st.integers(0, 200))
def test_gc_success_monotone_in_n(p, n):
    assert gc_success(p, n) <= gc_success(p, n + 1) + 1e-15


def test_gc_required_meets_target():
    for p in (0.5, 0.1, 0.01):
        for eps in (0.1, 0.05, 0.01):
            n = gc_required(p, eps)
            assert 1 - gc_success(p, n) <= eps


def test_gc_simulation_within_three_sigma():
    reps = gc_sweep([(p, n) for p in (0.5, 0.1, 0.01) for n in (1, 10, 100)], 10_000, seed=5)
    assert all(r["within_3sigma"] for r in reps)


def test_gc_simulation_independent_of_workers():
    m = SelectionModel(0.1, 10)
    assert gc_simulate(m, 2500, 9, workers=1) == gc_simulate(m, 2500, 9, workers=2)
    with pytest.raises(InvalidArgument):
        gc_simulate(m, 0, 1)


def test_gc_index_reports():
    par = gc_index_vs_p("", "1", parity_system())
    assert par["complete"] and par["index"] == 3 and par["log_index"] == 2
    assert par["gap"] == par["log_index"] - par["log_inv_p"]
    planted = gc_index_vs_p("", "1", planted_system(16), response_cap=16)
    assert planted["complete"] and planted["gap"] < 0
    assert "truncated" in planted["semimeasure"]
