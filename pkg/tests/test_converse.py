import random

import pytest

from localchar.errors import ConfigError, RangeViolation
from localchar.localfield import TameRamified, Unramified, make_tower
from localchar.characters import MulChar, is_admissible, random_char
from localchar.ambient import compositum_abstract, double_cosets
from localchar.converse import (
    TwinConfig,
    TwinPair,
    a_exponent,
    build_twin_characters,
    case_one_scan,
    classify_case,
    enumerate_twist_pairs,
    is_conjugate,
    iter_twist_pairs,
    mutate_on_level_two,
    search_distinguisher,
    tame_extensions,
    transport_char,
    verify_coset_products,
    verify_rank_one_twists,
    verify_twin_pair,
)
from localchar.embeddings import automorphisms


@pytest.fixture(scope="module")
def pair5():
    return build_twin_characters(TwinConfig(p=7, N=5, precision=12))


@pytest.fixture(scope="module")
def pair7():
    return build_twin_characters(TwinConfig(p=11, N=7, precision=28))


def test_config_validation():
    with pytest.raises(ConfigError):
        TwinConfig(p=7, N=4).validate()
    with pytest.raises(ConfigError):
        TwinConfig(p=5, N=5).validate()  # p - 1 <= N
    with pytest.raises(ConfigError):
        TwinConfig(p=11, N=6).validate()  # even N needs ell
    with pytest.raises(ConfigError):
        TwinConfig(p=11, N=6, ell=4).validate()  # gcd(ell, N) > 1


def test_twin_pair_odd(pair5):
    checks = verify_twin_pair(pair5)
    assert checks["pass"], checks
    assert pair5.tower == [1, 5]


def test_twin_pair_even():
    pair = build_twin_characters(TwinConfig(p=11, N=6, ell=5, precision=24))
    checks = verify_twin_pair(pair)
    assert checks["pass"], checks
    assert pair.tower == [1, 3, 6]


def test_conjugacy_on_field_with_automorphisms():
    E6 = make_tower(11, [TameRamified(6, 1)], 24)
    auts = automorphisms(E6)
    sigma = next(a for a in auts if not (a.pi_img - E6.uniformizer()).is_zero())
    rng = random.Random(0)
    chi = random_char(E6, 5, rng)
    assert is_conjugate(chi, chi)
    assert is_conjugate(chi, transport_char(chi, sigma, auts))


def test_tame_extension_catalog():
    exts = tame_extensions(11, 2, 10)
    labels = sorted(s for _, s in exts)
    assert labels == ["ram(2,u=g^0)", "ram(2,u=g^1)", "unram(2)"]
    exts1 = tame_extensions(7, 1, 10)
    assert len(exts1) == 1 and exts1[0][0].degree == 1
    exts4 = tame_extensions(7, 4, 10)
    assert any(lab.startswith("mixed") and L is None for L, lab in exts4)


def test_enumerated_pairs_admissible(pair7):
    pairs, skipped = enumerate_twist_pairs(11, 2, 2, 16)
    assert not skipped
    assert all(is_admissible(tw.lam) for tw in pairs)
    assert all(tw.lam.conductor() <= 2 for tw in pairs)
    # ramified quadratics carry no admissible tame characters
    assert all(tw.m >= 1 for tw in pairs if tw.shape.startswith("ram"))


def test_classify_case_examples():
    label, vb, va = classify_case(5, 1, 1, 1, r=1)
    assert (label, vb, va) == ("beta", -8, -5)
    label, vb, va = classify_case(7, 1, 2, 2)
    assert label == "alpha" and vb == -12 and va == -14


def test_case_one_scan_exhaustive():
    rep = case_one_scan((5, 6, 7), m_bound=12)
    assert rep["pass"] and rep["instances"] > 50


def test_a_exponent_values_and_guards():
    assert a_exponent(1, 5, 1, 1, 1, s=1, r=1) == 3
    with pytest.raises(RangeViolation):
        a_exponent(1, 5, 1, 1, 1, s=2, r=2)  # 2r < N-1 fails
    with pytest.raises(RangeViolation):
        a_exponent(0, 5, 1, 1, 1)
    # mirrored case
    assert a_exponent(1, 7, 2, 1, 1, s=2, r=2, mirror=True) == 2


def test_double_cosets_trivial_and_quadratic(pair5):
    E = pair5.E
    F = make_tower(7, (), 12)
    data = double_cosets(E, F)
    assert len(data) == 1 and data[0].deg_K == 5 and data[0].e == 1
    L = make_tower(7, [Unramified(2)], 12)
    data = double_cosets(E, L)
    assert len(data) == 1 and data[0].orbit_size == 2
    assert sum(d.deg_K for d in data) == 10  # Mackey dimension count
    assert data[0].e2p == 1 and data[0].e2 * data[0].e2p == 5


def test_compositum_shapes(pair5):
    E = pair5.E
    L = make_tower(7, [TameRamified(2, 1)], 12)
    K, iE, iL = compositum_abstract(E, L, 40)
    assert (K.e, K.f) == (10, 1)
    Lu = make_tower(7, [Unramified(2)], 12)
    K2, _, _ = compositum_abstract(E, Lu, 40)
    assert (K2.e, K2.f) == (5, 2)


def test_coset_products_r1(pair5):
    pairs, _ = enumerate_twist_pairs(7, 1, 3, 12)
    assert len(pairs) >= 10
    for tw in pairs:
        rep = verify_coset_products(pair5, tw)
        assert rep.verdict, (tw.label(), rep.serialize())


def test_coset_products_r2_samples_both_cases(pair7):
    pairs, _ = enumerate_twist_pairs(11, 2, 3, 16)
    cases = set()
    rng = random.Random(1)
    sample = rng.sample(pairs, 25)
    for tw in sample:
        rep = verify_coset_products(pair7, tw)
        assert rep.verdict, (tw.label(), rep.serialize())
        cases.add(rep.case)
    assert "beta" in cases


def test_coset_products_deep_invariants(pair7):
    pairs, _ = enumerate_twist_pairs(11, 2, 3, 16)
    picks = [next(tw for tw in pairs if tw.shape.startswith("ram") and tw.m == 1),
             next(tw for tw in pairs if tw.shape.startswith("unram") and tw.m == 2)]
    for tw in picks:
        rep = verify_coset_products(pair7, tw, deep=True)
        assert rep.verdict
        assert rep.extra["conductor_formula"]
        assert rep.extra["c_data_agreement"]
        assert rep.extra["middle_layer_agreement"]


def test_mutated_pair_fails_equ6(pair7):
    cfg = pair7.cfg
    bad = TwinPair(cfg, pair7.E, pair7.phi1, mutate_on_level_two(pair7.phi2),
                   pair7.beta, pair7.selector, pair7.tower)
    # a level-2 perturbation needs a twist deep enough that the symmetric
    # term of exponent A = 2 appears: unramified L with m = 2 (case alpha)
    pairs, _ = enumerate_twist_pairs(11, 2, 3, 16)
    sample = [tw for tw in pairs if tw.m == 2 and tw.shape.startswith("unram")]
    results = [verify_coset_products(bad, tw).verdict for tw in sample[:40]]
    assert not all(results)
    # the clean pair passes the same instances
    assert all(verify_coset_products(pair7, tw).verdict for tw in sample[:10])


def test_rank_one_small_bound(pair5):
    rep = verify_rank_one_twists(pair5, 1)
    assert rep["pass"] and rep["twists"] == 36 and rep["all_twisted_ramified"]


def test_search_finds_nothing_at_rank_one(pair5):
    rep = search_distinguisher(pair5, 1, 4)
    assert rep["found"] is None
    assert rep["searched"] > 0


def test_search_finds_distinguisher_and_mutating_back_to_rank_one(pair5):
    rep = search_distinguisher(pair5, 2, 6)
    assert rep["found"] is not None
    assert rep["found"]["reverified"]
    assert rep["found"]["m"] == 3
    # the same conductor on a rank-1 shape does not distinguish
    F = make_tower(7, (), 12)
    alpha = F.from_digits([(-3, 1)])
    lam = MulChar(F, None, 0, alpha)
    from localchar.converse import TwistPair
    tw1 = TwistPair(F, lam, 3, lam.c_rep(), "unram(1)")
    assert verify_coset_products(pair5, tw1).verdict
