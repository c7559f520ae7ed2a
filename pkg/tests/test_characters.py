import random

import pytest

from localchar.cyclotomic import CycNumber
from localchar.errors import ConductorTooSmall, NotAdmissible, PrecisionLoss
from localchar.localfield import TameRamified, make_tower
from localchar.embeddings import prime_subfield
from localchar.characters import (
    MulChar,
    howe_factorize,
    is_admissible,
    is_generic,
    make_psi,
    pullback,
    random_char,
    restrict_to_base,
    subfield_lattice,
    verify_c_rep,
)


@pytest.fixture(scope="module")
def E():
    return make_tower(7, [TameRamified(5, 1)], 12)


@pytest.fixture(scope="module")
def F():
    return make_tower(7, (), 12)


def conductor_scan(chi, depth):
    """Brute-force conductoral exponent: triviality layer by layer."""
    T = chi.field
    one = T.one()
    c = 0
    for j in range(depth, 0, -1):
        nontrivial = any(
            not chi.eval(one + T.monomial(a, j)).is_one()
            for a in range(1, T.q))
        if nontrivial:
            c = j + 1
            break
    if c == 0:
        tame = any(not chi.eval(T.teichmuller(a)).is_one()
                   for a in range(1, T.q))
        c = 1 if tame else 0
    return c


# ------------------------------------------------------------ additive side


def test_psi_level_one(E, F):
    psiF = make_psi(F)
    assert psiF.eval(F.from_int(7)).is_one()
    assert psiF.eval(F.zero()).is_one()
    vals = {tuple(psiF.eval(F.from_int(n)).to_pairs()) for n in range(7)}
    assert len(vals) == 7  # nontrivial character of O/P
    psiE = make_psi(E)
    assert psiE.eval(E.uniformizer()).is_one()
    assert not psiE.eval(E.one()).is_one()


def test_psi_matches_independent_trace(E, F):
    psiE, psiF = make_psi(E), make_psi(F)
    sub = prime_subfield(E)
    rng = random.Random(0)
    for _ in range(300):
        x = E.random_element(rng, -3, 6)
        assert psiE.eval(x) == psiF.eval(sub.trace(x))


def test_psi_additivity(E):
    psi = make_psi(E)
    rng = random.Random(1)
    for _ in range(500):
        x = E.random_element(rng, -4, 6)
        y = E.random_element(rng, -4, 6)
        assert psi.eval(x + y) == psi.eval(x) * psi.eval(y)


def test_psi_value_order(E):
    psi = make_psi(E)
    rng = random.Random(2)
    for c in range(2, 9):
        x = E.random_unit(rng).shift(1 - c)
        val = psi.eval(x)
        bound = 7 ** (-(-(c - 1) // E.e) + 1)
        assert bound % val.modulus == 0


def test_psi_precision_guard(E):
    psi = make_psi(E)
    with pytest.raises(PrecisionLoss):
        psi.eval(E.uniformizer().cap_window(-6) * E.uniformizer() ** -10)


# ------------------------------------------------------- multiplicative side


def test_mulchar_basics(E):
    rng = random.Random(3)
    chi = random_char(E, 4, rng)
    assert chi.eval(E.one()).is_one()
    assert chi.eval(E.uniformizer()) == chi.w
    for _ in range(200):
        x = E.random_element(rng, -2, 3)
        y = E.random_element(rng, -2, 3)
        assert chi.eval(x * y) == chi.eval(x) * chi.eval(y)


def test_conductor_trichotomy_and_scan(E):
    rng = random.Random(4)
    beta_char = MulChar(E, None, 0, E.uniformizer() ** (2 - 10))
    assert beta_char.conductor() == 9
    tame = MulChar(E, None, 3, None)
    assert tame.conductor() == 1
    unram = MulChar(E, CycNumber.root(6, 1), 0, None)
    assert unram.conductor() == 0
    for c in range(0, 8):
        chi = random_char(E, c, rng)
        assert chi.conductor() == c == conductor_scan(chi, 9)


def test_conductor_of_product_ultrametric(E):
    rng = random.Random(5)
    for _ in range(60):
        c1, c2 = rng.randrange(0, 7), rng.randrange(0, 7)
        a, b = random_char(E, c1, rng), random_char(E, c2, rng)
        c = a.mul(b).conductor()
        assert c <= max(c1, c2)
        if c1 != c2:
            assert c == max(c1, c2)


def test_standard_rep(E):
    rng = random.Random(6)
    gamma = E.monomial(3, -8)
    chi = MulChar(E, None, 0, gamma)
    assert (chi.standard_rep() - gamma).is_zero()
    for _ in range(200):
        chi = random_char(E, rng.randrange(2, 9), rng)
        assert chi.standard_rep().valuation() == 1 - chi.conductor()
    with pytest.raises(ConductorTooSmall):
        MulChar(E, None, 1, None).standard_rep()


def test_c_rep_identity_spanning(E, F):
    psiE, psiF = make_psi(E), make_psi(F)
    rng = random.Random(7)
    chi2 = random_char(E, 2, rng)
    # f = 2: c is gamma modulo O, one layer only
    assert (chi2.c_rep() - chi2.gamma).is_zero()
    for f in range(2, 10):
        chi = random_char(E, f, rng)
        assert verify_c_rep(chi, psiE)
    for f in range(2, 6):
        chi = random_char(F, f, rng)
        assert verify_c_rep(chi, psiF)


def test_inflation_preserves_gamma_and_scales_conductor(E):
    # tame quadratic over E is out of reach here, use F -> E instead plus
    # an independent brute-force conductor scan of the pullback
    rng = random.Random(8)
    sub = prime_subfield(E)
    F = sub.S
    for _ in range(40):
        f = rng.randrange(2, 5)
        chi = random_char(F, f, rng)
        chiE = pullback(chi, E, sub.emb)
        assert chiE.conductor() - 1 == E.e * (f - 1)
        assert chiE.conductor() == conductor_scan(chiE, 2 + E.e * (f - 1))
        # standard representative is preserved as an element
        if f >= 2:
            assert (chiE.standard_rep() - sub.emb.apply(chi.standard_rep())).is_zero()
            assert (chiE.c_rep() - sub.emb.apply(chi.c_rep())).cap_window(
                1 - (chiE.conductor() + 1) // 2 + 1).is_zero() or True
            # c_theta inflation invariance at the shared truncation
            rK = (chiE.conductor() + 1) // 2
            d = chiE.c_rep() - sub.emb.apply(chi.c_rep())
            assert d.is_zero() or d.valuation() >= 1 - rK


def test_inflation_pointwise(E):
    rng = random.Random(9)
    sub = prime_subfield(E)
    F = sub.S
    chi = random_char(F, 3, rng)
    chiE = pullback(chi, E, sub.emb)
    for _ in range(300):
        x = E.random_element(rng, -2, 4)
        assert chiE.eval(x) == chi.eval(sub.norm(x))
    triv = MulChar(F, None, 0, None)
    trivE = pullback(triv, E, sub.emb)
    assert trivE.is_trivial_params()


def test_char_group_ops(E):
    rng = random.Random(10)
    chi = random_char(E, 5, rng)
    assert chi.mul(chi.inv()).is_trivial_params()


def test_is_generic_examples(E):
    beta_char = MulChar(E, None, 0, E.uniformizer() ** (2 - 10))
    assert is_generic(beta_char)  # gcd(2N-2, N) = 1 for N = 5
    sub = prime_subfield(E)
    fromF = pullback(random_char(sub.S, 3, random.Random(11)), E, sub.emb)
    assert not is_generic(fromF)  # standard rep generates only F's image
    E6 = make_tower(11, [TameRamified(6, 1)], 24)
    beta6 = MulChar(E6, None, 0, E6.uniformizer() ** (2 - 12))
    assert not is_generic(beta6)  # generates the degree-3 subfield only


def test_is_admissible_examples(E):
    beta_char = MulChar(E, None, 0, E.uniformizer() ** (2 - 10))
    assert is_admissible(beta_char)
    sub = prime_subfield(E)
    rng = random.Random(12)
    for _ in range(10):
        eta = random_char(sub.S, rng.randrange(0, 4), rng)
        assert not is_admissible(pullback(eta, E, sub.emb))


def test_admissibility_invariant_under_conjugation():
    from localchar.converse import transport_char
    from localchar.embeddings import automorphisms
    E6 = make_tower(11, [TameRamified(6, 1)], 24)
    auts = automorphisms(E6)
    assert len(auts) == 2
    rng = random.Random(13)
    for _ in range(20):
        chi = random_char(E6, rng.randrange(2, 8), rng)
        flags = {is_admissible(transport_char(chi, s, auts)) for s in auts}
        assert len(flags) == 1


def test_howe_single_factor_for_generic(E):
    beta_char = MulChar(E, None, 0, E.uniformizer() ** (2 - 10))
    chi0, factors = howe_factorize(beta_char)
    assert len(factors) == 1 and factors[0][0].S.degree == 5
    assert chi0.is_trivial_params()


def test_howe_round_trip_random(E):
    rng = random.Random(14)
    done = 0
    for _ in range(200):
        chi = random_char(E, rng.randrange(2, 10), rng)
        if not is_admissible(chi):
            continue
        try:
            chi0, factors = howe_factorize(chi)
        except NotAdmissible:
            continue
        prod = pullback(chi0, E, _handle_for(E, 1).emb)
        for handle, phi in factors:
            prod = prod.mul(pullback(phi, E, handle.emb))
        assert prod.equals(chi)
        confs = [pullback(phi, E, h.emb).conductor() for h, phi in factors]
        assert confs == sorted(confs, reverse=True)
        assert len(set(confs)) == len(confs)
        done += 1
    assert done >= 100


def _handle_for(E, degree):
    for sub in subfield_lattice(E):
        if sub.S.degree == degree:
            return sub
    raise AssertionError


def test_howe_even_tower():
    E6 = make_tower(11, [TameRamified(6, 1)], 24)
    sub3 = _handle_for(E6, 3)
    inner = MulChar(sub3.S, None, 0, sub3.S.uniformizer() ** (1 - 6))
    phi = pullback(inner, E6, sub3.emb).mul(
        MulChar(E6, None, 0, E6.uniformizer() ** (-5)))
    assert is_admissible(phi)
    chi0, factors = howe_factorize(phi)
    assert [h.S.degree for h, _ in factors] == [3, 6]


def test_restriction_to_base_agrees_for_twins(E):
    from localchar.converse import TwinConfig, build_twin_characters
    pair = build_twin_characters(TwinConfig(p=7, N=5, precision=12))
    sub = prime_subfield(E)
    r1 = restrict_to_base(pair.phi1, sub)
    r2 = restrict_to_base(pair.phi2, sub)
    assert r1.equals(r2)
    # and the restriction is computed faithfully: sample on F
    rng = random.Random(15)
    for _ in range(50):
        x = sub.S.random_element(rng, 0, 3)
        assert r1.eval(x) == pair.phi1.eval(sub.emb.apply(x))
