"""Additive and multiplicative characters of tame towers.

The additive character of a tower T is psi_T = psi_F o tr_{T/F}, with psi_F
the fixed level-1 character of the prime field whose values are the canonical
p-power roots of unity of the value ring.

A multiplicative character is parametrized along T^x = pi^Z x mu_{q-1} x
(1+P): a root-of-unity value at the canonical uniformizer, an exponent on
Teichmuller units, and a principal-unit parameter gamma with
theta(exp y) = psi_T(gamma * y).  Since log is an isomorphism on fields with
p - 1 > e, the parametrization is exhaustive there.  On larger-ramification
fields (compositum fields) characters are carried in factored form: a product
of parametrized characters pulled back through norms to subfields; all
layer identities are evaluated through the norms, never through exp/log.
"""

from __future__ import annotations

import math
from functools import lru_cache

from .cyclotomic import CycNumber
from .errors import (
    ConductorTooSmall,
    ConfigError,
    NotAdmissible,
    PrecisionLoss,
)
from .embeddings import EmbeddingMap, Subfield, enumerate_subfields, self_subfield
from .localfield import INF, TowerElement, TowerField


class AddChar:
    """The canonical level-1 additive character of a tower."""

    def __init__(self, field: TowerField):
        self.field = field
        self.level = 1

    def __repr__(self):
        return f"AddChar({self.field!r})"

    def exponent(self, x: TowerElement):
        """(k, p^m) with psi(x) = zeta_{p^m}^k.  Needs x certified mod P^1."""
        F = self.field
        pairs, window = F.trace_digits(x)
        if window is not INF and window < 1:
            raise PrecisionLoss("additive character needs the element mod P^1")
        neg = [m for m, _ in pairs if m <= 0]
        mm = max(0, -min(neg)) if neg else 0
        mod = F.p ** (mm + 1)
        z = 0
        for m, c in pairs:
            if m <= 0:
                z = (z + c * F.p ** (m + mm)) % mod
        return z, mod

    def eval(self, x: TowerElement) -> CycNumber:
        z, mod = self.exponent(x)
        return CycNumber.root(mod, z)

    def __call__(self, x):
        return self.eval(x)


@lru_cache(maxsize=None)
def make_psi(field: TowerField) -> AddChar:
    """psi_T = psi_F o tr_{T/F}; level 1 on every tame tower."""
    return AddChar(field)


class MulChar:
    """Structured character of T^x.

    Parametric form: fields (w, t, gamma); factored form: a tuple of
    (Subfield handle, parametric MulChar) whose norm pullbacks multiply to
    the character.
    """

    __slots__ = ("field", "w", "t", "gamma", "parts", "_gamma_cache")

    def __init__(self, field: TowerField, w=None, t: int = 0, gamma=None,
                 parts=None):
        self.field = field
        self.parts = parts
        self._gamma_cache = None
        if parts is not None:
            self.w = None
            self.t = 0
            self.gamma = None
            return
        if not field.explog_ok:
            raise ConfigError(
                "parametric characters need p - 1 > e; use factored form")
        self.w = w if w is not None else CycNumber.one()
        self.t = t % (field.q - 1)
        if gamma is not None:
            gamma = gamma.cap_window(0)
            if gamma.is_zero():
                gamma = None
            elif gamma.v > -1:
                gamma = None
        self.gamma = gamma

    def __repr__(self):
        if self.parts is not None:
            return f"MulChar(factored, {len(self.parts)} parts on {self.field!r})"
        g = "0" if self.gamma is None else f"val {self.gamma.v}"
        return f"MulChar({self.field!r}, t={self.t}, gamma={g})"

    def is_factored(self) -> bool:
        return self.parts is not None

    # ------------------------------------------------------------- evaluation

    def eval(self, x: TowerElement) -> CycNumber:
        if x.is_zero():
            raise ConfigError("character of zero")
        if self.parts is not None:
            val = CycNumber.one()
            for handle, chi in self.parts:
                val = val * chi.eval(handle.norm(x))
            return val
        F = self.field
        c = self.conductor()
        if x.prec < max(c, 1):
            raise PrecisionLoss(
                f"need the argument mod P^{c} relative; have {x.prec}")
        v = x.v
        unit = TowerElement(F, 0, x.core, x.prec, x.store)
        r, u1 = unit.principal_split()
        out = CycNumber.one()
        if v:
            out = out * (self.w ** (v % _order_cap(self.w)) if v >= 0
                         else self.w.conj() ** ((-v) % _order_cap(self.w)))
        if self.t:
            out = out * CycNumber.root(F.q - 1, self.t * F.dlog_res(r))
        if self.gamma is not None:
            psi = make_psi(F)
            lg = F.log_principal(u1, window=max(c, 1))
            out = out * psi.eval(self.gamma * lg)
        return out

    def __call__(self, x):
        return self.eval(x)

    # ------------------------------------------------------------- invariants

    def gamma_full(self):
        """The principal-unit parameter; for factored characters the exact sum
        of the embedded parameters of the parts."""
        if self.parts is None:
            return self.gamma
        if self._gamma_cache is None:
            total = self.field.zero()
            for handle, chi in self.parts:
                if chi.gamma is not None:
                    total = total + handle.emb.apply(chi.gamma)
            self._gamma_cache = total.cap_window(0)
        g = self._gamma_cache
        return None if g.is_zero() else g

    def conductor(self) -> int:
        g = self.gamma_full()
        if g is not None:
            return 1 - g.v
        if self.parts is not None:
            return 1 if self._factored_tame_nontrivial() else 0
        return 1 if self.t % (self.field.q - 1) else 0

    def _factored_tame_nontrivial(self) -> bool:
        F = self.field
        gen = F.teichmuller(F.res_of(F.xi()))
        return not self.eval(gen).is_one()

    def standard_rep(self) -> TowerElement:
        """The monomial tau(r) pi^(1-c) representing the top layer."""
        c = self.conductor()
        if c < 2:
            raise ConductorTooSmall("standard representative needs conductor >= 2")
        g = self.gamma_full()
        return self.field.monomial(g.residue(), g.v)

    def c_rep(self) -> TowerElement:
        """Canonical exact representative of c_theta: the parameter truncated
        to the window [1-f, 1-r), r = floor((f+1)/2).  theta(1+x) = psi(c x)
        for x in P^r."""
        f = self.conductor()
        if f < 2:
            raise ConductorTooSmall("c_theta needs conductor >= 2")
        r = (f + 1) // 2
        return truncate_to(self.gamma_full(), 1 - r)

    # ------------------------------------------------------------- group ops

    def mul(self, other: "MulChar") -> "MulChar":
        if self.field is not other.field:
            raise ConfigError("characters on different fields")
        if self.parts is None and other.parts is None:
            g1, g2 = self.gamma, other.gamma
            if g1 is None:
                g = g2
            elif g2 is None:
                g = g1
            else:
                g = g1 + g2
            return MulChar(self.field, self.w * other.w,
                           self.t + other.t, g)
        return MulChar(self.field, parts=_as_parts(self) + _as_parts(other))

    def inv(self) -> "MulChar":
        if self.parts is None:
            g = None if self.gamma is None else -self.gamma
            return MulChar(self.field, self.w.conj(), -self.t, g)
        return MulChar(self.field,
                       parts=tuple((h, c.inv()) for h, c in self.parts))

    def __mul__(self, other):
        return self.mul(other)

    def is_trivial_params(self) -> bool:
        return (self.parts is None and self.w.is_one() and
                self.t % (self.field.q - 1) == 0 and self.gamma is None)

    def equals(self, other: "MulChar") -> bool:
        """Exact equality of parametric characters."""
        if self.parts is not None or other.parts is not None:
            raise ConfigError("equality only for parametric characters")
        if self.field is not other.field:
            return False
        if not (self.w == other.w):
            return False
        if (self.t - other.t) % (self.field.q - 1):
            return False
        d = self.mul(other.inv())
        return d.gamma is None


def _order_cap(w: CycNumber) -> int:
    return max(w.modulus, 1)


def _as_parts(chi: MulChar):
    if chi.parts is not None:
        return tuple(chi.parts)
    return ((self_subfield(chi.field), chi),)


def truncate_to(x: TowerElement, hi: int) -> TowerElement:
    """Exact canonical representative of x modulo pi^hi (digits >= hi zeroed)."""
    F = x.field
    if x.is_zero():
        return F.zero()
    if x.window() < hi:
        raise PrecisionLoss("cannot truncate beyond the certified window")
    core = []
    for i, w in enumerate(x.core):
        levels = hi - x.v - i
        m = max(0, min(-(-levels // F.e), F.a))
        pm = F.p**m
        core.append(tuple(c % pm for c in w))
    return F.make(x.v, tuple(core), F.kint, F.kint)


def make_mulchar(field: TowerField, w=None, t: int = 0, gamma=None) -> MulChar:
    return MulChar(field, w, t, gamma)


def pullback(chi: MulChar, K: TowerField, emb: EmbeddingMap) -> MulChar:
    """chi o N_{K/S} through the embedding emb: S -> K.

    Returns a parametric character when K supports exp/log (the parameter is
    the embedded parameter of chi: gamma is preserved), otherwise the
    factored form."""
    S = chi.field
    if emb.src is not S or emb.dst is not K:
        raise ConfigError("embedding does not match the inflation")
    handle = Subfield(S, K, emb)
    if chi.parts is not None:
        return MulChar(K, parts=tuple(
            (Subfield(h.S, K, h.emb.compose(emb)), c) for h, c in chi.parts))
    if not K.explog_ok:
        return MulChar(K, parts=((handle, chi),))
    w_new = chi.eval(handle.norm(K.uniformizer()))
    t_new = 0
    if chi.t:
        gen = K.teichmuller(K.res_of(K.xi()))
        val = chi.eval(handle.norm(gen))
        t_new = _root_exponent(val, K.q - 1)
    g_new = None if chi.gamma is None else emb.apply(chi.gamma)
    return MulChar(K, w_new, t_new, g_new)


def _root_exponent(val: CycNumber, n: int) -> int:
    """Solve val = zeta_n^t for t (val must be an n-th root of unity)."""
    if val.is_one():
        return 0
    root = CycNumber.root(n)
    cur = CycNumber.one()
    for t in range(n):
        if cur == val:
            return t
        cur = cur * root
    raise ConfigError("value is not a root of unity of the expected order")


def restrict_to_base(chi: MulChar, base_handle: Subfield) -> MulChar:
    """The restriction of chi to the prime subfield, as a character there.

    Uses chi(p-element) for the uniformizer value, matching on the prime
    Teichmuller generator for the tame part, and tr_{E/F}(gamma) as the
    principal parameter (exact: tr(gamma * y) = y * tr(gamma) for y in F)."""
    E = chi.field
    F = base_handle.S
    if F.degree != 1:
        raise ConfigError("restriction targets the prime subfield")
    w_F = chi.eval(base_handle.emb.apply(F.uniformizer()))
    gF = (F.p - _prime_gen(F.p)) % F.p
    tval = chi.eval(E.teichmuller(E.int_to_res(_prime_gen(F.p))))
    t_F = _root_exponent(tval, F.p - 1)
    g = chi.gamma_full()
    if g is None:
        gamma_F = None
    else:
        pairs, window = E.trace_digits(g)
        total = F.zero()
        for m, c in pairs:
            total = total + F.from_int(c).div_p(-m)
        gamma_F = total.cap_window(min(0, window)) if window is not INF \
            else total.cap_window(0)
        if gamma_F.is_zero():
            gamma_F = None
    return MulChar(F, w_F, t_F, gamma_F)


@lru_cache(maxsize=None)
def _prime_gen(p: int) -> int:
    from .localfield import _primitive_poly
    return (p - _primitive_poly(p, 1)[0]) % p


# ----------------------------------------------------------------- lattices


@lru_cache(maxsize=None)
def subfield_lattice(field: TowerField):
    return tuple(enumerate_subfields(field))


def handle_contains(big: Subfield, small: Subfield) -> bool:
    """Whether the image of `small` lies inside the image of `big` (both
    subfields of the same top field)."""
    if big.T is not small.T:
        raise ConfigError("handles over different top fields")
    if small.S.degree == 1:
        return True
    gens = [small.emb.pi_img]
    if small.S.f > 1:
        gens.append(small.emb.x_img)
    return all(big.in_image(g)[0] for g in gens)


# -------------------------------------------------------------- admissibility


def _tame_norm_kernel_trivial(chi: MulChar, sub: Subfield) -> bool:
    """Is chi trivial on the Teichmuller part of ker N_{E/S}?

    The norm sends tau(xi^j) to tau(xi^(j rel)) with
    rel = e(E/S) (q_E - 1)/(q_S - 1), so the kernel is generated by
    xi^((q_E - 1)/gcd(rel, q_E - 1))."""
    E = chi.field
    n = E.q - 1
    rel = (E.e // sub.S.e) * ((E.q - 1) // (sub.S.q - 1))
    g = n // math.gcd(rel, n)
    return (chi.t * g) % n == 0


def _principal_factors_through(chi: MulChar, sub: Subfield) -> bool:
    """Does chi restricted to 1 + P come via the norm from sub?

    Equivalent (by duality of the trace pairing) to gamma lying in
    S + O_E."""
    g = chi.gamma_full()
    if g is None:
        return True
    m = 0
    y = g
    if g.v < 0:
        m = (-g.v + chi.field.e - 1) // chi.field.e
        y = g.div_p(-m)
    coeffs = sub.decompose(y)
    proj = sub.emb.apply(coeffs[0]).div_p(m)
    diff = (g - proj).cap_window(0)
    return diff.is_zero()


def _full_factors_through(chi: MulChar, sub: Subfield) -> bool:
    return (_tame_norm_kernel_trivial(chi, sub)
            and _principal_factors_through(chi, sub))


def is_admissible(chi: MulChar, base: Subfield | None = None) -> bool:
    """Admissibility over the prime field: the character does not factor
    through the norm from a proper subfield, and wherever its principal-unit
    restriction does factor, the corresponding extension is unramified."""
    E = chi.field
    subs = subfield_lattice(E)
    for sub in subs:
        if sub.S.degree == E.degree:
            continue
        if _full_factors_through(chi, sub):
            return False
        if E.e // sub.S.e > 1 and _principal_factors_through(chi, sub):
            return False
    return True


def is_generic(chi: MulChar, base: Subfield | None = None) -> bool:
    """Genericity over the prime field (Kutzko's two cases)."""
    E = chi.field
    f = chi.conductor()
    subs = subfield_lattice(E)
    if f > 1:
        gm = chi.standard_rep()
        for sub in subs:
            if sub.S.degree == E.degree:
                continue
            if sub.in_image(gm)[0]:
                return False
        return True
    if f == 1:
        if E.e != 1:
            return False
        n = E.q - 1
        for sub in subs:
            if sub.S.degree == E.degree:
                continue
            if (chi.t * ((E.q - 1) // (sub.S.q - 1))) % n == 0:
                return False
        return True
    return E.degree == 1


# ----------------------------------------------------------- Howe factoring


def _minimal_subfield_containing(E: TowerField, elems, lower: Subfield):
    """Smallest subfield handle containing every element and the handle
    `lower` (subfields come sorted by degree)."""
    for sub in subfield_lattice(E):
        if not handle_contains(sub, lower):
            continue
        if all(sub.in_image(x)[0] for x in elems):
            return sub
    raise ConfigError("no subfield contains the data (lattice incomplete?)")


def howe_factorize(chi: MulChar, base: Subfield | None = None):
    """Factor an admissible character as chi0 * prod phi_k o N.

    Returns (chi0 on the prime field, [(Subfield handle F_k, phi_k)]) with
    the tower strictly increasing, inflation conductors strictly decreasing,
    each phi_k generic relative to the previous field, and the product of
    the pullbacks equal to the input exactly.  Representatives are
    normalized: every phi_k except the last has trivial uniformizer value
    and tame part.  NotAdmissible when the structure is violated.
    """
    E = chi.field
    if base is None:
        base = _prime_handle(E)
    work = chi
    factors = []
    prev = base
    prev_cond = None
    while True:
        f = work.conductor()
        if prev_cond is not None and f >= prev_cond:
            raise NotAdmissible("conductor chain failed to decrease")
        if f >= 2:
            gm = work.standard_rep()
            sub = _minimal_subfield_containing(E, [gm], prev)
            if sub.S.degree == E.degree:
                factors.append((self_subfield(E), work))
                chi0 = MulChar(base.S, CycNumber.one(), 0, None)
                return chi0, factors
            prev_cond = f
            gam = sub.project(gm)
            while True:
                phi = MulChar(sub.S, CycNumber.one(), 0, gam)
                rest = work.mul(pullback(phi, E, sub.emb).inv())
                fr = rest.conductor()
                if fr < 2:
                    break
                nxt = rest.standard_rep()
                ok, pre = sub.in_image(nxt)
                if not ok:
                    break
                gam = gam + pre
            factors.append((sub, phi))
            work = rest
            prev = sub
            continue
        # tame leftover: must come from the prime field via the norm
        if work.gamma is not None:
            raise NotAdmissible("tame stage reached with principal data left")
        chi0 = _solve_base_char(work, base)
        if chi0 is None:
            raise NotAdmissible(
                "leftover tame character does not come from the base")
        if not factors or factors[-1][0].S.degree != E.degree:
            raise NotAdmissible(
                "factorization tower did not reach the full field")
        return chi0, factors


def _prime_handle(E: TowerField) -> Subfield:
    for sub in subfield_lattice(E):
        if sub.S.degree == 1:
            return sub
    raise ConfigError("missing prime subfield")


def _solve_base_char(work: MulChar, base: Subfield):
    """Find chi on the prime field with chi o N equal to the tame character
    `work`; None when the tame exponent is not in the norm image."""
    E = work.field
    F = base.S
    gen = E.teichmuller(E.res_of(E.xi()))
    target = work.eval(gen)
    ngen = base.norm(gen)
    for t in range(F.p - 1):
        cand = MulChar(F, CycNumber.one(), t, None)
        if cand.eval(ngen) == target:
            npi = base.norm(E.uniformizer())
            wv = work.eval(E.uniformizer()) * cand.eval(npi).conj()
            chi0 = MulChar(F, wv, t, None)
            full = pullback(chi0, E, base.emb)
            if chars_equal(full, work):
                return chi0
    return None


def chars_equal(a: MulChar, b: MulChar) -> bool:
    return a.equals(b)


# ----------------------------------------------------------------- randoms


def random_char(field: TowerField, conductor: int, rng,
                w_order: int | None = None) -> MulChar:
    """Random parametric character of the exact given conductor."""
    q = field.q
    n = w_order if w_order is not None else q - 1
    w = CycNumber.root(n, rng.randrange(n))
    if conductor == 0:
        return MulChar(field, w, 0, None)
    t = rng.randrange(q - 1)
    if conductor == 1:
        t = rng.randrange(1, q - 1)
        return MulChar(field, w, t, None)
    digits = [(1 - conductor, rng.randrange(1, q))]
    digits += [(v, rng.randrange(q)) for v in range(2 - conductor, 0)]
    gamma = field.from_digits(digits)
    return MulChar(field, w, t, gamma)


# ------------------------------------------------------------ verification


def verify_c_rep(chi: MulChar, psi: AddChar, depth: int | None = None) -> bool:
    """Check theta(1+x) = psi(c x) on every monomial of the layers
    P^r .. P^(f-1) (and a few deeper), exactly."""
    F = chi.field
    f = chi.conductor()
    r = (f + 1) // 2
    c = chi.c_rep()
    top = depth if depth is not None else min(f + 2, F.k)
    one = F.one()
    for j in range(r, top):
        for a in range(1, F.q):
            x = F.monomial(a, j)
            if not (chi.eval(one + x) == psi.eval(c * x)):
                return False
    return True
