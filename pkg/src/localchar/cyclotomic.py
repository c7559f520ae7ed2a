"""Exact arithmetic in cyclotomic integer rings, with a formal half-power of q.

Values of all characters, Gauss sums and epsilon factors live here.  A
CycNumber is an element of Z[zeta_M]; a ScaledCyc additionally carries an
integer exponent of the formal scalar q^(1/2).

Internally an element is stored over the tensor basis of Z[zeta_M] =
(x) Z[zeta_{l^a}] over the prime powers l^a || M, with the power basis
{zeta_{l^a}^j : 0 <= j < phi(l^a)} in each factor.  This basis is canonical,
so equality is dictionary equality after lifting to a common modulus, and
reducing a single monomial costs at most l-1 terms per prime factor.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath

from .errors import CapacityError, NotInvertible

_MAX_MODULUS = 10**9  # lifting beyond this is almost certainly a bug


@lru_cache(maxsize=None)
def _factorize(m: int):
    """Prime-power factorization of m as a tuple of (l, a, l^a, phi(l^a))."""
    if m < 1:
        raise ValueError("modulus must be positive")
    out = []
    n = m
    d = 2
    while d * d <= n:
        if n % d == 0:
            a = 0
            la = 1
            while n % d == 0:
                n //= d
                a += 1
                la *= d
            out.append((d, a, la, la - la // d))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1, n, n - 1))
    return tuple(out)


@lru_cache(maxsize=None)
def _crt_units(m: int):
    """Per-factor data (la, phi, v) with v = inv(m/la) mod la, for exponent splitting."""
    fact = _factorize(m)
    out = []
    for (_l, _a, la, phi) in fact:
        v = pow(m // la, -1, la) if la > 1 else 0
        out.append((la, phi, v))
    return tuple(out)


def _reduce_exp(j, l, a, la, phi):
    """Express zeta_{l^a}^j (0 <= j < l^a) over the basis exponents [0, phi).

    Returns a list of (exponent, sign).  Uses zeta^phi = -(1 + zeta^{l^{a-1}}
    + ... + zeta^{l^{a-1}(l-2)}); the offset t = j - phi is < l^{a-1}, so one
    step suffices.
    """
    if j < phi:
        return [(j, 1)]
    t = j - phi
    step = la // l
    return [(t + s * step, -1) for s in range(l - 1)]


def _mono_mul_keys(k1, k2, fact):
    """Product of two basis monomials as a list of (key, sign)."""
    out = [((), 1)]
    for (j1, j2, (l, a, la, phi)) in zip(k1, k2, fact):
        red = _reduce_exp((j1 + j2) % la, l, a, la, phi)
        out = [(key + (jj,), c * s) for (key, c) in out for (jj, s) in red]
    return out


def _root_key_terms(m: int, k: int):
    """zeta_m^k expanded over the tensor basis, as a list of (key, sign)."""
    out = [((), 1)]
    for (l, a, la, phi), (_la, _phi, v) in zip(_factorize(m), _crt_units(m)):
        j = (k * v) % la
        red = _reduce_exp(j, l, a, la, phi)
        out = [(key + (jj,), c * s) for (key, c) in out for (jj, s) in red]
    return out


class CycNumber:
    """Element of Z[zeta_M] in canonical tensor form."""

    __slots__ = ("modulus", "terms")

    def __init__(self, modulus: int, terms: dict):
        self.modulus = modulus
        self.terms = terms  # dict key-tuple -> nonzero int

    # -- construction -----------------------------------------------------

    @classmethod
    def integer(cls, n: int, modulus: int = 1) -> "CycNumber":
        key = tuple(0 for _ in _factorize(modulus))
        return cls(modulus, {key: n} if n else {})

    @classmethod
    def zero(cls, modulus: int = 1) -> "CycNumber":
        return cls.integer(0, modulus)

    @classmethod
    def one(cls, modulus: int = 1) -> "CycNumber":
        return cls.integer(1, modulus)

    @classmethod
    def root(cls, modulus: int, k: int = 1) -> "CycNumber":
        """Canonical representation of zeta_M^k."""
        terms: dict = {}
        for key, s in _root_key_terms(modulus, k % modulus):
            terms[key] = terms.get(key, 0) + s
        return cls(modulus, {k2: c for k2, c in terms.items() if c})

    @classmethod
    def from_root_sum(cls, modulus: int, items) -> "CycNumber":
        """Sum of coeff * zeta_M^exponent over (exponent, coeff) pairs."""
        terms: dict = {}
        for k, c in items:
            if not c:
                continue
            for key, s in _root_key_terms(modulus, k % modulus):
                nc = terms.get(key, 0) + c * s
                if nc:
                    terms[key] = nc
                else:
                    terms.pop(key, None)
        return cls(modulus, terms)

    # -- modulus handling --------------------------------------------------

    def lift(self, modulus: int) -> "CycNumber":
        """Rewrite over Z[zeta_modulus]; self.modulus must divide modulus."""
        if modulus == self.modulus:
            return self
        if modulus % self.modulus:
            raise ValueError("can only lift to a multiple of the modulus")
        if modulus > _MAX_MODULUS:
            raise CapacityError(f"modulus lift to {modulus} exceeds capacity")
        old = _factorize(self.modulus)
        new = _factorize(modulus)
        # basis monomials stay basis monomials under exponent scaling
        plan = []  # per new factor: (old-index or None, scale)
        oi = {l: (i, a) for i, (l, a, _la, _phi) in enumerate(old)}
        for (l, a, _la, _phi) in new:
            if l in oi:
                i, aold = oi[l]
                plan.append((i, l ** (a - aold)))
            else:
                plan.append((None, 1))
        terms = {}
        for key, c in self.terms.items():
            nk = tuple(0 if i is None else key[i] * sc for (i, sc) in plan)
            terms[nk] = c
        return CycNumber(modulus, terms)

    def _common(self, other: "CycNumber"):
        m = math.lcm(self.modulus, other.modulus)
        return self.lift(m), other.lift(m)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, int):
            other = CycNumber.integer(other, self.modulus)
        a, b = self._common(other)
        terms = dict(a.terms)
        for k, c in b.terms.items():
            nc = terms.get(k, 0) + c
            if nc:
                terms[k] = nc
            else:
                terms.pop(k, None)
        return CycNumber(a.modulus, terms)

    __radd__ = __add__

    def __neg__(self):
        return CycNumber(self.modulus, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = CycNumber.integer(other, self.modulus)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return CycNumber.zero(self.modulus)
            return CycNumber(self.modulus,
                             {k: c * other for k, c in self.terms.items()})
        a, b = self._common(other)
        fact = _factorize(a.modulus)
        terms: dict = {}
        for k1, c1 in a.terms.items():
            for k2, c2 in b.terms.items():
                c = c1 * c2
                for key, s in _mono_mul_keys(k1, k2, fact):
                    nc = terms.get(key, 0) + c * s
                    if nc:
                        terms[key] = nc
                    else:
                        terms.pop(key, None)
        return CycNumber(a.modulus, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not defined in the ring")
        result = CycNumber.one(self.modulus)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conj(self) -> "CycNumber":
        """Complex conjugation: every root of unity to its inverse."""
        fact = _factorize(self.modulus)
        terms: dict = {}
        for key, c in self.terms.items():
            out = [((), 1)]
            for j, (l, a, la, phi) in zip(key, fact):
                red = _reduce_exp((-j) % la, l, a, la, phi)
                out = [(k2 + (jj,), cc * s) for (k2, cc) in out for (jj, s) in red]
            for k2, s in out:
                nc = terms.get(k2, 0) + c * s
                if nc:
                    terms[k2] = nc
                else:
                    terms.pop(k2, None)
        return CycNumber(self.modulus, terms)

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.as_int() == 1

    def as_int(self):
        """The value as a plain integer, or None if it is not rational."""
        if not self.terms:
            return 0
        if len(self.terms) != 1:
            return None
        key, c = next(iter(self.terms.items()))
        return c if all(j == 0 for j in key) else None

    def __eq__(self, other):
        if isinstance(other, int):
            return self.as_int() == other
        if not isinstance(other, CycNumber):
            return NotImplemented
        a, b = self._common(other)
        return a.terms == b.terms

    def __hash__(self):
        raise TypeError("CycNumber is not hashable")

    # -- output ----------------------------------------------------------------

    def to_pairs(self):
        """Sorted (exponent-of-zeta_M, coefficient) pairs, canonical form.

        The tensor monomial with exponents (j_l) is zeta_M^k for
        k = sum j_l * (M / l^a): indeed k * inv(M/l^a) = j_l mod l^a."""
        m = self.modulus
        fact = _factorize(m)
        pairs = []
        for key, c in self.terms.items():
            k = 0
            for j, (_l, _a, la, _phi) in zip(key, fact):
                k = (k + j * (m // la)) % m
            pairs.append((k, c))
        return sorted(pairs)

    def embed(self, precision_bits: int = 64):
        """Complex value at the principal root, with a rigorous error bound.

        Returns (mpmath.mpc value, float error bound).
        """
        if precision_bits < 64:
            raise ValueError("precision_bits must be >= 64")
        with mpmath.workprec(precision_bits + 16):
            total = mpmath.mpc(0)
            size = 0
            m = self.modulus
            for k, c in self.to_pairs():
                total += c * mpmath.e ** (2j * mpmath.pi * k / m)
                size += abs(c)
            # each term exact to ~2^-(prec+12) relative; crude global bound
            err = float((size + 1) * mpmath.mpf(2) ** (-(precision_bits + 4)))
            return mpmath.mpc(total), err

    def approx(self) -> complex:
        v, _ = self.embed(64)
        return complex(v)

    def __repr__(self):
        pairs = self.to_pairs()
        if not pairs:
            return "Cyc(0)"
        body = " + ".join(
            (f"{c}" if k == 0 else f"{c}*z{self.modulus}^{k}") for k, c in pairs[:6]
        )
        if len(pairs) > 6:
            body += f" + ... ({len(pairs)} terms)"
        return f"Cyc[{self.modulus}]({body})"


class ScaledCyc:
    """A cyclotomic integer times q^(qhalf/2), q the relevant residue size."""

    __slots__ = ("num", "qhalf", "q")

    def __init__(self, num: CycNumber, qhalf: int = 0, q: int = 1):
        self.num = num
        self.qhalf = qhalf
        self.q = q

    @classmethod
    def one(cls, q: int = 1) -> "ScaledCyc":
        return cls(CycNumber.one(), 0, q)

    @classmethod
    def from_cyc(cls, num: CycNumber, q: int = 1) -> "ScaledCyc":
        return cls(num, 0, q)

    def _check_q(self, other: "ScaledCyc"):
        if self.q != other.q and not (self.num.is_zero() or other.num.is_zero()):
            if self.q != 1 and other.q != 1:
                raise ValueError("mixing ScaledCyc values over different q")

    def __mul__(self, other):
        if isinstance(other, (int, CycNumber)):
            return ScaledCyc(self.num * other, self.qhalf, self.q)
        self._check_q(other)
        q = self.q if self.q != 1 else other.q
        return ScaledCyc(self.num * other.num, self.qhalf + other.qhalf, q)

    __rmul__ = __mul__

    def conj(self) -> "ScaledCyc":
        return ScaledCyc(self.num.conj(), self.qhalf, self.q)

    def __pow__(self, n: int):
        out = ScaledCyc.one(self.q)
        for _ in range(n):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other):
        if not isinstance(other, ScaledCyc):
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return self.num.is_zero() and other.num.is_zero()
        self._check_q(other)
        q = self.q if self.q != 1 else other.q
        d = self.qhalf - other.qhalf
        if d % 2 == 0:
            # fold the integer power of q into the numerator with lower shift
            if d >= 0:
                return self.num * q ** (d // 2) == other.num
            return self.num == other.num * q ** ((-d) // 2)
        # mismatched parity: exact squared comparison, sign from embedding
        if (self * self) != (other * other):
            return False
        va, ea = self.embed(160)
        vb, eb = other.embed(160)
        gap = abs(va - vb)
        scale = max(abs(va), abs(vb), mpmath.mpf(1))
        return bool(gap <= (ea + eb) + scale * mpmath.mpf(2) ** -80)

    def __hash__(self):
        raise TypeError("ScaledCyc is not hashable")

    def invert(self) -> "ScaledCyc":
        """Exact inverse, licensed by |num|^2 being a plain power of q."""
        nn = self.num * self.num.conj()
        c = nn.as_int()
        if c is None or c <= 0:
            raise NotInvertible("numerator modulus squared is not a q-power")
        m = 0
        while c % self.q == 0 and c > 1:
            c //= self.q
            m += 1
        if c != 1:
            raise NotInvertible("numerator modulus squared is not a q-power")
        return ScaledCyc(self.num.conj(), -self.qhalf - 2 * m, self.q)

    def __truediv__(self, other: "ScaledCyc") -> "ScaledCyc":
        return self * other.invert()

    def embed(self, precision_bits: int = 64):
        v, err = self.num.embed(precision_bits)
        with mpmath.workprec(precision_bits + 16):
            s = mpmath.mpf(self.q) ** (mpmath.mpf(self.qhalf) / 2)
            return v * s, float(err * s + abs(v) * s * mpmath.mpf(2) ** (-precision_bits))

    def approx(self) -> complex:
        v, _ = self.embed(64)
        return complex(v)

    def serialize(self) -> dict:
        v = self.approx()
        return {
            "modulus": self.num.modulus,
            "coeffs": [[k, c] for k, c in self.num.to_pairs()],
            "qhalf": self.qhalf,
            "q": self.q,
            "complex": [f"{v.real:.15g}", f"{v.imag:.15g}"],
        }

    def __repr__(self):
        return f"ScaledCyc({self.num!r}, q^{self.qhalf}/2, q={self.q})"
