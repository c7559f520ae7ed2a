"""Brute-force epsilon oracle: full character sums over truncated unit groups.

oracle_sum(theta, psi, delta) = q^{-c/2} * sum over u in (O/P^c)^x of
theta^{-1}(u delta) psi(u delta), the complete sum with q^{c-1}(q-1) terms,
computed exactly.

On prime-residue fields with convergent exp/log the sum is evaluated by a
vectorized kernel: units are enumerated as tau-part times products
prod_i (1 + a_i pi^i) with integer digits; the theta side reduces to integer
digit-table gathers (log is additive over the digit factors) and the psi
side to integer trace-weight contractions.  All arithmetic is integer
arithmetic modulo powers of p; partial histograms combine associatively, so
the term range splits across chunks and processes.  The digit enumeration
and psi-side exponents depend only on (field, conductor, delta) and are
cached across characters.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .cyclotomic import CycNumber, ScaledCyc
from .errors import CapacityError, ConfigError
from .characters import AddChar, MulChar
from .localfield import TowerField

_SLOW_BUDGET = 500_000
_CHUNK = 1 << 20
_GRIDS: dict = {}


def oracle_sum(chi: MulChar, psi: AddChar, delta, budget: int = 300_000_000,
               jobs: int = 1) -> ScaledCyc:
    """Full unit-group character sum against delta; exact."""
    F = chi.field
    if delta.is_zero():
        raise ConfigError("oracle needs a nonzero twisting element")
    c = max(1, chi.conductor())
    terms = F.q ** (c - 1) * (F.q - 1)
    if terms > budget:
        raise CapacityError(f"oracle sum has {terms} terms, budget {budget}")
    if F.f == 1 and F.explog_ok and not chi.is_factored():
        total = _fast_sum(chi, psi, delta, c, jobs)
    else:
        if terms > _SLOW_BUDGET:
            raise CapacityError(
                f"generic oracle path capped at {_SLOW_BUDGET} terms")
        total = _slow_sum(chi, psi, delta, c)
    return ScaledCyc(total, -c, F.q)


def clear_oracle_cache():
    _GRIDS.clear()


# --------------------------------------------------------------- slow path


def _slow_sum(chi, psi, delta, c):
    F = chi.field
    total = CycNumber.zero()
    tame = [F.teichmuller(F.res_of(F.wpow(F.xi(), j))) for j in range(F.q - 1)]
    one = F.one()
    levels = list(range(1, c))
    digits = [0] * len(levels)

    def principal_units():
        if not levels:
            yield one
            return
        stack = [one]
        while True:
            while len(stack) <= len(levels):
                i = len(stack) - 1
                u = stack[-1]
                if digits[i]:
                    u = u * (one + F.monomial(digits[i], levels[i]))
                stack.append(u)
            yield stack[-1]
            j = len(levels) - 1
            while j >= 0 and digits[j] == F.q - 1:
                digits[j] = 0
                j -= 1
            if j < 0:
                return
            digits[j] += 1
            del stack[j + 1:]

    for u1 in principal_units():
        for tj in tame:
            x = tj * u1 * delta
            total = total + chi.eval(x).conj() * psi.eval(x)
    return total


# --------------------------------------------------------------- fast path


def _p_exponent(mod: int, p: int) -> int:
    m = 0
    while mod > 1:
        mod //= p
        m += 1
    return m


class _Grid:
    """Cached unit enumeration for one (field, conductor, delta) triple.

    Holds, per chunk: the digit matrix (for theta-side gathers) and the
    psi-side exponent rows (one per Teichmuller coset) modulo p^sw."""

    def __init__(self, F: TowerField, psi, c: int, delta, jobs: int):
        p, e, q = F.p, F.e, F.q
        vd = delta.valuation()
        amod = max(1, -(-(1 - vd) // e), -(-c // e))
        mod = p**amod
        wrap = (p * (F.U[0] % mod)) % mod
        raw_w = {}
        sw = 1
        for j in range(q - 1):
            base = F.teichmuller(F.res_of(F.wpow(F.xi(), j))) * delta
            for i in range(e):
                z, m2 = psi.exponent(base.shift(i))
                raw_w[(j, i)] = (z, m2)
                sw = max(sw, _p_exponent(m2, p))
        psw = p**sw
        wexp = np.zeros((q - 1, e), dtype=np.int64)
        for (j, i), (z, m2) in raw_w.items():
            wexp[j, i] = z * p ** (sw - _p_exponent(m2, p)) % psw
        self.p, self.e, self.q, self.c = p, e, q, c
        self.sw = sw
        self.psw = psw
        tasks = []
        btotal = p ** (c - 1)
        for lo in range(0, btotal, _CHUNK):
            tasks.append({"lo": lo, "hi": min(lo + _CHUNK, btotal), "p": p,
                          "e": e, "c": c, "mod": mod, "wrap": wrap,
                          "psw": psw, "wexp": wexp})
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                self.chunks = list(ex.map(_grid_chunk, tasks))
        else:
            self.chunks = [_grid_chunk(t) for t in tasks]


def _grid_chunk(task):
    p = task["p"]
    e = task["e"]
    c = task["c"]
    mod = task["mod"]
    wrap = task["wrap"]
    psw = task["psw"]
    wexp = task["wexp"]
    idx = np.arange(task["lo"], task["hi"], dtype=np.int64)
    n = idx.shape[0]
    units = np.zeros((n, e), dtype=np.int64)
    units[:, 0] = 1
    digits = np.zeros((n, max(c - 1, 1)), dtype=np.int8)
    for lev in range(1, c):
        dig = (idx // p ** (lev - 1)) % p
        digits[:, lev - 1] = dig
        add = _pi_pow_mult((units * dig[:, None]) % mod, lev, e, wrap, mod)
        units = (units + add) % mod
    pexp = np.empty((wexp.shape[0], n), dtype=np.int32)
    for j in range(wexp.shape[0]):
        pexp[j] = (units @ wexp[j]) % psw
    return {"digits": digits, "pexp": pexp}


def _pi_pow_mult(x, i, e, wrap, mod):
    """Multiply coordinate vectors by pi^i: roll with the wrap factor pU."""
    q2, r2 = divmod(i, e)
    if q2:
        x = (x * pow(wrap, q2, mod)) % mod
    if r2 == 0:
        return x % mod
    out = np.empty_like(x)
    out[:, r2:] = x[:, : e - r2]
    out[:, :r2] = (x[:, e - r2:] * wrap) % mod
    return out % mod


def _delta_key(delta):
    if delta.is_zero():
        raise ConfigError("zero delta")
    F = delta.field
    return (delta.v, tuple(tuple(w) for w in delta.core))


def _fast_sum(chi, psi, delta, c, jobs):
    F = chi.field
    p, q = F.p, F.q
    key = (id(F), c, _delta_key(delta))
    grid = _GRIDS.get(key)
    if grid is None:
        grid = _Grid(F, psi, c, delta, jobs)
        _GRIDS[key] = grid

    # theta side: psi(-gamma log(1 + a pi^i)) digit tables, exact
    st = 1
    raw_t1 = {}
    if chi.gamma is not None:
        one = F.one()
        for i in range(1, c):
            for a in range(1, p):
                lg = F.log_principal(one + F.from_int(a).shift(i), window=c)
                z, m2 = psi.exponent(-chi.gamma * lg)
                raw_t1[(i, a)] = (z, m2)
                st = max(st, _p_exponent(m2, p))
    s = max(st, grid.sw)
    ps = p**s
    scale_w = p ** (s - grid.sw)
    t1 = np.zeros((max(c, 2), p), dtype=np.int64)
    for (i, a), (z, m2) in raw_t1.items():
        t1[i, a] = z * p ** (s - _p_exponent(m2, p)) % ps

    hists = np.zeros((q - 1, ps), dtype=np.int64)
    for chunk in grid.chunks:
        digits = chunk["digits"]
        n = digits.shape[0]
        texp = np.zeros(n, dtype=np.int64)
        for lev in range(1, c):
            texp += t1[lev, digits[:, lev - 1]]
        texp %= ps
        for j in range(q - 1):
            tot = (chunk["pexp"][j].astype(np.int64) * scale_w + texp) % ps
            hists[j] += np.bincount(tot, minlength=ps)

    tame_t = chi.t % (q - 1)
    total = CycNumber.zero()
    for j in range(q - 1):
        row = hists[j]
        nz = np.nonzero(row)[0]
        cyc = CycNumber.from_root_sum(ps, [(int(b), int(row[b])) for b in nz])
        total = total + CycNumber.root(q - 1, (-tame_t * j) % (q - 1)) * cyc
    return chi.eval(delta).conj() * total
