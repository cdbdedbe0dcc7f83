"""Exact arithmetic in prime fields GF(p) and extension fields GF(p^r).

Elements are represented by little-endian coefficient tuples over GF(p); for
r = 1 the tuple has a single entry and arithmetic reduces to mod-p integers.
Extension fields reduce modulo a monic irreducible polynomial, found by a
seeded deterministic search so that field construction is reproducible, or
supplied explicitly through a field spec string "p^r/c0,c1,...,cr".

Characteristics are limited to 61-bit primes so that all intermediate
products fit comfortably in 128-bit integers.
"""

from __future__ import annotations

import math
import random
from typing import Iterator, Optional, Sequence

from .errors import (
    BadSpec,
    DegreeZero,
    DivisionByZero,
    NoSuchRoot,
    NoSuchSubgroup,
    NotIrreducible,
    NotPrime,
    NotPrimitiveRoot,
)

MAX_PRIME_BITS = 61

# Deterministic Miller-Rabin witnesses, sufficient for all n < 3.3 * 10^24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality test for the supported integer range."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_factors(n: int) -> list[int]:
    """Sorted distinct prime factors of n, by trial division."""
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        factors.append(n)
    return factors


class MultCounter:
    """Opt-in counter for scalar field multiplications.

    Threaded by hand through the operations that advertise counting; plain
    arithmetic never touches it.
    """

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int = 1) -> None:
        self.count += n

    def __repr__(self) -> str:
        return f"MultCounter({self.count})"


# ---------------------------------------------------------------------------
# Polynomial helpers over GF(p), used for modulus search and inversion.
# Polynomials are little-endian coefficient tuples with no trailing zeros.


def _ptrim(c: Sequence[int]) -> tuple[int, ...]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _pmulmod(a, b, f, p):
    # a * b mod f, deg(f) = r, f monic
    r = len(f) - 1
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for d in range(len(prod) - 1, r - 1, -1):
        c = prod[d]
        if c:
            prod[d] = 0
            for j in range(r):
                prod[d - r + j] = (prod[d - r + j] - c * f[j]) % p
    return _ptrim(prod[:r] if len(prod) > r else prod)


def _ppowmod(a, e, f, p):
    result = (1,)
    base = a
    while e:
        if e & 1:
            result = _pmulmod(result, base, f, p)
        base = _pmulmod(base, base, f, p)
        e >>= 1
    return result


def _pmod(a, b, p):
    # remainder of a divided by b (b nonzero), coefficients mod p
    a = list(a)
    inv_lead = pow(b[-1], -1, p)
    for shift in range(len(a) - len(b), -1, -1):
        c = a[shift + len(b) - 1]
        if c:
            c = c * inv_lead % p
            for j in range(len(b)):
                a[shift + j] = (a[shift + j] - c * b[j]) % p
    return _ptrim(a)


def _pgcd(a, b, p):
    a, b = _ptrim(a), _ptrim(b)
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _frobenius_power(f, p, k):
    # x^(p^k) mod f
    t = (0, 1)
    for _ in range(k):
        t = _ppowmod(t, p, f, p)
    return t


def _poly_is_irreducible(f: Sequence[int], p: int) -> bool:
    """Irreducibility of a monic polynomial f of degree r >= 1 over GF(p)."""
    r = len(f) - 1
    if r == 1:
        return True
    if _frobenius_power(f, p, r) != (0, 1):
        return False
    for q in prime_factors(r):
        g = list(_frobenius_power(f, p, r // q))
        g += [0] * (2 - len(g))
        g[1] = (g[1] - 1) % p
        if len(_pgcd(g, f, p)) != 1:
            return False
    return True


class FieldCtx:
    """Immutable description of GF(p^r) together with element factories."""

    __slots__ = ("p", "r", "modulus_poly", "order", "_xpow", "_zero", "_one")

    def __init__(self, p: int, r: int, modulus_poly: tuple[int, ...]):
        self.p = p
        self.r = r
        self.modulus_poly = tuple(c % p for c in modulus_poly)
        self.order = p ** r
        # x^(r+i) mod f for i = 0..r-2, used to fold products back below degree r
        xpow = []
        if r > 1:
            cur = tuple((-c) % p for c in self.modulus_poly[:r])
            xpow.append(cur)
            for _ in range(r - 2):
                nxt = [0] * r
                carry = cur[r - 1]
                for j in range(r - 1):
                    nxt[j + 1] = cur[j]
                if carry:
                    for j in range(r):
                        nxt[j] = (nxt[j] + carry * xpow[0][j]) % p
                cur = tuple(nxt)
                xpow.append(cur)
        self._xpow = tuple(xpow)
        self._zero = FieldElement((0,) * r, self)
        self._one = FieldElement((1,) + (0,) * (r - 1), self)

    # -- identity ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (isinstance(other, FieldCtx) and self.p == other.p
                and self.r == other.r and self.modulus_poly == other.modulus_poly)

    def __hash__(self) -> int:
        return hash((self.p, self.r, self.modulus_poly))

    def __repr__(self) -> str:
        return f"GF({self.p})" if self.r == 1 else f"GF({self.p}^{self.r})"

    def spec_string(self) -> str:
        """Canonical field spec accepted by parse_field_spec."""
        if self.r == 1:
            return str(self.p)
        mods = ",".join(str(c) for c in self.modulus_poly)
        return f"{self.p}^{self.r}/{mods}"

    # -- element factories ---------------------------------------------------

    def element(self, value) -> "FieldElement":
        """Coerce an int (reduced mod p) or coefficient sequence to an element."""
        if isinstance(value, FieldElement):
            if value.ctx != self:
                raise ValueError("element belongs to a different field")
            return value
        if isinstance(value, int):
            coeffs = (value % self.p,) + (0,) * (self.r - 1)
            return FieldElement(coeffs, self)
        coeffs = tuple(int(c) % self.p for c in value)
        if len(coeffs) != self.r:
            raise ValueError(f"expected {self.r} coefficients, got {len(coeffs)}")
        return FieldElement(coeffs, self)

    def zero(self) -> "FieldElement":
        return self._zero

    def one(self) -> "FieldElement":
        return self._one

    def from_index(self, idx: int) -> "FieldElement":
        """Element with canonical index idx, the base-p digit encoding."""
        coeffs = []
        for _ in range(self.r):
            coeffs.append(idx % self.p)
            idx //= self.p
        return FieldElement(tuple(coeffs), self)

    def elements(self) -> Iterator["FieldElement"]:
        """All field elements in canonical index order (small fields only)."""
        for idx in range(self.order):
            yield self.from_index(idx)

    def random_element(self, rng: random.Random, nonzero: bool = False) -> "FieldElement":
        lo = 1 if nonzero else 0
        return self.from_index(rng.randrange(lo, self.order))


class FieldElement:
    """Element of GF(p^r); a value type carrying its field context."""

    __slots__ = ("coeffs", "ctx")

    def __init__(self, coeffs: tuple[int, ...], ctx: FieldCtx):
        self.coeffs = coeffs
        self.ctx = ctx

    # -- helpers -------------------------------------------------------------

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.ctx is self.ctx or other.ctx == self.ctx:
                return other
            raise ValueError("field elements from different fields")
        if isinstance(other, int):
            return self.ctx.element(other)
        return NotImplemented

    def index(self) -> int:
        """Canonical integer encoding: sum of coeffs[i] * p^i."""
        idx = 0
        for c in reversed(self.coeffs):
            idx = idx * self.ctx.p + c
        return idx

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.ctx.p
        return FieldElement(tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)), self.ctx)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.ctx.p
        return FieldElement(tuple((a - b) % p for a, b in zip(self.coeffs, other.coeffs)), self.ctx)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __neg__(self):
        p = self.ctx.p
        return FieldElement(tuple((-a) % p for a in self.coeffs), self.ctx)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        ctx = self.ctx
        p = ctx.p
        r = ctx.r
        if r == 1:
            return FieldElement(((self.coeffs[0] * other.coeffs[0]) % p,), ctx)
        a, b = self.coeffs, other.coeffs
        prod = [0] * (2 * r - 1)
        for i in range(r):
            ai = a[i]
            if ai:
                for j in range(r):
                    prod[i + j] += ai * b[j]
        out = [c % p for c in prod[:r]]
        for d in range(r, 2 * r - 1):
            c = prod[d] % p
            if c:
                fold = ctx._xpow[d - r]
                for j in range(r):
                    out[j] = (out[j] + c * fold[j]) % p
        return FieldElement(tuple(out), ctx)

    __rmul__ = __mul__

    def inv(self) -> "FieldElement":
        """Multiplicative inverse; raises DivisionByZero on the zero element."""
        ctx = self.ctx
        if self.is_zero():
            raise DivisionByZero("zero has no multiplicative inverse")
        if ctx.r == 1:
            return FieldElement((pow(self.coeffs[0], -1, ctx.p),), ctx)
        # a^(q-2) = a^(-1) in the multiplicative group of order q-1
        return self.pow_(ctx.order - 2)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inv()

    def pow_(self, e: int, counter: Optional[MultCounter] = None) -> "FieldElement":
        """Square-and-multiply power, recording multiplications in counter."""
        if e < 0:
            return self.inv().pow_(-e, counter)
        result = self.ctx.one()
        if e == 0:
            return result
        base = self
        started = False
        for bit in bin(e)[2:]:
            if started:
                result = result * result
                if counter is not None:
                    counter.add()
            if bit == "1":
                if started:
                    result = result * base
                    if counter is not None:
                        counter.add()
                else:
                    result = base
                    started = True
        return result

    def __pow__(self, e: int):
        return self.pow_(e)

    def multiplicative_order(self) -> int:
        """Order of the element in the multiplicative group."""
        if self.is_zero():
            raise DivisionByZero("zero is not in the multiplicative group")
        n = self.ctx.order - 1
        order = n
        for q in prime_factors(n):
            while order % q == 0 and self.pow_(order // q) == self.ctx.one():
                order //= q
        return order

    # -- comparisons -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = self.ctx.element(other)
        return (isinstance(other, FieldElement) and self.ctx == other.ctx
                and self.coeffs == other.coeffs)

    def __hash__(self) -> int:
        return hash((self.coeffs, self.ctx.p, self.ctx.r))

    def __repr__(self) -> str:
        if self.ctx.r == 1:
            return f"{self.coeffs[0]}"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}*x" if c != 1 else "x")
            else:
                terms.append(f"{c}*x^{i}" if c != 1 else f"x^{i}")
        return "+".join(terms) if terms else "0"


# ---------------------------------------------------------------------------
# Public constructors


def make_field(p: int, r: int = 1, modulus: Optional[Sequence[int]] = None,
               seed: int = 0) -> FieldCtx:
    """Construct GF(p^r).

    For r > 1 a monic irreducible modulus of degree r is found by a seeded
    random search, so the same (p, r, seed) always yields the same field. An
    explicit modulus (little-endian, monic, length r+1) overrides the search.
    """
    if r < 1:
        raise DegreeZero(f"extension degree must be >= 1, got {r}")
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if p.bit_length() > MAX_PRIME_BITS:
        raise BadSpec(f"characteristic exceeds {MAX_PRIME_BITS} bits")
    if r == 1:
        return FieldCtx(p, 1, (0, 1))
    if modulus is not None:
        mod = tuple(int(c) % p for c in modulus)
        if len(mod) != r + 1 or mod[-1] != 1:
            raise NotIrreducible("modulus must be monic of degree r")
        if not _poly_is_irreducible(mod, p):
            raise NotIrreducible("supplied modulus is reducible")
        return FieldCtx(p, r, mod)
    rng = random.Random(f"sdmm-modulus-{p}-{r}-{seed}")
    while True:
        cand = tuple(rng.randrange(p) for _ in range(r)) + (1,)
        if _poly_is_irreducible(cand, p):
            return FieldCtx(p, r, cand)


def parse_field_spec(spec: str) -> FieldCtx:
    """Parse "p", "p^r", or "p^r/c0,c1,...,cr" into a field context."""
    spec = spec.strip()
    try:
        if "/" in spec:
            head, mods = spec.split("/", 1)
            coeffs = [int(c) for c in mods.split(",")]
        else:
            head, coeffs = spec, None
        if "^" in head:
            p_str, r_str = head.split("^", 1)
            p, r = int(p_str), int(r_str)
        else:
            p, r = int(head), 1
    except ValueError as exc:
        raise BadSpec(f"cannot parse field spec {spec!r}") from exc
    return make_field(p, r, modulus=coeffs)


def _element_of_order(ctx: FieldCtx, m: int):
    """Smallest-index generator of the unique order-m multiplicative subgroup."""
    q1 = ctx.order - 1
    cofactor = q1 // m
    mfactors = prime_factors(m) if m > 1 else []
    idx = 1
    while True:
        w = ctx.from_index(idx)
        if not w.is_zero():
            z = w.pow_(cofactor)
            if not z.is_zero() and all(z.pow_(m // q) != ctx.one() for q in mfactors):
                return z
        idx += 1
        if idx >= ctx.order:
            raise NoSuchRoot(f"no element of order {m} found")


def primitive_root_of_unity(ctx: FieldCtx, M: int) -> FieldElement:
    """The smallest (by canonical index) primitive M-th root of unity."""
    if M < 1:
        raise NoSuchRoot("M must be positive")
    if (ctx.order - 1) % M != 0:
        raise NoSuchRoot(f"{M} does not divide {ctx.order - 1}")
    if M == 1:
        return ctx.one()
    g = _element_of_order(ctx, M)
    best = None
    z = g
    for j in range(1, M):
        if math.gcd(j, M) == 1 and (best is None or z.index() < best.index()):
            best = z
        z = z * g
    return best


def is_primitive_root_of_unity(zeta: FieldElement, M: int) -> bool:
    """True iff zeta^M = 1 and no smaller positive power is 1."""
    if zeta.is_zero():
        return False
    if zeta.pow_(M) != zeta.ctx.one():
        return False
    return all(zeta.pow_(M // q) != zeta.ctx.one() for q in prime_factors(M)) if M > 1 else True


def check_primitive_root(zeta: FieldElement, M: int) -> None:
    if not is_primitive_root_of_unity(zeta, M):
        raise NotPrimitiveRoot(f"{zeta!r} is not a primitive {M}-th root of unity")


def subgroup_elements(ctx: FieldCtx, order: int) -> list[FieldElement]:
    """The unique cyclic subgroup of the given order, as powers of a generator."""
    if order < 1:
        raise NoSuchSubgroup("order must be positive")
    if (ctx.order - 1) % order != 0:
        raise NoSuchSubgroup(f"{order} does not divide {ctx.order - 1}")
    if order == 1:
        return [ctx.one()]
    g = _element_of_order(ctx, order)
    out = [ctx.one()]
    cur = g
    for _ in range(order - 1):
        out.append(cur)
        cur = cur * g
    return out


def largest_coprime_subgroup_order(ctx: FieldCtx, M: int) -> int:
    """Largest divisor of the multiplicative group order that is coprime to M."""
    n = ctx.order - 1
    if M > 1:
        for q in prime_factors(M):
            while n % q == 0:
                n //= q
    return n
