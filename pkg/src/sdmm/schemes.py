"""Polynomial code schemes for private distributed matrix multiplication.

A and B are cut into a K x M and an M x L grid of equal blocks. The encoder
hides them in matrix polynomials

    f(x) = sum_{k,m} A_{k,m} x^(m + k*M)        + sum_t R_t x^(K*M*L + alpha_t)
    g(x) = sum_{m,l} B_{m,l} x^(M-1-m + l*K*M)  + sum_t S_t x^(K*M*L + beta_t)

with independent uniform noise blocks R_t, S_t masking against any T
colluding workers. Within each x^(k*M + l*K*M) window the reversed m-index
of g aligns A_{k,m} with B_{m,l}, so the coefficient of h = f*g at exponent
M-1 + k*M + l*K*M is the product block sum_m A_{k,m} B_{m,l}.

Two noise layouts are provided: a "modular" layout alpha_t = beta_t = t*D
with D coprime to M, designed so a mod-M transform later strips most noise
terms, and a "grouped" layout that packs alpha into runs of length r at
multiples of K*M while beta stays consecutive. Arbitrary strictly
increasing exponent tuples are accepted as an escape hatch.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .errors import BadD, BadR, BadSpec, ShapeMismatch
from .fields import FieldCtx
from .matpoly import BlockMatrix, MatPoly

MP = "mp"
GGASP = "ggasp"
EXPLICIT = "explicit"


def ggasp_alpha(K: int, M: int, T: int, r: int) -> tuple[int, ...]:
    """First T exponent offsets taken from runs [u*K*M, u*K*M + r - 1].

    The run length r must satisfy 1 <= r <= min(K*M, T); T = U*r + r0 full
    and partial runs are used.
    """
    if T == 0:
        return ()
    if not 1 <= r <= min(K * M, T):
        raise BadR(f"run length {r} outside [1, min(K*M={K*M}, T={T})]")
    out = []
    u = 0
    while len(out) < T:
        take = min(r, T - len(out))
        out.extend(u * K * M + j for j in range(take))
        u += 1
    return tuple(out)


@dataclass(frozen=True)
class SchemeParams:
    """Partition grid, security level, and noise exponent layout."""

    variant: str
    K: int
    M: int
    L: int
    T: int
    D: int = 0
    r: int = 0
    alpha_raw: Optional[tuple[int, ...]] = None
    beta_raw: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.K < 1 or self.M < 1 or self.L < 1:
            raise BadSpec("K, M, L must be positive")
        if self.T < 0:
            raise BadSpec("T must be nonnegative")

    # -- constructors -------------------------------------------------------

    @classmethod
    def mp(cls, K: int, M: int, L: int, T: int, D: int = 1) -> "SchemeParams":
        if T == 0:
            return cls(MP, K, M, L, 0, D=0)
        if not 1 <= D <= M or math.gcd(D, M) != 1:
            raise BadD(f"D={D} must lie in [1, M={M}] and be coprime to M")
        return cls(MP, K, M, L, T, D=D)

    @classmethod
    def ggasp(cls, K: int, M: int, L: int, T: int, r: int = 1) -> "SchemeParams":
        if T == 0:
            return cls(GGASP, K, M, L, 0, r=0)
        ggasp_alpha(K, M, T, r)  # validates r
        return cls(GGASP, K, M, L, T, r=r)

    @classmethod
    def explicit(cls, K: int, M: int, L: int, T: int,
                 alpha: tuple[int, ...], beta: tuple[int, ...]) -> "SchemeParams":
        alpha = tuple(int(a) for a in alpha)
        beta = tuple(int(b) for b in beta)
        for name, exps in (("alpha", alpha), ("beta", beta)):
            if len(exps) != T:
                raise BadSpec(f"{name} must list exactly T={T} exponents")
            if any(e < 0 for e in exps):
                raise BadSpec(f"{name} exponents must be nonnegative")
            if any(b <= a for a, b in zip(exps, exps[1:])):
                raise BadSpec(f"{name} exponents must be strictly increasing")
        return cls(EXPLICIT, K, M, L, T, alpha_raw=alpha, beta_raw=beta)

    # -- exponent layout ------------------------------------------------------

    def alpha(self) -> tuple[int, ...]:
        """Noise exponent offsets for f, relative to K*M*L."""
        if self.T == 0:
            return ()
        if self.variant == MP:
            return tuple(t * self.D for t in range(self.T))
        if self.variant == GGASP:
            return ggasp_alpha(self.K, self.M, self.T, self.r)
        return self.alpha_raw

    def beta(self) -> tuple[int, ...]:
        """Noise exponent offsets for g, relative to K*M*L."""
        if self.T == 0:
            return ()
        if self.variant == MP:
            return tuple(t * self.D for t in range(self.T))
        if self.variant == GGASP:
            return tuple(range(self.T))
        return self.beta_raw

    @property
    def KML(self) -> int:
        return self.K * self.M * self.L

    def spec_string(self) -> str:
        base = f"K={self.K},M={self.M},L={self.L},T={self.T}"
        if self.variant == MP:
            return f"mp:{base},D={self.D}"
        if self.variant == GGASP:
            return f"ggasp:{base},r={self.r}"
        alpha = "+".join(str(a) for a in self.alpha())
        beta = "+".join(str(b) for b in self.beta())
        return f"explicit:{base},alpha={alpha},beta={beta}"


def parse_scheme_spec(spec: str) -> SchemeParams:
    """Parse "mp:K=2,M=3,L=2,T=3,D=1" / "ggasp:K=5,M=2,L=5,T=4,r=2".

    The explicit form lists exponents joined by '+':
    "explicit:K=1,M=2,L=1,T=2,alpha=4+7,beta=4+9".
    """
    spec = spec.strip()
    if ":" not in spec:
        raise BadSpec(f"scheme spec {spec!r} must start with 'mp:', 'ggasp:' or 'explicit:'")
    variant, _, body = spec.partition(":")
    variant = variant.strip().lower()
    kv = {}
    for item in body.split(","):
        if "=" not in item:
            raise BadSpec(f"malformed scheme field {item!r}")
        key, _, val = item.partition("=")
        kv[key.strip()] = val.strip()

    def geti(key, default=None):
        if key not in kv:
            if default is None:
                raise BadSpec(f"scheme spec missing {key}")
            return default
        try:
            return int(kv[key])
        except ValueError as exc:
            raise BadSpec(f"scheme field {key} must be an integer") from exc

    K, M, L, T = geti("K"), geti("M"), geti("L"), geti("T")
    if variant == MP:
        return SchemeParams.mp(K, M, L, T, D=geti("D", 1))
    if variant == GGASP:
        return SchemeParams.ggasp(K, M, L, T, r=geti("r", 1))
    if variant == EXPLICIT:
        def parse_exps(key):
            if key not in kv:
                raise BadSpec(f"scheme spec missing {key}")
            if not kv[key]:
                return ()
            try:
                return tuple(int(v) for v in kv[key].split("+"))
            except ValueError as exc:
                raise BadSpec(f"scheme field {key} must be '+'-joined integers") from exc
        return SchemeParams.explicit(K, M, L, T, parse_exps("alpha"), parse_exps("beta"))
    raise BadSpec(f"unknown scheme variant {variant!r}")


@dataclass(frozen=True)
class PartitionedInput:
    """A and B together with their block grids."""

    A: BlockMatrix
    B: BlockMatrix
    K: int
    M: int
    L: int
    a_blocks: tuple = field(repr=False)
    b_blocks: tuple = field(repr=False)

    @property
    def block_shape_a(self) -> tuple[int, int]:
        return self.a_blocks[0][0].shape

    @property
    def block_shape_b(self) -> tuple[int, int]:
        return self.b_blocks[0][0].shape


def partition(A: BlockMatrix, B: BlockMatrix, K: int, M: int, L: int) -> PartitionedInput:
    """Cut A into K x M and B into M x L equal blocks."""
    if A.ctx != B.ctx:
        raise ShapeMismatch("A and B over different fields")
    if A.cols != B.rows:
        raise ShapeMismatch(f"inner dimensions {A.cols} and {B.rows} differ")
    if A.rows % K or A.cols % M:
        raise ShapeMismatch(f"A of shape {A.shape} does not split into {K}x{M} blocks")
    if B.rows % M or B.cols % L:
        raise ShapeMismatch(f"B of shape {B.shape} does not split into {M}x{L} blocks")
    a, s = A.rows // K, A.cols // M
    b = B.cols // L
    a_blocks = tuple(tuple(A.submatrix(k * a, m * s, a, s) for m in range(M))
                     for k in range(K))
    b_blocks = tuple(tuple(B.submatrix(m * s, l * b, s, b) for l in range(L))
                     for m in range(M))
    return PartitionedInput(A, B, K, M, L, a_blocks, b_blocks)


def build_f(params: SchemeParams, parts: PartitionedInput,
            rng: random.Random, ctx: FieldCtx) -> MatPoly:
    """Encoding polynomial for A, including the noise terms."""
    K, M = params.K, params.M
    terms = {}
    for k in range(K):
        for m in range(M):
            terms[m + k * M] = parts.a_blocks[k][m]
    a, s = parts.block_shape_a
    base = params.KML
    for off in params.alpha():
        terms[base + off] = BlockMatrix.random(a, s, ctx, rng)
    return MatPoly(terms, (a, s), ctx)


def build_g(params: SchemeParams, parts: PartitionedInput,
            rng: random.Random, ctx: FieldCtx) -> MatPoly:
    """Encoding polynomial for B; the m index runs reversed inside each window."""
    K, M, L = params.K, params.M, params.L
    terms = {}
    for m in range(M):
        for l in range(L):
            terms[(M - 1 - m) + l * K * M] = parts.b_blocks[m][l]
    s, b = parts.block_shape_b
    base = params.KML
    for off in params.beta():
        terms[base + off] = BlockMatrix.random(s, b, ctx, rng)
    return MatPoly(terms, (s, b), ctx)


def product_block_positions(K: int, M: int, L: int) -> dict[tuple[int, int], int]:
    """Exponent of h = f*g carrying each product block sum_m A_{k,m} B_{m,l}."""
    return {(k, l): M - 1 + k * M + l * K * M for k in range(K) for l in range(L)}
