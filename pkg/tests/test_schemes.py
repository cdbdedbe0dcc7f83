import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from sdmm.errors import BadD, BadR, BadSpec, ShapeMismatch
from sdmm.fields import make_field
from sdmm.matpoly import BlockMatrix
from sdmm.schemes import (
    SchemeParams,
    build_f,
    build_g,
    ggasp_alpha,
    parse_scheme_spec,
    partition,
    product_block_positions,
)

F31 = make_field(31)


def test_mp_validation():
    with pytest.raises(BadD):
        SchemeParams.mp(2, 4, 2, 1, D=2)  # gcd(2, 4) = 2
    with pytest.raises(BadD):
        SchemeParams.mp(2, 3, 2, 1, D=4)  # D > M
    with pytest.raises(BadSpec):
        SchemeParams.mp(0, 3, 2, 1)
    with pytest.raises(BadSpec):
        SchemeParams.mp(2, 3, 2, -1)
    # T=0 ignores D entirely
    assert SchemeParams.mp(2, 4, 2, 0, D=2).D == 0


def test_mp_noise_offsets_step_by_d():
    p = SchemeParams.mp(2, 5, 2, 4, D=3)
    assert p.alpha() == (0, 3, 6, 9)
    assert p.beta() == (0, 3, 6, 9)


def test_ggasp_run_layout():
    # K*M = 10: runs start at multiples of 10 and take r consecutive slots
    assert ggasp_alpha(5, 2, 4, 2) == (0, 1, 10, 11)
    assert ggasp_alpha(5, 2, 4, 1) == (0, 10, 20, 30)
    assert ggasp_alpha(5, 2, 4, 3) == (0, 1, 2, 10)
    assert ggasp_alpha(5, 2, 4, 4) == (0, 1, 2, 3)
    with pytest.raises(BadR):
        ggasp_alpha(5, 2, 4, 5)  # r > T
    with pytest.raises(BadR):
        ggasp_alpha(1, 2, 8, 3)  # r > K*M
    with pytest.raises(BadR):
        ggasp_alpha(5, 2, 4, 0)


def test_ggasp_beta_is_consecutive():
    p = SchemeParams.ggasp(5, 2, 5, 4, r=2)
    assert p.beta() == (0, 1, 2, 3)


def test_explicit_validation():
    with pytest.raises(BadSpec):
        SchemeParams.explicit(1, 2, 1, 2, alpha=(0,), beta=(0, 1))  # wrong length
    with pytest.raises(BadSpec):
        SchemeParams.explicit(1, 2, 1, 2, alpha=(2, 0), beta=(0, 1))  # not increasing
    with pytest.raises(BadSpec):
        SchemeParams.explicit(1, 2, 1, 1, alpha=(-1,), beta=(0,))
    p = SchemeParams.explicit(1, 2, 1, 2, alpha=(0, 2), beta=(0, 1))
    assert p.alpha() == (0, 2)
    assert p.beta() == (0, 1)


@st.composite
def scheme_params(draw):
    K = draw(st.integers(1, 4))
    M = draw(st.integers(1, 4))
    L = draw(st.integers(1, 4))
    T = draw(st.integers(0, 6))
    kind = draw(st.sampled_from(["mp", "ggasp", "explicit"]))
    if kind == "mp":
        ds = [d for d in range(1, M + 1) if math.gcd(d, M) == 1]
        return SchemeParams.mp(K, M, L, T, D=draw(st.sampled_from(ds)))
    if kind == "ggasp":
        r = draw(st.integers(1, max(1, min(K * M, T)))) if T else 1
        return SchemeParams.ggasp(K, M, L, T, r=r)
    exps = draw(st.lists(st.integers(0, 40), min_size=T, max_size=T, unique=True))
    exps2 = draw(st.lists(st.integers(0, 40), min_size=T, max_size=T, unique=True))
    return SchemeParams.explicit(K, M, L, T, tuple(sorted(exps)), tuple(sorted(exps2)))


@given(scheme_params())
@settings(max_examples=80)
def test_spec_string_round_trip(params):
    assert parse_scheme_spec(params.spec_string()) == params


def test_parse_errors():
    for bad in ("mp", "mp:K=2,M=3", "mp:K=x,M=3,L=2,T=0", "foo:K=1,M=1,L=1,T=0",
                "explicit:K=1,M=1,L=1,T=1,alpha=a,beta=0"):
        with pytest.raises(BadSpec):
            parse_scheme_spec(bad)


def test_partition_shapes_and_content():
    rng = random.Random(0)
    A = BlockMatrix([[rng.randrange(31) for _ in range(6)] for _ in range(4)], F31)
    B = BlockMatrix([[rng.randrange(31) for _ in range(4)] for _ in range(6)], F31)
    parts = partition(A, B, 2, 3, 2)
    assert parts.block_shape_a == (2, 2)
    assert parts.block_shape_b == (2, 2)
    assert parts.a_blocks[1][2] == A.submatrix(2, 4, 2, 2)
    assert parts.b_blocks[0][1] == B.submatrix(0, 2, 2, 2)


def test_partition_divisibility_errors():
    A = BlockMatrix.zero(4, 6, F31)
    B = BlockMatrix.zero(6, 4, F31)
    with pytest.raises(ShapeMismatch):
        partition(A, B, 3, 3, 2)  # 4 rows not divisible by K=3
    with pytest.raises(ShapeMismatch):
        partition(A, B, 2, 4, 2)  # 6 cols not divisible by M=4
    with pytest.raises(ShapeMismatch):
        partition(A, BlockMatrix.zero(5, 4, F31), 2, 3, 2)  # inner mismatch


def test_encoding_polynomial_layout():
    rng = random.Random(1)
    A = BlockMatrix([[rng.randrange(31) for _ in range(6)] for _ in range(4)], F31)
    B = BlockMatrix([[rng.randrange(31) for _ in range(4)] for _ in range(6)], F31)
    params = SchemeParams.mp(2, 3, 2, 2)
    parts = partition(A, B, 2, 3, 2)
    f = build_f(params, parts, random.Random(2), F31)
    g = build_g(params, parts, random.Random(2), F31)
    # data: A_{k,m} at m + k*M, B_{m,l} at (M-1-m) + l*K*M
    assert f.coeff(4) == parts.a_blocks[1][1]
    assert g.coeff(1) == parts.b_blocks[1][0]
    assert g.coeff(6 + 2) == parts.b_blocks[0][1]
    # noise sits above K*M*L
    assert set(f.support()) >= {12, 13}
    assert max(f.support()) == 13
    assert min(e for e in f.support() if e >= 12) == 12


def test_product_block_positions_formula():
    pos = product_block_positions(2, 3, 2)
    assert pos == {(k, l): 2 + 3 * k + 6 * l for k in range(2) for l in range(2)}


@given(st.integers(0, 2**32))
@settings(max_examples=25)
def test_product_carries_all_blocks(seed):
    rng = random.Random(seed)
    K, M, L = rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3)
    T = rng.randint(0, 2)
    a0, s0, b0 = rng.randint(1, 2), rng.randint(1, 2), rng.randint(1, 2)
    A = BlockMatrix([[rng.randrange(31) for _ in range(M * s0)]
                     for _ in range(K * a0)], F31)
    B = BlockMatrix([[rng.randrange(31) for _ in range(L * b0)]
                     for _ in range(M * s0)], F31)
    params = SchemeParams.mp(K, M, L, T)
    parts = partition(A, B, K, M, L)
    h = build_f(params, parts, rng, F31).mul(build_g(params, parts, rng, F31))
    prod = A.matmul(B)
    for (k, l), e in product_block_positions(K, M, L).items():
        assert h.coeff(e) == prod.submatrix(k * a0, l * b0, a0, b0)
