import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scfold import sc_core
from scfold.errors import (
    ConfigError,
    LevelRangeError,
    BackendUnsupportedError,
    NotInQuadrantError,
)
from scfold.sc_core import (
    CircleGridScale,
    FiniteDimScale,
    LinearScOperator,
    PartialQuadrant,
    SumScale,
    WeightedGridScale,
    degeneracy_index,
    direct_sum,
    embedding_report,
    fredholm_split,
    level_norm,
    reconstruction_residual,
    scale_from_config,
)


def make_grid_scale(R=8.0, h=1 / 64, deltas=(0.0, 0.1, 0.2, 0.3)):
    return WeightedGridScale(R, h, deltas)


# ---------------------------------------------------------------- level_norm

def test_level_norm_zero_vector():
    scale = make_grid_scale()
    z = scale.zero()
    for m in range(scale.max_level + 1):
        assert level_norm(z, m) == 0.0


def test_level_norm_finite_dim_euclidean():
    scale = FiniteDimScale(2, max_level=3)
    v = scale.vector([3.0, 4.0])
    for m in range(4):
        assert level_norm(v, m) == pytest.approx(5.0, abs=0)


def test_level_norm_gaussian_matches_fine_grid_oracle():
    # oracle: the same discrete norm evaluated at h = 1/512
    coarse = make_grid_scale(h=1 / 64)
    fine = make_grid_scale(h=1 / 512)
    u_c = np.exp(-coarse.grid ** 2)
    u_f = np.exp(-fine.grid ** 2)
    val = coarse.norm(u_c, 1)
    oracle = fine.norm(u_f, 1)
    assert abs(val - oracle) / oracle < 1e-6


def test_level_norm_out_of_range():
    scale = make_grid_scale()
    v = scale.vector(np.exp(-scale.grid ** 2), level=1)
    with pytest.raises(LevelRangeError):
        level_norm(v, 2)


def test_declared_level_validates_length():
    scale = FiniteDimScale(3)
    with pytest.raises(ValueError):
        scale.vector([1.0, 2.0])


# ---------------------------------------------------------- embedding_report

def test_embedding_report_finite_dim_ratios_exactly_one():
    scale = FiniteDimScale(5)
    rep = embedding_report(scale, 1, sample_count=32, seed=2)
    assert rep.passed
    assert np.all(rep.ratios == 1.0)


def test_embedding_report_grid_ratios_below_recorded_constant():
    scale = WeightedGridScale(4.0, 1 / 16, (0.0, 0.1, 0.2))
    rep = embedding_report(scale, 0, sample_count=64, seed=3)
    assert rep.passed
    assert rep.max_ratio <= rep.constant * (1 + 1e-9)
    # oracle: exhaustive maximization over canonical basis vectors is a lower
    # bound for the recorded constant
    basis_max = 0.0
    for i in range(scale.n):
        e = np.zeros(scale.n)
        e[i] = 1.0
        basis_max = max(basis_max, scale.norm(e, 0) / scale.norm(e, 1))
    assert basis_max <= rep.constant * (1 + 1e-9)
    assert rep.tail_profile[0.5] is not None


def test_non_monotone_deltas_rejected():
    with pytest.raises(ValueError):
        WeightedGridScale(4.0, 1 / 16, (0.0, 0.2, 0.1))
    with pytest.raises(ValueError):
        WeightedGridScale(4.0, 1 / 16, (0.1, 0.2, 0.3))


# ---------------------------------------------------------- degeneracy_index

def test_degeneracy_interior_point():
    q = PartialQuadrant(FiniteDimScale(2), (0, 1))
    assert degeneracy_index(q, np.array([1.0, 2.0]), tol=1e-12) == 0


def test_degeneracy_corner():
    q = PartialQuadrant(FiniteDimScale(2), (0, 1))
    assert degeneracy_index(q, np.array([0.0, 0.0])) == 2


def test_degeneracy_mixed():
    q = PartialQuadrant(FiniteDimScale(3), (0, 1, 2))
    assert degeneracy_index(q, np.array([0.0, 3.2, 0.0])) == 2


def test_degeneracy_not_in_quadrant():
    q = PartialQuadrant(FiniteDimScale(2), (0, 1))
    with pytest.raises(NotInQuadrantError):
        degeneracy_index(q, np.array([-1.0, 0.5]))


@settings(max_examples=60, deadline=None)
@given(
    vals=st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=3, max_size=6),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_degeneracy_permutation_invariant(vals, seed):
    arr = np.asarray(vals)
    scale = FiniteDimScale(arr.size)
    q = PartialQuadrant(scale, tuple(range(arr.size)))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(arr.size)
    assert degeneracy_index(q, arr) == degeneracy_index(q, arr[perm])


# ------------------------------------------------------------ fredholm_split

def elimination_rank(a, tol=1e-10):
    """Independent rank oracle: Gaussian elimination with partial pivoting."""
    m = np.array(a, dtype=float)
    rank = 0
    rows, cols = m.shape
    for col in range(cols):
        if rank >= rows:
            break
        piv = rank + np.argmax(np.abs(m[rank:, col]))
        if abs(m[piv, col]) <= tol:
            continue
        m[[rank, piv]] = m[[piv, rank]]
        m[rank] = m[rank] / m[rank, col]
        for r in range(rows):
            if r != rank:
                m[r] -= m[r, col] * m[rank]
        rank += 1
    return rank


def test_fredholm_identity():
    scale = FiniteDimScale(5)
    op = LinearScOperator(scale, scale, matrix=np.eye(5))
    data = fredholm_split(op)
    assert data.kernel_dim == 0
    assert data.cokernel_dim == 0
    assert data.index == 0


def test_fredholm_zero_operator():
    src, tgt = FiniteDimScale(3), FiniteDimScale(2)
    op = LinearScOperator(src, tgt, matrix=np.zeros((2, 3)))
    data = fredholm_split(op)
    assert data.kernel_dim == 3
    assert data.cokernel_dim == 2
    assert data.index == 1


def test_fredholm_random_rank2():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((3, 2)) @ rng.standard_normal((2, 4))
    assert elimination_rank(a) == 2  # oracle fixes the rank first
    op = LinearScOperator(FiniteDimScale(4), FiniteDimScale(3), matrix=a)
    data = fredholm_split(op)
    assert data.kernel_dim == 2
    assert data.cokernel_dim == 1
    assert data.index == 1
    assert reconstruction_residual(op, data, seed=1) < 1e-10


def test_fredholm_index_vs_elimination_oracle_randomized():
    rng = np.random.default_rng(42)
    for _ in range(25):
        nt, ns = rng.integers(1, 6, size=2)
        r = int(rng.integers(0, min(nt, ns) + 1))
        a = rng.standard_normal((nt, r)) @ rng.standard_normal((r, ns)) if r else np.zeros((nt, ns))
        op = LinearScOperator(FiniteDimScale(ns), FiniteDimScale(nt), matrix=a)
        data = fredholm_split(op)
        rank = elimination_rank(a)
        assert data.kernel_dim == ns - rank
        assert data.cokernel_dim == nt - rank
        assert data.index == (ns - rank) - (nt - rank)


def test_fredholm_grid_lowrank():
    scale = WeightedGridScale(4.0, 1 / 16, (0.0, 0.1))
    n = scale.n
    rng = np.random.default_rng(0)
    u = rng.standard_normal((n, 2)) * 0.1
    v = rng.standard_normal((n, 2)) * 0.1
    op = LinearScOperator(scale, scale, lowrank=(u, v))
    data = fredholm_split(op)
    assert data.index == 0
    # generic small perturbation of the identity is invertible
    assert data.kernel_dim == 0 and data.cokernel_dim == 0


def test_fredholm_grid_lowrank_with_kernel():
    scale = WeightedGridScale(4.0, 1 / 16, (0.0, 0.1))
    n = scale.n
    u = np.zeros((n, 1))
    u[3, 0] = 1.0
    v = np.zeros((n, 1))
    v[3, 0] = -1.0  # I + u v' kills the coordinate 3 direction
    op = LinearScOperator(scale, scale, lowrank=(u, v))
    data = fredholm_split(op)
    assert data.kernel_dim == 1
    assert data.cokernel_dim == 1
    assert data.index == 0
    assert np.linalg.norm(op.apply(data.kernel[:, 0])) < 1e-12


def test_fredholm_general_grid_unsupported():
    scale = WeightedGridScale(4.0, 1 / 16, (0.0, 0.1))

    class Fake:
        matrix = None
        lowrank = None

    with pytest.raises(BackendUnsupportedError):
        fredholm_split(Fake())


# ---------------------------------------------------------------- direct_sum

def test_direct_sum_dims():
    s = direct_sum(FiniteDimScale(2), FiniteDimScale(3))
    for m in range(4):
        assert s.dim(m) == 5


def test_direct_sum_with_zero_summand():
    e = make_grid_scale(R=4.0, h=1 / 16, deltas=(0.0, 0.1))
    z = FiniteDimScale(0, max_level=1)
    s = direct_sum(e, z)
    u = np.exp(-e.grid ** 2)
    for m in range(2):
        assert s.norm(u, m) == pytest.approx(e.norm(u, m), abs=0)


def test_direct_sum_mixed_backend_recompute_oracle():
    e = make_grid_scale(R=4.0, h=1 / 16, deltas=(0.0, 0.1))
    f = FiniteDimScale(3, max_level=1)
    s = direct_sum(e, f)
    u = np.exp(-e.grid ** 2)
    v = np.array([1.0, -2.0, 2.0])
    both = np.concatenate([u, v])
    for m in range(2):
        expected = np.sqrt(e.norm(u, m) ** 2 + f.norm(v, m) ** 2)
        assert s.norm(both, m) == pytest.approx(expected, rel=1e-15)


def test_direct_sum_mismatched_levels():
    with pytest.raises(ValueError):
        direct_sum(FiniteDimScale(2, max_level=2), FiniteDimScale(2, max_level=3))


@settings(max_examples=40, deadline=None)
@given(
    a=st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=2),
    b=st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3),
)
def test_direct_sum_parallelogram(a, b):
    s = direct_sum(FiniteDimScale(2), FiniteDimScale(3))
    joint = np.asarray(a + b)
    na = FiniteDimScale(2).norm(np.asarray(a), 0)
    nb = FiniteDimScale(3).norm(np.asarray(b), 0)
    assert s.norm(joint, 0) ** 2 == pytest.approx(na ** 2 + nb ** 2, rel=1e-12, abs=1e-12)


# ------------------------------------------------------------------- shifted

def test_shifted_scale_levels():
    e = make_grid_scale()
    sh = e.shifted(1)
    assert sh.max_level == e.max_level - 1
    u = np.exp(-e.grid ** 2)
    assert sh.norm(u, 0) == pytest.approx(e.norm(u, 1), abs=0)


def test_circle_scale_norms():
    c = CircleGridScale(256, max_level=2)
    u = np.sin(c.grid)
    n0 = c.norm(u, 0)
    assert n0 == pytest.approx(np.sqrt(np.pi), rel=1e-6)
    assert c.norm(u, 1) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-6)


# ------------------------------------------------------------ config parsing

def test_scale_from_config_finite():
    s = scale_from_config('{"backend": "finite_dim", "dims": 4, "max_level": 2}')
    assert isinstance(s, FiniteDimScale)
    assert s.dim(0) == 4


def test_scale_from_config_grid():
    s = scale_from_config(
        '{"backend": "weighted_grid", "grid": {"R": 4.0, "h": 0.0625},'
        ' "deltas": [0.0, 0.1]}'
    )
    assert isinstance(s, WeightedGridScale)
    assert s.n == 129


def test_scale_from_config_unknown_key():
    with pytest.raises(ConfigError):
        scale_from_config('{"backend": "finite_dim", "dims": 4, "bogus": 1}')


def test_scale_from_config_bad_json_reports_line():
    with pytest.raises(ConfigError, match="line"):
        scale_from_config('{"backend": "finite_dim",\n "dims": }')
