"""Graded vector scales with per-level norms, partial quadrants and linear splitting.

A scale is a nested sequence of normed levels; an element carries a declared
regularity level and can be measured in the norm of any level up to it. Two
concrete backends are provided: constant finite-dimensional scales and
grid-discretized function scales on a truncation window [-R, R] whose level-m
norm combines derivatives up to the level's order, each weighted by
exp(delta_m |s|). A periodic circle backend hosts loop-space demos. Sums and
index shifts of scales are first-class so tangent constructions can reuse them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _fd
from .errors import (
    BackendUnsupportedError,
    ConfigError,
    LevelRangeError,
    NotInQuadrantError,
)

FINITE_DIM_TOL = 1e-12
GRID_TOL = 1e-9


class ScScale:
    """Base class: a nested family of norms indexed by level 0..max_level."""

    backend_kind = "abstract"
    max_level: int

    def dim(self, level):
        raise NotImplementedError

    def norm(self, coeffs, level):
        raise NotImplementedError

    def check_level(self, level):
        if not (0 <= level <= self.max_level):
            raise LevelRangeError(
                f"level {level} outside [0, {self.max_level}] for {self!r}"
            )

    def embedding_constant(self, m):
        """Recorded constant c_m with |x|_m <= c_m |x|_{m+1} for all x."""
        raise NotImplementedError

    def membership_tol(self):
        return FINITE_DIM_TOL

    def vector(self, coeffs, level=None):
        level = self.max_level if level is None else level
        return ScVector(self, np.asarray(coeffs, dtype=float), level)

    def zero(self, level=None):
        level = self.max_level if level is None else level
        return ScVector(self, np.zeros(self.dim(level)), level)

    def shifted(self, k):
        """The scale whose level m is this scale's level m+k."""
        if k == 0:
            return self
        if self.max_level - k < 0:
            raise LevelRangeError("no room to shift: max_level would be negative")
        return ShiftedScale(self, k)

    def truncated(self, max_level):
        """View of this scale with levels capped at max_level."""
        if max_level == self.max_level:
            return self
        return TruncatedScale(self, max_level)

    def compatible(self, other):
        """Structural equality: same level range and dimensions."""
        if self is other:
            return True
        if self.max_level != other.max_level:
            return False
        return all(self.dim(m) == other.dim(m) for m in range(self.max_level + 1))

    def regularity_level(self, coeffs, cap=None):
        """Diagnostic level estimate; constant scales report the cap."""
        cap = self.max_level if cap is None else min(cap, self.max_level)
        return cap


class FiniteDimScale(ScScale):
    """Constant scale: identical dimension and Euclidean norm at every level."""

    backend_kind = "finite_dim"

    def __init__(self, dim, max_level=3):
        if dim < 0 or max_level < 0:
            raise ValueError("dimension and max_level must be nonnegative")
        self._dim = int(dim)
        self.max_level = int(max_level)

    def dim(self, level):
        self.check_level(level)
        return self._dim

    def norm(self, coeffs, level):
        self.check_level(level)
        return float(np.linalg.norm(np.asarray(coeffs, dtype=float)))

    def embedding_constant(self, m):
        self.check_level(m + 1)
        return 1.0

    def __repr__(self):
        return f"FiniteDimScale(dim={self._dim}, max_level={self.max_level})"


class WeightedGridScale(ScScale):
    """Function scale sampled on a uniform grid over [-R, R].

    Level m measures derivatives up to orders[m] (default m), each multiplied
    by exp(delta_m |s|), combined in quadratic mean with a composite Simpson
    rule split at s = 0 where the weight has its kink. The weight sequence must
    be strictly increasing with delta_0 = 0. R/h must be a positive even
    integer so both Simpson halves have even panel counts.
    """

    backend_kind = "weighted_grid"

    def __init__(self, R, h, deltas, orders=None):
        deltas = [float(d) for d in deltas]
        if not deltas or deltas[0] != 0.0:
            raise ValueError("weight sequence must start with delta_0 = 0")
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise ValueError("weight sequence must be strictly increasing")
        half_panels = R / h
        if abs(half_panels - round(half_panels)) > 1e-9 or round(half_panels) % 2 != 0:
            raise ValueError("R/h must be a positive even integer")
        self.R = float(R)
        self.h = float(h)
        self.deltas = deltas
        self.max_level = len(deltas) - 1
        self.orders = list(range(self.max_level + 1)) if orders is None else [int(o) for o in orders]
        if len(self.orders) != self.max_level + 1:
            raise ValueError("one derivative order per level required")
        n = 2 * int(round(half_panels)) + 1
        self.n = n
        self.grid = -self.R + self.h * np.arange(n)
        self.quad_weights = _fd.simpson_weights(n, self.h, n // 2)
        self._weight_cache = {}
        self._diff_cache = {}
        self._gram_cache = {}
        self._embed_cache = {}

    def dim(self, level):
        self.check_level(level)
        return self.n

    def _weight(self, level):
        if level not in self._weight_cache:
            self._weight_cache[level] = np.exp(self.deltas[level] * np.abs(self.grid))
        return self._weight_cache[level]

    def diff(self, order):
        if order not in self._diff_cache:
            self._diff_cache[order] = _fd.diff_matrix(self.n, self.h, order)
        return self._diff_cache[order]

    def derivatives(self, coeffs, max_order):
        u = np.asarray(coeffs, dtype=float)
        out = [u]
        for k in range(1, max_order + 1):
            out.append(self.diff(k) @ u)
        return out

    def norm(self, coeffs, level):
        self.check_level(level)
        u = np.asarray(coeffs, dtype=float)
        if u.shape != (self.n,):
            raise ValueError(f"expected {self.n} grid values, got shape {u.shape}")
        w = self._weight(level)
        total = 0.0
        for v in self.derivatives(u, self.orders[level]):
            total += float(np.sum(self.quad_weights * (v * w) ** 2))
        return float(np.sqrt(total))

    def inner0(self, a, b):
        """Level-0 (unweighted) discrete inner product."""
        return float(np.sum(self.quad_weights * np.asarray(a) * np.asarray(b)))

    def gram(self, level):
        """Dense SPD matrix with |u|_level^2 = u' G u."""
        if level not in self._gram_cache:
            w2 = self.quad_weights * self._weight(level) ** 2
            G = np.zeros((self.n, self.n))
            for k in range(self.orders[level] + 1):
                D = self.diff(k).toarray() if k else np.eye(self.n)
                G += D.T @ (w2[:, None] * D)
            self._gram_cache[level] = G
        return self._gram_cache[level]

    def embedding_constant(self, m):
        """Measured constant: sqrt of the largest generalized eigenvalue of
        (G_m, G_{m+1}). Stronger levels only get measured, never asserted."""
        self.check_level(m + 1)
        if m not in self._embed_cache:
            ev = scipy.linalg.eigh(
                self.gram(m), self.gram(m + 1), eigvals_only=True,
                subset_by_index=(self.n - 1, self.n - 1),
            )
            self._embed_cache[m] = float(np.sqrt(ev[-1]))
        return self._embed_cache[m]

    def membership_tol(self):
        return GRID_TOL

    def tail_fraction(self, coeffs, level, window_fraction):
        """Share of the level norm's energy outside |s| > window_fraction * R."""
        u = np.asarray(coeffs, dtype=float)
        w = self._weight(level)
        outside = np.abs(self.grid) > window_fraction * self.R
        total = 0.0
        tail = 0.0
        for v in self.derivatives(u, self.orders[level]):
            e = self.quad_weights * (v * w) ** 2
            total += e.sum()
            tail += e[outside].sum()
        return float(tail / total) if total > 0 else 0.0

    def regularity_ratio_threshold(self):
        return (np.pi / self.h) ** (2.0 / 3.0)

    def regularity_level(self, coeffs, cap=None):
        """Largest level whose norm-growth ratio stays below the roughness
        threshold. A heuristic grid surrogate for membership in the level."""
        cap = self.max_level if cap is None else min(cap, self.max_level)
        theta = self.regularity_ratio_threshold()
        prev = self.norm(coeffs, 0)
        if prev == 0.0:
            return cap
        for m in range(1, cap + 1):
            cur = self.norm(coeffs, m)
            if cur > theta * prev:
                return m - 1
            prev = cur
        return cap

    def __repr__(self):
        return (
            f"WeightedGridScale(R={self.R}, h={self.h}, deltas={self.deltas})"
        )


class CircleGridScale(ScScale):
    """Periodic grid scale on [0, 2*pi): level m measures derivatives up to
    orders[m] in the plain L2 norm (no weights; the domain is compact).

    Hosts the loop-space demos where the base scale uses orders 1+m and the
    fiber uses orders m."""

    backend_kind = "circle_grid"

    def __init__(self, n, max_level=3, orders=None):
        self.n = int(n)
        self.max_level = int(max_level)
        self.orders = list(range(self.max_level + 1)) if orders is None else [int(o) for o in orders]
        if len(self.orders) != self.max_level + 1:
            raise ValueError("one derivative order per level required")
        self.h = 2.0 * np.pi / self.n
        self.grid = self.h * np.arange(self.n)
        self._diff_cache = {}

    def dim(self, level):
        self.check_level(level)
        return self.n

    def diff(self, order):
        if order not in self._diff_cache:
            self._diff_cache[order] = _fd.diff_matrix(self.n, self.h, order, periodic=True)
        return self._diff_cache[order]

    def norm(self, coeffs, level):
        self.check_level(level)
        u = np.asarray(coeffs, dtype=float)
        total = 0.0
        for k in range(self.orders[level] + 1):
            v = (self.diff(k) @ u) if k else u
            total += self.h * float(np.sum(v ** 2))
        return float(np.sqrt(total))

    def embedding_constant(self, m):
        self.check_level(m + 1)
        return 1.0  # orders are nested, lower norm is a sub-sum of the higher

    def membership_tol(self):
        return GRID_TOL

    def regularity_ratio_threshold(self):
        return (self.n / 2.0) ** (2.0 / 3.0)

    def regularity_level(self, coeffs, cap=None):
        cap = self.max_level if cap is None else min(cap, self.max_level)
        theta = self.regularity_ratio_threshold()
        prev = self.norm(coeffs, 0)
        if prev == 0.0:
            return cap
        for m in range(1, cap + 1):
            cur = self.norm(coeffs, m)
            if cur > theta * prev:
                return m - 1
            prev = cur
        return cap

    def __repr__(self):
        return f"CircleGridScale(n={self.n}, orders={self.orders})"


class ShiftedScale(ScScale):
    """View of a scale with levels shifted up by a fixed offset."""

    backend_kind = "shifted"

    def __init__(self, base, offset):
        if offset < 0 or base.max_level - offset < 0:
            raise LevelRangeError("invalid shift offset")
        self.base = base
        self.offset = int(offset)
        self.max_level = base.max_level - self.offset

    def dim(self, level):
        self.check_level(level)
        return self.base.dim(level + self.offset)

    def norm(self, coeffs, level):
        self.check_level(level)
        return self.base.norm(coeffs, level + self.offset)

    def embedding_constant(self, m):
        return self.base.embedding_constant(m + self.offset)

    def membership_tol(self):
        return self.base.membership_tol()

    def regularity_level(self, coeffs, cap=None):
        cap = self.max_level if cap is None else min(cap, self.max_level)
        r = self.base.regularity_level(coeffs, cap=cap + self.offset)
        return min(cap, max(0, r - self.offset))

    def __repr__(self):
        return f"ShiftedScale({self.base!r}, +{self.offset})"


class TruncatedScale(ScScale):
    """View of a scale with a reduced maximal level."""

    backend_kind = "truncated"

    def __init__(self, base, max_level):
        if not (0 <= max_level <= base.max_level):
            raise LevelRangeError("invalid truncation level")
        self.base = base
        self.max_level = int(max_level)

    def dim(self, level):
        self.check_level(level)
        return self.base.dim(level)

    def norm(self, coeffs, level):
        self.check_level(level)
        return self.base.norm(coeffs, level)

    def embedding_constant(self, m):
        self.check_level(m + 1)
        return self.base.embedding_constant(m)

    def membership_tol(self):
        return self.base.membership_tol()

    def regularity_level(self, coeffs, cap=None):
        cap = self.max_level if cap is None else min(cap, self.max_level)
        return min(cap, self.base.regularity_level(coeffs, cap=cap))

    def __repr__(self):
        return f"TruncatedScale({self.base!r}, max_level={self.max_level})"


class SumScale(ScScale):
    """Direct sum of scales; the level norm is the l2 combination of the
    component norms, so the parallelogram relation with components is exact."""

    backend_kind = "sum"

    def __init__(self, components):
        if not components:
            raise ValueError("need at least one component")
        levels = {c.max_level for c in components}
        if len(levels) > 1:
            raise ValueError(f"mismatched max_level among components: {levels}")
        self.components = list(components)
        self.max_level = components[0].max_level

    def dim(self, level):
        self.check_level(level)
        return sum(c.dim(level) for c in self.components)

    def split(self, coeffs, level=None):
        level = self.max_level if level is None else level
        coeffs = np.asarray(coeffs, dtype=float)
        parts = []
        at = 0
        for c in self.components:
            d = c.dim(level)
            parts.append(coeffs[at:at + d])
            at += d
        if at != coeffs.shape[0]:
            raise ValueError("coefficient length does not match the sum scale")
        return parts

    def join(self, parts):
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    def norm(self, coeffs, level):
        self.check_level(level)
        parts = self.split(coeffs, level)
        return float(np.sqrt(sum(c.norm(p, level) ** 2 for c, p in zip(self.components, parts))))

    def embedding_constant(self, m):
        return max(c.embedding_constant(m) for c in self.components)

    def membership_tol(self):
        return max(c.membership_tol() for c in self.components)

    def regularity_level(self, coeffs, cap=None):
        cap = self.max_level if cap is None else min(cap, self.max_level)
        parts = self.split(coeffs)
        return min(c.regularity_level(p, cap=cap) for c, p in zip(self.components, parts))

    def __repr__(self):
        return f"SumScale({self.components!r})"


def direct_sum(e, f):
    """Sum scale with level-m dimension the sum and l2-combined level norms."""
    if e.max_level != f.max_level:
        raise ValueError(
            f"mismatched max_level: {e.max_level} vs {f.max_level}"
        )
    comps = []
    for s in (e, f):
        comps.extend(s.components if isinstance(s, SumScale) else [s])
    return SumScale(comps)


@dataclass
class ScVector:
    """Coefficients plus the declared regularity level within an owning scale."""

    scale: ScScale
    coeffs: np.ndarray
    level: int

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        self.scale.check_level(self.level)
        expected = self.scale.dim(self.level)
        if self.coeffs.shape != (expected,):
            raise ValueError(
                f"coefficient length {self.coeffs.shape} does not match "
                f"dimension {expected} at level {self.level}"
            )

    def norm(self, m):
        return level_norm(self, m)

    def is_smooth(self):
        return self.level == self.scale.max_level


def level_norm(x, m):
    """The level-m norm of x; m must not exceed the declared level."""
    if m > x.level:
        raise LevelRangeError(
            f"requested level {m} exceeds declared level {x.level}"
        )
    return x.scale.norm(x.coeffs, m)


@dataclass
class PartialQuadrant:
    """Ambient scale with a subset of coordinates constrained to [0, infinity)."""

    scale: ScScale
    quadrant_indices: tuple = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.quadrant_indices)
        d = self.scale.dim(0)
        if any(i < 0 or i >= d for i in idx):
            raise ValueError("quadrant index outside ambient coordinate range")
        if len(set(idx)) != len(idx):
            raise ValueError("repeated quadrant index")
        self.quadrant_indices = idx

    def contains(self, coeffs, tol=None):
        tol = self.scale.membership_tol() if tol is None else tol
        coeffs = np.asarray(coeffs, dtype=float)
        if not self.quadrant_indices:
            return True
        return bool(np.all(coeffs[list(self.quadrant_indices)] >= -tol))

    def degeneracy(self, coeffs, tol=None):
        return degeneracy_index(self, coeffs, tol)


def degeneracy_index(quadrant, x, tol=None):
    """Number of quadrant coordinates of x that vanish within tol.

    Raises NotInQuadrantError when a quadrant coordinate is below -tol.
    """
    coeffs = x.coeffs if isinstance(x, ScVector) else np.asarray(x, dtype=float)
    tol = quadrant.scale.membership_tol() if tol is None else tol
    if not quadrant.quadrant_indices:
        return 0
    vals = coeffs[list(quadrant.quadrant_indices)]
    if np.any(vals < -tol):
        raise NotInQuadrantError(
            f"coordinates {vals[vals < -tol].tolist()} below -{tol:g}"
        )
    return int(np.sum(vals <= tol))


@dataclass
class EmbeddingReport:
    scale: ScScale
    level: int
    constant: float
    max_ratio: float
    ratios: np.ndarray
    tail_profile: dict
    violation: bool

    @property
    def passed(self):
        return not self.violation


def embedding_report(scale, m, sample_count=64, seed=0):
    """Sampled check that the level-m norm is controlled by the level-(m+1)
    norm times the recorded constant, plus a tail-energy decay profile.

    A desk-scale stand-in for the compactness of the inclusion: the constant is
    measured, the tail profile shows where level-(m+1)-unit mass can hide.
    """
    scale.check_level(m + 1)
    rng = np.random.default_rng(seed)
    c = scale.embedding_constant(m)
    ratios = []
    tails = {0.25: [], 0.5: [], 0.75: []}
    for _ in range(sample_count):
        v = rng.standard_normal(scale.dim(m + 1))
        hi = scale.norm(v, m + 1)
        if hi == 0.0:
            continue
        v = v / hi
        ratios.append(scale.norm(v, m) / scale.norm(v, m + 1))
        if isinstance(scale, WeightedGridScale):
            for frac in tails:
                tails[frac].append(scale.tail_fraction(v, m, frac))
    ratios = np.asarray(ratios)
    tail_profile = {
        frac: (float(np.max(vals)) if vals else None) for frac, vals in tails.items()
    }
    max_ratio = float(ratios.max()) if ratios.size else 0.0
    violation = max_ratio > c * (1.0 + 1e-9)
    return EmbeddingReport(scale, m, c, max_ratio, ratios, tail_profile, violation)


class LinearScOperator:
    """Level-wise bounded linear operator between scales.

    Finite-dimensional backends store one matrix applied at every level. Grid
    backends may instead carry an identity-plus-finite-rank structure
    T = I + U V', the only grid form whose splitting is computed here.
    """

    def __init__(self, source, target, matrix=None, lowrank=None):
        if matrix is None and lowrank is None:
            raise ValueError("need a matrix or a lowrank (U, V) pair")
        self.source = source
        self.target = target
        self.matrix = None if matrix is None else np.asarray(matrix, dtype=float)
        self.lowrank = None
        if lowrank is not None:
            u, v = lowrank
            self.lowrank = (np.asarray(u, dtype=float), np.asarray(v, dtype=float))

    def apply(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if self.matrix is not None:
            return self.matrix @ coeffs
        u, v = self.lowrank
        return coeffs + u @ (v.T @ coeffs)

    def __call__(self, coeffs):
        return self.apply(coeffs)

    def dense(self):
        if self.matrix is not None:
            return self.matrix
        u, v = self.lowrank
        n = u.shape[0]
        return np.eye(n) + u @ v.T

    def level_norm_estimate(self, level, sample_count=32, seed=0):
        """Sampled operator norm between the level-m norms."""
        rng = np.random.default_rng(seed)
        best = 0.0
        for _ in range(sample_count):
            x = rng.standard_normal(self.source.dim(level))
            nx = self.source.norm(x, level)
            if nx == 0:
                continue
            best = max(best, self.target.norm(self.apply(x), level) / nx)
        return best


@dataclass
class ScFredholmData:
    """Kernel/complement/image/cokernel bases with the resulting index."""

    kernel: np.ndarray
    complement: np.ndarray
    image: np.ndarray
    cokernel: np.ndarray
    index: int
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cutoff: float = 0.0

    @property
    def kernel_dim(self):
        return self.kernel.shape[1]

    @property
    def cokernel_dim(self):
        return self.cokernel.shape[1]


RANK_CUTOFF = 1e-10


def fredholm_split(op):
    """Kernel, complement, image and cokernel of a linear operator.

    Supported inputs: any finite-dimensional matrix backend, or a grid operator
    in identity-plus-finite-rank form. Rank decisions use a relative
    singular-value cutoff of RANK_CUTOFF recorded in the result.
    """
    if op.matrix is not None:
        a = op.matrix
        nt, ns = a.shape
        u, s, vt = np.linalg.svd(a) if a.size else (np.eye(nt), np.zeros(0), np.eye(ns))
        cutoff = RANK_CUTOFF * (s[0] if s.size and s[0] > 0 else 1.0)
        r = int(np.sum(s > cutoff))
        kernel = vt[r:].T
        complement = vt[:r].T
        image = u[:, :r]
        cokernel = u[:, r:]
        return ScFredholmData(
            kernel, complement, image, cokernel,
            index=(ns - r) - (nt - r), singular_values=s, cutoff=cutoff,
        )
    if op.lowrank is not None:
        u, v = op.lowrank
        r = u.shape[1]
        core = np.eye(r) + v.T @ u
        cu, cs, cvt = np.linalg.svd(core)
        cutoff = RANK_CUTOFF * max(cs[0], 1.0)
        rk = int(np.sum(cs > cutoff))
        # kernel of I + U V' lives in the span of U: x = U a with core a = 0
        ker_a = cvt[rk:].T
        kernel, _ = _fd.orthonormal_columns(u @ ker_a, rank=ker_a.shape[1]) if ker_a.size else (np.zeros((u.shape[0], 0)), None)
        # cokernel: kernel of the adjoint I + V U'
        core_adj = np.eye(r) + u.T @ v
        au, asv, avt = np.linalg.svd(core_adj)
        ark = int(np.sum(asv > RANK_CUTOFF * max(asv[0], 1.0)))
        cok_a = avt[ark:].T
        cokernel, _ = _fd.orthonormal_columns(v @ cok_a, rank=cok_a.shape[1]) if cok_a.size else (np.zeros((v.shape[0], 0)), None)
        n = u.shape[0]
        return ScFredholmData(
            kernel, np.zeros((n, 0)), np.zeros((n, 0)), cokernel,
            index=kernel.shape[1] - cokernel.shape[1],
            singular_values=cs, cutoff=cutoff,
        )
    raise BackendUnsupportedError(
        "splitting needs a dense matrix or identity-plus-finite-rank structure"
    )


def reconstruction_residual(op, split, sample_count=16, seed=0):
    """Residual of T = (T restricted to the complement) composed with the
    projection along the kernel, evaluated on random samples."""
    rng = np.random.default_rng(seed)
    a = op.dense()
    k = split.kernel
    worst = 0.0
    for _ in range(sample_count):
        x = rng.standard_normal(a.shape[1])
        px = x - k @ (k.T @ x) if k.size else x
        worst = max(worst, float(np.linalg.norm(a @ x - a @ px)))
    return worst


_SCALE_KEYS = {"backend", "max_level", "dims", "grid", "deltas", "orders", "n"}


def scale_from_config(text_or_dict):
    """Build a scale from a structured text config.

    Keys: backend, max_level, dims (finite_dim) or grid {R, h} plus deltas
    (weighted_grid) or n (circle_grid). Unknown keys are errors.
    """
    if isinstance(text_or_dict, str):
        try:
            cfg = json.loads(text_or_dict)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    else:
        cfg = dict(text_or_dict)
    unknown = set(cfg) - _SCALE_KEYS
    if unknown:
        raise ConfigError(f"unknown scale config keys: {sorted(unknown)}")
    backend = cfg.get("backend")
    if backend == "finite_dim":
        return FiniteDimScale(cfg["dims"], cfg.get("max_level", 3))
    if backend == "weighted_grid":
        grid = cfg.get("grid")
        if not isinstance(grid, dict) or set(grid) - {"R", "h"}:
            raise ConfigError("weighted_grid needs grid = {R, h}")
        return WeightedGridScale(grid["R"], grid["h"], cfg["deltas"], cfg.get("orders"))
    if backend == "circle_grid":
        return CircleGridScale(cfg["n"], cfg.get("max_level", 3), cfg.get("orders"))
    raise ConfigError(f"unknown backend {backend!r}")
