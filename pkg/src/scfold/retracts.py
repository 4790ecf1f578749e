"""Idempotent smooth self-maps, their varying-dimension images, and boundary geometry.

The image of an idempotent map inside a partial quadrant is the local model
for spaces whose dimension may jump along a parameter. Membership in the image
is the fixed-point residual |r(x) - x|_0 <= 1e-9. Rank decisions near jump
loci use a guard band: relative singular values inside (1e-10, 1e-8) raise
instead of tie-breaking silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _fd
from .errors import (
    DegenerateBasisError,
    ImageMismatchError,
    NonIdempotentError,
    WindowExitError,
)
from .sc_calculus import ScDomain, ScMap, whole_scale_domain
from .sc_core import (
    FiniteDimScale,
    PartialQuadrant,
    ScVector,
    WeightedGridScale,
    degeneracy_index,
    direct_sum,
)

MEMBERSHIP_TOL = 1e-9
IDEMPOTENCE_TOL = 1e-9
PROJECTION_TOL = 1e-10


@dataclass
class Splicing:
    """Parametrized family of linear projections on a fiber scale.

    project(v, e) must be linear and idempotent in e for every admissible
    parameter v; dproject is the derivative of the joint map (v, e) -> pi_v(e)
    applied to a tangent direction (dv, de).
    """

    domain: ScDomain
    fiber: object
    project: object
    dproject: object = None
    meta: dict = field(default_factory=dict)

    def check_idempotent(self, parameter_samples, fiber_samples, tol=PROJECTION_TOL):
        worst = 0.0
        for v in parameter_samples:
            for e in fiber_samples:
                once = self.project(v, e)
                twice = self.project(v, once)
                worst = max(worst, self.fiber.norm(twice - once, 0))
        if worst > tol:
            raise NonIdempotentError(
                f"projection family violates idempotence: residual {worst:g}"
            )
        return worst


class Retraction:
    """Idempotent map r on a domain in a partial quadrant, with derivative access."""

    def __init__(self, domain, fn, dfn=None, name="retraction"):
        self.domain = domain
        self.fn = fn
        self.dfn = dfn
        self.name = name

    @property
    def scale(self):
        return self.domain.scale

    @property
    def quadrant(self):
        return self.domain.quadrant

    def __call__(self, coeffs):
        return np.asarray(self.fn(np.asarray(coeffs, dtype=float)), dtype=float)

    def derivative(self, coeffs, direction):
        if self.dfn is not None:
            return np.asarray(
                self.dfn(np.asarray(coeffs, dtype=float), np.asarray(direction, dtype=float)),
                dtype=float,
            )
        return _fd.directional_derivative(self.fn, coeffs, direction)

    def in_image(self, coeffs, tol=MEMBERSHIP_TOL):
        return self.scale.norm(self(coeffs) - coeffs, 0) <= tol

    def restrict(self, sub_membership, name=None):
        """Restriction to the preimage of an open subset of the image; the
        result is again a retraction onto that subset."""
        dom = ScDomain(
            self.domain.quadrant,
            center=self.domain.center,
            radii=self.domain.radii,
            predicate=lambda x: (
                (self.domain.predicate is None or self.domain.predicate(x))
                and sub_membership(self(x))
            ),
        )
        return Retraction(dom, self.fn, self.dfn, name=name or f"{self.name}|sub")

    def as_map(self):
        return ScMap(self.domain, self.scale,
                     fn=lambda x, m: self.fn(x),
                     dfn=None if self.dfn is None else (lambda x, h, m: self.dfn(x, h)),
                     name=self.name)


def retraction_check(r, samples, levels=None, tol=IDEMPOTENCE_TOL):
    """Max idempotence residual |r(r(x)) - r(x)|_m over samples and levels."""
    levels = range(r.scale.max_level + 1) if levels is None else levels
    worst = 0.0
    for x in samples:
        once = r(x)
        twice = r(once)
        for m in levels:
            worst = max(worst, r.scale.norm(twice - once, m))
    return worst


def tangent_retraction_check(r, samples, directions, tol=IDEMPOTENCE_TOL):
    """Idempotence of the tangent map (x, h) -> (r(x), Dr(x)h) on the image."""
    worst = 0.0
    for x, h in zip(samples, directions):
        rx = r(x)
        dh = r.derivative(rx, r.derivative(rx, h)) - r.derivative(rx, h)
        worst = max(worst, r.scale.norm(dh, 0))
    return worst


@dataclass
class LocalScModel:
    """A retract presented by its witnessing retraction inside a quadrant."""

    retraction: Retraction

    @property
    def quadrant(self):
        return self.retraction.quadrant

    @property
    def scale(self):
        return self.retraction.scale

    def contains(self, coeffs, tol=MEMBERSHIP_TOL):
        return self.retraction.in_image(coeffs, tol)

    def degeneracy(self, coeffs, tol=None):
        return degeneracy_index(self.quadrant, coeffs, tol)


def splicing_to_retraction(sp, parameter_samples=None, fiber_samples=None, name="spliced"):
    """r(v, e) = (v, pi_v(e)) on the sum of parameter and fiber scales.

    The image is the set of projection fixed points. Idempotence of the family
    is verified on the supplied samples before the retraction is built.
    """
    if parameter_samples is not None and fiber_samples is not None:
        sp.check_idempotent(parameter_samples, fiber_samples)
    pscale = sp.domain.scale
    sum_scale = direct_sum(pscale, sp.fiber)
    pdim = pscale.dim(0)
    quadrant = PartialQuadrant(sum_scale, sp.domain.quadrant.quadrant_indices)
    dom = ScDomain(quadrant)

    def fn(x):
        v, e = x[:pdim], x[pdim:]
        return np.concatenate([v, sp.project(v, e)])

    dfn = None
    if sp.dproject is not None:
        def dfn(x, h):
            v, e = x[:pdim], x[pdim:]
            dv, de = h[:pdim], h[pdim:]
            return np.concatenate([dv, sp.dproject(v, e, dv, de)])

    r = Retraction(dom, fn, dfn, name=name)
    r.parameter_dim = pdim
    return r


def _poly_bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = (1.0 - t[inside] ** 2) ** 4
    return out


def _poly_bump_deriv(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = -8.0 * t[inside] * (1.0 - t[inside] ** 2) ** 3
    return out


def bump_splicing(scale, beta=None, dbeta=None, support_radius=1.0):
    """Rank-jumping projection family from a translated bump profile.

    For s > 0 the family projects orthogonally (level-0 inner product) onto the
    span of the profile translated to sit around -exp(1/s); for s <= 0 it is
    zero. The profile is normalized to unit level-0 norm on the grid; a
    supplied profile must already integrate to one within 1e-8. Evaluations
    whose translated support exits the window raise WindowExitError.
    """
    if not isinstance(scale, WeightedGridScale):
        raise ValueError("bump splicing needs a weighted_grid fiber scale")
    if beta is None:
        base, dbase = _poly_bump, _poly_bump_deriv
        norm_const = np.sqrt(scale.inner0(base(scale.grid), base(scale.grid)))
    else:
        base = beta
        dbase = dbeta
        norm_const = np.sqrt(scale.inner0(base(scale.grid), base(scale.grid)))
        if abs(norm_const - 1.0) > 1e-8:
            raise ValueError(
                f"profile must have unit norm on the grid, got {norm_const:.3e}"
            )
        norm_const = 1.0

    def profile(t):
        return base(t) / norm_const

    def dprofile(t):
        if dbase is None:
            raise ValueError("no derivative supplied for the profile")
        return dbase(t) / norm_const

    def gauge(s):
        return np.exp(1.0 / s)

    def dgauge(s):
        return -np.exp(1.0 / s) / (s * s)

    def f_s(s):
        a = gauge(s)
        if a + support_radius > scale.R:
            raise WindowExitError(
                f"translated support [{-a - support_radius:.2f}, {-a + support_radius:.2f}] "
                f"exits the window [-{scale.R}, {scale.R}]"
            )
        return profile(scale.grid + a)

    def df_ds(s):
        a = gauge(s)
        if a + support_radius > scale.R:
            raise WindowExitError("translated support exits the window")
        return dprofile(scale.grid + a) * dgauge(s)

    def project(v, e):
        s = float(np.atleast_1d(v)[0])
        if s <= 0.0:
            return np.zeros_like(np.asarray(e, dtype=float))
        f = f_s(s)
        den = scale.inner0(f, f)
        return f * (scale.inner0(f, e) / den)

    def dproject(v, e, dv, de):
        s = float(np.atleast_1d(v)[0])
        ds = float(np.atleast_1d(dv)[0])
        e = np.asarray(e, dtype=float)
        de = np.asarray(de, dtype=float)
        if s <= 0.0:
            return np.zeros_like(e)
        f = f_s(s)
        fp = df_ds(s)
        den = scale.inner0(f, f)
        c = scale.inner0(f, e) / den
        dc = (
            scale.inner0(fp, e) / den
            - c * 2.0 * scale.inner0(fp, f) / den
        ) * ds + scale.inner0(f, de) / den
        return fp * (c * ds) + f * dc

    param = FiniteDimScale(1, max_level=scale.max_level)
    sp = Splicing(
        domain=whole_scale_domain(param),
        fiber=scale,
        project=project,
        dproject=dproject,
        meta={"kind": "bump", "support_radius": support_radius},
    )
    sp.profile = profile
    sp.f_s = f_s
    sp.df_ds = df_ds
    sp.min_parameter = 1.0 / np.log(scale.R - support_radius)
    return sp


@dataclass
class TangentBasis:
    basis: np.ndarray
    dimension: int
    singular_values: np.ndarray


def retract_tangent_basis(r, x, probe_count=24, seed=0, use_fd=False,
                          probes=None):
    """Orthonormal basis of the image of Dr(x); its dimension is the local
    retract dimension.

    Probes default to the full coordinate basis in small ambient dimension and
    to seeded random directions otherwise; the rank decision applies the guard
    band and raises AmbiguousRankError when undecidable.
    """
    x = np.asarray(x, dtype=float)
    d = x.size
    if probes is None:
        if d <= 64:
            probes = np.eye(d)
        else:
            rng = np.random.default_rng(seed)
            probes = rng.standard_normal((d, probe_count))
            probes /= np.linalg.norm(probes, axis=0)
    cols = []
    for j in range(probes.shape[1]):
        v = probes[:, j]
        if use_fd or r.dfn is None:
            cols.append(_fd.directional_derivative(r.fn, x, v))
        else:
            cols.append(r.derivative(x, v))
    m = np.array(cols).T
    basis, sing = _fd.orthonormal_columns(m)
    return TangentBasis(basis, basis.shape[1], sing)


def tangent_independence_check(r1, r2, samples, probe_count=24, seed=0,
                               tol=MEMBERSHIP_TOL):
    """Max principal-angle gap between the images of the two derivatives.

    Both retractions must present the same image: each sample must be fixed by
    both, and retracted perturbations of samples must land in both images.
    """
    rng = np.random.default_rng(seed)
    for x in samples:
        x = np.asarray(x, dtype=float)
        for r, other in ((r1, r2), (r2, r1)):
            if not r.in_image(x, tol):
                raise ImageMismatchError("sample not fixed by both retractions")
            y = r(x + 0.01 * rng.standard_normal(x.size) / np.sqrt(x.size))
            if not other.in_image(y, 10 * tol):
                raise ImageMismatchError(
                    "retracted perturbation leaves the other image"
                )
    worst = 0.0
    for x in samples:
        b1 = retract_tangent_basis(r1, x, probe_count, seed)
        b2 = retract_tangent_basis(r2, x, probe_count, seed)
        worst = max(worst, _fd.subspace_gap(b1.basis, b2.basis))
    return worst


@dataclass
class NeatnessReport:
    complement_ok: bool
    complement_basis: np.ndarray
    sequence_status: str  # "pass" or "inconclusive"
    details: dict

    @property
    def passed(self):
        return self.complement_ok and self.sequence_status == "pass"


def neatness_check(model, x, level=None, radii=(1e-1, 1e-2, 1e-3),
                   samples_per_radius=12, seed=0):
    """Two-part boundary compatibility check at a point of the retract.

    Part one constructs a complement of the fixed space of Dr(x) whose basis
    vectors have vanishing quadrant coordinates (hence lie inside the
    quadrant). Part two looks for approximating points of the image with equal
    degeneracy; for a declared-smooth x the constant sequence suffices, and
    when sampling finds no ladder the verdict is inconclusive rather than fail.
    """
    r = model.retraction
    x = np.asarray(x, dtype=float)
    d = x.size
    scale = model.scale
    level = scale.max_level if level is None else level

    cols = [r.derivative(x, e) for e in np.eye(d)]
    p = np.array(cols).T
    n_basis, _ = _fd.orthonormal_columns(p)
    n_dim = n_basis.shape[1]

    qidx = list(model.quadrant.quadrant_indices)
    details = {"fixed_space_dim": n_dim}
    if not qidx:
        w_basis = np.eye(d)
    else:
        keep = [i for i in range(d) if i not in qidx]
        w_basis = np.eye(d)[:, keep]
    # pick complement columns inside the zero-quadrant subspace via pivoted QR
    z = w_basis - n_basis @ (n_basis.T @ w_basis)
    need = d - n_dim
    if need == 0:
        complement = np.zeros((d, 0))
        complement_ok = True
    elif need > z.shape[1]:
        complement = np.zeros((d, 0))
        complement_ok = False
    else:
        _, _, piv = _fd_qr_pivots(z)
        complement = w_basis[:, piv[:need]]
        stacked = np.concatenate([n_basis, complement], axis=1)
        complement_ok = np.linalg.matrix_rank(stacked) == d
    details["complement_dim"] = complement.shape[1]

    d_x = model.degeneracy(x)
    if level == scale.max_level and model.contains(x):
        status = "pass"
        details["sequence"] = "constant sequence at smooth point"
    else:
        status = "inconclusive"
        rng = np.random.default_rng(seed)
        for radius in radii:
            found = False
            for _ in range(samples_per_radius):
                y = r(x + radius * rng.standard_normal(d) / np.sqrt(d))
                if model.contains(y) and model.quadrant.contains(y):
                    try:
                        if model.degeneracy(y) == d_x:
                            found = True
                            break
                    except Exception:
                        continue
            if not found:
                status = "inconclusive"
                break
            status = "pass"
        details["sequence"] = f"sampled ladder over radii {radii}"
    return NeatnessReport(complement_ok, complement, status, details)


def _fd_qr_pivots(a):
    import scipy.linalg

    q, rr, piv = scipy.linalg.qr(a, pivoting=True, mode="economic")
    return q, rr, piv


def corner_invariance_check(fwd, inv, src_quadrant, dst_quadrant, samples,
                            tol=MEMBERSHIP_TOL):
    """Max degeneracy discrepancy |d(x) - d(f(x))| over samples.

    fwd and inv are coordinate maps; inv must undo fwd on every sample within
    tol, otherwise the fixture is rejected as non-invertible.
    """
    worst = 0
    rows = []
    for x in samples:
        x = np.asarray(x, dtype=float)
        y = np.asarray(fwd(x), dtype=float)
        back = np.asarray(inv(y), dtype=float)
        if src_quadrant.scale.norm(back - x, 0) > tol:
            raise ValueError(f"fixture not invertible at {x.tolist()}")
        dx = degeneracy_index(src_quadrant, x)
        dy = degeneracy_index(dst_quadrant, y)
        rows.append((x, dx, dy))
        worst = max(worst, abs(dx - dy))
    return worst, rows


@dataclass
class GoodPositionReport:
    equivalence_ok: bool
    counterexamples: list
    interior_ok: bool
    interior_witness: np.ndarray | None

    @property
    def passed(self):
        return self.equivalence_ok and self.interior_ok


def good_position_check(n_basis, quadrant, nperp_basis, c, sample_count=400,
                        seed=0, max_condition=1e6):
    """Sampled test that small complement moves do not change quadrant
    membership, plus an interior witness inside the subspace.

    For pairs (n, m) with |m| <= c |n| the statements n + m in C and n in C
    must agree; counterexamples are reported with both points.
    """
    n_basis = np.atleast_2d(np.asarray(n_basis, dtype=float))
    if n_basis.shape[0] < n_basis.shape[1]:
        n_basis = n_basis.T
    nperp_basis = np.asarray(nperp_basis, dtype=float)
    if nperp_basis.size:
        nperp_basis = np.atleast_2d(nperp_basis)
        if nperp_basis.shape[0] < nperp_basis.shape[1]:
            nperp_basis = nperp_basis.T
    else:
        nperp_basis = np.zeros((n_basis.shape[0], 0))
    full = np.concatenate([n_basis, nperp_basis], axis=1)
    if full.shape[1] and np.linalg.cond(full) > max_condition:
        raise DegenerateBasisError("combined basis condition number too large")

    rng = np.random.default_rng(seed)
    k, j = n_basis.shape[1], nperp_basis.shape[1]
    counterexamples = []
    for _ in range(sample_count):
        a = rng.uniform(-1.0, 1.0, size=k)
        n_vec = n_basis @ a
        nn = np.linalg.norm(n_vec)
        if nn == 0.0:
            continue
        if j:
            b = rng.standard_normal(j)
            m_vec = nperp_basis @ b
            mn = np.linalg.norm(m_vec)
            if mn > 0:
                m_vec *= rng.uniform(0.0, 1.0) * c * nn / mn
        else:
            m_vec = np.zeros_like(n_vec)
        lhs = quadrant.contains(n_vec + m_vec)
        rhs = quadrant.contains(n_vec)
        if lhs != rhs:
            counterexamples.append((n_vec, m_vec))
    # interior relative to the subspace: a witness whose whole sampled
    # subspace ball stays inside the quadrant
    interior_witness = None
    for _ in range(sample_count):
        a = rng.uniform(-1.0, 1.0, size=k)
        n_vec = n_basis @ a
        nn = np.linalg.norm(n_vec)
        if nn == 0.0 or not quadrant.contains(n_vec):
            continue
        rho = 0.1 * nn
        ball_ok = True
        for _ in range(4 * k):
            delta = n_basis @ rng.standard_normal(k)
            dn = np.linalg.norm(delta)
            if dn == 0.0:
                continue
            if not quadrant.contains(n_vec + rho * delta / dn):
                ball_ok = False
                break
        if ball_ok:
            interior_witness = n_vec
            break
    return GoodPositionReport(
        equivalence_ok=not counterexamples,
        counterexamples=counterexamples,
        interior_ok=interior_witness is not None,
        interior_witness=interior_witness,
    )


@dataclass
class SubmanifoldChart:
    """Graph chart q -> base + q + A(q) over a neighborhood of 0 in C
    intersected with the subspace."""

    n_basis: np.ndarray
    nperp_basis: np.ndarray
    a_fn: object
    base_point: np.ndarray
    q_samples: np.ndarray
    points: np.ndarray

    def parametrize(self, q):
        q = np.atleast_1d(np.asarray(q, dtype=float))
        return self.base_point + self.n_basis @ q + self.nperp_basis @ np.atleast_1d(self.a_fn(q))

    def coordinates(self, y, tol=1e-8):
        """Invert the chart: split y - base into (q, b) along the two bases and
        check b against A(q)."""
        rhs = np.asarray(y, dtype=float) - self.base_point
        full = np.concatenate([self.n_basis, self.nperp_basis], axis=1)
        sol, *_ = np.linalg.lstsq(full, rhs, rcond=None)
        k = self.n_basis.shape[1]
        q, b = sol[:k], sol[k:]
        residual = np.linalg.norm(b - np.atleast_1d(self.a_fn(q)))
        return q, residual


def graph_chart_build(n_basis, nperp_basis, a_fn, quadrant, q_radius=0.5,
                      sample_count=41, base_point=None, tol=1e-10):
    """Build a graph chart and its sampled manifold patch.

    The graph map must satisfy A(0) = 0 and DA(0) = 0 within tol; injectivity
    of the parametrization is asserted on the sample set.
    """
    n_basis = np.atleast_2d(np.asarray(n_basis, dtype=float))
    if n_basis.shape[0] < n_basis.shape[1]:
        n_basis = n_basis.T
    nperp_basis = np.atleast_2d(np.asarray(nperp_basis, dtype=float))
    if nperp_basis.shape[0] < nperp_basis.shape[1]:
        nperp_basis = nperp_basis.T
    d = n_basis.shape[0]
    base_point = np.zeros(d) if base_point is None else np.asarray(base_point, dtype=float)
    k = n_basis.shape[1]

    a0 = np.linalg.norm(np.atleast_1d(a_fn(np.zeros(k))))
    if a0 > tol:
        raise ValueError(f"graph map must vanish at 0, |A(0)| = {a0:g}")
    da0 = _fd.directional_derivative(lambda q: np.atleast_1d(a_fn(q)),
                                     np.zeros(k), np.ones(k) / np.sqrt(k))
    if np.linalg.norm(da0) > 1e-6:
        raise ValueError("graph map must have vanishing derivative at 0")

    if k == 1:
        qs = np.linspace(-q_radius, q_radius, sample_count)[:, None]
    else:
        rng = np.random.default_rng(0)
        qs = rng.uniform(-q_radius, q_radius, size=(sample_count, k))
    keep = []
    for q in qs:
        candidate = base_point + n_basis @ q
        if quadrant.contains(candidate):
            keep.append(q)
    qs = np.array(keep)
    chart = SubmanifoldChart(n_basis, nperp_basis, a_fn, base_point, qs,
                             np.array([0.0]))
    pts = np.array([chart.parametrize(q) for q in qs])
    chart.points = pts
    if len(pts) >= 2:
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff ** 2).sum(-1))
        np.fill_diagonal(dist, np.inf)
        qdiff = qs[:, None, :] - qs[None, :, :]
        qdist = np.sqrt((qdiff ** 2).sum(-1))
        np.fill_diagonal(qdist, np.inf)
        if np.any((dist < 1e-12) & (qdist > 1e-12)):
            raise ValueError("parametrization is not injective on samples")
    return chart


def chart_transition(chart_a, chart_b, max_level=3):
    """Transition map between overlapping graph charts as a map on the first
    chart's coordinates."""
    k = chart_a.n_basis.shape[1]
    scale = FiniteDimScale(k, max_level=max_level)

    def fn(q, level):
        y = chart_a.parametrize(q)
        q2, residual = chart_b.coordinates(y)
        if residual > 1e-6:
            from .errors import DomainExitError

            raise DomainExitError(
                f"point leaves the second chart (graph residual {residual:g})"
            )
        return q2

    return ScMap(whole_scale_domain(scale), FiniteDimScale(k, max_level=max_level),
                 fn, name="transition")


def _smoothstep(t):
    return 0.5 * (1.0 + np.tanh(t))


@dataclass
class PathSample:
    kind: str  # "unbroken" or "broken"
    glue: float
    shape: np.ndarray
    degeneracy: int
    level: int
    local_dimension: int
    curve: np.ndarray  # sampled points in R^n (unbroken) or two stacked curves

    def row(self):
        return {
            "sample": {"kind": self.kind, "glue": self.glue,
                       "shape": self.shape.tolist()},
            "level": self.level,
            "local_dimension": self.local_dimension,
            "degeneracy_index": self.degeneracy,
        }


@dataclass
class BrokenPathDemo:
    model: LocalScModel
    anchors: tuple
    samples: list
    glue_cap: float

    def rows(self):
        return [s.row() for s in self.samples]

    def degeneracy_profile(self):
        return [(s.glue, s.degeneracy) for s in self.samples]


def broken_path_demo(a, b, c, shape_dims=(1, 1), glue_values=(0.0, 0.08, 0.15, 0.4, 1.0),
                     t_grid=None, shape_amplitude=0.2, glue_time_cap=1e12):
    """Gluing-parameter model of paths that may break once at the middle point.

    The chart is a quadrant [0, infinity) x shape space: glue parameter zero is
    the broken stratum (degeneracy one), positive glue is unbroken interior
    (degeneracy zero). Curves use a time shift growing like exp(1/glue), so
    shrinking the glue parameter parks the visible window at the middle point.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    for p, q in ((a, b), (b, c), (a, c)):
        if np.linalg.norm(p - q) < 1e-12:
            raise ValueError("anchor points must be mutually distinct")
    t_grid = np.linspace(-10.0, 10.0, 201) if t_grid is None else np.asarray(t_grid)
    p1, p2 = shape_dims
    dim = 1 + p1 + p2
    scale = FiniteDimScale(dim, max_level=3)
    quadrant = PartialQuadrant(scale, (0,))
    dom = ScDomain(quadrant)
    ident = Retraction(dom, lambda x: x, lambda x, h: h, name="broken-path-chart")
    model = LocalScModel(ident)

    def leg(p, q, t):
        return p[None, :] + (q - p)[None, :] * _smoothstep(t)[:, None]

    def bumps(t, coeffs):
        out = np.zeros((t.size, a.size))
        for j, w in enumerate(np.atleast_1d(coeffs)):
            out[:, j % a.size] += w * np.exp(-((t - (j - 0.5)) ** 2))
        return out

    rng = np.random.default_rng(11)
    samples = []
    for g in glue_values:
        w = shape_amplitude * rng.standard_normal(p1 + p2)
        coords = np.concatenate([[g], w])
        d = model.degeneracy(coords)
        if g == 0.0:
            first = leg(a, b, t_grid) + bumps(t_grid, w[:p1])
            second = leg(b, c, t_grid) + bumps(t_grid, w[p1:])
            curve = np.stack([first, second])
            kind = "broken"
        else:
            shift = min(np.exp(1.0 / g), glue_time_cap)
            curve = (leg(a, b, t_grid + shift) + leg(b, c, t_grid - shift) - b[None, :]
                     + bumps(t_grid, w[:p1]))[None, :, :]
            kind = "unbroken"
        basis = retract_tangent_basis(ident, coords)
        samples.append(PathSample(kind, float(g), w, d, scale.max_level,
                                  basis.dimension, curve))
    return BrokenPathDemo(model, (a, b, c), samples, glue_time_cap)
