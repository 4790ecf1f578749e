"""Contraction normal forms and the level-wise fixed-point solution machinery.

A germ in normal form sends (a, w) to (q(a, w), w - B(a, w)) where B contracts
in w on every level near the origin. Solving w = B(a, w) by Picard iteration
level by level produces the solution sheet a -> delta(a); uniqueness makes the
level-m solution agree with the lower-level ones, which is verified rather
than assumed. Fillings extend a section from a retract to the ambient set; the
library verifies supplied fillings, it does not construct them.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import _fd
from .errors import NonConvergenceError, NotInQuadrantError
from .sc_core import FiniteDimScale, PartialQuadrant, degeneracy_index

GERM_ORIGIN_TOL = 1e-12


@dataclass
class BasicGerm:
    """Normal-form germ data.

    base_dim n with the first quadrant_count coordinates constrained to
    [0, inf); residue_dim N; fiber scale W; b_fn(a, w, level) evaluates the
    contraction part, residue_fn(a, w) the finite residue block. Contraction
    constants eps and validity radii rho are recorded per level.
    """

    base_dim: int
    quadrant_count: int
    residue_dim: int
    fiber: object
    b_fn: object
    residue_fn: object = None
    eps: tuple = (0.5,)
    radii: tuple = (1.0,)
    validate: bool = True

    def __post_init__(self):
        self.eps = tuple(float(e) for e in np.broadcast_to(self.eps, (self.fiber.max_level + 1,)))
        self.radii = tuple(float(r) for r in np.broadcast_to(self.radii, (self.fiber.max_level + 1,)))
        if self.residue_dim > 0 and self.residue_fn is None:
            raise ValueError("residue evaluator required when residue_dim > 0")
        if self.validate:
            zero_a = np.zeros(self.base_dim)
            zero_w = np.zeros(self.fiber.dim(0))
            b0 = self.fiber.norm(self.b_fn(zero_a, zero_w, 0), 0)
            if b0 > GERM_ORIGIN_TOL:
                raise ValueError(f"germ must vanish at the origin, |B(0,0)| = {b0:g}")
            if self.residue_dim:
                q0 = np.linalg.norm(self.residue_fn(zero_a, zero_w))
                if q0 > GERM_ORIGIN_TOL:
                    raise ValueError(f"residue must vanish at the origin: {q0:g}")

    def b(self, a, w, level=0):
        return np.asarray(self.b_fn(np.asarray(a, dtype=float),
                                    np.asarray(w, dtype=float), level), dtype=float)

    def residue(self, a, w):
        if self.residue_fn is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.residue_fn(np.asarray(a, dtype=float),
                                                        np.asarray(w, dtype=float)), dtype=float))

    def base_quadrant(self):
        return PartialQuadrant(FiniteDimScale(self.base_dim),
                               tuple(range(self.quadrant_count)))


def contraction_verify(germ, m, sample_count=200, seed=0):
    """Max observed contraction ratio of B at level m over seeded sample pairs
    within the validity radius; passes when it stays below the declared constant."""
    rng = np.random.default_rng(seed)
    rho = germ.radii[m]
    dim_w = germ.fiber.dim(m)
    worst = 0.0
    for _ in range(sample_count):
        a = rng.uniform(-1.0, 1.0, germ.base_dim)
        a[:germ.quadrant_count] = np.abs(a[:germ.quadrant_count])
        a *= rho * rng.uniform(0.0, 1.0) / max(np.linalg.norm(a), 1e-30)
        w1 = rng.standard_normal(dim_w)
        w2 = rng.standard_normal(dim_w)
        for w in (w1, w2):
            nw = germ.fiber.norm(w, m)
            if nw > 0:
                w *= rho * rng.uniform(0.0, 1.0) / nw
        dw = germ.fiber.norm(w1 - w2, m)
        if dw < 1e-14:
            continue
        db = germ.fiber.norm(germ.b(a, w1, m) - germ.b(a, w2, m), m)
        worst = max(worst, db / dw)
    return worst


@dataclass
class SolveInfo:
    iterations: int
    residual: float
    rates: list
    bound: int | None
    newton_used: bool = False

    @property
    def rate(self):
        return max(self.rates) if self.rates else 0.0


def solve_germ(germ, a, m, tol=1e-12, max_iter=500, newton=False):
    """Fixed point of w -> B(a, w) at level m from the zero initial guess.

    Picard iteration mirrors the contraction argument; the optional Newton
    accelerator falls back to Picard steps whenever its residual grows.
    Non-convergence within max_iter signals a contraction-assumption breach.
    """
    a = np.asarray(a, dtype=float)
    if np.linalg.norm(a) > germ.radii[m] * (1 + 1e-12):
        raise ValueError(f"parameter outside validity radius {germ.radii[m]:g}")
    w = np.zeros(germ.fiber.dim(m))
    b0 = germ.fiber.norm(germ.b(a, w, m), m)
    epsm = germ.eps[m]
    bound = None
    if epsm < 1.0 and b0 > tol:
        bound = int(np.ceil(np.log(tol * (1 - epsm) / b0) / np.log(epsm))) + 5
    rates = []
    prev_step = None
    newton_used = False
    for it in range(1, max_iter + 1):
        bw = germ.b(a, w, m)
        residual = germ.fiber.norm(w - bw, m)
        if residual <= tol:
            return w, SolveInfo(it - 1, residual, rates, bound, newton_used)
        if newton and germ.fiber.dim(m) <= 64:
            step = _newton_step(germ, a, w, m)
            if step is not None:
                cand = w + step
                if germ.fiber.norm(cand - germ.b(a, cand, m), m) < residual:
                    w = cand
                    newton_used = True
                    continue
        new_w = bw
        step_size = germ.fiber.norm(new_w - w, m)
        # rates from steps already at round-off would only measure noise
        if prev_step is not None and step_size > 100 * tol:
            rates.append(step_size / prev_step)
        prev_step = step_size
        w = new_w
    raise NonConvergenceError(
        f"no fixed point within {max_iter} iterations at level {m} "
        f"(last residual {residual:g}); contraction assumption may be violated"
    )


def _newton_step(germ, a, w, m):
    d = w.size
    jac = np.zeros((d, d))
    base = germ.b(a, w, m)
    h = 1e-7 * (1.0 + np.linalg.norm(w))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        jac[:, j] = (germ.b(a, w + e, m) - germ.b(a, w - e, m)) / (2 * h)
    try:
        return np.linalg.solve(np.eye(d) - jac, base - w)
    except np.linalg.LinAlgError:
        return None


@dataclass
class SheetNode:
    a: np.ndarray
    deltas: list  # per level
    iterations: list
    rates: list
    coherence: list  # |delta_m - delta_{m-1}|_{m-1}


@dataclass
class SolutionSheet:
    germ: BasicGerm
    nodes: list
    m_max: int
    tol: float
    derivative_estimates: np.ndarray | None = None

    def max_coherence(self):
        vals = [c for node in self.nodes for c in node.coherence]
        return max(vals) if vals else 0.0

    def delta_array(self, level):
        return np.array([node.deltas[level] for node in self.nodes])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        dim_w = self.germ.fiber.dim(0)
        w.writerow(
            [f"a{i}" for i in range(self.germ.base_dim)]
            + ["level"]
            + [f"delta{i}" for i in range(dim_w)]
            + ["iterations", "rate"]
        )
        for node in self.nodes:
            for m in range(self.m_max + 1):
                rate = max(node.rates[m]) if node.rates[m] else 0.0
                w.writerow(
                    [repr(float(v)) for v in node.a]
                    + [m]
                    + [repr(float(v)) for v in node.deltas[m]]
                    + [node.iterations[m], repr(rate)]
                )
        return buf.getvalue()


def solution_sheet(germ, a_grid, m_max=None, tol=1e-12, newton=False):
    """Solve at every grid node and every level, recording iteration counts,
    contraction rates, level coherence, and grid derivative estimates."""
    m_max = germ.fiber.max_level if m_max is None else m_max
    a_grid = np.atleast_2d(np.asarray(a_grid, dtype=float))
    if a_grid.shape[1] != germ.base_dim:
        a_grid = a_grid.T
    nodes = []
    for a in a_grid:
        deltas, iters, rates, coher = [], [], [], []
        for m in range(m_max + 1):
            try:
                w, info = solve_germ(germ, a, m, tol=tol, newton=newton)
            except NonConvergenceError as exc:
                raise NonConvergenceError(f"node {a.tolist()}: {exc}") from exc
            deltas.append(w)
            iters.append(info.iterations)
            rates.append(info.rates)
            if m > 0:
                coher.append(germ.fiber.norm(deltas[m] - deltas[m - 1], m - 1))
        nodes.append(SheetNode(a, deltas, iters, rates, coher))
    sheet = SolutionSheet(germ, nodes, m_max, tol)
    if germ.base_dim == 1 and len(nodes) > 2:
        order = np.argsort(a_grid[:, 0])
        xs = a_grid[order, 0]
        if np.allclose(np.diff(xs), np.diff(xs)[0]):
            vals = sheet.delta_array(m_max)[order]
            grads = np.gradient(vals, xs, axis=0)
            sheet.derivative_estimates = grads[np.argsort(order)]
    return sheet


# ---------------------------------------------------------------------------
# fillings


@dataclass
class FillingData:
    """Supplied extension of a section from a retract to the ambient set.

    ambient_fn(y) evaluates the extension on ambient points; retraction is the
    bundle's base retraction r; phi(y, h) applies the fiber projection part of
    the strong retraction at y. section_fn defaults to the restriction of the
    extension to the retract.
    """

    ambient_fn: object
    retraction: object
    phi: object
    fiber: object
    section_fn: object = None

    def section(self, y):
        fn = self.section_fn or self.ambient_fn
        return np.asarray(fn(np.asarray(y, dtype=float)), dtype=float)

    def gap(self, y):
        """(Id - phi(r(y))) applied to the extension at y."""
        y = np.asarray(y, dtype=float)
        ry = self.retraction(y)
        fy = np.asarray(self.ambient_fn(y), dtype=float)
        return fy - np.asarray(self.phi(ry, fy), dtype=float)


@dataclass
class FillingReport:
    agreement: float
    solution_membership: float
    iso_condition: float
    iso_min_singular: float
    checks: dict

    @property
    def passed(self):
        return all(self.checks.values())


def filling_verify(fd, x, sample_count=12, seed=0, membership_tol=1e-9,
                   agreement_tol=1e-9, iso_floor=1e-8, relax_steps=200,
                   relax_rate=0.5):
    """Three-part verification of a supplied filling at a smooth point.

    (1) the extension agrees with the section on retract points near x;
    (2) ambient solutions of the projected equation, found by damped
    relaxation from seeded starts, lie on the retract within tolerance;
    (3) the linearization of the gap map restricted to the kernel of Dr(x)
    is an isomorphism onto the kernel of phi(x), with condition reported.
    """
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    r = fd.retraction
    scale = r.scale
    d = x.size

    agree = 0.0
    for _ in range(sample_count):
        y = r(x + 0.05 * rng.standard_normal(d) / np.sqrt(d))
        agree = max(agree, fd.fiber.norm(
            np.asarray(fd.ambient_fn(y)) - fd.section(y), 0))

    member = 0.0
    fiber_dim = fd.fiber.dim(0)
    for _ in range(sample_count):
        y = x + 0.05 * rng.standard_normal(d) / np.sqrt(d)
        for _ in range(relax_steps):
            g = fd.gap(y)
            if fd.fiber.norm(g, 0) < 1e-13:
                break
            y = y - relax_rate * _embed_fiber(g, d, fiber_dim)
        member = max(member, scale.norm(r(y) - y, 0))

    p_cols = [r.derivative(x, e) for e in np.eye(d)]
    p = np.array(p_cols).T
    ker_r = _nullspace(p)
    phi_cols = [np.asarray(fd.phi(x, e), dtype=float) for e in np.eye(fiber_dim)]
    phi_mat = np.array(phi_cols).T
    ker_phi = _nullspace(phi_mat)
    lin_cols = [
        _fd.directional_derivative(fd.gap, x, ker_r[:, j])
        for j in range(ker_r.shape[1])
    ]
    lin = np.array(lin_cols).T
    restricted = ker_phi.T @ lin if ker_phi.size else np.zeros((0, ker_r.shape[1]))
    if restricted.size and restricted.shape[0] == restricted.shape[1]:
        sv = np.linalg.svd(restricted, compute_uv=False)
        iso_min = float(sv.min()) if sv.size else 0.0
        iso_cond = float(sv.max() / sv.min()) if sv.size and sv.min() > 0 else np.inf
    elif restricted.size == 0 and ker_r.shape[1] == 0:
        iso_min, iso_cond = 1.0, 1.0  # trivial kernels on both sides
    else:
        iso_min, iso_cond = 0.0, np.inf
    checks = {
        "agreement": agree <= agreement_tol,
        "solutions_in_retract": member <= membership_tol,
        "isomorphism": iso_min > iso_floor,
    }
    return FillingReport(agree, member, iso_cond, iso_min, checks)


def _embed_fiber(g, ambient_dim, fiber_dim):
    out = np.zeros(ambient_dim)
    out[ambient_dim - fiber_dim:] = g
    return out


def _nullspace(a, rcond=1e-8):
    u, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > rcond * max(s[0] if s.size else 0.0, 1e-30)))
    return vt[rank:].T


# ---------------------------------------------------------------------------
# local solution manifolds


@dataclass
class ManifoldSample:
    a: np.ndarray
    w: np.ndarray
    kernel_coords: np.ndarray
    surjectivity: float
    degeneracy: int


@dataclass
class ManifoldReport:
    samples: list
    kernel_basis: np.ndarray
    dimension: int
    base_surjectivity: float

    def boundary_samples(self):
        return [s for s in self.samples if s.degeneracy >= 1]


def local_solution_manifold(germ, kernel_dim=None, tol=1e-10, patch_radius=0.3,
                            samples_per_dim=9, seed=0, surjectivity_floor=1e-8):
    """Sampled solution set of the full germ equation near the origin.

    The fiber part is solved by the fixed-point iteration; the finite residue
    equation is reduced to the parameter block and sampled over its kernel,
    whose dimension is the expected manifold dimension. Surjectivity of the
    reduced derivative is required at the origin and reported at every sample.
    """
    n, N = germ.base_dim, germ.residue_dim

    def reduced(a):
        w, _ = solve_germ(germ, a, 0, tol=tol)
        return germ.residue(a, w)

    if N == 0:
        kernel = np.eye(n)
        base_sv = np.inf
    else:
        jac = _fd_jacobian(reduced, np.zeros(n), N)
        sv = np.linalg.svd(jac, compute_uv=False)
        base_sv = float(sv[N - 1]) if sv.size >= N else 0.0
        if base_sv <= surjectivity_floor:
            raise NonConvergenceError(
                f"linearization not surjective at the base point "
                f"(smallest residue singular value {base_sv:g})"
            )
        kernel = _nullspace_rect(jac)
    k_dim = kernel.shape[1]
    if kernel_dim is not None and kernel_dim != k_dim:
        raise ValueError(f"expected kernel dimension {kernel_dim}, got {k_dim}")

    quadrant = germ.base_quadrant()
    complement = _nullspace_rect(kernel.T) if N else np.zeros((n, 0))
    grids = [np.linspace(-patch_radius, patch_radius, samples_per_dim)] * k_dim
    mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, k_dim) \
        if k_dim else np.zeros((1, 0))
    samples = []
    for kappa in mesh:
        a = kernel @ kappa
        if N:
            xi = np.zeros(N)
            ok = False
            for _ in range(50):
                val = reduced(a + complement @ xi)
                if np.linalg.norm(val) < 10 * tol:
                    ok = True
                    break
                jac = _fd_jacobian(lambda z: reduced(a + complement @ z), xi, N)
                try:
                    xi = xi - np.linalg.solve(jac, val)
                except np.linalg.LinAlgError:
                    break
            if not ok:
                continue
            a = a + complement @ xi
        try:
            if not quadrant.contains(a):
                continue
            deg = degeneracy_index(quadrant, a)
        except NotInQuadrantError:
            continue
        w, _ = solve_germ(germ, a, 0, tol=tol)
        if N:
            jac = _fd_jacobian(reduced, a, N)
            sv = np.linalg.svd(jac, compute_uv=False)
            surj = float(sv[N - 1])
        else:
            surj = np.inf
        samples.append(ManifoldSample(a, w, kappa, surj, deg))
    return ManifoldReport(samples, kernel, k_dim, base_sv)


def _fd_jacobian(fn, x, out_dim, step=1e-6):
    x = np.asarray(x, dtype=float)
    jac = np.zeros((out_dim, x.size))
    for j in range(x.size):
        e = np.zeros(x.size)
        e[j] = step
        jac[:, j] = (np.atleast_1d(fn(x + e)) - np.atleast_1d(fn(x - e))) / (2 * step)
    return jac


def _nullspace_rect(a, rcond=1e-10):
    u, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > rcond * max(s[0] if s.size else 0.0, 1e-30)))
    return vt[rank:].T


# ---------------------------------------------------------------------------
# normal form at a point of a finite-dimensional map


@dataclass
class PointGerm:
    """Germ data produced from a map at an approximate zero, together with the
    frames needed to translate between germ and ambient coordinates."""

    germ: BasicGerm
    x0: np.ndarray
    kernel_frame: np.ndarray
    row_frame: np.ndarray
    image_frame: np.ndarray
    cokernel_frame: np.ndarray
    sigma: np.ndarray

    def ambient(self, a, w):
        return self.x0 + self.kernel_frame @ np.atleast_1d(a) + self.row_frame @ np.atleast_1d(w)


def germ_from_map(fn, x0, out_dim, rank_cutoff=1e-10, radius=1.0):
    """Normal form of a finite-dimensional map near a point.

    Splits coordinates along the kernel and row space of the derivative;
    the fixed-point part becomes a contraction near the point and the
    cokernel component becomes the finite residue block. Solving the
    fixed-point equation implements a quasi-Newton corrector whose fixed
    points are the zeros of the image component.
    """
    x0 = np.asarray(x0, dtype=float)
    jac = _fd_jacobian(lambda z: np.atleast_1d(fn(z)), x0, out_dim)
    u, s, vt = np.linalg.svd(jac)
    cutoff = rank_cutoff * max(s[0] if s.size else 0.0, 1e-30)
    r = int(np.sum(s > cutoff))
    row = vt[:r].T
    kernel = vt[r:].T
    image = u[:, :r]
    coker = u[:, r:]
    sigma = s[:r]

    def b_fn(a, w, level):
        x = x0 + kernel @ np.atleast_1d(a) + row @ np.atleast_1d(w)
        y = image.T @ np.atleast_1d(fn(x))
        return np.atleast_1d(w) - y / sigma

    def residue_fn(a, w):
        x = x0 + kernel @ np.atleast_1d(a) + row @ np.atleast_1d(w)
        return coker.T @ np.atleast_1d(fn(x))

    germ = BasicGerm(
        base_dim=kernel.shape[1],
        quadrant_count=0,
        residue_dim=coker.shape[1],
        fiber=FiniteDimScale(r, max_level=0),
        b_fn=b_fn,
        residue_fn=residue_fn if coker.shape[1] else None,
        eps=(0.5,),
        radii=(radius,),
        validate=False,
    )
    return PointGerm(germ, x0, kernel, row, image, coker, sigma)
