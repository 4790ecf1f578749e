"""Weighted branch families, differential forms, canonical measures and Stokes checks.

Branches are parametrized manifolds-with-corners given by chart maps from
reference cubes; weights are positive rationals. The measure of a region is
(1 / effective symmetry order) times the weighted sum of per-branch pull-back
integrals, computed by tensor Gauss quadrature on the reference cells. Forms
default to a polynomial coefficient representation so the exterior derivative
is exact and Stokes residuals isolate quadrature error.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _fd
from .errors import MissingDerivativeError, UnchartedPointError
from .perturbation import perturb_to_transversal, solution_set

MEMBERSHIP_TOL = 1e-9


# ---------------------------------------------------------------------------
# differential forms


def _sorted_key(idx):
    """Sort a multi-index, tracking the permutation sign; repeated indices kill
    the term."""
    idx = tuple(idx)
    if len(set(idx)) != len(idx):
        return None, 0
    perm = np.argsort(idx)
    sign = 1
    seen = list(idx)
    # count inversions
    inv = sum(1 for i in range(len(idx)) for j in range(i + 1, len(idx))
              if idx[i] > idx[j])
    sign = -1 if inv % 2 else 1
    return tuple(sorted(idx)), sign


class Polynomial:
    """Multivariate polynomial as a dict from exponent tuples to coefficients."""

    def __init__(self, n_vars, terms=None):
        self.n_vars = n_vars
        self.terms = dict(terms or {})

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for expo, c in self.terms.items():
            total += c * np.prod([x[i] ** e for i, e in enumerate(expo)])
        return total

    def partial(self, i):
        out = {}
        for expo, c in self.terms.items():
            if expo[i] == 0:
                continue
            new = list(expo)
            new[i] -= 1
            key = tuple(new)
            out[key] = out.get(key, 0.0) + c * expo[i]
        return Polynomial(self.n_vars, out)

    @classmethod
    def constant(cls, n_vars, c):
        return cls(n_vars, {tuple([0] * n_vars): float(c)})

    @classmethod
    def coordinate(cls, n_vars, i):
        expo = [0] * n_vars
        expo[i] = 1
        return cls(n_vars, {tuple(expo): 1.0})


class PolynomialForm:
    """Skew form with polynomial coefficients: sum over increasing index
    tuples I of c_I(x) dx_I. The exterior derivative differentiates the
    coefficients exactly."""

    def __init__(self, n_vars, degree, terms):
        self.n_vars = n_vars
        self.degree = degree
        self.terms = {}
        for idx, poly in terms.items():
            key, sign = _sorted_key(idx)
            if key is None:
                continue
            if not isinstance(poly, Polynomial):
                poly = Polynomial(n_vars, poly)
            if sign < 0:
                poly = Polynomial(n_vars, {e: -c for e, c in poly.terms.items()})
            if key in self.terms:
                merged = dict(self.terms[key].terms)
                for e, c in poly.terms.items():
                    merged[e] = merged.get(e, 0.0) + c
                self.terms[key] = Polynomial(n_vars, merged)
            else:
                self.terms[key] = poly

    def __call__(self, x, *vectors):
        if len(vectors) != self.degree:
            raise ValueError(f"need {self.degree} tangent vectors")
        x = np.asarray(x, dtype=float)
        if self.degree == 0:
            return sum(poly(x) for poly in self.terms.values())
        total = 0.0
        vmat = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
        for idx, poly in self.terms.items():
            minor = vmat[list(idx), :]
            total += poly(x) * np.linalg.det(minor)
        return float(total)

    def exterior_derivative(self):
        out = {}
        for idx, poly in self.terms.items():
            for j in range(self.n_vars):
                dp = poly.partial(j)
                if not dp.terms:
                    continue
                new_idx = (j,) + idx
                key, sign = _sorted_key(new_idx)
                if key is None:
                    continue
                add = {e: sign * c for e, c in dp.terms.items()}
                if key in out:
                    for e, c in add.items():
                        out[key].terms[e] = out[key].terms.get(e, 0.0) + c
                else:
                    out[key] = Polynomial(self.n_vars, add)
        return PolynomialForm(self.n_vars, self.degree + 1, out)


class CallbackForm:
    """Form given by an evaluator; the exterior derivative must be supplied or
    requested through the finite-difference fallback."""

    def __init__(self, n_vars, degree, fn, dfn=None):
        self.n_vars = n_vars
        self.degree = degree
        self.fn = fn
        self.dfn = dfn

    def __call__(self, x, *vectors):
        if len(vectors) != self.degree:
            raise ValueError(f"need {self.degree} tangent vectors")
        return float(self.fn(np.asarray(x, dtype=float), *vectors))

    def exterior_derivative(self, fd_fallback=False, step=1e-6):
        if self.dfn is not None:
            return self.dfn
        if not fd_fallback:
            raise MissingDerivativeError(
                "no exterior-derivative supplier; pass fd_fallback=True")
        base = self

        def dfn(x, *vectors):
            # alternating sum of directional derivatives of the contractions
            total = 0.0
            for i, v in enumerate(vectors):
                rest = vectors[:i] + vectors[i + 1:]
                fplus = base(np.asarray(x) + step * np.asarray(v), *rest)
                fminus = base(np.asarray(x) - step * np.asarray(v), *rest)
                total += (-1) ** i * (fplus - fminus) / (2 * step)
            return total

        return CallbackForm(self.n_vars, self.degree + 1, dfn)


def exterior_derivative(form, fd_fallback=False):
    """d of a form; exact for the polynomial representation."""
    if isinstance(form, PolynomialForm):
        return form.exterior_derivative()
    return form.exterior_derivative(fd_fallback=fd_fallback)


def skew_symmetry_residual(form, samples, seed=0, tol=1e-10):
    """Max violation of the swap-sign rule at sampled points and vectors."""
    if form.degree < 2:
        return 0.0
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in samples:
        vecs = [rng.standard_normal(form.n_vars) for _ in range(form.degree)]
        v1 = form(x, *vecs)
        swapped = list(vecs)
        swapped[0], swapped[1] = swapped[1], swapped[0]
        v2 = form(x, *swapped)
        worst = max(worst, abs(v1 + v2))
    return worst


def morphism_invariance_residual(form, morphism_pairs):
    """Max violation of pull-back invariance over sampled morphisms.

    morphism_pairs: list of (x, vectors, y, mapped_vectors) with y the image
    of x and mapped_vectors the tangent images.
    """
    worst = 0.0
    for x, vecs, y, mapped in morphism_pairs:
        worst = max(worst, abs(form(y, *mapped) - form(x, *vecs)))
    return worst


# ---------------------------------------------------------------------------
# branches


@dataclass
class Cell:
    """Reference cube mapped into an object chart.

    chart_map takes reference coordinates in the given bounds; jac may be
    omitted, in which case finite differences are used. sign flips the cell's
    orientation contribution.
    """

    dim: int
    chart_map: object
    jac: object = None
    bounds: tuple = None
    sign: int = 1

    def __post_init__(self):
        if self.bounds is None:
            self.bounds = tuple((0.0, 1.0) for _ in range(self.dim))
        self.bounds = tuple((float(a), float(b)) for a, b in self.bounds)

    def point(self, q):
        return np.asarray(self.chart_map(np.asarray(q, dtype=float)), dtype=float)

    def jacobian(self, q, step=1e-6):
        q = np.asarray(q, dtype=float)
        if self.jac is not None:
            return np.asarray(self.jac(q), dtype=float)
        cols = []
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = step
            cols.append((self.point(q + e) - self.point(q - e)) / (2 * step))
        return np.array(cols).T

    def boundary_cells(self):
        """Faces with the induced orientation of the standard cube."""
        faces = []
        for j in range(self.dim):
            for side, value in ((0, self.bounds[j][0]), (1, self.bounds[j][1])):
                # outward convention: sign (-1)^j for the upper face, opposite
                # for the lower one
                face_sign = self.sign * ((-1) ** j) * (1 if side == 1 else -1)
                faces.append(self._face(j, value, face_sign))
        return faces

    def _face(self, axis, value, sign):
        rest = [self.bounds[k] for k in range(self.dim) if k != axis]

        def face_map(q, axis=axis, value=value):
            q = np.atleast_1d(np.asarray(q, dtype=float))
            full = np.insert(q, axis, value)
            return self.point(full)

        def face_jac(q, axis=axis, value=value):
            q = np.atleast_1d(np.asarray(q, dtype=float))
            full = np.insert(q, axis, value)
            jac = self.jacobian(full)
            keep = [k for k in range(self.dim) if k != axis]
            return jac[:, keep]

        return Cell(self.dim - 1, face_map, face_jac, tuple(rest), sign)


@dataclass
class Branch:
    """One weighted branch: a manifold-with-corners triangulated into cells."""

    cells: list
    weight: Fraction
    name: str = "branch"
    membership: object = None  # optional exact membership predicate

    def __post_init__(self):
        self.weight = Fraction(self.weight)
        if self.weight <= 0:
            raise ValueError("branch weights must be positive rationals")

    @property
    def dim(self):
        return self.cells[0].dim if self.cells else 0

    def contains(self, y, tol=MEMBERSHIP_TOL, probe=9):
        if self.membership is not None:
            return bool(self.membership(np.asarray(y, dtype=float)))
        y = np.asarray(y, dtype=float)
        for cell in self.cells:
            if _cell_distance(cell, y, probe) <= tol:
                return True
        return False


def _cell_distance(cell, y, probe=9):
    """Distance from y to the image of the cell: coarse grid with a local
    Gauss-Newton polish on the closest reference point."""
    grids = [np.linspace(a, b, probe) for a, b in cell.bounds]
    best_q = None
    best_d = np.inf
    for q in itertools.product(*grids):
        d = np.linalg.norm(cell.point(np.array(q)) - y)
        if d < best_d:
            best_d, best_q = d, np.array(q)
    q = best_q.astype(float)
    for _ in range(40):
        r = cell.point(q) - y
        jac = cell.jacobian(q)
        try:
            step, *_ = np.linalg.lstsq(jac, r, rcond=None)
        except np.linalg.LinAlgError:
            break
        q_new = np.clip(q - step,
                        [a for a, _ in cell.bounds], [b for _, b in cell.bounds])
        if np.linalg.norm(cell.point(q_new) - y) >= best_d - 1e-15:
            break
        q = q_new
        best_d = np.linalg.norm(cell.point(q) - y)
    return best_d


class BranchedFamily:
    """Finite weighted family of branches with symmetry bookkeeping.

    The weight function adds the weights of branches containing the point.
    effective_order is the order of the effective symmetry group entering the
    measure normalization; when left unset it defaults to one with a warning.
    """

    def __init__(self, branches, effective_order=None, name="branched-family",
                 support_level="smooth"):
        self.branches = list(branches)
        self.name = name
        self.support_level = support_level
        if effective_order is None:
            warnings.warn(
                "no effective symmetry order supplied; defaulting to 1",
                stacklevel=2)
            effective_order = 1
        self.effective_order = int(effective_order)

    def theta(self, y, tol=MEMBERSHIP_TOL):
        total = Fraction(0)
        hit = False
        for b in self.branches:
            if b.contains(y, tol):
                total += b.weight
                hit = True
        return total if hit else Fraction(0)


def theta_eval(family, y, tol=MEMBERSHIP_TOL, require_covered=True):
    """Sum of weights of branches containing y."""
    y = np.asarray(y, dtype=float)
    value = family.theta(y, tol)
    if require_covered and value == 0:
        covered = any(
            _cell_distance(cell, y) < 10.0 for b in family.branches for cell in b.cells
        )
        if not covered:
            raise UnchartedPointError("point lies outside every covered neighborhood")
    return value


# ---------------------------------------------------------------------------
# integration


@dataclass
class WeightedMeasureResult:
    value: float
    quadrature_order: int
    per_branch: list  # (branch name, raw integral before weights)
    est_error: float

    def formula_value(self, weights, effective_order):
        total = 0.0
        for (name, raw), w in zip(self.per_branch, weights):
            total += float(w) * raw
        return total / effective_order


def _cell_integral(cell, form, order, region=None):
    pts, wts = _fd.gauss01(order)
    grids = []
    scale = 1.0
    bounds = region if region is not None else cell.bounds
    for a, b in bounds:
        grids.append(a + (b - a) * pts)
        scale *= (b - a)
    total = 0.0
    if cell.dim == 0:
        p = cell.point(np.zeros(0))
        return cell.sign * form(p)
    for combo in itertools.product(*(range(len(pts)) for _ in range(cell.dim))):
        q = np.array([grids[d][combo[d]] for d in range(cell.dim)])
        wq = np.prod([wts[c] for c in combo])
        jac = cell.jacobian(q)
        vecs = [jac[:, j] for j in range(cell.dim)]
        total += wq * form(cell.point(q), *vecs)
    return cell.sign * scale * total


def integrate(family, form, region=None, order=12, debug=False):
    """Weighted measure of a region against a top-degree form.

    region is None for the whole family or a dict from branch name to a list
    of reference sub-boxes. The combination rule divides by the effective
    symmetry order; per-branch raw integrals and a quadrature error estimate
    (difference against order-1 lower quadrature) are reported.
    """
    for b in family.branches:
        if b.dim != form.degree:
            raise ValueError(
                f"form degree {form.degree} does not match branch dimension {b.dim}")
        for cell in b.cells:
            if cell.sign not in (-1, 1):
                raise ValueError("branch cells must carry an orientation sign")
    per_branch = []
    total = 0.0
    low_total = 0.0
    for b in family.branches:
        raw = 0.0
        raw_low = 0.0
        boxes = None if region is None else region.get(b.name)
        if region is not None and boxes is None:
            per_branch.append((b.name, 0.0))
            continue
        for cell in b.cells:
            cell_boxes = [None] if boxes is None else boxes
            for box in cell_boxes:
                raw += _cell_integral(cell, form, order, box)
                raw_low += _cell_integral(cell, form, max(order - 1, 1), box)
        per_branch.append((b.name, raw))
        total += float(b.weight) * raw
        low_total += float(b.weight) * raw_low
    value = total / family.effective_order
    est_error = abs(total - low_total) / family.effective_order
    result = WeightedMeasureResult(value, order, per_branch, est_error)
    if debug:
        # linearity spot check: doubling the form doubles the measure
        doubled = integrate(family, _scaled_form(form, 2.0), region, order)
        assert abs(doubled.value - 2 * value) <= 1e-10 * (1 + abs(value))
    return result


def _scaled_form(form, c):
    if isinstance(form, PolynomialForm):
        terms = {idx: Polynomial(form.n_vars,
                                 {e: c * v for e, v in poly.terms.items()})
                 for idx, poly in form.terms.items()}
        return PolynomialForm(form.n_vars, form.degree, terms)
    return CallbackForm(form.n_vars, form.degree,
                        lambda x, *vs: c * form(x, *vs))


def integrate_boundary(family, form, region=None, order=12):
    """Same combination rule over the induced boundaries of all branch cells."""
    for b in family.branches:
        if b.dim != form.degree + 1:
            raise ValueError("boundary integration needs degree = dimension - 1")
    boundary_branches = []
    for b in family.branches:
        faces = []
        for cell in b.cells:
            if cell.dim == 0:
                continue
            faces.extend(cell.boundary_cells())
        if not faces:
            continue
        boundary_branches.append(Branch(faces, b.weight, name=b.name))
    if not boundary_branches:
        return WeightedMeasureResult(0.0, order, [], 0.0)
    bfam = BranchedFamily(boundary_branches, family.effective_order,
                          name=f"∂{family.name}")
    return integrate(bfam, form, region, order)


def stokes_residual(family, form, order=12):
    """|integral of d(form) - boundary integral of form| at the given order."""
    inner = integrate(family, exterior_derivative(form, fd_fallback=True),
                      order=order)
    outer = integrate_boundary(family, form, order=order)
    return abs(inner.value - outer.value)


# ---------------------------------------------------------------------------
# standard branch constructions


def disk_branch(radius=1.0, weight=Fraction(1), quadrants=4, name="disk"):
    """Unit disk as polar quadrant cells; internal radial faces cancel in
    boundary integrals."""
    cells = []
    for k in range(quadrants):
        a0, a1 = k / quadrants, (k + 1) / quadrants

        def chart(q, a0=a0, a1=a1):
            r = radius * q[0]
            th = 2 * np.pi * (a0 + (a1 - a0) * q[1])
            return np.array([r * np.cos(th), r * np.sin(th)])

        def jac(q, a0=a0, a1=a1):
            r = radius * q[0]
            th = 2 * np.pi * (a0 + (a1 - a0) * q[1])
            dth = 2 * np.pi * (a1 - a0)
            return np.array([
                [radius * np.cos(th), -r * dth * np.sin(th)],
                [radius * np.sin(th), r * dth * np.cos(th)],
            ])

        cells.append(Cell(2, chart, jac))
    return Branch(cells, weight, name=name,
                  membership=lambda y: np.linalg.norm(y) <= radius + MEMBERSHIP_TOL)


def half_disk_branch(sign, radius=1.0, weight=Fraction(1, 2), name=None):
    """Upper (+1) or lower (-1) half disk; the diameter face participates in
    boundary sums and cancels against the matching half."""
    def chart(q):
        r = radius * q[0]
        th = np.pi * q[1] if sign > 0 else np.pi + np.pi * q[1]
        return np.array([r * np.cos(th), r * np.sin(th)])

    def jac(q):
        r = radius * q[0]
        th = np.pi * q[1] if sign > 0 else np.pi + np.pi * q[1]
        return np.array([
            [radius * np.cos(th), -r * np.pi * np.sin(th)],
            [radius * np.sin(th), r * np.pi * np.cos(th)],
        ])

    side = "upper" if sign > 0 else "lower"
    return Branch([Cell(2, chart, jac)], weight, name=name or f"{side}-half")


def segment_branch(start, end, weight=Fraction(1), name="segment"):
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)

    def chart(q):
        return start + q[0] * (end - start)

    def jac(q):
        return (end - start)[:, None]

    return Branch([Cell(1, chart, jac)], weight, name=name)


def curve_branch(parametrize, lo, hi, weight=Fraction(1), name="curve"):
    """One-dimensional branch from a parametrization callable on [lo, hi]."""
    def chart(q):
        return np.asarray(parametrize(lo + q[0] * (hi - lo)), dtype=float)

    return Branch([Cell(1, chart, None)], weight, name=name)


def point_branch(point, weight=Fraction(1), sign=1, name="point"):
    point = np.asarray(point, dtype=float)
    return Branch([Cell(0, lambda q: point, None, (), sign)], weight, name=name)


# ---------------------------------------------------------------------------
# pairing against perturbed solution sets


@dataclass
class PairingReport:
    values: list
    spread: float
    dimension_matched: bool

    @property
    def value(self):
        return self.values[0] if self.values else 0.0

    @property
    def stable(self):
        return self.spread <= 1e-6


def de_rham_pairing(f, cp, form, trials=5, seed=0, epsilon=0.1,
                    effective_order=1, stability_tol=1e-6):
    """Integral of the form over perturbed weighted solution sets.

    Each trial draws a fresh transversal perturbation, builds branch
    structures from the solution set and integrates. A degree mismatch with
    the solution dimension returns exactly zero. The report carries all trial
    values; stability means the max pairwise deviation is at most the
    tolerance.
    """
    values = []
    matched = True
    for t in range(trials):
        tau = perturb_to_transversal(f, cp, epsilon, seed=seed + 17 * t)
        sols = solution_set(f, tau, seed=seed + 17 * t + 1)
        dims = {b.dimension for b in sols} or {0}
        if dims != {form.degree}:
            matched = False
            values.append(0.0)
            continue
        if form.degree == 0:
            # 0-forms pair with signed points branch by branch
            total = Fraction(0)
            for b in sols:
                for p in b.points:
                    mat = f.derivative_matrix(b.chart_id, p)
                    if b.branch_index >= 0:
                        sec = tau.branches[b.branch_index][0]
                        mat = mat - sec.derivative_matrix(b.chart_id, p)
                    det = np.linalg.det(mat) if mat.shape[0] == mat.shape[1] else 0.0
                    sign = 1 if det > 0 else (-1 if det < 0 else 0)
                    total += b.weight * sign * Fraction(form(p)).limit_denominator(10 ** 12)
            values.append(total)
        else:
            branches = []
            for b in sols:
                if b.parametrize is None or b.kernel_range is None:
                    continue
                lo, hi = b.kernel_range
                branches.append(curve_branch(
                    lambda k, b=b: b.parametrize(np.full(b.dimension, k)),
                    lo, hi, weight=b.weight, name=f"sol-{b.chart_id}-{b.branch_index}"))
            fam = BranchedFamily(branches, effective_order)
            values.append(integrate(fam, form, order=12).value)
    spread = 0.0
    for a in values:
        for b in values:
            spread = max(spread, abs(float(a) - float(b)))
    return PairingReport(values, spread, matched)


# ---------------------------------------------------------------------------
# serialization


def family_from_config(text_or_dict):
    """Load a branched family from structured text: polynomial chart maps,
    weights and orientation signs per branch."""
    from .errors import ConfigError

    if isinstance(text_or_dict, str):
        try:
            cfg = json.loads(text_or_dict)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    else:
        cfg = dict(text_or_dict)
    unknown = set(cfg) - {"schema", "effective_order", "branches"}
    if unknown:
        raise ConfigError(f"unknown family config keys: {sorted(unknown)}")
    branches = []
    for bspec in cfg.get("branches", []):
        extra = set(bspec) - {"name", "weight", "cells"}
        if extra:
            raise ConfigError(f"unknown branch keys: {sorted(extra)}")
        cells = []
        for cspec in bspec["cells"]:
            extra = set(cspec) - {"dim", "map", "sign", "bounds"}
            if extra:
                raise ConfigError(f"unknown cell keys: {sorted(extra)}")
            dim = int(cspec["dim"])
            polys = [Polynomial(dim, {tuple(map(int, k.split(","))): float(v)
                                      for k, v in comp.items()})
                     for comp in cspec["map"]]
            partials = [[p.partial(j) for j in range(dim)] for p in polys]

            def chart(q, polys=polys):
                return np.array([p(q) for p in polys])

            def jac(q, partials=partials):
                return np.array([[pj(q) for pj in row] for row in partials])

            cells.append(Cell(dim, chart, jac,
                              tuple(tuple(b) for b in cspec.get("bounds", [])) or None,
                              int(cspec.get("sign", 1))))
        branches.append(Branch(cells, Fraction(bspec["weight"]),
                               name=bspec.get("name", "branch")))
    return BranchedFamily(branches, cfg.get("effective_order"))


def form_from_config(text_or_dict):
    """Load a polynomial form from structured text coefficients.

    Schema: {"n_vars", "degree", "terms": {"i,j,...": {"e0,e1,...": coeff}}}
    where the outer keys are increasing coordinate index tuples and the inner
    keys are exponent tuples.
    """
    from .errors import ConfigError

    if isinstance(text_or_dict, str):
        try:
            cfg = json.loads(text_or_dict)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    else:
        cfg = dict(text_or_dict)
    unknown = set(cfg) - {"schema", "n_vars", "degree", "terms"}
    if unknown:
        raise ConfigError(f"unknown form config keys: {sorted(unknown)}")
    n = int(cfg["n_vars"])
    terms = {}
    for idx_key, poly_spec in cfg.get("terms", {}).items():
        idx = tuple(int(i) for i in idx_key.split(",")) if idx_key else ()
        poly = Polynomial(n, {tuple(int(e) for e in ek.split(",")): float(c)
                              for ek, c in poly_spec.items()})
        terms[idx] = poly
    return PolynomialForm(n, int(cfg["degree"]), terms)


def result_to_json(result):
    return json.dumps(
        {
            "value": result.value,
            "per_branch": [[n, v] for n, v in result.per_branch],
            "quadrature_order": result.quadrature_order,
            "est_error": result.est_error,
        },
        sort_keys=True,
    )
