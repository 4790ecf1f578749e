"""Strong bundles with bi-level filtration, multisections and transversal search.

Bundle elements carry a base level m and a fiber level k constrained by
k <= m+1; plain sections land at (m, m), one-level-up sections at (m, m+1) and
form the admissible class of perturbations. Multisection weights are exact
rationals end to end: convolution, norms and solution counts never leave
fractions. Compactness certification is sample-based and says so in its
report; perturbation directions are drawn from cokernel bases at failing
solutions rather than blind randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BiLevelError,
    ExhaustedAttemptsError,
    NotASolutionError,
    UnchartedPointError,
)
from .germs import germ_from_map, solve_germ
from .retracts import good_position_check
from .sc_core import (
    FiniteDimScale,
    LinearScOperator,
    PartialQuadrant,
    fredholm_split,
)

FIBER_MATCH_TOL = 1e-9
SURJECTIVITY_FLOOR = 1e-8


@dataclass
class BundleChart:
    """One chart of a strong bundle: a base domain with a fiber scale."""

    name: str
    domain: object  # ScDomain
    fiber: object   # ScScale; dimension zero is allowed

    @property
    def base_scale(self):
        return self.domain.scale

    def fiber_dim(self):
        return self.fiber.dim(0)


class StrongBundleModel:
    """Charted strong bundle with the double filtration 0 <= k <= m+1."""

    def __init__(self, charts, retraction=None, name="bundle"):
        self.charts = {c.name: c for c in charts}
        self.retraction = retraction
        self.name = name

    def chart(self, chart_id):
        if chart_id not in self.charts:
            raise UnchartedPointError(f"no chart named {chart_id!r}")
        return self.charts[chart_id]

    def element(self, chart_id, base, base_level, fiber, fiber_level):
        return BundleElement(self, chart_id, np.asarray(base, dtype=float),
                             base_level, np.asarray(fiber, dtype=float), fiber_level)


@dataclass
class BundleElement:
    model: StrongBundleModel
    chart_id: str
    base: np.ndarray
    base_level: int
    fiber: np.ndarray
    fiber_level: int

    def __post_init__(self):
        if not (0 <= self.fiber_level <= self.base_level + 1):
            raise BiLevelError(
                f"fiber level {self.fiber_level} violates k <= m+1 with "
                f"base level {self.base_level}"
            )
        chart = self.model.chart(self.chart_id)
        if not chart.domain.contains(self.base, 0):
            raise UnchartedPointError("base point outside the chart domain")


class BundleSection:
    """Base-to-fiber evaluator with a declared class tag.

    tag "sc" maps level m to bi-level (m, m); tag "sc_plus" to (m, m+1).
    """

    def __init__(self, model, fn, tag="sc", dfn=None, name="section",
                 support=None):
        if tag not in ("sc", "sc_plus"):
            raise ValueError(f"unknown section tag {tag!r}")
        self.model = model
        self.fn = fn
        self.tag = tag
        self.dfn = dfn
        self.name = name
        self.support = support  # optional membership predicate per chart

    def __call__(self, chart_id, base):
        return np.asarray(self.fn(chart_id, np.asarray(base, dtype=float)), dtype=float)

    def derivative_matrix(self, chart_id, base, step=1e-6):
        base = np.asarray(base, dtype=float)
        chart = self.model.chart(chart_id)
        out_dim = chart.fiber_dim()
        if self.dfn is not None:
            cols = [self.dfn(chart_id, base, e) for e in np.eye(base.size)]
            return np.array(cols, dtype=float).T.reshape(out_dim, base.size)
        jac = np.zeros((out_dim, base.size))
        for j in range(base.size):
            e = np.zeros(base.size)
            e[j] = step
            jac[:, j] = (self(chart_id, base + e) - self(chart_id, base - e)) / (2 * step)
        return jac

    def element(self, chart_id, base, base_level):
        k = base_level + (1 if self.tag == "sc_plus" else 0)
        return self.model.element(chart_id, base, base_level,
                                  self(chart_id, base), k)


def zero_section(model, tag="sc_plus", name="zero"):
    return BundleSection(
        model, lambda cid, x: np.zeros(model.chart(cid).fiber_dim()),
        tag=tag, dfn=lambda cid, x, h: np.zeros(model.chart(cid).fiber_dim()),
        name=name)


@dataclass
class BiLevelReport:
    rows: list  # (chart_id, base_level, fiber_diag, required, ok)

    @property
    def passed(self):
        return all(r[-1] for r in self.rows)

    def violations(self):
        return [r for r in self.rows if not r[-1]]


def bilevel_check(section, samples):
    """Verify the declared class tag on samples (chart_id, base, base_level).

    The fiber regularity is estimated with the fiber scale's diagnostic; plain
    sections need fiber level m, one-level-up sections need m+1.
    """
    rows = []
    for chart_id, base, m in samples:
        chart = section.model.chart(chart_id)
        v = section(chart_id, base)
        required = m + 1 if section.tag == "sc_plus" else m
        cap = min(m + 1, chart.fiber.max_level)
        diag = chart.fiber.regularity_level(v, cap=cap)
        ok = diag >= min(required, cap)
        rows.append((chart_id, m, diag, required, ok))
    return BiLevelReport(rows)


@dataclass
class RegularizingReport:
    rows: list  # (chart_id, base_level m, fiber_diag, base_diag, ok)
    counterexamples: list

    @property
    def passed(self):
        return not self.counterexamples


def regularizing_check(section, samples):
    """Whenever the section value is admissible one level up, the base point
    must already carry that extra level; counterexamples are reported."""
    rows = []
    bad = []
    for chart_id, base, m in samples:
        chart = section.model.chart(chart_id)
        v = section(chart_id, base)
        cap_f = min(m + 1, chart.fiber.max_level)
        fiber_diag = chart.fiber.regularity_level(v, cap=cap_f)
        cap_b = min(m + 1, chart.base_scale.max_level)
        base_diag = chart.base_scale.regularity_level(base, cap=cap_b)
        if fiber_diag >= m + 1 and cap_f >= m + 1:
            ok = base_diag >= min(m + 1, cap_b)
        else:
            ok = True  # hypothesis not triggered
        rows.append((chart_id, m, fiber_diag, base_diag, ok))
        if not ok:
            bad.append((chart_id, m, fiber_diag, base_diag))
    return RegularizingReport(rows, bad)


class AuxiliaryNorm:
    """Fiber-wise norm on the (0, 1) part of the bundle."""

    def __init__(self, model, norm_fn=None):
        self.model = model
        self.norm_fn = norm_fn

    def __call__(self, chart_id, fiber_coeffs):
        if self.norm_fn is not None:
            return float(self.norm_fn(chart_id, np.asarray(fiber_coeffs, dtype=float)))
        fiber = self.model.chart(chart_id).fiber
        level = min(1, fiber.max_level)
        return fiber.norm(fiber_coeffs, level)

    def verify_axioms(self, chart_id, sample_count=64, seed=0, tol=1e-10):
        """Positive homogeneity and triangle inequality on sampled fiber pairs."""
        rng = np.random.default_rng(seed)
        d = self.model.chart(chart_id).fiber_dim()
        for _ in range(sample_count):
            a = rng.standard_normal(d)
            b = rng.standard_normal(d)
            t = abs(rng.standard_normal())
            if abs(self(chart_id, t * a) - t * self(chart_id, a)) > tol * (1 + self(chart_id, a)):
                return False
            if self(chart_id, a + b) > self(chart_id, a) + self(chart_id, b) + tol:
                return False
        return True


# ---------------------------------------------------------------------------
# multisections


class Multisection:
    """Finite weighted family of one-level-up sections per chart.

    Weights are exact rationals summing to one; evaluation adds the weights of
    branches passing through a bundle element within the fiber tolerance.
    """

    def __init__(self, model, branches, name="multisection", symmetry=None):
        self.model = model
        self.name = name
        self.symmetry = symmetry
        self.branches = []
        total = Fraction(0)
        for section, weight in branches:
            w = Fraction(weight)
            if w <= 0:
                raise ValueError("weights must be positive rationals")
            if section.tag != "sc_plus":
                raise ValueError("multisection branches must be one-level-up sections")
            self.branches.append((section, w))
            total += w
        if total != 1:
            raise ValueError(f"weights must sum to one exactly, got {total}")

    @classmethod
    def zero(cls, model):
        return cls(model, [(zero_section(model), Fraction(1))], name="zero")

    def is_zero(self):
        return all(s.name == "zero" for s, _ in self.branches)

    def eval(self, element):
        """Total weight of branches through the element; empty sum is zero."""
        chart = self.model.chart(element.chart_id)
        total = Fraction(0)
        for section, w in self.branches:
            v = section(element.chart_id, element.base)
            if chart.fiber_dim() == 0 or chart.fiber.norm(v - element.fiber, 0) <= FIBER_MATCH_TOL:
                total += w
        return total

    def norm(self, aux_norm, chart_id, base, debug=False):
        """Max of the auxiliary norm over branch values at the point."""
        vals = [aux_norm(chart_id, s(chart_id, base)) for s, _ in self.branches]
        out = max(vals) if vals else 0.0
        if debug:
            assert out >= 0.0
        return out

    def support_inside(self, region, sample_points):
        """True when every branch vanishes at the sampled points outside the region."""
        for chart_id, x in sample_points:
            if region.contains(chart_id, x):
                continue
            for s, _ in self.branches:
                v = s(chart_id, x)
                if np.linalg.norm(v) > FIBER_MATCH_TOL:
                    return False
        return True

    def verify_equivariance(self, samples):
        """Functoriality surrogate: the value is constant along supplied
        morphism orbits (pairs of equivalent elements)."""
        if self.symmetry is None:
            return True
        for e1, e2 in samples:
            if self.eval(e1) != self.eval(e2):
                return False
        return True

    def describe(self):
        """Structured text form: branch kind, parameters and rational weight."""
        import json

        rows = []
        for section, w in self.branches:
            kind = getattr(section, "serial_kind", None)
            params = getattr(section, "serial_params", None)
            rows.append({
                "kind": kind or "opaque",
                "name": section.name,
                "params": params,
                "weight": str(w),
            })
        return json.dumps({"schema": "multisection/1", "branches": rows},
                          sort_keys=True, indent=2) + "\n"


def constant_branch_section(model, value, name=None):
    """One-level-up section with a constant fiber value; serializable."""
    v = np.atleast_1d(np.asarray(value, dtype=float))
    sec = BundleSection(
        model, lambda cid, x: v.copy(), tag="sc_plus",
        dfn=lambda cid, x, h: np.zeros_like(v),
        name=name or f"const{v.tolist()}")
    sec.serial_kind = "constant"
    sec.serial_params = {"value": v.tolist()}
    return sec


def multisection_from_config(model, text_or_dict):
    """Load a multisection of constant and zero branches from structured text."""
    import json

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
    unknown = set(cfg) - {"schema", "branches"}
    if unknown:
        raise ConfigError(f"unknown multisection keys: {sorted(unknown)}")
    branches = []
    for row in cfg.get("branches", []):
        extra = set(row) - {"kind", "name", "params", "weight"}
        if extra:
            raise ConfigError(f"unknown branch keys: {sorted(extra)}")
        kind = row.get("kind")
        if kind == "constant":
            sec = constant_branch_section(model, row["params"]["value"],
                                          name=row.get("name"))
        elif kind == "zero":
            sec = zero_section(model)
        else:
            raise ConfigError(f"unknown branch kind {kind!r}")
        branches.append((sec, Fraction(row["weight"])))
    return Multisection(model, branches)


def multisection_eval(l, element):
    """Total weight of branches passing through the element."""
    return l.eval(element)


def multisection_sum(l1, l2, merge_samples=None, tol=FIBER_MATCH_TOL):
    """Convolution sum: branch sums with multiplied weights, coinciding
    branches merged by pointwise comparison on a fixed sample set."""
    if l1.model is not l2.model:
        raise ValueError("multisections live on different bundle models")
    model = l1.model
    if merge_samples is None:
        merge_samples = []
        for cid, chart in model.charts.items():
            center = chart.domain.center
            d = center.size
            rng = np.random.default_rng(7)
            for _ in range(5):
                merge_samples.append((cid, center + 0.3 * rng.standard_normal(d)))

    new = []
    for s1, w1 in l1.branches:
        for s2, w2 in l2.branches:
            def summed(cid, x, a=s1, b=s2):
                return a(cid, x) + b(cid, x)

            sec = BundleSection(model, summed, tag="sc_plus",
                                name=f"{s1.name}+{s2.name}")
            new.append((sec, w1 * w2))

    merged = []
    for sec, w in new:
        hit = None
        for i, (other, _) in enumerate(merged):
            same = True
            for cid, x in merge_samples:
                if np.linalg.norm(sec(cid, x) - other(cid, x)) > tol:
                    same = False
                    break
            if same:
                hit = i
                break
        if hit is None:
            merged.append((sec, w))
        else:
            merged[hit] = (merged[hit][0], merged[hit][1] + w)
    return Multisection(model, merged, name=f"{l1.name}⊕{l2.name}")


def multisection_norm(l, aux_norm, chart_id, base, debug=False):
    return l.norm(aux_norm, chart_id, base, debug=debug)


# ---------------------------------------------------------------------------
# compactness control


@dataclass
class ControlRegion:
    balls: dict  # chart_id -> list of (center, radius)

    def contains(self, chart_id, x, slack=0.0):
        x = np.asarray(x, dtype=float)
        for center, radius in self.balls.get(chart_id, []):
            if np.linalg.norm(x - center) <= radius + slack:
                return True
        return False

    def interior_margin(self, chart_id, x):
        x = np.asarray(x, dtype=float)
        best = -np.inf
        for center, radius in self.balls.get(chart_id, []):
            best = max(best, radius - np.linalg.norm(x - center))
        return best


@dataclass
class ControlPair:
    region: ControlRegion
    aux_norm: AuxiliaryNorm
    report: dict

    @property
    def certified(self):
        return self.report.get("certified", False)


def control_pair_build(f, aux_norm, margin=0.5, seeds_per_chart=24, seed=0,
                       sublevel_samples=200, boundary_fraction=0.9):
    """Neighborhood of the sampled zero set certified by sublevel sampling.

    Zeros are found per chart by the germ corrector from seeded starts; the
    region is the union of balls of the given margin around them. The
    certificate checks, on samples, that the unit sublevel set of the
    auxiliary norm of the section inside the closed region stays at positive
    distance from the region boundary. Zeros found at the chart edge mean the
    zero set escapes the window and certification fails. The certificate is a
    sampling surrogate and records its seeds.
    """
    model = f.model
    rng = np.random.default_rng(seed)
    balls = {}
    escaped = []
    for cid, chart in model.charts.items():
        d = chart.domain.center.size
        radius = chart.domain.radii[0] if chart.domain.radii else 1.0
        found = []
        if chart.fiber_dim() == 0:
            found.append(chart.domain.center.copy())
        else:
            for _ in range(seeds_per_chart):
                x0 = chart.domain.center + radius * rng.uniform(-1, 1, d)
                x_sol = _corrector_solve(f, cid, x0)
                if x_sol is None:
                    continue
                if not chart.domain.contains(x_sol, 0):
                    continue
                if any(np.linalg.norm(x_sol - y) < 1e-5 for y in found):
                    continue
                found.append(x_sol)
        for x_sol in found:
            if np.linalg.norm(x_sol - chart.domain.center) > boundary_fraction * radius:
                escaped.append((cid, x_sol))
            balls.setdefault(cid, []).append((x_sol, margin))
    region = ControlRegion(balls)
    stray = []
    for cid, blist in balls.items():
        chart = model.charts[cid]
        if chart.fiber_dim() == 0:
            continue
        for center, radius in blist:
            for _ in range(sublevel_samples // max(len(blist), 1)):
                x = center + radius * rng.uniform(-1, 1, center.size)
                if aux_norm(cid, f(cid, x)) <= 1.0:
                    if region.interior_margin(cid, x) <= 1e-9:
                        stray.append((cid, x))
    certified = not escaped and not stray
    report = {
        "certified": certified,
        "escaped_zeros": escaped,
        "stray_sublevel_points": stray,
        "seed": seed,
        "surrogate": "sample-based sublevel certification",
    }
    return ControlPair(region, aux_norm, report)


def _gauss_newton(fn, x0, out_dim, tol=1e-11, max_iter=80):
    """Damped Gauss-Newton presolve; refreshes the frame every step so even
    degenerate roots are approached geometrically."""
    x = np.asarray(x0, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(max_iter):
            val = np.atleast_1d(fn(x))
            res = np.linalg.norm(val)
            if res <= tol:
                return x
            jac = np.zeros((out_dim, x.size))
            h = 1e-7 * (1.0 + np.linalg.norm(x))
            for j in range(x.size):
                e = np.zeros(x.size)
                e[j] = h
                jac[:, j] = (np.atleast_1d(fn(x + e)) - np.atleast_1d(fn(x - e))) / (2 * h)
            step = np.linalg.pinv(jac, rcond=1e-12) @ val
            cap = 10.0 * (1.0 + np.linalg.norm(x))
            sn = np.linalg.norm(step)
            if sn > cap:
                step *= cap / sn
            t = 1.0
            for _ in range(12):
                cand = x - t * step
                if np.linalg.norm(np.atleast_1d(fn(cand))) < res:
                    x = cand
                    break
                t *= 0.5
            else:
                return x
    return x


def _corrector_solve(f, chart_id, x0, tol=1e-11, accept_tol=1e-8):
    """Zero of the section from a seeded start: Gauss-Newton presolve followed
    by a polish pass through the germ normal form."""
    chart = f.model.chart(chart_id)
    out_dim = chart.fiber_dim()
    fn = lambda z: f(chart_id, z)
    x = _gauss_newton(fn, x0, out_dim, tol=tol)
    pg = germ_from_map(fn, x, out_dim)
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            w, _ = solve_germ(pg.germ, np.zeros(pg.germ.base_dim), 0,
                              tol=tol, max_iter=200)
        x = pg.ambient(np.zeros(pg.germ.base_dim), w)
    except Exception:
        pass
    return x if np.linalg.norm(fn(x)) <= accept_tol else None


# ---------------------------------------------------------------------------
# solution sets


@dataclass
class SolutionBranch:
    chart_id: str
    branch_index: int
    weight: Fraction
    points: list
    dimension: int
    parametrize: object = None  # callable kernel coords -> base point
    kernel_range: tuple = None


def solution_set(f, l, seeds_per_chart=40, seed=0, tol=1e-11,
                 curve_samples=33, patch_radius=None):
    """Weighted solution samples of the multisection equation per branch.

    Each active branch solves f(x) = s_i(x) through the germ corrector from
    seeded starts; zero-dimensional solutions are deduplicated, positive-index
    solutions get a kernel parametrization. Charts with zero-dimensional fiber
    contribute their whole sampled region at the branch weight.
    """
    model = f.model
    rng = np.random.default_rng(seed)
    out = []
    for cid, chart in model.charts.items():
        d = chart.domain.center.size
        radius = chart.domain.radii[0] if chart.domain.radii else 1.0
        if chart.fiber_dim() == 0:
            # empty fiber: the whole sampled chart region solves the equation
            if d == 1:
                offs = np.linspace(-0.9, 0.9, curve_samples)[:, None]
            else:
                offs = rng.uniform(-0.9, 0.9, size=(curve_samples, d))
            pts = [chart.domain.center + radius * o for o in offs]
            pts = [p for p in pts if chart.domain.contains(p, 0)]
            out.append(SolutionBranch(cid, -1, Fraction(1), pts, d,
                                      parametrize=None))
            continue
        for bi, (section, w) in enumerate(l.branches):
            def diff(x, s=section):
                return f(cid, x) - s(cid, x)

            sols = []
            for _ in range(seeds_per_chart):
                x0 = chart.domain.center + radius * rng.uniform(-1, 1, d)
                x_sol = _branch_solve(diff, x0, chart.fiber_dim(), tol)
                if x_sol is None or not chart.domain.contains(x_sol, 0):
                    continue
                if any(np.linalg.norm(x_sol - y) < 1e-5 for y in sols):
                    continue
                sols.append(x_sol)
            if not sols:
                continue
            index = d - chart.fiber_dim()
            if index <= 0:
                out.append(SolutionBranch(cid, bi, w, sorted(sols, key=tuple), 0))
            else:
                pr = patch_radius if patch_radius is not None else 0.8 * radius
                for x_sol in _cluster_representatives(sols, 2 * pr):
                    pg = germ_from_map(diff, x_sol, chart.fiber_dim(),
                                       radius=max(4.0 * pr, 4.0))

                    def parametrize(kappa, pg=pg):
                        kappa = np.atleast_1d(kappa)
                        wfix, _ = solve_germ(pg.germ, kappa, 0, tol=tol,
                                             max_iter=300)
                        return pg.ambient(kappa, wfix)

                    kgrid = np.linspace(-pr, pr, curve_samples)
                    pts = []
                    valid = []
                    for kap in kgrid:
                        try:
                            with np.errstate(over="ignore", invalid="ignore"):
                                p = parametrize(np.full(index, kap))
                        except Exception:
                            continue
                        if chart.domain.contains(p, 0):
                            pts.append(p)
                            valid.append(kap)
                    krange = (min(valid), max(valid)) if valid else None
                    if not pts:
                        # degenerate curve: keep the corrector's raw point so
                        # transversality still inspects it
                        pts = [x_sol]
                        parametrize = None
                    out.append(SolutionBranch(cid, bi, w, pts, index,
                                              parametrize=parametrize,
                                              kernel_range=krange))
    return out


def _branch_solve(diff, x0, out_dim, tol, accept_tol=1e-8):
    x = _gauss_newton(diff, x0, out_dim, tol=tol)
    pg = germ_from_map(diff, x, out_dim)
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            w, _ = solve_germ(pg.germ, np.zeros(pg.germ.base_dim), 0, tol=tol,
                              max_iter=300)
        x = pg.ambient(np.zeros(pg.germ.base_dim), w)
    except Exception:
        pass
    return x if np.linalg.norm(diff(x)) <= accept_tol else None


def _cluster_representatives(points, min_distance):
    reps = []
    for p in sorted(points, key=tuple):
        if all(np.linalg.norm(p - r) >= min_distance for r in reps):
            reps.append(p)
    return reps or points[:1]


# ---------------------------------------------------------------------------
# linearizations and transversality


@dataclass
class LinearizationSet:
    chart_id: str
    point: np.ndarray
    operators: list  # (branch_index, weight, matrix, ScFredholmData)

    def min_surjectivity(self):
        vals = []
        for _, _, mat, _ in self.operators:
            if mat.shape[0] == 0:
                vals.append(np.inf)
                continue
            sv = np.linalg.svd(mat, compute_uv=False)
            vals.append(float(sv[mat.shape[0] - 1]) if sv.size >= mat.shape[0] else 0.0)
        return min(vals) if vals else np.inf


def linearization_set(f, l, chart_id, x, alternative=None, match_tol=1e-10):
    """Operators (f - s_i)'(x) over the active branches at a solution.

    When an alternative local section structure is supplied the two operator
    sets must coincide up to permutation within the match tolerance.
    """
    chart = f.model.chart(chart_id)
    x = np.asarray(x, dtype=float)
    fx = f(chart_id, x)
    elem = f.model.element(chart_id, x, chart.base_scale.max_level, fx,
                           chart.base_scale.max_level)
    if l.eval(elem) <= 0:
        raise NotASolutionError("the multisection vanishes on the section value here")
    ops = []
    for bi, (section, w) in enumerate(l.branches):
        v = section(chart_id, x)
        if chart.fiber_dim() and chart.fiber.norm(v - fx, 0) > FIBER_MATCH_TOL:
            continue
        mat = f.derivative_matrix(chart_id, x) - section.derivative_matrix(chart_id, x)
        op = LinearScOperator(FiniteDimScale(x.size), FiniteDimScale(mat.shape[0]),
                              matrix=mat)
        ops.append((bi, w, mat, fredholm_split(op)))
    result = LinearizationSet(chart_id, x, ops)
    if alternative is not None:
        other = linearization_set(f, alternative, chart_id, x)
        if not _operator_sets_match(result, other, match_tol):
            raise ValueError(
                "linearization set depends on the local section structure"
            )
    return result


def _operator_sets_match(a, b, tol):
    if len(a.operators) != len(b.operators):
        return False
    used = set()
    for _, _, mat_a, _ in a.operators:
        hit = None
        for j, (_, _, mat_b, _) in enumerate(b.operators):
            if j in used:
                continue
            if mat_a.shape == mat_b.shape and np.max(np.abs(mat_a - mat_b)) <= tol:
                hit = j
                break
        if hit is None:
            return False
        used.add(hit)
    return True


@dataclass
class TransversalReport:
    rows: list  # (chart_id, point, branch, min_singular, good_position_ok)
    failures: list

    @property
    def passed(self):
        return not self.failures


def transversal_check(f, l, branches, boundary=False, position_constant=0.5,
                      floor=SURJECTIVITY_FLOOR):
    """Surjectivity of every linearization at every sampled solution; with
    boundary also good position of the kernels against the active tangent
    quadrant.

    floor is the surjectivity threshold on the smallest singular value;
    searches that must treat nearly-degenerate points as failures pass a
    stricter value (solutions are only resolved to the square root of the
    solver tolerance at degenerate roots).
    """
    rows = []
    failures = []
    for branch in branches:
        chart = f.model.chart(branch.chart_id)
        if chart.fiber_dim() == 0:
            for p in branch.points:
                rows.append((branch.chart_id, p, branch.branch_index, np.inf, True))
            continue
        for p in branch.points:
            try:
                lset = linearization_set(f, l, branch.chart_id, p)
            except NotASolutionError:
                failures.append((branch.chart_id, p, branch.branch_index,
                                 "not-a-solution"))
                continue
            sv = lset.min_surjectivity()
            ok = sv > floor
            gp_ok = True
            if ok and boundary:
                gp_ok = _kernels_in_good_position(chart, lset, p,
                                                  position_constant)
            rows.append((branch.chart_id, p, branch.branch_index, sv, gp_ok))
            if not ok:
                failures.append((branch.chart_id, p, branch.branch_index,
                                 f"min singular value {sv:g}"))
            elif not gp_ok:
                failures.append((branch.chart_id, p, branch.branch_index,
                                 "good-position failure"))
    return TransversalReport(rows, failures)


def _kernels_in_good_position(chart, lset, point, c):
    qidx = chart.domain.quadrant.quadrant_indices
    active = tuple(i for i in qidx if abs(point[i]) <= 1e-9)
    tangent_quadrant = PartialQuadrant(FiniteDimScale(point.size), active)
    for _, _, mat, data in lset.operators:
        kernel = data.kernel
        if kernel.shape[1] == 0:
            continue
        comp = data.complement if data.complement.size else np.zeros((point.size, 0))
        rep = good_position_check(kernel, tangent_quadrant, comp, c,
                                  sample_count=200, seed=1)
        if not rep.passed:
            return False
    return True


# ---------------------------------------------------------------------------
# transversal perturbation search


def _bump_profile(center, radius):
    center = np.asarray(center, dtype=float)

    def chi(x):
        t = np.linalg.norm(np.asarray(x, dtype=float) - center) / radius
        if t >= 1.0:
            return 0.0
        return float(np.exp(1.0 - 1.0 / (1.0 - t * t)))

    return chi


def perturb_to_transversal(f, cp, epsilon, seed=0, max_attempts=20,
                           solver_seeds=40, suspect_floor=1e-4):
    """One-level-up multisection below the norm budget, supported in the
    certified region, making every linearization at the perturbed solution set
    surjective.

    Directions come from cokernel bases of the failing linearizations, bump
    localized in the control region and rescaled under the budget; the search
    is deterministic given the seed. Internally a stricter suspect floor marks
    nearly-degenerate solutions as failing, since degenerate roots are only
    resolved to the square root of the solver tolerance.
    """
    if not (0 < epsilon < 1):
        raise ValueError("the norm budget must lie in (0, 1)")
    if not cp.certified:
        raise ValueError("control pair is not certified")
    model = f.model
    zero = Multisection.zero(model)
    sols = solution_set(f, zero, seeds_per_chart=solver_seeds, seed=seed)
    report = transversal_check(f, zero, sols, floor=suspect_floor)
    if report.passed:
        return zero
    rng = np.random.default_rng(seed)
    worst = report
    for attempt in range(max_attempts):
        offsets = {}
        for cid, chart in model.charts.items():
            if chart.fiber_dim() == 0:
                continue
            directions = []
            for chart_id2, p, bi, why in worst.failures:
                if chart_id2 != cid:
                    continue
                mat = f.derivative_matrix(cid, np.asarray(p))
                op = LinearScOperator(FiniteDimScale(mat.shape[1]),
                                      FiniteDimScale(mat.shape[0]), matrix=mat)
                data = fredholm_split(op)
                coker = data.cokernel
                if coker.shape[1] == 0:
                    coker = np.eye(mat.shape[0])
                directions.append((np.asarray(p), coker))
            if not directions:
                continue
            p0, coker = directions[0]
            coeff = rng.uniform(0.3, 1.0, coker.shape[1]) * rng.choice([-1.0, 1.0])
            vec = coker @ coeff
            balls = cp.region.balls.get(cid, [])
            if balls:
                center, radius = min(
                    balls, key=lambda b: np.linalg.norm(b[0] - p0))
            else:
                center, radius = p0, 1.0
            chi = _bump_profile(center, radius)
            raw_norm = cp.aux_norm(cid, vec)
            scale = 0.5 * epsilon / max(raw_norm, 1e-30)
            offsets[cid] = (chi, scale * vec)
        if not offsets:
            raise ExhaustedAttemptsError("no cokernel directions available",
                                         report=worst)

        def pert_fn(cid, x, offsets=offsets):
            d = f.model.chart(cid).fiber_dim()
            if cid not in offsets:
                return np.zeros(d)
            chi, vec = offsets[cid]
            return chi(x) * vec

        branch = BundleSection(model, pert_fn, tag="sc_plus",
                               name=f"cokernel-shift-{attempt}")
        tau = Multisection(model, [(branch, Fraction(1))],
                           name=f"transversal-{attempt}")
        sols = solution_set(f, tau, seeds_per_chart=solver_seeds,
                            seed=seed + attempt + 1)
        rep = transversal_check(f, tau, sols, floor=suspect_floor)
        if rep.passed and _norm_and_support_ok(tau, cp, sols, epsilon):
            return tau
        worst = rep if rep.failures else worst
    raise ExhaustedAttemptsError(
        f"no transversal perturbation within {max_attempts} attempts",
        report=worst)


def _norm_and_support_ok(tau, cp, branches, epsilon):
    for branch in branches:
        for p in branch.points:
            if tau.norm(cp.aux_norm, branch.chart_id, p) >= epsilon:
                return False
    outside = []
    rng = np.random.default_rng(123)
    for cid, chart in tau.model.charts.items():
        d = chart.domain.center.size
        radius = (chart.domain.radii[0] if chart.domain.radii else 1.0)
        for _ in range(20):
            x = chart.domain.center + 2.0 * radius * rng.uniform(-1, 1, d)
            if not cp.region.contains(cid, x):
                outside.append((cid, x))
    return tau.support_inside(cp.region, outside)


# ---------------------------------------------------------------------------
# weighted counts and cobordism comparison


def weighted_count(f, branches, multisection=None):
    """Signed weighted count over zero-dimensional solution branches.

    The sign is the orientation of the linearization of f minus the active
    branch section, in the standard frames; weights stay rational so the
    count is exact.
    """
    total = Fraction(0)
    for branch in branches:
        if branch.dimension != 0:
            raise ValueError("weighted counts need index-zero branches")
        for p in branch.points:
            mat = f.derivative_matrix(branch.chart_id, p)
            if multisection is not None and branch.branch_index >= 0:
                section = multisection.branches[branch.branch_index][0]
                mat = mat - section.derivative_matrix(branch.chart_id, p)
            det = np.linalg.det(mat) if mat.shape[0] == mat.shape[1] else 0.0
            sign = 1 if det > 0 else (-1 if det < 0 else 0)
            total += branch.weight * sign
    return total


@dataclass
class CobordismReport:
    count0: Fraction | None
    count1: Fraction | None
    family_failures: list
    checks: dict

    @property
    def passed(self):
        return all(self.checks.values())


def cobordism_compare(f, tau0, tau1, cp, t_samples=(0.0, 0.25, 0.5, 0.75, 1.0),
                      seed=0, solver_seeds=40):
    """Interpolating family between two admissible perturbations with weighted
    counts compared at the endpoints.

    The family uses convex branch interpolation over all branch pairs, whose
    weights stay exactly rational. Family transversality is sampled in t; the
    endpoint comparison is exact for index zero.
    """
    aux = cp.aux_norm
    for tau in (tau0, tau1):
        sols = solution_set(f, tau, seeds_per_chart=solver_seeds, seed=seed)
        for branch in sols:
            for p in branch.points:
                if tau.norm(aux, branch.chart_id, p) >= 1.0:
                    raise ValueError("perturbation norm violates the budget")
        if not _norm_and_support_ok(tau, cp, sols, 1.0):
            raise ValueError("perturbation support leaves the certified region")
        rep = transversal_check(f, tau, sols)
        if not rep.passed:
            raise ValueError("endpoint pair is not transversal")

    model = f.model
    family_failures = []
    for t in t_samples:
        branches = []
        for s0, w0 in tau0.branches:
            for s1, w1 in tau1.branches:
                def interp(cid, x, a=s0, b=s1, tt=t):
                    return (1 - tt) * a(cid, x) + tt * b(cid, x)

                sec = BundleSection(model, interp, tag="sc_plus",
                                    name=f"interp-{t}")
                branches.append((sec, w0 * w1))
        tau_t = Multisection(model, branches, name=f"family-{t}")
        sols_t = solution_set(f, tau_t, seeds_per_chart=solver_seeds,
                              seed=seed + int(100 * t))
        rep = transversal_check(f, tau_t, sols_t)
        if not rep.passed:
            family_failures.append((t, rep.failures))

    sols0 = solution_set(f, tau0, seeds_per_chart=solver_seeds, seed=seed)
    sols1 = solution_set(f, tau1, seeds_per_chart=solver_seeds, seed=seed + 1)
    # counts apply when every branch is index zero; an empty solution set
    # counts as zero by the empty-sum convention
    count0 = count1 = None
    if all(b.dimension == 0 for b in sols0):
        count0 = weighted_count(f, [b for b in sols0 if b.dimension == 0], tau0)
    if all(b.dimension == 0 for b in sols1):
        count1 = weighted_count(f, [b for b in sols1 if b.dimension == 0], tau1)
    checks = {
        "family_transversal": not family_failures,
        "counts_equal": (count0 == count1) if (count0 is not None and count1 is not None) else True,
    }
    return CobordismReport(count0, count1, family_failures, checks)
