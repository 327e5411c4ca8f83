"""Closure and exactness of forms, potentials, and restriction to pseudostructures."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import expr as ex
from .expr import simplify
from .forms import DifferentialForm, FormError, exterior_derivative, form_max_abs, form_witness, pullback
from .geometry import Chart, hodge_star

QUADRATURE_NODES = 16
QUADRATURE_TOL = 1e-6


class ClosureError(ValueError):
    pass


class NotClosedError(ClosureError):
    pass


class PotentialError(ClosureError):
    pass


class MissingParametrizationError(ClosureError):
    pass


class Pseudostructure:
    """Level set {c_i = 0} of a chart, optionally with an explicit parametrization.

    ``params``/``mapping`` describe x = mapping(u) from a parameter chart
    with coordinates ``params`` and sample box ``param_box``.  Locus
    extraction attaches a point cloud (``points``) instead.
    """

    def __init__(self, chart, constraints, params=None, mapping=None, param_box=None,
                 points=None, validate=True, trials=ex.DEFAULT_TRIALS, tol=1e-8, seed=ex.DEFAULT_SEED):
        self.chart = chart if isinstance(chart, Chart) else Chart(chart)
        coords = self.chart.coords
        self.constraints = tuple(simplify(ex.parse_expr(c, coords) if isinstance(c, str) else ex.as_expr(c))
                                 for c in constraints)
        self.params = None if params is None else tuple(params)
        self.mapping = None
        if mapping is not None:
            if self.params is None:
                raise ClosureError("a parametrization needs parameter names")
            if len(mapping) != self.chart.dim:
                raise ClosureError(f"parametrization must give {self.chart.dim} coordinates")
            self.mapping = tuple(simplify(ex.parse_expr(m, self.params) if isinstance(m, str) else ex.as_expr(m))
                                 for m in mapping)
            if len(self.params) != self.dim:
                raise ClosureError(f"expected {self.dim} parameters, got {len(self.params)}")
        self.param_box = None if self.params is None else [
            tuple(map(float, b)) for b in ex.normalize_box(self.params, param_box)]
        self.points = None if points is None else np.asarray(points, dtype=float)
        if validate:
            self.validate(trials, tol, seed)

    @property
    def dim(self):
        return self.chart.dim - len(self.constraints)

    @property
    def has_parametrization(self):
        return self.mapping is not None

    def __repr__(self):
        cons = ", ".join(str(c) for c in self.constraints)
        return f"Pseudostructure({{{cons}}} = 0, dim={self.dim})"

    def param_chart(self) -> Chart:
        if not self.has_parametrization:
            raise MissingParametrizationError("pseudostructure has no parametrization")
        return Chart(self.params, sample_box=self.param_box)

    def locus_points(self, count=16, seed=ex.DEFAULT_SEED):
        if self.has_parametrization:
            pts, vals = ex.sample_valid(list(self.mapping), self.params, count, seed, self.param_box)
            return vals.T
        if self.points is not None and len(self.points):
            idx = np.linspace(0, len(self.points) - 1, min(count, len(self.points))).astype(int)
            return self.points[idx]
        return np.zeros((0, self.chart.dim))

    def validate(self, trials=ex.DEFAULT_TRIALS, tol=1e-8, seed=ex.DEFAULT_SEED):
        if self.dim < 0:
            raise ClosureError("more constraints than coordinates")
        if self.has_parametrization and self.constraints:
            subs = dict(zip(self.chart.coords, self.mapping))
            on = [ex.substitute(c, subs) for c in self.constraints]
            if ex.max_abs([simplify(e) for e in on], self.params, trials, seed, self.param_box) > tol:
                raise ClosureError("parametrization does not lie on the constraint locus")
        if not self.constraints:
            return
        pts = self.locus_points(16, seed)
        if not len(pts):
            return
        grads = [[ex.differentiate(c, x) for x in self.chart.coords] for c in self.constraints]
        env = {x: pts[:, i] for i, x in enumerate(self.chart.coords)}
        flat = [g for row in grads for g in row]
        vals = ex.evaluate_many(flat, env).reshape(len(self.constraints), self.chart.dim, -1)
        for k in range(vals.shape[2]):
            J = vals[:, :, k]
            if not np.all(np.isfinite(J)):
                continue
            if np.linalg.det(J @ J.T) <= 1e-8:
                raise ClosureError("constraint gradients are dependent on the locus")

    def restrict(self, t: DifferentialForm) -> DifferentialForm:
        if not self.has_parametrization:
            raise MissingParametrizationError(
                "restriction needs a parametrized pseudostructure; parametrize the locus first")
        if t.coords != self.chart.coords:
            raise FormError("form and pseudostructure chart differ")
        pulled = pullback(self.mapping, t, self.params)
        return DifferentialForm(pulled.coords, pulled.degree,
                                {k: ex.collapse_constant(c, self.params, self.param_box)
                                 for k, c in pulled.items()})


@dataclass
class ClosureReport:
    classification: str
    witness: Any
    residuals: dict = field(default_factory=dict)

    CLASSES = ("exact", "closed_inexact", "closed_on_pseudostructure", "unclosed")

    def to_dict(self):
        from .io import form_to_doc
        w = self.witness
        if isinstance(w, DifferentialForm):
            w = {"potential": form_to_doc(w)}
        elif isinstance(w, Pseudostructure):
            w = {"pseudostructure": [str(c) for c in w.constraints]}
        return {"classification": self.classification, "witness": w, "residuals": self.residuals}


@dataclass
class DualCheckReport:
    closure_residual: float
    dual_residual: float
    tol: float
    restricted: DifferentialForm
    restricted_dual: DifferentialForm

    @property
    def closed(self):
        return self.closure_residual <= self.tol

    @property
    def dual_closed(self):
        return self.dual_residual <= self.tol

    @property
    def ok(self):
        return self.closed and self.dual_closed

    def to_dict(self):
        return {"closure_residual": self.closure_residual, "dual_residual": self.dual_residual,
                "closed": self.closed, "dual_closed": self.dual_closed, "tol": self.tol}


# ---------------------------------------------------------------------------


def closure_residual(t: DifferentialForm, trials=ex.DEFAULT_TRIALS, seed=ex.DEFAULT_SEED, box=None) -> float:
    return form_max_abs(exterior_derivative(t), trials, seed, box)


def is_closed(t: DifferentialForm, trials=ex.DEFAULT_TRIALS, tol=ex.DEFAULT_TOL, seed=ex.DEFAULT_SEED,
              box=None) -> bool:
    return closure_residual(t, trials, seed, box) <= tol


def homotopy_center(box):
    """Origin when the box contains it, otherwise the box center."""
    if all(lo <= 0.0 <= hi for lo, hi in box):
        return [Fraction(0)] * len(box)
    return [Fraction(0.5 * (lo + hi)) for lo, hi in box]


def _ray_integral(coef, p, coords, center):
    """int_0^1 s^(p-1) coef(center + s (x - center)) ds, exact for polynomials.

    Returns (expression, exact_flag).
    """
    shifted = {x: ex.add(ex.Sym(x), ex.Const(c)) for x, c in zip(coords, center) if c != 0}
    g = ex.substitute(coef, shifted) if shifted else coef
    poly = ex.as_polynomial(g, coords)
    rel = [ex.add(ex.Sym(x), ex.Const(-c)) if c != 0 else ex.Sym(x) for x, c in zip(coords, center)]
    if poly is not None:
        integrated = {k: ex._num_mul(v, Fraction(1, p + sum(k))) for k, v in poly.items()}
        return ex.from_polynomial(integrated, rel), True
    nodes, weights = np.polynomial.legendre.leggauss(QUADRATURE_NODES)
    s_nodes = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    terms = []
    for s, wk in zip(s_nodes, w):
        pt = {x: ex.add(ex.Const(float(c)), ex.mul(ex.Const(float(s)), r))
              for x, c, r in zip(coords, center, rel)}
        terms.append(ex.mul(ex.Const(float(wk * s ** (p - 1))), ex.substitute(coef, pt)))
    return ex.add(*terms), False


def find_potential(t: DifferentialForm, box=None, trials=ex.DEFAULT_TRIALS, tol=ex.DEFAULT_TOL,
                   seed=ex.DEFAULT_SEED, star_shaped=True, center=None) -> DifferentialForm:
    """Potential of a closed form by the radial homotopy operator.

    Polynomial coefficients are integrated exactly along rays from the
    center; other coefficients use 16-node Gauss-Legendre quadrature and
    must reproduce ``t`` to within 1e-6 at the sample points.
    """
    if t.degree == 0:
        raise PotentialError("a 0-form has no potential")
    box = ex.normalize_box(t.coords, box)
    if not star_shaped:
        raise PotentialError("chart is flagged as not star-shaped")
    res = closure_residual(t, trials, seed, box)
    if res > tol:
        raise NotClosedError(f"form is not closed (max |dθ| = {res:.3g})")
    if center is None:
        center = homotopy_center(box)
    center = [Fraction(c) if not isinstance(c, Fraction) else c for c in center]
    p = t.degree
    rel = [ex.add(ex.Sym(x), ex.Const(-c)) if c != 0 else ex.Sym(x) for x, c in zip(t.coords, center)]
    terms = {}
    all_exact = True
    for I, coef in t.items():
        integral, exact = _ray_integral(coef, p, t.coords, center)
        all_exact &= exact
        for k, i in enumerate(I):
            key = I[:k] + I[k + 1:]
            term = ex.mul(ex.Const((-1) ** k), rel[i], integral)
            terms[key] = ex.add(terms[key], term) if key in terms else term
    pot = DifferentialForm(t.coords, p - 1, terms)
    try:
        residual = form_max_abs(exterior_derivative(pot) - t, trials, seed, box)
    except ex.SamplingError as err:
        raise PotentialError(str(err)) from err
    limit = tol if all_exact else max(tol, QUADRATURE_TOL)
    if not residual <= limit:
        raise PotentialError(f"potential residual {residual:.3g} exceeds {limit:.3g}")
    return pot


def restrict_to_pseudostructure(t: DifferentialForm, ps: Pseudostructure) -> DifferentialForm:
    return ps.restrict(t)


def interior_differential(t: DifferentialForm, ps: Pseudostructure) -> DifferentialForm:
    """d_pi t: the differential of the restriction."""
    return exterior_derivative(ps.restrict(t))


def dual_form_check(ps: Pseudostructure, c: Chart, t: DifferentialForm, trials=ex.DEFAULT_TRIALS,
                    tol=ex.DEFAULT_TOL, seed=ex.DEFAULT_SEED) -> DualCheckReport:
    """Closure of t and of its Hodge dual, both restricted to ``ps``."""
    star = hodge_star(t, c)
    rt = ps.restrict(t)
    rs = ps.restrict(star)
    box = ps.param_box
    r1 = form_max_abs(exterior_derivative(rt), trials, seed, box)
    r2 = form_max_abs(exterior_derivative(rs), trials, seed, box)
    return DualCheckReport(r1, r2, tol, rt, rs)


def classify_form(t: DifferentialForm, ps: Pseudostructure | None = None, chart: Chart | None = None,
                  trials=ex.DEFAULT_TRIALS, tol=ex.DEFAULT_TOL, seed=ex.DEFAULT_SEED) -> ClosureReport:
    box = chart.sample_box if chart is not None else ex.normalize_box(t.coords, None)
    star = chart.star_shaped if chart is not None else True
    dt = exterior_derivative(t)
    res = form_max_abs(dt, trials, seed, box)
    residuals = {"closure": res}
    if res <= tol:
        try:
            pot = find_potential(t, box, trials, tol, seed, star_shaped=star)
        except (PotentialError, ex.SamplingError) as err:
            return ClosureReport("closed_inexact", {"reason": str(err)}, residuals)
        residuals["potential"] = form_max_abs(exterior_derivative(pot) - t, trials, seed, box)
        return ClosureReport("exact", pot, residuals)
    if ps is not None and ps.has_parametrization:
        r = form_max_abs(interior_differential(t, ps), trials, seed, ps.param_box)
        residuals["restricted_closure"] = r
        if r <= tol:
            return ClosureReport("closed_on_pseudostructure", ps, residuals)
    point, values = form_witness(dt, trials, seed, box)
    basis = {"∧".join("d" + t.coords[i] for i in k): v for k, v in values.items()}
    return ClosureReport("unclosed", {"point": point, "differential": basis}, residuals)
