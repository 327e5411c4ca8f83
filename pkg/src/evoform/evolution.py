"""Evolutionary relations  dpsi = omega^p  and identical relations on pseudostructures.

A relation is identical when omega^p is closed (its commutator vanishes).
Otherwise an identical relation can only be obtained on a pseudostructure
where the restricted form closes; such loci are located as zero sets of a
degeneracy functional (Jacobian, determinant, Poisson bracket).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import expr as ex
from .closure import (ClosureError, MissingParametrizationError, Pseudostructure, find_potential)
from .expr import simplify
from .forms import DifferentialForm, FormError, determinant, exterior_derivative, form_max_abs
from .geometry import Chart, CommutatorReport, connection_commutator, hodge_star

NONIDENTITY_POINTS = 64
BISECTION_ITERATIONS = 60
LINE_NODES = 64


class EvolutionError(ValueError):
    pass


class RestrictionNotClosedError(EvolutionError):
    pass


# ---------------------------------------------------------------------------
# relations


@dataclass
class MaterialSystemSpec:
    """State functional ``psi`` (degree p-1) and evolutionary form on accompanying coordinates.

    For p = 1 the form may be given by its coefficients ``actions`` (A_mu);
    otherwise pass ``omega`` directly.
    """
    chart: Chart
    degree: int
    psi: DifferentialForm | None = None
    actions: Sequence | None = None
    omega: DifferentialForm | None = None

    def __post_init__(self):
        p = self.degree
        if p not in (0, 1, 2, 3):
            raise EvolutionError("degree must be 0, 1, 2 or 3")
        if (self.actions is None) == (self.omega is None):
            raise EvolutionError("give exactly one of actions or omega")
        if self.actions is not None:
            if p != 1:
                raise EvolutionError("action coefficients define a 1-form; use omega for p != 1")
            self.omega = DifferentialForm.one_form(self.chart.coords, list(self.actions))
        if self.omega.degree != p:
            raise EvolutionError(f"evolutionary form has degree {self.omega.degree}, expected {p}")
        if self.omega.coords != self.chart.coords:
            raise EvolutionError("evolutionary form is not on the system chart")
        if p == 0:
            if self.psi is not None:
                raise EvolutionError("a degree-0 relation has no state form")
        elif self.psi is not None:
            if self.psi.degree != p - 1:
                raise EvolutionError(f"state form must have degree {p - 1}")
            if self.psi.coords != self.chart.coords:
                raise EvolutionError("state form is not on the system chart")


@dataclass
class EvolutionaryRelation:
    chart: Chart
    psi: DifferentialForm | None
    lhs: DifferentialForm | None
    rhs: DifferentialForm
    commutator: CommutatorReport | None
    commutator_form: DifferentialForm
    identical: bool

    @property
    def degree(self):
        return self.rhs.degree

    def to_dict(self, points=None):
        from .io import form_to_doc
        return {"identical": self.identical,
                "degree": self.degree,
                "nonidentity_norm": nonidentity_norm(self, points),
                "commutator_terms": form_to_doc(self.commutator_form)["terms"],
                "torsion_terms": (form_to_doc(self.commutator.torsion_part)["terms"]
                                  if self.commutator is not None else [])}


def build_relation(spec: MaterialSystemSpec, trials=ex.DEFAULT_TRIALS, tol=ex.DEFAULT_TOL,
                   seed=ex.DEFAULT_SEED) -> EvolutionaryRelation:
    c = spec.chart
    omega = spec.omega
    lhs = exterior_derivative(spec.psi) if spec.psi is not None else None
    report = None
    if spec.degree == 1:
        report = connection_commutator(omega, c, seed=seed)
        comm = report.total
    else:
        comm = exterior_derivative(omega)
    identical = form_max_abs(comm, trials, seed, c.sample_box) <= tol
    return EvolutionaryRelation(c, spec.psi, lhs, omega, report, comm, identical)


def _grid_points(box, per_axis):
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def default_norm_points(chart: Chart, count=NONIDENTITY_POINTS, seed=ex.DEFAULT_SEED):
    """Random box points plus a coarse grid (corners included)."""
    box = np.asarray(chart.sample_box, dtype=float).reshape(chart.dim, 2)
    rng = np.random.default_rng(seed)
    rand = rng.uniform(box[:, 0], box[:, 1], size=(count, chart.dim))
    per_axis = max(2, int(round(4096 ** (1.0 / max(chart.dim, 1)))))
    per_axis = min(per_axis, 17)
    grid = _grid_points(chart.sample_box, per_axis) if chart.dim else np.zeros((1, 0))
    return np.concatenate([rand, grid], axis=0)


def nonidentity_norm(rel: EvolutionaryRelation, points=None, seed=ex.DEFAULT_SEED) -> float:
    """max over points of the largest |commutator coefficient|."""
    coeffs = rel.commutator_form.coefficients()
    if not coeffs:
        return 0.0
    coords = rel.chart.coords
    if points is None:
        points = default_norm_points(rel.chart, seed=seed)
    points = np.asarray(points, dtype=float).reshape(-1, len(coords))
    env = {x: points[:, i] for i, x in enumerate(coords)}
    vals = ex.evaluate_many(coeffs, env)
    vals = vals[:, np.all(np.isfinite(vals), axis=0)]
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def selfvariation(spec: MaterialSystemSpec, update: Callable, steps: int, trials=ex.DEFAULT_TRIALS,
                  tol=ex.DEFAULT_TOL, seed=ex.DEFAULT_SEED):
    """Re-evaluate the relation after each user-supplied update of the action coefficients.

    ``update(actions, step)`` returns the new coefficient list.  Returns the
    list of relations, starting with the initial one.
    """
    if spec.degree != 1 or spec.actions is None:
        raise EvolutionError("self-variation drives the action coefficients of a 1-form relation")
    rels = [build_relation(spec, trials, tol, seed)]
    actions = [spec.omega.coeff((i,)) for i in range(spec.chart.dim)]
    for k in range(steps):
        actions = list(update(actions, k))
        spec = MaterialSystemSpec(spec.chart, 1, psi=spec.psi, actions=actions)
        rels.append(build_relation(spec, trials, tol, seed))
    return rels


# ---------------------------------------------------------------------------
# degeneracy functionals and locus extraction


@dataclass(frozen=True)
class DegeneracyFunctional:
    kind: str
    expr: ex.Expr

    @classmethod
    def raw(cls, e, coords=None):
        e = ex.parse_expr(e, coords) if isinstance(e, str) else ex.as_expr(e)
        return cls("raw", simplify(e))

    @classmethod
    def determinant(cls, matrix, coords=None):
        rows = [[ex.parse_expr(v, coords) if isinstance(v, str) else ex.as_expr(v) for v in r] for r in matrix]
        if any(len(r) != len(rows) for r in rows):
            raise EvolutionError("determinant needs a square matrix")
        return cls("determinant", determinant(rows))

    @classmethod
    def jacobian_det(cls, mapping, coords):
        fs = [ex.parse_expr(m, coords) if isinstance(m, str) else ex.as_expr(m) for m in mapping]
        if len(fs) != len(coords):
            raise EvolutionError("Jacobian determinant needs a map between equal dimensions")
        rows = [[simplify(ex.differentiate(f, x)) for x in coords] for f in fs]
        return cls("jacobian_det", determinant(rows))

    @classmethod
    def poisson_bracket(cls, f, g, pairs, coords=None):
        """{f, g} = sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i) over the (q_i, p_i) name pairs."""
        f = ex.parse_expr(f, coords) if isinstance(f, str) else f
        g = ex.parse_expr(g, coords) if isinstance(g, str) else g
        terms = []
        for q, p in pairs:
            terms.append(ex.mul(ex.differentiate(f, q), ex.differentiate(g, p)))
            terms.append(ex.neg(ex.mul(ex.differentiate(f, p), ex.differentiate(g, q))))
        return cls("poisson_bracket", simplify(ex.add(*terms)))


def _bisect_edges(e, coords, base, axis, lo, hi, flo, tol):
    """Vectorized bisection along one coordinate axis; returns (points, residuals)."""
    pts = base.copy()
    a, b, fa = lo.copy(), hi.copy(), flo.copy()
    mid = 0.5 * (a + b)
    fm = np.zeros_like(a)
    active = np.ones(len(a), dtype=bool)
    for _ in range(BISECTION_ITERATIONS):
        mid = 0.5 * (a + b)
        pts[:, axis] = mid
        env = {x: pts[:, i] for i, x in enumerate(coords)}
        fm = ex.evaluate_many([e], env)[0]
        done = np.abs(fm) < tol
        active &= ~done
        if not active.any():
            break
        left = np.sign(fm) == np.sign(fa)
        a = np.where(active & left, mid, a)
        fa = np.where(active & left, fm, fa)
        b = np.where(active & ~left, mid, b)
        # converged entries keep their midpoint
        a = np.where(active, a, mid)
        b = np.where(active, b, mid)
    pts[:, axis] = mid
    return pts, np.abs(fm)


def find_degeneracy_loci(functional: DegeneracyFunctional, chart: Chart, grid=64, tol=1e-10,
                         cluster_radius=None) -> list:
    """Zero set of a scalar functional: grid sign changes, bisection, clustering.

    Each connected component becomes a constraint-only pseudostructure
    whose constraint is the functional itself, with the refined points
    and their |functional| residuals attached.
    """
    if grid < 2:
        raise EvolutionError("grid must have at least 2 nodes per axis")
    e = functional.expr
    coords = chart.coords
    n = chart.dim
    axes = [np.linspace(lo, hi, grid) for lo, hi in chart.sample_box]
    spacing = max((hi - lo) / (grid - 1) for lo, hi in chart.sample_box)
    mesh = np.meshgrid(*axes, indexing="ij")
    env = {x: m.ravel() for x, m in zip(coords, mesh)}
    vals = ex.evaluate_many([e], env)[0].reshape(mesh[0].shape)
    if not np.all(np.isfinite(vals)):
        raise ex.DomainError("degeneracy functional is undefined on part of the grid")
    found_pts = []
    found_res = []
    exact = np.argwhere(vals == 0)
    if len(exact):
        found_pts.append(np.stack([axes[k][exact[:, k]] for k in range(n)], axis=1))
        found_res.append(np.zeros(len(exact)))
    for axis in range(n):
        sl_lo = [slice(None)] * n
        sl_hi = [slice(None)] * n
        sl_lo[axis] = slice(0, grid - 1)
        sl_hi[axis] = slice(1, grid)
        v0 = vals[tuple(sl_lo)]
        v1 = vals[tuple(sl_hi)]
        idx = np.argwhere(v0 * v1 < 0)
        if not len(idx):
            continue
        base = np.stack([axes[k][idx[:, k]] for k in range(n)], axis=1)
        lo = axes[axis][idx[:, axis]]
        hi = axes[axis][idx[:, axis] + 1]
        flo = v0[tuple(idx.T)]
        pts, res = _bisect_edges(e, coords, base, axis, lo, hi, flo, tol)
        found_pts.append(pts)
        found_res.append(res)
    if not found_pts:
        return []
    pts = np.concatenate(found_pts)
    res = np.concatenate(found_res)
    order = np.lexsort(pts.T[::-1])
    pts, res = pts[order], res[order]
    radius = cluster_radius if cluster_radius is not None else 2.0 * spacing
    tree = cKDTree(pts)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(pts), len(pts))) \
        if len(pairs) else coo_matrix((len(pts), len(pts)))
    ncomp, labels = connected_components(adj, directed=False)
    comps = []
    for k in range(ncomp):
        mask = labels == k
        comps.append((pts[mask], res[mask]))
    comps.sort(key=lambda pr: (-len(pr[0]), tuple(pr[0][0])))
    out = []
    for cpts, cres in comps:
        ps = Pseudostructure(chart, [e], points=cpts, validate=False)
        ps.residuals = cres
        ps.grid_spacing = spacing
        out.append(ps)
    return out


def hausdorff_distance(points, reference):
    """Symmetric Hausdorff distance between two point clouds."""
    a = cKDTree(points)
    b = cKDTree(reference)
    return float(max(a.query(reference)[0].max(), b.query(points)[0].max()))


# ---------------------------------------------------------------------------
# identical relations


@dataclass
class IdenticalRelation:
    pseudostructure: Pseudostructure
    restricted: DifferentialForm
    potential: DifferentialForm
    residual: float
    closure_residual: float
    nonidentity_norm: float | None = None
    psi_restricted: DifferentialForm | None = None
    line_check: float | None = None

    @property
    def k(self):
        return self.restricted.degree

    def to_dict(self):
        from .io import form_to_doc
        d = {"k": self.k, "restricted": form_to_doc(self.restricted), "potential": form_to_doc(self.potential),
             "residual": self.residual, "closure_residual": self.closure_residual}
        if self.nonidentity_norm is not None:
            d["nonidentity_norm"] = self.nonidentity_norm
        if self.line_check is not None:
            d["line_check"] = self.line_check
        return d


def line_integral(form: DifferentialForm, path) -> float:
    """Integral of a 1-form along a polyline (midpoint rule on each segment)."""
    if form.degree != 1:
        raise FormError("line integrals need a 1-form")
    path = np.asarray(path, dtype=float)
    mids = 0.5 * (path[1:] + path[:-1])
    steps = np.diff(path, axis=0)
    env = {x: mids[:, i] for i, x in enumerate(form.coords)}
    comps = [form.coeff((i,)) for i in range(form.dim)]
    vals = ex.evaluate_many(comps, env)
    return float(np.sum(vals.T * steps))


def line_potential_values(form: DifferentialForm, base, targets, nodes=LINE_NODES):
    """Potential of a closed 1-form by straight-line integration from ``base``.

    Composite Gauss-Legendre rule with ``nodes`` points (4-point panels).
    """
    base = np.asarray(base, dtype=float)
    targets = np.asarray(targets, dtype=float).reshape(-1, form.dim)
    gl_x, gl_w = np.polynomial.legendre.leggauss(4)
    panels = max(1, nodes // 4)
    edges = np.linspace(0.0, 1.0, panels + 1)
    s = np.concatenate([0.5 * (edges[i + 1] - edges[i]) * gl_x + 0.5 * (edges[i + 1] + edges[i])
                        for i in range(panels)])
    w = np.concatenate([0.5 * (edges[i + 1] - edges[i]) * gl_w for i in range(panels)])
    comps = [form.coeff((i,)) for i in range(form.dim)]
    out = np.zeros(len(targets))
    for j, x in enumerate(targets):
        d = x - base
        pts = base + s[:, None] * d
        env = {c: pts[:, i] for i, c in enumerate(form.coords)}
        vals = ex.evaluate_many(comps, env)
        out[j] = float(np.sum(w * (vals.T @ d)))
    return out


def _extract(form: DifferentialForm, ps: Pseudostructure, trials, tol, seed):
    if not ps.has_parametrization:
        raise MissingParametrizationError("pseudostructure has no parametrization")
    if form.degree > ps.dim:
        raise EvolutionError(f"form degree {form.degree} exceeds pseudostructure dimension {ps.dim}")
    if form.degree == 0:
        raise EvolutionError("a degree-0 form has no potential to recover")
    restricted = ps.restrict(form)
    box = ps.param_box
    closure = form_max_abs(exterior_derivative(restricted), trials, seed, box)
    if closure > tol:
        raise RestrictionNotClosedError(
            f"restriction is not closed on the pseudostructure (max |d_pi omega| = {closure:.3g})")
    potential = find_potential(restricted, box=box, trials=trials, tol=tol, seed=seed)
    residual = form_max_abs(exterior_derivative(potential) - restricted, trials, seed, box)
    line_check = None
    if form.degree == 1:
        pts, _ = ex.sample_valid([], ps.params, 8, seed, box)
        base = np.array([0.5 * (lo + hi) for lo, hi in box])
        numeric = line_potential_values(restricted, base, pts)
        base_env = {p: np.array([base[i]]) for i, p in enumerate(ps.params)}
        pot = potential.coeff(())
        sym_vals = ex.evaluate_many([pot], {p: pts[:, i] for i, p in enumerate(ps.params)})[0]
        sym_base = ex.evaluate_many([pot], base_env)[0, 0]
        line_check = float(np.max(np.abs(numeric - (sym_vals - sym_base))))
    return restricted, potential, residual, closure, line_check


def extract_identical_relation(rel: EvolutionaryRelation, ps: Pseudostructure, tol=ex.DEFAULT_TOL,
                               trials=ex.DEFAULT_TRIALS, seed=ex.DEFAULT_SEED) -> IdenticalRelation:
    """Restrict the evolutionary form to ``ps`` and recover its potential there.

    Raises :class:`RestrictionNotClosedError` when the restriction does not
    close, i.e. ``ps`` does not realize a degenerate transformation for
    this form.  The relation's own nonidentity norm is recorded unchanged.
    """
    if ps.chart.coords != rel.chart.coords:
        raise EvolutionError("pseudostructure lives on a different chart")
    restricted, potential, residual, closure, line_check = _extract(rel.rhs, ps, trials, tol, seed)
    psi_r = ps.restrict(rel.psi) if rel.psi is not None else None
    return IdenticalRelation(ps, restricted, potential, residual, closure,
                             nonidentity_norm(rel, seed=seed), psi_r, line_check)


@dataclass
class CascadeReport:
    stages: list = field(default_factory=list)
    k_values: list = field(default_factory=list)
    completed: bool = False
    message: str = ""

    def to_dict(self):
        return {"cascade": [{"k": s.k, "residual": s.residual, "closure_residual": s.closure_residual}
                            for s in self.stages],
                "stages": [s.to_dict() for s in self.stages],
                "k_values": self.k_values, "completed": self.completed, "message": self.message}


def integration_cascade(rel: EvolutionaryRelation, ps_chain: Sequence[Pseudostructure], tol=ex.DEFAULT_TOL,
                        trials=ex.DEFAULT_TRIALS, seed=ex.DEFAULT_SEED) -> CascadeReport:
    """Sequentially restrict and integrate: degree p, p-1, ... on nested pseudostructures.

    Stage j restricts the current form to ``ps_chain[j]`` (parametrized over
    the previous stage's parameter chart) and hands its potential on.
    Stops at the first stage whose restriction does not close.
    """
    report = CascadeReport()
    if not ps_chain:
        report.message = "no degenerate transformation realized"
        return report
    if len(ps_chain) > rel.degree:
        raise EvolutionError("the chain is longer than the form degree")
    current = rel.rhs
    for j, ps in enumerate(ps_chain):
        try:
            if ps.chart.coords != current.coords:
                raise EvolutionError(f"stage {j} pseudostructure is not on the chart {current.coords}")
            restricted, potential, residual, closure, line_check = _extract(current, ps, trials, tol, seed)
        except (EvolutionError, ClosureError, FormError) as err:
            report.message = f"stopped at stage {j} (degree {current.degree}): {err}"
            if report.stages:
                report.k_values.append(report.stages[-1].potential.degree)
            return report
        report.stages.append(IdenticalRelation(ps, restricted, potential, residual, closure,
                                               line_check=line_check))
        report.k_values.append(restricted.degree)
        current = potential
    report.k_values.append(current.degree)
    report.completed = True
    report.message = f"integrated down to degree {current.degree}"
    return report


# ---------------------------------------------------------------------------
# structure classes

FIELD_LABELS = {0: "schrodinger", 1: "hamiltonian", 2: "maxwell", 3: "gravitation"}


@dataclass(frozen=True)
class StructureClass:
    p: int
    k: int
    N: int
    pseudostructure_dim: int
    label: str


def classify_structure(p: int, k: int, N: int) -> StructureClass:
    if not (0 <= k <= p <= 3):
        raise EvolutionError("need 0 <= k <= p <= 3")
    if k > N:
        raise EvolutionError("closed-form degree exceeds the space dimension")
    return StructureClass(p, k, N, N - k, FIELD_LABELS[k])


# ---------------------------------------------------------------------------
# example corpus

EXAMPLES = ("hamiltonian", "maxwell", "eikonal", "entropy_gas")


def _rk4(f, y0, t0, t1, h):
    ts = [t0]
    ys = [np.asarray(y0, dtype=float)]
    t, y = t0, ys[0]
    while t < t1 - 1e-15:
        step = min(h, t1 - t)
        k1 = f(t, y)
        k2 = f(t + step / 2, y + step / 2 * k1)
        k3 = f(t + step / 2, y + step / 2 * k2)
        k4 = f(t + step, y + step * k3)
        y = y + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t + step
        ts.append(t)
        ys.append(y)
    return np.array(ts), np.array(ys)


def example_hamiltonian(h=1e-3, tol=1e-5, seed=ex.DEFAULT_SEED):
    """Harmonic oscillator: integral of -H dt + p dq along the flow vs the action integral of L."""
    coords = ("t", "q", "p")
    H = ex.parse_expr("(p^2 + q^2)/2", coords)
    omega = DifferentialForm(coords, 1, {(0,): ex.neg(H), (1,): ex.Sym("p")})
    dHdq = simplify(ex.differentiate(H, "q"))
    dHdp = simplify(ex.differentiate(H, "p"))

    def flow(t, y):
        env = {"t": np.array([t]), "q": np.array([y[0]]), "p": np.array([y[1]])}
        v = ex.evaluate_many([dHdp, dHdq], env)[:, 0]
        return np.array([v[0], -v[1]])

    ts, ys = _rk4(flow, [1.0, 0.0], 0.0, 2 * math.pi, h)
    path = np.column_stack([ts, ys])
    form_integral = line_integral(omega, path)
    env = {"t": ts, "q": ys[:, 0], "p": ys[:, 1]}
    hv, qdot = ex.evaluate_many([H, dHdp], env)
    lagrangian = ys[:, 1] * qdot - hv
    action = float(trapezoid(lagrangian, ts))
    rel = build_relation(MaterialSystemSpec(Chart(coords), 1, omega=omega), seed=seed)
    delta = abs(form_integral - action)
    return {"example": "hamiltonian", "form_integral": form_integral, "action_integral": action,
            "delta": delta, "match": delta < tol, "steps": len(ts) - 1,
            "identical": rel.identical, "nonidentity_norm": nonidentity_norm(rel, seed=seed)}


def example_maxwell(trials=ex.DEFAULT_TRIALS, tol=ex.DEFAULT_TOL, seed=ex.DEFAULT_SEED):
    """Plane-wave potential A = sin(z - t) dx on Minkowski space; F = dA."""
    c = Chart.minkowski(("t", "x", "y", "z"))
    A = DifferentialForm(c.coords, 1, {(1,): ex.parse_expr("sin(z - t)", c.coords)})
    F = exterior_derivative(A)
    r1 = form_max_abs(exterior_derivative(F), trials, seed, c.sample_box)
    r2 = form_max_abs(exterior_derivative(hodge_star(F, c)), trials, seed, c.sample_box)
    return {"example": "maxwell", "closed": r1 <= tol, "dual_closed": r2 <= tol,
            "closure_residual": r1, "dual_residual": r2}


def example_eikonal(grid=64, tau=1.0):
    """Wavefront xi1^2 + xi2^2 = tau^2 recovered as the zero set of the eikonal functional."""
    c = Chart(("xi1", "xi2"), sample_box=[(-2, 2), (-2, 2)])
    f = DegeneracyFunctional.raw(ex.parse_expr(f"xi1^2 + xi2^2 - ({tau!r})^2", c.coords))
    loci = find_degeneracy_loci(f, c, grid=grid)
    h = loci[0].grid_spacing if loci else 4.0 / (grid - 1)
    phi = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
    circle = tau * np.column_stack([np.cos(phi), np.sin(phi)])
    err = hausdorff_distance(loci[0].points, circle) if loci else float("inf")
    return {"example": "eikonal", "components": len(loci), "hausdorff_error": err, "grid_spacing": h,
            "within_2h": err < 2 * h, "points": int(len(loci[0].points)) if loci else 0}


def example_entropy_gas(seed=ex.DEFAULT_SEED):
    """Ideal gas energy equation Ds/Dt = 0: psi = s, A_1 = 0 along the trajectory coordinate."""
    c = Chart(("xi1",))
    psi = DifferentialForm.scalar(c.coords, ex.ONE)  # reference entropy value
    rel = build_relation(MaterialSystemSpec(c, 1, psi=psi, actions=[ex.ZERO]), seed=seed)
    holds = form_max_abs(rel.lhs - rel.rhs, box=c.sample_box) == 0.0
    return {"example": "entropy_gas", "identical": rel.identical, "relation_holds": holds,
            "nonidentity_norm": nonidentity_norm(rel, seed=seed)}


def run_example(name: str, **kw) -> dict:
    runners = {"hamiltonian": example_hamiltonian, "maxwell": example_maxwell,
               "eikonal": example_eikonal, "entropy_gas": example_entropy_gas}
    if name not in runners:
        raise EvolutionError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")
    return runners[name](**kw)
