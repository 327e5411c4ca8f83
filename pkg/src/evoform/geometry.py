"""Metric and connection structure on a chart.

Index conventions: ``metric[m][n]`` is g_{mn}; ``connection[s][b][a]`` is
Gamma^s_{ba}.  The commutator of a 1-form uses

    K_{ab} = (d a_b/dx^a - d a_a/dx^b) + (Gamma^s_{ba} - Gamma^s_{ab}) a_s

and curvature uses

    R^r_{smn} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms}
                + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}.

Sign conventions: delta = s (-1)^(n(p+1)+1) * d * on p-forms, with s the
sign of det g, and the Laplace-de Rham operator is d delta + delta d
(so it is minus the flat Laplacian on functions).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import expr as ex
from .expr import simplify
from .forms import (DifferentialForm, FormError, complement, determinant, exterior_derivative,
                    form_max_abs, sort_with_sign)

SUP_NORM_POINTS = 64


class GeometryError(ValueError):
    pass


def _parse_entry(v, coords):
    return ex.parse_expr(v, coords) if isinstance(v, str) else ex.as_expr(v)


class Chart:
    """Coordinates with an optional metric and (possibly nonsymmetric) connection.

    Without an explicit connection, a metric chart uses Levi-Civita.
    ``sample_box`` bounds every sampled check on this chart; keep
    coordinate singularities (r = 0 in polar coordinates) outside it.
    """

    def __init__(self, coords, metric=None, connection=None, sample_box=None,
                 star_shaped=True, validate=True):
        self.coords = tuple(coords)
        n = len(self.coords)
        self.sample_box = [tuple(map(float, b)) for b in ex.normalize_box(self.coords, sample_box)]
        self.star_shaped = bool(star_shaped)
        self.metric = None
        self._connection = None
        if metric is not None:
            if len(metric) != n or any(len(r) != n for r in metric):
                raise GeometryError(f"metric must be {n}x{n}")
            self.metric = tuple(tuple(simplify(_parse_entry(v, self.coords)) for v in row) for row in metric)
        if connection is not None:
            if (len(connection) != n or any(len(r) != n for r in connection)
                    or any(len(c) != n for r in connection for c in r)):
                raise GeometryError(f"connection must be {n}x{n}x{n}")
            self._connection = tuple(tuple(tuple(simplify(_parse_entry(v, self.coords)) for v in c)
                                           for c in r) for r in connection)
        if validate and self.metric is not None:
            self._validate_metric()

    @property
    def dim(self):
        return len(self.coords)

    @classmethod
    def euclidean(cls, coords, **kw):
        n = len(coords)
        return cls(coords, metric=[[1 if i == j else 0 for j in range(n)] for i in range(n)], **kw)

    @classmethod
    def minkowski(cls, coords=("t", "x", "y", "z"), **kw):
        n = len(coords)
        diag = [1] + [-1] * (n - 1)
        return cls(coords, metric=[[diag[i] if i == j else 0 for j in range(n)] for i in range(n)], **kw)

    @classmethod
    def diagonal(cls, coords, entries, **kw):
        n = len(coords)
        return cls(coords, metric=[[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], **kw)

    def __repr__(self):
        return f"Chart({self.coords}, metric={'yes' if self.metric else 'no'}, connection={'yes' if self.connection else 'no'})"

    # sampling -----------------------------------------------------------

    def sample(self, exprs, trials=ex.DEFAULT_TRIALS, seed=ex.DEFAULT_SEED):
        return ex.sample_valid(list(exprs), self.coords, trials, seed, self.sample_box)

    def max_abs(self, exprs, trials=ex.DEFAULT_TRIALS, seed=ex.DEFAULT_SEED):
        exprs = [e for e in (simplify(x) for x in exprs) if not ex.is_zero_const(e)]
        if not exprs:
            return 0.0
        return ex.max_abs(exprs, self.coords, trials, seed, self.sample_box)

    def all_zero(self, exprs, trials=ex.DEFAULT_TRIALS, tol=ex.DEFAULT_TOL, seed=ex.DEFAULT_SEED):
        return self.max_abs(exprs, trials, seed) <= tol

    def form_max_abs(self, t, trials=ex.DEFAULT_TRIALS, seed=ex.DEFAULT_SEED):
        return form_max_abs(t, trials, seed, self.sample_box)

    def reference_point(self):
        """Box center nudged off the symmetry axes, to dodge coordinate singularities."""
        offsets = [0.137, 0.211, 0.173, 0.229, 0.191, 0.157]
        return {c: 0.5 * (lo + hi) + offsets[i % len(offsets)] * (hi - lo) / 2
                for i, (c, (lo, hi)) in enumerate(zip(self.coords, self.sample_box))}

    # metric -------------------------------------------------------------

    def _require_metric(self):
        if self.metric is None:
            raise GeometryError("chart has no metric")

    def _validate_metric(self):
        n = self.dim
        asym = [ex.add(self.metric[i][j], ex.neg(self.metric[j][i])) for i in range(n) for j in range(i + 1, n)]
        if asym and not self.all_zero(asym):
            raise GeometryError("metric is not symmetric")
        _, vals = self.sample([self.det_metric], trials=16)
        if np.any(np.abs(vals) <= 1e-9):
            raise GeometryError("metric is degenerate at a sample point")

    @cached_property
    def det_metric(self):
        self._require_metric()
        return determinant([list(r) for r in self.metric])

    @cached_property
    def metric_inverse(self):
        """Symbolic inverse via adjugate / determinant."""
        self._require_metric()
        n = self.dim
        if n > 4:
            raise GeometryError("symbolic metric inversion is limited to dimension <= 4")
        g = [list(r) for r in self.metric]
        inv_det = ex.power(self.det_metric, -1)
        inv = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [r[:i] + r[i + 1:] for k, r in enumerate(g) if k != j]
                cof = ex.mul(ex.Const((-1) ** (i + j)), determinant(minor))
                inv[i][j] = simplify(ex.mul(cof, inv_det))
        return tuple(tuple(r) for r in inv)

    @cached_property
    def signature(self):
        """Signs of the metric eigenvalues at the reference point."""
        self._require_metric()
        ref = self.reference_point()
        G = np.array([[ex.evaluate(e, ref) for e in row] for row in self.metric])
        w = np.linalg.eigvalsh(0.5 * (G + G.T))
        if np.any(np.abs(w) < 1e-12):
            raise GeometryError("metric is singular at the reference point")
        return tuple(int(np.sign(v)) for v in sorted(w, reverse=True))

    @property
    def det_sign(self):
        return int(np.prod(self.signature))

    @cached_property
    def volume_factor(self):
        """sqrt|det g|."""
        return simplify(ex.sqrt(ex.mul(ex.Const(self.det_sign), self.det_metric)))

    # connection ---------------------------------------------------------

    @property
    def connection(self):
        if self._connection is None and self.metric is not None:
            self._connection = christoffel_from_metric(self)
        return self._connection

    @property
    def has_connection(self):
        return self._connection is not None or self.metric is not None

    def with_connection(self, connection):
        return Chart(self.coords, self.metric, connection, self.sample_box, self.star_shaped, validate=False)


def christoffel_from_metric(c: Chart):
    """Levi-Civita symbols Gamma^s_{ba} = 1/2 g^{sl}(d_b g_{la} + d_a g_{lb} - d_l g_{ba})."""
    if c.metric is None:
        raise GeometryError("chart has no metric")
    n = c.dim
    g = c.metric
    ginv = c.metric_inverse
    dg = [[[simplify(ex.differentiate(g[i][j], c.coords[k])) for k in range(n)] for j in range(n)]
          for i in range(n)]
    half = ex.Const(Fraction(1, 2))
    gamma = [[[None] * n for _ in range(n)] for _ in range(n)]
    for s in range(n):
        for b in range(n):
            for a in range(b, n):
                terms = []
                for lam in range(n):
                    if ex.is_zero_const(ginv[s][lam]):
                        continue
                    bracket = ex.add(dg[lam][a][b], dg[lam][b][a], ex.neg(dg[b][a][lam]))
                    terms.append(ex.mul(ginv[s][lam], bracket))
                val = simplify(ex.mul(half, ex.add(*terms)))
                gamma[s][b][a] = val
                gamma[s][a][b] = val
    return tuple(tuple(tuple(r) for r in m) for m in gamma)


def torsion(c: Chart):
    """T^s_{ba} = Gamma^s_{ba} - Gamma^s_{ab}."""
    conn = c.connection
    if conn is None:
        raise GeometryError("chart has no connection")
    n = c.dim
    return tuple(tuple(tuple(simplify(ex.add(conn[s][b][a], ex.neg(conn[s][a][b]))) for a in range(n))
                       for b in range(n)) for s in range(n))


@dataclass
class CommutatorReport:
    derivative_part: DifferentialForm
    torsion_part: DifferentialForm
    total: DifferentialForm
    sup_norm_estimate: float

    def to_dict(self):
        from .io import form_to_doc
        return {"derivative_part": form_to_doc(self.derivative_part),
                "torsion_part": form_to_doc(self.torsion_part),
                "total": form_to_doc(self.total),
                "sup_norm_estimate": self.sup_norm_estimate}


def torsion_contraction(a: DifferentialForm, tors) -> DifferentialForm:
    """2-form with dx^a∧dx^b coefficient (a < b) equal to T^s_{ba} a_s."""
    n = a.dim
    comps = [a.coeff((i,)) for i in range(n)]
    terms = {}
    for al, be in itertools.combinations(range(n), 2):
        terms[(al, be)] = ex.add(*(ex.mul(tors[s][be][al], comps[s]) for s in range(n)))
    return DifferentialForm(a.coords, 2, terms)


def connection_commutator(a: DifferentialForm, c: Chart, seed=ex.DEFAULT_SEED) -> CommutatorReport:
    """Commutator of a 1-form including the connection-antisymmetry term."""
    if a.degree != 1:
        raise FormError("the commutator is defined for 1-forms")
    if a.coords != c.coords:
        raise FormError("form and chart coordinates differ")
    deriv = exterior_derivative(a)
    if c.has_connection:
        tors_part = torsion_contraction(a, torsion(c))
    else:
        tors_part = DifferentialForm(a.coords, 2)
    total = deriv + tors_part
    sup = c.form_max_abs(total, trials=SUP_NORM_POINTS, seed=seed)
    return CommutatorReport(deriv, tors_part, total, sup)


def hodge_star(t: DifferentialForm, c: Chart) -> DifferentialForm:
    """Hodge dual: (*t)_J = sqrt|g| t^I sign(I, J) with J the complement of I."""
    c._require_metric()
    if t.coords != c.coords:
        raise FormError("form and chart coordinates differ")
    n, p = c.dim, t.degree
    if p > n:
        raise FormError("degree exceeds chart dimension")
    ginv = c.metric_inverse
    vol = c.volume_factor
    items = list(t.items())
    terms = {}
    for I in itertools.combinations(range(n), p):
        raised = []
        for K, coef in items:
            m = determinant([[ginv[i][k] for k in K] for i in I]) if p else ex.ONE
            if not ex.is_zero_const(m):
                raised.append(ex.mul(m, coef))
        if not raised:
            continue
        J = complement(I, n)
        sign, _ = sort_with_sign(I + J)
        terms[J] = ex.mul(ex.Const(sign), vol, ex.add(*raised))
    return DifferentialForm(t.coords, n - p, terms)


def codifferential(t: DifferentialForm, c: Chart) -> DifferentialForm:
    c._require_metric()
    n, p = c.dim, t.degree
    if p == 0:
        return DifferentialForm(t.coords, 0)
    sign = c.det_sign * (-1) ** (n * (p + 1) + 1)
    return hodge_star(exterior_derivative(hodge_star(t, c)), c).scale(sign)


def laplace_derham(t: DifferentialForm, c: Chart) -> DifferentialForm:
    """d delta + delta d."""
    c._require_metric()
    out = codifferential(exterior_derivative(t), c) if t.degree < c.dim else DifferentialForm(t.coords, t.degree)
    if t.degree > 0:
        out = out + exterior_derivative(codifferential(t, c))
    return out


def riemann_curvature(c: Chart):
    """R[r][s][m][n] = R^r_{smn}."""
    G = c.connection
    if G is None:
        raise GeometryError("chart has no connection")
    N = c.dim
    X = c.coords
    R = [[[[ex.ZERO] * N for _ in range(N)] for _ in range(N)] for _ in range(N)]
    for r in range(N):
        for s in range(N):
            for m in range(N):
                for n in range(m + 1, N):
                    val = ex.add(
                        ex.differentiate(G[r][n][s], X[m]),
                        ex.neg(ex.differentiate(G[r][m][s], X[n])),
                        *(ex.mul(G[r][m][l], G[l][n][s]) for l in range(N)),
                        *(ex.neg(ex.mul(G[r][n][l], G[l][m][s])) for l in range(N)),
                    )
                    val = simplify(val)
                    R[r][s][m][n] = val
                    R[r][s][n][m] = simplify(ex.neg(val))
    return tuple(tuple(tuple(tuple(x) for x in y) for y in z) for z in R)


@dataclass
class BianchiReport:
    first_residual: float
    second_residual: float
    tol: float
    first_ok: bool = field(init=False)
    second_ok: bool = field(init=False)

    def __post_init__(self):
        self.first_ok = self.first_residual <= self.tol
        self.second_ok = self.second_residual <= self.tol

    @property
    def ok(self):
        return self.first_ok and self.second_ok

    def to_dict(self):
        return {"first_residual": self.first_residual, "second_residual": self.second_residual,
                "first_ok": self.first_ok, "second_ok": self.second_ok, "tol": self.tol}


def covariant_derivative_riemann(c: Chart, R):
    """nabla_l R^r_{smn}, indexed [l][r][s][m][n]."""
    G = c.connection
    N = c.dim
    X = c.coords
    rng = range(N)

    def comp(l, r, s, m, n):
        terms = [ex.differentiate(R[r][s][m][n], X[l])]
        terms += [ex.mul(G[r][l][k], R[k][s][m][n]) for k in rng]
        terms += [ex.neg(ex.mul(G[k][l][s], R[r][k][m][n])) for k in rng]
        terms += [ex.neg(ex.mul(G[k][l][m], R[r][s][k][n])) for k in rng]
        terms += [ex.neg(ex.mul(G[k][l][n], R[r][s][m][k])) for k in rng]
        return ex.add(*terms)

    return comp


def bianchi_check(c: Chart, trials=ex.DEFAULT_TRIALS, tol=1e-7, seed=ex.DEFAULT_SEED) -> BianchiReport:
    """Sampled residuals of the first and second Bianchi identities.

    The cyclic sums vanish identically when two of the cycled indices
    coincide, so only distinct index triples are checked.
    """
    R = riemann_curvature(c)
    N = c.dim
    first = []
    for r in range(N):
        for s, m, n in itertools.combinations(range(N), 3):
            first.append(ex.add(R[r][s][m][n], R[r][m][n][s], R[r][n][s][m]))
    nabla = covariant_derivative_riemann(c, R)
    second = []
    for r in range(N):
        for s in range(N):
            for l, m, n in itertools.combinations(range(N), 3):
                second.append(ex.add(nabla(l, r, s, m, n), nabla(m, r, s, n, l), nabla(n, r, s, l, m)))
    r1 = c.max_abs(first, trials, seed)
    r2 = c.max_abs(second, trials, seed)
    return BianchiReport(r1, r2, tol)
