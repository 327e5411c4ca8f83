"""Invariant suites run by ``evoform selftest``.

Every suite draws from one seeded generator, so two runs with the same
seed produce identical reports.
"""
from __future__ import annotations

import math

import numpy as np

from . import expr as ex
from .closure import Pseudostructure, classify_form, find_potential
from .evolution import (DegeneracyFunctional, MaterialSystemSpec, build_relation, extract_identical_relation,
                        find_degeneracy_loci, hausdorff_distance, nonidentity_norm, run_example)
from .forms import (DifferentialForm, VectorField, default_coords, exterior_derivative, form_max_abs,
                    interior_product, pullback, wedge)
from .geometry import (Chart, bianchi_check, codifferential, connection_commutator, hodge_star,
                       laplace_derham, torsion)
from .randgen import random_chart_form, random_form, random_polynomial, random_spd_metric


def _suite(name, residuals, tol):
    worst = max(residuals) if residuals else 0.0
    return {"suite": name, "cases": len(residuals), "max_residual": float(worst), "tol": tol,
            "passed": bool(worst <= tol)}


def _pair(rng):
    n = int(rng.choice([2, 3, 4]))
    coords = default_coords(n)
    p = int(rng.integers(0, n + 1))
    q = int(rng.integers(0, n - p + 1))
    return random_form(coords, p, rng), random_form(coords, q, rng)


def suite_dd(rng, trials, tol, seed, count=300):
    res = []
    for _ in range(count):
        t = random_chart_form(rng)
        res.append(form_max_abs(exterior_derivative(exterior_derivative(t)), trials, seed))
    return _suite("d_squared", res, tol)


def suite_leibniz(rng, trials, tol, seed, count=200):
    res = []
    for _ in range(count):
        a, b = _pair(rng)
        lhs = exterior_derivative(wedge(a, b))
        if lhs.degree > a.dim:
            res.append(0.0)
            continue
        rhs = wedge(exterior_derivative(a), b) + wedge(a, exterior_derivative(b)).scale((-1) ** a.degree)
        res.append(form_max_abs(lhs - rhs, trials, seed))
    return _suite("graded_leibniz", res, tol)


def suite_anticommutativity(rng, trials, tol, seed, count=200):
    res = []
    for _ in range(count):
        a, b = _pair(rng)
        diff = wedge(a, b) - wedge(b, a).scale((-1) ** (a.degree * b.degree))
        res.append(form_max_abs(diff, trials, seed))
    return _suite("anticommutativity", res, tol)


def suite_interior(rng, trials, tol, seed, count=100):
    res = []
    for _ in range(count):
        n = int(rng.choice([2, 3, 4]))
        coords = default_coords(n)
        t = random_form(coords, int(rng.integers(2, n + 1)), rng)
        v = VectorField(coords, [random_polynomial(coords, rng, 2) for _ in coords])
        res.append(form_max_abs(interior_product(v, interior_product(v, t)), trials, seed))
    return _suite("interior_square", res, tol)


def random_map(rng, source, target_dim):
    return [random_polynomial(source, rng, 2) for _ in range(target_dim)]


def suite_naturality(rng, trials, tol, seed, count=100):
    res = []
    for _ in range(count):
        n = int(rng.choice([2, 3]))
        m = int(rng.choice([1, 2, 3]))
        target = default_coords(n)
        source = ("u", "v", "w")[:m]
        t = random_form(target, int(rng.integers(0, min(n, m + 1))), rng, max_degree=2)
        f = random_map(rng, source, n)
        lhs = pullback(f, exterior_derivative(t), source)
        rhs = exterior_derivative(pullback(f, t, source))
        res.append(form_max_abs(lhs - rhs, trials, seed))
    return _suite("pullback_naturality", res, tol)


def suite_commutator_reduction(rng, trials, tol, seed, count=50):
    res = []
    for _ in range(count):
        n = int(rng.choice([2, 3]))
        coords = default_coords(n)
        c = Chart(coords, metric=random_spd_metric(coords, rng))
        a = random_form(coords, 1, rng)
        rep = connection_commutator(a, c, seed=seed)
        res.append(max(c.form_max_abs(rep.torsion_part, trials, seed),
                       c.form_max_abs(rep.total - exterior_derivative(a), trials, seed)))
    return _suite("commutator_reduction", res, tol)


def hand_torsion_case(rng, n=None):
    """Nonsymmetric constant-plus-linear connection and a constant 1-form."""
    n = n or int(rng.choice([2, 3]))
    coords = default_coords(n)
    conn = [[[ex.ZERO] * n for _ in range(n)] for _ in range(n)]
    for _ in range(int(rng.integers(1, 4))):
        s, b, a = (int(rng.integers(n)) for _ in range(3))
        conn[s][b][a] = ex.add(conn[s][b][a], random_polynomial(coords, rng, 1))
    consts = [ex.Const(int(rng.integers(-3, 4))) for _ in range(n)]
    return Chart(coords, connection=conn), DifferentialForm.one_form(coords, consts)


def hand_contraction(chart, a, point):
    """Torsion term sum_s (G^s_{ba} - G^s_{ab}) a_s at a point, as {(a, b): value} for a < b."""
    n = chart.dim
    G = np.array([[[ex.evaluate(chart.connection[s][b][al], point) for al in range(n)] for b in range(n)]
                  for s in range(n)])
    comps = np.array([ex.evaluate(a.coeff((i,)), point) for i in range(n)])
    out = {}
    for al in range(n):
        for be in range(al + 1, n):
            out[(al, be)] = float(sum((G[s, be, al] - G[s, al, be]) * comps[s] for s in range(n)))
    return out


def suite_torsion_activation(rng, trials, tol, seed, count=20):
    res = []
    for _ in range(count):
        c, a = hand_torsion_case(rng)
        rep = connection_commutator(a, c, seed=seed)
        r = form_max_abs(rep.total - rep.torsion_part, trials, seed)
        r = max(r, 0.0 if rep.derivative_part.is_structurally_zero else math.inf)
        for _ in range(8):
            pt = {x: float(rng.uniform(-2, 2)) for x in c.coords}
            hand = hand_contraction(c, a, pt)
            got = {k: ex.evaluate(v, pt) for k, v in rep.torsion_part.items()}
            for k, hv in hand.items():
                r = max(r, abs(got.get(k, 0.0) - hv))
        res.append(r)
    return _suite("torsion_activation", res, 1e-12)


def suite_poincare(rng, trials, tol, seed, count=100):
    res = []
    for i in range(count):
        n = int(rng.choice([2, 3, 4]))
        coords = default_coords(n)
        p = int(rng.integers(0, n))
        alpha = random_form(coords, p, rng)
        theta = exterior_derivative(alpha)
        if theta.is_structurally_zero:
            theta = exterior_derivative(random_form(coords, p, rng, density=1.0))
        rep = classify_form(theta, trials=trials, tol=tol, seed=seed)
        if rep.classification != "exact" and not theta.is_structurally_zero:
            res.append(math.inf)
            continue
        if theta.is_structurally_zero:
            res.append(0.0)
            continue
        pot = find_potential(theta, trials=trials, tol=tol, seed=seed)
        res.append(form_max_abs(exterior_derivative(pot) - theta, trials, seed))
    # transcendental closed forms go through quadrature
    quad = []
    for _ in range(10):
        coords = ("x", "y")
        f = ex.mul(ex.sin(random_polynomial(coords, rng, 2)), ex.exp(ex.mul(ex.Const(ex.Fraction(1, 4)),
                                                                         random_polynomial(coords, rng, 1))))
        theta = exterior_derivative(DifferentialForm.scalar(coords, f))
        pot = find_potential(theta, trials=trials, tol=tol, seed=seed)
        quad.append(form_max_abs(exterior_derivative(pot) - theta, trials, seed))
    out = _suite("poincare_roundtrip", res, tol)
    out["quadrature_max_residual"] = float(max(quad))
    out["passed"] = bool(out["passed"] and max(quad) < 1e-6)
    return out


def suite_hodge(rng, trials, tol, seed, count=100):
    inv, dd = [], []
    charts = [Chart.euclidean(("x", "y")), Chart.euclidean(("x", "y", "z")),
              Chart.minkowski(("t", "x", "y", "z")),
              Chart.diagonal(("x", "y", "z"), ["1 + x^2", "2 + y^2", "1"])]
    for i in range(count):
        c = charts[i % len(charts)]
        p = int(rng.integers(0, c.dim + 1))
        t = random_form(c.coords, p, rng, max_degree=2)
        sign = c.det_sign * (-1) ** (p * (c.dim - p))
        inv.append(c.form_max_abs(hodge_star(hodge_star(t, c), c) - t.scale(sign), trials, seed))
        if p >= 1:
            dd.append(c.form_max_abs(codifferential(codifferential(t, c), c), trials, seed))
    a = _suite("hodge_involution", inv, tol)
    b = _suite("codifferential_square", dd, tol)
    return [a, b]


def suite_laplacian(rng, trials, tol, seed, count=50):
    res = []
    charts = [Chart.euclidean(("x", "y")), Chart.euclidean(("x", "y", "z"))]
    for i in range(count):
        c = charts[i % 2]
        p = int(rng.integers(0, c.dim))
        t = random_form(c.coords, p, rng, max_degree=3)
        lhs = laplace_derham(exterior_derivative(t), c)
        rhs = exterior_derivative(laplace_derham(t, c))
        res.append(c.form_max_abs(lhs - rhs, trials, seed))
    E = Chart.euclidean(("x", "y"))
    val = laplace_derham(DifferentialForm.scalar(E.coords, "x^2 + y^2"), E)
    res.append(E.form_max_abs(val - DifferentialForm.scalar(E.coords, "-4"), trials, seed))
    M = Chart.minkowski(("t", "x", "y", "z"))
    res.append(M.form_max_abs(laplace_derham(DifferentialForm.scalar(M.coords, "sin(z - t)"), M), trials, seed))
    return _suite("laplace_commutes_with_d", res, 1e-8)


def suite_bianchi(rng, trials, tol, seed):
    metrics = [
        Chart.diagonal(("x", "y"), ["1", "1 + x^2/10"]),
        Chart.diagonal(("x", "y", "z"), ["1 + y^2/10", "1 + z^2/10", "1 + x^2/10"]),
        Chart(("x", "y", "z"), metric=[["1 + z^2/10", "x*y/20", "0"], ["x*y/20", "1", "0"], ["0", "0", "1 + x^2/10"]]),
    ]
    res = []
    for c in metrics:
        rep = bianchi_check(c, trials, 1e-7, seed)
        res.append(max(rep.first_residual, rep.second_residual))
    out = _suite("bianchi", res, 1e-7)
    conn = [[[ex.ZERO] * 3 for _ in range(3)] for _ in range(3)]
    conn[0][1][2] = ex.Sym("x")
    neg = bianchi_check(Chart(("x", "y", "z"), connection=conn), trials, 1e-7, seed)
    out["negative_control_flagged"] = not neg.first_ok
    out["passed"] = bool(out["passed"] and not neg.first_ok)
    return out


def suite_extraction(rng, trials, tol, seed):
    c = Chart(("xi1", "xi2"))
    rel = build_relation(MaterialSystemSpec(c, 1, actions=["-xi2", "xi1"]), trials, tol, seed)
    circle = Pseudostructure(c, ["xi1^2 + xi2^2 - 1"], ["phi"], ["cos(phi)", "sin(phi)"], [(-math.pi, math.pi)])
    ir = extract_identical_relation(rel, circle, tol, trials, seed)
    target = DifferentialForm.basis(("phi",), (0,))
    r = max(ir.residual, form_max_abs(ir.restricted - target, trials, seed, circle.param_box),
            abs(ir.nonidentity_norm - 2.0))
    return _suite("identical_relation", [r], tol)


def suite_loci(rng, trials, tol, seed, grid=64):
    c = Chart(("xi1", "xi2"))
    loci = find_degeneracy_loci(DegeneracyFunctional.raw("xi1^2 + xi2^2 - 1", c.coords), c, grid)
    phi = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
    h = loci[0].grid_spacing
    err = hausdorff_distance(loci[0].points, np.column_stack([np.cos(phi), np.sin(phi)]))
    pc = Chart(("q", "p"))
    pb = DegeneracyFunctional.poisson_bracket("(p^2 + q^2)/2", "q", [("q", "p")], pc.coords)
    ploci = find_degeneracy_loci(pb, pc, grid)
    axis = np.linspace(-2, 2, grid)
    pts = ploci[0].points
    on_lines = float(np.max(np.min(np.abs(pts[:, 0][:, None] - axis[None, :]), axis=1)))
    out = _suite("degeneracy_loci", [err / (2 * h), float(np.max(np.abs(pts[:, 1]))), on_lines], 1.0)
    out["circle_hausdorff"] = err
    out["passed"] = bool(err < 2 * h and len(loci) == 1 and len(ploci) == 1
                         and np.max(np.abs(pts[:, 1])) < 1e-9 and on_lines == 0.0)
    return out


def suite_examples(seed):
    reps = [run_example(name) for name in ("hamiltonian", "maxwell", "eikonal", "entropy_gas")]
    ok = (reps[0]["match"] and reps[1]["closed"] and reps[1]["dual_closed"] and reps[2]["within_2h"]
          and reps[3]["identical"])
    return {"suite": "corpus", "cases": 4, "passed": bool(ok),
            "hamiltonian_delta": reps[0]["delta"], "eikonal_error": reps[2]["hausdorff_error"]}


def run_selftest(seed=ex.DEFAULT_SEED, trials=ex.DEFAULT_TRIALS, tol=ex.DEFAULT_TOL):
    rng = np.random.default_rng(seed)
    suites = [
        suite_dd(rng, trials, tol, seed),
        suite_leibniz(rng, trials, tol, seed),
        suite_anticommutativity(rng, trials, tol, seed),
        suite_interior(rng, trials, tol, seed),
        suite_naturality(rng, trials, tol, seed),
        suite_commutator_reduction(rng, trials, tol, seed),
        suite_torsion_activation(rng, trials, tol, seed),
        suite_poincare(rng, trials, tol, seed),
        *suite_hodge(rng, trials, tol, seed),
        suite_laplacian(rng, trials, tol, seed),
        suite_bianchi(rng, trials, tol, seed),
        suite_extraction(rng, trials, tol, seed),
        suite_loci(rng, trials, tol, seed),
        suite_examples(seed),
    ]
    return {"seed": seed, "trials": trials, "tol": tol, "suites": suites,
            "passed": all(s["passed"] for s in suites)}
