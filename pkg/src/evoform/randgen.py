"""Random polynomial expressions and forms for property checks."""
from __future__ import annotations

import itertools

import numpy as np

from . import expr as ex
from .forms import DifferentialForm, VectorField, default_coords


def random_polynomial(coords, rng, max_degree=3, n_terms=None, coeff_range=3):
    """Sum of random monomials of total degree <= max_degree with small integer coefficients."""
    coords = list(coords)
    if n_terms is None:
        n_terms = int(rng.integers(1, 5))
    terms = []
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_degree + 1))
        c = int(rng.integers(-coeff_range, coeff_range + 1)) or 1
        factors = [ex.Const(c)]
        if coords:
            for _ in range(deg):
                factors.append(ex.Sym(coords[int(rng.integers(len(coords)))]))
        terms.append(ex.mul(*factors))
    return ex.simplify(ex.add(*terms))


def random_form(coords, degree, rng, max_degree=3, density=0.7):
    coords = tuple(coords)
    terms = {}
    for key in itertools.combinations(range(len(coords)), degree):
        if rng.random() < density:
            terms[key] = random_polynomial(coords, rng, max_degree)
    if not terms and degree <= len(coords):
        key = tuple(range(degree))
        terms[key] = random_polynomial(coords, rng, max_degree)
    return DifferentialForm(coords, degree, terms)


def random_vector_field(coords, rng, max_degree=2):
    return VectorField(coords, [random_polynomial(coords, rng, max_degree) for _ in coords])


def random_chart_form(rng, dims=(2, 3, 4), degrees=(0, 1, 2, 3), max_degree=3):
    """A random form with dimension and degree drawn from the given ranges (degree <= dim)."""
    n = int(rng.choice(dims))
    allowed = [p for p in degrees if p <= n]
    p = int(rng.choice(allowed))
    return random_form(default_coords(n), p, rng, max_degree)


def random_spd_metric(coords, rng):
    """Positive-definite polynomial metric  g = I + B B^T  with B linear in the coordinates."""
    n = len(coords)
    B = [[ex.simplify(ex.mul(ex.Const(ex.Fraction(int(rng.integers(-2, 3)), 4)),
                             ex.Sym(coords[int(rng.integers(n))])))
          for _ in range(n)] for _ in range(n)]
    g = []
    for i in range(n):
        row = []
        for j in range(n):
            s = ex.add(*(ex.mul(B[i][k], B[j][k]) for k in range(n)))
            if i == j:
                s = ex.add(ex.ONE, s)
            row.append(ex.simplify(s))
        g.append(row)
    return g
