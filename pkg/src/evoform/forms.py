"""Exterior algebra of differential forms on a coordinate chart."""
from __future__ import annotations

import itertools
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .expr import Expr, as_expr, simplify


class FormError(ValueError):
    pass


def sort_with_sign(indices):
    """Sort an index tuple, returning (sign, sorted tuple); sign 0 on a repeat."""
    idx = list(indices)
    sign = 1
    # insertion sort counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return 0, tuple(idx)
    return sign, tuple(idx)


def complement(indices, n):
    return tuple(i for i in range(n) if i not in indices)


def default_coords(n: int) -> tuple:
    if n <= 3:
        return ("x", "y", "z")[:n]
    return tuple(f"x{i}" for i in range(n))


class DifferentialForm:
    """A degree-``p`` form  sum_I c_I dx^I  on a chart with named coordinates.

    ``terms`` maps index tuples to coefficients.  Tuples in any order are
    accepted and re-sorted with the permutation sign; tuples with a
    repeated index are dropped.  A missing key means a zero coefficient.
    """

    __slots__ = ("coords", "degree", "_terms")

    def __init__(self, coords: Sequence[str], degree: int, terms: Mapping | None = None):
        self.coords = tuple(coords)
        self.degree = int(degree)
        if self.degree < 0:
            raise FormError("negative degree")
        acc = {}
        order = []
        for key, c in (terms or {}).items():
            key = tuple(int(i) for i in key)
            if len(key) != self.degree:
                raise FormError(f"index tuple {key} does not have length {self.degree}")
            if any(i < 0 or i >= self.dim for i in key):
                raise FormError(f"index out of range in {key}")
            sign, skey = sort_with_sign(key)
            if sign == 0:
                continue
            c = as_expr(c)
            if sign < 0:
                c = ex.neg(c)
            if skey in acc:
                acc[skey] = ex.add(acc[skey], c)
            else:
                acc[skey] = c
                order.append(skey)
        clean = {}
        for k in sorted(order):
            c = simplify(acc[k])
            if not ex.is_zero_const(c):
                clean[k] = c
        self._terms = clean

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, indices) -> Expr:
        sign, key = sort_with_sign(indices)
        if sign == 0:
            return ex.ZERO
        c = self._terms.get(key, ex.ZERO)
        return c if sign > 0 else simplify(ex.neg(c))

    def coefficients(self) -> list:
        return list(self._terms.values())

    @property
    def is_structurally_zero(self) -> bool:
        return not self._terms

    # constructors -----------------------------------------------------

    @classmethod
    def zero(cls, coords, degree):
        return cls(coords, degree)

    @classmethod
    def scalar(cls, coords, f):
        if isinstance(f, str):
            f = ex.parse_expr(f, coords)
        return cls(coords, 0, {(): f})

    @classmethod
    def one_form(cls, coords, components):
        comps = [ex.parse_expr(c, coords) if isinstance(c, str) else c for c in components]
        if len(comps) != len(coords):
            raise FormError("need one component per coordinate")
        return cls(coords, 1, {(i,): c for i, c in enumerate(comps)})

    @classmethod
    def basis(cls, coords, indices, coeff=1):
        return cls(coords, len(indices), {tuple(indices): coeff})

    @classmethod
    def from_strings(cls, coords, degree, terms: Mapping):
        return cls(coords, degree, {tuple(k): ex.parse_expr(v, coords) for k, v in terms.items()})

    # arithmetic -------------------------------------------------------

    def _check_compatible(self, other):
        if not isinstance(other, DifferentialForm):
            raise TypeError("expected a DifferentialForm")
        if other.coords != self.coords:
            raise FormError(f"chart mismatch: {self.coords} vs {other.coords}")
        if other.degree != self.degree:
            raise FormError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other):
        self._check_compatible(other)
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = ex.add(terms[k], c) if k in terms else c
        return DifferentialForm(self.coords, self.degree, terms)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "DifferentialForm":
        f = as_expr(f)
        return DifferentialForm(self.coords, self.degree, {k: ex.mul(f, c) for k, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, DifferentialForm):
            return wedge(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __xor__(self, other):
        return wedge(self, other)

    def __repr__(self):
        return f"DifferentialForm({self.degree}, {self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for k, c in self._terms.items():
            basis = "∧".join("d" + self.coords[i] for i in k)
            cs = str(c)
            if not basis:
                parts.append(cs)
            elif ex.is_one_const(c):
                parts.append(basis)
            elif isinstance(c, (ex.Sym, ex.Func, ex.Pow)) or isinstance(c, ex.Const) and c.value > 0:
                parts.append(f"{cs} {basis}")
            else:
                parts.append(f"({cs}) {basis}")
        return " + ".join(parts)

    def same_terms(self, other) -> bool:
        """Structural equality after canonicalization (cheap, may give false negatives)."""
        return self.coords == other.coords and self.degree == other.degree and self._terms == other._terms

    def substitute(self, mapping) -> "DifferentialForm":
        return DifferentialForm(self.coords, self.degree,
                                {k: ex.substitute(c, mapping) for k, c in self._terms.items()})

    def evaluate(self, point: Mapping[str, float]) -> dict:
        """Numeric coefficients at a point."""
        return {k: ex.evaluate(c, point) for k, c in self._terms.items()}


class VectorField:
    __slots__ = ("coords", "components")

    def __init__(self, coords, components):
        self.coords = tuple(coords)
        comps = [ex.parse_expr(c, coords) if isinstance(c, str) else as_expr(c) for c in components]
        if len(comps) != len(self.coords):
            raise FormError(f"vector field needs {len(self.coords)} components, got {len(comps)}")
        self.components = tuple(simplify(c) for c in comps)

    @classmethod
    def coordinate(cls, coords, i):
        """The coordinate field d/dx^i."""
        return cls(coords, [1 if j == i else 0 for j in range(len(coords))])

    def __repr__(self):
        return f"VectorField({[str(c) for c in self.components]})"


# operations -------------------------------------------------------------


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    if a.coords != b.coords:
        raise FormError(f"chart mismatch: {a.coords} vs {b.coords}")
    p = a.degree + b.degree
    if p > a.dim:
        return DifferentialForm(a.coords, p)
    terms = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            sign, key = sort_with_sign(ka + kb)
            if sign == 0:
                continue
            c = ex.mul(_sign_expr(sign), ca, cb)
            terms[key] = ex.add(terms[key], c) if key in terms else c
    return DifferentialForm(a.coords, p, terms)


def _sign_expr(s):
    return ex.ONE if s > 0 else ex.Const(-1)


def exterior_derivative(t: DifferentialForm) -> DifferentialForm:
    """d t: sum over terms of sum_j (dc/dx^j) dx^j ∧ dx^I."""
    n = t.dim
    if t.degree >= n:
        return DifferentialForm(t.coords, t.degree + 1)
    terms = {}
    for k, c in t.items():
        for j, name in enumerate(t.coords):
            if j in k:
                continue
            dc = ex.differentiate(c, name)
            if ex.is_zero_const(dc):
                continue
            sign, key = sort_with_sign((j,) + k)
            term = dc if sign > 0 else ex.neg(dc)
            terms[key] = ex.add(terms[key], term) if key in terms else term
    return DifferentialForm(t.coords, t.degree + 1, terms)


d = exterior_derivative


def interior_product(v: VectorField, t: DifferentialForm) -> DifferentialForm:
    """Contraction i_v t; lowers degree by one."""
    if t.degree == 0:
        raise FormError("interior product of a 0-form is undefined")
    if v.coords != t.coords:
        raise FormError("vector field and form live on different charts")
    terms = {}
    for k, c in t.items():
        for pos, i in enumerate(k):
            vi = v.components[i]
            if ex.is_zero_const(vi):
                continue
            key = k[:pos] + k[pos + 1:]
            term = ex.mul(ex.Const((-1) ** pos), vi, c)
            terms[key] = ex.add(terms[key], term) if key in terms else term
    return DifferentialForm(t.coords, t.degree - 1, terms)


def pullback(mapping: Sequence, t: DifferentialForm, source_coords: Sequence[str]) -> DifferentialForm:
    """Pull ``t`` back along x^i = mapping[i](u).

    ``mapping`` lists one expression (or string) per target coordinate,
    written in the source coordinates ``source_coords``.
    """
    source_coords = tuple(source_coords)
    exprs = [ex.parse_expr(m, source_coords) if isinstance(m, str) else as_expr(m) for m in mapping]
    if len(exprs) != t.dim:
        raise FormError(f"map has {len(exprs)} components but target chart has dimension {t.dim}")
    m = len(source_coords)
    p = t.degree
    if p > m:
        return DifferentialForm(source_coords, p)
    subs = dict(zip(t.coords, exprs))
    jac = [[simplify(ex.differentiate(f, u)) for u in source_coords] for f in exprs]
    terms = {}
    for k, c in t.items():
        cs = ex.substitute(c, subs)
        if ex.is_zero_const(simplify(cs)):
            continue
        for J in itertools.combinations(range(m), p):
            minor = _det([[jac[i][j] for j in J] for i in k])
            if ex.is_zero_const(minor):
                continue
            term = ex.mul(cs, minor)
            terms[J] = ex.add(terms[J], term) if J in terms else term
    return DifferentialForm(source_coords, p, terms)


def _det(rows):
    """Symbolic determinant by cofactor expansion (skips zero entries)."""
    n = len(rows)
    if n == 0:
        return ex.ONE
    if n == 1:
        return rows[0][0]
    if n == 2:
        return simplify(ex.add(ex.mul(rows[0][0], rows[1][1]), ex.neg(ex.mul(rows[0][1], rows[1][0]))))
    terms = []
    for j in range(n):
        a = rows[0][j]
        if ex.is_zero_const(a):
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        terms.append(ex.mul(ex.Const((-1) ** j), a, _det(minor)))
    return simplify(ex.add(*terms))


determinant = _det


def linear_combine(coeffs: Sequence, forms: Sequence[DifferentialForm]) -> DifferentialForm:
    if len(coeffs) != len(forms) or not forms:
        raise FormError("need equally many (and at least one) coefficients and forms")
    first = forms[0]
    terms = {}
    for a, f in zip(coeffs, forms):
        first._check_compatible(f)
        for k, c in f.items():
            term = ex.mul(as_expr(a), c)
            terms[k] = ex.add(terms[k], term) if k in terms else term
    return DifferentialForm(first.coords, first.degree, terms)


# numeric checks -----------------------------------------------------------


def form_max_abs(t: DifferentialForm, trials=ex.DEFAULT_TRIALS, seed=ex.DEFAULT_SEED, box=None) -> float:
    coeffs = t.coefficients()
    if not coeffs:
        return 0.0
    return ex.max_abs(coeffs, t.coords, trials, seed, box)


def form_is_zero(t: DifferentialForm, trials=ex.DEFAULT_TRIALS, tol=ex.DEFAULT_TOL,
                 seed=ex.DEFAULT_SEED, box=None) -> bool:
    """Every coefficient passes the sampled zero test."""
    return form_max_abs(t, trials, seed, box) <= tol


def forms_agree(a: DifferentialForm, b: DifferentialForm, trials=ex.DEFAULT_TRIALS,
                tol=ex.DEFAULT_TOL, seed=ex.DEFAULT_SEED, box=None) -> bool:
    return form_is_zero(a - b, trials, tol, seed, box)


def form_witness(t: DifferentialForm, trials=ex.DEFAULT_TRIALS, seed=ex.DEFAULT_SEED, box=None):
    """Sample point maximizing the largest |coefficient|, with the coefficient values there."""
    keys = list(t._terms)
    if not keys:
        return None
    pts, vals = ex.sample_valid([t._terms[k] for k in keys], t.coords, trials, seed, box)
    j = int(np.argmax(np.max(np.abs(vals), axis=0)))
    point = {c: float(pts[j, i]) for i, c in enumerate(t.coords)}
    return point, {k: float(vals[i, j]) for i, k in enumerate(keys)}
