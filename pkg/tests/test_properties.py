"""Randomized algebraic laws, driven by hypothesis."""
import itertools

from hypothesis import given, settings, strategies as st

from evoform import expr as ex
from evoform.forms import (DifferentialForm, VectorField, exterior_derivative, form_is_zero, interior_product,
                           pullback, wedge)

COORDS = ("x", "y", "z")

monomial = st.tuples(st.integers(-4, 4), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))


@st.composite
def polynomials(draw, coords=COORDS):
    terms = draw(st.lists(monomial, min_size=1, max_size=4))
    out = []
    for c, *powers in terms:
        factors = [ex.power(ex.Sym(x), k) for x, k in zip(coords, powers)]
        out.append(ex.mul(ex.Const(c), *factors))
    return ex.simplify(ex.add(*out))


@st.composite
def forms(draw, degree=None, coords=COORDS, min_degree=0):
    p = draw(st.integers(min_degree, len(coords))) if degree is None else degree
    idx = list(itertools.combinations(range(len(coords)), p))
    chosen = draw(st.lists(st.sampled_from(idx), min_size=1, max_size=len(idx), unique=True))
    return DifferentialForm(coords, p, {k: draw(polynomials(coords)) for k in chosen})


leaf = st.one_of(st.sampled_from([ex.Sym("x"), ex.Sym("y")]),
                 st.integers(-3, 3).map(ex.Const),
                 st.fractions(min_value=-2, max_value=2, max_denominator=5).map(ex.Const))


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda a: ex.Add(a)),
        st.tuples(children, children).map(lambda a: ex.Mul(a)),
        st.tuples(children, st.integers(0, 3)).map(lambda a: ex.Pow(*a)),
        children.map(ex.Neg),
        st.tuples(st.sampled_from(["sin", "cos"]), children).map(lambda a: ex.Func(*a)),
    )


raw_exprs = st.recursive(leaf, _extend, max_leaves=8)


@settings(max_examples=60, deadline=None)
@given(raw_exprs)
def test_print_parse_preserves_value(e):
    back = ex.parse_expr(ex.to_string(e))
    assert ex.is_identically_zero(ex.add(e, ex.neg(back)), coords=("x", "y"), tol=1e-7)


@settings(max_examples=60, deadline=None)
@given(raw_exprs)
def test_simplify_preserves_value(e):
    assert ex.is_identically_zero(ex.add(e, ex.neg(ex.simplify(e))), coords=("x", "y"), tol=1e-7)


@settings(max_examples=40, deadline=None)
@given(raw_exprs)
def test_derivative_of_sum_is_sum_of_derivatives(e):
    f = ex.mul(ex.Sym("y"), e)
    lhs = ex.differentiate(ex.add(e, f), "x")
    rhs = ex.add(ex.differentiate(e, "x"), ex.differentiate(f, "x"))
    assert ex.is_identically_zero(ex.add(lhs, ex.neg(rhs)), coords=("x", "y"), tol=1e-7)


@settings(max_examples=40, deadline=None)
@given(forms(), forms())
def test_d_is_linear(a, b):
    if a.degree != b.degree:
        b = DifferentialForm(COORDS, a.degree)
    assert form_is_zero(exterior_derivative(a + b) - exterior_derivative(a) - exterior_derivative(b))


@settings(max_examples=40, deadline=None)
@given(forms(1), forms(1), forms(1))
def test_wedge_is_associative(a, b, c):
    assert form_is_zero(wedge(wedge(a, b), c) - wedge(a, wedge(b, c)))


@settings(max_examples=40, deadline=None)
@given(forms(1), forms(min_degree=1), polynomials(), polynomials(), polynomials())
def test_interior_is_antiderivation(a, b, v0, v1, v2):
    v = VectorField(COORDS, [v0, v1, v2])
    lhs = interior_product(v, wedge(a, b))
    rhs = wedge(interior_product(v, a), b) - wedge(a, interior_product(v, b))
    if lhs.degree > 3:
        return
    assert form_is_zero(lhs - rhs)


@settings(max_examples=30, deadline=None)
@given(forms(), forms())
def test_pullback_respects_wedge(a, b):
    if a.degree + b.degree > 2:
        return
    f = ["u*v", "u - v", "u^2"]
    src = ("u", "v")
    lhs = pullback(f, wedge(a, b), src)
    rhs = wedge(pullback(f, a, src), pullback(f, b, src))
    assert form_is_zero(lhs - rhs)
