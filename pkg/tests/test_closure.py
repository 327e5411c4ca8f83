import math

import numpy as np
import pytest

from evoform import expr as ex
from evoform.closure import (ClosureError, MissingParametrizationError, NotClosedError, Pseudostructure,
                             classify_form, dual_form_check, find_potential, homotopy_center,
                             interior_differential, is_closed, restrict_to_pseudostructure)
from evoform.forms import DifferentialForm, exterior_derivative, form_max_abs
from evoform.geometry import Chart

F = DifferentialForm.from_strings
XY = ("x", "y")
XYZ = ("x", "y", "z")
E2 = Chart.euclidean(XY)


def circle(chart=E2):
    return Pseudostructure(chart, ["x^2 + y^2 - 1"], ["phi"], ["cos(phi)", "sin(phi)"], [(-math.pi, math.pi)])


ROT = F(XY, 1, {(0,): "-y", (1,): "x"})


class TestIsClosed:
    def test_exact_two_form(self):
        A = F(XYZ, 1, {(0,): "y*z^2", (1,): "sin(x)", (2,): "exp(x*y)"})
        assert is_closed(exterior_derivative(A))

    def test_y_dx(self):
        assert not is_closed(F(XY, 1, {(0,): "y"}))

    def test_top_degree(self):
        assert is_closed(F(XY, 2, {(0, 1): "x^5*sin(y)"}))


class TestPotential:
    def test_gradient(self):
        pot = find_potential(F(XY, 1, {(0,): "2*x*y", (1,): "x^2"}))
        assert ex.is_identically_zero(ex.add(pot.coeff(()), ex.neg(ex.parse_expr("x^2*y"))))

    def test_area_form(self):
        pot = find_potential(F(XY, 2, {(0, 1): "1"}))
        half = F(XY, 1, {(0,): "-y/2", (1,): "x/2"})
        assert form_max_abs(pot - half) == 0.0
        assert form_max_abs(exterior_derivative(pot) - F(XY, 2, {(0, 1): "1"})) == 0.0

    def test_not_closed(self):
        with pytest.raises(NotClosedError):
            find_potential(F(XY, 1, {(0,): "y"}))

    def test_transcendental_uses_quadrature(self):
        theta = exterior_derivative(F(XYZ, 1, {(0,): "sin(y*z)", (2,): "exp(x)*cos(y)"}))
        pot = find_potential(theta)
        assert form_max_abs(exterior_derivative(pot) - theta) < 1e-6

    def test_center_moves_off_origin(self):
        box = [(1.0, 3.0), (1.0, 3.0)]
        assert list(homotopy_center(box)) == [2, 2]
        assert list(homotopy_center([(-1, 1), (0, 2)])) == [0, 0]
        t = F(XY, 1, {(0,): "1/x", (1,): "1/y"})
        pot = find_potential(t, box=box)
        expect = ex.parse_expr("ln(x) + ln(y)")
        val = ex.evaluate(pot.coeff(()), {"x": 2.5, "y": 1.5}) - ex.evaluate(pot.coeff(()), {"x": 2.0, "y": 2.0})
        assert val == pytest.approx(ex.evaluate(expect, {"x": 2.5, "y": 1.5}) - 2 * math.log(2), abs=1e-9)

    def test_zero_degree_rejected(self):
        with pytest.raises(ClosureError):
            find_potential(F(XY, 0, {(): "x"}))


class TestRestriction:
    def test_circle(self):
        r = restrict_to_pseudostructure(ROT, circle())
        assert r.same_terms(DifferentialForm.basis(("phi",), (0,)))
        assert interior_differential(ROT, circle()).is_structurally_zero

    def test_gradient_restricts_closed(self):
        ps = Pseudostructure(Chart(XYZ), ["z - x*y"], ["u", "v"], ["u", "v", "u*v"])
        t = exterior_derivative(F(XYZ, 0, {(): "x*sin(z) + y^2"}))
        assert form_max_abs(interior_differential(t, ps), box=ps.param_box) <= 1e-12

    def test_area_on_curve(self):
        ps = Pseudostructure(E2, ["y - x^2"], ["s"], ["s", "s^2"])
        assert restrict_to_pseudostructure(F(XY, 2, {(0, 1): "1"}), ps).is_structurally_zero

    def test_parametrization_must_lie_on_locus(self):
        with pytest.raises(ClosureError):
            Pseudostructure(E2, ["x^2 + y^2 - 1"], ["phi"], ["2*cos(phi)", "sin(phi)"])

    def test_dependent_constraints(self):
        with pytest.raises(ClosureError):
            Pseudostructure(Chart(XYZ), ["z", "2*z"], ["u"], ["u", "0", "0"])

    def test_unparametrized(self):
        ps = Pseudostructure(E2, ["x - y"])
        with pytest.raises(MissingParametrizationError):
            ps.restrict(ROT)


class TestDualCheck:
    def test_circle(self):
        rep = dual_form_check(circle(), E2, ROT)
        assert rep.closure_residual < 1e-9 and rep.dual_residual < 1e-9 and rep.ok

    def test_constant_form_on_line(self):
        line = Pseudostructure(E2, ["y - 2*x"], ["s"], ["s", "2*s"])
        assert dual_form_check(line, E2, F(XY, 1, {(0,): "3", (1,): "-1"})).ok

    def test_negative_control_in_three_dims(self):
        plane = Pseudostructure(Chart(XYZ), ["z"], ["u", "v"], ["u", "v", "0"])
        rep = dual_form_check(plane, Chart.euclidean(XYZ), F(XYZ, 1, {(0,): "y"}))
        assert rep.closure_residual > 0.5
        assert not rep.ok


class TestClassify:
    def test_exact(self):
        rep = classify_form(exterior_derivative(F(XY, 0, {(): "x^2*y"})))
        assert rep.classification == "exact"
        assert ex.is_identically_zero(ex.add(rep.witness.coeff(()), ex.neg(ex.parse_expr("x^2*y"))))

    def test_closed_on_circle(self):
        rep = classify_form(ROT, circle())
        assert rep.classification == "closed_on_pseudostructure"
        assert rep.witness is not None

    def test_unclosed_with_witness(self):
        rep = classify_form(ROT)
        assert rep.classification == "unclosed"
        assert rep.witness["differential"] == {"dx∧dy": 2.0}
        assert set(rep.witness["point"]) == {"x", "y"}

    def test_non_star_shaped_chart(self):
        c = Chart(XY, sample_box=[(-2, 2), (-2, 2)], star_shaped=False)
        rep = classify_form(F(XY, 1, {(0,): "2*x"}), chart=c)
        assert rep.classification == "closed_inexact"
        assert "reason" in rep.witness

    def test_report_serializes(self):
        d = classify_form(ROT).to_dict()
        assert d["classification"] == "unclosed"
        assert np.isfinite(d["residuals"]["closure"])
