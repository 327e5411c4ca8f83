# %% [markdown]
# Closed, exact and "closed only on a submanifold" forms.

# %%
import math

from evoform.closure import Pseudostructure, classify_form, dual_form_check, find_potential
from evoform.forms import DifferentialForm, exterior_derivative
from evoform.geometry import Chart

F = DifferentialForm.from_strings
E = Chart.euclidean(("x", "y"))

# %% An exact form and its reconstructed potential.
grad = F(E.coords, 1, {(0,): "2*x*y", (1,): "x^2"})
print("potential of 2xy dx + x^2 dy:", find_potential(grad))
print("potential of dx^dy:", find_potential(F(E.coords, 2, {(0, 1): "1"})))

# %% The rotation form is not closed in the plane...
rot = F(E.coords, 1, {(0,): "-y", (1,): "x"})
rep = classify_form(rot)
print(rep.classification, rep.witness)

# %% ...but its restriction to the unit circle is.
circle = Pseudostructure(E, ["x^2 + y^2 - 1"], ["phi"], ["cos(phi)", "sin(phi)"], [(-math.pi, math.pi)])
print(classify_form(rot, circle).classification)
print("restricted form and its dual both close:", dual_form_check(circle, E, rot).to_dict())

# %% Non-polynomial coefficients go through Gauss-Legendre ray integration.
theta = exterior_derivative(F(("x", "y", "z"), 1, {(0,): "sin(y*z)", (2,): "exp(x)*cos(y)"}))
pot = find_potential(theta)
print("residual of d(potential) - theta:", (exterior_derivative(pot) - theta).evaluate({"x": .3, "y": -.2, "z": 1}))
