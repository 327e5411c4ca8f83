# %% [markdown]
# A short tour of the form algebra: parse coefficients, build forms,
# differentiate, wedge and pull back.

# %%
import numpy as np

from evoform import expr as ex
from evoform.forms import DifferentialForm, exterior_derivative, pullback, wedge

F = DifferentialForm.from_strings
xy = ("x", "y")

# %% Expressions are small trees; printing and parsing round-trip.
e = ex.parse_expr("x^2*y + sin(x)", xy)
print("f          =", ex.to_string(e))
print("df/dx      =", ex.to_string(ex.simplify(ex.differentiate(e, "x"))))
print("f(2, 3)    =", ex.evaluate(e, {"x": 2.0, "y": 3.0}))

# %% Exterior derivative of a scalar and of the rotation 1-form.
f = F(xy, 0, {(): "x^2*y"})
rot = F(xy, 1, {(0,): "-y", (1,): "x"})
print("d(x^2 y)   =", exterior_derivative(f))
print("d(rotation)=", exterior_derivative(rot))
print("d(d f)     =", exterior_derivative(exterior_derivative(f)))

# %% Wedge products pick up signs under reordering.
a, b = F(xy, 1, {(1,): "x"}), F(xy, 1, {(0,): "y"})
print("(x dy)^(y dx) =", wedge(a, b))

# %% Pulling the rotation form back to the unit circle gives dphi.
circle = ["cos(phi)", "sin(phi)"]
pb = pullback(circle, rot, ("phi",))
print("pullback   =", pb)
phis = np.linspace(-3, 3, 5)
print("coefficient at sample angles:", [round(ex.evaluate(pb.coeff((0,)), {"phi": p}), 12) for p in phis])
