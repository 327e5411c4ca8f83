# %% [markdown]
# Metric geometry on charts: Christoffel symbols, curvature of the round
# sphere, the Hodge star and the Laplacian, and what torsion does to the
# commutator of a 1-form.

# %%
from evoform import expr as ex
from evoform.forms import DifferentialForm
from evoform.geometry import (Chart, bianchi_check, christoffel_from_metric, connection_commutator, hodge_star,
                              laplace_derham, riemann_curvature)

F = DifferentialForm.from_strings

# %% Polar coordinates: flat plane, curved coordinates.
polar = Chart.diagonal(("r", "th"), ["1", "r^2"], sample_box=[(0.5, 2), (-3, 3)])
G = christoffel_from_metric(polar)
print("Gamma^r_{th th} =", ex.to_string(G[0][1][1]))
print("Gamma^th_{r th} =", ex.to_string(G[1][0][1]))
R = riemann_curvature(polar)
print("polar curvature vanishes:", polar.all_zero([v for a in R for b in a for c in b for v in c]))

# %% The unit sphere is not flat.
sphere = Chart.diagonal(("th", "ph"), ["1", "sin(th)^2"], sample_box=[(0.3, 2.8), (-3, 3)])
print("R^th_{ph th ph} =", ex.to_string(riemann_curvature(sphere)[0][1][0][1]))
print("Bianchi on a perturbed plane:", bianchi_check(Chart.diagonal(("x", "y"), ["1", "1 + x^2/10"])).to_dict())

# %% Hodge star and Laplacian.
E = Chart.euclidean(("x", "y"))
print("*dx =", hodge_star(F(E.coords, 1, {(0,): "1"}), E))
print("Laplacian of x^2 + y^2 =", laplace_derham(F(E.coords, 0, {(): "x^2 + y^2"}), E))
M = Chart.minkowski()
wave = laplace_derham(F(M.coords, 0, {(): "sin(z - t)"}), M)
print("plane wave on Minkowski space, max |Laplacian| =", M.form_max_abs(wave))

# %% Torsion: a constant 1-form is closed, yet its commutator is not zero.
conn = [[[ex.ZERO] * 2 for _ in range(2)] for _ in range(2)]
conn[0][0][1] = ex.Sym("x")
twisted = Chart(("x", "y"), connection=conn)
rep = connection_commutator(F(("x", "y"), 1, {(0,): "1"}), twisted)
print("derivative part:", rep.derivative_part, "| torsion part:", rep.torsion_part)
