# %% [markdown]
# The relation d(psi) = omega and its nonidentity, degeneracy loci,
# extraction of a closed form on a locus, and the bundled examples.

# %%
import math

import numpy as np

from evoform.closure import Pseudostructure
from evoform.evolution import (EXAMPLES, DegeneracyFunctional, MaterialSystemSpec, build_relation,
                               extract_identical_relation, find_degeneracy_loci, hausdorff_distance,
                               integration_cascade, nonidentity_norm, run_example)
from evoform.geometry import Chart

chart = Chart(("xi1", "xi2"))

# %% Rotation actions are not a gradient; the commutator measures by how much.
rel = build_relation(MaterialSystemSpec(chart, 1, actions=["-xi2", "xi1"]))
print("identical:", rel.identical, "| commutator:", rel.commutator_form, "| norm:", nonidentity_norm(rel))

# %% Where does a functional degenerate? Scan the grid, bisect, cluster.
loci = find_degeneracy_loci(DegeneracyFunctional.raw("xi1^2 + xi2^2 - 1", chart.coords), chart, grid=64)
phi = np.linspace(0, 2 * math.pi, 2000, endpoint=False)
err = hausdorff_distance(loci[0].points, np.column_stack([np.cos(phi), np.sin(phi)]))
print(f"{len(loci)} component, {len(loci[0].points)} points, distance to the circle {err:.4f}")

# %% On the circle the relation becomes identical: omega restricts to dphi.
circle = Pseudostructure(chart, ["xi1^2 + xi2^2 - 1"], ["phi"], ["cos(phi)", "sin(phi)"], [(-math.pi, math.pi)])
ir = extract_identical_relation(rel, circle)
print("restricted:", ir.restricted, "| potential:", ir.potential, "| residual:", ir.residual)
print("cascade k values:", integration_cascade(rel, [circle]).k_values)

# %% The example corpus.
for name in EXAMPLES:
    print(name, run_example(name))
