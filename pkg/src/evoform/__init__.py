"""Symbolic exterior forms on coordinate charts, with closure and degeneracy analysis."""
from .expr import (Expr, ParseError, DomainError, differentiate, evaluate, is_identically_zero, parse_expr,
                   simplify, substitute, to_string)
from .forms import (DifferentialForm, FormError, VectorField, exterior_derivative, interior_product,
                    linear_combine, pullback, wedge)
from .geometry import (Chart, GeometryError, bianchi_check, christoffel_from_metric, codifferential,
                       connection_commutator, hodge_star, laplace_derham, riemann_curvature, torsion)
from .closure import (Pseudostructure, classify_form, dual_form_check, find_potential, is_closed,
                      restrict_to_pseudostructure)
from .evolution import (DegeneracyFunctional, MaterialSystemSpec, build_relation, classify_structure,
                        extract_identical_relation, find_degeneracy_loci, integration_cascade, nonidentity_norm,
                        run_example)
from .io import SchemaError, load_document, save_document

__version__ = "0.1.0"
