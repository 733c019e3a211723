"""Exact computations with K-theoretic invariants of algebras over finite
T0-spaces: representations, cosheaves, Hom/Ext over the incidence algebra,
and range and classification checks."""

__version__ = "0.1.0"

from .abgroup import AbGroup, GradedGroup, GroupMap, Presentation, smith_normal_form
from .classify import (IsoVerdict, extension_check, fibres_look_like_CK, has_finite_equal_ranks,
                       has_finite_ordered_ranks, has_free_quotients_odd, invariants_isomorphic,
                       pointed_isomorphic, realizability_report, to_R_module)
from .cosheaf import (PointedCosheaf, Precosheaf, colim, colim_res, is_cosheaf, is_flabby,
                      quotient_closed, res_colim, restrict_open)
from .errors import XkitError
from .graphck import Graph, compare_graphs, ideal_lattice, ok_invariant
from .homalg import (ProjectiveResolution, ext_module, fibre_groups, hom_module, is_projective,
                     projective_resolution, uct_groups)
from .rep import ProjectiveBundle, Representation, bundle_hom_into, projective, realize_bundle, res
from .space import FiniteSpace

__all__ = [
    "AbGroup", "GradedGroup", "GroupMap", "Presentation", "smith_normal_form",
    "IsoVerdict", "extension_check", "fibres_look_like_CK", "has_finite_equal_ranks",
    "has_finite_ordered_ranks", "has_free_quotients_odd", "invariants_isomorphic",
    "pointed_isomorphic", "realizability_report", "to_R_module",
    "PointedCosheaf", "Precosheaf", "colim", "colim_res", "is_cosheaf", "is_flabby",
    "quotient_closed", "res_colim", "restrict_open", "XkitError",
    "Graph", "compare_graphs", "ideal_lattice", "ok_invariant",
    "ProjectiveResolution", "ext_module", "fibre_groups", "hom_module", "is_projective",
    "projective_resolution", "uct_groups",
    "ProjectiveBundle", "Representation", "bundle_hom_into", "projective", "realize_bundle", "res",
    "FiniteSpace",
]
