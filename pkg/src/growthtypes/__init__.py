"""Discrete growth types realised by binary trees and plumbed pieces."""

from .assembly import (
    DiscreteGrowth,
    ParameterSelection,
    PlumbedComplex,
    SynthesisResult,
    assign_pieces,
    check_lemma_z,
    discrete_growth,
    metric_audit,
    select_parameters,
    stretch_R,
    synthesize,
)
from .catalog import Catalog, CatalogParams, PieceProfile, make_catalog, validate_catalog
from .estimators import BgdNormalizer, GrowthSynthesizer, SuplinearRepresentative, check_growth
from .exceptions import *  # noqa: F401,F403
from .growth import (
    GrowthFunction,
    check_bgd,
    check_tree_hypotheses,
    growth_type_equivalent,
    tabulate,
)
from .normalize import convex_minorant, normalize_bgd, suplinear_report, suplinear_representative
from .tree import AdmissibleTree, SparseSet, build_tree, root_growth, verify_admissible
from .verdict import Verdict, Violation

__version__ = "0.1.0"
