"""Concept lattices and epistemic modal operators over object-feature contexts.

The pipeline: build a finite context, enumerate its concept lattice, check or
repair the separation/reduction conditions, attach agent relations inducing
box and diamond operators, model-check the two-sorted modal language against
the algebraic semantics, translate into two-sorted first-order logic, verify
frame correspondents, and compute the multi-agent common-category operator.
"""

from .context import (
    FeatureSet,
    FormalContext,
    ObjectSet,
    closure_ext,
    closure_int,
    down,
    down_set_of_object,
    feat_preorder,
    is_stable_ext,
    is_stable_int,
    obj_preorder,
    up,
    up_set_of_feature,
)
from .errors import (
    ContractViolation,
    DegenerateLatticeError,
    DegenerateResultError,
    FileFormatError,
    FormulaSyntaxError,
    PreconditionError,
    RsmodalError,
    SizeLimitError,
    UnknownNameError,
)
from .lattice import (
    AbstractLattice,
    Concept,
    ConceptLattice,
    DualityReport,
    dual_polarity,
    duality_roundtrip,
    enumerate_concepts,
    enumerate_concepts_naive,
    find_context_isomorphism,
    find_order_isomorphism,
    format_concept,
    irreducibles,
    join,
    join_all,
    meet,
    meet_all,
)
from .logic import (
    Inequality,
    Model,
    Valuation,
    ValidityReport,
    axiom_inequality,
    check_inequality,
    correspondent_holds,
    cosatisfies,
    extension,
    format_formula,
    format_inequality,
    frame_valid,
    frame_validity,
    parse_formula,
    parse_inequality,
    satisfies,
)
from .modal import (
    AgentRelation,
    AxiomReport,
    CompatibilityReport,
    RsFrame,
    box,
    check_axiom_conditions,
    check_compatible,
    concept_of_feature,
    concept_of_object,
    diamond_black,
)
from .rscheck import RsReport, check_reduced, check_separating, is_rs, prune
from .social import (
    BoxString,
    CommonAxiomsReport,
    SocialModel,
    apply_string,
    check_common_axioms,
    common,
    common_relation,
)
from .translation import (
    FoEnvironment,
    FoFormula,
    expand_leq,
    fo_eval,
    format_fo,
    st_a,
    st_x,
    translate_inequality,
)

__version__ = "0.1.0"
