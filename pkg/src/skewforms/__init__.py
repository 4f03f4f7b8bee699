"""Skew-symmetric form workbench: exterior form algebra, characteristic-strip
integration for first-order PDEs, Legendre/degeneracy analysis, and
evolutionary-relation diagnostics for conservation-law data."""

from .expr import (
    Expr,
    EvalDomainError,
    InconclusiveZeroTest,
    ParseError,
    UnknownIdentifierError,
    differentiate,
    evaluate,
    is_identically_zero,
    parse,
    simplify,
    to_string,
)
from .forms import (
    ExteriorForm,
    FrameSpec,
    Loop,
    basis_one_form,
    commutator_coefficients,
    exterior_derivative,
    is_closed,
    loop_integral,
    make_form,
    wedge,
)
from .characteristics import (
    Bundle,
    CharacteristicStrip,
    InadmissibleStripError,
    PdeProblem,
    Trajectory,
    characteristic_system,
    dual_residual,
    integrate_strip,
    solve_bundle,
    strip_residual,
)
from .legendre import (
    DegeneracyError,
    degeneracy_check,
    hamilton_jacobi_problem,
    involution_error,
    legendre_transform,
)
from .evolution import (
    EvolutionaryRelation,
    GridField,
    StructureEvent,
    UnsupportedDegreeError,
    build_relation,
    identity_on_structure,
    jacobian_scan,
    nonidentity_report,
)

__version__ = "0.1.0"
