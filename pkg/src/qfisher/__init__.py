"""Classical Fisher information, the Fubini-Study pullback tensor and SLD quantum Fisher information."""
from .catalog import (
    make_bernoulli, make_gaussian_grid, make_phase_encoding, make_qubit, make_random_density,
    make_random_pure, make_random_real_pure,
)
from .classical import classical_fisher_matrix, expectation, score_functions, score_means
from .errors import (
    ConsistencyError, DomainError, FiniteDifferenceWarning, PreconditionError, QFisherError,
    SolverError, SpecError, SupportBoundaryWarning, ValidationError,
)
from .geometry import (
    CONVENTIONS, PullbackDecomposition, decompose, dominance_gap, gauge_transform, hermitian_tensor,
)
from .models import (
    DensityModel, HermitianTensor, ProbabilityModel, PureStateModel, SampleSpace,
    probability_to_density, pure_to_density, pure_to_probability,
)
from .numdiff import (
    Differential, LogDifferentialPair, check_normalization_differential, differentiate,
    log_differentials,
)
from .sld import (
    QFITensor, SLDSet, pure_state_identities, purity_check, qfi_pure_fast, qfi_tensor,
    qfi_via_trace, sld_solve,
)

__version__ = "0.1.0"
