"""qrecur: a finite-dimensional laboratory for quantum dynamical systems.

Build states and GNS representations on M_d, check detailed balance and
its consequences for Heisenberg-picture channels, compute Khintchin
recurrence sets of correlation sequences, split GNS contractions into
unitary and completely-non-unitary parts, and exhibit the obstruction
that recurrence places on reversible/decaying decompositions.
"""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402,F401
    GnsSpace,
    State,
    VectorInGns,
    build_gns,
    density_state,
    expectation,
    gibbs_state,
    gns_vector,
    left_representation,
    modular_commutator_norm,
    right_representation,
    tracial_state,
)
from .channels import (  # noqa: E402,F401
    DbReport,
    SuperOperator,
    build_contraction,
    compose,
    cp_check,
    detailed_balance_check,
    from_choi,
    from_kraus,
    from_transfer,
    identity_channel,
    invariance_residual,
    k_positivity_sample,
    omega_adjoint,
    power,
    schwarz_check,
)
from .decomposition import (  # noqa: E402,F401
    Decomposition,
    decaying_part,
    obstruction_check,
    reversible_part,
)
from .linalg import (  # noqa: E402,F401
    EigenSystem,
    cholesky,
    general_eig,
    hermitian_eig,
    operator_norm,
)
from .recurrence import (  # noqa: E402,F401
    CorrelationSeries,
    NormSequence,
    RecurrenceSet,
    correlation_sequence,
    gap_stability_probe,
    norm_sequence,
    recurrence_set,
)
from .stability import (  # noqa: E402,F401
    AsymptoticProjections,
    SpectralReport,
    Splitting,
    asymptotic_projections,
    pq_criterion,
    spectral_stability_test,
    strong_stability_check,
    unitary_subspace,
)
