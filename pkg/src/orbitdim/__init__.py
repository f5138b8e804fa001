"""Orbit dimensions of multimode bosonic states under the passive-linear,
displaced-passive-linear, active-linear, and Gaussian optics groups."""

from .dynamics import (
    BetaSample,
    EstimatedGram,
    EvolutionConfig,
    GramEntryEstimate,
    LeakageError,
    TruncatedBasis,
    apply_group_word,
    beta,
    beta_sample,
    dense_hamiltonian,
    estimate_gram_entry,
    estimate_gram_matrix,
    evolve_density,
    perturb_state,
    sample_sphere_state,
)
from .fock import (
    DensityOperator,
    Occupation,
    SparseKet,
    SparseOperator,
    ValidationError,
    add,
    apply_annihilation,
    apply_creation,
    basis_ket,
    dagger,
    enumerate_occupations,
    hs_inner,
    inner,
    mixture,
    normalize,
    op_add,
    op_mul,
    op_scale,
    op_trace,
    outer,
    real_inner,
    scale,
    trace_product,
    validate_occupation,
    zero_ket,
    zero_operator,
)
from .generators import (
    ClosureReport,
    GeneratorDescriptor,
    Group,
    LieBasis,
    apply_generator,
    commutator_with_density,
    default_closure_probes,
    left_apply_generator,
    lie_basis,
    number_shift,
    verify_closure,
)
from .orbit import (
    ClosedFormValue,
    CnotReport,
    Exactness,
    FockBasisState,
    GramMatrix,
    NoonState,
    OneModeSuperposition,
    Picture,
    PictureError,
    RankResult,
    StateFamily,
    TableRow,
    WitnessResult,
    closed_form,
    closed_form_report,
    cnot_demo,
    cnot_entangled_output,
    cnot_separable_input,
    generator_expectations,
    generic_dimension,
    gram_ket,
    gram_ket_expectation,
    gram_ketbra,
    gram_ketbra_covariance,
    gram_matrix,
    gram_mixed,
    nongaussianity_witness,
    orbit_dimension,
    rank_psd,
    table_families,
    uniform_phase_state,
)

__version__ = "0.1.0"
