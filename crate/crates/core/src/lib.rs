//! Weak-value based quantifiers of nonclassical correlation for
//! finite-dimensional multipartite quantum states.
//!
//! The central objects are the one-sided and two-sided quantifiers computed
//! by nested max-then-min optimization over parameterized local bases
//! ([`correlation`]), supported by dense complex operator primitives
//! ([`operator`]), basis parameterizations ([`bases`]), weak-value and
//! pointer-readout simulation ([`weakvalue`]) and state-family constructors
//! ([`states`]).

pub mod bases;
pub mod correlation;
pub mod error;
pub mod operator;
pub mod optimize;
pub mod states;
pub mod weakvalue;

pub use bases::{
    basis_from_params, is_mutually_unbiased, measurement_basis_qubit, product_basis, qubit_basis,
    BasisParams, OrthonormalBasis, ProductBasis,
};
pub use correlation::{
    bounds_report, brute_force_oracle, c_multipartite, c_one_sided, c_two_sided,
    closed_form_two_qubit_objective, estimation_error_profile, l1_quantumness,
    linear_entropy_witness, local_uncertainty_bound, max_over_postselection, objective_inner,
    tsallis2, BoundsReport, CorrelationResult, OptimizerConfig,
};
pub use error::{Error, Result};
pub use operator::{
    commutator, hermitian_eig, partial_trace, tensor, validate_density, DensityMatrix, Operator,
    PureState, Spectrum,
};
pub use states::{
    apply_channel, bell_plus, classical_classical, classical_quantum, haar_unitary, random_density,
    random_pure, werner, KrausChannel, WernerState,
};
pub use weakvalue::{
    noncomm_summand, pointer_readout, weak_value, PointerCalibration, PointerConfig, PointerShift,
    WeakValue,
};

pub use num_complex::Complex64;
