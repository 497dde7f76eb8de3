//! Truncated Meyer-wavelet expansions of stationary Gaussian processes.
//!
//! The crate computes the exact joint Gaussian law of a process and its
//! expansion coefficients from the spectral density, samples it, and checks
//! the quantitative conditions and bounds that govern uniform convergence of
//! the truncated expansion.

pub mod admissibility;
pub mod constants;
pub mod covariance;
pub mod error;
pub mod expand;
pub mod numeric;
pub mod quadrature;
pub mod report;
pub mod sampler;
pub mod scheme;
pub mod spectral;
pub mod wavelet;

pub use admissibility::{
    check_wavelet_conditions, entropy_integral, EntropyResult, EntropyVerdict, ModulusFamily, ModulusSpec, SupGrid,
};
pub use constants::{
    compute_constants, verify_elementary_inequalities, verify_modulus_bound, ConstantsLedger, InequalityReport,
    ModulusReport, ModulusRow,
};
pub use covariance::{
    assemble_joint, assemble_joint_covariance, decay_certificate, CovarianceEngine, DecayCertificate, DecayConstants,
    JointCovariance, QuadSpec,
};
pub use error::{Error, Result};
pub use expand::{deterministic_expand, CatalogFunction, Expansion};
pub use report::{ConditionEntry, ConditionReport, Verdict};
pub use sampler::{
    mse_curve, pointwise_mse, reconstruct, sample_joint, sample_paths, sup_exceedance, sup_exceedance_study,
    ExceedanceEstimate, ExceedanceStudy, PathSample,
};
pub use scheme::{CoefficientIndex, TruncationScheme};
pub use spectral::{check_spectral_conditions, SpectralCheck, SpectralMember, SpectralModel, Tail};
pub use wavelet::{build_meyer_pair, Base, DyadicIndex, Envelope, FrequencyForm, Member, WaveletPair};
