//! Certified thermodynamic quantities for conformal iterated function systems.
//!
//! The crate computes rigorous brackets for topological pressure, the Bowen
//! parameter (Hausdorff dimension of the limit set) and, for the complex
//! continued fraction system, interval certificates for the dimension
//! spectrum. Every floating-point quantity used in a certification is
//! accompanied by a recorded slack that moves it in the safe direction.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default). The [`Exec`] switch selects the sequential path at runtime
//! so both paths can be compared on the same build.

pub mod alphabet;
mod continuant;
pub mod error;
mod exec;
pub mod pressure;
pub mod spectrum;
pub mod summation;
pub mod systems;
pub mod transfer;

pub use alphabet::{GaussianLetter, LetterSet, OrderedAlphabet, TildeBlock};
pub use error::{Error, Result};
pub use exec::Exec;
pub use pressure::{
    add_letter_bounds, bowen_bisect, partition_function, partition_function_inf, pressure_bracket, tail_sum,
    theta_examples_check, BowenBracket, BowenOptions, ExpPressureBracket, LambdaData, PartitionOptions,
    PartitionValue, PressureBracket, PressureMethod, SummationPolicy, TailBracket,
};
pub use spectrum::{
    analytic_tail_condition, certify_interval, chi_lower_bound, construct_subsystem, dimension_gap_bound,
    liminf_criterion, CertifyParams, CertifyReport, CertifyVerdict, ConstructParams, Construction, GapBound,
    GapBoundInput, GridBox, LiminfReport, SeedRegion, SpectrumCertificate,
};
pub use systems::{RatioRule, SystemDescriptor, SystemKind};
pub use transfer::{
    build_lower_matrix, build_lower_matrix_from, certify_dim_lower, certify_dim_lower_from, cw_lower_bound,
    DimLowerReport, LowerMatrix, OperatorGrid, StraddleRule, TransferParams,
};
