//! Dimension-spectrum certification.

mod analytic;
mod certify;
mod construct;
mod gap;
mod liminf;
mod tail_ratio;

pub use analytic::{
    analytic_tail_condition, first_passing, m_ray_term, n_ray_term, ray_b, ray_ratio_a, ray_ratio_b, AnalyticCheck,
};
pub use certify::{
    certify_interval, CertifyParams, CertifyReport, CertifyVerdict, ConditionScan, LetterMargin, SpectrumCertificate,
    TailProof,
};
pub use construct::{construct_subsystem, ConstructParams, ConstructStep, Construction, StopReason};
pub use gap::{chi_lower_bound, dimension_gap_bound, ChiBound, GapBound, GapBoundInput};
pub use liminf::{liminf_criterion, liminf_thresholds, LiminfReport, LiminfThresholds, LiminfVerdict};
pub use tail_ratio::{
    advance_tail_ratio, family_tail_lower, step, tail_ratio_seed, tail_ratio_seed_at, GridBox, SeedRegion,
    TailRatioState, STEP_SLACK,
};
