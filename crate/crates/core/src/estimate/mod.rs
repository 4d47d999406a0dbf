//! Numerical checks of the gradient-estimate machinery for the Gauss map:
//! the comparison condition, the quotient `phi`, the Bochner and Kato
//! inequalities, the key inequality, the mean-curvature chain, the scalar
//! Liouville estimate and the flattening trend of maximal graphs.

mod bochner;
mod comparison;
mod inequalities;
mod liouville;
mod phi;
mod rigidity;

pub use bochner::{
    bochner_check, bochner_from_fields, default_samples, hessian_norm_sq, kato_epsilon,
    lattice_samples, BochnerReport, BochnerSample,
};
pub use comparison::{superharmonic_check, ComparisonFn, ComparisonKind, SuperharmonicReport};
pub use inequalities::{
    key_inequality_check, mean_curvature_vanishing_check, KeyInequalityReport, KeySample,
    VanishingReport, VanishingSample,
};
pub use liouville::{scalar_liouville_check, solve_laplace_beltrami, ScalarLiouvilleReport};
pub use phi::{
    estimate_from_fields, gradient_estimate_report, normalized_gap, phi_field, BusemannField,
    EstimateReport, Gap, PhiField,
};
pub use rigidity::{
    estimate_trend, hyperplane_rigidity_trend, solve_member, FamilyMember, PlaneBump, TrendReport,
    TrendRow,
};
