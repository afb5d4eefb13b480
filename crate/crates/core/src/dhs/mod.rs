//! Helffer–Sjöstrand functional calculus: almost-analytic extensions, the
//! `∂̄` integral against resolvents, the Laplace-transform resolvent and
//! resolvent growth in `L^p`.

pub mod extension;
pub mod growth;
pub mod laplace;
pub mod quadrature;
pub mod resolvent;

pub use extension::{dbar_flatness, make_extension, AlmostAnalyticExtension, FlatnessFit, DEFAULT_WIDTH};
pub use growth::{fit_growth, resolvent_growth_exponent, resolvent_lp_norm, GrowthFit, GrowthSample, NormKind};
pub use laplace::{laplace_resolvent, RayGrid};
pub use quadrature::{dhs_apply, dhs_apply_full, dhs_operator_error, DhsQuadrature};
pub use resolvent::{FactoredShift, ResolventSolver};
