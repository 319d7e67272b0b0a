//! Log-polyhomogeneous fits of counting functions, spectral zeta sums and
//! the dictionary between counting coefficients and Laurent data of `ζ`.
//!
//! A counting function with leading exponent `a = d/m` is fitted in the
//! basis `λ^{a−k} (log λ)^j`, `k, j ∈ {0, 1}`; the coefficient of that
//! function is `w_{jk}`.

mod fit;
mod zeta;

pub use fit::{
    counting_points, fit_basis, fit_log_weyl, level_tags, parse_points_csv, read_points_csv, BasisTag, WeylFit,
    DEFAULT_SKIP_FRACTION, MIN_POINTS_PER_COEFF, RANK_TOLERANCE,
};
pub use zeta::{
    default_abscissa, laurent_diagnostic, laurent_from_weyl, pole_locations, tail_integral, zeta_partial,
    LaurentData, PoleCandidate,
};
