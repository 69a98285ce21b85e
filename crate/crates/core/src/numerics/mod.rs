//! Numeric kernels shared by the prior, posterior and optimisation layers:
//! dense polynomials, normal moments, exact low-degree roots, Gauss rules
//! and polygamma functions.

mod moments;
mod polynomial;
mod quadrature;
mod roots;
mod special;

pub use moments::{normal_moment, normal_moments, poly_expectation_normal, MAX_MOMENT_ORDER};
pub use polynomial::Polynomial;
pub use quadrature::{
    gauss_hermite, gauss_legendre, integrate, QuadratureRule, DEFAULT_HERMITE_NODES,
};
pub use roots::{cubic_real_roots, poly_min, quadratic_real_roots, PolyMin};
pub use special::polygamma;
