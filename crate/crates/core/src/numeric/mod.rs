pub mod quad;
pub mod roots;

pub use quad::{
    gauss_legendre, gauss_legendre_unit, integrate, integrate_breaks, integrate_to_inf, QuadValue, Quadrature,
    Tolerance,
};
pub use roots::{bisect_increasing, brent};
