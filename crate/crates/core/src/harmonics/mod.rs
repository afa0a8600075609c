//! Special functions and quadrature.

pub mod legendre;
pub mod quadrature;
pub mod wigner;
pub mod ylm;

pub use legendre::{gauss_legendre, legendre, legendre_integral01};
pub use quadrature::{Domain, QuadratureRule};
pub use wigner::{wigner_big_d, wigner_column, wigner_d, wigner_d_series, wigner_entry, WignerBlock};
pub use ylm::{sph_harm, spin_sph_harm};
