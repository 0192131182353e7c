//! Gaussian moment integrals over the doubled quadrature vector.

mod amatrix;
mod hafnian;
mod request;

pub use amatrix::{assemble_a, gaussian_prefactor, wick_contract, wick_moment, AMatrix, LogDet, ModeSet};
pub use hafnian::hafnian;
pub use request::{p_alpha, p_beta, q_alpha, q_beta, LinearForm, MomentRequest, MAX_FORMS, N_MODES, N_VARS};
