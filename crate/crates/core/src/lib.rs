//! Eigenvalue asymptotics for thin planar Dirichlet domains.
//!
//! Given two boundary profiles h₊, h₋ on [0,1], the domain
//! Ω_ε = {0 < x₁ < 1, -ε h₋(x₁) < x₂ < ε h₊(x₁)} collapses onto a segment as
//! ε → 0 and its Dirichlet-Laplacian eigenvalues blow up like ε⁻². This crate
//! computes the full expansion
//!
//!   λ(ε) = ε⁻² (c₀ + Σ_{i≥2k} ε^{i/(k+1)} c_i)
//!
//! from derivative data of the width profile H = h₊ + h₋ at its maximum:
//! closed forms for the leading coefficients at any flatness order k, an
//! arbitrary-order recurrence for the generic k = 1 case, and an independent
//! finite-difference oracle that solves the 2D eigenvalue problem directly.
//!
//! All numerics are generic over the scalar type via [`num::Real`]; the
//! `*64` aliases below are what ordinary callers want.

pub mod asymptotics;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod num;
pub mod oracle;
pub mod oscillator;
pub mod recurrence;

pub use expr::{parse, Expr};
pub use geometry::{locate_max, max_data, DomainSpec, MaxData};
pub use num::Real;

/// Concrete `f64` aliases for the main data types.
pub type Jet64 = jet::Jet<f64>;
pub type MaxData64 = geometry::MaxData<f64>;
pub type PolyGauss64 = oscillator::PolyGauss<f64>;
pub type Expansion64 = asymptotics::Expansion<f64>;
pub type Profile64 = asymptotics::Profile<f64>;
pub type OracleResult64 = oracle::OracleResult<f64>;
