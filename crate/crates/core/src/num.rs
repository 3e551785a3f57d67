//! Scalar abstraction for all numeric kernels.
//!
//! Everything in this crate is generic over [`Real`], which bundles the
//! `num-traits` capabilities the solvers need. `f64` is the type used in
//! production; `f32` compiles and is occasionally handy for quick
//! experiments, but the tight tolerances in the coefficient pipeline
//! assume double precision.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + std::fmt::Debug + std::fmt::Display + 'static
{
    /// Lift an `f64` literal into the scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable")
    }

    /// Lift a small integer (e.g. a factorial or an index) into the scalar type.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("integer not representable")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + NumAssign + std::fmt::Debug + std::fmt::Display + 'static
{
}

/// n! as a scalar; exact for n ≤ 20 in f64.
pub fn factorial<F: Real>(n: usize) -> F {
    let mut acc = F::one();
    for i in 2..=n {
        acc = acc * F::of(i);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_values() {
        assert_eq!(factorial::<f64>(0), 1.0);
        assert_eq!(factorial::<f64>(1), 1.0);
        assert_eq!(factorial::<f64>(6), 720.0);
        assert_eq!(factorial::<f64>(12), 479_001_600.0);
    }

    #[test]
    fn lit_roundtrip() {
        assert_eq!(f64::lit(0.25), 0.25);
        assert_eq!(f32::lit(0.5), 0.5f32);
        assert_eq!(f64::of(4096), 4096.0);
    }
}
