//! Separated ξ₂-representation used by the coefficient recurrence.
//!
//! Work terms live in the tensor space
//! Σ_a A_a(ξ₁) ξ₂^a sin(πξ₂) + B_a(ξ₁) ξ₂^a cos(πξ₂)
//! with PolyGauss coefficients in ξ₁. The space is closed under everything
//! the recurrence does: ξ₂-multiplication, both partial derivatives, and the
//! transverse boundary-value solve.

use crate::num::Real;
use crate::oscillator::PolyGauss;
use std::collections::HashMap;

/// ∫₀¹ ξ^a sin(2πξ) dξ and ∫₀¹ ξ^a cos(2πξ) dξ by recursion.
fn sin2pi_cos2pi<F: Real>(a: usize) -> (F, F) {
    let two_pi = F::lit(2.0) * F::PI();
    let mut s = F::zero();
    let mut c = F::zero();
    for j in 1..=a {
        let (s_prev, c_prev) = (s, c);
        s = -F::one() / two_pi + F::of(j) * c_prev / two_pi;
        c = -F::of(j) * s_prev / two_pi;
    }
    (s, c)
}

/// ∫₀¹ ξ^a sin²(πξ) dξ.
pub(crate) fn int_ss<F: Real>(a: usize) -> F {
    let (_, c) = sin2pi_cos2pi::<F>(a);
    F::one() / (F::lit(2.0) * F::of(a + 1)) - c / F::lit(2.0)
}

/// ∫₀¹ ξ^a sin(πξ) cos(πξ) dξ.
pub(crate) fn int_cs<F: Real>(a: usize) -> F {
    let (s, _) = sin2pi_cos2pi::<F>(a);
    s / F::lit(2.0)
}

/// ∫₀¹ ξ^a cos²(πξ) dξ.
pub(crate) fn int_cc<F: Real>(a: usize) -> F {
    let (_, c) = sin2pi_cos2pi::<F>(a);
    F::one() / (F::lit(2.0) * F::of(a + 1)) + c / F::lit(2.0)
}

/// Tensor-product work term of the recurrence.
#[derive(Debug, Clone)]
pub(crate) struct TrigTensor<F> {
    theta: F,
    /// sin[a] multiplies ξ₂^a sin(πξ₂).
    pub(crate) sin: Vec<PolyGauss<F>>,
    /// cos[a] multiplies ξ₂^a cos(πξ₂).
    pub(crate) cos: Vec<PolyGauss<F>>,
}

impl<F: Real> TrigTensor<F> {
    pub fn zero(theta: F) -> Self {
        TrigTensor {
            theta,
            sin: Vec::new(),
            cos: Vec::new(),
        }
    }

    pub fn theta(&self) -> F {
        self.theta
    }

    fn slot(parts: &mut Vec<PolyGauss<F>>, theta: F, a: usize) -> &mut PolyGauss<F> {
        while parts.len() <= a {
            parts.push(PolyGauss::zero(theta));
        }
        &mut parts[a]
    }

    pub fn add_sin(&mut self, a: usize, pg: &PolyGauss<F>) {
        let slot = Self::slot(&mut self.sin, self.theta, a);
        *slot = slot.add(pg);
    }

    pub fn add_cos(&mut self, a: usize, pg: &PolyGauss<F>) {
        let slot = Self::slot(&mut self.cos, self.theta, a);
        *slot = slot.add(pg);
    }

    pub fn add_scaled(&mut self, other: &Self, s: F) {
        for (a, p) in other.sin.iter().enumerate() {
            if !p.is_zero() {
                self.add_sin(a, &p.scale(s));
            }
        }
        for (a, p) in other.cos.iter().enumerate() {
            if !p.is_zero() {
                self.add_cos(a, &p.scale(s));
            }
        }
    }

    pub fn scale(&self, s: F) -> Self {
        TrigTensor {
            theta: self.theta,
            sin: self.sin.iter().map(|p| p.scale(s)).collect(),
            cos: self.cos.iter().map(|p| p.scale(s)).collect(),
        }
    }

    /// Multiply by ξ₂.
    pub fn mul_xi2(&self) -> Self {
        let mut out = TrigTensor::zero(self.theta);
        for (a, p) in self.sin.iter().enumerate() {
            if !p.is_zero() {
                out.add_sin(a + 1, p);
            }
        }
        for (a, p) in self.cos.iter().enumerate() {
            if !p.is_zero() {
                out.add_cos(a + 1, p);
            }
        }
        out
    }

    /// Multiply every ξ₁-coefficient by a plain polynomial in ξ₁.
    pub fn mul_poly(&self, poly: &[F]) -> Self {
        TrigTensor {
            theta: self.theta,
            sin: self.sin.iter().map(|p| p.mul_poly(poly)).collect(),
            cos: self.cos.iter().map(|p| p.mul_poly(poly)).collect(),
        }
    }

    /// ∂/∂ξ₂.
    pub fn d_xi2(&self) -> Self {
        let pi = F::PI();
        let mut out = TrigTensor::zero(self.theta);
        for (a, p) in self.sin.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if a >= 1 {
                out.add_sin(a - 1, &p.scale(F::of(a)));
            }
            out.add_cos(a, &p.scale(pi));
        }
        for (a, p) in self.cos.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if a >= 1 {
                out.add_cos(a - 1, &p.scale(F::of(a)));
            }
            out.add_sin(a, &p.scale(-pi));
        }
        out
    }

    /// ∂/∂ξ₁ (the PolyGauss derivative of every coefficient).
    pub fn d_xi1(&self) -> Self {
        TrigTensor {
            theta: self.theta,
            sin: self.sin.iter().map(|p| p.deriv()).collect(),
            cos: self.cos.iter().map(|p| p.deriv()).collect(),
        }
    }

    /// Twice the sin(πξ₂)-projection: 2 (self, sin πξ₂)_{L²(0,1)} as a
    /// PolyGauss in ξ₁.
    pub fn sin_component(&self) -> PolyGauss<F> {
        let mut out = PolyGauss::zero(self.theta);
        for (a, p) in self.sin.iter().enumerate() {
            if !p.is_zero() {
                out = out.add(&p.scale(F::lit(2.0) * int_ss::<F>(a)));
            }
        }
        for (a, p) in self.cos.iter().enumerate() {
            if !p.is_zero() {
                out = out.add(&p.scale(F::lit(2.0) * int_cs::<F>(a)));
            }
        }
        out
    }

    /// L²(ℝ × (0,1)) norm via the exact ξ₂ Gram integrals.
    pub fn norm(&self) -> F {
        let mut acc = F::zero();
        for (a, p) in self.sin.iter().enumerate() {
            for (b, q) in self.sin.iter().enumerate() {
                if !p.is_zero() && !q.is_zero() {
                    acc += p.inner(q) * int_ss::<F>(a + b);
                }
            }
            for (b, q) in self.cos.iter().enumerate() {
                if !p.is_zero() && !q.is_zero() {
                    acc += F::lit(2.0) * p.inner(q) * int_cs::<F>(a + b);
                }
            }
        }
        for (a, p) in self.cos.iter().enumerate() {
            for (b, q) in self.cos.iter().enumerate() {
                if !p.is_zero() && !q.is_zero() {
                    acc += p.inner(q) * int_cc::<F>(a + b);
                }
            }
        }
        acc.max(F::zero()).sqrt()
    }

    /// Largest ξ₁-degree across all coefficients.
    pub fn max_degree(&self) -> usize {
        self.sin
            .iter()
            .chain(self.cos.iter())
            .filter(|p| !p.is_zero())
            .map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }
}

/// Transverse BVP solver: given a right-hand side g(ξ₁, ξ₂) orthogonal to
/// sin(πξ₂), produce the unique ψ with
///   -(1/H₀²)(∂²/∂ξ₂² + π²) ψ = g,  ψ(·,0) = ψ(·,1) = 0,  ψ ⟂ sin(πξ₂).
///
/// The solve runs per ξ₂-basis element (with its sin-projection removed) and
/// the per-element solutions are cached; they depend only on H₀.
pub(crate) struct CrossSolver<F> {
    h0: F,
    cache: HashMap<(bool, usize), (Vec<F>, Vec<F>)>,
}

impl<F: Real> CrossSolver<F> {
    pub fn new(h0: F) -> Self {
        CrossSolver {
            h0,
            cache: HashMap::new(),
        }
    }

    /// Solution of L φ = (basis element)⊥ as (sin coeffs, cos coeffs) in ξ₂.
    fn basis_solution(&mut self, is_sin: bool, a: usize) -> &(Vec<F>, Vec<F>) {
        let h0 = self.h0;
        self.cache.entry((is_sin, a)).or_insert_with(|| {
            let h02 = h0 * h0;
            let two_pi = F::lit(2.0) * F::PI();
            let mut gs = vec![F::zero(); a + 1];
            let mut gc = vec![F::zero(); a + 1];
            if is_sin {
                gs[a] += F::one();
                gs[0] -= F::lit(2.0) * int_ss::<F>(a);
            } else {
                gc[a] += F::one();
                gs[0] -= F::lit(2.0) * int_cs::<F>(a);
            }
            let mut s = vec![F::zero(); a + 2];
            let mut c = vec![F::zero(); a + 2];
            for b in (0..=a).rev() {
                let s2 = if b + 2 <= a + 1 { s[b + 2] } else { F::zero() };
                let c2 = if b + 2 <= a + 1 { c[b + 2] } else { F::zero() };
                let fac = F::of(b + 2) * F::of(b + 1);
                c[b + 1] = (h02 * gs[b] + fac * s2) / (two_pi * F::of(b + 1));
                s[b + 1] = -(h02 * gc[b] + fac * c2) / (two_pi * F::of(b + 1));
            }
            // Dirichlet at ξ₂ = 0 pins c₀; at ξ₂ = 1 the cos coefficients
            // must cancel, which solvability of the projected element makes
            // automatic (asserted).
            c[0] = F::zero();
            let bc1: F = c.iter().fold(F::zero(), |x, y| x + *y);
            let scale = s
                .iter()
                .chain(c.iter())
                .fold(F::one(), |x, y| x.max(y.abs()));
            debug_assert!(
                bc1.abs() <= F::lit(1e-12) * scale,
                "transverse boundary condition failed: {bc1:?}"
            );
            // fix the kernel component: (φ, sin) = 0
            let mut ip = F::zero();
            for (b, v) in s.iter().enumerate().skip(1) {
                ip += *v * int_ss::<F>(b);
            }
            for (b, v) in c.iter().enumerate() {
                ip += *v * int_cs::<F>(b);
            }
            s[0] = -ip / int_ss::<F>(0);
            (s, c)
        })
    }

    /// Solve for a full tensor right-hand side; `rhs` must be orthogonal to
    /// sin(πξ₂) for every ξ₁ (returns the sin-component norm for the caller
    /// to validate).
    pub fn solve(&mut self, rhs: &TrigTensor<F>) -> (TrigTensor<F>, F) {
        let defect = rhs.sin_component().norm();
        let mut out = TrigTensor::zero(rhs.theta);
        for which in [true, false] {
            let parts = if which { &rhs.sin } else { &rhs.cos };
            for (a, p) in parts.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let (s, c) = self.basis_solution(which, a).clone();
                for (b, v) in s.iter().enumerate() {
                    if *v != F::zero() {
                        out.add_sin(b, &p.scale(*v));
                    }
                }
                for (b, v) in c.iter().enumerate() {
                    if *v != F::zero() {
                        out.add_cos(b, &p.scale(*v));
                    }
                }
            }
        }
        (out, defect)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi2_integrals() {
        // int_ss(0) = 1/2, int_ss(1) = 1/4, int_cs(1) = -1/(4pi)
        assert!((int_ss::<f64>(0) - 0.5).abs() < 1e-15);
        assert!((int_ss::<f64>(1) - 0.25).abs() < 1e-15);
        assert!((int_cs::<f64>(0)).abs() < 1e-15);
        assert!((int_cs::<f64>(1) + 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-15);
        // quadrature cross-check for a few higher orders
        for a in 2..8usize {
            let n = 200_000;
            let h = 1.0 / n as f64;
            let mut ss = 0.0;
            let mut cs = 0.0;
            let mut cc = 0.0;
            for i in 0..n {
                let x = (i as f64 + 0.5) * h;
                let (s, c) = (std::f64::consts::PI * x).sin_cos();
                ss += x.powi(a as i32) * s * s * h;
                cs += x.powi(a as i32) * s * c * h;
                cc += x.powi(a as i32) * c * c * h;
            }
            assert!((int_ss::<f64>(a) - ss).abs() < 1e-9, "ss a={a}");
            assert!((int_cs::<f64>(a) - cs).abs() < 1e-9, "cs a={a}");
            assert!((int_cc::<f64>(a) - cc).abs() < 1e-9, "cc a={a}");
        }
    }

    #[test]
    fn cross_solver_reproduces_plain_cosine_solution() {
        // L phi = cos(pi xi2) has the solution (H0^2/(4 pi))(1 - 2 xi2) sin(pi xi2)
        let h0 = 1.7f64;
        let mut solver = CrossSolver::new(h0);
        let mut rhs = TrigTensor::zero(2.0);
        rhs.add_cos(0, &PolyGauss::new(2.0, vec![1.0]));
        let (sol, defect) = solver.solve(&rhs);
        assert!(defect < 1e-14);
        let want = h0 * h0 / (4.0 * std::f64::consts::PI);
        assert!((sol.sin[0].coeff(0) - want).abs() < 1e-14);
        assert!((sol.sin[1].coeff(0) + 2.0 * want).abs() < 1e-14);
        assert!(sol.cos.iter().all(|p| p.is_zero()));
        // orthogonal to sin and vanishing at both ends
        assert!(sol.sin_component().norm() < 1e-14);
    }

    #[test]
    fn cross_solver_defect_detects_sin_component() {
        let mut solver = CrossSolver::new(1.0f64);
        let mut rhs = TrigTensor::zero(1.0);
        rhs.add_sin(0, &PolyGauss::new(1.0, vec![1.0]));
        let (_, defect) = solver.solve(&rhs);
        assert!(defect > 0.1);
    }

    #[test]
    fn derivative_rules() {
        // d/dxi2 [xi2 sin] = sin + pi xi2 cos
        let mut t = TrigTensor::zero(1.0f64);
        t.add_sin(1, &PolyGauss::new(1.0, vec![1.0]));
        let d = t.d_xi2();
        assert!((d.sin[0].coeff(0) - 1.0).abs() < 1e-15);
        assert!((d.cos[1].coeff(0) - std::f64::consts::PI).abs() < 1e-15);
    }
}
