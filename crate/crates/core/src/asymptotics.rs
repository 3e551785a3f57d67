//! Expansion coefficients assembled from maximum data.
//!
//! The eigenvalue branch (n, m) expands as
//! λ(ε) = ε⁻² (c₀ + Σ_{i≥2k} η^i c_i) with η = ε^{1/(k+1)}. This module
//! provides the universal leading coefficients for any flatness order k —
//! c₀, c_{2k} (the model-operator eigenvalue), c_{2k+1} = 0 and the general
//! c_{2k+2} — plus fully closed forms for c₄ and c₆ in the generic case
//! n = m = k = 1, the leading spectral gap, and the boundary-layer
//! eigenfunction profiles in physical coordinates.

use crate::expr::EvalError;
use crate::geometry::{DomainSpec, MaxData};
use crate::num::{factorial, Real};
use crate::oscillator::{
    anharmonic_eigen_numeric, grid_resolvent_solve, harmonic_eigen, moments, resolvent_solve,
    GridFunc, GridParams, OscillatorError, PolyGauss, Potential,
};
use std::collections::BTreeMap;

/// Harmonic frequency θ = π √(-H₂) / H₀^{3/2} of the k = 1 well (n = 1).
pub fn theta<F: Real>(md: &MaxData<F>) -> Result<F, OscillatorError> {
    if md.k != 1 {
        return Err(OscillatorError::NotHarmonic { k: md.k });
    }
    Ok(F::PI() * (-md.width[2]).sqrt() / md.width[0].powf(F::lit(1.5)))
}

/// Leading coefficient c₀ = π² n² / H₀².
pub fn c0<F: Real>(md: &MaxData<F>, n: u32) -> F {
    let nn = F::of(n as usize);
    let h0 = md.width[0];
    F::PI() * F::PI() * nn * nn / (h0 * h0)
}

/// c_{2k} = Λ_{n,m}: exact (2m-1) n θ for k = 1, finite-difference value
/// for k ≥ 2.
pub fn c2k<F: Real>(md: &MaxData<F>, n: u32, m: u32) -> Result<F, OscillatorError> {
    let pot = Potential::from_max_data(md, n);
    if md.k == 1 {
        Ok(harmonic_eigen(&pot, m)?.0)
    } else {
        Ok(anharmonic_eigen_numeric(&pot, m, &GridParams::default())?.0)
    }
}

/// The general c_{2k+2} coefficient:
///
///   π²n²h₁²/H₀²
///   - (2π²n² H_{2k+1}/((2k+1)! H₀³)) (ξ^{2k+1} Ψ₁, Φ)
///   - (2π²n² H_{2k+2}/((2k+2)! H₀³)) ‖ξ^{k+1} Φ‖²
///   + δ_{1k} (3π²n² H_{2k}²/(((2k)!)² H₀⁴)) ‖ξ^{2k} Φ‖²
///
/// with Ψ₁ the first corrector, solved in closed form for k = 1 and on a
/// grid for k ≥ 2.
pub fn c2k2<F: Real>(md: &MaxData<F>, n: u32, m: u32) -> Result<F, OscillatorError> {
    let k = md.k as usize;
    assert!(
        md.order() >= 2 * k + 2,
        "need derivatives up to order 2k+2 = {}",
        2 * k + 2
    );
    let pi2 = F::PI() * F::PI();
    let nn = F::of(n as usize);
    let n2 = nn * nn;
    let h0 = md.width[0];
    let h03 = h0 * h0 * h0;
    let l1 = md.lower[1];
    let w2k1 = md.width[2 * k + 1];
    let w2k2 = md.width[2 * k + 2];
    let coef_odd = F::lit(2.0) * pi2 * n2 * w2k1 / (factorial::<F>(2 * k + 1) * h03);
    let coef_even = F::lit(2.0) * pi2 * n2 * w2k2 / (factorial::<F>(2 * k + 2) * h03);
    let term1 = pi2 * n2 * l1 * l1 / (h0 * h0);

    let pot = Potential::from_max_data(md, n);
    if md.k == 1 {
        let (lambda, phi) = harmonic_eigen(&pot, m)?;
        let f = phi.mul_xi_pow(2 * k + 1).scale(coef_odd);
        let psi1 = resolvent_solve(&pot, lambda, &phi, &f)?;
        let term2 = -coef_odd * moments(&psi1, &phi, 2 * k + 1);
        let term3 = -coef_even * moments(&phi, &phi, 2 * (k + 1));
        let w2k = md.width[2 * k];
        let coef_delta = F::lit(3.0) * pi2 * n2 * w2k * w2k
            / (factorial::<F>(2 * k) * factorial::<F>(2 * k) * h0 * h0 * h0 * h0);
        let term4 = coef_delta * moments(&phi, &phi, 4 * k);
        Ok(term1 + term2 + term3 + term4)
    } else {
        let (_, phi) = anharmonic_eigen_numeric(&pot, m, &GridParams::default())?;
        let lambda_grid = grid_rayleigh(&pot, &phi);
        let nodes: Vec<F> = (0..phi.values.len()).map(|i| phi.node(i)).collect();
        let mut f = GridFunc {
            half_width: phi.half_width,
            step: phi.step,
            values: nodes
                .iter()
                .zip(&phi.values)
                .map(|(x, v)| coef_odd * x.powi(2 * k as i32 + 1) * *v)
                .collect(),
        };
        let proj = f.l2_inner(&phi) / phi.l2_inner(&phi);
        for (v, w) in f.values.iter_mut().zip(&phi.values) {
            *v = *v - proj * *w;
        }
        let psi1 = grid_resolvent_solve(&pot, lambda_grid, &phi, &f)?;
        let ip_odd: F = nodes
            .iter()
            .zip(psi1.values.iter().zip(&phi.values))
            .fold(F::zero(), |acc, (x, (u, v))| {
                acc + x.powi(2 * k as i32 + 1) * *u * *v
            })
            * phi.step;
        let nrm_even: F = nodes
            .iter()
            .zip(&phi.values)
            .fold(F::zero(), |acc, (x, v)| {
                acc + x.powi(2 * (k as i32 + 1)) * *v * *v
            })
            * phi.step;
        Ok(term1 - coef_odd * ip_odd - coef_even * nrm_even)
    }
}

fn grid_rayleigh<F: Real>(pot: &Potential<F>, phi: &GridFunc<F>) -> F {
    let n = phi.values.len();
    let inv2 = F::one() / (phi.step * phi.step);
    let mut ray = F::zero();
    let mut nrm = F::zero();
    for i in 0..n {
        let xi = phi.node(i);
        let mut av = (F::lit(2.0) * inv2 + pot.coupling * xi.powi(2 * pot.k as i32))
            * phi.values[i];
        if i > 0 {
            av -= inv2 * phi.values[i - 1];
        }
        if i + 1 < n {
            av -= inv2 * phi.values[i + 1];
        }
        ray += av * phi.values[i];
        nrm += phi.values[i] * phi.values[i];
    }
    ray / nrm
}

/// Closed forms for c₄ and c₆ of the lowest branch (n = m = 1, k = 1).
///
/// c₄ = π²h₁²/H₀² - 9H₂/(16H₀) - 11H₃²/(144H₂²) + H₄/(16H₂)
///
/// c₆ = (H₀^{3/2}/(π√(-H₂))) [ π²h₂²/(2H₀²) - π²(h₁H₃+H₂²)h₂/(2H₀²H₂)
///      + 83H₂²/(256H₀²) + 19H₃²H₄/(384H₂³) - 155H₃⁴/(6912H₂⁴)
///      + 29H₃²/(384H₀H₂) - 9H₄/(128H₀) - 13H₃H₅/(576H₂²) - 7H₄²/(768H₂²)
///      + H₆/(192H₂) + π²H₂²/(6H₀²) + π²h₃h₁/(2H₀²) ]
///
/// The bracket carries no pure h₁² term: all dependence on the centerline
/// tilt at this order enters through h₁h₃ and h₁H₃h₂.
pub fn closed_c4_c6<F: Real>(md: &MaxData<F>) -> Result<(F, F), OscillatorError> {
    if md.k != 1 {
        return Err(OscillatorError::NotHarmonic { k: md.k });
    }
    assert!(md.order() >= 6, "need width derivatives up to order 6");
    let pi2 = F::PI() * F::PI();
    let w0 = md.width[0];
    let w2 = md.width[2];
    let w3 = md.width[3];
    let w4 = md.width[4];
    let w5 = md.width[5];
    let w6 = md.width[6];
    let l1 = md.lower[1];
    let l2 = md.lower[2];
    let l3 = md.lower[3];

    let c4 = pi2 * l1 * l1 / (w0 * w0) - F::lit(9.0 / 16.0) * w2 / w0
        - F::lit(11.0 / 144.0) * w3 * w3 / (w2 * w2)
        + w4 / (F::lit(16.0) * w2);

    let bracket = pi2 * l2 * l2 / (F::lit(2.0) * w0 * w0)
        - pi2 * (l1 * w3 + w2 * w2) * l2 / (F::lit(2.0) * w0 * w0 * w2)
        + F::lit(83.0 / 256.0) * w2 * w2 / (w0 * w0)
        + F::lit(19.0 / 384.0) * w3 * w3 * w4 / (w2 * w2 * w2)
        - F::lit(155.0 / 6912.0) * w3 * w3 * w3 * w3 / (w2 * w2 * w2 * w2)
        + F::lit(29.0 / 384.0) * w3 * w3 / (w0 * w2)
        - F::lit(9.0 / 128.0) * w4 / w0
        - F::lit(13.0 / 576.0) * w3 * w5 / (w2 * w2)
        - F::lit(7.0 / 768.0) * w4 * w4 / (w2 * w2)
        + w6 / (F::lit(192.0) * w2)
        + pi2 * w2 * w2 / (F::lit(6.0) * w0 * w0)
        + pi2 * l3 * l1 / (F::lit(2.0) * w0 * w0);
    let c6 = w0.powf(F::lit(1.5)) / (F::PI() * (-w2).sqrt()) * bracket;
    Ok((c4, c6))
}

/// Leading coefficient of the first spectral gap: 2θ for k = 1 (so that
/// γ(ε) ≈ 2θ/ε), and Λ_{1,2} - Λ_{1,1} for k ≥ 2 (the η^{2k} ε⁻² prefactor).
pub fn gap_leading<F: Real>(md: &MaxData<F>) -> Result<F, OscillatorError> {
    if md.k == 1 {
        Ok(F::lit(2.0) * theta(md)?)
    } else {
        let pot = Potential::from_max_data(md, 1);
        let grid = GridParams::default();
        let (l1, _) = anharmonic_eigen_numeric(&pot, 1, &grid)?;
        let (l2, _) = anharmonic_eigen_numeric(&pot, 2, &grid)?;
        Ok(l2 - l1)
    }
}

/// A truncated eigenvalue expansion for a single branch (n, m).
#[derive(Debug, Clone)]
pub struct Expansion<F> {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    /// Leading coefficient of ε⁻².
    pub c0: F,
    /// Coefficients c_i of η^i for i ≥ 2k (vanishing ones stored as 0).
    pub coeffs: BTreeMap<usize, F>,
}

impl<F: Real> Expansion<F> {
    /// Exponent α = 1/(k+1) of the layer scale η = ε^α.
    pub fn alpha(&self) -> F {
        F::one() / F::of(self.k as usize + 1)
    }

    /// Partial sum λ(ε) = ε⁻² (c₀ + Σ η^i c_i).
    pub fn eval(&self, eps: F) -> F {
        assert!(eps > F::zero());
        let alpha = self.alpha();
        let mut acc = self.c0;
        for (&i, &c) in &self.coeffs {
            acc += c * eps.powf(alpha * F::of(i));
        }
        acc / (eps * eps)
    }

    /// Highest coefficient index carried.
    pub fn max_order(&self) -> usize {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }
}

/// Expansion through c_{2k+2} from the universal formulas, any k, any (n, m).
pub fn leading_expansion<F: Real>(
    md: &MaxData<F>,
    n: u32,
    m: u32,
) -> Result<Expansion<F>, OscillatorError> {
    let k = md.k as usize;
    let mut coeffs = BTreeMap::new();
    coeffs.insert(2 * k, c2k(md, n, m)?);
    coeffs.insert(2 * k + 1, F::zero());
    if md.order() >= 2 * k + 2 {
        coeffs.insert(2 * k + 2, c2k2(md, n, m)?);
    }
    Ok(Expansion {
        n,
        m,
        k: md.k,
        c0: c0(md, n),
        coeffs,
    })
}

/// Leading boundary-layer eigenfunction data in stretched coordinates,
/// evaluable on the physical domain through the coordinate maps
/// ξ₁ = (x₁ - x̄)/ε^α, ξ₂ = (x₂ + ε h₋(x₁))/(ε H(x₁)).
#[derive(Debug, Clone)]
pub struct Profile<F> {
    pub n: u32,
    pub m: u32,
    pub xbar: F,
    pub alpha: F,
    /// Transverse model eigenfunction Φ(ξ₁).
    pub phi: PolyGauss<F>,
    /// First corrector Ψ₁(ξ₁); identically zero when H_{2k+1} = 0.
    pub psi1: PolyGauss<F>,
}

/// Build the (n, m) profile for a k = 1 domain.
pub fn profile<F: Real>(
    d: &DomainSpec,
    md: &MaxData<F>,
    n: u32,
    m: u32,
) -> Result<Profile<F>, OscillatorError> {
    let _ = d; // the coordinate maps are evaluated lazily in eval_psi0/eval_psi1
    if md.k != 1 {
        return Err(OscillatorError::NotHarmonic { k: md.k });
    }
    let pot = Potential::from_max_data(md, n);
    let (lambda, phi) = harmonic_eigen(&pot, m)?;
    let pi2 = F::PI() * F::PI();
    let nn = F::of(n as usize);
    let coef = F::lit(2.0) * pi2 * nn * nn * md.width[3]
        / (factorial::<F>(3) * md.width[0].powi(3));
    let f = phi.mul_xi_pow(3).scale(coef);
    let psi1 = resolvent_solve(&pot, lambda, &phi, &f)?;
    Ok(Profile {
        n,
        m,
        xbar: md.xbar,
        alpha: F::lit(0.5),
        phi,
        psi1,
    })
}

impl<F: Real> Profile<F> {
    fn xi_coords(&self, d: &DomainSpec, eps: F, x1: F, x2: F) -> Result<Option<(F, F)>, EvalError> {
        if x1 <= F::zero() || x1 >= F::one() {
            return Ok(None);
        }
        let hm = d.h_minus.eval(x1)?;
        let h = d.h_plus.eval(x1)? + hm;
        if h <= F::zero() {
            return Ok(None);
        }
        let xi2 = (x2 + eps * hm) / (eps * h);
        if xi2 <= F::zero() || xi2 >= F::one() {
            return Ok(None);
        }
        let xi1 = (x1 - self.xbar) / eps.powf(self.alpha);
        Ok(Some((xi1, xi2)))
    }

    /// ψ₀ = Φ(ξ₁) sin(πnξ₂) at a physical point; zero outside the domain
    /// and on the mapped boundary.
    pub fn eval_psi0(&self, d: &DomainSpec, eps: F, x1: F, x2: F) -> Result<F, EvalError> {
        Ok(match self.xi_coords(d, eps, x1, x2)? {
            None => F::zero(),
            Some((xi1, xi2)) => {
                self.phi.eval(xi1) * (F::PI() * F::of(self.n as usize) * xi2).sin()
            }
        })
    }

    /// ψ₁ = Ψ₁(ξ₁) sin(πnξ₂) at a physical point.
    pub fn eval_psi1(&self, d: &DomainSpec, eps: F, x1: F, x2: F) -> Result<F, EvalError> {
        Ok(match self.xi_coords(d, eps, x1, x2)? {
            None => F::zero(),
            Some((xi1, xi2)) => {
                self.psi1.eval(xi1) * (F::PI() * F::of(self.n as usize) * xi2).sin()
            }
        })
    }
}
