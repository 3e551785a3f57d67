//! Taylor tables of the transformed-operator coefficients.
//!
//! In stretched coordinates the Laplacian picks up variable coefficients
//! K₁₂, K₂₂, K₂ built from h₋', H', h₋'', H'' and 1/H² evaluated at
//! x̄ + ηξ₁. Expanding in η turns each into a table of ξ₁-polynomials
//! (with at most quadratic ξ₂-dependence):
//!
//!   K₁₂ = Σ_{i≥2k+1} η^i (P₁₂ + ξ₂ Q₁₂),
//!   K₂₂ = H₀⁻² + Σ_{i≥2k}  η^i (P₂₂ + ξ₂ Q₂₂ + ξ₂² R₂₂),
//!   K₂  = Σ_{i≥2k+2} η^i (P₂  + ξ₂ Q₂).
//!
//! The tables come from truncated power-series arithmetic on the jet data,
//! so every entry is exact to rounding.

use crate::geometry::MaxData;
use crate::num::{factorial, Real};

pub(crate) type Poly<F> = Vec<F>;

fn mul_trunc<F: Real>(a: &[F], b: &[F], n: usize) -> Vec<F> {
    let mut out = vec![F::zero(); n + 1];
    for (i, &x) in a.iter().enumerate().take(n + 1) {
        if x == F::zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn recip_trunc<F: Real>(a: &[F], n: usize) -> Vec<F> {
    assert!(a[0] != F::zero());
    let mut out = vec![F::zero(); n + 1];
    out[0] = F::one() / a[0];
    for k in 1..=n {
        let mut acc = F::zero();
        for j in 1..=k.min(a.len() - 1) {
            acc += a[j] * out[k - j];
        }
        out[k] = -acc / a[0];
    }
    out
}

fn monomial<F: Real>(degree: usize, coeff: F) -> Poly<F> {
    let mut p = vec![F::zero(); degree + 1];
    p[degree] = coeff;
    p
}

/// Per-order polynomial tables of the transformed coefficients.
#[derive(Debug, Clone)]
pub struct KSeries<F> {
    order: usize,
    p12: Vec<Poly<F>>,
    q12: Vec<Poly<F>>,
    p22: Vec<Poly<F>>,
    q22: Vec<Poly<F>>,
    r22: Vec<Poly<F>>,
    p2: Vec<Poly<F>>,
    q2: Vec<Poly<F>>,
}

macro_rules! table_getter {
    ($name:ident) => {
        pub fn $name(&self, i: usize) -> &[F] {
            self.$name.get(i).map(Vec::as_slice).unwrap_or(&[])
        }
    };
}

impl<F: Real> KSeries<F> {
    pub fn order(&self) -> usize {
        self.order
    }

    table_getter!(p12);
    table_getter!(q12);
    table_getter!(p22);
    table_getter!(q22);
    table_getter!(r22);
    table_getter!(p2);
    table_getter!(q2);
}

/// Build the coefficient tables through η^order. Requires derivative data
/// of H and h₋ at x̄ up to order + 2.
pub fn taylor_k<F: Real>(md: &MaxData<F>, order: usize) -> KSeries<F> {
    assert!(
        md.order() >= order + 2,
        "need derivatives to order {} (have {})",
        order + 2,
        md.order()
    );
    let k = md.k as usize;
    let nz = order;
    // z-series (Taylor coefficients at x̄) of the boundary data
    let coeff = |derivs: &[F], shift: usize, j: usize| -> F {
        derivs
            .get(j + shift)
            .map(|d| *d / factorial::<F>(j))
            .unwrap_or_else(F::zero)
    };
    let w: Vec<F> = (0..=nz).map(|j| coeff(&md.width, 0, j)).collect(); // H
    let u: Vec<F> = (0..=nz).map(|j| coeff(&md.lower, 1, j)).collect(); // h₋'
    let v: Vec<F> = (0..=nz).map(|j| coeff(&md.width, 1, j)).collect(); // H'
    let s: Vec<F> = (0..=nz).map(|j| coeff(&md.lower, 2, j)).collect(); // h₋''
    let t: Vec<F> = (0..=nz).map(|j| coeff(&md.width, 2, j)).collect(); // H''

    let winv = recip_trunc(&w, nz);
    let winv2 = mul_trunc(&winv, &winv, nz);
    let uw = mul_trunc(&u, &winv, nz);
    let vw = mul_trunc(&v, &winv, nz);
    let u2w2 = mul_trunc(&mul_trunc(&u, &u, nz), &winv2, nz);
    let uvw2 = mul_trunc(&mul_trunc(&u, &v, nz), &winv2, nz);
    let v2w2 = mul_trunc(&mul_trunc(&v, &v, nz), &winv2, nz);
    let sw = mul_trunc(&s, &winv, nz);
    let tw = mul_trunc(&t, &winv, nz);
    // P₂ generator: h''/H - 2 h' H'/H²; Q₂ generator: 2 H'²/H² - H''/H
    let p2_gen: Vec<F> = (0..=nz)
        .map(|j| sw[j] - F::lit(2.0) * uvw2[j])
        .collect();
    let q2_gen: Vec<F> = (0..=nz)
        .map(|j| F::lit(2.0) * v2w2[j] - tw[j])
        .collect();

    let empty: Vec<Poly<F>> = vec![Vec::new(); order + 1];
    let mut ks = KSeries {
        order,
        p12: empty.clone(),
        q12: empty.clone(),
        p22: empty.clone(),
        q22: empty.clone(),
        r22: empty.clone(),
        p2: empty.clone(),
        q2: empty,
    };
    for i in 0..=order {
        // K₁₂ carries the global η^{2k+1}; z-degree j maps to ξ₁^j η^j
        if let Some(j) = i.checked_sub(2 * k + 1) {
            ks.p12[i] = monomial(j, uw[j]);
            ks.q12[i] = monomial(j, -vw[j]);
        }
        // K₂₂: the 1/H² part contributes from η^{2k} on; the squared-slope
        // part carries η^{2k+2}
        if i >= 2 * k {
            let mut p = monomial(i, winv2[i]);
            if let Some(j2) = i.checked_sub(2 * k + 2) {
                p[j2] += u2w2[j2];
                ks.q22[i] = monomial(j2, -F::lit(2.0) * uvw2[j2]);
                ks.r22[i] = monomial(j2, v2w2[j2]);
            }
            ks.p22[i] = p;
        }
        // K₂ carries the global η^{2k+2}
        if let Some(j3) = i.checked_sub(2 * k + 2) {
            ks.p2[i] = monomial(j3, p2_gen[j3]);
            ks.q2[i] = monomial(j3, q2_gen[j3]);
        }
    }
    ks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MaxData;

    fn sample_md() -> MaxData<f64> {
        // k = 1 data with every low-order derivative distinct
        MaxData::from_derivatives(
            0.4,
            1,
            vec![1.3, 0.0, -2.1, 0.7, 1.9, -0.8, 2.2, 0.0, 0.0, 0.0, 0.0],
            vec![0.6, 0.9, -1.2, 0.5, -0.3, 1.1, 0.4, 0.0, 0.0, 0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn low_order_tables() {
        let md = sample_md();
        let ks = taylor_k(&md, 6);
        let (h0, h2, h3, h4) = (md.width[0], md.width[2], md.width[3], md.width[4]);
        let (l1, l2) = (md.lower[1], md.lower[2]);
        // P₁₂^(3) = h₁/H₀, Q₁₂^(3) = 0
        assert!((ks.p12(3)[0] - l1 / h0).abs() < 1e-14);
        assert!(ks.q12(3)[0].abs() < 1e-14);
        // P₁₂^(4) = (h₂/H₀) ξ, Q₁₂^(4) = -(H₂/H₀) ξ
        assert!((ks.p12(4)[1] - l2 / h0).abs() < 1e-14);
        assert!((ks.q12(4)[1] + h2 / h0).abs() < 1e-14);
        // P₂₂^(2) = -2H₂ξ²/(2 H₀³); Q₂₂, R₂₂ vanish through order 4
        assert!((ks.p22(2)[2] + h2 / (h0 * h0 * h0)).abs() < 1e-14);
        assert!(ks.q22(2).is_empty() && ks.q22(3).is_empty() && ks.q22(4).iter().all(|c| c.abs() < 1e-14));
        assert!(ks.r22(4).iter().all(|c| c.abs() < 1e-14) || ks.r22(4).is_empty());
        // P₂₂^(4) = -2H₄ξ⁴/(4! H₀³) + 3H₂²ξ⁴/(4 H₀⁴) + h₁²/H₀²
        let want4 = -2.0 * h4 / (24.0 * h0.powi(3)) + 3.0 * h2 * h2 / (4.0 * h0.powi(4));
        assert!((ks.p22(4)[4] - want4).abs() < 1e-13);
        assert!((ks.p22(4)[0] - l1 * l1 / (h0 * h0)).abs() < 1e-14);
        // P₂^(4) = h₂/H₀, Q₂^(4) = -H₂/H₀
        assert!((ks.p2(4)[0] - l2 / h0).abs() < 1e-14);
        assert!((ks.q2(4)[0] + h2 / h0).abs() < 1e-14);
        // Q₁₂^(5) = -(H₃/(2H₀)) ξ²
        assert!((ks.q12(5)[2] + h3 / (2.0 * h0)).abs() < 1e-14);
    }

    #[test]
    fn order_five_and_six_tables() {
        let md = sample_md();
        let ks = taylor_k(&md, 6);
        let (h0, h2, h3, h4, h5, h6) = (
            md.width[0],
            md.width[2],
            md.width[3],
            md.width[4],
            md.width[5],
            md.width[6],
        );
        let (l1, l2, l3, l4) = (md.lower[1], md.lower[2], md.lower[3], md.lower[4]);
        // P₁₂^(5) = (h₃H₀ - h₁H₂)/(2H₀²) ξ²
        assert!((ks.p12(5)[2] - (l3 * h0 - l1 * h2) / (2.0 * h0 * h0)).abs() < 1e-13);
        // P₁₂^(6) = (h₄H₀ - h₁H₃ - 3h₂H₂)/(6H₀²) ξ³  — hold l4 etc
        let want = (l4 * h0 - l1 * h3 - 3.0 * l2 * h2) / (6.0 * h0 * h0);
        assert!((ks.p12(6)[3] - want).abs() < 1e-13);
        // Q₁₂^(6) = -(H₄H₀ - 3H₂²)/(6H₀²) ξ³
        assert!((ks.q12(6)[3] + (h4 * h0 - 3.0 * h2 * h2) / (6.0 * h0 * h0)).abs() < 1e-13);
        // P₂₂^(5) = 2h₁h₂/H₀² ξ + (H₂H₃/(2H₀⁴) - H₅/(60H₀³)) ξ⁵
        assert!((ks.p22(5)[1] - 2.0 * l1 * l2 / (h0 * h0)).abs() < 1e-13);
        let want5 = h2 * h3 / (2.0 * h0.powi(4)) - h5 / (60.0 * h0.powi(3));
        assert!((ks.p22(5)[5] - want5).abs() < 1e-13);
        // P₂₂^(6): ξ⁶ and ξ² parts
        let want6 = (45.0 * h4 * h2 * h0 - 180.0 * h2.powi(3) - h6 * h0 * h0
            + 30.0 * h3 * h3 * h0)
            / (360.0 * h0.powi(5));
        assert!((ks.p22(6)[6] - want6).abs() < 1e-12);
        let want6b = (l3 * l1 * h0 - l1 * l1 * h2 + l2 * l2 * h0) / (h0.powi(3));
        assert!((ks.p22(6)[2] - want6b).abs() < 1e-13);
        // Q₂₂^(5) = -2h₁H₂/H₀² ξ;  R₂₂^(5) = 0;  R₂₂^(6) = H₂²/H₀² ξ²
        assert!((ks.q22(5)[1] + 2.0 * l1 * h2 / (h0 * h0)).abs() < 1e-13);
        assert!(ks.r22(5).iter().all(|c| c.abs() < 1e-14));
        assert!((ks.r22(6)[2] - h2 * h2 / (h0 * h0)).abs() < 1e-13);
        // Q₂₂^(6) = -(h₁H₃ + 2h₂H₂)/H₀² ξ²
        assert!((ks.q22(6)[2] + (l1 * h3 + 2.0 * l2 * h2) / (h0 * h0)).abs() < 1e-13);
        // P₂^(5) = (h₃H₀ - 2h₁H₂)/H₀² ξ; Q₂^(5) = -(H₃/H₀) ξ
        assert!((ks.p2(5)[1] - (l3 * h0 - 2.0 * l1 * h2) / (h0 * h0)).abs() < 1e-13);
        assert!((ks.q2(5)[1] + h3 / h0).abs() < 1e-13);
        // P₂^(6) = (h₄H₀ - 5h₂H₂ - 2h₁H₃)/(2H₀²) ξ²
        let want = (l4 * h0 - 5.0 * l2 * h2 - 2.0 * l1 * h3) / (2.0 * h0 * h0);
        assert!((ks.p2(6)[2] - want).abs() < 1e-13);
        // Q₂^(6) = (5H₂² - H₄H₀)/(2H₀²) ξ²
        assert!((ks.q2(6)[2] - (5.0 * h2 * h2 - h4 * h0) / (2.0 * h0 * h0)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_profile_odd_tables_vanish() {
        // even width profile, symmetric split: all odd H and h derivatives zero
        let md = MaxData::from_derivatives(
            0.5,
            1,
            vec![1.0, 0.0, -2.0, 0.0, 1.5, 0.0, -0.9, 0.0],
            vec![0.5, 0.0, -1.0, 0.0, 0.75, 0.0, -0.45, 0.0],
        )
        .unwrap();
        let ks = taylor_k(&md, 5);
        assert!(ks.p22(5).iter().all(|c| c.abs() < 1e-14));
        assert!(ks.p12(5).iter().all(|c| c.abs() < 1e-14));
        assert!(ks.q2(5).iter().all(|c| c.abs() < 1e-14));
    }
}
