//! Domain geometry: locating the point of maximal width and extracting the
//! derivative data that drives every expansion coefficient.
//!
//! A thin domain is described by two boundary profiles h₊, h₋ on [0,1]; the
//! width profile is H = h₊ + h₋. All asymptotics are governed by the unique
//! interior maximizer x̄ of H, the derivatives H_i of H and h_i of h₋ at x̄,
//! and the flatness order k (smallest k with H_{2k} < 0 while all lower
//! derivatives vanish).

use crate::expr::{parse, EvalError, Expr, ParseError};
use crate::jet::DEFAULT_ORDER_CAP;
use crate::num::Real;
use thiserror::Error;

/// The pair of boundary profiles defining a thin domain.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub h_plus: Expr,
    pub h_minus: Expr,
}

impl DomainSpec {
    pub fn new(h_plus: Expr, h_minus: Expr) -> Self {
        DomainSpec { h_plus, h_minus }
    }

    pub fn parse(h_plus: &str, h_minus: &str) -> Result<Self, ParseError> {
        Ok(DomainSpec {
            h_plus: parse(h_plus)?,
            h_minus: parse(h_minus)?,
        })
    }

    /// Width H(x) = h₊(x) + h₋(x).
    pub fn width<F: Real>(&self, x: F) -> Result<F, EvalError> {
        Ok(self.h_plus.eval(x)? + self.h_minus.eval(x)?)
    }
}

/// Derivative data of the width profile at its maximizer.
#[derive(Debug, Clone)]
pub struct MaxData<F> {
    /// Maximizer of H in (0,1).
    pub xbar: F,
    /// Flatness order: H_{2k} < 0, H_1 .. H_{2k-1} = 0.
    pub k: u32,
    /// Derivatives H_0 .. H_D of the width profile at x̄.
    pub width: Vec<F>,
    /// Derivatives h_0 .. h_D of the lower profile h₋ at x̄.
    pub lower: Vec<F>,
}

impl<F: Real> MaxData<F> {
    /// Highest derivative order carried.
    pub fn order(&self) -> usize {
        self.width.len() - 1
    }

    /// Build from raw derivative lists, enforcing the admissibility
    /// invariants. Both lists run from order 0 to the same order.
    pub fn from_derivatives(
        xbar: F,
        k: u32,
        width: Vec<F>,
        lower: Vec<F>,
    ) -> Result<Self, GeometryError> {
        assert_eq!(width.len(), lower.len(), "derivative lists must align");
        let need = 2 * k as usize;
        if width.len() <= need {
            return Err(GeometryError::NoAdmissibleK {
                max_order: width.len() - 1,
            });
        }
        if width[0] <= F::zero() {
            return Err(GeometryError::NonPositiveWidth {
                x: xbar.to_f64().unwrap_or(f64::NAN),
            });
        }
        let w2k = width[need];
        if w2k >= F::zero() {
            return Err(GeometryError::NoAdmissibleK {
                max_order: width.len() - 1,
            });
        }
        let tol = F::lit(1e-9) * w2k.abs();
        if width[1..need].iter().any(|w| w.abs() > tol) {
            return Err(GeometryError::NoAdmissibleK {
                max_order: width.len() - 1,
            });
        }
        Ok(MaxData {
            xbar,
            k,
            width,
            lower,
        })
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("width is non-positive inside (0,1) near x = {x}")]
    NonPositiveWidth { x: f64 },
    #[error("width is maximal at the domain endpoint near x = {x}")]
    EndpointMaximum { x: f64 },
    #[error("multiple global maxima within tolerance at x = {first} and x = {second}")]
    MultipleMaxima { first: f64, second: f64 },
    #[error("refinement of the maximum did not converge near x = {x}")]
    NewtonFailed { x: f64 },
    #[error("no admissible flatness order up to derivative order {max_order}")]
    NoAdmissibleK { max_order: usize },
}

/// Tunables for the maximum search.
#[derive(Debug, Clone)]
pub struct GeometryConfig {
    /// Number of interior samples in the dense scan.
    pub scan_points: usize,
    /// Minimum Newton refinement steps.
    pub newton_steps: usize,
    /// Relative threshold below which a derivative counts as zero,
    /// measured against |H_{2k}|.
    pub zero_rel_tol: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            scan_points: 4096,
            newton_steps: 3,
            zero_rel_tol: 1e-9,
        }
    }
}

/// Locate the unique interior maximizer of H with default settings.
pub fn locate_max<F: Real>(d: &DomainSpec) -> Result<F, GeometryError> {
    locate_max_with(d, &GeometryConfig::default())
}

pub fn locate_max_with<F: Real>(d: &DomainSpec, cfg: &GeometryConfig) -> Result<F, GeometryError> {
    let p = cfg.scan_points.max(16);
    let step = F::one() / F::of(p + 1);
    let mut xs = Vec::with_capacity(p);
    let mut vs = Vec::with_capacity(p);
    for i in 0..p {
        let x = F::of(i + 1) * step;
        let v = d.width(x)?;
        if v <= F::zero() {
            return Err(GeometryError::NonPositiveWidth {
                x: x.to_f64().unwrap_or(f64::NAN),
            });
        }
        xs.push(x);
        vs.push(v);
    }
    let m = vs.iter().cloned().fold(F::neg_infinity(), F::max);

    // Candidate brackets: local maxima of the scan, plateaus collapsed to
    // their midpoints, pre-filtered to near-global values.
    let keep = m - F::lit(1e-3) * m.abs().max(F::one());
    let is_cand = |i: usize| -> bool {
        let left = if i == 0 { true } else { vs[i] >= vs[i - 1] };
        let right = if i + 1 == p { true } else { vs[i] >= vs[i + 1] };
        left && right && vs[i] >= keep
    };
    let mut candidates: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < p {
        if is_cand(i) {
            let start = i;
            while i + 1 < p && is_cand(i + 1) {
                i += 1;
            }
            candidates.push((start + i) / 2);
        }
        i += 1;
    }

    // Newton refinement on H' using order-2 jets.
    let mut refined: Vec<(F, F, bool)> = Vec::new(); // (x, H(x), hit_edge)
    for &ci in &candidates {
        let mut x = xs[ci];
        let lo = (xs[ci] - F::lit(2.0) * step).max(step * F::lit(0.5));
        let hi = (xs[ci] + F::lit(2.0) * step).min(F::one() - step * F::lit(0.5));
        let mut hit_edge = false;
        let mut converged = false;
        for it in 0..cfg.newton_steps.max(3) + 9 {
            let hp = d.h_plus.jet(x, 2)?;
            let hm = d.h_minus.jet(x, 2)?;
            let d1 = hp.derivative(1) + hm.derivative(1);
            let d2 = hp.derivative(2) + hm.derivative(2);
            let scale = d2.abs().max(F::one());
            if d1.abs() < F::lit(1e-13) * scale && it >= cfg.newton_steps {
                converged = true;
                break;
            }
            if d2.abs() <= F::lit(1e-14) * d1.abs().max(F::one()) {
                // flat profile: the scan point is as good as it gets
                converged = d1.abs() < F::lit(1e-12) * scale;
                break;
            }
            let mut dx = -d1 / d2;
            let cap = step;
            if dx.abs() > cap {
                dx = cap * dx.signum();
            }
            x = x + dx;
            if x <= lo {
                x = lo;
                hit_edge = true;
                break;
            }
            if x >= hi {
                x = hi;
                hit_edge = true;
                break;
            }
        }
        let edge_of_domain = hit_edge && (x <= step || x >= F::one() - step);
        if !converged && !edge_of_domain && !hit_edge {
            return Err(GeometryError::NewtonFailed {
                x: x.to_f64().unwrap_or(f64::NAN),
            });
        }
        let v = d.width(x)?;
        refined.push((x, v, edge_of_domain));
    }

    let (best_idx, &(xbar, vbar, edge)) = refined
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .expect("scan produced no candidates");
    if edge {
        return Err(GeometryError::EndpointMaximum {
            x: xbar.to_f64().unwrap_or(f64::NAN),
        });
    }

    // Reject separated ties: a second refined maximum with the same height.
    let tie = F::lit(1e-9) * vbar.abs().max(F::one());
    for (j, &(xc, vc, _)) in refined.iter().enumerate() {
        if j != best_idx && (xc - xbar).abs() > F::lit(1e-6) && vc >= vbar - tie {
            return Err(GeometryError::MultipleMaxima {
                first: xbar.to_f64().unwrap_or(f64::NAN),
                second: xc.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(xbar)
}

/// Locate the maximum and extract derivative data up to `order`.
pub fn max_data<F: Real>(d: &DomainSpec, order: usize) -> Result<MaxData<F>, GeometryError> {
    max_data_with(d, order, &GeometryConfig::default())
}

pub fn max_data_with<F: Real>(
    d: &DomainSpec,
    order: usize,
    cfg: &GeometryConfig,
) -> Result<MaxData<F>, GeometryError> {
    let xbar: F = locate_max_with(d, cfg)?;
    let cap = order.max(DEFAULT_ORDER_CAP);
    let hp = d.h_plus.jet_capped(xbar, order, cap)?;
    let hm = d.h_minus.jet_capped(xbar, order, cap)?;
    let width: Vec<F> = (0..=order)
        .map(|i| hp.derivative(i) + hm.derivative(i))
        .collect();
    let lower: Vec<F> = (0..=order).map(|i| hm.derivative(i)).collect();

    // Smallest k with H_{2k} significantly negative and all lower
    // derivatives negligible relative to it.
    let floor = F::lit(1e-12) * width[0].abs().max(F::one());
    for k in 1..=order / 2 {
        let w2k = width[2 * k];
        if w2k < F::zero() && w2k.abs() > floor {
            let tol = F::lit(cfg.zero_rel_tol) * w2k.abs();
            if width[1..2 * k].iter().all(|w| w.abs() <= tol) {
                return Ok(MaxData {
                    xbar,
                    k: k as u32,
                    width,
                    lower,
                });
            }
        }
    }
    Err(GeometryError::NoAdmissibleK { max_order: order })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> DomainSpec {
        DomainSpec::parse("sqrt(x - x^2)", "sqrt(x - x^2)").unwrap()
    }

    #[test]
    fn disk_maximum_is_centered() {
        let x: f64 = locate_max(&disk()).unwrap();
        assert!((x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lemniscate_maximum() {
        let h = "sqrt(-1/2 - x^2 + sqrt(1 + 8*x^2)/2)";
        let d = DomainSpec::parse(h, h).unwrap();
        let x: f64 = locate_max(&d).unwrap();
        let want = 3.0f64.sqrt() / (2.0 * 2.0f64.sqrt());
        assert!((x - want).abs() < 1e-11, "{x} vs {want}");
    }

    #[test]
    fn oscillatory_profile_global_maximum() {
        let d = DomainSpec::parse("1 + sin(7*pi*x/2)", "7*pi*(1-x)/4").unwrap();
        let x: f64 = locate_max(&d).unwrap();
        assert!((x - 2.0 / 21.0).abs() < 1e-11, "{x}");
    }

    #[test]
    fn disk_max_data() {
        let md: MaxData<f64> = max_data(&disk(), 6).unwrap();
        assert_eq!(md.k, 1);
        assert!((md.xbar - 0.5).abs() < 1e-12);
        for (i, want) in [1.0, 0.0, -4.0, 0.0, -48.0].iter().enumerate() {
            assert!(
                (md.width[i] - want).abs() < 1e-8 * want.abs().max(1.0),
                "H_{i} = {}",
                md.width[i]
            );
        }
        assert!(md.lower[1].abs() < 1e-10);
        assert!((md.lower[2] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn quartic_flat_top_is_k2() {
        let d = DomainSpec::parse("(1 - (x - 0.5)^4)/2", "(1 - (x - 0.5)^4)/2").unwrap();
        let md: MaxData<f64> = max_data(&d, 6).unwrap();
        assert_eq!(md.k, 2);
        assert!((md.width[4] + 24.0).abs() < 1e-9);
    }

    #[test]
    fn constant_width_has_no_admissible_k() {
        let d = DomainSpec::parse("0.5", "0.5").unwrap();
        let err = max_data::<f64>(&d, 8).unwrap_err();
        assert!(matches!(err, GeometryError::NoAdmissibleK { .. }));
    }

    #[test]
    fn endpoint_maximum_rejected() {
        let d = DomainSpec::parse("x + 0.1", "0").unwrap();
        let err = locate_max::<f64>(&d).unwrap_err();
        assert!(matches!(err, GeometryError::EndpointMaximum { .. }));
    }

    #[test]
    fn separated_ties_rejected() {
        // two equal humps at x = 0.3 and 0.7
        let d = DomainSpec::parse("1 - 40*((x-0.3)*(x-0.7))^2", "0").unwrap();
        let err = locate_max::<f64>(&d).unwrap_err();
        assert!(matches!(err, GeometryError::MultipleMaxima { .. }), "{err:?}");
    }

    #[test]
    fn nonpositive_width_detected() {
        let d = DomainSpec::parse("x - 0.5", "0").unwrap();
        let err = locate_max::<f64>(&d).unwrap_err();
        assert!(matches!(err, GeometryError::NonPositiveWidth { .. }));
    }

    #[test]
    fn from_derivatives_validates() {
        let md = MaxData::from_derivatives(0.5, 1, vec![1.0, 0.0, -4.0, 0.0], vec![0.5, 0.0, -2.0, 0.0]);
        assert!(md.is_ok());
        let bad = MaxData::from_derivatives(0.5, 1, vec![1.0, 0.5, -4.0, 0.0], vec![0.5, 0.0, -2.0, 0.0]);
        assert!(bad.is_err());
        let flat = MaxData::from_derivatives(0.5, 1, vec![1.0, 0.0, 4.0, 0.0], vec![0.5, 0.0, 2.0, 0.0]);
        assert!(flat.is_err());
    }
}
