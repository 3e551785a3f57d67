//! Truncated Taylor-series (jet) arithmetic for exact high-order derivatives.
//!
//! A [`Jet`] holds the normalized Taylor coefficients a_i = f^(i)(x)/i! of a
//! function at a base point. Arithmetic propagates them through the standard
//! product/quotient/chain-rule recurrences, so derivatives come out exact to
//! rounding — no finite differences anywhere. The recurrences used for the
//! elementary functions are the classical ones: for h = exp(g),
//! n h_n = Σ k g_k h_{n-k}; for h = g^p, n g_0 h_n = Σ (k(p+1)-n) g_k h_{n-k};
//! sin/cos propagate as a coupled pair.

use crate::expr::{BinaryOp, Constant, EvalError, Expr, Function};
use crate::num::{factorial, Real};

/// Default maximum derivative order accepted by [`Expr::jet`].
pub const DEFAULT_ORDER_CAP: usize = 16;

/// Taylor jet of a function at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<F> {
    x: F,
    /// coeffs[i] = f^(i)(x) / i!
    coeffs: Vec<F>,
}

impl<F: Real> Jet<F> {
    pub fn constant(x: F, value: F, order: usize) -> Self {
        let mut coeffs = vec![F::zero(); order + 1];
        coeffs[0] = value;
        Jet { x, coeffs }
    }

    pub fn variable(x: F, order: usize) -> Self {
        let mut coeffs = vec![F::zero(); order + 1];
        coeffs[0] = x;
        if order >= 1 {
            coeffs[1] = F::one();
        }
        Jet { x, coeffs }
    }

    pub fn from_coeffs(x: F, coeffs: Vec<F>) -> Self {
        assert!(!coeffs.is_empty());
        Jet { x, coeffs }
    }

    pub fn base_point(&self) -> F {
        self.x
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Normalized Taylor coefficient a_i.
    pub fn coeff(&self, i: usize) -> F {
        self.coeffs.get(i).copied().unwrap_or_else(F::zero)
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn value(&self) -> F {
        self.coeffs[0]
    }

    /// i-th derivative f^(i)(x) = i! a_i.
    pub fn derivative(&self, i: usize) -> F {
        self.coeff(i) * factorial::<F>(i)
    }

    /// All derivatives f^(0)..f^(order).
    pub fn derivatives(&self) -> Vec<F> {
        (0..=self.order()).map(|i| self.derivative(i)).collect()
    }

    fn zip(&self, other: &Self, f: impl Fn(F, F) -> F) -> Self {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        Jet {
            x: self.x,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    fn neg(&self) -> Self {
        Jet {
            x: self.x,
            coeffs: self.coeffs.iter().map(|&a| -a).collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![F::zero(); n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += self.coeffs[i] * other.coeffs[j];
            }
        }
        Jet { x: self.x, coeffs: out }
    }

    fn div(&self, other: &Self) -> Result<Self, EvalError> {
        let b0 = other.coeffs[0];
        if b0 == F::zero() {
            return Err(EvalError::Domain("division by a series with zero value".into()));
        }
        let n = self.coeffs.len();
        let mut out = vec![F::zero(); n];
        for i in 0..n {
            let mut acc = self.coeffs[i];
            for k in 1..=i {
                acc = acc - other.coeffs[k] * out[i - k];
            }
            out[i] = acc / b0;
        }
        Ok(Jet { x: self.x, coeffs: out })
    }

    fn sqrt(&self) -> Result<Self, EvalError> {
        let g0 = self.coeffs[0];
        let order = self.order();
        if g0 < F::zero() || (g0 == F::zero() && order >= 1) {
            return Err(EvalError::Domain(
                "sqrt requires a positive value for derivative evaluation".into(),
            ));
        }
        let h0 = g0.sqrt();
        let mut out = vec![F::zero(); order + 1];
        out[0] = h0;
        let two = F::lit(2.0);
        for n in 1..=order {
            let mut acc = self.coeffs[n];
            for k in 1..n {
                acc = acc - out[k] * out[n - k];
            }
            out[n] = acc / (two * h0);
        }
        Ok(Jet { x: self.x, coeffs: out })
    }

    fn exp(&self) -> Self {
        let order = self.order();
        let mut out = vec![F::zero(); order + 1];
        out[0] = self.coeffs[0].exp();
        for n in 1..=order {
            let mut acc = F::zero();
            for k in 1..=n {
                acc += F::of(k) * self.coeffs[k] * out[n - k];
            }
            out[n] = acc / F::of(n);
        }
        Jet { x: self.x, coeffs: out }
    }

    fn ln(&self) -> Result<Self, EvalError> {
        let g0 = self.coeffs[0];
        if g0 <= F::zero() {
            return Err(EvalError::Domain("log of a non-positive value".into()));
        }
        let order = self.order();
        let mut out = vec![F::zero(); order + 1];
        out[0] = g0.ln();
        for n in 1..=order {
            let mut acc = F::of(n) * self.coeffs[n];
            for k in 1..n {
                acc = acc - F::of(k) * out[k] * self.coeffs[n - k];
            }
            out[n] = acc / (F::of(n) * g0);
        }
        Ok(Jet { x: self.x, coeffs: out })
    }

    fn sin_cos(&self) -> (Self, Self) {
        let order = self.order();
        let mut s = vec![F::zero(); order + 1];
        let mut c = vec![F::zero(); order + 1];
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for n in 1..=order {
            let mut sa = F::zero();
            let mut ca = F::zero();
            for k in 1..=n {
                let kg = F::of(k) * self.coeffs[k];
                sa += kg * c[n - k];
                ca -= kg * s[n - k];
            }
            s[n] = sa / F::of(n);
            c[n] = ca / F::of(n);
        }
        (
            Jet { x: self.x, coeffs: s },
            Jet { x: self.x, coeffs: c },
        )
    }

    /// Integer power by repeated multiplication; valid for any base value.
    fn powi(&self, mut e: i64) -> Result<Self, EvalError> {
        let order = self.order();
        let invert = e < 0;
        if invert {
            e = -e;
        }
        let mut acc = Jet::constant(self.x, F::one(), order);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        if invert {
            Jet::constant(self.x, F::one(), order).div(&acc)
        } else {
            Ok(acc)
        }
    }

    /// Real power; requires a positive base value.
    fn powf(&self, p: F) -> Result<Self, EvalError> {
        let g0 = self.coeffs[0];
        if g0 <= F::zero() {
            return Err(EvalError::Domain(
                "real power requires a positive base value".into(),
            ));
        }
        let order = self.order();
        let mut out = vec![F::zero(); order + 1];
        out[0] = g0.powf(p);
        for n in 1..=order {
            let mut acc = F::zero();
            for k in 1..=n {
                let w = F::of(k) * (p + F::one()) - F::of(n);
                acc += w * self.coeffs[k] * out[n - k];
            }
            out[n] = acc / (F::of(n) * g0);
        }
        Ok(Jet { x: self.x, coeffs: out })
    }

    fn abs(&self) -> Result<Self, EvalError> {
        let g0 = self.coeffs[0];
        if g0 > F::zero() {
            Ok(self.clone())
        } else if g0 < F::zero() {
            Ok(self.neg())
        } else if self.order() == 0 {
            Ok(self.clone())
        } else {
            Err(EvalError::Domain("abs is not differentiable at zero".into()))
        }
    }

    /// Composition: the jet of f∘g from the jet of f at g(x) and the jet of
    /// g at x. `outer` must be based at `inner.value()`.
    pub fn compose(outer: &Jet<F>, inner: &Jet<F>) -> Jet<F> {
        let order = inner.order();
        // w = inner - inner(x): zero constant term
        let mut w = inner.coeffs.clone();
        w[0] = F::zero();
        // Horner in the series algebra: result = a_D; result = result*w + a_i
        let mut res = vec![F::zero(); order + 1];
        let top = order.min(outer.order());
        res[0] = outer.coeff(top);
        for i in (0..top).rev() {
            // res = res * w (truncated)
            let mut nxt = vec![F::zero(); order + 1];
            for a in 0..=order {
                if res[a] == F::zero() {
                    continue;
                }
                for b in 0..=order - a {
                    nxt[a + b] += res[a] * w[b];
                }
            }
            nxt[0] += outer.coeff(i);
            res = nxt;
        }
        Jet {
            x: inner.x,
            coeffs: res,
        }
    }
}

impl Expr {
    /// Jet of the expression at `x` up to `order` derivatives, using the
    /// default order cap.
    pub fn jet<F: Real>(&self, x: F, order: usize) -> Result<Jet<F>, EvalError> {
        self.jet_capped(x, order, DEFAULT_ORDER_CAP)
    }

    /// Jet with an explicit order cap, for callers that legitimately need
    /// deeper expansions.
    pub fn jet_capped<F: Real>(&self, x: F, order: usize, cap: usize) -> Result<Jet<F>, EvalError> {
        if order > cap {
            return Err(EvalError::OrderCap {
                requested: order,
                cap,
            });
        }
        let jet = self.jet_inner(x, order)?;
        if jet.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(EvalError::Domain("non-finite series coefficient".into()));
        }
        Ok(jet)
    }

    fn jet_inner<F: Real>(&self, x: F, order: usize) -> Result<Jet<F>, EvalError> {
        Ok(match self {
            Expr::Number(v) => Jet::constant(x, F::lit(*v), order),
            Expr::Var => Jet::variable(x, order),
            Expr::Const(Constant::Pi) => Jet::constant(x, F::PI(), order),
            Expr::Neg(a) => a.jet_inner(x, order)?.neg(),
            Expr::Binary(op, a, b) => {
                let aj = a.jet_inner(x, order)?;
                match op {
                    BinaryOp::Add => aj.add(&b.jet_inner(x, order)?),
                    BinaryOp::Sub => aj.sub(&b.jet_inner(x, order)?),
                    BinaryOp::Mul => aj.mul(&b.jet_inner(x, order)?),
                    BinaryOp::Div => aj.div(&b.jet_inner(x, order)?)?,
                    BinaryOp::Pow => {
                        let bj = b.jet_inner(x, order)?;
                        let varying = bj.coeffs[1..].iter().any(|&c| c != F::zero());
                        if varying {
                            // a^b = exp(b ln a); the base must stay positive
                            bj.mul(&aj.ln()?).exp()
                        } else {
                            let e = bj.value();
                            let rounded = e.round();
                            let near_int = (e - rounded).abs() <= F::lit(1e-12);
                            if near_int && rounded.abs() <= F::lit(512.0) {
                                aj.powi(rounded.to_i64().unwrap())?
                            } else {
                                aj.powf(e)?
                            }
                        }
                    }
                }
            }
            Expr::Call(func, a) => {
                let aj = a.jet_inner(x, order)?;
                match func {
                    Function::Sqrt => aj.sqrt()?,
                    Function::Sin => aj.sin_cos().0,
                    Function::Cos => aj.sin_cos().1,
                    Function::Exp => aj.exp(),
                    Function::Log => aj.ln()?,
                    Function::Abs => aj.abs()?,
                }
            }
        })
    }
}
