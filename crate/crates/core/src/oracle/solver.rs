//! Sparse symmetric eigensolver for the masked 5-point Laplacian.
//!
//! Smallest eigenpairs by block inverse iteration with Rayleigh–Ritz
//! extraction: each outer step solves (A - σ)x = b per block column with
//! conjugate gradients preconditioned by a no-fill incomplete Cholesky of
//! the shifted operator. The shift comes from the caller's eigenvalue
//! estimate and is halved on any sign of indefiniteness, falling back to
//! σ = 0 (where the operator is positive definite unconditionally).

use crate::num::Real;

pub(crate) const NO_NEIGHBOR: u32 = u32::MAX;

/// Matrix-free masked 5-point operator with constant stencil weights.
pub(crate) struct Stencil<F> {
    pub n: usize,
    pub cx: F,
    pub cy: F,
    /// Neighbor dof ids per row: [W, E, S, N]; NO_NEIGHBOR marks a
    /// Dirichlet side (the neighbor is outside the mask).
    pub nbr: Vec<[u32; 4]>,
}

impl<F: Real> Stencil<F> {
    pub fn diag(&self) -> F {
        F::lit(2.0) * (self.cx + self.cy)
    }

    /// y = (A - shift) x
    pub fn apply(&self, shift: F, x: &[F], y: &mut [F]) {
        let d = self.diag() - shift;
        for (r, nb) in self.nbr.iter().enumerate() {
            let mut acc = d * x[r];
            if nb[0] != NO_NEIGHBOR {
                acc -= self.cx * x[nb[0] as usize];
            }
            if nb[1] != NO_NEIGHBOR {
                acc -= self.cx * x[nb[1] as usize];
            }
            if nb[2] != NO_NEIGHBOR {
                acc -= self.cy * x[nb[2] as usize];
            }
            if nb[3] != NO_NEIGHBOR {
                acc -= self.cy * x[nb[3] as usize];
            }
            y[r] = acc;
        }
    }
}

/// No-fill incomplete Cholesky of (A - shift), with a diagonal boost retry
/// when the factorization hits a non-positive pivot.
struct Ic0<F> {
    d: Vec<F>,
}

impl<F: Real> Ic0<F> {
    fn factor(st: &Stencil<F>, shift: F) -> Self {
        let base = st.diag() - shift;
        let cx2 = st.cx * st.cx;
        let cy2 = st.cy * st.cy;
        let mut boost = F::zero();
        'retry: loop {
            let mut d = vec![F::zero(); st.n];
            for (r, nb) in st.nbr.iter().enumerate() {
                let mut v = base + boost;
                if nb[0] != NO_NEIGHBOR {
                    v -= cx2 / d[nb[0] as usize];
                }
                if nb[2] != NO_NEIGHBOR {
                    v -= cy2 / d[nb[2] as usize];
                }
                if v <= base * F::lit(1e-8) {
                    boost = if boost == F::zero() {
                        base * F::lit(0.005)
                    } else {
                        boost * F::lit(4.0)
                    };
                    continue 'retry;
                }
                d[r] = v;
            }
            return Ic0 { d };
        }
    }

    /// z = M⁻¹ r with M = (D + L) D⁻¹ (D + Lᵀ).
    fn solve(&self, st: &Stencil<F>, r: &[F], z: &mut [F], work: &mut [F]) {
        // forward: (D + L) u = r, L holds the -cx/-cy couplings to W and S
        for (row, nb) in st.nbr.iter().enumerate() {
            let mut acc = r[row];
            if nb[0] != NO_NEIGHBOR {
                acc += st.cx * work[nb[0] as usize];
            }
            if nb[2] != NO_NEIGHBOR {
                acc += st.cy * work[nb[2] as usize];
            }
            work[row] = acc / self.d[row];
        }
        // diagonal scaling and backward sweep: (D + Lᵀ) z = D u
        for (row, nb) in st.nbr.iter().enumerate().rev() {
            let mut acc = work[row] * self.d[row];
            if nb[1] != NO_NEIGHBOR {
                acc += st.cx * z[nb[1] as usize];
            }
            if nb[3] != NO_NEIGHBOR {
                acc += st.cy * z[nb[3] as usize];
            }
            z[row] = acc / self.d[row];
        }
    }
}

pub(crate) enum CgOutcome {
    Converged(usize),
    Indefinite,
    Stalled,
}

/// Preconditioned conjugate gradients on (A - shift) x = b; x holds the
/// initial guess on entry and the solution on exit.
#[allow(clippy::too_many_arguments)]
fn pcg<F: Real>(
    st: &Stencil<F>,
    ic: &Ic0<F>,
    shift: F,
    b: &[F],
    x: &mut [F],
    rtol: F,
    max_iter: usize,
    scratch: &mut Scratch<F>,
) -> CgOutcome {
    let n = st.n;
    let (r, z, p, ap, work) = scratch.five(n);
    st.apply(shift, x, ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    let bnorm = dot(b, b).sqrt().max(F::lit(1e-300));
    ic.solve(st, r, z, work);
    p.copy_from_slice(z);
    let mut rz = dot(r, z);
    for it in 0..max_iter {
        let rn = dot(r, r).sqrt();
        if rn <= rtol * bnorm {
            return CgOutcome::Converged(it);
        }
        st.apply(shift, p, ap);
        let pap = dot(p, ap);
        if pap <= F::zero() {
            return CgOutcome::Indefinite;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        ic.solve(st, r, z, work);
        let rz_new = dot(r, z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome::Stalled
}

struct Scratch<F> {
    buf: Vec<F>,
}

impl<F: Real> Scratch<F> {
    fn new(n: usize) -> Self {
        Scratch {
            buf: vec![F::zero(); 5 * n],
        }
    }

    fn five(&mut self, n: usize) -> (&mut [F], &mut [F], &mut [F], &mut [F], &mut [F]) {
        let (a, rest) = self.buf.split_at_mut(n);
        let (b, rest) = rest.split_at_mut(n);
        let (c, rest) = rest.split_at_mut(n);
        let (d, e) = rest.split_at_mut(n);
        (a, b, c, d, e)
    }
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (x, y)| acc + *x * *y)
}

fn norm<F: Real>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Deterministic filler for start vectors.
fn splitmix_fill<F: Real>(seed: u64, out: &mut [F]) {
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    for v in out.iter_mut() {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        *v = F::lit((z >> 11) as f64 / (1u64 << 53) as f64 - 0.5);
    }
}

/// Jacobi eigensolver for a small dense symmetric matrix (row-major).
/// Returns ascending eigenvalues and the rotation matrix (columns are
/// eigenvectors).
fn jacobi_small<F: Real>(a: &mut [F], m: usize) -> (Vec<F>, Vec<F>) {
    let mut v = vec![F::zero(); m * m];
    for i in 0..m {
        v[i * m + i] = F::one();
    }
    for _sweep in 0..60 {
        let mut off = F::zero();
        for i in 0..m {
            for j in i + 1..m {
                off += a[i * m + j] * a[i * m + j];
            }
        }
        if off.sqrt() <= F::lit(1e-14) {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == F::zero() {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let tau = (aqq - app) / (F::lit(2.0) * apq);
                let t = tau.signum() / (tau.abs() + (F::one() + tau * tau).sqrt());
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = t * c;
                for i in 0..m {
                    let aip = a[i * m + p];
                    let aiq = a[i * m + q];
                    a[i * m + p] = c * aip - s * aiq;
                    a[i * m + q] = s * aip + c * aiq;
                }
                for j in 0..m {
                    let apj = a[p * m + j];
                    let aqj = a[q * m + j];
                    a[p * m + j] = c * apj - s * aqj;
                    a[q * m + j] = s * apj + c * aqj;
                }
                for i in 0..m {
                    let vip = v[i * m + p];
                    let viq = v[i * m + q];
                    v[i * m + p] = c * vip - s * viq;
                    v[i * m + q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| a[i * m + i].partial_cmp(&a[j * m + j]).unwrap());
    let vals = order.iter().map(|&i| a[i * m + i]).collect();
    let mut vecs = vec![F::zero(); m * m];
    for (new, &old) in order.iter().enumerate() {
        for i in 0..m {
            vecs[i * m + new] = v[i * m + old];
        }
    }
    (vals, vecs)
}

pub(crate) struct EigenSolution<F> {
    pub values: Vec<F>,
    pub vectors: Vec<Vec<F>>,
    pub residuals: Vec<F>,
}

/// Smallest `count` eigenpairs of the masked operator.
pub(crate) fn smallest_eigenpairs<F: Real>(
    st: &Stencil<F>,
    count: usize,
    shift_estimate: Option<F>,
    seed: Option<&[F]>,
) -> Result<EigenSolution<F>, String> {
    let n = st.n;
    if n == 0 {
        return Err("empty interior".into());
    }
    let b = (count + 2).min(n);
    if count > n {
        return Err(format!("requested {count} modes from {n} unknowns"));
    }
    let mut cols: Vec<Vec<F>> = (0..b)
        .map(|c| {
            let mut v = vec![F::zero(); n];
            if c == 0 {
                if let Some(s) = seed {
                    v.copy_from_slice(s);
                }
                if norm(&v) <= F::lit(1e-12) {
                    splitmix_fill(1, &mut v);
                }
            } else {
                splitmix_fill(c as u64 + 1, &mut v);
            }
            v
        })
        .collect();
    orthonormalize(&mut cols);

    let mut sigma = shift_estimate
        .map(|l| F::lit(0.8) * l.max(F::zero()))
        .unwrap_or_else(F::zero);
    let mut ic = Ic0::factor(st, sigma);
    let mut scratch = Scratch::new(n);
    let mut ritz = vec![F::zero(); b];
    let mut resid = vec![F::infinity(); b];
    let mut locked = vec![false; b];
    let max_outer = 160;
    let mut sol = vec![F::zero(); n];
    let mut ax = vec![vec![F::zero(); n]; b];

    for _outer in 0..max_outer {
        // inverse-iteration sweep
        for (c, col) in cols.iter_mut().enumerate() {
            if locked[c] {
                continue;
            }
            let rel = if ritz[c] > F::zero() {
                resid[c] / ritz[c]
            } else {
                F::one()
            };
            let rtol = (rel * F::lit(0.05))
                .max(F::lit(1e-12))
                .min(F::lit(1e-2));
            sol.copy_from_slice(col);
            match pcg(st, &ic, sigma, col, &mut sol, rtol, 20_000, &mut scratch) {
                CgOutcome::Indefinite => {
                    // shift sits above the smallest eigenvalue: retreat
                    sigma = sigma * F::lit(0.5);
                    if sigma < F::lit(1e-8) {
                        sigma = F::zero();
                    }
                    ic = Ic0::factor(st, sigma);
                    for l in locked.iter_mut() {
                        *l = false;
                    }
                    break;
                }
                CgOutcome::Stalled => {
                    return Err("inner conjugate-gradient solve stalled".into());
                }
                CgOutcome::Converged(_) => {}
            }
            let nrm = norm(&sol);
            for (v, s) in col.iter_mut().zip(&sol) {
                *v = *s / nrm;
            }
        }
        orthonormalize(&mut cols);

        // Rayleigh-Ritz on the block
        let mut small = vec![F::zero(); b * b];
        for (c, col) in cols.iter().enumerate() {
            st.apply(F::zero(), col, &mut ax[c]);
        }
        for i in 0..b {
            for j in i..b {
                let v = dot(&cols[i], &ax[j]);
                small[i * b + j] = v;
                small[j * b + i] = v;
            }
        }
        let (vals, vecs) = jacobi_small(&mut small, b);
        // rotate the block and the cached products
        let rotate = |src: &[Vec<F>]| -> Vec<Vec<F>> {
            (0..b)
                .map(|new| {
                    let mut out = vec![F::zero(); n];
                    for (old, s) in src.iter().enumerate() {
                        let w = vecs[old * b + new];
                        if w != F::zero() {
                            for (o, v) in out.iter_mut().zip(s) {
                                *o += w * *v;
                            }
                        }
                    }
                    out
                })
                .collect()
        };
        cols = rotate(&cols);
        ax = rotate(&ax);
        ritz.copy_from_slice(&vals);

        let mut all_done = true;
        for c in 0..b {
            let mut rr = F::zero();
            for i in 0..n {
                let d = ax[c][i] - ritz[c] * cols[c][i];
                rr += d * d;
            }
            resid[c] = rr.sqrt();
            let tol = F::lit(1e-7) * ritz[c].abs().max(F::one());
            locked[c] = resid[c] <= tol;
            if c < count && !locked[c] {
                all_done = false;
            }
        }
        if all_done {
            return Ok(EigenSolution {
                values: ritz[..count].to_vec(),
                vectors: cols[..count].to_vec(),
                residuals: resid[..count].to_vec(),
            });
        }
    }
    Err("block inverse iteration did not converge".into())
}

fn orthonormalize<F: Real>(cols: &mut [Vec<F>]) {
    for c in 0..cols.len() {
        for prev in 0..c {
            let (head, tail) = cols.split_at_mut(c);
            let proj = dot(&head[prev], &tail[0]);
            for (v, w) in tail[0].iter_mut().zip(&head[prev]) {
                *v -= proj * *w;
            }
        }
        let nrm = norm(&cols[c]);
        if nrm > F::lit(1e-14) {
            for v in cols[c].iter_mut() {
                *v /= nrm;
            }
        } else {
            // degenerate start vector: refill deterministically
            splitmix_fill(97 + c as u64, &mut cols[c]);
            let nrm = norm(&cols[c]);
            for v in cols[c].iter_mut() {
                *v /= nrm;
            }
        }
    }
}
