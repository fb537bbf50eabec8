//! Upper half-space charts `x_n > 0` with conformally flat metrics
//! `g = e^{2f} δ`, where `f = −ln(k x_n) + ε φ(x)`.
//!
//! With `ε = 0` this is real hyperbolic space of curvature `−k²`. The
//! perturbation `φ` is a smooth bump supported in a hyperbolic ball around
//! `(0, …, 0, h)`:
//!
//! ```text
//! u(x) = |x − c|² / (2 x_n h (cosh ρ − 1)),    φ = exp(1 − 1/(1 − u)) for u < 1
//! ```
//!
//! `u` equals `(cosh d − 1)/(cosh ρ − 1)` with `d` the hyperbolic (k = 1)
//! distance to the centre, so the support is the ball of radius `ρ`.

use nalgebra::{DMatrix, DVector};

use super::tensor::{Christoffel, Riemann};

/// Smallest admissible last coordinate.
///
/// Geodesics approach the boundary exponentially fast, `x_n ~ e^{−k|t|}`, so the
/// margin is set where curvature components (scaling as `x_n^{-4}`) still fit
/// in double precision rather than at a fixed small distance.
pub const HALF_SPACE_MARGIN: f64 = 1e-60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub center_height: f64,
    pub radius: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Self { amplitude: 0.05, center_height: 1.0, radius: 1.0 }
    }
}

impl Bump {
    fn scale(&self) -> f64 {
        1.0 / (2.0 * self.center_height * (self.radius.cosh() - 1.0))
    }

    fn center(&self, n: usize) -> DVector<f64> {
        let mut c = DVector::zeros(n);
        c[n - 1] = self.center_height;
        c
    }

    /// Normalized squared-distance coordinate; `< 1` exactly on the support.
    pub fn support_coordinate(&self, x: &DVector<f64>) -> f64 {
        let n = x.len();
        (x - self.center(n)).norm_squared() * self.scale() / x[n - 1]
    }

    /// Point at the centre height displaced along the first axis to support
    /// coordinate `1/4`, where the perturbation is anisotropic.
    pub fn interior_point(&self, n: usize) -> DVector<f64> {
        let mut x = self.center(n);
        x[0] += (0.25 * self.center_height / self.scale()).sqrt();
        x
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        profile(self.support_coordinate(x)).0
    }

    /// `(φ, ∇φ, Hess φ)` at `x`.
    fn jet(&self, x: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        let a = self.scale();
        let d = x - self.center(n);
        let q = d.norm_squared();
        let r = x[n - 1];
        let u = a * q / r;
        let (psi, dpsi, d2psi) = profile(u);
        if psi == 0.0 {
            return (0.0, DVector::zeros(n), DMatrix::zeros(n, n));
        }
        let mut du = &d * (2.0 * a / r);
        du[n - 1] -= a * q / (r * r);
        let mut hu = DMatrix::identity(n, n) * (2.0 * a / r);
        for i in 0..n {
            hu[(i, n - 1)] -= 2.0 * a * d[i] / (r * r);
            hu[(n - 1, i)] -= 2.0 * a * d[i] / (r * r);
        }
        hu[(n - 1, n - 1)] += 2.0 * a * q / (r * r * r);
        let grad = &du * dpsi;
        let hess = &du * du.transpose() * d2psi + hu * dpsi;
        (psi, grad, hess)
    }
}

/// `ψ(u) = exp(1 − 1/(1 − u))` on `u < 1`, zero beyond, with two derivatives.
fn profile(u: f64) -> (f64, f64, f64) {
    if u >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let w = 1.0 - u;
    let psi = (1.0 - 1.0 / w).exp();
    let dpsi = -psi / (w * w);
    let d2psi = psi / w.powi(4) - 2.0 * psi / w.powi(3);
    (psi, dpsi, d2psi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub k: f64,
    pub bump: Option<Bump>,
}

impl HalfSpace {
    pub fn in_domain(&self, x: &DVector<f64>) -> bool {
        x.iter().all(|c| c.is_finite()) && x[x.len() - 1] > HALF_SPACE_MARGIN
    }

    /// `(f, ∇f, Hess f)` for the log conformal factor.
    fn log_factor_jet(&self, x: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        let r = x[n - 1];
        let mut f = -(self.k * r).ln();
        let mut grad = DVector::zeros(n);
        grad[n - 1] = -1.0 / r;
        let mut hess = DMatrix::zeros(n, n);
        hess[(n - 1, n - 1)] = 1.0 / (r * r);
        if let Some(b) = &self.bump {
            if b.amplitude != 0.0 {
                let (p, dp, hp) = b.jet(x);
                f += b.amplitude * p;
                grad += dp * b.amplitude;
                hess += hp * b.amplitude;
            }
        }
        (f, grad, hess)
    }

    pub fn conformal_factor(&self, x: &DVector<f64>) -> f64 {
        (2.0 * self.log_factor_jet(x).0).exp()
    }

    pub fn metric(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        DMatrix::identity(n, n) * self.conformal_factor(x)
    }

    pub fn inverse_metric(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        DMatrix::identity(n, n) / self.conformal_factor(x)
    }

    pub fn metric_derivatives(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let n = x.len();
        let (f, grad, _) = self.log_factor_jet(x);
        let e2f = (2.0 * f).exp();
        (0..n).map(|l| DMatrix::identity(n, n) * (2.0 * grad[l] * e2f)).collect()
    }

    /// `Γ^k_{ij} = δ^k_i ∂_j f + δ^k_j ∂_i f − δ_{ij} ∂_k f`.
    pub fn christoffel(&self, x: &DVector<f64>) -> Christoffel {
        let n = x.len();
        let (_, grad, _) = self.log_factor_jet(x);
        let mut gamma = Christoffel::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = 0.0;
                    if k == i {
                        v += grad[j];
                    }
                    if k == j {
                        v += grad[i];
                    }
                    if i == j {
                        v -= grad[k];
                    }
                    gamma.set(k, i, j, v);
                }
            }
        }
        gamma
    }

    /// Closed-form curvature. The unperturbed chart uses the constant-curvature
    /// tensor `−k²(g_bc g_ad − g_ac g_bd)`; the perturbed one uses the conformal
    /// change formula `R = −e^{2f} (T ⊙ δ)` with
    /// `T = Hess f − df ⊗ df + ½|df|² δ`.
    pub fn riemann(&self, x: &DVector<f64>) -> Riemann {
        let n = x.len();
        match &self.bump {
            None => {
                let g = self.conformal_factor(x);
                let curvature = -self.k * self.k;
                Riemann::from_fn(n, |a, b, c, d| {
                    let delta = |i: usize, j: usize| if i == j { g } else { 0.0 };
                    curvature * (delta(b, c) * delta(a, d) - delta(a, c) * delta(b, d))
                })
            }
            Some(_) => {
                let (f, grad, hess) = self.log_factor_jet(x);
                let e2f = (2.0 * f).exp();
                let t = hess - &grad * grad.transpose()
                    + DMatrix::identity(n, n) * (0.5 * grad.norm_squared());
                let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
                Riemann::from_fn(n, |a, b, c, d| {
                    -e2f * (t[(a, d)] * delta(b, c) + t[(b, c)] * delta(a, d)
                        - t[(a, c)] * delta(b, d)
                        - t[(b, d)] * delta(a, c))
                })
            }
        }
    }

    /// Local coordinate length scale used to size finite-difference steps.
    pub fn length_scale(&self, x: &DVector<f64>) -> f64 {
        x[x.len() - 1]
    }
}
