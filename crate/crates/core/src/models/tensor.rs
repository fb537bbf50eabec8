//! Coordinate Christoffel symbols and all-lower Riemann tensors.

use nalgebra::{DMatrix, DVector};

/// `Γ^k_{ij}` stored as `data[(k * n + i) * n + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        self.data[(k * self.n + i) * self.n + j] = value;
    }

    /// Levi-Civita symbols from the inverse metric and the partials `dg[l] = ∂_l g`.
    pub fn from_metric_derivatives(ginv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Self {
        let n = ginv.nrows();
        // first-kind symbols Γ_{ijm} = ½(∂_i g_{jm} + ∂_j g_{im} − ∂_m g_{ij})
        let mut first = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    first[(i * n + j) * n + m] =
                        0.5 * (dg[i][(j, m)] + dg[j][(i, m)] - dg[m][(i, j)]);
                }
            }
        }
        let mut out = Self::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let s: f64 = (0..n).map(|m| ginv[(k, m)] * first[(i * n + j) * n + m]).sum();
                    out.set(k, i, j, s);
                }
            }
        }
        out
    }

    /// `−Γ^k_{ij} a^i b^j`: the geodesic acceleration for `a = b = v`, the
    /// parallel-transport derivative of `b` along `a` otherwise.
    pub fn contract(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                let ai = a[i];
                if ai == 0.0 {
                    continue;
                }
                for j in 0..n {
                    s += self.get(k, i, j) * ai * b[j];
                }
            }
            -s
        })
    }

    /// Largest violation of the lower-index symmetry `Γ^k_{ij} = Γ^k_{ji}`.
    pub fn lower_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// All-lower curvature tensor `R_{abcd} = ⟨R(∂_a, ∂_b)∂_c, ∂_d⟩`, with the sign
/// convention that `R(u, w, w, u)` is the sectional curvature of an orthonormal pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    n: usize,
    data: Vec<f64>,
}

impl Riemann {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        out.data[((a * n + b) * n + c) * n + d] = f(a, b, c, d);
                    }
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    /// `R(x, y, z, w)` for coordinate vectors.
    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                let ab = x[a] * y[b];
                if ab == 0.0 {
                    continue;
                }
                for c in 0..n {
                    let abc = ab * z[c];
                    if abc == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        s += abc * w[d] * self.get(a, b, c, d);
                    }
                }
            }
        }
        s
    }

    /// The bilinear form `(x, y) ↦ R(x, v, v, y)` as an n×n coordinate matrix.
    pub fn jacobi_form(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |a, d| {
            let mut s = 0.0;
            for b in 0..n {
                for c in 0..n {
                    s += self.get(a, b, c, d) * v[b] * v[c];
                }
            }
            s
        })
    }

    /// Ricci tensor `Ric_{bc} = g^{ad} R_{abcd}`.
    pub fn ricci(&self, ginv: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |b, c| {
            let mut s = 0.0;
            for a in 0..n {
                for d in 0..n {
                    s += ginv[(a, d)] * self.get(a, b, c, d);
                }
            }
            s
        })
    }

    /// Largest violation of `R_{abcd} = −R_{bacd} = R_{cdab}`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let r = self.get(a, b, c, d);
                        worst = worst
                            .max((r + self.get(b, a, c, d)).abs())
                            .max((r - self.get(c, d, a, b)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of the first Bianchi identity `R_{abcd} + R_{bcad} + R_{cabd} = 0`.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = self.get(a, b, c, d) + self.get(b, c, a, d) + self.get(c, a, b, d);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Curvature from the Christoffel symbols and their partials `dgamma[i] = ∂_i Γ`,
/// lowered with `g`.
///
/// `R^l_{ijk} = ∂_i Γ^l_{jk} − ∂_j Γ^l_{ik} + Γ^l_{im} Γ^m_{jk} − Γ^l_{jm} Γ^m_{ik}`
/// is the component of `R(∂_i, ∂_j)∂_k` along `∂_l`.
pub fn riemann_from_christoffel(
    g: &DMatrix<f64>,
    gamma: &Christoffel,
    dgamma: &[Christoffel],
) -> Riemann {
    let n = g.nrows();
    let mut mixed = vec![0.0; n * n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut r = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                    for m in 0..n {
                        r += gamma.get(l, i, m) * gamma.get(m, j, k) - gamma.get(l, j, m) * gamma.get(m, i, k);
                    }
                    mixed[((l * n + i) * n + j) * n + k] = r;
                }
            }
        }
    }
    Riemann::from_fn(n, |i, j, k, d| {
        (0..n).map(|l| g[(d, l)] * mixed[((l * n + i) * n + j) * n + k]).sum()
    })
}
