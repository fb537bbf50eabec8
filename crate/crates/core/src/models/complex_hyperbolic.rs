//! Complex hyperbolic plane in horospherical (Heisenberg) coordinates
//! `(t, x, y, z) ∈ R⁴`:
//!
//! ```text
//! g = dt² + e^{2t}(dx² + dy²) + e^{4t}(dz + x dy − y dx)²
//! ```
//!
//! Holomorphic sectional curvature is −4, so real sectional curvatures range
//! over [−4, −1]. With the orthonormal frame
//! `E0 = ∂_t, E1 = e^{−t}(∂_x + y∂_z), E2 = e^{−t}(∂_y − x∂_z), E3 = e^{−2t}∂_z`
//! the parallel complex structure is `J E0 = E3`, `J E1 = E2`.

use nalgebra::{DMatrix, DVector};

use super::tensor::{Christoffel, Riemann};

pub const DIM: usize = 4;

/// Bound on `|t|` keeping `e^{4t}`-sized curvature components finite.
pub const MAX_ABS_T: f64 = 80.0;

/// Holomorphic sectional curvature of the shipped normalization.
pub const HOLOMORPHIC_CURVATURE: f64 = -4.0;

pub fn in_domain(p: &DVector<f64>) -> bool {
    p.iter().all(|c| c.is_finite()) && p[0].abs() <= MAX_ABS_T
}

fn contact_form(p: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![0.0, -p[2], p[1], 1.0])
}

pub fn metric(p: &DVector<f64>) -> DMatrix<f64> {
    let t = p[0];
    let w = contact_form(p);
    let mut g = (&w * w.transpose()) * (4.0 * t).exp();
    g[(0, 0)] += 1.0;
    g[(1, 1)] += (2.0 * t).exp();
    g[(2, 2)] += (2.0 * t).exp();
    g
}

pub fn metric_derivatives(p: &DVector<f64>) -> Vec<DMatrix<f64>> {
    let t = p[0];
    let e2 = (2.0 * t).exp();
    let e4 = (4.0 * t).exp();
    let w = contact_form(p);
    let ww = &w * w.transpose();

    let mut dt = &ww * (4.0 * e4);
    dt[(1, 1)] += 2.0 * e2;
    dt[(2, 2)] += 2.0 * e2;

    let sym = |a: DVector<f64>| (&a * w.transpose() + &w * a.transpose()) * e4;
    let dx = sym(DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]));
    let dy = sym(DVector::from_vec(vec![0.0, -1.0, 0.0, 0.0]));
    let dz = DMatrix::zeros(DIM, DIM);
    vec![dt, dx, dy, dz]
}

/// `g^{-1} = E E^T` for the orthonormal frame `E` of the module docs; exact
/// where LU inversion would lose everything to the `e^{4t}` conditioning.
pub fn inverse_metric(p: &DVector<f64>) -> DMatrix<f64> {
    let frame = orthonormal_frame(p);
    &frame * frame.transpose()
}

/// Columns `E0..E3`.
pub fn orthonormal_frame(p: &DVector<f64>) -> DMatrix<f64> {
    let (t, x, y) = (p[0], p[1], p[2]);
    let e1 = (-t).exp();
    let e2 = (-2.0 * t).exp();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, e1, 0.0, 0.0, //
            0.0, 0.0, e1, 0.0, //
            0.0, y * e1, -x * e1, e2,
        ],
    )
}

pub fn christoffel(p: &DVector<f64>) -> Christoffel {
    Christoffel::from_metric_derivatives(&inverse_metric(p), &metric_derivatives(p))
}

/// Complex structure as a (1,1)-tensor: column `b` is `J ∂_b`.
pub fn complex_structure(p: &DVector<f64>) -> DMatrix<f64> {
    let (t, x, y) = (p[0], p[1], p[2]);
    let e2 = (2.0 * t).exp();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, y * e2, -x * e2, -e2, //
            0.0, 0.0, -1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            1.0 / e2, -x, -y, 0.0,
        ],
    )
}

/// Closed-form curvature of constant holomorphic curvature `c = −4`:
///
/// ```text
/// R(X,Y)Z = (c/4)[⟨Y,Z⟩X − ⟨X,Z⟩Y + ⟨JY,Z⟩JX − ⟨JX,Z⟩JY + 2⟨X,JY⟩JZ]
/// ```
pub fn riemann(p: &DVector<f64>) -> Riemann {
    let g = metric(p);
    let j = complex_structure(p);
    // a[(b, c)] = ⟨J ∂_b, ∂_c⟩
    let a = j.transpose() * &g;
    let quarter = HOLOMORPHIC_CURVATURE / 4.0;
    Riemann::from_fn(DIM, |x, y, z, w| {
        quarter
            * (g[(y, z)] * g[(x, w)] - g[(x, z)] * g[(y, w)] + a[(y, z)] * a[(x, w)]
                - a[(x, z)] * a[(y, w)]
                + 2.0 * a[(y, x)] * a[(z, w)])
    })
}

/// Differential of the holomorphic isometry taking `p` to the origin: the
/// Heisenberg translation by `−(x, y, z)` followed by the dilation that
/// shifts `t` to zero. It maps the orthonormal frame at `p` onto the
/// coordinate frame at the origin.
pub fn recentering_differential(p: &DVector<f64>) -> DMatrix<f64> {
    let (t, x, y) = (p[0], p[1], p[2]);
    let e1 = t.exp();
    let e2 = (2.0 * t).exp();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, e1, 0.0, 0.0, //
            0.0, 0.0, e1, 0.0, //
            0.0, -y * e2, x * e2, e2,
        ],
    )
}
