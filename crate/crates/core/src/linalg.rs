//! Small dense linear-algebra helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GeomError, Result};

/// Frames whose Gram matrix departs from the identity by more than this are rejected.
pub const FRAME_TOL: f64 = 1e-8;

/// Axes whose normalized overlap with the span built so far exceeds this are skipped
/// when completing a frame.
const AXIS_PARALLEL_THRESHOLD: f64 = 0.9;

pub fn inner(g: &DMatrix<f64>, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
    (g * w).dot(u)
}

pub fn norm(g: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    inner(g, u, u).sqrt()
}

/// Replaces `m` by its symmetric part.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    max_abs(&(m - m.transpose()))
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// Eigen-decomposition with eigenvalues ascending and eigenvectors as matching columns.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Gram matrix `E^T g E` of the columns of `frame`.
pub fn gram(g: &DMatrix<f64>, frame: &DMatrix<f64>) -> DMatrix<f64> {
    frame.transpose() * g * frame
}

/// Largest deviation of `frame` from being g-orthonormal and g-orthogonal to `v`.
pub fn frame_deviation(g: &DMatrix<f64>, v: &DVector<f64>, frame: &DMatrix<f64>) -> f64 {
    let m = frame.ncols();
    let mut dev = max_abs(&(gram(g, frame) - DMatrix::identity(m, m)));
    let gv = g * v;
    for col in frame.column_iter() {
        dev = dev.max(col.dot(&gv).abs());
    }
    dev
}

/// Orthonormalizes `candidates` (in order) against `v` and against each other in
/// the metric `g`. Candidates whose residual norm falls below `FRAME_TOL` of their
/// original norm are reported as degenerate.
pub fn gram_schmidt(
    g: &DMatrix<f64>,
    v: &DVector<f64>,
    candidates: &[DVector<f64>],
) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let vv = inner(g, v, v);
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(candidates.len());
    for c in candidates {
        let before = norm(g, c);
        let mut w = c - v * (inner(g, c, v) / vv);
        for e in &out {
            w -= e * inner(g, &w, e);
        }
        let after = norm(g, &w);
        let conditioning = if before > 0.0 { after / before } else { 0.0 };
        if !(conditioning > FRAME_TOL) {
            return Err(GeomError::FrameDegenerate { conditioning });
        }
        out.push(w / after);
    }
    let mut frame = DMatrix::zeros(n, out.len());
    for (j, e) in out.iter().enumerate() {
        frame.set_column(j, e);
    }
    Ok(frame)
}

/// Completes unit `v` to a g-orthonormal basis of its orthogonal complement.
///
/// `leading` vectors are used first; the remaining slots are filled from the
/// chart coordinate axes, skipping axes nearly contained in the span so far;
/// if too many are skipped, the least overlapping axes fill the gap.
pub fn complete_frame(
    g: &DMatrix<f64>,
    v: &DVector<f64>,
    leading: &[DVector<f64>],
) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let mut basis: Vec<DVector<f64>> = vec![v.clone() / norm(g, v)];
    for l in leading {
        let frame = gram_schmidt(g, &basis[0], std::slice::from_ref(l))?;
        let mut e: DVector<f64> = frame.column(0).into_owned();
        for b in basis.iter().skip(1) {
            e -= b * inner(g, &e, b);
        }
        basis.push(e.clone() / norm(g, &e));
    }
    for axis in 0..n {
        if basis.len() == n {
            break;
        }
        let a = DVector::from_fn(n, |i, _| if i == axis { 1.0 } else { 0.0 });
        let an = norm(g, &a);
        let overlap: f64 = basis.iter().map(|b| (inner(g, &a, b) / an).powi(2)).sum::<f64>().sqrt();
        if overlap > AXIS_PARALLEL_THRESHOLD {
            continue;
        }
        let mut w = a;
        for _ in 0..2 {
            for b in &basis {
                w -= b * inner(g, &w, b);
            }
        }
        let wn = norm(g, &w);
        basis.push(w / wn);
    }
    // every remaining axis was near the span: take the least overlapping ones
    while basis.len() < n {
        let (w, wn) = (0..n)
            .map(|axis| {
                let mut w = DVector::from_fn(n, |i, _| if i == axis { 1.0 } else { 0.0 });
                let an = norm(g, &w);
                for _ in 0..2 {
                    for b in &basis {
                        w -= b * inner(g, &w, b);
                    }
                }
                let wn = norm(g, &w);
                (w, wn / an)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("n > 0");
        if !(wn > FRAME_TOL) {
            return Err(GeomError::FrameDegenerate { conditioning: wn });
        }
        let len = norm(g, &w);
        basis.push(w / len);
    }
    let mut frame = DMatrix::zeros(n, n - 1);
    for (j, e) in basis.iter().skip(1).enumerate() {
        frame.set_column(j, e);
    }
    Ok(frame)
}

/// Cholesky factor `L` with `g = L L^T`.
pub fn cholesky_lower(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    g.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| GeomError::InvalidParameter("metric is not positive definite".into()))
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
