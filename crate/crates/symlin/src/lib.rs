//! Deterministic dense linear algebra for real symmetric matrices.
//!
//! Everything downstream (flow recursions, loop kernels, truncation decisions,
//! golden files) depends on eigendecompositions being reproducible to the bit,
//! so the eigensolver is a fixed-order cyclic Jacobi iteration with a
//! deterministic descending sort and sign convention, rather than a
//! library routine with unspecified tie-breaking.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymlinError {
    #[error("non-finite entry at ({row}, {col})")]
    InvalidMatrix { row: usize, col: usize },
    #[error("singular matrix: eigenvalue {value:e} at index {index} not above the positive-definiteness tolerance")]
    SingularMatrix { index: usize, value: f64 },
    #[error("Jacobi iteration did not converge (off-diagonal norm {off_norm:e})")]
    NoConvergence { off_norm: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Dense real symmetric matrix; only the lower triangle is stored, so the
/// symmetry invariant `m[i][j] == m[j][i]` holds exactly by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    /// Lower triangle, row-major: entry (i, j) with j <= i at i(i+1)/2 + j.
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymMatrix dimension must be >= 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from a closure evaluated once per lower-triangle entry (j <= i).
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(dim: usize, mut f: F) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.data[i * (i + 1) / 2 + j] = f(i, j);
            }
        }
        m
    }

    /// Builds from a row-major dense buffer, requiring symmetry up to
    /// `tol * max|entry|` and storing the symmetrized average.
    pub fn from_dense_sym(dense: &[f64], dim: usize, tol: f64) -> Result<Self, SymlinError> {
        assert_eq!(dense.len(), dim * dim);
        let scale = dense.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1e-300);
        for i in 0..dim {
            for j in 0..i {
                let dev = (dense[i * dim + j] - dense[j * dim + i]).abs();
                if dev > tol * scale {
                    return Err(SymlinError::DimensionMismatch { left: i, right: j });
                }
            }
        }
        Ok(SymMatrix::from_fn(dim, |i, j| {
            0.5 * (dense[i * dim + j] + dense[j * dim + i])
        }))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.data[r * (r + 1) / 2 + c]
    }

    /// Sets (i, j) and (j, i) simultaneously.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.data[r * (r + 1) / 2 + c] = v;
    }

    pub fn frob_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let v = self.data[i * (i + 1) / 2 + j];
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.data[i * (i + 1) / 2 + j];
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    fn check_finite(&self) -> Result<(), SymlinError> {
        for i in 0..self.dim {
            for j in 0..=i {
                if !self.data[i * (i + 1) / 2 + j].is_finite() {
                    return Err(SymlinError::InvalidMatrix { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

/// Eigendecomposition of a symmetric matrix: descending eigenvalues and
/// orthonormal column eigenvectors under a deterministic sign convention.
#[derive(Debug, Clone)]
pub struct SymSpectrum {
    pub values: Vec<f64>,
    /// Column-major dim x dim; column k is the eigenvector of values[k].
    pub vectors: Vec<f64>,
    pub dim: usize,
}

impl SymSpectrum {
    #[inline]
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    /// V diag(values) V^T as a SymMatrix.
    pub fn recompose(&self) -> SymMatrix {
        let n = self.dim;
        SymMatrix::from_fn(n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                s += self.vectors[k * n + i] * self.values[k] * self.vectors[k * n + j];
            }
            s
        })
    }
}

const JACOBI_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 60;

/// Eigendecomposition by fixed-order cyclic Jacobi rotations.
///
/// Convergence is element-wise: a pair (p, q) is rotated while
/// |a_pq| > 1e-15 * sqrt(|a_pp a_qq|).  On graded positive definite matrices
/// this yields high relative accuracy for the small eigenvalues as well
/// (Demmel-Veselic), which the flow needs because its loop kernels span ten
/// orders of magnitude once near-zero bond weights are kept.
/// Ordering: eigenvalues descending; ties keep their pre-sort order.
/// Sign convention: the largest-magnitude component of each eigenvector is
/// made positive, ties broken toward the lowest index.
pub fn eig_sym(m: &SymMatrix) -> Result<SymSpectrum, SymlinError> {
    m.check_finite()?;
    let n = m.dim;
    let norm = m.frob_norm();
    let mut a = m.to_dense();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0; // column-major identity == row-major identity
    }

    if norm > 0.0 {
        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let mut rotations = 0usize;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    let thresh =
                        JACOBI_TOL * (a[p * n + p].abs() * a[q * n + q].abs()).sqrt();
                    if apq == 0.0 || apq.abs() <= thresh {
                        continue;
                    }
                    rotations += 1;
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = 0.5 * (aqq - app) / apq;
                    // tan of the rotation angle, smaller root for stability
                    let t = if theta.abs() > 1e150 {
                        0.5 / theta
                    } else {
                        let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                        sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);

                    a[p * n + p] = app - t * apq;
                    a[q * n + q] = aqq + t * apq;
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for i in 0..n {
                        if i != p && i != q {
                            let aip = a[i * n + p];
                            let aiq = a[i * n + q];
                            let nip = aip - s * (aiq + tau * aip);
                            let niq = aiq + s * (aip - tau * aiq);
                            a[i * n + p] = nip;
                            a[p * n + i] = nip;
                            a[i * n + q] = niq;
                            a[q * n + i] = niq;
                        }
                    }
                    // accumulate the rotation into the eigenvector columns
                    for i in 0..n {
                        let vip = v[p * n + i];
                        let viq = v[q * n + i];
                        v[p * n + i] = vip - s * (viq + tau * vip);
                        v[q * n + i] = viq + s * (vip - tau * viq);
                    }
                }
            }
            if rotations == 0 {
                converged = true;
                break;
            }
        }
        if !converged {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += 2.0 * a[p * n + q] * a[p * n + q];
                }
            }
            if off.sqrt() >= 1e-14 * norm {
                return Err(SymlinError::NoConvergence { off_norm: off.sqrt() });
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .expect("finite eigenvalues")
            .then(i.cmp(&j))
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        values.push(a[src * n + src]);
        let col = &mut vectors[dst * n..(dst + 1) * n];
        col.copy_from_slice(&v[src * n..(src + 1) * n]);
        let mut arg = 0usize;
        let mut best = -1.0;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best {
                best = x.abs();
                arg = i;
            }
        }
        if col[arg] < 0.0 {
            for x in col.iter_mut() {
                *x = -*x;
            }
        }
    }

    Ok(SymSpectrum { values, vectors, dim: n })
}

/// Default relative positive-definiteness tolerance: eigenvalues must exceed
/// 1e-12 times the largest eigenvalue.
pub const PD_TOLERANCE: f64 = 1e-12;

fn pd_spectrum(m: &SymMatrix, rel_tol: f64) -> Result<SymSpectrum, SymlinError> {
    let spec = eig_sym(m)?;
    let lead = spec.values[0];
    if lead <= 0.0 {
        return Err(SymlinError::SingularMatrix { index: 0, value: lead });
    }
    let floor = rel_tol * lead;
    for (k, &val) in spec.values.iter().enumerate() {
        if val <= floor {
            return Err(SymlinError::SingularMatrix { index: k, value: val });
        }
    }
    Ok(spec)
}

/// Inverse of a positive definite symmetric matrix via its spectrum.
pub fn inv_sym(m: &SymMatrix) -> Result<SymMatrix, SymlinError> {
    inv_sym_tol(m, PD_TOLERANCE)
}

pub fn inv_sym_tol(m: &SymMatrix, pd_rel_tol: f64) -> Result<SymMatrix, SymlinError> {
    let spec = pd_spectrum(m, pd_rel_tol)?;
    let n = m.dim;
    Ok(SymMatrix::from_fn(n, |i, j| {
        let mut s = 0.0;
        for k in 0..n {
            s += spec.vectors[k * n + i] * spec.vectors[k * n + j] / spec.values[k];
        }
        s
    }))
}

/// Log-determinant of a positive definite symmetric matrix.
pub fn logdet_sym(m: &SymMatrix) -> Result<f64, SymlinError> {
    logdet_sym_tol(m, PD_TOLERANCE)
}

pub fn logdet_sym_tol(m: &SymMatrix, pd_rel_tol: f64) -> Result<f64, SymlinError> {
    let spec = pd_spectrum(m, pd_rel_tol)?;
    Ok(spec.values.iter().map(|v| v.ln()).sum())
}
