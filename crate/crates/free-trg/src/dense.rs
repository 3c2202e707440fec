//! Bridges between rectangular `ndarray` blocks and the deterministic
//! symmetric eigensolver, plus the small Kronecker assemblies the flow uses.

use ndarray::{Array2, ArrayView2};
use symlin::{eig_sym, inv_sym_tol, logdet_sym_tol, SymMatrix, SymlinError};

/// Natural log of 2*pi, the per-field gaussian normalization constant.
pub const LOG_2PI: f64 = 1.8378770664093453;

/// Symmetry slack granted when converting computed (round-off symmetric)
/// matrices; genuine wiring bugs show up orders of magnitude above this.
pub const SYM_TOL: f64 = 1e-9;

pub fn sym_from_array(a: ArrayView2<f64>, tol: f64) -> Result<SymMatrix, SymlinError> {
    let n = a.nrows();
    let owned;
    let flat: &[f64] = match a.as_slice() {
        Some(s) => s,
        None => {
            owned = a.to_owned();
            owned.as_slice().expect("owned array is standard layout")
        }
    };
    SymMatrix::from_dense_sym(flat, n, tol)
}

pub fn array_from_sym(m: &SymMatrix) -> Array2<f64> {
    Array2::from_shape_vec((m.dim(), m.dim()), m.to_dense()).expect("shape matches")
}

/// Descending eigendecomposition of a symmetric matrix; column k of the
/// returned matrix is the eigenvector of value k.
pub fn eig_desc(a: ArrayView2<f64>) -> Result<(Vec<f64>, Array2<f64>), SymlinError> {
    let spec = eig_sym(&sym_from_array(a, SYM_TOL)?)?;
    let n = spec.dim;
    let mut vecs = Array2::zeros((n, n));
    for k in 0..n {
        let col = spec.vector(k);
        for i in 0..n {
            vecs[[i, k]] = col[i];
        }
    }
    Ok((spec.values, vecs))
}

// The flow's kernels are strictly positive definite by construction but
// deliberately graded (inverse bond weights span as many decades as zero_tol
// allows), so the positive-definiteness gate is pure positivity: a relative
// floor would reject genuine small eigenvalues.

pub fn inv_pd(a: ArrayView2<f64>) -> Result<Array2<f64>, SymlinError> {
    Ok(array_from_sym(&inv_sym_tol(&sym_from_array(a, SYM_TOL)?, 0.0)?))
}

pub fn logdet_pd(a: ArrayView2<f64>) -> Result<f64, SymlinError> {
    logdet_sym_tol(&sym_from_array(a, SYM_TOL)?, 0.0)
}

/// I_blocks (x) diag(d).
pub fn kron_identity_diag(blocks: usize, diag: &[f64]) -> Array2<f64> {
    let c = diag.len();
    let mut out = Array2::zeros((blocks * c, blocks * c));
    for b in 0..blocks {
        for (i, &v) in diag.iter().enumerate() {
            out[[b * c + i, b * c + i]] = v;
        }
    }
    out
}

/// Kronecker product of two dense blocks.
pub fn kron(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let s = a[[i, j]];
            if s != 0.0 {
                for p in 0..br {
                    for q in 0..bc {
                        out[[i * br + p, j * bc + q]] = s * b[[p, q]];
                    }
                }
            }
        }
    }
    out
}

pub fn max_abs(a: ArrayView2<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}
