//! Gaussian-moment engine for polynomials of degree four.
//!
//! Everything the perturbative flow needs from gaussian integration lives
//! here: second and fourth moments as sums over pairings, dense rank-4
//! tensor transports, and the reduction step that integrates the inner legs
//! of a quartic polynomial against a loop kernel while the surviving legs
//! are rewritten through an (optionally imaginary) linear shift.
//!
//! Arithmetic stays real throughout.  Imaginary dressings are tracked by an
//! integer i-power per index (`phase_weight`) plus a global sign rule in
//! [`gaussian_reduce`]: when the shift is imaginary, every term that keeps
//! exactly two legs picks up the factor i² = −1, terms keeping four legs
//! pick up i⁴ = +1, and fully contracted terms are untouched.  Odd numbers
//! of surviving legs cancel by parity, which is asserted, not assumed.

use free_trg::{dense, LoopKernel};
use ndarray::{concatenate, Array1, Array2, Array4, ArrayView2, ArrayView4, Axis};
use symlin::{SymMatrix, SymlinError};
use thiserror::Error;

/// Relative weight above which odd-parity coefficients are considered a
/// bookkeeping bug rather than rounding noise.
pub const PARITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum WickError {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("phase weight {value} at index {index} must be 0 or 1")]
    InvalidPhase { index: usize, value: u8 },
    #[error(
        "coefficients with odd total i-power reach {residual:e} against norm {norm:e}; \
         a real polynomial cannot carry them"
    )]
    ParityViolation { residual: f64, norm: f64 },
    #[error(transparent)]
    Linalg(#[from] SymlinError),
}

/// Real polynomial of degree ≤ 4 with even-degree terms only:
/// c0 + Σ c2_{ij} x_i x_j + Σ c4_{ijkl} x_i x_j x_k x_l.
///
/// `c2` is symmetric and `c4` is invariant under all 24 leg permutations;
/// the constructors symmetrize, the flow-facing operations preserve the
/// property.  Each index carries an integer power of i (`phase_weight`):
/// the represented polynomial has coefficient c·i^{Σ phases} on a monomial,
/// so a real polynomial must have even total phase on every nonzero entry.
#[derive(Debug, Clone)]
pub struct Polynomial4 {
    dim: usize,
    pub c0: f64,
    pub c2: Array2<f64>,
    pub c4: Array4<f64>,
    phase_weight: Vec<u8>,
}

impl Polynomial4 {
    /// Zero polynomial over `dim` real (phase-0) indices.
    pub fn zero(dim: usize) -> Self {
        Polynomial4 {
            dim,
            c0: 0.0,
            c2: Array2::zeros((dim, dim)),
            c4: Array4::zeros((dim, dim, dim, dim)),
            phase_weight: vec![0; dim],
        }
    }

    /// Zero polynomial with explicit per-index i-powers.
    pub fn zero_with_phases(phase_weight: Vec<u8>) -> Result<Self, WickError> {
        for (index, &value) in phase_weight.iter().enumerate() {
            if value > 1 {
                return Err(WickError::InvalidPhase { index, value });
            }
        }
        let dim = phase_weight.len();
        Ok(Polynomial4 {
            phase_weight,
            ..Polynomial4::zero(dim)
        })
    }

    /// Builds from raw coefficient blocks, symmetrizing both.
    pub fn from_parts(
        c0: f64,
        c2: Array2<f64>,
        c4: Array4<f64>,
        phase_weight: Vec<u8>,
    ) -> Result<Self, WickError> {
        let dim = phase_weight.len();
        if c2.dim() != (dim, dim) {
            return Err(WickError::DimensionMismatch {
                expected: dim,
                found: c2.nrows(),
            });
        }
        if c4.dim() != (dim, dim, dim, dim) {
            return Err(WickError::DimensionMismatch {
                expected: dim,
                found: c4.dim().0,
            });
        }
        let mut p = Polynomial4::zero_with_phases(phase_weight)?;
        p.c0 = c0;
        p.c2 = symmetrize2(c2.view());
        p.c4 = symmetrize4(c4.view());
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phase_weight(&self) -> &[u8] {
        &self.phase_weight
    }

    /// Euclidean norm over all coefficients.
    pub fn coeff_norm(&self) -> f64 {
        let s2: f64 = self.c2.iter().map(|x| x * x).sum();
        let s4: f64 = self.c4.iter().map(|x| x * x).sum();
        (self.c0 * self.c0 + s2 + s4).sqrt()
    }

    /// Largest |coefficient| sitting on a monomial with odd total i-power.
    /// Zero for an honestly real polynomial.
    pub fn phase_parity_residual(&self) -> f64 {
        let ph = &self.phase_weight;
        let mut worst = 0.0f64;
        for ((i, j), &v) in self.c2.indexed_iter() {
            if (ph[i] + ph[j]) % 2 == 1 {
                worst = worst.max(v.abs());
            }
        }
        for ((i, j, k, l), &v) in self.c4.indexed_iter() {
            if (ph[i] + ph[j] + ph[k] + ph[l]) % 2 == 1 {
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    /// Evaluates the coefficient arithmetic at a real point, ignoring phases.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "evaluation point has wrong dimension");
        let xv = Array1::from(x.to_vec());
        let quad = xv.dot(&self.c2.dot(&xv));
        let mut quart = 0.0;
        for ((i, j, k, l), &v) in self.c4.indexed_iter() {
            if v != 0.0 {
                quart += v * x[i] * x[j] * x[k] * x[l];
            }
        }
        self.c0 + quad + quart
    }

    /// self += s * other; phases must agree.
    pub fn add_scaled(&mut self, other: &Polynomial4, s: f64) -> Result<(), WickError> {
        if other.dim != self.dim {
            return Err(WickError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        self.c0 += s * other.c0;
        self.c2.scaled_add(s, &other.c2);
        self.c4.scaled_add(s, &other.c4);
        Ok(())
    }
}

/// Average of a matrix and its transpose.
pub fn symmetrize2(c2: ArrayView2<f64>) -> Array2<f64> {
    (&c2 + &c2.t()).mapv(|x| 0.5 * x)
}

/// Average over all 24 leg permutations of a rank-4 tensor.
pub fn symmetrize4(c4: ArrayView4<f64>) -> Array4<f64> {
    const PERMS: [[usize; 4]; 24] = [
        [0, 1, 2, 3],
        [0, 1, 3, 2],
        [0, 2, 1, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
        [0, 3, 2, 1],
        [1, 0, 2, 3],
        [1, 0, 3, 2],
        [1, 2, 0, 3],
        [1, 2, 3, 0],
        [1, 3, 0, 2],
        [1, 3, 2, 0],
        [2, 0, 1, 3],
        [2, 0, 3, 1],
        [2, 1, 0, 3],
        [2, 1, 3, 0],
        [2, 3, 0, 1],
        [2, 3, 1, 0],
        [3, 0, 1, 2],
        [3, 0, 2, 1],
        [3, 1, 0, 2],
        [3, 1, 2, 0],
        [3, 2, 0, 1],
        [3, 2, 1, 0],
    ];
    let mut out: Array4<f64> = Array4::zeros(c4.dim());
    for perm in PERMS {
        let v = c4.view().permuted_axes(perm);
        out.zip_mut_with(&v, |o, &x| *o += x);
    }
    out.mapv(|x| x / 24.0)
}

/// Second moment (Q⁻¹)_{ij} of the gaussian with kernel Q; the argument is
/// the already-inverted kernel.
pub fn pair_moment(qinv: &SymMatrix, i: usize, j: usize) -> Result<f64, WickError> {
    let dim = qinv.dim();
    for index in [i, j] {
        if index >= dim {
            return Err(WickError::IndexOutOfRange { index, dim });
        }
    }
    Ok(qinv.get(i, j))
}

/// Fourth moment as the sum over the three pairings:
/// G_{ij}G_{kl} + G_{ik}G_{jl} + G_{il}G_{jk}.
pub fn quartic_moment(
    qinv: &SymMatrix,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> Result<f64, WickError> {
    let dim = qinv.dim();
    for index in [i, j, k, l] {
        if index >= dim {
            return Err(WickError::IndexOutOfRange { index, dim });
        }
    }
    let g = |a: usize, b: usize| qinv.get(a, b);
    Ok(g(i, j) * g(k, l) + g(i, k) * g(j, l) + g(i, l) * g(j, k))
}

/// tᵀ · c2 · t.
pub fn transport2(c2: ArrayView2<f64>, t: ArrayView2<f64>) -> Array2<f64> {
    t.t().dot(&c2.dot(&t))
}

fn mode_product_cycle(c: Array4<f64>, t: ArrayView2<f64>) -> Array4<f64> {
    // Contracts leg 0 with the rows of t, then rotates the legs so four
    // applications transport every leg and restore the original order.
    let (n0, n1, n2, n3) = c.dim();
    let m = t.ncols();
    let flat = c
        .into_shape((n0, n1 * n2 * n3))
        .expect("standard-layout reshape");
    let prod = t.t().dot(&flat);
    let rotated = prod
        .into_shape((m, n1, n2, n3))
        .expect("standard-layout reshape")
        .permuted_axes([1, 2, 3, 0]);
    rotated.as_standard_layout().to_owned()
}

/// Transports all four legs: out_{abcd} = Σ c4_{ijkl} t_{ia} t_{jb} t_{kc} t_{ld}.
pub fn transport4(c4: ArrayView4<f64>, t: ArrayView2<f64>) -> Array4<f64> {
    let mut cur = c4.as_standard_layout().to_owned();
    for _ in 0..4 {
        cur = mode_product_cycle(cur, t);
    }
    cur
}

/// Transports with a separate matrix per leg, in leg order.
pub fn transport4_mixed<'a>(
    c4: ArrayView4<f64>,
    t0: ArrayView2<'a, f64>,
    t1: ArrayView2<'a, f64>,
    t2: ArrayView2<'a, f64>,
    t3: ArrayView2<'a, f64>,
) -> Array4<f64> {
    let mut cur = c4.as_standard_layout().to_owned();
    for t in [t0, t1, t2, t3] {
        cur = mode_product_cycle(cur, t);
    }
    cur
}

/// Pairs the first two legs with a kernel: out_{kl} = Σ_{ij} c4_{ijkl} k_{ij}.
pub fn contract4_pair(c4: ArrayView4<f64>, k: ArrayView2<f64>) -> Array2<f64> {
    let (n0, n1, n2, n3) = c4.dim();
    let c = c4.as_standard_layout();
    let flat = c
        .view()
        .into_shape((n0 * n1, n2 * n3))
        .expect("standard-layout reshape");
    let kstd = k.as_standard_layout();
    let kflat = kstd
        .view()
        .into_shape(n0 * n1)
        .expect("standard-layout reshape");
    let out = flat.t().dot(&kflat);
    out.into_shape((n2, n3)).expect("standard-layout reshape")
}

/// Full double pairing Σ c4_{ijkl} k_{ij} k_{kl}.
pub fn contract4_full(c4: ArrayView4<f64>, k: ArrayView2<f64>) -> f64 {
    let paired = contract4_pair(c4, k);
    contract2_full(paired.view(), k)
}

/// Σ c2_{ij} k_{ij}.
pub fn contract2_full(c2: ArrayView2<f64>, k: ArrayView2<f64>) -> f64 {
    c2.iter().zip(k.iter()).map(|(a, b)| a * b).sum()
}

/// Linear rewrite of integrated-out fields in terms of the surviving outer
/// fields: inner_i = (i)^{imaginary} Σ_a matrix_{ia} outer_a.
#[derive(Debug, Clone)]
pub struct ShiftMap {
    matrix: Array2<f64>,
    imaginary: bool,
}

impl ShiftMap {
    pub fn new(matrix: Array2<f64>, imaginary: bool) -> Self {
        ShiftMap { matrix, imaginary }
    }

    /// The dressing Q⁻¹·[C_left | C_right] of a loop kernel, which is how an
    /// inner loop field re-expresses itself on the new outer legs; the shift
    /// is imaginary by construction.
    pub fn from_loop_kernel(kernel: &LoopKernel) -> Result<Self, WickError> {
        let qi = dense::inv_pd(kernel.q.view())?;
        let c = concatenate(Axis(1), &[kernel.c_left.view(), kernel.c_right.view()])
            .expect("coupling blocks share row count");
        Ok(ShiftMap {
            matrix: qi.dot(&c),
            imaginary: true,
        })
    }

    pub fn matrix(&self) -> ArrayView2<f64> {
        self.matrix.view()
    }

    pub fn is_imaginary(&self) -> bool {
        self.imaginary
    }

    pub fn inner_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn outer_dim(&self) -> usize {
        self.matrix.ncols()
    }
}

fn check_parity(p: &Polynomial4) -> Result<(), WickError> {
    let residual = p.phase_parity_residual();
    let norm = p.coeff_norm();
    if residual > PARITY_TOL * norm.max(f64::MIN_POSITIVE) {
        return Err(WickError::ParityViolation { residual, norm });
    }
    Ok(())
}

/// Integrates all inner legs of `p` against a gaussian with pair correlator
/// `correlator`, while every surviving occurrence of an inner field is
/// replaced through `shift`.  Returns the polynomial in the outer fields
/// with the stated phases.
///
/// For x = s·A·y + q with ⟨q qᵀ⟩ = K and s ∈ {1, i}:
///
/// - quartic part: transported through A, sign s⁴;
/// - quadratic part: 6·(c4 : K) + c2, transported, sign s²;
/// - constant part: 3·c4 :: K :: K + c2 : K + c0.
pub fn gaussian_reduce(
    p: &Polynomial4,
    correlator: ArrayView2<f64>,
    shift: &ShiftMap,
    out_phases: Vec<u8>,
) -> Result<Polynomial4, WickError> {
    if correlator.nrows() != p.dim() || correlator.ncols() != p.dim() {
        return Err(WickError::DimensionMismatch {
            expected: p.dim(),
            found: correlator.nrows(),
        });
    }
    if shift.inner_dim() != p.dim() {
        return Err(WickError::DimensionMismatch {
            expected: p.dim(),
            found: shift.inner_dim(),
        });
    }
    if out_phases.len() != shift.outer_dim() {
        return Err(WickError::DimensionMismatch {
            expected: shift.outer_dim(),
            found: out_phases.len(),
        });
    }
    check_parity(p)?;

    let a = shift.matrix();
    let sign = if shift.is_imaginary() { -1.0 } else { 1.0 };

    let c4_out = transport4(p.c4.view(), a);
    let cross = contract4_pair(p.c4.view(), correlator);
    let mut c2_out = transport2(cross.view(), a);
    c2_out *= 6.0;
    c2_out += &transport2(p.c2.view(), a);
    c2_out *= sign;
    let c0_out = 3.0 * contract4_full(p.c4.view(), correlator)
        + contract2_full(p.c2.view(), correlator)
        + p.c0;

    let mut out = Polynomial4::zero_with_phases(out_phases)?;
    out.c0 = c0_out;
    out.c2 = c2_out;
    out.c4 = c4_out;
    Ok(out)
}

/// Spec-level entry point: integrates the inner loop fields of `p` using the
/// loop kernel's quadratic form as the gaussian and the given dressing for
/// the surviving legs.  Output indices are the outer legs of the kernel
/// couplings, all real (phase 0).
pub fn integrate_polynomial(
    p: &Polynomial4,
    kernel: &LoopKernel,
    shift: &ShiftMap,
) -> Result<Polynomial4, WickError> {
    let qi = dense::inv_pd(kernel.q.view())?;
    let out_phases = vec![0; shift.outer_dim()];
    gaussian_reduce(p, qi.view(), shift, out_phases)
}

/// Full expectation ⟨P⟩ under the gaussian with pair correlator `correlator`:
/// c0 + c2 : K + 3·c4 :: K :: K.
pub fn expectation(p: &Polynomial4, correlator: ArrayView2<f64>) -> Result<f64, WickError> {
    if correlator.nrows() != p.dim() || correlator.ncols() != p.dim() {
        return Err(WickError::DimensionMismatch {
            expected: p.dim(),
            found: correlator.nrows(),
        });
    }
    check_parity(p)?;
    Ok(3.0 * contract4_full(p.c4.view(), correlator)
        + contract2_full(p.c2.view(), correlator)
        + p.c0)
}
