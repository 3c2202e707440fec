//! Gaussian weight state carried along the coarse-graining flow.
//!
//! A level-n tensor has four legs, each a chi-component field.  Variables are
//! kept in slot order (x1, x2, x4, x3): the left side holds legs (x1, x2),
//! the right side legs (x4, x3).  The tensor is
//! exp(-1/2 x^T M x) with M = [[A+B, -B], [-B, A+B]], where the side form is
//! A = 1/2 I2 (x) diag(d_prev^-1) + [[a, -a], [-a, a]].

use ndarray::Array2;

/// One plaquette's quadratic form in cyclic leg order (x1, x2, x3, x4):
/// sum over the four edges (x_c - x_{c+1})^2 plus (m2/2) x_c^2 per corner,
/// all under the global -1/2 in the exponent.
///
/// This stamp is the single definition of the microscopic weight; both the
/// flow initialization and the brute-force torus builders consume it.
pub fn plaquette_form(m2: f64) -> Array2<f64> {
    let d = 2.0 + 0.5 * m2;
    let mut m = Array2::zeros((4, 4));
    for c in 0..4 {
        m[[c, c]] = d;
        m[[c, (c + 1) % 4]] = -1.0;
        m[[(c + 1) % 4, c]] = -1.0;
    }
    m
}

/// Order of the lattice legs (0-indexed) across the four storage slots.
pub const SLOT_LEG: [usize; 4] = [0, 1, 3, 2];

#[derive(Debug, Clone)]
pub struct FreeWeightState {
    /// Number of coarse-graining steps applied so far.
    pub n: usize,
    /// Per-leg field dimension.
    pub chi: usize,
    /// Inverse bond weights from the previous split; at n = 0 the sentinel
    /// value [m2] makes the side form reproduce the microscopic plaquette.
    pub dinv_prev: Vec<f64>,
    /// Sizes of the symmetric/antisymmetric sectors of the split that produced
    /// this basis; `dinv_prev` stores the symmetric-sector weights first.
    pub ku_prev: usize,
    pub kv_prev: usize,
    /// chi x chi symmetric in-side coupling.
    pub a: Array2<f64>,
    /// 2chi x 2chi symmetric cross-side coupling, block form [[P, S], [S^T, P]].
    pub b: Array2<f64>,
    /// Accumulated per-site log normalization, sum over levels of kappa / 2^level.
    pub log_norm: f64,
    /// Pending per-tensor log prefactor set by `rescale`; absorbed into the
    /// next kappa (or the closure trace), leaving observables unchanged.
    pub extra_log_scale: f64,
}

/// Level-0 state for bare mass-squared m2.
///
/// The parameterized form is verified against the plaquette stamp on every
/// call, so the two can never drift apart.
pub fn init_free(m2: f64) -> FreeWeightState {
    assert!(
        m2 > 0.0 && m2.is_finite(),
        "mass-squared must be positive and finite"
    );
    let st = FreeWeightState {
        n: 0,
        chi: 1,
        dinv_prev: vec![m2],
        ku_prev: 1,
        kv_prev: 0,
        a: Array2::from_elem((1, 1), 1.0),
        b: Array2::eye(2),
        log_norm: 0.0,
        extra_log_scale: 0.0,
    };
    let m = st.full_form();
    let p = plaquette_form(m2);
    for s in 0..4 {
        for t in 0..4 {
            let dev = (m[[s, t]] - p[[SLOT_LEG[s], SLOT_LEG[t]]]).abs();
            assert!(dev < 1e-14, "level-0 form disagrees with the plaquette stamp");
        }
    }
    st
}

impl FreeWeightState {
    /// Side form A = 1/2 I2 (x) diag(d_prev^-1) + [[a, -a], [-a, a]], size 2chi.
    ///
    /// At level 0 this is the two-fields-per-side plaquette face
    /// [[1 + m2/2, -1], [-1, 1 + m2/2]].
    pub fn side_form(&self) -> Array2<f64> {
        let chi = self.chi;
        let mut out = Array2::zeros((2 * chi, 2 * chi));
        for s in 0..2 {
            for i in 0..chi {
                out[[s * chi + i, s * chi + i]] = 0.5 * self.dinv_prev[i];
            }
        }
        for i in 0..chi {
            for j in 0..chi {
                let v = self.a[[i, j]];
                out[[i, j]] += v;
                out[[chi + i, chi + j]] += v;
                out[[i, chi + j]] -= v;
                out[[chi + i, j]] -= v;
            }
        }
        out
    }

    /// Full four-leg form M = [[A+B, -B], [-B, A+B]], size 4chi,
    /// slot order (x1, x2, x4, x3).
    pub fn full_form(&self) -> Array2<f64> {
        let w = 2 * self.chi;
        let a = self.side_form();
        let mut out = Array2::zeros((2 * w, 2 * w));
        for i in 0..w {
            for j in 0..w {
                let ab = a[[i, j]] + self.b[[i, j]];
                out[[i, j]] = ab;
                out[[w + i, w + j]] = ab;
                out[[i, w + j]] = -self.b[[i, j]];
                out[[w + i, j]] = -self.b[[i, j]];
            }
        }
        out
    }

    /// Multiplies the tensor by exp(log_c) while compensating the per-site
    /// normalization, so the represented partition function is unchanged.
    /// The carried factor is folded back into the constant of the next
    /// coarse-graining step (or the closing trace); observables stay
    /// invariant only if that propagation is exact, which is what the
    /// rescaling tests probe.
    pub fn rescale(&mut self, log_c: f64) {
        self.extra_log_scale += log_c;
        self.log_norm -= log_c / 2.0f64.powi(self.n as i32);
    }
}
