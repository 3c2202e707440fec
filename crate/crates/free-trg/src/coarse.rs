//! One coarse-graining step: integrate the four inner legs of a two-tensor
//! loop against the split isometries, then read the new (a, B) couplings off
//! the resulting quadratic form.  Also the torus closures that terminate a
//! flow.

use ndarray::{concatenate, s, Array2, Axis};

use crate::dense::{inv_pd, kron, kron_identity_diag, logdet_pd, max_abs, LOG_2PI};
use crate::error::FreeTrgError;
use crate::split::SplitData;
use crate::state::FreeWeightState;

/// Relative tolerance for the structural form of the coarse-grained couplings.
pub const STRUCTURE_TOL: f64 = 1e-9;

/// Quadratic kernel of the inner four-leg loop (q1..q4 cyclic) and the
/// couplings of the inner legs to the four new outer legs.
#[derive(Debug, Clone)]
pub struct LoopKernel {
    /// 4chi x 4chi inner form: I4 (x) diag(d_prev^-1) + circulant(2,-1,0,-1) (x) a.
    pub q: Array2<f64>,
    /// 4chi x 2chi' coupling to the left new side (p1', p2'); the q4 row
    /// block is structurally zero.
    pub c_left: Array2<f64>,
    /// 4chi x 2chi' coupling to the right new side (p4', p3'); the q2 row
    /// block is structurally zero.
    pub c_right: Array2<f64>,
}

pub fn build_loop_kernel(st: &FreeWeightState, sp: &SplitData) -> LoopKernel {
    let chi = st.chi;
    let circ = Array2::from_shape_vec(
        (4, 4),
        vec![
            2.0, -1.0, 0.0, -1.0, //
            -1.0, 2.0, -1.0, 0.0, //
            0.0, -1.0, 2.0, -1.0, //
            -1.0, 0.0, -1.0, 2.0,
        ],
    )
    .expect("4x4 circulant");
    let q = kron_identity_diag(4, &st.dinv_prev) + kron(circ.view(), st.a.view());

    let (ku, kv) = (sp.ku, sp.kv);
    let chi2 = ku + kv;
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut cl = Array2::zeros((4 * chi, 2 * chi2));
    let mut cr = Array2::zeros((4 * chi, 2 * chi2));
    // column layout per new side: [p_a' u-sector | p_a' v-sector | p_b' u | p_b' v]
    let put = |m: &mut Array2<f64>, row_blk: usize, col0: usize, sgn: f64, sec: &Array2<f64>| {
        let k = sec.ncols();
        for i in 0..chi {
            for c in 0..k {
                m[[row_blk * chi + i, col0 + c]] = sgn * s2 * sec[[i, c]];
            }
        }
    };
    let (u, v) = (&sp.u, &sp.v);
    // C_L rows q1..q3 (q4 empty): q1 -> (+u, +v| 0, 0); q2 -> (+u, -v| -u, +v); q3 -> (0, 0| -u, -v)
    put(&mut cl, 0, 0, 1.0, u);
    put(&mut cl, 0, ku, 1.0, v);
    put(&mut cl, 1, 0, 1.0, u);
    put(&mut cl, 1, ku, -1.0, v);
    put(&mut cl, 1, chi2, -1.0, u);
    put(&mut cl, 1, chi2 + ku, 1.0, v);
    put(&mut cl, 2, chi2, -1.0, u);
    put(&mut cl, 2, chi2 + ku, -1.0, v);
    // C_R rows q1, q3, q4 (q2 empty): q1 -> (-u, -v| 0, 0); q3 -> (0, 0| +u, +v); q4 -> (-u, +v| +u, -v)
    put(&mut cr, 0, 0, -1.0, u);
    put(&mut cr, 0, ku, -1.0, v);
    put(&mut cr, 2, chi2, 1.0, u);
    put(&mut cr, 2, chi2 + ku, 1.0, v);
    put(&mut cr, 3, 0, -1.0, u);
    put(&mut cr, 3, ku, 1.0, v);
    put(&mut cr, 3, chi2, 1.0, u);
    put(&mut cr, 3, chi2 + ku, -1.0, v);

    LoopKernel { q, c_left: cl, c_right: cr }
}

fn structure_check(block: &str, dev: f64) -> Result<(), FreeTrgError> {
    if dev > STRUCTURE_TOL {
        return Err(FreeTrgError::StructureViolation {
            block: block.into(),
            deviation: dev,
        });
    }
    Ok(())
}

/// Integrates the inner loop and returns the next-level state together with
/// the per-new-tensor log constant kappa.
///
/// The assembled form is required to reproduce the [[A'+B', -B'], [-B', A'+B']]
/// structure with A' in side-form shape, to within `STRUCTURE_TOL` relative.
pub fn coarse_grain(
    st: &FreeWeightState,
    sp: &SplitData,
) -> Result<(FreeWeightState, f64), FreeTrgError> {
    let kern = build_loop_kernel(st, sp);
    let chi2 = sp.chi_next();
    let qi = inv_pd(kern.q.view())?;
    let c = concatenate(Axis(1), &[kern.c_left.view(), kern.c_right.view()])
        .expect("row counts match");

    let dinv_next: Vec<f64> = sp.d.iter().map(|&x| 1.0 / x).collect();
    let mnext = kron_identity_diag(4, &dinv_next).mapv(|x| 0.5 * x) + c.t().dot(&qi).dot(&c);

    // read the couplings off the block structure and verify it
    let scale = max_abs(mnext.view()).max(1e-300);
    let sd = mnext.slice(s![..2 * chi2, ..2 * chi2]).to_owned();
    let bn_raw = mnext.slice(s![..2 * chi2, 2 * chi2..]).mapv(|x| -x);
    structure_check(
        "equal diagonal side blocks",
        max_abs((&mnext.slice(s![2 * chi2.., 2 * chi2..]) - &sd).view()) / scale,
    )?;
    structure_check(
        "cross-coupling symmetry",
        max_abs((&bn_raw - &bn_raw.t()).view()) / scale,
    )?;
    let bn = (&bn_raw + &bn_raw.t()).mapv(|x| 0.5 * x);

    let an = &sd - &bn;
    let an_off = an.slice(s![..chi2, chi2..]).mapv(|x| -x);
    let a_new = (&an_off + &an_off.t()).mapv(|x| 0.5 * x);
    let mut model = Array2::zeros((2 * chi2, 2 * chi2));
    for sblk in 0..2 {
        for i in 0..chi2 {
            model[[sblk * chi2 + i, sblk * chi2 + i]] = 0.5 * dinv_next[i];
        }
    }
    for i in 0..chi2 {
        for j in 0..chi2 {
            let v = a_new[[i, j]];
            model[[i, j]] += v;
            model[[chi2 + i, chi2 + j]] += v;
            model[[i, chi2 + j]] -= v;
            model[[chi2 + i, j]] -= v;
        }
    }
    structure_check(
        "side form a-decomposition",
        max_abs((&an - &model).view()) / max_abs(an.view()).max(1e-300),
    )?;

    let log_g = 2.0 * st.chi as f64 * LOG_2PI - 0.5 * logdet_pd(kern.q.view())?;
    let kappa = log_g - 2.0 * sp.log_rho + 2.0 * st.extra_log_scale;
    let new = FreeWeightState {
        n: st.n + 1,
        chi: chi2,
        dinv_prev: dinv_next,
        ku_prev: sp.ku,
        kv_prev: sp.kv,
        a: a_new,
        b: bn,
        log_norm: st.log_norm + kappa / 2.0f64.powi(st.n as i32 + 1),
        extra_log_scale: 0.0,
    };
    Ok((new, kappa))
}

/// Leg re-wiring that glues a second copy of the tensor onto the first so the
/// pair tiles the two-site torus: second-copy leg j attaches to link j+1
/// (cyclically), all with positive orientation.
pub fn torus_pairing_matrix(chi: usize) -> Array2<f64> {
    // slot order (x1, x2, x4, x3); second-copy slot s carries leg SLOT_LEG[s],
    // which lands on link perm[leg] of the first copy
    let slot_leg = [1usize, 2, 4, 3];
    let leg_slot = |leg: usize| match leg {
        1 => 0,
        2 => 1,
        4 => 2,
        3 => 3,
        _ => unreachable!(),
    };
    let perm = [2usize, 3, 4, 1];
    let mut e2 = Array2::zeros((4 * chi, 4 * chi));
    for s in 0..4 {
        let link = perm[slot_leg[s] - 1];
        let ls = leg_slot(link);
        for i in 0..chi {
            e2[[s * chi + i, ls * chi + i]] = 1.0;
        }
    }
    e2
}

/// Log trace of the two-tensor torus built from `st`:
/// 2 chi log(2 pi) - 1/2 log det(M + E^T M E).
pub fn close_trace(st: &FreeWeightState) -> Result<f64, FreeTrgError> {
    let m = st.full_form();
    let e2 = torus_pairing_matrix(st.chi);
    let mtot = &m + &e2.t().dot(&m).dot(&e2);
    let ld = logdet_pd(mtot.view())?;
    Ok(2.0 * st.chi as f64 * LOG_2PI - 0.5 * ld + 2.0 * st.extra_log_scale)
}

/// Log trace of the one-tensor torus: legs folded as x1 = x3, x2 = x4.
///
/// Exact for the level-0 plaquette (where it reproduces the one-site torus);
/// at later levels the two-tensor closure `close_trace` is the faithful one.
pub fn close_single_vertex(st: &FreeWeightState) -> Result<f64, FreeTrgError> {
    let chi = st.chi;
    let m = st.full_form();
    // fold map (x, y) -> slots (x, y, y, x)
    let mut p = Array2::zeros((4 * chi, 2 * chi));
    for i in 0..chi {
        p[[i, i]] = 1.0;
        p[[chi + i, chi + i]] = 1.0;
        p[[2 * chi + i, chi + i]] = 1.0;
        p[[3 * chi + i, i]] = 1.0;
    }
    let mf = p.t().dot(&m).dot(&p);
    let ld = logdet_pd(mf.view())?;
    Ok(chi as f64 * LOG_2PI - 0.5 * ld + st.extra_log_scale)
}
