//! Bond splitting: eigendecomposition of the cross-side coupling into
//! symmetric (u) and antisymmetric (v) sectors, with zero-mode removal and a
//! balanced bond-dimension cap.

use ndarray::{s, Array2};

use crate::dense::{eig_desc, max_abs, LOG_2PI};
use crate::error::FreeTrgError;
use crate::state::FreeWeightState;

/// Result of splitting the cross-side coupling B = U diag(d) U^T with
/// U = [[u, v], [u, -v]] / sqrt(2).
#[derive(Debug, Clone)]
pub struct SplitData {
    /// Kept bond weights, u-sector first, each sector descending.
    pub d: Vec<f64>,
    /// chi x ku kept u-sector eigenvectors (columns).
    pub u: Array2<f64>,
    /// chi x kv kept v-sector eigenvectors (columns).
    pub v: Array2<f64>,
    pub ku: usize,
    pub kv: usize,
    /// Log of the splitting normalization rho = sqrt((2 pi)^chi' prod d).
    pub log_rho: f64,
    pub kept_count: usize,
    /// Modes dropped because their weight fell below zero_tol * max weight.
    pub discarded_zero_count: usize,
    /// Modes dropped by the chi_max cap.
    pub truncated_count: usize,
    /// Full u-sector spectrum before any dropping, descending.
    pub raw_u: Vec<f64>,
    /// Full v-sector spectrum before any dropping, descending.
    pub raw_v: Vec<f64>,
    /// chi x chi full u-sector rotation (columns ordered as raw_u).
    pub u_all: Array2<f64>,
    /// chi x chi full v-sector rotation (columns ordered as raw_v).
    pub v_all: Array2<f64>,
}

impl SplitData {
    pub fn chi_next(&self) -> usize {
        self.ku + self.kv
    }

    /// 2chi x chi' isometry U = [[u, v], [u, -v]] / sqrt(2) carrying the kept modes.
    pub fn rotation(&self) -> Array2<f64> {
        let chi = self.u.nrows();
        let chi2 = self.chi_next();
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Array2::zeros((2 * chi, chi2));
        for i in 0..chi {
            for k in 0..self.ku {
                out[[i, k]] = s2 * self.u[[i, k]];
                out[[chi + i, k]] = s2 * self.u[[i, k]];
            }
            for k in 0..self.kv {
                out[[i, self.ku + k]] = s2 * self.v[[i, k]];
                out[[chi + i, self.ku + k]] = -s2 * self.v[[i, k]];
            }
        }
        out
    }
}

/// Splits the cross-side coupling of `st`, keeping at most `chi_max` modes.
///
/// Sector spectra are computed from the P +- S blocks of B.  Modes with
/// weight below `zero_tol` times the largest weight are discarded as exact
/// zeros of the flow; if the survivors still exceed `chi_max`, both sectors
/// are cut to a common count (balanced truncation), which preserves the
/// sector pairing the later corner-structure diagnostics rely on.
pub fn split_free(
    st: &FreeWeightState,
    chi_max: usize,
    zero_tol: f64,
) -> Result<SplitData, FreeTrgError> {
    let chi = st.chi;
    let scale = max_abs(st.b.view()).max(1e-300);
    let p = st.b.slice(s![..chi, ..chi]).to_owned();
    let sblk = st.b.slice(s![..chi, chi..]).to_owned();

    // structural checks: B must be [[P, S], [S^T, P]] with S symmetric
    let dev_p = max_abs((&st.b.slice(s![chi.., chi..]) - &p).view()) / scale;
    if dev_p > 1e-9 {
        return Err(FreeTrgError::StructureViolation {
            block: "cross-coupling diagonal blocks".into(),
            deviation: dev_p,
        });
    }
    let dev_t = max_abs((&st.b.slice(s![chi.., ..chi]) - &sblk.t()).view()) / scale;
    if dev_t > 1e-9 {
        return Err(FreeTrgError::StructureViolation {
            block: "cross-coupling off-diagonal transpose".into(),
            deviation: dev_t,
        });
    }
    let dev_s = max_abs((&sblk - &sblk.t()).view()) / scale;
    if dev_s > 1e-9 {
        return Err(FreeTrgError::StructureViolation {
            block: "cross-coupling off-diagonal block symmetry".into(),
            deviation: dev_s,
        });
    }

    let (raw_u, u_all) = eig_desc((&p + &sblk).view())?;
    let (raw_v, v_all) = eig_desc((&p - &sblk).view())?;

    let dmax = raw_u
        .iter()
        .chain(raw_v.iter())
        .fold(0.0f64, |m, &x| m.max(x));
    let floor = zero_tol * dmax;
    let nu = raw_u.iter().filter(|&&x| x > floor).count();
    let nv = raw_v.iter().filter(|&&x| x > floor).count();
    let discarded_zero_count = 2 * chi - nu - nv;
    if nu + nv == 0 {
        return Err(FreeTrgError::DegenerateWeight { level: st.n });
    }

    // balanced cap: equal counts from each sector when over the limit
    let (ku, kv) = if nu + nv > chi_max {
        let half = chi_max / 2;
        let k = nu.min(half).min(nv.min(half));
        (k, k)
    } else {
        (nu, nv)
    };
    let truncated_count = (nu + nv) - (ku + kv);

    let d: Vec<f64> = raw_u[..ku].iter().chain(raw_v[..kv].iter()).copied().collect();
    let chi2 = ku + kv;
    let log_rho = 0.5 * (chi2 as f64 * LOG_2PI + d.iter().map(|x| x.ln()).sum::<f64>());

    Ok(SplitData {
        d,
        u: u_all.slice(s![.., ..ku]).to_owned(),
        v: v_all.slice(s![.., ..kv]).to_owned(),
        ku,
        kv,
        log_rho,
        kept_count: chi2,
        discarded_zero_count,
        truncated_count,
        raw_u,
        raw_v,
        u_all,
        v_all,
    })
}
