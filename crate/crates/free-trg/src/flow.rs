//! Driver for the full free-field flow: repeated split / coarse-grain levels
//! followed by the two-tensor torus closure, with per-level records.

use crate::coarse::{close_trace, coarse_grain};
use crate::error::FreeTrgError;
use crate::split::{split_free, SplitData};
use crate::state::{init_free, FreeWeightState};

/// Default relative threshold below which a bond weight counts as an exact
/// zero of the flow.
pub const ZERO_TOL_DEFAULT: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct FlowParams {
    pub mass_squared: f64,
    /// Total halving levels K; the flow covers N = 2^K sites by running K - 1
    /// coarse-graining steps and closing the remaining two-tensor torus.
    pub levels: usize,
    pub chi_max: usize,
    pub zero_tol: f64,
}

impl FlowParams {
    pub fn new(mass_squared: f64, levels: usize, chi_max: usize) -> Self {
        FlowParams { mass_squared, levels, chi_max, zero_tol: ZERO_TOL_DEFAULT }
    }

    fn validate(&self) -> Result<(), FreeTrgError> {
        if !(self.mass_squared > 0.0 && self.mass_squared.is_finite()) {
            return Err(FreeTrgError::InvalidParams(
                "mass_squared must be positive and finite".into(),
            ));
        }
        if self.levels < 1 {
            return Err(FreeTrgError::InvalidParams("levels must be at least 1".into()));
        }
        if self.chi_max < 2 {
            return Err(FreeTrgError::InvalidParams("chi_max must be at least 2".into()));
        }
        if !(self.zero_tol >= 0.0 && self.zero_tol < 1.0) {
            return Err(FreeTrgError::InvalidParams("zero_tol must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LevelRecord {
    /// 1-based level index after the step.
    pub level: usize,
    pub chi_pre: usize,
    pub chi_post: usize,
    pub kappa: f64,
    /// Running per-site log normalization after this level.
    pub log_norm: f64,
    /// Kept bond weights, u-sector first (as used by the recursion).
    pub kept_weights: Vec<f64>,
    /// Full pre-drop spectrum, both sectors merged, descending.
    pub raw_weights: Vec<f64>,
    pub ku: usize,
    pub kv: usize,
    pub discarded_zero_count: usize,
    pub truncated_count: usize,
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    /// Free energy density f0 = -log Z / N at order lambda^0.
    pub f0: f64,
    pub records: Vec<LevelRecord>,
    pub final_state: FreeWeightState,
}

fn merged_desc(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(|x, y| y.partial_cmp(x).expect("finite weights"));
    all
}

/// Runs the flow, invoking `hook(level, state, split)` after every
/// coarse-graining step.  The hook may mutate the state (e.g. `rescale`);
/// the bookkeeping keeps f0 invariant under such rescalings.
pub fn run_free_flow_with<F>(params: &FlowParams, mut hook: F) -> Result<FlowResult, FreeTrgError>
where
    F: FnMut(usize, &mut FreeWeightState, &SplitData),
{
    params.validate()?;
    let mut st = init_free(params.mass_squared);
    let mut records = Vec::with_capacity(params.levels.saturating_sub(1));
    for _ in 0..params.levels - 1 {
        let sp = split_free(&st, params.chi_max, params.zero_tol)?;
        let chi_pre = st.chi;
        let (mut new, kappa) = coarse_grain(&st, &sp)?;
        hook(new.n, &mut new, &sp);
        records.push(LevelRecord {
            level: new.n,
            chi_pre,
            chi_post: new.chi,
            kappa,
            log_norm: new.log_norm,
            kept_weights: sp.d.clone(),
            raw_weights: merged_desc(&sp.raw_u, &sp.raw_v),
            ku: sp.ku,
            kv: sp.kv,
            discarded_zero_count: sp.discarded_zero_count,
            truncated_count: sp.truncated_count,
        });
        st = new;
    }
    let log_t = close_trace(&st)?;
    let f0 = -st.log_norm - log_t / 2.0f64.powi(params.levels as i32);
    Ok(FlowResult { f0, records, final_state: st })
}

pub fn run_free_flow(params: &FlowParams) -> Result<FlowResult, FreeTrgError> {
    run_free_flow_with(params, |_, _, _| {})
}
