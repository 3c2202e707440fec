//! Independent reference values for the 2D lattice boson.
//!
//! Three routes to the same physics, none of which touches the
//! coarse-graining recursion:
//! - brute force: assemble the full quadratic form on the link fields of a
//!   small g x g tensor torus and take its determinant directly;
//! - momentum sums: diagonalize the same torus by translation invariance;
//! - quadrature: the infinite-volume Brillouin-zone integral, evaluated on
//!   geometrically refined Gauss-Legendre panels that resolve the
//!   log-singular region near k = 0 as the mass goes to zero.
//!
//! The only shared ingredient with the flow code is the microscopic
//! plaquette stamp, so both sides are pinned to one definition of the model.

use free_trg::plaquette_form;
use ndarray::Array2;
use symlin::{inv_sym, logdet_sym, SymMatrix};
use thiserror::Error;

/// Natural log of 2*pi.
pub const LOG_2PI: f64 = 1.8378770664093453;

/// Largest link-field count the brute-force builders accept.
pub const BRUTE_LINK_CAP: usize = 32;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("brute-force torus capped at {cap} link fields; {g}x{g} needs {links}", cap = BRUTE_LINK_CAP)]
    TooManyLinks { g: usize, links: usize },
    #[error(transparent)]
    Linalg(#[from] symlin::SymlinError),
}

// ---------------------------------------------------------------- brute force

/// Quadratic form on the 2 g^2 link fields of a g x g tensor torus, assembled
/// by stamping the plaquette form once per tensor.
///
/// Link indexing: horizontal (i, j) -> 2 (i g + j), vertical -> 2 (i g + j) + 1.
/// Tensor (i, j) legs in cyclic order: h(i, j), v(i, j), h(i+1, j), v(i, j+1).
pub fn brute_force_form(g: usize, m2: f64) -> Result<Array2<f64>, OracleError> {
    let links = 2 * g * g;
    if links > BRUTE_LINK_CAP {
        return Err(OracleError::TooManyLinks { g, links });
    }
    let h = |i: usize, j: usize| 2 * ((i % g) * g + (j % g));
    let v = |i: usize, j: usize| 2 * ((i % g) * g + (j % g)) + 1;
    let stamp = plaquette_form(m2);
    let mut m = Array2::zeros((links, links));
    for i in 0..g {
        for j in 0..g {
            let legs = [h(i, j), v(i, j), h(i + 1, j), v(i, j + 1)];
            for c in 0..4 {
                for cp in 0..4 {
                    m[[legs[c], legs[cp]]] += stamp[[c, cp]];
                }
            }
        }
    }
    Ok(m)
}

fn to_sym(m: &Array2<f64>) -> SymMatrix {
    let n = m.nrows();
    SymMatrix::from_fn(n, |i, j| m[[i, j]])
}

/// log Z of the g x g tensor torus: (L/2) log(2 pi) - 1/2 log det M over the
/// L = 2 g^2 link fields.
pub fn brute_force_log_z(g: usize, m2: f64) -> Result<f64, OracleError> {
    let m = brute_force_form(g, m2)?;
    let links = 2 * g * g;
    Ok(0.5 * links as f64 * LOG_2PI - 0.5 * logdet_sym(&to_sym(&m))?)
}

/// Free energy density per tensor, -log Z / g^2, at order lambda^0.
pub fn brute_force_f0(g: usize, m2: f64) -> Result<f64, OracleError> {
    Ok(-brute_force_log_z(g, m2)? / (g * g) as f64)
}

/// Diagonal of the link-field propagator G = M^-1.
pub fn brute_force_green_diag(g: usize, m2: f64) -> Result<Vec<f64>, OracleError> {
    let m = brute_force_form(g, m2)?;
    let gi = inv_sym(&to_sym(&m))?;
    Ok((0..m.nrows()).map(|l| gi.get(l, l)).collect())
}

/// Total first-order shift of -log Z from the quartic term:
/// sum over link fields of 3 G_ll^2.
pub fn brute_force_df(g: usize, m2: f64) -> Result<f64, OracleError> {
    Ok(brute_force_green_diag(g, m2)?.iter().map(|gll| 3.0 * gll * gll).sum())
}

// -------------------------------------------------------------- momentum sums

fn momentum_dets(g: usize, m2: f64) -> impl Iterator<Item = f64> {
    let d = 4.0 + m2;
    (0..g * g).map(move |idx| {
        let k1 = 2.0 * std::f64::consts::PI * (idx / g) as f64 / g as f64;
        let k2 = 2.0 * std::f64::consts::PI * (idx % g) as f64 / g as f64;
        let c = (0.5 * k1).cos() * (0.5 * k2).cos();
        d * d - 16.0 * c * c
    })
}

/// log Z of the g x g torus via 2x2 momentum blocks.
pub fn momentum_log_z(g: usize, m2: f64) -> f64 {
    let ld: f64 = momentum_dets(g, m2).map(|d| d.ln()).sum();
    0.5 * (2 * g * g) as f64 * LOG_2PI - 0.5 * ld
}

pub fn momentum_f0(g: usize, m2: f64) -> f64 {
    -momentum_log_z(g, m2) / (g * g) as f64
}

/// Equal-point propagator on the finite torus.
pub fn momentum_g0(g: usize, m2: f64) -> f64 {
    let s: f64 = momentum_dets(g, m2).map(|d| (4.0 + m2) / d).sum();
    s / (g * g) as f64
}

/// Finite-torus first-order free-energy coefficient, 6 G0^2 per tensor;
/// equals brute_force_df / g^2 by translation invariance.
pub fn momentum_f1(g: usize, m2: f64) -> f64 {
    let g0 = momentum_g0(g, m2);
    6.0 * g0 * g0
}

// ---------------------------------------------------------------- quadrature

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = (n + 1) / 2;
    for i in 0..half {
        // initial guess: Chebyshev-like angle
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and its derivative by upward recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Geometric panel edges on [0, kmax] accumulating toward k = 0; the first
/// edge scales with the mass so the near-singular region is always resolved.
fn panel_edges(m: f64, kmax: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut x = (0.5 * m).min(0.1);
    while x < kmax {
        edges.push(x);
        x *= 2.0;
    }
    edges.push(kmax);
    edges
}

fn panel_grid(edges: &[f64], npts: usize) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(npts);
    let mut nodes = Vec::with_capacity((edges.len() - 1) * npts);
    let mut weights = Vec::with_capacity((edges.len() - 1) * npts);
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (x, wt) in xs.iter().zip(&ws) {
            nodes.push(0.5 * (b - a) * x + 0.5 * (a + b));
            weights.push(0.5 * (b - a) * wt);
        }
    }
    (nodes, weights)
}

fn bz_integral<F: Fn(f64) -> f64>(m2: f64, npts: usize, f: F) -> f64 {
    let m = m2.sqrt();
    let (nodes, weights) = panel_grid(&panel_edges(m, std::f64::consts::PI), npts);
    let d = 4.0 + m2;
    let mut acc = 0.0;
    // integrand is even in each component: integrate [0, pi]^2 and multiply by 4
    for (k1, w1) in nodes.iter().zip(&weights) {
        let c1 = (0.5 * k1).cos();
        for (k2, w2) in nodes.iter().zip(&weights) {
            let c = c1 * (0.5 * k2).cos();
            acc += w1 * w2 * f(d * d - 16.0 * c * c);
        }
    }
    acc * 4.0 / (2.0 * std::f64::consts::PI).powi(2)
}

/// Default panel order; doubling it moves the results by less than 1e-12.
pub const QUAD_POINTS: usize = 48;

/// Infinite-volume free energy density per tensor at order lambda^0:
/// -log(2 pi) + 1/2 BZ-average of log det of the momentum block.
pub fn exact_f0(m2: f64) -> f64 {
    exact_f0_with_points(m2, QUAD_POINTS)
}

pub fn exact_f0_with_points(m2: f64, npts: usize) -> f64 {
    assert!(m2 > 0.0, "mass-squared must be positive");
    -LOG_2PI + 0.5 * bz_integral(m2, npts, |det| det.ln())
}

/// Infinite-volume equal-point propagator.
pub fn exact_g0(m2: f64) -> f64 {
    exact_g0_with_points(m2, QUAD_POINTS)
}

pub fn exact_g0_with_points(m2: f64, npts: usize) -> f64 {
    assert!(m2 > 0.0, "mass-squared must be positive");
    bz_integral(m2, npts, |det| (4.0 + m2) / det)
}

/// Infinite-volume first-order free-energy coefficient, 6 G0^2 per tensor.
pub fn exact_f1(m2: f64) -> f64 {
    let g0 = exact_g0(m2);
    6.0 * g0 * g0
}
