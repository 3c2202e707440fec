//! Scans truncation error of the free flow against the infinite-volume
//! quadrature: the chi_max convergence table, the small-mass power-law fit,
//! and the heavy-mass monotonicity check.
//!
//! Run with: cargo run --release --example convergence_scan

use free_trg::{run_free_flow, FlowParams};
use oracles::exact_f0;

fn delta(m2: f64, chi: usize, zero_tol: f64) -> f64 {
    let mut p = FlowParams::new(m2, 40, chi);
    p.zero_tol = zero_tol;
    let f = run_free_flow(&p).unwrap().f0;
    let ex = exact_f0(m2);
    (f - ex).abs() / ex.abs()
}

fn main() {
    println!("== delta f0 at default zero_tol ==");
    for &m2 in &[0.01, 0.09, 1.0] {
        for &chi in &[8usize, 16, 32, 64] {
            let d = delta(m2, chi, free_trg::ZERO_TOL_DEFAULT);
            println!("  m={:.2} chi={chi:2}: delta_f0 = {d:.3e}", m2.sqrt());
        }
    }

    println!("== heavy masses, chi in {{4,8,16,32}} ==");
    for &m2 in &[1.0, 4.0] {
        let mut row = Vec::new();
        for &chi in &[4usize, 8, 16, 32] {
            row.push(delta(m2, chi, free_trg::ZERO_TOL_DEFAULT));
        }
        println!(
            "  m={:.1}: {}",
            m2.sqrt(),
            row.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join("  ")
        );
    }

    println!("== m=0.1 power-law fit across zero_tol recipes ==");
    let chis = [4usize, 8, 16, 32, 64];
    for &zt in &[0.0, 1e-16, 1e-14, 1e-13, 1e-12] {
        let mut pts = Vec::new();
        for &chi in &chis {
            let d = delta(0.01, chi, zt);
            pts.push((chi as f64, d));
        }
        let fit = |pts: &[(f64, f64)]| {
            let n = pts.len() as f64;
            let (sx, sy, sxx, sxy) =
                pts.iter().fold((0.0, 0.0, 0.0, 0.0), |(a, b, c, d), p| {
                    let (x, y) = (p.0.ln(), p.1.ln());
                    (a + x, b + y, c + x * x, d + x * y)
                });
            -(n * sxy - sx * sy) / (n * sxx - sx * sx)
        };
        println!(
            "  zero_tol={zt:.0e}: {}  alpha(8..64)={:.2} alpha(4..32)={:.2}",
            pts.iter()
                .map(|(c, d)| format!("{}:{d:.2e}", *c as usize))
                .collect::<Vec<_>>()
                .join(" "),
            fit(&pts[1..]),
            fit(&pts[..4]),
        );
    }
}
