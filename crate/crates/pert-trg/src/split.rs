//! Splitting the interacting vertex: the payload polynomial is rewritten in
//! the split mode basis, each monomial is routed to the left or right half
//! vertex, and kept cross-side modes are re-expressed through the shared bond
//! plus a derivative slot, producing one cubic payload per half.

use free_trg::{FreeWeightState, SplitData};
use ndarray::Array2;

use crate::error::PertTrgError;
use crate::payload::{CubicPair, CubicPayload, PertTensors, PertWeightState, Side};
use crate::space::FieldIndexSpace;

/// Orthogonal 2chi x 2chi change of basis for one pair of even legs:
/// columns are [kept-u | kept-v | discarded-u | discarded-v] modes, each
/// stacked (+,+)/(+,-) across the pair and scaled by 1/sqrt(2).
pub(crate) fn pair_mode_basis(sp: &SplitData, chi: usize) -> Array2<f64> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let (ku, kv) = (sp.ku, sp.kv);
    let mut out = Array2::zeros((2 * chi, 2 * chi));
    // kept-u block
    for k in 0..ku {
        for i in 0..chi {
            out[[i, k]] = s2 * sp.u_all[[i, k]];
            out[[chi + i, k]] = s2 * sp.u_all[[i, k]];
        }
    }
    // kept-v block
    for k in 0..kv {
        for i in 0..chi {
            out[[i, ku + k]] = s2 * sp.v_all[[i, k]];
            out[[chi + i, ku + k]] = -s2 * sp.v_all[[i, k]];
        }
    }
    // discarded-u block
    let chid = ku + kv;
    for k in ku..chi {
        for i in 0..chi {
            out[[i, chid + (k - ku)]] = s2 * sp.u_all[[i, k]];
            out[[chi + i, chid + (k - ku)]] = s2 * sp.u_all[[i, k]];
        }
    }
    // discarded-v block
    for k in kv..chi {
        for i in 0..chi {
            out[[i, chid + (chi - ku) + (k - kv)]] = s2 * sp.v_all[[i, k]];
            out[[chi + i, chid + (chi - ku) + (k - kv)]] = -s2 * sp.v_all[[i, k]];
        }
    }
    out
}

/// Indicator vectors over the rotated payload coordinates.
/// Returns (forced_left, forced_right, kept_left, kept_right).
fn routing_indicators(chi: usize, chid: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let d8 = 8 * chi;
    let mut f_l = vec![0.0; d8];
    let mut f_r = vec![0.0; d8];
    let mut s_l = vec![0.0; d8];
    let mut s_r = vec![0.0; d8];
    for i in chid..2 * chi {
        f_l[i] = 1.0;
    }
    for i in 4 * chi..6 * chi {
        f_l[i] = 1.0;
    }
    for i in 2 * chi + chid..4 * chi {
        f_r[i] = 1.0;
    }
    for i in 6 * chi..8 * chi {
        f_r[i] = 1.0;
    }
    for i in 0..chid {
        s_l[i] = 1.0;
    }
    for i in 2 * chi..2 * chi + chid {
        s_r[i] = 1.0;
    }
    (f_l, f_r, s_l, s_r)
}

/// Routing weight of one monomial (given its index multiset) for the left
/// and right halves.  Monomials containing a forced coordinate follow it;
/// pure kept-mode monomials go fully to their own side; mixed kept-mode
/// monomials are shared half/half.  Forced-left times forced-right content
/// cannot be represented on either half and is dropped (its weight in the
/// flow is structurally zero).
fn route_weights(idx: &[usize], ind: &(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)) -> (f64, f64) {
    let (f_l, f_r, s_l, s_r) = ind;
    let mut no_fl = 1.0;
    let mut no_fr = 1.0;
    let mut all_l = 1.0;
    let mut all_r = 1.0;
    for &i in idx {
        no_fl *= 1.0 - f_l[i];
        no_fr *= 1.0 - f_r[i];
        all_l *= s_l[i];
        all_r *= s_r[i];
    }
    let has_fl = 1.0 - no_fl;
    let has_fr = 1.0 - no_fr;
    let no_f = no_fl * no_fr;
    let mixed = 1.0 - all_l - all_r;
    let p_l = all_l + 0.5 * mixed;
    let p_r = all_r + 0.5 * mixed;
    let w_l = has_fl * (1.0 - has_fr) + no_f * p_l;
    let w_r = has_fr * (1.0 - has_fl) + no_f * p_r;
    (w_l, w_r)
}

/// Map from rotated payload coordinates (8chi) to one half's cubic
/// coordinates (4chi + chi'): own modes return to the home legs through the
/// basis transpose, kept cross-side modes become (shared bond profile on the
/// home legs) + (1/d) * derivative slot with the side-dependent sign, and the
/// two own insertion blocks pass through.
fn half_transport(
    side: Side,
    basis: &Array2<f64>,
    chi: usize,
    chid: usize,
    dinv: &[f64],
) -> Array2<f64> {
    let d8 = 8 * chi;
    let ncub = 4 * chi + chid;
    let bt = basis.t();
    let mut t = Array2::zeros((d8, ncub));
    match side {
        Side::Left => {
            for r in 0..2 * chi {
                for c in 0..2 * chi {
                    t[[r, c]] = bt[[r, c]];
                }
            }
            for r in 0..chid {
                for c in 0..2 * chi {
                    t[[2 * chi + r, c]] = bt[[r, c]];
                }
                t[[2 * chi + r, 4 * chi + r]] = dinv[r];
            }
            for i in 0..chi {
                t[[4 * chi + i, 2 * chi + i]] = 1.0;
                t[[5 * chi + i, 3 * chi + i]] = 1.0;
            }
        }
        Side::Right => {
            for r in 0..2 * chi {
                for c in 0..2 * chi {
                    t[[2 * chi + r, c]] = bt[[r, c]];
                }
            }
            for r in 0..chid {
                for c in 0..2 * chi {
                    t[[r, c]] = bt[[r, c]];
                }
                t[[r, 4 * chi + r]] = -dinv[r];
            }
            for i in 0..chi {
                t[[6 * chi + i, 2 * chi + i]] = 1.0;
                t[[7 * chi + i, 3 * chi + i]] = 1.0;
            }
        }
    }
    t
}

pub(crate) fn check_split_matches_state(
    st: &FreeWeightState,
    sp: &SplitData,
) -> Result<(), PertTrgError> {
    if sp.u_all.nrows() != st.chi {
        return Err(PertTrgError::InvalidParams(format!(
            "split of width {} does not match state of bond dimension {}",
            sp.u_all.nrows(),
            st.chi
        )));
    }
    Ok(())
}

/// Splits the payload of `state` along `split`, producing the left and right
/// cubic payloads consumed by the following coarse-graining step.
pub fn split_pert(
    state: &PertWeightState,
    split: &SplitData,
) -> Result<CubicPair, PertTrgError> {
    let rank = state.potential.rank();
    if rank > 4 {
        return Err(PertTrgError::Unsupported(format!(
            "interaction term with {rank} legs exceeds the rank-4 split transport"
        )));
    }
    check_split_matches_state(&state.free_part, split)?;
    let chi = state.chi();
    let chid = split.chi_next();
    let d8 = 8 * chi;
    if state.tensors.dim() != d8 {
        return Err(PertTrgError::InvalidSpace(format!(
            "payload lives on {} coordinates, expected {}",
            state.tensors.dim(),
            d8
        )));
    }
    let level = state.level();

    let basis = pair_mode_basis(split, chi);
    let mut r8 = Array2::<f64>::eye(d8);
    for i in 0..2 * chi {
        for j in 0..2 * chi {
            r8[[i, j]] = basis[[i, j]];
            r8[[2 * chi + i, 2 * chi + j]] = basis[[i, j]];
        }
    }

    let poly = state.tensors.to_poly();
    let c4y = wick::transport4(poly.c4.view(), r8.view());
    let c2y = wick::transport2(poly.c2.view(), r8.view());

    let ind = routing_indicators(chi, chid);
    let dinv: Vec<f64> = split.d.iter().map(|&x| 1.0 / x).collect();

    let mut halves = Vec::with_capacity(2);
    for side in [Side::Left, Side::Right] {
        let pick = |wl: f64, wr: f64| if side == Side::Left { wl } else { wr };
        let mut c4w = c4y.clone();
        for (idx, v) in c4w.indexed_iter_mut() {
            if *v != 0.0 {
                let (wl, wr) = route_weights(&[idx.0, idx.1, idx.2, idx.3], &ind);
                *v *= pick(wl, wr);
            }
        }
        let mut c2w = c2y.clone();
        for (idx, v) in c2w.indexed_iter_mut() {
            if *v != 0.0 {
                let (wl, wr) = route_weights(&[idx.0, idx.1], &ind);
                *v *= pick(wl, wr);
            }
        }
        let t = half_transport(side, &basis, chi, chid, &dinv);
        let c4h = wick::transport4(c4w.view(), t.view());
        let c2h = wick::transport2(c2w.view(), t.view());
        let space = FieldIndexSpace::cubic(chi, chid, level);
        let tensors =
            PertTensors::from_blocks(space, state.tensors.t0 / 2.0, &c2h, &c4h, 0.0)?;
        halves.push(CubicPayload {
            side,
            level,
            tensors,
            split: split.clone(),
        });
    }
    let right = halves.pop().expect("two halves");
    let left = halves.pop().expect("two halves");
    Ok(CubicPair { left, right })
}
