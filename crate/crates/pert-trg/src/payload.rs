//! Interacting weight state: the gaussian flow plus one polynomial insertion.
//!
//! To first order in the coupling the interacting tensor is
//! (gaussian weight) * (1 + lambda * P) with P a quartic/quadratic/constant
//! polynomial in the even legs, the odd carriers, and (between split and sew)
//! the freshly created bond-derivative slots.  `PertTensors` stores the
//! coefficient blocks of P together with the index-block layout its
//! coordinates live on, and `c_log` accumulates the per-site constants each
//! coarse-graining step pushes out of the local tensor.

use free_trg::{init_free, FreeWeightState, SplitData};
use ndarray::{Array2, Array4};
use symlin::SymMatrix;
use wick::Polynomial4;

use crate::error::PertTrgError;
use crate::space::FieldIndexSpace;
use crate::sym4::SymTensor4;

/// Site potential whose first-order correction the flow carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    /// x^4 at every site, the flow this crate is built for.
    Quartic,
    /// General even power x^power; only power = 4 is carried at first order.
    EvenPower { power: u32 },
}

impl Potential {
    /// Tensor rank needed to store one insertion of this vertex.
    pub fn rank(&self) -> u32 {
        match self {
            Potential::Quartic => 4,
            Potential::EvenPower { power } => *power,
        }
    }
}

/// Coefficient blocks of the single polynomial insertion.
#[derive(Debug, Clone)]
pub struct PertTensors {
    /// Constant term of the local polynomial (zero between steps: each
    /// coarse-graining pushes it into `c_log`).
    pub t0: f64,
    /// Quadratic coefficients, symmetric over the index space.
    pub t2: SymMatrix,
    /// Quartic coefficients, fully symmetric packed storage.
    pub t4: SymTensor4,
    /// Block layout of the coordinates the coefficients act on.
    pub space: FieldIndexSpace,
    /// Accumulated per-site first-order constant; the interacting free
    /// energy correction is -(c_log + torus closure / site count).
    pub c_log: f64,
}

impl PertTensors {
    pub fn zeros(space: FieldIndexSpace) -> Self {
        let n = space.dim();
        PertTensors {
            t0: 0.0,
            t2: SymMatrix::zeros(n),
            t4: SymTensor4::zeros(n),
            space,
            c_log: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Dense polynomial over the same coordinates, all-real phases.
    pub(crate) fn to_poly(&self) -> Polynomial4 {
        let n = self.dim();
        let c2 = Array2::from_shape_fn((n, n), |(i, j)| self.t2.get(i, j));
        let c4 = self.t4.to_dense();
        Polynomial4::from_parts(self.t0, c2, c4, vec![0u8; n])
            .expect("coefficient blocks share the space dimension")
    }

    /// Packs a dense polynomial produced by transported/reduced blocks.
    pub(crate) fn from_blocks(
        space: FieldIndexSpace,
        t0: f64,
        c2: &Array2<f64>,
        c4: &Array4<f64>,
        c_log: f64,
    ) -> Result<Self, PertTrgError> {
        let n = space.dim();
        if c2.dim() != (n, n) || c4.dim() != (n, n, n, n) {
            return Err(PertTrgError::InvalidSpace(format!(
                "coefficient blocks of dim {} do not match index space of dim {}",
                c2.nrows(),
                n
            )));
        }
        let sym2 = wick::symmetrize2(c2.view());
        let flat = sym2.as_slice().expect("standard layout");
        let t2 = SymMatrix::from_dense_sym(flat, n, f64::INFINITY)
            .expect("symmetrized matrix packs");
        let t4 = SymTensor4::from_dense(c4.view());
        Ok(PertTensors { t0, t2, t4, space, c_log })
    }
}

/// Which half vertex a cubic payload belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Half-vertex payload produced by splitting: polynomial over the two home
/// legs, their insertion carriers, and the fresh bond-derivative slots,
/// together with the gaussian split it was built from.
#[derive(Debug, Clone)]
pub struct CubicPayload {
    pub side: Side,
    /// Level of the state that was split; the payload must be consumed by
    /// the coarse-graining step of this same level.
    pub level: usize,
    pub tensors: PertTensors,
    pub split: SplitData,
}

/// The two halves of one splitting, in left/right order.
#[derive(Debug, Clone)]
pub struct CubicPair {
    pub left: CubicPayload,
    pub right: CubicPayload,
}

/// Birth record of the odd-carrier blocks living in a payload: they are
/// created by one splitting and must be consumed by the next sew.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OddGeneration {
    pub born_level: usize,
}

/// Residuals of the complex-bookkeeping cross-check for one step.
#[derive(Debug, Clone, Copy)]
pub struct ShadowCheck {
    /// |Im tau_hat| relative to max(1, |tau_hat|) from the complex engine.
    pub imag_residual_rel: f64,
    /// |Re tau_hat - tau| relative to max(1, |tau|) between engines.
    pub real_agreement_rel: f64,
}

/// Gaussian flow state dressed with the first-order insertion.
#[derive(Debug, Clone)]
pub struct PertWeightState {
    pub free_part: FreeWeightState,
    pub tensors: PertTensors,
    pub potential: Potential,
    /// None only at level 0 (no carriers yet); afterwards records the level
    /// whose splitting created the current odd blocks.
    pub odd_generation: Option<OddGeneration>,
    /// Residuals of the most recent complex cross-check, if one ran.
    pub last_shadow: Option<ShadowCheck>,
}

impl PertWeightState {
    pub fn level(&self) -> usize {
        self.free_part.n
    }

    pub fn chi(&self) -> usize {
        self.free_part.chi
    }
}

/// Level-0 interacting state: the exact plaquette gaussian dressed with one
/// -x^4/2 insertion on each of the four vertex fields (the four even slots of
/// the payload), so the per-site first-order weight is exact on the
/// finest lattice.
pub fn init_pert(mass_squared: f64, potential: Potential) -> Result<PertWeightState, PertTrgError> {
    if !(mass_squared.is_finite() && mass_squared > 0.0) {
        return Err(PertTrgError::InvalidParams(format!(
            "mass squared must be finite and positive, got {mass_squared}"
        )));
    }
    if potential.rank() != 4 {
        return Err(PertTrgError::Unsupported(format!(
            "potential x^{} (only the quartic vertex is carried)",
            potential.rank()
        )));
    }
    let free_part = init_free(mass_squared);
    let chi = free_part.chi;
    let space = FieldIndexSpace::payload(chi, 0);
    let mut tensors = PertTensors::zeros(space);
    for i in 0..4 * chi {
        tensors.t4.set(i, i, i, i, -0.5);
    }
    Ok(PertWeightState {
        free_part,
        tensors,
        potential,
        odd_generation: None,
        last_shadow: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::IndexRole;

    #[test]
    fn init_places_diagonal_quartic_on_even_slots() {
        let st = init_pert(1.0, Potential::Quartic).unwrap();
        assert_eq!(st.level(), 0);
        assert_eq!(st.tensors.dim(), 8);
        assert!(st.odd_generation.is_none());
        let even = st.tensors.space.block_range(IndexRole::EvenLattice).unwrap();
        assert_eq!(even, 0..4);
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(st.tensors.t2.get(i, j), 0.0);
            }
        }
        let mut seen = 0;
        let dense = st.tensors.t4.to_dense();
        for (idx, &v) in dense.indexed_iter() {
            if v != 0.0 {
                assert_eq!(idx.0, idx.1);
                assert_eq!(idx.1, idx.2);
                assert_eq!(idx.2, idx.3);
                assert!(idx.0 < 4);
                assert_eq!(v, -0.5);
                seen += 1;
            }
        }
        assert_eq!(seen, 4);
    }

    #[test]
    fn init_rejects_bad_inputs() {
        assert!(matches!(
            init_pert(0.0, Potential::Quartic),
            Err(PertTrgError::InvalidParams(_))
        ));
        assert!(matches!(
            init_pert(-1.0, Potential::Quartic),
            Err(PertTrgError::InvalidParams(_))
        ));
        assert!(matches!(
            init_pert(1.0, Potential::EvenPower { power: 6 }),
            Err(PertTrgError::Unsupported(_))
        ));
        assert!(init_pert(1.0, Potential::EvenPower { power: 4 }).is_ok());
    }

    #[test]
    fn tensors_roundtrip_through_dense_polynomial() {
        let st = init_pert(0.5, Potential::Quartic).unwrap();
        let poly = st.tensors.to_poly();
        assert_eq!(poly.dim(), 8);
        let back = PertTensors::from_blocks(
            st.tensors.space.clone(),
            poly.c0,
            &poly.c2,
            &poly.c4,
            0.0,
        )
        .unwrap();
        assert_eq!(back.t4.to_dense(), st.tensors.t4.to_dense());
    }
}
