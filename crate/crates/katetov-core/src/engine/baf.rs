//! Back-and-forth refinement between two generic chains.
//!
//! Starting from a strict approximate isometry between two stage objects,
//! the engine produces a strictly decreasing tower `ψ_0 ▷ ψ_1 ▷ … ▷ ψ_L` of
//! strict approximate isometries between the top stages, alternating between
//! making the current table nearly total on a source stage (even levels) and
//! nearly surjective onto a target stage (odd levels), with tolerance
//! weights bounded by `2^-l`. Each `ψ_l` has the restricted-extension form
//! `(θ|_{D×R})|^{M×N} + c_l` where `θ` is the realized table of the pinned
//! partial isometry; new pins are found by depth-first search over exact
//! isometric partners, backtracking across levels, and every produced level
//! is verified with `strictly_dominates` before it is accepted.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::apx::{self, ApproximateIsometry};
use crate::extq::ExtQ;
use crate::metric::FiniteMetricSpace;
use crate::rat::{rat, Rat};

use super::{Chain, EngineError};

/// Parameters for [`back_and_forth`].
#[derive(Clone, Copy, Debug)]
pub struct BafOptions {
    /// Index of the compared stage of the first chain; its points must end
    /// up in the domain of the pinned map.
    pub target_stage_m: usize,
    /// Compared stage of the second chain (range coverage).
    pub target_stage_n: usize,
    /// Number of refinement levels (at least 2 to cover both directions).
    pub levels: usize,
}

impl Default for BafOptions {
    fn default() -> Self {
        BafOptions { target_stage_m: 0, target_stage_n: 0, levels: 4 }
    }
}

/// Transcript of one refinement level.
#[derive(Clone, Debug)]
pub struct BafLevel {
    pub level: usize,
    /// Even levels extend totality over the source stage, odd levels
    /// surjectivity onto the target stage.
    pub forth: bool,
    /// The stage index whose points were covered at this level.
    pub stage_index: usize,
    /// The level weight `c_l` (the `δ_l` of the tower), `≤ 2^-l`.
    pub weight: Rat,
    /// Pins added at this level, as point-name pairs.
    pub new_pins: Vec<(String, String)>,
    /// Exact outcome of `strictly_dominates(ψ_{l-1}, ψ_l)`.
    pub domination_verified: bool,
    /// Totality defect of `ψ_l` restricted to the covered source stage.
    pub totality_defect: ExtQ,
    /// Surjectivity defect of `ψ_l` restricted to the covered target stage.
    pub surjectivity_defect: ExtQ,
}

/// Result of a back-and-forth run.
#[derive(Clone, Debug)]
pub struct BafResult {
    pub levels: Vec<BafLevel>,
    /// The final table `ψ_L` on top(M) × top(N).
    pub final_psi: ApproximateIsometry,
    /// The pinned partial map, as point-name pairs.
    pub pins: Vec<(String, String)>,
    /// Largest distance distortion over pinned pairs (zero by construction,
    /// recomputed for the transcript).
    pub map_distortion: Rat,
    /// Whether both compared stages were fully covered.
    pub complete: bool,
}

struct Search<'a> {
    m: &'a FiniteMetricSpace,
    n: &'a FiniteMetricSpace,
    psi0: ApproximateIsometry,
    weights: Vec<Rat>,
    x_target: usize,
    y_target: usize,
}

impl<'a> Search<'a> {
    /// The table `min over pins (d(u,x) + c + d(σx, v))` as an approximate
    /// isometry; identically infinite when there are no pins.
    fn pin_envelope(&self, pins: &[(usize, usize)], c: &Rat) -> ApproximateIsometry {
        let (nm, nn) = (self.m.len(), self.n.len());
        let mut values = Vec::with_capacity(nm);
        for u in 0..nm {
            let mut row = Vec::with_capacity(nn);
            for v in 0..nn {
                let mut best = ExtQ::Inf;
                for &(x, y) in pins {
                    let cand = ExtQ::fin(self.m.dist(u, x) + c + self.n.dist(y, v));
                    if cand < best {
                        best = cand;
                    }
                }
                row.push(best);
            }
            values.push(row);
        }
        ApproximateIsometry::from_parts(self.m.clone(), self.n.clone(), values)
            .expect("pin envelope shape")
    }

    /// Depth-first search over levels. `level` indexes `self.weights`;
    /// returns the pins per level on success.
    fn solve(
        &self,
        level: usize,
        pins: &mut Vec<(usize, usize)>,
        prev_psi: &ApproximateIsometry,
        out: &mut Vec<(Vec<(usize, usize)>, ApproximateIsometry)>,
    ) -> bool {
        if level == self.weights.len() {
            return true;
        }
        let forth = level % 2 == 0;
        let missing: Vec<usize> = if forth {
            (0..self.x_target).filter(|x| pins.iter().all(|&(px, _)| px != *x)).collect()
        } else {
            (0..self.y_target).filter(|y| pins.iter().all(|&(_, py)| py != *y)).collect()
        };
        self.assign(level, &missing, 0, pins, prev_psi, out)
    }

    fn assign(
        &self,
        level: usize,
        missing: &[usize],
        k: usize,
        pins: &mut Vec<(usize, usize)>,
        prev_psi: &ApproximateIsometry,
        out: &mut Vec<(Vec<(usize, usize)>, ApproximateIsometry)>,
    ) -> bool {
        if k == missing.len() {
            // Level fully assigned: build ψ_l and verify strict domination.
            let psi = self.pin_envelope(pins, &self.weights[level]);
            if !apx::strictly_dominates(prev_psi, &psi) {
                return false;
            }
            let added = pins.clone();
            out.push((added, psi.clone()));
            if self.solve(level + 1, pins, &psi, out) {
                return true;
            }
            out.pop();
            return false;
        }
        let forth = level % 2 == 0;
        let point = missing[k];
        let candidates: Vec<usize> = if forth {
            (0..self.n.len()).filter(|y| pins.iter().all(|&(_, py)| py != *y)).collect()
        } else {
            (0..self.m.len()).filter(|x| pins.iter().all(|&(px, _)| px != *x)).collect()
        };
        for cand in candidates {
            let (x, y) = if forth { (point, cand) } else { (cand, point) };
            // Exact isometry against every existing pin.
            let ok = pins
                .iter()
                .all(|&(px, py)| self.m.dist(x, px) == self.n.dist(y, py));
            if !ok {
                continue;
            }
            pins.push((x, y));
            if self.assign(level, missing, k + 1, pins, prev_psi, out) {
                return true;
            }
            pins.pop();
        }
        false
    }
}

/// Runs the back-and-forth refinement. The starting table `phi0` lives on
/// the compared stage objects and is checked for strictness; it is trivially
/// extended to the top stages to form `ψ_0`. On success the pinned map is an
/// exact partial isometry covering both compared stages; when the chains are
/// too shallow to host one, the result is flagged incomplete and carries the
/// levels that were completed.
pub fn back_and_forth(
    chain_m: &Chain,
    chain_n: &Chain,
    phi0: &ApproximateIsometry,
    opts: BafOptions,
) -> Result<BafResult, EngineError> {
    let m_top = &chain_m.top().domain;
    let n_top = &chain_n.top().domain;
    assert!(opts.target_stage_m < chain_m.depth() && opts.target_stage_n < chain_n.depth());
    let x_target = chain_m.stages[opts.target_stage_m].len();
    let y_target = chain_n.stages[opts.target_stage_n].len();
    if phi0.source() != &chain_m.stages[opts.target_stage_m].domain
        || phi0.target() != &chain_n.stages[opts.target_stage_n].domain
    {
        return Err(EngineError::Apx(crate::apx::ApxError::NotASubspace));
    }
    if !apx::is_strict(phi0) {
        return Err(EngineError::NotStrict);
    }
    let psi0 = apx::trivial_extension(
        phi0,
        m_top,
        n_top,
        &(0..x_target).collect::<Vec<_>>(),
        &(0..y_target).collect::<Vec<_>>(),
    )?;

    let levels = opts.levels.max(2);
    // Weights c_l <= 2^-(l+1): strictly decreasing, so each envelope
    // strictly dominates the next.
    let weights: Vec<Rat> = (0..levels).map(|l| rat(1, 1i64 << (l + 2))).collect();
    let search = Search { m: m_top, n: n_top, psi0: psi0.clone(), weights, x_target, y_target };

    let mut pins: Vec<(usize, usize)> = Vec::new();
    let mut tower: Vec<(Vec<(usize, usize)>, ApproximateIsometry)> = Vec::new();
    let complete = search.solve(0, &mut pins, &search.psi0, &mut tower);

    let mut transcript = Vec::new();
    let mut prev: &ApproximateIsometry = &psi0;
    let mut seen = 0usize;
    for (level, (pins_at_level, psi)) in tower.iter().enumerate() {
        let forth = level % 2 == 0;
        let new_pins: Vec<(String, String)> = pins_at_level[seen..]
            .iter()
            .map(|&(x, y)| (m_top.points()[x].clone(), n_top.points()[y].clone()))
            .collect();
        seen = pins_at_level.len();
        let dom = apx::strictly_dominates(prev, psi);
        let x_side: Vec<usize> = (0..x_target).collect();
        let y_side: Vec<usize> = (0..y_target).collect();
        let all_n: Vec<usize> = (0..n_top.len()).collect();
        let all_m: Vec<usize> = (0..m_top.len()).collect();
        let tot = apx::totality_defect(&apx::restrict(psi, &x_side, &all_n)?);
        let surj = apx::surjectivity_defect(&apx::restrict(psi, &all_m, &y_side)?);
        transcript.push(BafLevel {
            level,
            forth,
            stage_index: if forth { opts.target_stage_m } else { opts.target_stage_n },
            weight: search.weights[level].clone(),
            new_pins,
            domination_verified: dom,
            totality_defect: tot,
            surjectivity_defect: surj,
        });
        prev = psi;
    }

    let final_psi = tower.last().map(|(_, psi)| psi.clone()).unwrap_or(psi0);
    let mut distortion = Rat::zero();
    for &(x, y) in &pins {
        for &(x2, y2) in &pins {
            let dm = m_top.dist(x, x2);
            let dn = n_top.dist(y, y2);
            let diff = if dm >= dn { dm - dn } else { dn - dm };
            if diff > distortion {
                distortion = diff;
            }
        }
    }
    Ok(BafResult {
        levels: transcript,
        final_psi,
        pins: pins
            .iter()
            .map(|&(x, y)| (m_top.points()[x].clone(), n_top.points()[y].clone()))
            .collect(),
        map_distortion: distortion,
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::FinGraphCat;
    use crate::engine::{build_generic_chain, ChainBudget};
    use crate::rat::rat_int;

    #[test]
    fn self_identification_has_zero_distortion() {
        let chain = build_generic_chain(&FinGraphCat, 9, 6, ChainBudget::default()).unwrap();
        let stage0 = &chain.stages[0].domain;
        let phi0 = ApproximateIsometry::identity(stage0).relax(&rat_int(1));
        let res = back_and_forth(&chain, &chain, &phi0, BafOptions::default()).unwrap();
        assert!(res.complete);
        assert_eq!(res.map_distortion, Rat::zero());
        for level in &res.levels {
            assert!(level.domination_verified);
            assert!(level.weight <= rat(1, 1 << (level.level + 1)));
        }
        // Defect schedule: the covered restriction has defect = the level weight.
        let last = res.levels.last().unwrap();
        assert!(last.totality_defect <= ExtQ::fin(last.weight.clone()));
    }

    #[test]
    fn tight_phi0_is_rejected_as_non_strict() {
        let chain = build_generic_chain(&FinGraphCat, 9, 2, ChainBudget::default()).unwrap();
        let stage0 = &chain.stages[0].domain;
        let phi0 = ApproximateIsometry::identity(stage0);
        let err = back_and_forth(&chain, &chain, &phi0, BafOptions::default());
        assert!(matches!(err, Err(EngineError::NotStrict)));
    }

    #[test]
    fn defect_sequence_monotone_under_schedule() {
        let m = build_generic_chain(&FinGraphCat, 21, 6, ChainBudget::default()).unwrap();
        let n = build_generic_chain(&FinGraphCat, 22, 6, ChainBudget::default()).unwrap();
        let phi0 = ApproximateIsometry::constant(
            m.stages[0].domain.clone(),
            n.stages[0].domain.clone(),
            ExtQ::from_int(3),
        );
        let res = back_and_forth(&m, &n, &phi0, BafOptions::default()).unwrap();
        assert!(res.complete, "generic graph chains admit an exact partial isomorphism");
        assert_eq!(res.map_distortion, Rat::zero());
        let mut last = ExtQ::Inf;
        for level in res.levels.iter().filter(|l| l.forth) {
            assert!(level.totality_defect <= last);
            last = level.totality_defect.clone();
        }
    }
}
