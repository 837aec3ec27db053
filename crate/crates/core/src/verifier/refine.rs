//! Refinement studies: re-run a scenario at halved spacings and track the
//! measured constants. Trend verdicts (stability within a factor, monotone
//! violation fractions) live here rather than in the single-level checks.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::report::{CheckReport, Gate};
use crate::verifier::checks;
use crate::verifier::scenario::Scenario;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub level: usize,
    pub mesh_scale: f64,
    pub reverse_poincare_constant: f64,
    pub lipschitz_constant: f64,
    pub zzz_violation_fraction: f64,
    pub rademacher_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub scenario: String,
    pub levels: Vec<RefinementLevel>,
}

impl RefinementStudy {
    /// Measures the four tracked constants at levels 0..count.
    ///
    /// The ball and the KS scale set are fixed in physical units at level 0
    /// and reused at every level (with the center mapped through the index
    /// refinement), so the constants are comparable across levels.
    pub fn run(scenario: &Scenario, count: usize) -> Result<RefinementStudy> {
        let mut levels = Vec::new();
        let mut ball: Option<(usize, f64, Vec<f64>)> = None;
        for level in 0..count.max(1) {
            let (g, region, solve) = scenario.solve_level(level)?;
            let u = &solve.map;
            let (center, radius, scales) = match ball.take() {
                None => {
                    let (c, r) = scenario.default_ball(&g, &region);
                    let base = (0.35 * r).max(2.75 * g.mesh_scale());
                    (c, r, vec![1.5625 * base, 1.25 * base, base])
                }
                Some(b) => b,
            };
            let rp = checks::reverse_poincare_constant(
                &g, u, &region, center, radius, 0.5, Some(&scales),
            )?;
            let lip = checks::lipschitz_estimate_constant(&g, u, &region, center, radius / 2.0)?;
            let zzz = checks::check_zzz(&g, u, &region, checks::ZZZ_TOL_COEFF, 1.0)?;
            let rad = checks::check_rademacher(&g, u, &region, 32, 1.0)?;
            levels.push(RefinementLevel {
                level,
                mesh_scale: g.mesh_scale(),
                reverse_poincare_constant: rp,
                lipschitz_constant: lip,
                zzz_violation_fraction: zzz.max_violation,
                rademacher_gap: rad.median_gap,
            });
            // hyperbolic meshes have no index-stable refinement; those fall
            // back to per-level balls
            ball = scenario
                .domain
                .refine_vertex(level, center)
                .map(|c| (c, radius, scales.clone()));
        }
        Ok(RefinementStudy { scenario: scenario.name.clone(), levels })
    }

    /// Stability verdict: every tracked constant varies by less than the
    /// given factor across levels, the ZZZ fraction is non-increasing and
    /// small at the finest level.
    pub fn verdict(&self, stability_factor: f64, zzz_max: f64) -> CheckReport {
        let mut viol = f64::NEG_INFINITY;
        let mut notes = String::new();
        let ratio_spread = |vals: &[f64]| -> f64 {
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(0.0f64, f64::max);
            if lo <= 1e-12 {
                if hi <= 1e-9 { 1.0 } else { f64::INFINITY }
            } else {
                hi / lo
            }
        };
        let rp: Vec<f64> = self.levels.iter().map(|l| l.reverse_poincare_constant).collect();
        let lip: Vec<f64> = self.levels.iter().map(|l| l.lipschitz_constant).collect();
        let rp_spread = ratio_spread(&rp);
        let lip_spread = ratio_spread(&lip);
        viol = viol.max(rp_spread - stability_factor).max(lip_spread - stability_factor);
        notes.push_str(&format!("rp_spread={rp_spread:.3} lip_spread={lip_spread:.3}"));

        let zzz: Vec<f64> = self.levels.iter().map(|l| l.zzz_violation_fraction).collect();
        for w in zzz.windows(2) {
            viol = viol.max(w[1] - w[0] - 1e-12);
        }
        if let Some(&last) = zzz.last() {
            viol = viol.max(last - zzz_max);
            notes.push_str(&format!(" zzz_final={last:.4}"));
        }
        CheckReport::new("refinement_study", Gate::Trend, viol, 0.0).with_note(&notes)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "level,mesh_scale,reverse_poincare_constant,lipschitz_constant,zzz_violation_fraction,rademacher_gap\n",
        );
        for l in &self.levels {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                l.level,
                l.mesh_scale,
                l.reverse_poincare_constant,
                l.lipschitz_constant,
                l.zzz_violation_fraction,
                l.rademacher_gap
            ));
        }
        out
    }
}
