use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use super::bands::select_bands;
use super::config::{AlignmentResult, OptimizerConfig};
use super::refine::{search_rotation, RotationSearch};
use crate::basis::{BallExpansion, BasisSpec, ExpansionPlan, Volume};
use crate::error::{Error, Result};
use crate::xcorr::{xi_coefficients, WedgeMask, XiBlocks};

/// Template side of an alignment: the template expanded once, plus the plan
/// used to expand subtomogram windows.
pub struct Prepared {
    pub plan: ExpansionPlan,
    pub template: BallExpansion,
    pub template_norm: f64,
}

impl Prepared {
    pub fn new(t: &Volume, cfg: &OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        let spec = match cfg.lambda_cut {
            Some(c) => BasisSpec::build(cfg.l_max, c)?,
            None => BasisSpec::for_grid(cfg.l_max, t.n())?,
        };
        let plan = ExpansionPlan::new(Arc::new(spec));
        let template = plan.expand(t)?;
        let template_norm = template.norm();
        if !(template_norm > 0.0) {
            return Err(Error::Degenerate("template has no energy inside the ball"));
        }
        Ok(Self { plan, template, template_norm })
    }

    /// Kernel for the subtomogram window re-centered at `shift` and the norm
    /// of that window's expansion.
    pub fn kernel(&self, f: &Volume, shift: [i32; 3]) -> Result<(XiBlocks, f64)> {
        let fs = self.plan.expand_shifted(f, shift.map(f64::from))?;
        let xi = xi_coefficients(&self.template, &fs)?.with_shift(shift);
        Ok((xi, fs.norm()))
    }
}

/// Integer shifts `s` with `|s_i| <= radius` on a lattice of `step`, in
/// lexicographic order.
pub fn shift_grid(center: [i32; 3], half: i32, step: i32, radius: i32) -> Vec<[i32; 3]> {
    let mut out = Vec::new();
    let offs: Vec<i32> = (-half..=half).filter(|o| o % step == 0).collect();
    for &dx in &offs {
        for &dy in &offs {
            for &dz in &offs {
                let s = [center[0] + dx, center[1] + dy, center[2] + dz];
                if s.iter().all(|c| c.abs() <= radius) {
                    out.push(s);
                }
            }
        }
    }
    out
}

struct ShiftOutcome {
    shift: [i32; 3],
    search: Option<RotationSearch>,
    score: f64,
}

fn better(a: &ShiftOutcome, b: &ShiftOutcome) -> bool {
    let key = |o: &ShiftOutcome| o.shift.iter().map(|c| c * c).sum::<i32>();
    if a.score != b.score {
        return a.score > b.score;
    }
    if key(a) != key(b) {
        return key(a) < key(b);
    }
    if a.shift != b.shift {
        return a.shift < b.shift;
    }
    let angle = |o: &ShiftOutcome| o.search.as_ref().map_or(f64::INFINITY, |s| s.best.rotation.angle());
    angle(a) < angle(b)
}

fn run_shift(prep: &Prepared, f: &Volume, shift: [i32; 3], bands: &[usize], cfg: &OptimizerConfig) -> Result<ShiftOutcome> {
    let (xi, f_norm) = prep.kernel(f, shift)?;
    if !(f_norm > 0.0) {
        return Ok(ShiftOutcome { shift, search: None, score: f64::NEG_INFINITY });
    }
    let search = search_rotation(&xi, bands, cfg)?;
    let score = search.best.score / (prep.template_norm * f_norm);
    Ok(ShiftOutcome { shift, search: Some(search), score })
}

/// Finds the shift `s` and rotation `g` maximizing the normalized
/// correlation `<t, R_g f_s> / (|t| |f_s|)`.
///
/// Integer shifts are searched coarse-to-fine: a lattice of `shift_step`
/// within `shift_radius`, then unit steps in a cube around the best coarse
/// shift. A wedge mask, given in the subtomogram's frame, is applied to the
/// subtomogram so that unmeasured frequencies carry no noise.
pub fn align(t: &Volume, f: &Volume, cfg: &OptimizerConfig, wedge: Option<&WedgeMask>) -> Result<AlignmentResult> {
    let start = Instant::now();
    if t.n() != f.n() {
        return Err(Error::SizeMismatch(t.n(), f.n()));
    }
    let filtered;
    let f = match wedge {
        Some(w) => {
            filtered = w.apply(f)?;
            &filtered
        }
        None => f,
    };
    if f.norm() == 0.0 {
        return Err(Error::Degenerate("subtomogram is zero"));
    }
    let prep = Prepared::new(t, cfg)?;
    let bands = match &cfg.fixed_bands {
        Some(b) => b.clone(),
        None => select_bands(&prep.kernel(f, [0; 3])?.0, &cfg.band_thresholds)?,
    };

    let coarse = shift_grid([0; 3], cfg.shift_radius, cfg.shift_step, cfg.shift_radius);
    let mut outcomes = crate::par::map_slice(&coarse, |&s| run_shift(&prep, f, s, &bands, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let best_coarse = pick(&outcomes).shift;

    let done: BTreeSet<[i32; 3]> = coarse.iter().copied().collect();
    let fine: Vec<[i32; 3]> = shift_grid(best_coarse, cfg.shift_step, 1, cfg.shift_radius)
        .into_iter()
        .filter(|s| !done.contains(s))
        .collect();
    let fine_out = crate::par::map_slice(&fine, |&s| run_shift(&prep, f, s, &bands, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    outcomes.extend(fine_out);

    let mut per_band: BTreeMap<usize, u64> = BTreeMap::new();
    let mut candidates = 0;
    for o in &outcomes {
        if let Some(s) = &o.search {
            candidates += s.candidates;
            for (&b, &n) in &s.evaluations_per_band {
                *per_band.entry(b).or_insert(0) += n;
            }
        }
    }
    let best = pick(&outcomes);
    let search = best.search.as_ref().ok_or(Error::Degenerate("no shift window holds any signal"))?;
    Ok(AlignmentResult {
        shift: best.shift,
        rotation: search.best.rotation,
        score: best.score,
        raw_score: search.best.score,
        bands,
        shifts_evaluated: outcomes.len(),
        candidates_evaluated: candidates,
        evaluations_per_band: per_band,
        evaluations_best_shift: search.evaluations(),
        wall_time: start.elapsed().as_secs_f64(),
        converged: search.best.converged,
        final_grad_norm: search.best.grad_norm,
        seed_score: search.seed_score,
        trace: search.best.trace.clone(),
    })
}

/// The kernel `align` builds for `shift`, including wedge filtering of the
/// subtomogram.
pub fn alignment_kernel(t: &Volume, f: &Volume, cfg: &OptimizerConfig, wedge: Option<&WedgeMask>, shift: [i32; 3]) -> Result<XiBlocks> {
    if t.n() != f.n() {
        return Err(Error::SizeMismatch(t.n(), f.n()));
    }
    let prep = Prepared::new(t, cfg)?;
    let xi = match wedge {
        Some(w) => prep.kernel(&w.apply(f)?, shift)?.0,
        None => prep.kernel(f, shift)?.0,
    };
    Ok(xi)
}

fn pick(outcomes: &[ShiftOutcome]) -> &ShiftOutcome {
    let mut best = &outcomes[0];
    for o in &outcomes[1..] {
        if better(o, best) {
            best = o;
        }
    }
    best
}
