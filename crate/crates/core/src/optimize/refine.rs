use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use nalgebra::{SymmetricEigen, Vector3};

use super::config::{OptimizerConfig, TraceEntry};
use super::seed::seeds_from;
use crate::error::{invalid, Result};
use crate::steer::Rotation;
use crate::xcorr::{Derivatives, XiBlocks, XiEvaluator};

/// Polar distance at which an iterate moves to the other Euler chart.
const CHART_MARGIN: f64 = 0.3;
/// Largest Newton step, radians.
const MAX_STEP: f64 = PI / 6.0;
/// Consecutive rejected steps before a band is abandoned.
const MAX_FAILURES: usize = 3;
/// Candidates closer than this (radians) are merged.
const MERGE_RADIUS: f64 = 1e-5;
/// Evaluations charged for one value + gradient + Hessian sweep.
pub(crate) const DERIVATIVE_COST: u64 = 3;

fn offset() -> Rotation {
    Rotation::about_y(FRAC_PI_2)
}

/// Evaluators for the two Euler charts of one kernel. Chart 1 parameterizes
/// `g = E(alpha, beta, gamma) Q` with `Q` a quarter turn about `y`, which moves
/// the poles of chart 0 to the equator. It is built on first use.
pub(crate) struct Charts<'a> {
    xi: &'a XiBlocks,
    l_top: usize,
    plain: XiEvaluator,
    offset: OnceLock<XiEvaluator>,
}

impl<'a> Charts<'a> {
    pub fn new(xi: &'a XiBlocks, l_top: usize) -> Self {
        Self { xi, l_top, plain: XiEvaluator::new(xi), offset: OnceLock::new() }
    }

    pub fn plain(&self) -> &XiEvaluator {
        &self.plain
    }

    fn get(&self, chart: u8) -> &XiEvaluator {
        if chart == 0 {
            &self.plain
        } else {
            self.offset.get_or_init(|| XiEvaluator::new(&self.xi.in_chart(&offset(), self.l_top)))
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Iterate {
    chart: u8,
    e: [f64; 3],
}

impl Iterate {
    fn from_rotation(g: &Rotation, chart: u8) -> Self {
        let e = if chart == 0 { g.to_euler_zyz() } else { g.compose(&offset().inverse()).to_euler_zyz() };
        Self { chart, e: [e.0, e.1, e.2] }
    }

    fn rotation(&self) -> Rotation {
        let e = Rotation::from_euler_zyz(self.e[0], self.e[1], self.e[2]);
        if self.chart == 0 {
            e
        } else {
            e.compose(&offset())
        }
    }

    fn near_pole(&self) -> bool {
        self.e[1] < CHART_MARGIN || self.e[1] > PI - CHART_MARGIN
    }

    fn switched(&self) -> Self {
        Self::from_rotation(&self.rotation(), 1 - self.chart)
    }

    /// Re-extracts canonical angles when `beta` left `(0, pi)`.
    fn normalized(mut self) -> Self {
        if self.e[1] <= 0.0 || self.e[1] >= PI {
            let g = self.rotation();
            return Self::from_rotation(&g, self.chart);
        }
        for i in [0, 2] {
            self.e[i] = (self.e[i] + PI).rem_euclid(2.0 * PI) - PI;
        }
        self
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Counter {
    pub per_band: BTreeMap<usize, u64>,
}

impl Counter {
    fn add(&mut self, band: usize, n: u64) {
        *self.per_band.entry(band).or_insert(0) += n;
    }
}

/// Outcome of refining one candidate through the band schedule.
#[derive(Debug, Clone)]
pub struct Refined {
    pub rotation: Rotation,
    /// Correlation at the highest band.
    pub score: f64,
    pub grad_norm: f64,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

struct Climb {
    converged: bool,
    d: Derivatives,
}

fn derivs(charts: &Charts, it: &Iterate, band: usize, count: &mut Counter) -> Derivatives {
    count.add(band, DERIVATIVE_COST);
    charts.get(it.chart).derivatives(it.e, band)
}

/// Damped Newton step `-(H - lambda I)^-1 grad` with
/// `lambda = max(lambda_max(H), 0) + mu |H|`, or `None` when the shifted
/// system is numerically singular.
fn newton_step(d: &Derivatives, mu: f64) -> Option<Vector3<f64>> {
    let h = d.hess_matrix();
    let hn = h.norm();
    if !(hn > 0.0) {
        return None;
    }
    let eig = SymmetricEigen::new(h);
    let top = eig.eigenvalues.max().max(0.0);
    let lambda = top + mu * hn;
    let g = Vector3::from(d.grad);
    let mut s = Vector3::zeros();
    for i in 0..3 {
        let denom = eig.eigenvalues[i] - lambda;
        if denom.abs() < 1e-14 * hn {
            return None;
        }
        let v = eig.eigenvectors.column(i);
        s -= v * (v.dot(&g) / denom);
    }
    s.iter().all(|x| x.is_finite()).then_some(s)
}

fn add(e: [f64; 3], s: &Vector3<f64>) -> [f64; 3] {
    [e[0] + s[0], e[1] + s[1], e[2] + s[2]]
}

/// Backtracking gradient ascent, used when the Newton system is singular.
fn gradient_step(charts: &Charts, it: &Iterate, d: &Derivatives, band: usize, count: &mut Counter) -> Option<Iterate> {
    let g = Vector3::from(d.grad);
    let gn = g.norm();
    if !(gn > 0.0) {
        return None;
    }
    let mut t = 0.1;
    for _ in 0..30 {
        let trial = Iterate { chart: it.chart, e: add(it.e, &(g * (t / gn))) };
        count.add(band, 1);
        if charts.get(it.chart).value(trial.e, band).re > d.value {
            return Some(trial.normalized());
        }
        t *= 0.5;
    }
    None
}

fn trace_entry(it: &Iterate, band: usize, d: &Derivatives) -> TraceEntry {
    let (a, b, c) = it.rotation().to_euler_zyz();
    TraceEntry { band, angles: [a, b, c], score: d.value, grad_norm: d.grad_norm(), chart: it.chart }
}

fn climb(
    charts: &Charts,
    cfg: &OptimizerConfig,
    it: &mut Iterate,
    band: usize,
    count: &mut Counter,
    trace: &mut Vec<TraceEntry>,
) -> Climb {
    if it.near_pole() {
        *it = it.switched();
    }
    let mut d = derivs(charts, it, band, count);
    let mut mu = cfg.step_damping;
    let mut failures = 0;
    for _ in 0..cfg.newton_max_iter {
        trace.push(trace_entry(it, band, &d));
        let scale = d.value.abs().max(f64::MIN_POSITIVE);
        if d.grad_norm() <= cfg.grad_tol * scale {
            return Climb { converged: true, d };
        }
        let Some(mut s) = newton_step(&d, mu) else {
            match gradient_step(charts, it, &d, band, count) {
                Some(next) => {
                    *it = next;
                    d = derivs(charts, it, band, count);
                    continue;
                }
                None => return Climb { converged: false, d },
            }
        };
        let norm = s.norm();
        if norm > MAX_STEP {
            s *= MAX_STEP / norm;
        }
        let g = Vector3::from(d.grad);
        let predicted = g.dot(&s) + 0.5 * s.dot(&(d.hess_matrix() * s));
        if predicted <= 1e-15 * scale {
            // The model promises nothing above rounding: stationary.
            return Climb { converged: true, d };
        }
        let trial = Iterate { chart: it.chart, e: add(it.e, &s) };
        count.add(band, 1);
        let value = charts.get(it.chart).value(trial.e, band).re;
        if value >= d.value {
            *it = trial.normalized();
            if it.near_pole() {
                *it = it.switched();
            }
            d = derivs(charts, it, band, count);
            mu = (mu * 0.1).max(1e-12);
            failures = 0;
        } else {
            mu *= 10.0;
            failures += 1;
            if failures >= MAX_FAILURES {
                return Climb { converged: false, d };
            }
        }
    }
    let converged = d.grad_norm() <= cfg.grad_tol * d.value.abs().max(f64::MIN_POSITIVE);
    trace.push(trace_entry(it, band, &d));
    Climb { converged, d }
}

fn refine_from(charts: &Charts, start: &Rotation, bands: &[usize], cfg: &OptimizerConfig, count: &mut Counter) -> Refined {
    let mut it = Iterate::from_rotation(start, 0);
    let mut trace = Vec::new();
    let mut last = None;
    for &band in bands {
        last = Some(climb(charts, cfg, &mut it, band, count, &mut trace));
    }
    let c = last.expect("bands nonempty");
    Refined { rotation: it.rotation(), score: c.d.value, grad_norm: c.d.grad_norm(), converged: c.converged, trace }
}

/// Frequency-marching refinement of one starting rotation: damped Newton
/// ascent on each band in turn, starting each band from the previous optimum.
pub fn refine(xi: &XiBlocks, start: &Rotation, bands: &[usize], cfg: &OptimizerConfig) -> Result<Refined> {
    check_bands(xi, bands)?;
    let charts = Charts::new(xi, *bands.last().unwrap());
    Ok(refine_from(&charts, start, bands, cfg, &mut Counter::default()))
}

fn check_bands(xi: &XiBlocks, bands: &[usize]) -> Result<()> {
    if bands.is_empty() {
        return Err(invalid("band list is empty"));
    }
    if bands.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("bands must be strictly increasing"));
    }
    if *bands.last().unwrap() > xi.l_max() {
        return Err(invalid("band exceeds the kernel degree"));
    }
    Ok(())
}

/// Best rotation for one kernel, with bookkeeping.
#[derive(Debug, Clone)]
pub struct RotationSearch {
    pub best: Refined,
    /// Score of the winning seed evaluated at the highest band.
    pub seed_score: f64,
    pub candidates: usize,
    pub evaluations_per_band: BTreeMap<usize, u64>,
}

impl RotationSearch {
    pub fn evaluations(&self) -> u64 {
        self.evaluations_per_band.values().sum()
    }
}

struct Track {
    seed: Rotation,
    it: Iterate,
    trace: Vec<TraceEntry>,
    last: Option<Climb>,
}

/// Seeds on the lowest band, then marches every surviving candidate up the
/// bands. Candidates that merge are deduplicated after each band.
pub fn search_rotation(xi: &XiBlocks, bands: &[usize], cfg: &OptimizerConfig) -> Result<RotationSearch> {
    check_bands(xi, bands)?;
    let top = *bands.last().unwrap();
    let charts = Charts::new(xi, top);
    let mut count = Counter::default();

    let (seeds, n_grid) = seeds_from(charts.plain(), bands[0], cfg.seed_grid_step, cfg.max_candidates);
    count.add(bands[0], n_grid);
    let candidates = seeds.len();
    if seeds.is_empty() {
        return Err(crate::Error::Degenerate("no local maxima on the seeding grid"));
    }
    let mut tracks: Vec<Track> = seeds
        .iter()
        .map(|s| {
            let seed = Rotation::from_euler_zyz(s.angles[0], s.angles[1], s.angles[2]);
            Track { seed, it: Iterate::from_rotation(&seed, 0), trace: Vec::new(), last: None }
        })
        .collect();

    for &band in bands {
        for t in tracks.iter_mut() {
            t.last = Some(climb(&charts, cfg, &mut t.it, band, &mut count, &mut t.trace));
        }
        let mut kept: Vec<Track> = Vec::with_capacity(tracks.len());
        for t in tracks {
            let r = t.it.rotation();
            if !kept.iter().any(|k| k.it.rotation().inverse().compose(&r).angle() < MERGE_RADIUS) {
                kept.push(t);
            }
        }
        tracks = kept;
        if cfg.prune_after_band && tracks.len() > 1 {
            let best = best_index(&tracks);
            tracks = vec![tracks.swap_remove(best)];
        }
    }

    let mut results: Vec<(Refined, f64)> = tracks
        .into_iter()
        .map(|t| {
            let c = t.last.expect("at least one band");
            let refined = Refined {
                rotation: t.it.rotation(),
                score: c.d.value,
                grad_norm: c.d.grad_norm(),
                converged: c.converged,
                trace: t.trace,
            };
            let s = t.seed.to_euler_zyz();
            count.add(top, 1);
            let seed_score = charts.plain().value([s.0, s.1, s.2], top).re;
            if seed_score > refined.score {
                // Marching drifted to a worse peak; climb the top band from the seed.
                let mut again = refine_from(&charts, &t.seed, &[top], cfg, &mut count);
                if again.score >= refined.score {
                    let mut trace = refined.trace;
                    trace.append(&mut again.trace);
                    again.trace = trace;
                    return (again, seed_score);
                }
            }
            (refined, seed_score)
        })
        .collect();

    let mut best = 0;
    for i in 1..results.len() {
        if results[i].0.score > results[best].0.score {
            best = i;
        }
    }
    let (best, seed_score) = results.swap_remove(best);
    Ok(RotationSearch { best, seed_score, candidates, evaluations_per_band: count.per_band })
}

fn best_index(tracks: &[Track]) -> usize {
    let score = |t: &Track| t.last.as_ref().map_or(f64::NEG_INFINITY, |c| c.d.value);
    let mut best = 0;
    for i in 1..tracks.len() {
        if score(&tracks[i]) > score(&tracks[best]) {
            best = i;
        }
    }
    best
}
