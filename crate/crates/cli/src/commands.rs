use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use bhalign::basis::{synthesize, BasisSpec, ExpansionPlan};
use bhalign::optimize::{alignment_kernel, band_scan, exhaustive_baseline, landscape_slice, OptimizerConfig};
use bhalign::par::current_num_threads;
use bhalign::volio::{geodesic_degrees, make_phantom, read_mrc, write_mrc, PhantomSpec, GENERATOR};
use bhalign::{Rotation, Volume, WedgeMask};

use crate::report::*;
use crate::{AlignArgs, BandscanArgs, BenchArgs, CliError, ExpandArgs, Inputs, LandscapeArgs, PhantomArgs, SearchArgs};

fn triple<T: Copy>(v: &[T], flag: &str) -> Result<[T; 3], CliError> {
    match v {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(CliError::Usage(format!("--{flag} takes exactly three comma-separated values"))),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn load(inputs: &Inputs) -> Result<(Volume, Volume, Option<WedgeMask>), CliError> {
    let t = read_mrc(&inputs.template).map_err(|e| io_err(&inputs.template, e))?;
    let f = read_mrc(&inputs.subtomo).map_err(|e| io_err(&inputs.subtomo, e))?;
    if t.n() != f.n() {
        return Err(CliError::Usage(format!("template is {}^3 but subtomogram is {}^3", t.n(), f.n())));
    }
    let wedge = match inputs.wedge {
        Some(theta) => Some(WedgeMask::new(f.n(), theta, triple(&inputs.tilt_axis, "tilt-axis")?)?),
        None => None,
    };
    Ok((t, f, wedge))
}

fn search_config(s: &SearchArgs) -> Result<OptimizerConfig, CliError> {
    let mut cfg: OptimizerConfig = match &s.config {
        Some(p) => read_json(p)?,
        None => OptimizerConfig::default(),
    };
    if let Some(l) = s.lmax {
        cfg.l_max = l;
    }
    if let Some(b) = &s.bands {
        cfg.fixed_bands = Some(b.clone());
    }
    if let Some(t) = &s.thresholds {
        cfg.band_thresholds = t.clone();
        cfg.fixed_bands = None;
    }
    if let Some(r) = s.shift_radius {
        cfg.shift_radius = r;
    }
    if let Some(st) = s.shift_step {
        cfg.shift_step = st;
    }
    if let Some(m) = s.max_candidates {
        cfg.max_candidates = m;
    }
    if let Some(d) = s.seed_step {
        cfg.seed_grid_step = d.to_radians();
    }
    if let Some(i) = s.newton_iter {
        cfg.newton_max_iter = i;
    }
    if s.lambda_cut.is_some() {
        cfg.lambda_cut = s.lambda_cut;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Human summary goes to stdout unless stdout carries the machine output.
fn summary(stdout_free: bool, text: &str) {
    if stdout_free {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
}

pub fn phantom(a: PhantomArgs) -> Result<(), CliError> {
    let true_rotation = match &a.rot_euler {
        Some(v) => {
            let [al, be, ga] = triple(v, "rot-euler")?;
            Some(Rotation::from_euler_zyz(al.to_radians(), be.to_radians(), ga.to_radians()))
        }
        None => None,
    };
    let true_shift = match &a.shift {
        Some(v) => Some(triple(v, "shift")?),
        None => None,
    };
    let spec = PhantomSpec {
        n: a.n,
        blobs: a.blobs,
        support_radius: a.support,
        seed: a.seed,
        snr: a.snr,
        wedge_theta: a.wedge,
        tilt_axis: triple(&a.tilt_axis, "tilt-axis")?,
        true_rotation,
        true_shift,
        voxel_size: a.voxel_size,
    };
    let p = make_phantom(&spec)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| io_err(&a.out_dir, e))?;
    let t_path = a.out_dir.join("template.mrc");
    let s_path = a.out_dir.join("subtomo.mrc");
    write_mrc(&p.template, &t_path).map_err(|e| io_err(&t_path, e))?;
    write_mrc(&p.subtomogram, &s_path).map_err(|e| io_err(&s_path, e))?;
    let g = p.truth.rotation;
    let (al, be, ga) = g.to_euler_zyz();
    let truth = Truth {
        quaternion: g.quaternion(),
        euler_zyz_deg: [al.to_degrees(), be.to_degrees(), ga.to_degrees()],
        shift: p.truth.shift,
        expected_alignment: g.inverse().quaternion(),
        generator: GENERATOR.to_string(),
        spec,
    };
    let truth_path = a.out_dir.join("truth.json");
    write_json(&truth, Some(&truth_path))?;
    println!(
        "wrote {}^3 phantom to {} (rotation {:.2} deg, shift {:?})",
        a.n,
        a.out_dir.display(),
        g.angle().to_degrees(),
        p.truth.shift
    );
    Ok(())
}

pub fn expand(a: ExpandArgs) -> Result<(), CliError> {
    let v = read_mrc(&a.input).map_err(|e| io_err(&a.input, e))?;
    let spec = match a.lambda_cut {
        Some(c) => BasisSpec::build(a.lmax, c)?,
        None => BasisSpec::for_grid(a.lmax, v.n())?,
    };
    let plan = ExpansionPlan::new(Arc::new(spec));
    let e = plan.expand(&v)?;
    let spec = e.spec();
    let energy_by_degree = (0..=spec.l_max()).map(|l| e.block(l).iter().map(|c| c.norm_sqr()).sum()).collect();
    let coefficients = spec.indices().zip(e.coeffs()).map(|(i, c)| (i.k, i.l, i.m, c.re, c.im)).collect();
    let dump = ExpansionDump {
        version: VERSION.to_string(),
        n: v.n(),
        l_max: spec.l_max(),
        lambda_cut: spec.lambda_cut(),
        count: spec.len(),
        energy: e.energy(),
        energy_by_degree,
        coefficients,
    };
    write_json(&dump, Some(&a.out))?;
    if let Some(path) = &a.synthesize {
        let back = synthesize(&e, v.n(), v.voxel_size())?;
        write_mrc(&back, path).map_err(|e| io_err(path, e))?;
    }
    println!("{} coefficients up to l = {}, lambda_cut {:.3}", dump.count, dump.l_max, dump.lambda_cut);
    Ok(())
}

fn truth_check(path: Option<&Path>, shift: [i32; 3], g: &Rotation) -> Result<Option<TruthCheck>, CliError> {
    let Some(p) = path else { return Ok(None) };
    let truth: Truth = read_json(p)?;
    Ok(Some(TruthCheck {
        geodesic_error_deg: geodesic_degrees(g, &truth.rotation().inverse()),
        shift_correct: shift == truth.shift,
    }))
}

pub fn align(a: AlignArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = search_config(&a.search)?;
    let (t, f, wedge) = load(&a.inputs)?;
    let mut times = PhaseTimes { load: start.elapsed().as_secs_f64(), ..Default::default() };

    let result = bhalign::align(&t, &f, &cfg, wedge.as_ref())?;
    times.align = result.wall_time;
    let t0 = Instant::now();
    let xi = alignment_kernel(&t, &f, &cfg, wedge.as_ref(), result.shift)?;
    let band_energy_ratios = band_scan(&xi)?;
    times.bandscan = t0.elapsed().as_secs_f64();
    let truth = truth_check(a.search.truth.as_deref(), result.shift, &result.rotation)?;
    times.total = start.elapsed().as_secs_f64();

    let converged = result.converged;
    let report = RunReport {
        version: VERSION.to_string(),
        threads: current_num_threads(),
        template: a.inputs.template.display().to_string(),
        subtomo: a.inputs.subtomo.display().to_string(),
        wedge_deg: a.inputs.wedge,
        config: cfg,
        result,
        band_energy_ratios,
        truth,
        times,
    };
    write_json(&report, a.report.as_deref())?;

    let r = &report.result;
    let (al, be, ga) = r.rotation.to_euler_zyz();
    let mut text = format!(
        "shift {:?}, rotation zyz ({:.3}, {:.3}, {:.3}) deg, score {:.5}, {} evaluations over {} shifts, {:.1} s{}\n",
        r.shift,
        al.to_degrees(),
        be.to_degrees(),
        ga.to_degrees(),
        r.score,
        r.total_evaluations(),
        r.shifts_evaluated,
        report.times.total,
        if converged { "" } else { ", not converged" }
    );
    if let Some(c) = &report.truth {
        let _ = writeln!(text, "geodesic error {:.4} deg, shift correct: {}", c.geodesic_error_deg, c.shift_correct);
    }
    summary(a.report.is_some(), &text);
    if converged {
        Ok(())
    } else {
        Err(CliError::NotConverged)
    }
}

pub fn bandscan(a: BandscanArgs) -> Result<(), CliError> {
    let (t, f, wedge) = load(&a.inputs)?;
    let cfg = OptimizerConfig { l_max: a.lmax, fixed_bands: Some(vec![a.lmax]), ..Default::default() };
    let xi = alignment_kernel(&t, &f, &cfg, wedge.as_ref(), triple(&a.shift, "shift")?)?;
    let rows = band_scan(&xi)?;
    let mut csv = String::from("L,energy_ratio,eval_cost_fraction\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{}", r.l, r.energy_ratio, r.eval_cost_fraction);
    }
    match &a.out {
        Some(p) => {
            std::fs::write(p, csv).map_err(|e| io_err(p, e))?;
            println!("wrote {} rows to {}", rows.len(), p.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn bench(a: BenchArgs) -> Result<(), CliError> {
    if !(a.baseline_step > 0.0 && a.baseline_step <= 180.0) {
        return Err(CliError::Usage("--baseline-step must lie in (0, 180] degrees".into()));
    }
    let start = Instant::now();
    let cfg = search_config(&a.search)?;
    let (t, f, wedge) = load(&a.inputs)?;
    let mut times = PhaseTimes { load: start.elapsed().as_secs_f64(), ..Default::default() };

    let result = bhalign::align(&t, &f, &cfg, wedge.as_ref())?;
    times.align = result.wall_time;
    let xi = alignment_kernel(&t, &f, &cfg, wedge.as_ref(), result.shift)?;
    let band = *result.bands.last().expect("bands are nonempty");
    let t0 = Instant::now();
    let base = exhaustive_baseline(&xi, band, a.baseline_step.to_radians())?;
    times.baseline = t0.elapsed().as_secs_f64();
    times.total = start.elapsed().as_secs_f64();

    let truth = truth_check(a.search.truth.as_deref(), result.shift, &result.rotation)?;
    let base_truth = truth_check(a.search.truth.as_deref(), result.shift, &base.rotation)?;
    let agreement_deg = geodesic_degrees(&result.rotation, &base.rotation);
    let report = BenchReport {
        version: VERSION.to_string(),
        threads: current_num_threads(),
        config: cfg,
        align_error_deg: truth.map(|c| c.geodesic_error_deg),
        baseline: BaselineSummary {
            step_deg: a.baseline_step,
            band,
            evaluations: base.evaluations,
            rotation: base.rotation,
            score: base.score,
            wall_time: times.baseline,
            geodesic_error_deg: base_truth.map(|c| c.geodesic_error_deg),
        },
        evaluation_ratio: base.evaluations as f64 / result.total_evaluations() as f64,
        evaluation_ratio_same_kernel: base.evaluations as f64 / result.evaluations_best_shift as f64,
        agreement_deg,
        within_grid_resolution: agreement_deg <= a.baseline_step * 3f64.sqrt(),
        align: result,
        times,
    };
    write_json(&report, a.report.as_deref())?;
    let mut text = format!(
        "baseline {} evaluations at {} deg; align {} ({}x fewer), {} at the winning shift ({}x fewer); answers {:.3} deg apart\n",
        report.baseline.evaluations,
        a.baseline_step,
        report.align.total_evaluations(),
        report.evaluation_ratio.round(),
        report.align.evaluations_best_shift,
        report.evaluation_ratio_same_kernel.round(),
        agreement_deg
    );
    if let (Some(e1), Some(e2)) = (report.align_error_deg, report.baseline.geodesic_error_deg) {
        let _ = writeln!(text, "geodesic error: align {e1:.4} deg, baseline {e2:.4} deg");
    }
    summary(a.report.is_some(), &text);
    Ok(())
}

pub fn landscape(a: LandscapeArgs) -> Result<(), CliError> {
    if a.n_alpha < 2 || a.n_beta < 1 {
        return Err(CliError::Usage("need at least two alpha and one beta sample".into()));
    }
    let (t, f, wedge) = load(&a.inputs)?;
    let mut bands = a.bands.clone();
    bands.sort_unstable();
    bands.dedup();
    let cfg = OptimizerConfig { l_max: a.lmax, fixed_bands: Some(bands.clone()), ..Default::default() };
    cfg.validate()?;
    let xi = alignment_kernel(&t, &f, &cfg, wedge.as_ref(), triple(&a.shift, "shift")?)?;
    let alphas: Vec<f64> = (0..a.n_alpha).map(|j| 2.0 * PI * j as f64 / a.n_alpha as f64).collect();
    let betas: Vec<f64> = (0..a.n_beta).map(|j| PI * (j as f64 + 0.5) / a.n_beta as f64).collect();
    let mut csv = String::from("band,alpha,beta,value,d_alpha\n");
    let mut text = String::new();
    for &band in &bands {
        let s = landscape_slice(&xi, band, &alphas, &betas, a.gamma.to_radians())?;
        for (ib, &b) in betas.iter().enumerate() {
            for (ia, &al) in alphas.iter().enumerate() {
                let i = ib * alphas.len() + ia;
                let _ = writeln!(csv, "{band},{al},{b},{},{}", s.values[i], s.d_alpha[i]);
            }
        }
        let _ = writeln!(text, "L = {band}: {} sign changes of dC/dalpha", s.sign_changes());
    }
    match &a.out {
        Some(p) => std::fs::write(p, csv).map_err(|e| io_err(p, e))?,
        None => print!("{csv}"),
    }
    summary(a.out.is_some(), &text);
    Ok(())
}
