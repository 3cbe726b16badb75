//! Scenario execution: each kind produces the data files of the figure it
//! mirrors, plus a manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use uavnet_core::analytic::{
    self, coverage_from_approx, ergodic_rate_from_approx, gamma_approximations, signal_pdf,
    RateForm,
};
use uavnet_core::formation;
use uavnet_core::montecarlo::{
    coverage_from_sirs, empirical_pdf, rate_from_sirs, MetricEstimate, Scheme,
};
use uavnet_core::specialfn::reg_lower_gamma;
use uavnet_core::tracking::{self, DynamicsBounds, TargetModel};

use crate::config::{parse_scheme, Kind, ScenarioConfig};
use crate::csvio::{self, CoverageRow, RateRow};
use crate::manifest::write_manifest;
use crate::parallel;
use crate::CliError;

pub struct RunOutcome {
    pub artifacts: Vec<String>,
}

pub fn run_scenario(cfg: &ScenarioConfig, threads: usize) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let out_dir = PathBuf::from(&cfg.out_dir);
    let artifacts = match cfg.kind {
        Kind::Formation => run_formation(cfg, &out_dir)?,
        Kind::Tracking => run_tracking(cfg, &out_dir)?,
        Kind::Coverage => run_coverage(cfg, &out_dir, threads)?,
        Kind::Rate => run_rate(cfg, &out_dir, threads)?,
        Kind::Compare => run_compare(cfg, &out_dir, threads)?,
        Kind::Pdfcheck => run_pdfcheck(cfg, &out_dir, threads)?,
    };
    write_manifest(&out_dir, cfg, started.elapsed().as_secs_f64(), &artifacts)?;
    Ok(RunOutcome { artifacts })
}

fn to_runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(format!("{e}"))
}

fn formation_err(e: uavnet_core::formation::FormationError) -> CliError {
    match e {
        uavnet_core::formation::FormationError::Config(m) => {
            CliError::Validation(format!("formation: {m}"))
        }
        other => CliError::Runtime(format!("{other}")),
    }
}

fn tracking_err(e: uavnet_core::tracking::TrackingError) -> CliError {
    match e {
        uavnet_core::tracking::TrackingError::Config(m) => {
            CliError::Validation(format!("tracking: {m}"))
        }
        other => CliError::Runtime(format!("{other}")),
    }
}

fn run_formation(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let fc = &cfg.formation;
    let params = formation::case_study_params(fc.scenario_seed);
    let init = formation::case_study_initial(&params, fc.scenario_seed);
    let noise = (fc.noise_intensity > 0.0)
        .then_some(formation::NoiseConfig { intensity: fc.noise_intensity, seed: cfg.master_seed });
    let run =
        formation::simulate_formation(&params, &init, fc.t_end_s, fc.dt_s, fc.output_stride, noise)
            .map_err(formation_err)?;
    if run.diverged {
        return Err(CliError::Runtime("formation run diverged".into()));
    }
    let lap = formation::laplacian(&params.adjacency);
    let (rho1, rho2) =
        params.dynamics.estimate_lipschitz(&formation::Envelope::CASE_STUDY, cfg.master_seed);
    let report =
        formation::theorem1_check(&lap, &params.pinning_gains, rho1, rho2, &params.gain_schedule)
            .map_err(to_runtime)?;
    println!(
        "formation feasibility: q = {:?}, lambda_max(P) = {:.4}, lambda_min(Q) = {:.4}",
        report.q, report.lambda_max_p, report.lambda_min_q
    );
    println!(
        "  gain bound (Lipschitz-only d = {:.3e}): c_min = {:.3e}, schedule satisfied: {:?}",
        report.d_lipschitz, report.c_min_lipschitz, report.satisfied_for
    );
    println!(
        "  gain bound (strict d = {:.4}): c_min = {:.4}, schedule satisfied: {:?}",
        report.d_strict, report.c_min_strict, report.satisfied_strict
    );
    let path = out.join("fig4_errors.csv");
    csvio::write_lines(&path, &csvio::formation_csv(&run.samples))?;
    Ok(vec!["fig4_errors.csv".into()])
}

fn run_tracking(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let tc = &cfg.tracking;
    let params = tracking::TrackParams::case_study();
    let mut imp = tracking::ImpulsiveParams::case_study();
    imp.tau = tc.tau_s;
    imp.rho = tc.rho;
    let mut target = TargetModel::case_study_zigzag();
    if let TargetModel::Waypoints { speed, .. } = &mut target {
        *speed = tc.target_speed;
    }
    let bounds = DynamicsBounds::estimate(
        &params.dynamics,
        &formation::Envelope::CASE_STUDY,
        tc.target_speed,
        cfg.master_seed,
    );
    let init = tracking::case_study_initial(&params, tc.scenario_seed);
    let run = tracking::simulate_tracking(
        &params,
        &imp,
        &target,
        &bounds,
        &init,
        tc.t_end_s,
        tc.dt_s,
        tc.output_stride,
    )
    .map_err(tracking_err)?;
    if run.diverged {
        return Err(CliError::Runtime("tracking run diverged".into()));
    }
    let r = &run.report;
    println!(
        "tracking feasibility: eta = {:.3} (eigen term {:.3}), beta = {:.3}, condition = {:?}",
        r.eta, r.eta_eigen_term, r.beta, r.condition_values
    );
    println!(
        "  satisfied: {} (rho = {}, largest feasible rho = {:.4}); R_Q = {:.3} m, max errors {:.3} m / {:.3} m/s",
        r.satisfied, r.rho_used, r.rho_max_feasible, r.r_q, run.max_pos_err, run.max_vel_err
    );
    csvio::write_lines(&out.join("fig5_errors.csv"), &csvio::tracking_csv(&run.samples))?;
    csvio::write_lines(&out.join("fig5_impulses.csv"), &csvio::impulse_csv(&run.impulses))?;
    Ok(vec!["fig5_errors.csv".into(), "fig5_impulses.csv".into()])
}

fn run_coverage(cfg: &ScenarioConfig, out: &Path, threads: usize) -> Result<Vec<String>, CliError> {
    let mc = &cfg.monte_carlo;
    let scheme = parse_scheme(&mc.scheme)?;
    let lambda_km2 = cfg.network.density_per_km2;
    let m = cfg.network.nakagami_m;
    let mut rows: Vec<CoverageRow> = Vec::new();
    for &alpha in &mc.alphas {
        let mut net = cfg.network.clone();
        net.alpha = alpha;
        let mcc = mc.mc_config(&net, cfg.master_seed, scheme)?;
        let sirs = parallel::collect_sirs(&mcc, threads)?;
        for (gdb, (g, est)) in mc.gamma_db.iter().zip(coverage_from_sirs(&sirs, &mcc.gamma_grid)) {
            rows.push(CoverageRow {
                scheme: scheme.label().into(),
                alpha,
                lambda_per_km2: lambda_km2,
                m,
                gamma_db: *gdb,
                gamma_linear: g,
                est,
            });
        }
        // analytic curve alongside
        let napprox = gamma_approximations(&net.params()?).map_err(to_runtime)?;
        for (gdb, g) in mc.gamma_db.iter().zip(mcc.gamma_grid.iter()) {
            let cov = coverage_from_approx(*g, &napprox.0, &napprox.1).map_err(to_runtime)?;
            rows.push(CoverageRow {
                scheme: "analytic".into(),
                alpha,
                lambda_per_km2: lambda_km2,
                m,
                gamma_db: *gdb,
                gamma_linear: *g,
                est: MetricEstimate { value: cov.value, std_err: 0.0, trials_used: 0 },
            });
        }
    }
    csvio::write_lines(&out.join("fig7_coverage.csv"), &csvio::coverage_csv(&rows))?;
    Ok(vec!["fig7_coverage.csv".into()])
}

fn run_rate(cfg: &ScenarioConfig, out: &Path, threads: usize) -> Result<Vec<String>, CliError> {
    let mc = &cfg.monte_carlo;
    let scheme = parse_scheme(&mc.scheme)?;
    let m = cfg.network.nakagami_m;
    let mut rows: Vec<RateRow> = Vec::new();
    for &lambda_km2 in &mc.densities_per_km2 {
        for &alpha in &mc.alphas {
            let mut net = cfg.network.clone();
            net.alpha = alpha;
            net.density_per_km2 = lambda_km2;
            let mcc = mc.mc_config(&net, cfg.master_seed, scheme)?;
            let sirs = parallel::collect_sirs(&mcc, threads)?;
            rows.push(RateRow {
                scheme: scheme.label().into(),
                alpha,
                lambda_per_km2: lambda_km2,
                m,
                est: rate_from_sirs(&sirs),
            });
            let params = net.params()?;
            let (sig, intf) = gamma_approximations(&params).map_err(to_runtime)?;
            let rate =
                ergodic_rate_from_approx(&sig, &intf, RateForm::Pcf42).map_err(to_runtime)?;
            rows.push(RateRow {
                scheme: "analytic".into(),
                alpha,
                lambda_per_km2: lambda_km2,
                m,
                est: MetricEstimate { value: rate.value, std_err: 0.0, trials_used: 0 },
            });
        }
    }
    csvio::write_lines(&out.join("fig7_rate.csv"), &csvio::rate_csv(&rows))?;
    Ok(vec!["fig7_rate.csv".into()])
}

pub const COMPARE_SCHEMES: [Scheme; 6] = [
    Scheme::ProposedDelaunay4,
    Scheme::NoComp,
    Scheme::Conventional { n: 1 },
    Scheme::Conventional { n: 2 },
    Scheme::Conventional { n: 3 },
    Scheme::Conventional { n: 4 },
];

fn run_compare(cfg: &ScenarioConfig, out: &Path, threads: usize) -> Result<Vec<String>, CliError> {
    let mc = &cfg.monte_carlo;
    let lambda_km2 = cfg.network.density_per_km2;
    let m = cfg.network.nakagami_m;
    let mcc = mc.mc_config(&cfg.network, cfg.master_seed, Scheme::ProposedDelaunay4)?;
    let streams = parallel::collect_compare(&mcc, &COMPARE_SCHEMES, threads)?;
    let mut rows = Vec::new();
    for (scheme, sirs) in COMPARE_SCHEMES.iter().zip(&streams) {
        for (gdb, (g, est)) in mc.gamma_db.iter().zip(coverage_from_sirs(sirs, &mcc.gamma_grid)) {
            rows.push(CoverageRow {
                scheme: scheme.label().into(),
                alpha: cfg.network.alpha,
                lambda_per_km2: lambda_km2,
                m,
                gamma_db: *gdb,
                gamma_linear: g,
                est,
            });
        }
    }
    csvio::write_lines(&out.join("fig8_compare.csv"), &csvio::coverage_csv(&rows))?;
    Ok(vec!["fig8_compare.csv".into()])
}

fn run_pdfcheck(cfg: &ScenarioConfig, out: &Path, threads: usize) -> Result<Vec<String>, CliError> {
    let mc = &cfg.monte_carlo;
    let mcc = mc.mc_config(&cfg.network, cfg.master_seed, Scheme::ProposedDelaunay4)?;
    let samples = parallel::collect_samples(&mcc, threads)?;
    let params = cfg.network.params()?;
    let (sig, intf) = gamma_approximations(&params).map_err(to_runtime)?;

    let s: Vec<f64> = samples.iter().map(|v| v.signal_power).collect();
    let i: Vec<f64> = samples.iter().map(|v| v.interference_power).collect();
    let z: Vec<f64> = samples.iter().map(|v| v.sir).collect();

    let mut lines = vec!["quantity,bin_lo,bin_hi,density_mc,density_analytic".to_string()];
    let mut emit = |name: &str, data: &[f64], pdf: &dyn Fn(f64) -> f64| -> Result<(), CliError> {
        // clip the top half-percent so the histogram spans the visible bulk
        let mut sorted = data.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let hi = sorted[((sorted.len() as f64 * 0.995) as usize).min(sorted.len() - 1)];
        let clipped: Vec<f64> = sorted.into_iter().filter(|&v| v <= hi).collect();
        let hist = empirical_pdf(&clipped, mc.bins).map_err(to_runtime)?;
        for k in 0..hist.densities.len() {
            let (lo, hi) = (hist.edges[k], hist.edges[k + 1]);
            let mid = 0.5 * (lo + hi);
            lines.push(format!("{name},{lo},{hi},{},{}", hist.densities[k], pdf(mid)));
        }
        Ok(())
    };
    emit("signal", &s, &|x| signal_pdf(&sig, x))?;
    emit("interference", &i, &|x| {
        // Gamma pdf of the interference approximation
        let (k, th) = (intf.shape, intf.scale);
        if x <= 0.0 {
            0.0
        } else {
            ((k - 1.0) * x.ln() - x / th - k * th.ln() - uavnet_core::specialfn::ln_gamma(k)).exp()
        }
    })?;
    emit("sir", &z, &|x| analytic::sir_pdf_from_approx(&sig, &intf, x).unwrap_or(f64::NAN))?;
    csvio::write_lines(&out.join("fig6_pdfs.csv"), &lines)?;

    // sup-CDF summary on stdout
    let sup = |mut data: Vec<f64>, cdf: &dyn Fn(f64) -> f64| {
        data.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = data.len() as f64;
        let mut d = 0.0f64;
        for (idx, &x) in data.iter().enumerate() {
            let c = cdf(x);
            d = d.max(((idx + 1) as f64 / n - c).abs()).max((c - idx as f64 / n).abs());
        }
        d
    };
    let d_s = sup(s, &|x| reg_lower_gamma(sig.shape, x.max(0.0).sqrt() / sig.scale).unwrap());
    let d_i = sup(i, &|x| intf.cdf(x).unwrap());
    let d_z = sup(z, &|x| 1.0 - coverage_from_approx(x.max(1e-12), &sig, &intf).unwrap().value);
    println!("pdfcheck sup-CDF distances: S {d_s:.4}, I {d_i:.4}, SIR {d_z:.4}");
    Ok(vec!["fig6_pdfs.csv".into()])
}
