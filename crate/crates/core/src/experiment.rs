//! Runs a configured experiment and writes its outputs.
//!
//! All numerical work finishes before the output directory is touched, so a
//! failed run leaves nothing behind.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::analysis::{error_series, fit_decay_window, l2_pairs, nonresonant_duhamel, ErrorSample};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::finalstate::{
    construct_backward, tail_proxy, weighted_norm_parts, PicardMap, Scenario, TheoremParameters,
};
use crate::nonlinearity::{check_assumption, fourier_coefficients, lipschitz_check, AngularFunction};
use crate::report::{csv, ClassificationSummary, ScatteringReport, SweepEntry};
use crate::spectral::{Integrator, Trajectory};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "CRITNLS_OUT";

/// Report plus the files to write, keyed by file name.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ScatteringReport,
    pub files: Vec<(String, String)>,
}

impl RunOutput {
    /// Writes `report.json` and every auxiliary file into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.files.len() + 1);
        for (name, body) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
        }
        let path = dir.join("report.json");
        std::fs::write(&path, self.report.to_json())?;
        written.push(path);
        Ok(written)
    }
}

/// Output directory: the explicit argument, else the config's `out`, else
/// `$CRITNLS_OUT/<experiment>-<hash prefix>`, else `critnls-out/…`.
pub fn output_dir(cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(dir) = explicit {
        return dir.to_path_buf();
    }
    if let Some(out) = &cfg.out {
        return PathBuf::from(out);
    }
    let root = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("critnls-out"), PathBuf::from);
    root.join(format!("{}-{}", cfg.experiment, &cfg.hash()[..12]))
}

/// Runs and writes in one go.
pub fn execute(cfg: &ExperimentConfig, dir: &Path) -> Result<ScatteringReport> {
    let out = run(cfg)?;
    out.write(dir)?;
    Ok(out.report)
}

/// Runs the configured experiment without writing anything.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let nl = AngularFunction::from_preset(cfg.preset, cfg.params.dim)?;
    let spectrum = fourier_coefficients(&nl, cfg.modes)?;
    let mut report = empty_report(cfg);
    let mut files = vec![("spectrum.csv".to_string(), spectrum.to_csv())];
    match cfg.experiment {
        Experiment::Classify => {
            let details = check_assumption(&spectrum, cfg.params.eta, cfg.tol)?;
            report.classification = Some(ClassificationSummary {
                range_type: details.range_type,
                g1: spectrum.coefficient(1),
                g3: spectrum.coefficient(3),
                modes: cfg.modes,
                lipschitz_sup: lipschitz_check(&nl, cfg.lipschitz_samples, cfg.seed),
                lipschitz_samples: cfg.lipschitz_samples,
                details,
            });
        }
        Experiment::Scatter => {
            let sc = scenario(cfg, &nl, cfg.params.eps)?;
            let run = scatter(cfg, &sc)?;
            files.push(("series_error.csv".into(), error_csv(&run.series, &run.unmodified)));
            report.time_series = run.series;
            report.fitted_exponent = run.fitted.map(|f| f.0);
            report.fit_r_squared = run.fitted.map(|f| f.1);
            report.unmodified_exponent = run.unmodified_exponent;
            report.weighted_norm = Some(run.weighted);
            report.tail_proxy = Some(run.tail);
        }
        Experiment::Picard => {
            let sc = scenario(cfg, &nl, cfg.params.eps)?;
            let map = PicardMap::new(&sc)?;
            let picard = map.iterate(cfg.picard_iterations)?;
            let backward = construct_backward(&sc, cfg.steps, &integrator(cfg))?;
            let (a, b) = (&picard.limit.fields()[0], &backward.fields()[0]);
            let scale = b.norm_l2();
            report.picard_agreement = Some(if scale > 0.0 { a.sub(b)?.norm_l2() / scale } else { 0.0 });
            let series = error_series(&picard.limit, &sc.final_data, sc.g1())?;
            let diff = picard.limit.sub(map.profile())?;
            report.weighted_norm = Some(weighted_norm_parts(&diff, cfg.params.b));
            report.tail_proxy = Some(map.tail_proxy());
            files.push((
                "series_picard.csv".into(),
                csv(
                    "k,distance,ratio",
                    picard.distances.iter().enumerate().map(|(k, d)| {
                        let ratio = if k == 0 { f64::NAN } else { picard.ratios[k - 1] };
                        vec![k as f64, *d, ratio]
                    }),
                ),
            ));
            let unmod = error_series(&picard.limit, &sc.final_data, 0.0)?;
            files.push(("series_error.csv".into(), error_csv(&series, &unmod)));
            report.time_series = series;
            report.picard_distances = picard.distances;
            report.picard_ratios = picard.ratios;
        }
        Experiment::Duhamel => {
            let sc = scenario(cfg, &nl, cfg.params.eps)?;
            let series = nonresonant_duhamel(&sc, cfg.substeps)?;
            if let Some((e, r2)) = try_fit(&series, cfg) {
                report.fitted_exponent = Some(e);
                report.fit_r_squared = Some(r2);
            }
            report.tail_proxy = Some(tail_proxy(&sc)?);
            files.push((
                "series_duhamel.csv".into(),
                csv("t,norm", series.iter().map(|(t, v)| vec![*t, *v])),
            ));
            report.duhamel_series = series;
        }
        Experiment::Sweep => {
            let scenarios = cfg
                .sweep_eps
                .iter()
                .map(|&eps| scenario(cfg, &nl, eps))
                .collect::<Result<Vec<_>>>()?;
            let entries = scenarios
                .par_iter()
                .map(|sc| {
                    let run = scatter(cfg, sc)?;
                    Ok(SweepEntry {
                        eps: sc.params.eps,
                        fitted_exponent: run.fitted.map(|f| f.0),
                        fit_r_squared: run.fitted.map(|f| f.1),
                        unmodified_exponent: run.unmodified_exponent,
                        weighted_norm: run.weighted,
                        error_at_start: run.series[0].l2_error,
                        tail_proxy: run.tail,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            files.push((
                "series_sweep.csv".into(),
                csv(
                    "eps,fitted_exponent,unmodified_exponent,weighted_norm,error_at_start,tail_proxy",
                    entries.iter().map(|e| {
                        vec![
                            e.eps,
                            e.fitted_exponent.unwrap_or(f64::NAN),
                            e.unmodified_exponent.unwrap_or(f64::NAN),
                            e.weighted_norm.total,
                            e.error_at_start,
                            e.tail_proxy,
                        ]
                    }),
                ),
            ));
            report.sweep = entries;
        }
    }
    Ok(RunOutput { report, files })
}

fn empty_report(cfg: &ExperimentConfig) -> ScatteringReport {
    ScatteringReport {
        experiment: cfg.experiment.to_string(),
        preset: cfg.preset.to_string(),
        config_hash: cfg.hash(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        config: cfg.canonical(),
        parameters: cfg.params,
        grid: cfg.grid(),
        classification: None,
        time_series: Vec::new(),
        fitted_exponent: None,
        fit_r_squared: None,
        unmodified_exponent: None,
        weighted_norm: None,
        tail_proxy: None,
        picard_distances: Vec::new(),
        picard_ratios: Vec::new(),
        picard_agreement: None,
        duhamel_series: Vec::new(),
        sweep: Vec::new(),
    }
}

fn integrator(cfg: &ExperimentConfig) -> Integrator {
    Integrator { dealias: cfg.dealias, ..Integrator::default() }
}

fn scenario(cfg: &ExperimentConfig, nl: &AngularFunction, eps: f64) -> Result<Scenario> {
    let params = TheoremParameters { eps, ..cfg.params };
    let sc = Scenario::new(
        cfg.grid(),
        cfg.final_data_with_eps(eps),
        nl.clone(),
        params,
        cfg.modes,
        cfg.intervals,
    )?;
    sc.check_validity()?;
    Ok(sc)
}

struct ScatterRun {
    series: Vec<ErrorSample>,
    unmodified: Vec<ErrorSample>,
    fitted: Option<(f64, f64)>,
    unmodified_exponent: Option<f64>,
    weighted: crate::finalstate::WeightedNorm,
    tail: f64,
}

fn scatter(cfg: &ExperimentConfig, sc: &Scenario) -> Result<ScatterRun> {
    let traj = construct_backward(sc, cfg.steps, &integrator(cfg))?;
    let g1 = sc.g1();
    let series = error_series(&traj, &sc.final_data, g1)?;
    let unmodified = error_series(&traj, &sc.final_data, 0.0)?;
    let fitted = try_fit(&l2_pairs(&series), cfg);
    let unmodified_exponent = try_fit(&l2_pairs(&unmodified), cfg).map(|f| f.0);
    let diff: Trajectory = traj.sub(&sc.profile_trajectory(g1)?)?;
    Ok(ScatterRun {
        series,
        unmodified,
        fitted,
        unmodified_exponent,
        weighted: weighted_norm_parts(&diff, sc.params.b),
        tail: tail_proxy(sc)?,
    })
}

fn try_fit(series: &[(f64, f64)], cfg: &ExperimentConfig) -> Option<(f64, f64)> {
    match fit_decay_window(series, cfg.fit_t_min, cfg.fit_t_max) {
        Ok(f) => Some((f.exponent, f.r_squared)),
        Err(e) => {
            log::warn!("decay fit skipped: {e}");
            None
        }
    }
}

fn error_csv(series: &[ErrorSample], unmodified: &[ErrorSample]) -> String {
    csv(
        "t,l2_error,xd_norm,l2_error_unmodified",
        series
            .iter()
            .zip(unmodified)
            .map(|(s, u)| vec![s.t, s.l2_error, s.xd_norm, u.l2_error]),
    )
}
