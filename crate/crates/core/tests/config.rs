use critnls::config::{Experiment, ExperimentConfig, RawConfig};
use critnls::experiment::{output_dir, run};
use proptest::prelude::*;

#[test]
fn kv_and_json_agree() {
    let kv = "preset = re-abs-re\nd = 2\neps = 0.05 # smaller\nsweep_eps = 0.01, 0.02\n";
    let json = r#"{"preset": "re-abs-re", "d": 2, "eps": 0.05, "sweep_eps": [0.01, 0.02]}"#;
    let a: ExperimentConfig = kv.parse().unwrap();
    let b: ExperimentConfig = json.parse().unwrap();
    assert_eq!(a.canonical(), b.canonical());
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.sweep_eps, vec![0.01, 0.02]);
}

#[test]
fn invalid_configs_are_rejected() {
    for text in [
        "",
        "   \n# only a comment\n",
        "preset = gauge\nbogus = 1\n",
        "preset = gauge\npreset = cos3\n",
        "preset gauge\n",
        "d = 1\n",
        "preset = nope\n",
        "preset = gauge\nd = 3\n",
        "preset = gauge\nt_start = 0.5\n",
        "preset = gauge\nt_start = 200\n",
        "preset = gauge\nb = 0.1\n",
        "preset = gauge\ndelta = 0.5\n",
        "preset = gauge\npoints = 100\n",
        "preset = gauge\neps = nan\n",
        "preset = gauge\nbox_length = 10\n",
        "{\"preset\": [1]}",
        "[1, 2]",
        "{}",
    ] {
        assert!(text.parse::<ExperimentConfig>().is_err(), "accepted {text:?}");
    }
}

#[test]
fn classify_skips_grid_checks() {
    let c: ExperimentConfig = "experiment = classify\npreset = gauge\nbox_length = 10\n".parse().unwrap();
    assert_eq!(c.experiment, Experiment::Classify);
}

#[test]
fn output_dir_uses_the_hash() {
    let c: ExperimentConfig = "preset = gauge\n".parse().unwrap();
    let dir = output_dir(&c, None);
    let name = dir.file_name().unwrap().to_str().unwrap().to_string();
    assert_eq!(name, format!("scatter-{}", &c.hash()[..12]));
    let explicit = std::path::Path::new("/tmp/x");
    assert_eq!(output_dir(&c, Some(explicit)), explicit);
}

fn small_scatter() -> ExperimentConfig {
    let mut raw = RawConfig::parse("preset = gauge\nexperiment = scatter\n").unwrap();
    for kv in ["points=2048", "t_start=5", "t_max=40", "steps=200", "intervals=8", "fit_t_min=6", "fit_t_max=20"] {
        raw.apply_override(kv).unwrap();
    }
    raw.resolve().unwrap()
}

#[test]
fn runs_are_deterministic_apart_from_the_timestamp() {
    let cfg = small_scatter();
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a.files, b.files);
    let mut ra = a.report.clone();
    ra.timestamp = b.report.timestamp;
    assert_eq!(ra.to_json(), b.report.to_json());
    assert!(a.files.iter().any(|(n, _)| n == "series_error.csv"));
    assert!(a.report.fitted_exponent.is_some());

    let dir = tempfile::tempdir().unwrap();
    let written = a.write(dir.path()).unwrap();
    assert!(written.iter().all(|p| p.exists()));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["config_hash"], cfg.hash());
    assert_eq!(json["preset"], "gauge{1}");
}

#[test]
fn classify_run_writes_spectrum_and_summary() {
    let cfg: ExperimentConfig = "experiment = classify\npreset = re-abs-re\nd = 2\neta = 0.5\n".parse().unwrap();
    let out = run(&cfg).unwrap();
    let c = out.report.classification.as_ref().unwrap();
    assert!((c.g1.re - 4.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-10);
    assert_eq!(format!("{:?}", c.range_type), "LongRange");
    assert!(out.files.iter().any(|(n, body)| n == "spectrum.csv" && body.lines().count() > 100));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_round_trips(
        eps in 0.0f64..0.5,
        width in 0.5f64..2.0,
        t_start in 1.0f64..20.0,
        span in 5.0f64..10.0,
        steps in 1usize..5000,
        modes in 32usize..256,
        seed in any::<u64>(),
        dealias in any::<bool>(),
        experiment in 0usize..5,
    ) {
        let names = ["classify", "scatter", "picard", "duhamel", "sweep"];
        let t_max = t_start * span;
        let text = format!(
            "experiment = {}\npreset = gauge{{0.5}}\nwidth = {width:?}\neps = {eps:?}\nt_start = {t_start:?}\nt_max = {t_max:?}\nsteps = {steps}\nmodes = {modes}\nseed = {seed}\ndealias = {dealias}\n",
            names[experiment]
        );
        let cfg: ExperimentConfig = text.parse().unwrap();
        let again: ExperimentConfig = cfg.canonical().parse().unwrap();
        prop_assert_eq!(cfg.canonical(), again.canonical());
        prop_assert_eq!(cfg.hash(), again.hash());
        prop_assert_eq!(again.params.t_max, t_max);
        prop_assert_eq!(again.seed, seed);
    }
}
