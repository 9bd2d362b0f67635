//! Replays the checked-in fuzz seeds through the same checks as the fuzz targets.

use std::path::PathBuf;

use critnls::{fourier_coefficients, AngularFunction, Preset, RawConfig};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_kv_seeds() {
    let mut resolved = 0;
    for (name, text) in seeds("config_kv") {
        let Ok(raw) = RawConfig::parse_kv(&text) else { continue };
        if let Ok(cfg) = raw.resolve() {
            let again = RawConfig::parse_kv(&cfg.canonical()).and_then(|r| r.resolve()).unwrap();
            assert_eq!(again.canonical(), cfg.canonical(), "{name}");
            resolved += 1;
        }
    }
    assert!(resolved >= 3);
}

#[test]
fn config_json_seeds() {
    let ok = seeds("config_json")
        .iter()
        .filter(|(_, text)| RawConfig::parse_json(text).and_then(|r| r.resolve()).is_ok())
        .count();
    assert_eq!(ok, 2);
}

#[test]
fn preset_name_seeds() {
    for (name, text) in seeds("preset_name") {
        let Ok(preset) = text.parse::<Preset>() else { continue };
        assert_eq!(preset.to_string().parse::<Preset>().unwrap(), preset, "{name}");
        assert!(AngularFunction::from_preset(preset, 1).is_ok() || AngularFunction::from_preset(preset, 2).is_ok());
    }
}

#[test]
fn angular_samples_seeds() {
    let mut parsed = 0;
    for (_, text) in seeds("angular_samples_csv") {
        if let Ok(nl) = AngularFunction::from_samples_csv(1, &text) {
            let _ = fourier_coefficients(&nl, 1);
            parsed += 1;
        }
    }
    assert_eq!(parsed, 2);
}
