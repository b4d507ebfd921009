//! Layered option resolution: flags over environment over config file over
//! defaults. The rephrase API key is deliberately absent here — it is read
//! from the environment only, never from flags or files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use seldqa_core::instances::Tolerances;
use seldqa_core::qa::AzimuthConvention;
use serde::Deserialize;

/// Options accepted in a `--config` TOML file. Unknown keys are rejected,
/// so an `api_key` entry fails loudly instead of being silently ignored.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub vocab: Option<PathBuf>,
    pub tol_az: Option<f64>,
    pub tol_el: Option<f64>,
    pub tol_dist: Option<f64>,
    pub offline: Option<bool>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub convention: Option<String>,
}

/// Command-line values; `None`/`false` means the flag was not passed.
#[derive(Debug, Default, Clone)]
pub struct FlagOverrides {
    pub vocab: Option<PathBuf>,
    pub tol_az: Option<f64>,
    pub tol_el: Option<f64>,
    pub tol_dist: Option<f64>,
    pub offline: bool,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub convention: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub vocab: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub offline: bool,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub convention: AzimuthConvention,
}

/// The `SELDQA_*` environment, as a plain map for testability.
pub fn env_map() -> BTreeMap<String, String> {
    std::env::vars()
        .filter(|(k, _)| k.starts_with("SELDQA_"))
        .collect()
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig, String> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            toml::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn env_parse<T: FromStr>(env: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    match env.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| format!("{key}={raw:?}: {e}")),
    }
}

fn env_bool(env: &BTreeMap<String, String>, key: &str) -> Result<Option<bool>, String> {
    match env.get(key).map(String::as_str) {
        None => Ok(None),
        Some("1") | Some("true") | Some("yes") => Ok(Some(true)),
        Some("0") | Some("false") | Some("no") => Ok(Some(false)),
        Some(other) => Err(format!("{key}={other:?}: expected a boolean")),
    }
}

/// Merge the three layers into one effective configuration.
pub fn resolve(
    flags: &FlagOverrides,
    env: &BTreeMap<String, String>,
    file: &FileConfig,
) -> Result<Resolved, String> {
    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        azimuth_deg: flags
            .tol_az
            .or(env_parse(env, "SELDQA_TOL_AZ")?)
            .or(file.tol_az)
            .unwrap_or(defaults.azimuth_deg),
        elevation_deg: flags
            .tol_el
            .or(env_parse(env, "SELDQA_TOL_EL")?)
            .or(file.tol_el)
            .unwrap_or(defaults.elevation_deg),
        distance_cm: flags
            .tol_dist
            .or(env_parse(env, "SELDQA_TOL_DIST")?)
            .or(file.tol_dist)
            .unwrap_or(defaults.distance_cm),
    };
    for (name, value) in [
        ("tol-az", tolerances.azimuth_deg),
        ("tol-el", tolerances.elevation_deg),
        ("tol-dist", tolerances.distance_cm),
    ] {
        if value.is_nan() || value < 0.0 {
            return Err(format!("{name} must be non-negative, got {value}"));
        }
    }

    let offline = flags.offline
        || env_bool(env, "SELDQA_OFFLINE")?
            .or(file.offline)
            .unwrap_or(false);

    let convention = match flags
        .convention
        .clone()
        .or_else(|| env.get("SELDQA_CONVENTION").cloned())
        .or_else(|| file.convention.clone())
    {
        Some(raw) => raw.parse::<AzimuthConvention>()?,
        None => AzimuthConvention::default(),
    };

    Ok(Resolved {
        vocab: flags
            .vocab
            .clone()
            .or_else(|| env.get("SELDQA_VOCAB").map(PathBuf::from))
            .or_else(|| file.vocab.clone()),
        tolerances,
        offline,
        seed: flags
            .seed
            .or(env_parse(env, "SELDQA_SEED")?)
            .or(file.seed)
            .unwrap_or(0),
        jobs: flags.jobs.or(env_parse(env, "SELDQA_JOBS")?).or(file.jobs),
        out: flags
            .out
            .clone()
            .or_else(|| env.get("SELDQA_OUT").map(PathBuf::from))
            .or_else(|| file.out.clone()),
        endpoint: env
            .get("SELDQA_ENDPOINT")
            .cloned()
            .or_else(|| file.endpoint.clone()),
        model: env
            .get("SELDQA_MODEL")
            .cloned()
            .or_else(|| file.model.clone()),
        convention,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn defaults_without_any_layer() {
        let r = resolve(&FlagOverrides::default(), &env(&[]), &FileConfig::default()).unwrap();
        assert_eq!(r.seed, 0);
        assert_eq!(r.tolerances, Tolerances::default());
        assert!(!r.offline);
        assert_eq!(r.convention, AzimuthConvention::LeftPositive);
        assert_eq!(r.endpoint, None);
    }

    #[test]
    fn flags_beat_env_beat_file() {
        let file: FileConfig = toml::from_str("seed = 3\ntol_az = 1.0").unwrap();
        let e = env(&[("SELDQA_SEED", "2"), ("SELDQA_TOL_EL", "2.5")]);

        let r = resolve(&FlagOverrides::default(), &e, &file).unwrap();
        assert_eq!(r.seed, 2);
        assert_eq!(r.tolerances.azimuth_deg, 1.0);
        assert_eq!(r.tolerances.elevation_deg, 2.5);

        let flags = FlagOverrides {
            seed: Some(1),
            tol_el: Some(9.0),
            ..FlagOverrides::default()
        };
        let r = resolve(&flags, &e, &file).unwrap();
        assert_eq!(r.seed, 1);
        assert_eq!(r.tolerances.elevation_deg, 9.0);
    }

    #[test]
    fn offline_flag_wins_over_absent_layers() {
        let flags = FlagOverrides {
            offline: true,
            ..FlagOverrides::default()
        };
        assert!(
            resolve(&flags, &env(&[]), &FileConfig::default())
                .unwrap()
                .offline
        );
        let e = env(&[("SELDQA_OFFLINE", "true")]);
        assert!(
            resolve(&FlagOverrides::default(), &e, &FileConfig::default())
                .unwrap()
                .offline
        );
        let bad = env(&[("SELDQA_OFFLINE", "maybe")]);
        assert!(resolve(&FlagOverrides::default(), &bad, &FileConfig::default()).is_err());
    }

    #[test]
    fn endpoint_and_model_come_from_env_or_file_only() {
        let file: FileConfig = toml::from_str("endpoint = \"https://x\"\nmodel = \"m1\"").unwrap();
        let e = env(&[("SELDQA_MODEL", "m2")]);
        let r = resolve(&FlagOverrides::default(), &e, &file).unwrap();
        assert_eq!(r.endpoint.as_deref(), Some("https://x"));
        assert_eq!(r.model.as_deref(), Some("m2"));
    }

    #[test]
    fn api_key_is_not_a_config_key() {
        let err = toml::from_str::<FileConfig>("api_key = \"sk-123\"").unwrap_err();
        assert!(err.to_string().contains("api_key"), "{err}");
    }

    #[test]
    fn bad_env_numbers_are_errors() {
        let e = env(&[("SELDQA_SEED", "not-a-number")]);
        let err = resolve(&FlagOverrides::default(), &e, &FileConfig::default()).unwrap_err();
        assert!(err.contains("SELDQA_SEED"), "{err}");
    }

    #[test]
    fn negative_tolerances_rejected() {
        let flags = FlagOverrides {
            tol_dist: Some(-1.0),
            ..FlagOverrides::default()
        };
        assert!(resolve(&flags, &env(&[]), &FileConfig::default()).is_err());
    }

    #[test]
    fn convention_is_validated() {
        let e = env(&[("SELDQA_CONVENTION", "right-positive")]);
        let r = resolve(&FlagOverrides::default(), &e, &FileConfig::default()).unwrap();
        assert_eq!(r.convention, AzimuthConvention::RightPositive);
        let bad = env(&[("SELDQA_CONVENTION", "sideways")]);
        assert!(resolve(&FlagOverrides::default(), &bad, &FileConfig::default()).is_err());
    }
}
