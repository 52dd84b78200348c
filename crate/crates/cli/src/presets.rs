//! Named gate-threshold presets, embedded from `presets.toml`.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::CliError;

const PRESETS_TOML: &str = include_str!("../presets.toml");

#[derive(Debug, Clone, Deserialize)]
pub struct Preset {
    pub thresholds: Vec<f64>,
    /// Prediction horizon the schedule was tuned for.
    pub horizon: String,
    pub source: String,
}

pub fn presets() -> BTreeMap<String, Preset> {
    toml::from_str(PRESETS_TOML).expect("presets.toml is well formed")
}

pub fn lookup(name: &str) -> Result<Preset, CliError> {
    let all = presets();
    all.get(name).cloned().ok_or_else(|| {
        let names: Vec<&str> = all.keys().map(|k| k.as_str()).collect();
        CliError::Config(format!(
            "unknown preset {name:?}; available: {}",
            names.join(", ")
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_presets_parse_and_cover_published_schedules() {
        let all = presets();
        assert_eq!(all["synthetic"].thresholds.len(), 2);
        assert_eq!(all["womd-prediction"].thresholds, vec![4.3, 4.2, 4.1]);
        assert_eq!(all["womd-open-loop"].thresholds, vec![0.8, 0.75, 0.7, 0.65]);
        assert_eq!(all["nuplan-prediction"].thresholds, vec![40.0, 30.0]);
        assert_eq!(all["nuplan-planning-hard"].thresholds, vec![30.0, 25.0]);
        // every preset names the horizon it was tuned for
        for (name, preset) in &all {
            assert!(!preset.horizon.is_empty(), "{name} lacks a horizon label");
        }
    }

    #[test]
    fn unknown_preset_lists_alternatives() {
        let err = lookup("nope").unwrap_err();
        assert!(err.to_string().contains("synthetic"));
    }
}
