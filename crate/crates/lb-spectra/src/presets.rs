//! Built-in study configurations, one per reproduced experiment.

use crate::config::{ConfigError, StudyConfig};

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        /// `(name, TOML source)` in listing order.
        pub const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../presets/", $name, ".toml")))),*
        ];
    };
}

presets![
    "circle-superconv-k2-gl",
    "circle-superconv-k3-gl",
    "circle-newton-cotes-k2",
    "circle-newton-cotes-k3",
    "circle-p1",
    "sphere-eigfun-r1k2",
    "sphere-eigfun-r3k1",
    "sphere-constant-ratios",
    "sphere-eigenvalue-constant",
    "implicit-quad-k2-gl",
    "sphere-perturbed-unperturbed",
    "sphere-perturbed-zero-mean",
    "sphere-perturbed-biased",
];

pub fn source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Parsed preset, or `None` for an unknown name.
pub fn load(name: &str) -> Option<Result<StudyConfig, ConfigError>> {
    source(name).map(StudyConfig::from_toml)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates_under_its_own_name() {
        for (name, _) in PRESETS {
            let c = load(name).unwrap().unwrap();
            assert_eq!(c.name, *name);
            c.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(load("nope").is_none());
    }
}
