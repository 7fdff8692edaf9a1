//! Settings from the command line merged over an optional key=value file.

use std::collections::BTreeMap;

use resonance_core::spectrum::{Model, ModelConfig};

use crate::output::Failure;
use crate::Common;

const FILE_KEYS: [&str; 11] =
    ["model", "delta", "m-max", "trunc", "seed", "json", "out", "threads", "eps", "periods", "dt"];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub model: Option<Model>,
    pub delta: Option<i64>,
    pub m_max: Option<usize>,
    pub trunc: Option<usize>,
    pub seed: Option<u64>,
    pub json: bool,
    pub out: Option<String>,
    pub threads: Option<usize>,
    extras: BTreeMap<String, String>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Failure> {
    value.parse().map_err(|_| Failure::invalid(format!("config {key}: cannot parse {value:?}")))
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::invalid(format!("config line {}: expected key=value", n + 1)))?;
        let k = k.trim().trim_start_matches("--").to_string();
        if !FILE_KEYS.contains(&k.as_str()) {
            return Err(Failure::invalid(format!("config line {}: unknown key {k:?}", n + 1)));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

impl Settings {
    pub fn resolve(cli: &Common) -> Result<Self, Failure> {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{path}: {e}")))?;
                parse_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let get = |k: &str| file.get(k).map(String::as_str);
        let model = match (cli.model, get("model")) {
            (Some(m), _) => Some(m.into()),
            (None, Some(v)) => Some(v.parse::<Model>().map_err(|e| Failure::invalid(format!("config model: {e}")))?),
            (None, None) => None,
        };
        let s = Settings {
            model,
            delta: cli.delta.map(Ok).or_else(|| get("delta").map(|v| parse("delta", v))).transpose()?,
            m_max: cli.m_max.map(Ok).or_else(|| get("m-max").map(|v| parse("m-max", v))).transpose()?,
            trunc: cli.trunc.map(Ok).or_else(|| get("trunc").map(|v| parse("trunc", v))).transpose()?,
            seed: cli.seed.map(Ok).or_else(|| get("seed").map(|v| parse("seed", v))).transpose()?,
            json: cli.json || get("json").map(|v| parse::<bool>("json", v)).transpose()?.unwrap_or(false),
            out: cli.out.clone().or_else(|| get("out").map(str::to_string)),
            threads: cli.threads.map(Ok).or_else(|| get("threads").map(|v| parse("threads", v))).transpose()?,
            extras: file
                .iter()
                .filter(|(k, _)| ["eps", "periods", "dt"].contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        };
        Ok(s)
    }

    /// Command-specific values that only the settings file can supply here.
    pub fn extra(&self, key: &str) -> Option<String> {
        self.extras.get(key).cloned()
    }

    pub fn model_config(&self) -> Result<ModelConfig, Failure> {
        let model = self.model.ok_or_else(|| Failure::invalid("--model is required"))?;
        let delta = self.delta.ok_or_else(|| Failure::invalid("--delta is required"))?;
        ModelConfig::new(model, delta).map_err(Failure::invalid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_format() {
        let map = parse_file("# settings\nmodel = wm\n\ndelta=3\n--m-max = 40\n").unwrap();
        assert_eq!(map["model"], "wm");
        assert_eq!(map["delta"], "3");
        assert_eq!(map["m-max"], "40");
        assert!(parse_file("colour = blue\n").is_err());
        assert!(parse_file("delta 3\n").is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let dir = std::env::temp_dir().join(format!("rf-config-{}", std::process::id()));
        std::fs::write(&dir, "model=wm\ndelta=3\nm-max=40\n").unwrap();
        let cli = Common { delta: Some(5), config: Some(dir.to_string_lossy().into()), ..Common::default() };
        let s = Settings::resolve(&cli).unwrap();
        std::fs::remove_file(&dir).unwrap();
        assert_eq!(s.model, Some(Model::Wm));
        assert_eq!(s.delta, Some(5));
        assert_eq!(s.m_max, Some(40));
    }
}
