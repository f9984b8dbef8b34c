use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cc::{CcParams, Variant};
use crate::net::{LinkConfig, RedParams, RoutePolicy, DATA_PACKET_BYTES};
use crate::scenario::{ForcedLoss, ScenarioConfig};
use crate::ConfigError;

/// A full experiment: the variant x flow-count x repetition matrix plus every
/// model constant. An empty TOML document yields the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub variants: Vec<String>,
    pub flow_counts: Vec<usize>,
    pub repetitions: u32,
    pub seed: u64,
    pub duration_s: f64,
    pub warmup_s: f64,
    pub sample_interval_s: f64,
    /// Seconds between flow establishments; omitted means one base RTT.
    pub stagger_s: Option<f64>,
    pub background_pps: f64,
    pub background_sources: usize,
    pub background_packet_bytes: u32,
    pub output_dir: PathBuf,
    /// Write one `series_*.csv` per cell.
    pub write_series: bool,
    pub forced_losses: Vec<ForcedLoss>,
    pub uniform_loss: f64,
    pub link: LinkConfig,
    pub red: RedParams,
    pub cc: CcParams,
    pub route: RoutePolicy,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            variants: Variant::ALL.iter().map(|v| v.name().to_string()).collect(),
            flow_counts: vec![1, 5, 10, 15, 20, 25, 30],
            repetitions: 1,
            seed: 1,
            duration_s: 1000.0,
            warmup_s: 100.0,
            sample_interval_s: 1.0,
            stagger_s: None,
            background_pps: 125.0,
            background_sources: 1,
            background_packet_bytes: DATA_PACKET_BYTES,
            output_dir: PathBuf::from("results"),
            write_series: true,
            forced_losses: Vec::new(),
            uniform_loss: 0.0,
            link: LinkConfig::default(),
            red: RedParams::default(),
            cc: CcParams::default(),
            route: RoutePolicy::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parsed, de-duplicated variant list, in configuration order.
    pub fn parsed_variants(&self) -> Result<Vec<Variant>, ConfigError> {
        let mut out: Vec<Variant> = Vec::new();
        for name in &self.variants {
            let v: Variant = name
                .parse()
                .map_err(|e| ConfigError::invalid("variants", e))?;
            if !out.contains(&v) {
                out.push(v);
            }
        }
        if out.is_empty() {
            return Err(ConfigError::invalid("variants", "at least one variant is required"));
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let variants = self.parsed_variants()?;
        if self.flow_counts.is_empty() {
            return Err(ConfigError::invalid("flow_counts", "must not be empty"));
        }
        if self.flow_counts.contains(&0) {
            return Err(ConfigError::invalid("flow_counts", "flow counts must be positive"));
        }
        if self.repetitions == 0 {
            return Err(ConfigError::invalid("repetitions", "must be at least 1"));
        }
        let n_max = *self.flow_counts.iter().max().expect("non-empty");
        self.scenario(variants[0], n_max).validate()
    }

    /// Scenario for one matrix cell.
    pub fn scenario(&self, variant: Variant, flows: usize) -> ScenarioConfig {
        ScenarioConfig {
            variant,
            flows,
            duration_s: self.duration_s,
            warmup_s: self.warmup_s,
            sample_interval_s: self.sample_interval_s,
            stagger_s: self.stagger_s,
            link: self.link.clone(),
            red: self.red.clone(),
            cc: self.cc.clone(),
            route: self.route.clone(),
            background_pps: self.background_pps,
            background_sources: self.background_sources,
            background_packet_bytes: self.background_packet_bytes,
            forced_losses: self
                .forced_losses
                .iter()
                .filter(|l| l.flow < flows)
                .copied()
                .collect(),
            uniform_loss: self.uniform_loss,
            trace_cwnd: false,
            record_series: self.write_series,
        }
    }

    /// Replaces the variant list from a comma-separated override.
    pub fn override_variants(&mut self, list: &str) -> Result<(), ConfigError> {
        self.variants = split_list(list);
        self.parsed_variants().map(|_| ())
    }

    /// Replaces the flow counts from a comma-separated override.
    pub fn override_flows(&mut self, list: &str) -> Result<(), ConfigError> {
        self.flow_counts = split_list(list)
            .iter()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| ConfigError::invalid("flow_counts", format!("`{s}` is not a flow count")))
            })
            .collect::<Result<_, _>>()?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }
}

fn split_list(list: &str) -> Vec<String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Parses and validates a TOML experiment description.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Maps a TOML error onto the key it concerns.
fn toml_error(text: &str, err: &toml::de::Error) -> ConfigError {
    let msg = err.message().to_string();
    if let Some(field) = msg
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next())
    {
        return ConfigError::invalid(field, msg.clone());
    }
    let key = err
        .span()
        .and_then(|span| {
            let line_start = text[..span.start].rfind('\n').map_or(0, |i| i + 1);
            let line = &text[line_start..];
            let line = line.lines().next().unwrap_or("");
            line.split_once('=').map(|(k, _)| k.trim().to_string())
        })
        .filter(|k| !k.is_empty())
        .unwrap_or_else(|| "document".to_string());
    ConfigError::invalid(key, msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.duration_s, 1000.0);
        assert_eq!(cfg.flow_counts, vec![1, 5, 10, 15, 20, 25, 30]);
        assert_eq!(cfg.red.buffer_packets, 300);
        assert_eq!(cfg.link.bottleneck_delay_s, 0.1);
        assert_eq!(cfg.parsed_variants().unwrap().len(), 5);
    }

    #[test]
    fn unknown_variant_names_the_key() {
        let err = parse_config(r#"variants = ["reno-classic"]"#).unwrap_err();
        assert_eq!(err.key, "variants");
        assert!(err.to_string().contains("reno-classic"));
    }

    #[test]
    fn flow_count_override() {
        let cfg = parse_config("flow_counts = [1, 5, 10]").unwrap();
        assert_eq!(cfg.flow_counts.len(), 3);
    }

    #[test]
    fn non_positive_values_name_the_key() {
        assert_eq!(parse_config("duration_s = -1.0").unwrap_err().key, "duration_s");
        assert_eq!(parse_config("[link]\nbottleneck_bps = 0.0").unwrap_err().key, "link.bottleneck_bps");
        assert_eq!(parse_config("flow_counts = []").unwrap_err().key, "flow_counts");
        assert_eq!(parse_config("repetitions = 0").unwrap_err().key, "repetitions");
    }

    #[test]
    fn malformed_documents_name_the_key() {
        assert_eq!(parse_config("bogus = 3").unwrap_err().key, "bogus");
        assert_eq!(parse_config("duration_s = \"long\"").unwrap_err().key, "duration_s");
        assert_eq!(parse_config("[red]\nmax_p = 2.0").unwrap_err().key, "red");
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::default();
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.override_variants("cubic, newreno").unwrap();
        assert_eq!(cfg.parsed_variants().unwrap(), vec![Variant::Cubic, Variant::NewReno]);
        assert!(cfg.override_variants("vegas").is_err());
        cfg.override_flows("2,4").unwrap();
        assert_eq!(cfg.flow_counts, vec![2, 4]);
        assert!(cfg.override_flows("x").is_err());
    }
}
