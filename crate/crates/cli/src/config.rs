use std::path::PathBuf;

use netdiv_core::analysis::MeasureOptions;
use netdiv_core::ingest::{Scenario, ScenarioConfig};
use netdiv_core::trend::TrendOptions;
use serde::{Deserialize, Serialize};

/// Everything an `analyze` run depends on. Serialized verbatim into the
/// bundle so `verify` can recompute it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub scenarios: Vec<Scenario>,
    pub timepoints: usize,
    pub t1: usize,
    pub exclude_anchor: bool,
    pub assume_order: bool,
    pub trend: TrendOptions,
    pub measure: MeasureOptions,
    pub out: PathBuf,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn scenario_config(&self, scenario: Scenario) -> ScenarioConfig {
        ScenarioConfig {
            scenario,
            timepoints: self.timepoints,
            t1: self.t1,
            exclude_anchor: self.exclude_anchor,
        }
    }

    pub fn validate(&self) -> netdiv_core::Result<()> {
        if self.scenarios.is_empty() {
            return Err(netdiv_core::Error::Config("no scenario selected".into()));
        }
        for &s in &self.scenarios {
            self.scenario_config(s).validate()?;
        }
        if self.jobs == Some(0) {
            return Err(netdiv_core::Error::Config(
                "--jobs must be at least 1".into(),
            ));
        }
        self.trend.validate()?;
        self.measure.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig {
            manifest: "m.tsv".into(),
            scenarios: vec![Scenario::Full, Scenario::Connected],
            timepoints: 100,
            t1: 75,
            exclude_anchor: false,
            assume_order: false,
            trend: TrendOptions::default(),
            measure: MeasureOptions::default(),
            out: "out".into(),
            jobs: None,
        }
    }

    #[test]
    fn defaults_validate() {
        config().validate().unwrap();
    }

    #[test]
    fn t1_beyond_series_is_rejected() {
        let c = RunConfig {
            t1: 100,
            ..config()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            t1: 100,
            scenarios: vec![Scenario::Full],
            ..config()
        };
        c.validate().unwrap();
    }

    #[test]
    fn round_trips_through_json() {
        let c = config();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }
}
