//! JSON experiment configuration: schema-versioned, fail-closed parsing
//! with validation errors that name the offending field.

use crate::analysis::Region;
use crate::directions::DirectionModel;
use crate::error::{Error, Result};
use crate::ppp::{Stop, MAX_COUNT};
use crate::rates::RateFunction;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Config schema understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Walk model: A turns along signed coordinate axes, B along uniformly
/// random sphere directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    A,
    B,
}

/// Turn-rate family and its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RateSpec {
    PowerLaw { alpha: f64 },
    LogPower { beta: f64 },
    Constant { level: f64 },
}

/// Stopping rule for each replica.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopSpec {
    ByCount(usize),
    ByTime(f64),
}

/// One fully reproducible ensemble run: everything an execution needs is
/// in this document plus the binary version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: Model,
    pub dimension: usize,
    pub rate: RateSpec,
    pub stop: StopSpec,
    pub replicas: usize,
    pub rho: f64,
    pub master_seed: u64,
    pub outputs: PathBuf,
    pub checkpoints: Vec<usize>,
}

impl ExperimentConfig {
    /// Parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every invariant, reporting the first offending field.
    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, message: String| {
            Err(Error::Config {
                field: field.to_string(),
                message,
            })
        };
        if self.schema_version != SCHEMA_VERSION {
            return fail(
                "schema_version",
                format!(
                    "this build understands schema {SCHEMA_VERSION}, file says {}",
                    self.schema_version
                ),
            );
        }
        if self.dimension == 0 {
            return fail("dimension", "dimension must be at least 1".into());
        }
        if self.model == Model::B && self.dimension < 2 {
            return fail(
                "dimension",
                "model B draws sphere directions and needs dimension at least 2".into(),
            );
        }
        if let Err(e) = self.rate_function() {
            return fail("rate", e.to_string());
        }
        if let Err(e) = self.stop().validate() {
            return fail("stop", e.to_string());
        }
        if self.replicas == 0 {
            return fail("replicas", "at least one replica is required".into());
        }
        if !self.rho.is_finite() || self.rho <= 0.0 {
            return fail("rho", format!("region size must be positive, got {}", self.rho));
        }
        let mut prev = 0usize;
        for &c in &self.checkpoints {
            if c == 0 {
                return fail("checkpoints", "checkpoint turns start at 1".into());
            }
            if c <= prev && prev != 0 {
                return fail(
                    "checkpoints",
                    format!("checkpoints must be strictly increasing, saw {prev} then {c}"),
                );
            }
            prev = c;
        }
        if let StopSpec::ByCount(n) = self.stop {
            if let Some(&last) = self.checkpoints.last() {
                if last > n {
                    return fail(
                        "checkpoints",
                        format!("checkpoint {last} exceeds the {n}-turn stopping rule"),
                    );
                }
            }
        }
        Ok(())
    }

    /// Builds the configured rate function.
    pub fn rate_function(&self) -> Result<RateFunction<f64>> {
        match self.rate {
            RateSpec::PowerLaw { alpha } => RateFunction::power_law(alpha),
            RateSpec::LogPower { beta } => RateFunction::log_power(beta),
            RateSpec::Constant { level } => RateFunction::constant(level),
        }
    }

    /// Builds the configured direction model.
    pub fn direction_model(&self) -> Result<DirectionModel> {
        match self.model {
            Model::A => DirectionModel::orthogonal(self.dimension),
            Model::B => DirectionModel::sphere(self.dimension),
        }
    }

    /// Stopping rule in walk-builder form.
    pub fn stop(&self) -> Stop<f64> {
        match self.stop {
            StopSpec::ByCount(n) => Stop::ByCount(n),
            StopSpec::ByTime(t) => Stop::ByTime(t),
        }
    }

    /// Recurrence region the model is scored against: the box for model A,
    /// the planar disc for model B.
    pub fn region(&self) -> Region {
        match self.model {
            Model::A => Region::Box,
            Model::B => Region::PlanarDisc,
        }
    }

    fn cap_count(&self) -> Option<usize> {
        match self.stop {
            StopSpec::ByCount(n) => Some(n),
            StopSpec::ByTime(_) => None,
        }
    }

    /// Upper bound on segment indices a replica can produce, if known.
    pub fn turn_budget(&self) -> Option<usize> {
        self.cap_count()
    }
}

// keep the cap constant referenced so config and sampler stay in sync
const _: () = assert!(MAX_COUNT == 100_000_000);

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_json() -> &'static str {
        r#"{
            "schema_version": 1,
            "model": "a",
            "dimension": 1,
            "rate": {"power_law": {"alpha": 0.5}},
            "stop": {"by_count": 4096},
            "replicas": 1000,
            "rho": 1.0,
            "master_seed": 42,
            "outputs": "out/run1",
            "checkpoints": [64, 128, 256, 512, 1024, 2048, 4096]
        }"#
    }

    fn golden() -> ExperimentConfig {
        serde_json::from_str(golden_json()).unwrap()
    }

    #[test]
    fn golden_config_parses_and_validates() {
        let cfg = golden();
        assert_eq!(cfg.model, Model::A);
        assert_eq!(cfg.rate, RateSpec::PowerLaw { alpha: 0.5 });
        assert_eq!(cfg.stop, StopSpec::ByCount(4096));
        assert_eq!(cfg.region(), Region::Box);
        cfg.validate().unwrap();
        assert_eq!(cfg.turn_budget(), Some(4096));
    }

    #[test]
    fn config_round_trips_losslessly() {
        let cfg = golden();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_fields_fail_closed() {
        let with_extra = golden_json().replace(
            "\"schema_version\": 1,",
            "\"schema_version\": 1, \"surprise\": true,",
        );
        assert!(serde_json::from_str::<ExperimentConfig>(&with_extra).is_err());

        let extra_rate_param = golden_json().replace(
            "{\"alpha\": 0.5}",
            "{\"alpha\": 0.5, \"gamma\": 1.0}",
        );
        assert!(serde_json::from_str::<ExperimentConfig>(&extra_rate_param).is_err());
    }

    fn failing_field(cfg: &ExperimentConfig) -> String {
        match cfg.validate() {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn validation_names_the_offending_field() {
        let mut cfg = golden();
        cfg.schema_version = 2;
        assert_eq!(failing_field(&cfg), "schema_version");

        let mut cfg = golden();
        cfg.model = Model::B;
        assert_eq!(failing_field(&cfg), "dimension");

        let mut cfg = golden();
        cfg.rate = RateSpec::PowerLaw { alpha: 1.5 };
        assert_eq!(failing_field(&cfg), "rate");

        let mut cfg = golden();
        cfg.stop = StopSpec::ByCount(0);
        cfg.checkpoints.clear();
        assert_eq!(failing_field(&cfg), "stop");

        let mut cfg = golden();
        cfg.stop = StopSpec::ByTime(-3.0);
        assert_eq!(failing_field(&cfg), "stop");

        let mut cfg = golden();
        cfg.replicas = 0;
        assert_eq!(failing_field(&cfg), "replicas");

        let mut cfg = golden();
        cfg.rho = 0.0;
        assert_eq!(failing_field(&cfg), "rho");

        let mut cfg = golden();
        cfg.checkpoints = vec![64, 32];
        assert_eq!(failing_field(&cfg), "checkpoints");

        let mut cfg = golden();
        cfg.checkpoints = vec![0, 32];
        assert_eq!(failing_field(&cfg), "checkpoints");

        let mut cfg = golden();
        cfg.checkpoints = vec![4097];
        assert_eq!(failing_field(&cfg), "checkpoints");
    }

    #[test]
    fn model_b_maps_to_sphere_and_disc() {
        let mut cfg = golden();
        cfg.model = Model::B;
        cfg.dimension = 2;
        cfg.validate().unwrap();
        assert_eq!(cfg.region(), Region::PlanarDisc);
        let model = cfg.direction_model().unwrap();
        assert_eq!(model.dimension(), 2);
    }

    #[test]
    fn by_time_config_has_open_turn_budget() {
        let mut cfg = golden();
        cfg.stop = StopSpec::ByTime(100.0);
        cfg.checkpoints = vec![64, 4096, 100_000];
        cfg.validate().unwrap();
        assert_eq!(cfg.turn_budget(), None);
    }
}
