//! Experiment configuration: one JSON document, validated before anything runs.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use lie_homog::verify::{LimitRoute, TestFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Decompose,
    Coeffs,
    Simulate,
    VerifyLimit,
    SplitTest,
    Rate,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Decompose => "decompose",
            Kind::Coeffs => "coeffs",
            Kind::Simulate => "simulate",
            Kind::VerifyLimit => "verify-limit",
            Kind::SplitTest => "split-test",
            Kind::Rate => "rate",
        }
    }

    fn parse(s: &str) -> Option<Kind> {
        [
            Kind::Decompose,
            Kind::Coeffs,
            Kind::Simulate,
            Kind::VerifyLimit,
            Kind::SplitTest,
            Kind::Rate,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }

    /// Keys that must be present for this kind, besides the common ones.
    fn required(self) -> &'static [&'static str] {
        match self {
            Kind::Decompose => &[],
            Kind::Coeffs => &["Y0"],
            Kind::Simulate => &["scheme", "Y0", "epsilon", "T", "n_traj"],
            Kind::VerifyLimit => &["Y0", "epsilon", "t_list", "n_traj"],
            Kind::SplitTest => &["Y0", "dt_list", "T", "n_traj"],
            Kind::Rate => &["Y0", "epsilon_list", "T", "n_traj", "test_function"],
        }
    }
}

/// `"full"` or a list of indices into the h basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Generators {
    Named(String),
    Indices(Vec<usize>),
}

/// One catalog id, or several for decomposition tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Groups {
    One(String),
    Many(Vec<String>),
}

impl Groups {
    pub fn names(&self) -> Vec<&str> {
        match self {
            Groups::One(s) => vec![s.as_str()],
            Groups::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtRule {
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    GroupSde,
    SlowOde,
    SlowOdeMidpoint,
    Effective,
    FastH,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Store {
    #[default]
    Projected,
    Group,
    Summary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: None,
            formats: default_formats(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Kind,
    pub group: Groups,
    pub seed: u64,
    #[serde(default)]
    pub generators: Option<Generators>,
    #[serde(rename = "A0", default)]
    pub a0: Option<Vec<f64>>,
    #[serde(rename = "Y0", default)]
    pub y0: Option<Vec<f64>>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub epsilon_list: Option<Vec<f64>>,
    #[serde(rename = "T", default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub t_list: Option<Vec<f64>>,
    #[serde(default)]
    pub dt_rule: Option<DtRule>,
    #[serde(default)]
    pub dt_list: Option<Vec<f64>>,
    #[serde(default)]
    pub effective_dt: Option<f64>,
    #[serde(default)]
    pub n_traj: Option<usize>,
    /// Haar samples for coefficients, centring and orthogonality checks.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub scheme: Option<SchemeName>,
    #[serde(default)]
    pub route: Option<LimitRoute>,
    #[serde(default)]
    pub store: Option<Store>,
    #[serde(default)]
    pub test_function: Option<TestFunction>,
    /// Runs the Peter–Weyl orthogonality check on each non-trivial component.
    #[serde(default)]
    pub peter_weyl: Option<bool>,
    #[serde(default)]
    pub outputs: Option<Outputs>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

const COMMON: [&str; 3] = ["experiment", "group", "seed"];

impl ExperimentConfig {
    /// Parses and validates a config document. All missing required keys are
    /// reported together.
    pub fn from_json(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| ConfigError(format!("config is not valid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| ConfigError("config must be a JSON object".into()))?;
        let mut missing: Vec<&str> = COMMON
            .iter()
            .copied()
            .filter(|k| !obj.contains_key(*k))
            .collect();
        if let Some(kind) = obj
            .get("experiment")
            .and_then(Value::as_str)
            .and_then(Kind::parse)
        {
            missing.extend(kind.required().iter().filter(|k| !obj.contains_key(**k)));
        }
        if !missing.is_empty() {
            return Err(ConfigError(format!(
                "missing required keys: {}",
                missing.join(", ")
            )));
        }
        let cfg: ExperimentConfig = serde_json::from_value(value)
            .map_err(|e| ConfigError(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if let Groups::Many(v) = &self.group {
            if self.experiment != Kind::Decompose {
                return bad("a list of groups is only accepted by decompose".into());
            }
            if v.is_empty() {
                return bad("group list is empty".into());
            }
        }
        if let Some(Generators::Named(s)) = &self.generators {
            if s != "full" {
                return bad(format!(
                    "generators must be \"full\" or an index list, got \"{s}\""
                ));
            }
        }
        let positive = |name: &str, v: Option<f64>| -> Result<(), ConfigError> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => {
                    bad(format!("{name} must be positive, got {x}"))
                }
                _ => Ok(()),
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("T", self.horizon)?;
        positive("effective_dt", self.effective_dt)?;
        positive("dt_rule.h", self.dt_rule.map(|r| r.h))?;
        for (name, list) in [
            ("epsilon_list", &self.epsilon_list),
            ("t_list", &self.t_list),
            ("dt_list", &self.dt_list),
        ] {
            if let Some(l) = list {
                if l.is_empty() {
                    return bad(format!("{name} is empty"));
                }
                for &x in l {
                    positive(name, Some(x))?;
                }
            }
        }
        if self.n_traj == Some(0) {
            return bad("n_traj must be at least 1".into());
        }
        if matches!(self.samples, Some(s) if s < 2) {
            return bad("samples must be at least 2".into());
        }
        Ok(())
    }

    pub fn formats(&self) -> Vec<Format> {
        self.outputs.clone().unwrap_or_default().formats
    }
}
