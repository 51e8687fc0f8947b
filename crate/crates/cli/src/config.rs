//! Declarative scenario and sweep files (TOML). Unknown keys are rejected,
//! physical quantities are range-checked, and a parsed file serializes back
//! to an equivalent document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use predictorlab::{
    Error, ExogenousSignal, InitialHistory, InitialInput, PredictorSpec, Result, SimConfig,
    SuccessCriterion, SweepParam, SweepSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ScenarioFile {
    /// Catalog plant id.
    pub plant: String,
    pub observer: ObserverSection,
    pub feedback: FeedbackSection,
    pub predictor: PredictorSection,
    pub sampling: SamplingSection,
    pub integration: IntegrationSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub signals: SignalsSection,
    #[serde(default)]
    pub monitors: MonitorsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ObserverSection {
    /// Injection gains p.
    pub p: Vec<f64>,
    pub theta: f64,
    pub z0: Vec<f64>,
    pub w0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FeedbackSection {
    pub k: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    rename_all_fields = "kebab-case",
    deny_unknown_fields
)]
pub enum PredictorSection {
    /// Successive-approximation predictor.
    Approx {
        l: usize,
        m: usize,
        #[serde(default = "default_quadrature_nodes")]
        quadrature_nodes: usize,
    },
    /// Exact matrix-exponential predictor (LTI plants).
    ExactLti,
}

fn default_quadrature_nodes() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SamplingSection {
    pub t1: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct IntegrationSection {
    pub h: f64,
    pub t_end: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct InitialSection {
    pub x0: InitialStateSpec,
    pub u0: InitialInputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialStateSpec {
    /// Constant history on `[-r, 0]`.
    Constant { value: Vec<f64> },
    /// Hermite nodes `(t, x, dx)` covering `[-r, 0]`.
    Nodes {
        nodes: Vec<(f64, Vec<f64>, Vec<f64>)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialInputSpec {
    /// Constant held input on `[-r-tau, 0)`.
    Constant { value: f64 },
    /// Explicit ZOH segments with starts in `[-r-tau, 0)`.
    Segments { segments: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SignalsSection {
    #[serde(default = "zero_signal")]
    pub d: ExogenousSignal,
    #[serde(default = "zero_signal")]
    pub xi: ExogenousSignal,
    #[serde(default = "zero_signal")]
    pub b: ExogenousSignal,
}

fn zero_signal() -> ExogenousSignal {
    ExogenousSignal::Zero
}

impl Default for SignalsSection {
    fn default() -> Self {
        Self {
            d: ExogenousSignal::Zero,
            xi: ExogenousSignal::Zero,
            b: ExogenousSignal::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MonitorsSection {
    #[serde(default = "default_true")]
    pub enabled: bool,
    /// Truncation-bound constant used by the growth monitor and the design
    /// condition checker; estimated from seeded trials when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_hat: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl Default for MonitorsSection {
    fn default() -> Self {
        Self {
            enabled: true,
            k_hat: None,
        }
    }
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))?;
        file.check_ranges()?;
        Ok(file)
    }

    pub fn dump(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("serialize: {e}")))
    }

    fn check_ranges(&self) -> Result<()> {
        let positives = [
            ("sampling.t1", self.sampling.t1),
            ("sampling.t2", self.sampling.t2),
            ("integration.h", self.integration.h),
            ("integration.t-end", self.integration.t_end),
        ];
        for (name, v) in positives {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.observer.theta >= 1.0) {
            return Err(Error::Config(format!(
                "observer.theta must be >= 1, got {}",
                self.observer.theta
            )));
        }
        if let PredictorSection::Approx { l, m, .. } = self.predictor {
            if l == 0 || m == 0 {
                return Err(Error::Config(
                    "predictor.l and predictor.m must be >= 1".into(),
                ));
            }
        }
        if let Some(k) = self.monitors.k_hat {
            if !(k >= 0.0) {
                return Err(Error::Config("monitors.k-hat must be >= 0".into()));
            }
        }
        Ok(())
    }

    /// Lowers the file to the simulator configuration.
    pub fn to_sim_config(&self) -> Result<SimConfig> {
        let predictor = match self.predictor {
            PredictorSection::Approx {
                l,
                m,
                quadrature_nodes,
            } => PredictorSpec::Approx {
                picard_depth: l,
                sub_intervals: m,
                quadrature_nodes,
            },
            PredictorSection::ExactLti => PredictorSpec::ExactLti,
        };
        let x0 = match &self.initial.x0 {
            InitialStateSpec::Constant { value } => InitialHistory::Constant(value.clone()),
            InitialStateSpec::Nodes { nodes } => InitialHistory::Nodes(nodes.clone()),
        };
        let u0 = match &self.initial.u0 {
            InitialInputSpec::Constant { value } => InitialInput::Constant(*value),
            InitialInputSpec::Segments { segments } => InitialInput::Segments(segments.clone()),
        };
        let cfg = SimConfig {
            plant: self.plant.clone(),
            injection: self.observer.p.clone(),
            theta: self.observer.theta,
            feedback: self.feedback.k.clone(),
            predictor,
            t1: self.sampling.t1,
            t2: self.sampling.t2,
            h: self.integration.h,
            t_end: self.integration.t_end,
            x0,
            u0,
            z0: self.observer.z0.clone(),
            w0: self.observer.w0,
            d: self.signals.d.clone(),
            xi: self.signals.xi.clone(),
            b: self.signals.b.clone(),
            monitors: self.monitors.enabled,
            seed: self.integration.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepFile {
    /// Path to the base scenario, relative to this file.
    pub base: String,
    pub axes: Vec<AxisSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AxisSection {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    rename_all_fields = "kebab-case",
    deny_unknown_fields
)]
pub enum CriterionSection {
    Decay {
        #[serde(default = "default_r_squared")]
        min_r_squared: f64,
    },
    Bound {
        sup_limit: f64,
    },
}

fn default_r_squared() -> f64 {
    0.9
}

impl SweepFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: SweepFile =
            toml::from_str(&text).map_err(|e| Error::Config(format!("sweep file: {e}")))?;
        Ok(file)
    }

    pub fn to_spec(&self, sweep_path: &Path) -> Result<SweepSpec> {
        let base_path = sweep_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&self.base);
        let scenario = ScenarioFile::load(&base_path)?;
        let base = scenario.to_sim_config()?;
        let mut axes = Vec::with_capacity(self.axes.len());
        for axis in &self.axes {
            axes.push((SweepParam::parse(&axis.param)?, axis.values.clone()));
        }
        let criterion = self.criterion.as_ref().map(|c| match c {
            CriterionSection::Decay { min_r_squared } => SuccessCriterion::Decay {
                min_r_squared: *min_r_squared,
            },
            CriterionSection::Bound { sup_limit } => SuccessCriterion::Bound {
                sup_limit: *sup_limit,
            },
        });
        Ok(SweepSpec {
            base,
            axes,
            criterion,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
plant = "example4"

[observer]
p = [-3.0, -3.0]
theta = 1.0
z0 = [0.0, 0.0]
w0 = 0.0

[feedback]
k = [-15.0, -8.0]

[predictor]
kind = "approx"
l = 1
m = 2

[sampling]
t1 = 0.03
t2 = 0.01

[integration]
h = 0.001
t-end = 40.0
seed = 42

[initial]
x0 = { kind = "constant", value = [1.0, 1.0] }
u0 = { kind = "constant", value = -2.0 }

[signals]
d = { kind = "zero" }
xi = { kind = "zero" }
b = { kind = "zero" }

[monitors]
enabled = true
"#;

    #[test]
    fn parse_and_lower() {
        let file = ScenarioFile::parse(EXAMPLE).unwrap();
        let cfg = file.to_sim_config().unwrap();
        assert_eq!(cfg.plant, "example4");
        assert_eq!(cfg.t1, 0.03);
        assert!(matches!(
            cfg.predictor,
            PredictorSpec::Approx {
                picard_depth: 1,
                sub_intervals: 2,
                quadrature_nodes: 256
            }
        ));
    }

    #[test]
    fn round_trips() {
        let file = ScenarioFile::parse(EXAMPLE).unwrap();
        let dumped = file.dump().unwrap();
        let reparsed = ScenarioFile::parse(&dumped).unwrap();
        assert_eq!(file, reparsed);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = EXAMPLE.replace(
            "[monitors]\nenabled = true",
            "[monitors]\nenabled = true\nbogus = 1",
        );
        assert!(ScenarioFile::parse(&text).is_err());
    }

    #[test]
    fn negative_quantities_rejected() {
        let text = EXAMPLE.replace("t1 = 0.03", "t1 = -0.03");
        assert!(ScenarioFile::parse(&text).is_err());
        let text = EXAMPLE.replace("theta = 1.0", "theta = 0.2");
        assert!(ScenarioFile::parse(&text).is_err());
    }

    #[test]
    fn sinusoid_signal_parses() {
        let text = EXAMPLE.replace(
            "d = { kind = \"zero\" }",
            "d = { kind = \"sinusoid\", amplitude = 0.5, frequency = 1.0 }",
        );
        let file = ScenarioFile::parse(&text).unwrap();
        match file.signals.d {
            ExogenousSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => {
                assert_eq!(amplitude, 0.5);
                assert_eq!(frequency, 1.0);
                assert_eq!(phase, 0.0);
            }
            other => panic!("unexpected signal {other:?}"),
        }
    }
}
