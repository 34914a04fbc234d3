use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::model::Model;
use crate::ou_sim::Scheme;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Spectrum,
    Cramer,
    Rate,
    Simulate,
    Epr,
    Verify,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::Spectrum => "spectrum",
            CommandName::Cramer => "cramer",
            CommandName::Rate => "rate",
            CommandName::Simulate => "simulate",
            CommandName::Epr => "epr",
            CommandName::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VerifyTest {
    Mgf,
    Girsanov,
    Gc,
    Ergodic,
}

/// One flat run description. Every key is optional in the file; missing keys
/// take the defaults below and command-line flags override both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<VerifyTest>,
    pub theta: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    pub lambda_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub x_steps: usize,
    pub dt: f64,
    pub scheme: Scheme,
    pub n_paths: usize,
    pub t: f64,
    pub bins: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: None,
            test: None,
            theta: FRAC_PI_4,
            seed: 0,
            output_dir: PathBuf::from("out"),
            threads: None,
            horizon: 10.0,
            n: 100,
            lambda: None,
            lambda_min: None,
            lambda_max: None,
            lambda_steps: 41,
            x: None,
            x_min: -3.0,
            x_max: 3.0,
            x_steps: 121,
            dt: 1e-3,
            scheme: Scheme::Euler,
            n_paths: 1000,
            t: 20.0,
            bins: 100,
        }
    }
}

fn positive(value: f64, key: &str) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "`{key}` must be positive and finite, got {value}"
        )))
    }
}

fn at_least(value: usize, min: usize, key: &str) -> Result<()> {
    if value >= min {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "`{key}` must be at least {min}, got {value}"
        )))
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + i as f64 * h
            }
        })
        .collect()
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(self.theta).map_err(|e| Error::Config(format!("theta: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let command = self
            .command
            .ok_or_else(|| Error::Config("no command given".into()))?;
        if self.test.is_some() && command != CommandName::Verify {
            return Err(Error::Config(
                "`test` only applies to the verify command".into(),
            ));
        }
        self.model()?;
        positive(self.horizon, "T")?;
        positive(self.dt, "dt")?;
        positive(self.t, "t")?;
        at_least(self.n, 1, "n")?;
        at_least(self.n_paths, 1, "n_paths")?;
        at_least(self.lambda_steps, 1, "lambda_steps")?;
        at_least(self.x_steps, 1, "x_steps")?;
        at_least(self.bins, 2, "bins")?;
        if !self.bins.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "`bins` must be even, got {}",
                self.bins
            )));
        }
        if let Some(threads) = self.threads {
            at_least(threads, 1, "threads")?;
        }
        match (self.lambda_min, self.lambda_max) {
            (Some(lo), Some(hi)) if lo > hi || lo.is_nan() || hi.is_nan() => {
                return Err(Error::Config(format!(
                    "lambda_min {lo} exceeds lambda_max {hi}"
                )))
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(Error::Config(
                    "lambda_min and lambda_max go together".into(),
                ))
            }
            _ => {}
        }
        if self.x_min > self.x_max || self.x_min.is_nan() || self.x_max.is_nan() {
            return Err(Error::Config(format!(
                "x_min {} exceeds x_max {}",
                self.x_min, self.x_max
            )));
        }
        let finite = [self.lambda, self.lambda_min, self.lambda_max, self.x]
            .into_iter()
            .flatten()
            .chain([self.x_min, self.x_max]);
        for v in finite {
            if !v.is_finite() {
                return Err(Error::Config(format!("non-finite grid value {v}")));
            }
        }
        Ok(())
    }

    /// Explicit `lambda`, else the `lambda_min..lambda_max` range, else `default`.
    pub fn lambda_grid(&self, default: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
        if let Some(l) = self.lambda {
            return vec![l];
        }
        match (self.lambda_min, self.lambda_max) {
            (Some(lo), Some(hi)) => linspace(lo, hi, self.lambda_steps),
            _ => default(),
        }
    }

    pub fn default_lambda_range(&self) -> Result<Vec<f64>> {
        let dc = self.model()?.derived_constants();
        let inset = 1e-2 * (dc.lambda_hi - dc.lambda_lo);
        Ok(linspace(
            dc.lambda_lo + inset,
            dc.lambda_hi - inset,
            self.lambda_steps,
        ))
    }

    pub fn x_grid(&self) -> Vec<f64> {
        match self.x {
            Some(x) => vec![x],
            None => linspace(self.x_min, self.x_max, self.x_steps),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("theta = 0.5\nbogus = 1\n").is_err());
        let c = ExperimentConfig::from_toml_str("theta = 0.5\nT = 3.0\ncommand = \"spectrum\"\n")
            .unwrap();
        assert_eq!(c.theta, 0.5);
        assert_eq!(c.horizon, 3.0);
        assert_eq!(c.command, Some(CommandName::Spectrum));
    }

    #[test]
    fn toml_and_json_round_trip() {
        let c = ExperimentConfig {
            command: Some(CommandName::Verify),
            test: Some(VerifyTest::Gc),
            lambda_min: Some(-0.3),
            lambda_max: Some(0.1),
            dt: 0.0025,
            ..Default::default()
        };
        assert_eq!(
            ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap(),
            c
        );
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(serde_json::from_value::<ExperimentConfig>(json).unwrap(), c);
    }

    #[test]
    fn validation() {
        let ok = ExperimentConfig {
            command: Some(CommandName::Rate),
            ..Default::default()
        };
        assert!(ok.validate().is_ok());
        assert!(ExperimentConfig::default().validate().is_err());
        for bad in [
            ExperimentConfig {
                theta: 0.0,
                ..ok.clone()
            },
            ExperimentConfig {
                theta: 2.0,
                ..ok.clone()
            },
            ExperimentConfig {
                bins: 7,
                ..ok.clone()
            },
            ExperimentConfig {
                dt: -1.0,
                ..ok.clone()
            },
            ExperimentConfig {
                lambda_min: Some(1.0),
                ..ok.clone()
            },
            ExperimentConfig {
                test: Some(VerifyTest::Mgf),
                ..ok.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn grids() {
        let c = ExperimentConfig {
            lambda_min: Some(-1.0),
            lambda_max: Some(0.0),
            lambda_steps: 5,
            ..Default::default()
        };
        assert_eq!(c.lambda_grid(Vec::new), vec![-1.0, -0.75, -0.5, -0.25, 0.0]);
        let c = ExperimentConfig {
            lambda: Some(0.1),
            ..c
        };
        assert_eq!(c.lambda_grid(Vec::new), vec![0.1]);
        let x = ExperimentConfig::default().x_grid();
        assert_eq!(x.len(), 121);
        assert_eq!((x[0], x[120]), (-3.0, 3.0));
        let dflt = ExperimentConfig::default().default_lambda_range().unwrap();
        let m = Model::new(FRAC_PI_4).unwrap();
        assert!(dflt.iter().all(|&l| m.in_domain(l)));
    }
}
