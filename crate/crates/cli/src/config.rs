//! Run configuration: a TOML or JSON file, overridden field by field by
//! command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use riccflat::ode::TheoremParams;
use riccflat::phi::BuiltinPhi;
use riccflat::verify::{find_scenario, PhiSpec, Scenario, VerifyOptions};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SCENARIO: &str = "sphere3_hopf";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Catalog,
    Compute,
    SolvePhi,
    Verify,
    Xcheck,
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CommandName::Catalog => "catalog",
            CommandName::Compute => "compute",
            CommandName::SolvePhi => "solve-phi",
            CommandName::Verify => "verify",
            CommandName::Xcheck => "xcheck",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    /// Catalog scenario name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// A full scenario given inline instead of by name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario_spec: Option<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// `riemannian`, `randers`, `quadratic` or `ode`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    /// JSON report destination.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// CSV grid destination for `solve-phi`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<riccflat::Error> for ConfigError {
    fn from(e: riccflat::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

impl RunConfig {
    /// Parse a config file, choosing the format from the extension
    /// (`.json`, anything else is TOML).
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        if is_json(path) {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
        .map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes to JSON")
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            command, scenario, scenario_spec, eps, phi, c1, c2, tau, n, b2, q0, delta, tol, samples, seed, delta_s,
            point, direction, output, csv
        )
    }

    pub fn check_command(&self, running: CommandName) -> Result<(), ConfigError> {
        match self.command {
            Some(c) if c != running => {
                Err(ConfigError(format!("config file is for `{c}` but `{running}` was invoked")))
            }
            _ => Ok(()),
        }
    }

    /// The scenario named (or given inline) with every override applied.
    pub fn resolve_scenario(&self) -> Result<Scenario, ConfigError> {
        let mut sc = match (&self.scenario_spec, &self.scenario) {
            (Some(_), Some(_)) => return Err(ConfigError("give either `scenario` or `scenario_spec`, not both".into())),
            (Some(spec), None) => spec.clone(),
            (None, name) => find_scenario(name.as_deref().unwrap_or(DEFAULT_SCENARIO), None)?,
        };
        if let Some(eps) = self.eps {
            sc = sc.with_eps(eps)?;
        }
        self.apply_params(&mut sc.params);
        if let Some(key) = &self.phi {
            sc.phi = if key == "ode" {
                match sc.phi {
                    PhiSpec::Ode { .. } => sc.phi,
                    PhiSpec::Builtin { .. } => PhiSpec::Ode { q0: 1.0, delta: 0.01, tol: riccflat::ode::DEFAULT_TOL },
                }
            } else {
                let model = BuiltinPhi::from_key(key)
                    .ok_or_else(|| ConfigError(format!("unknown phi `{key}` (expected ode, {})", builtin_keys())))?;
                PhiSpec::Builtin { model }
            };
        }
        match &mut sc.phi {
            PhiSpec::Ode { q0, delta, tol } => {
                *q0 = self.q0.unwrap_or(*q0);
                *delta = self.delta.unwrap_or(*delta);
                *tol = self.tol.unwrap_or(*tol);
            }
            PhiSpec::Builtin { .. } => {
                if self.q0.is_some() || self.delta.is_some() || self.tol.is_some() {
                    return Err(ConfigError("q0, delta and tol only apply to the ode profile".into()));
                }
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    fn apply_params(&self, p: &mut TheoremParams) {
        p.c1 = self.c1.unwrap_or(p.c1);
        p.c2 = self.c2.unwrap_or(p.c2);
        p.tau = self.tau.unwrap_or(p.tau);
        p.n = self.n.unwrap_or(p.n);
        p.b2 = self.b2.unwrap_or(p.b2);
    }

    /// Parameters for a bare ODE solve, independent of any scenario.
    pub fn ode_params(&self) -> TheoremParams {
        let mut p = TheoremParams { c1: 1.0, c2: 0.0, n: 3, b2: 0.09, tau: 1.0 };
        if let Some(eps) = self.eps {
            p.b2 = eps * eps;
        }
        self.apply_params(&mut p);
        p
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions { samples: self.samples, seed: self.seed, delta_s: self.delta_s }
    }
}

pub fn builtin_keys() -> String {
    BuiltinPhi::ALL.iter().map(|m| m.key()).collect::<Vec<_>>().join(", ")
}
