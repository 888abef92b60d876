//! Settings shared by the subcommands: the resolved system, integrator and
//! initial state (flags override the config file), and output routing.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use vnc::systems::builtin;
use vnc::{ControlSettings, IntegratorSettings, NonUniquePolicy, SystemSpec, TangentState};

use crate::args::{Format, Global, MethodArg, RunArgs};
use crate::config::{resolve_system, SystemConfig};
use crate::exit::Failure;

const DEFAULT_DT: f64 = 1e-3;
const DEFAULT_HORIZON: f64 = 10.0;
const DEFAULT_TOL: f64 = 1e-10;

pub struct Context {
    pub system: SystemSpec,
    pub config: SystemConfig,
    pub seed: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
}

impl Context {
    pub fn from_global(global: &Global) -> Result<Self, Failure> {
        let config = match &global.config {
            Some(path) => Some(SystemConfig::load(path)?),
            None => None,
        };
        let system = resolve_system(global.system.as_deref(), &global.param_map(), config.as_ref())?;
        let config = config.unwrap_or_default();
        let format = match (global.format, config.output.format.as_deref()) {
            (Some(f), _) => Some(f),
            (None, None) => None,
            (None, Some("csv")) => Some(Format::Csv),
            (None, Some("json")) => Some(Format::Json),
            (None, Some(other)) => return Err(Failure::config(format!("unknown output format `{other}`"))),
        };
        let out = global.out.clone().or_else(|| config.output.path.clone());
        Ok(Context { system, config, seed: global.seed, out, format })
    }

    /// Explicit format, else inferred from the output file extension.
    pub fn format(&self) -> Option<Format> {
        self.format.or_else(|| match self.out.as_ref()?.extension()?.to_str()? {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        })
    }

    pub fn writes_to_file(&self) -> bool {
        self.out.is_some()
    }

    pub fn output(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).map_err(|e| Failure::config(format!("cannot create {}: {e}", path.display())))?,
            )),
            None => Box::new(io::stdout().lock()),
        })
    }

    pub fn integrator(&self, run: &RunArgs) -> Result<IntegratorSettings, Failure> {
        let cfg = &self.config.integrator;
        let method = match (run.method, cfg.method.as_deref()) {
            (Some(m), _) => m,
            (None, None | Some("rk4")) => MethodArg::Rk4,
            (None, Some("rk45")) => MethodArg::Rk45,
            (None, Some(other)) => return Err(Failure::config(format!("unknown integrator method `{other}`"))),
        };
        let horizon = run.horizon.or(cfg.horizon).unwrap_or(DEFAULT_HORIZON);
        let dt = run.dt.or(cfg.dt).unwrap_or(DEFAULT_DT);
        let settings = match method {
            MethodArg::Rk4 => IntegratorSettings::rk4(dt, horizon),
            MethodArg::Rk45 => {
                let atol = run.atol.or(cfg.atol).unwrap_or(DEFAULT_TOL);
                let rtol = run.rtol.or(cfg.rtol).unwrap_or(DEFAULT_TOL);
                IntegratorSettings { dt, ..IntegratorSettings::rk45(atol, rtol, horizon) }
            }
        };
        settings.validate()?;
        Ok(settings)
    }

    pub fn initial_state(&self, run: &RunArgs) -> Result<TangentState, Failure> {
        let default = builtin::default_initial_state(&self.system);
        let initial = self.config.initial.as_ref();
        let q = run.q0.clone().or_else(|| initial.map(|i| i.q.clone()));
        let qdot = run.v0.clone().or_else(|| initial.map(|i| i.qdot.clone()));
        let n = self.system.dim();
        let q = q.unwrap_or_else(|| default.q.as_slice().to_vec());
        let qdot = qdot.unwrap_or_else(|| default.qdot.as_slice().to_vec());
        for (what, v) in [("q0", &q), ("v0", &qdot)] {
            if v.len() != n {
                return Err(Failure::config(format!("{what} has {} entries, the system has {n} coordinates", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Failure::config(format!("{what} must be finite")));
            }
        }
        Ok(TangentState::new(0.0, q, qdot))
    }
}

pub fn control_settings(run: &RunArgs) -> ControlSettings {
    ControlSettings {
        policy: if run.allow_nonunique { NonUniquePolicy::MinimumNorm } else { NonUniquePolicy::Refuse },
        stabilize: run.stabilize,
    }
}
