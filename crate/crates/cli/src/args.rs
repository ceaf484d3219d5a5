use std::path::{Path, PathBuf};

use clap::Args;
use cmcrot_core::integrate::IntegratorConfig;
use cmcrot_core::Params;

use crate::CliError;

fn dimension(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(v) if v >= 2 => Ok(v),
        _ => Err(format!("p,q must be ≥ 2 (got {s})")),
    }
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Dims {
    #[arg(long, value_parser = dimension)]
    pub p: u32,
    #[arg(long, value_parser = dimension)]
    pub q: u32,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ParamArgs {
    #[command(flatten)]
    pub dims: Dims,
    /// Mean curvature.
    #[arg(long = "H", default_value_t = 1.0, allow_negative_numbers = true)]
    pub h: f64,
}

impl ParamArgs {
    pub fn params(&self) -> Result<Params, CliError> {
        Params::new(self.dims.p, self.dims.q, self.h).map_err(CliError::from)
    }
}

/// Integrator overrides shared by every subcommand. Precedence is flags,
/// then the config file, then the built-in defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct NumArgs {
    /// Radius of the series seed near the origin [default: 1e-4].
    #[arg(long)]
    pub seed_r0: Option<f64>,
    /// Relative tolerance of the integrator [default: 1e-10].
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Absolute tolerance of the integrator [default: 1e-12].
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Radius at which origin branches leave the blown-up chart [default: 0.1].
    #[arg(long)]
    pub handoff: Option<f64>,
    /// TOML file with integrator settings (any field of the integrator config).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn load_config(path: &Path) -> Result<IntegratorConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl NumArgs {
    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => IntegratorConfig::default(),
        };
        if let Some(v) = self.seed_r0 {
            cfg.seed_r0 = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            cfg.abs_tol = v;
        }
        if let Some(v) = self.handoff {
            cfg.handoff_radius = v;
        }
        cfg.validate()?;
        log::debug!("integrator config: {cfg:?}");
        Ok(cfg)
    }
}

pub fn order(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("order must be ≥ 1 (got {s})")),
    }
}

/// Parses `x,y,theta`.
pub fn triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected x,y,theta (got {} values)", v.len()))
}

/// Parses an inclusive range `a-b` or a single value.
pub fn range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once('-').unwrap_or((s, s));
    let a = dimension(a.trim())?;
    let b = dimension(b.trim())?;
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triples_and_ranges() {
        assert_eq!(triple("1, 1,0").unwrap(), [1.0, 1.0, 0.0]);
        assert!(triple("1,2").is_err());
        assert_eq!(range("2-5").unwrap(), (2, 5));
        assert_eq!(range("3").unwrap(), (3, 3));
        assert!(range("1-4").is_err());
        assert!(range("5-3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("cmcrot-args-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.toml");
        std::fs::write(&path, "rel_tol = 1e-8\nmax_arclength = 50.0\n").unwrap();
        let args = NumArgs {
            rel_tol: Some(1e-9),
            config: Some(path),
            ..Default::default()
        };
        let cfg = args.integrator().unwrap();
        assert_eq!(cfg.rel_tol, 1e-9);
        assert_eq!(cfg.max_arclength, 50.0);
        assert_eq!(cfg.abs_tol, IntegratorConfig::default().abs_tol);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
