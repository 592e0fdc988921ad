//! Flag parsing shared by the subcommands.

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use echoform::inversion::{Calibration, CalibrationReport, GridSpec};
use echoform::profile::parse_profile;
use echoform::solver::{BoundaryCondition, ScattererSpec};
use echoform::synthesis::{DirectionConfig, FrequencyGrid};
use echoform::BoundaryCurve;
use std::path::{Path, PathBuf};

pub const CALIBRATION_ENV: &str = "ECHOFORM_CALIBRATION";
pub const DEFAULT_PROFILE: &str = "2+0.5*sin(t)+0.2*sin(5*t)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BcKind {
    Dirichlet,
    Neumann,
    Impedance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetKind {
    #[value(name = "A1")]
    A1,
    #[value(name = "A2")]
    A2,
}

/// Everything needed to synthesize a dataset.
#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// egg, kite, or disk[:a=R,cx=X,cy=Y]
    #[arg(long, default_value = "egg")]
    pub geometry: String,
    #[arg(long, value_enum, default_value = "dirichlet")]
    pub bc: BcKind,
    /// Impedance profile in t, e.g. "2+0.5*sin(t)"
    #[arg(long = "lambda", default_value = DEFAULT_PROFILE)]
    pub lambda: String,
    /// k_minus:k_plus:dk
    #[arg(long, default_value = "20:50:0.1")]
    pub band: String,
    #[arg(long, default_value_t = 64)]
    pub directions: usize,
    #[arg(long, value_enum, default_value = "A2")]
    pub set: SetKind,
    #[arg(long, default_value = "8,10")]
    pub alphas: String,
    /// Relative noise level δ
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SynthArgs {
    pub fn curve(&self) -> Result<BoundaryCurve> {
        Ok(self.geometry.parse()?)
    }

    pub fn spec(&self) -> Result<ScattererSpec> {
        let bc = match self.bc {
            BcKind::Dirichlet => BoundaryCondition::Dirichlet,
            BcKind::Neumann => BoundaryCondition::Neumann,
            BcKind::Impedance => BoundaryCondition::impedance(
                parse_profile(&self.lambda).with_context(|| format!("impedance profile '{}'", self.lambda))?,
            ),
        };
        Ok(ScattererSpec::new(self.curve()?, bc)?)
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        parse_band(&self.band)
    }

    pub fn config(&self) -> Result<DirectionConfig> {
        Ok(match self.set {
            SetKind::A1 => DirectionConfig::backscatter(),
            SetKind::A2 => DirectionConfig::A2 { alphas: parse_alphas(&self.alphas)? },
        })
    }
}

fn numbers(text: &str, sep: char, count: usize, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(sep).collect();
    if parts.len() != count {
        bail!("{what} '{text}' needs {count} fields separated by '{sep}'");
    }
    parts
        .iter()
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("{what} field '{p}' is not a number")))
        .collect()
}

pub fn parse_band(text: &str) -> Result<FrequencyGrid> {
    let v = numbers(text, ':', 3, "band")?;
    FrequencyGrid::new(v[0], v[1], v[2]).with_context(|| format!("band '{text}'"))
}

pub fn parse_grid(text: &str) -> Result<GridSpec> {
    let v = numbers(text, ':', 5, "grid")?;
    GridSpec::new(v[0], v[1], v[2], v[3], v[4]).with_context(|| format!("grid '{text}'"))
}

pub fn parse_alphas(text: &str) -> Result<[u32; 2]> {
    let v = numbers(text, ',', 2, "alphas")?;
    let to_u32 = |x: f64| -> Result<u32> {
        if x.fract() != 0.0 || !(1.0..=15.0).contains(&x) {
            bail!("rotation index {x} must be an integer in 1..=15");
        }
        Ok(x as u32)
    };
    Ok([to_u32(v[0])?, to_u32(v[1])?])
}

/// The calibration named by `ECHOFORM_CALIBRATION`, else the built-in one.
pub fn load_calibration() -> Result<Calibration> {
    match std::env::var_os(CALIBRATION_ENV) {
        Some(path) => read_calibration(Path::new(&path)),
        None => Ok(Calibration::default()),
    }
}

pub fn read_calibration(path: &Path) -> Result<Calibration> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading calibration {}", path.display()))?;
    let cal = match serde_json::from_str::<Calibration>(&text) {
        Ok(c) => c,
        Err(_) => {
            serde_json::from_str::<CalibrationReport>(&text)
                .with_context(|| format!("parsing calibration {}", path.display()))?
                .calibration
        }
    };
    cal.validate()?;
    Ok(cal)
}

/// Files written so far; removed again unless the run completes.
#[derive(Default)]
pub struct Outputs {
    paths: Vec<PathBuf>,
    done: bool,
}

impl Outputs {
    pub fn add(&mut self, paths: impl IntoIterator<Item = PathBuf>) {
        self.paths.extend(paths);
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.done = true;
        std::mem::take(&mut self.paths)
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.done {
            for p in &self.paths {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}
