//! Run configuration: flat `key = value` files with `--key value` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::inpaint::{EpsStage, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Inpaint,
    InpaintGray,
    Galerkin,
    Perturb,
    Mc,
    GpcDiag,
    WaveletDiag,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Inpaint,
        Mode::InpaintGray,
        Mode::Galerkin,
        Mode::Perturb,
        Mode::Mc,
        Mode::GpcDiag,
        Mode::WaveletDiag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Inpaint => "inpaint",
            Mode::InpaintGray => "inpaint-gray",
            Mode::Galerkin => "galerkin",
            Mode::Perturb => "perturb",
            Mode::Mc => "mc",
            Mode::GpcDiag => "gpc-diag",
            Mode::WaveletDiag => "wavelet-diag",
        }
    }

    /// Whether the mode evolves an image.
    pub fn needs_image(self) -> bool {
        !matches!(self, Mode::GpcDiag | Mode::WaveletDiag)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Mode::ALL.iter().map(|m| m.name()).collect();
                format!("unknown mode `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyChoice {
    Hermite,
    Legendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseChoice {
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub input: Option<PathBuf>,
    pub mask: Option<PathBuf>,
    pub output: PathBuf,
    pub eps: f64,
    pub lambda0: f64,
    pub dt: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub max_steps: usize,
    pub tol: f64,
    pub eps_schedule: Option<Vec<EpsStage>>,
    pub sigma: f64,
    pub delta: f64,
    pub order: usize,
    pub gray_levels: usize,
    pub samples: usize,
    pub seed: u64,
    pub family: FamilyChoice,
    /// Support of the uniform input for the Legendre family.
    pub lower: f64,
    pub upper: f64,
    pub noise: NoiseChoice,
    /// Finest Haar level for `wavelet-diag`.
    pub levels: u32,
    pub pgm16: bool,
}

impl RunConfig {
    pub fn defaults(mode: Mode) -> Self {
        Self {
            mode,
            input: None,
            mask: None,
            output: PathBuf::from("."),
            eps: 1.0,
            lambda0: 10.0,
            dt: 1.0,
            c1: None,
            c2: None,
            max_steps: 10_000,
            tol: 1e-6,
            eps_schedule: None,
            sigma: 1.0,
            delta: 0.01,
            order: 1,
            gray_levels: 4,
            samples: 200,
            seed: 0,
            family: FamilyChoice::Hermite,
            lower: -1.0,
            upper: 1.0,
            noise: NoiseChoice::Gaussian,
            levels: 4,
            pgm16: false,
        }
    }

    pub const KEYS: &'static [&'static str] = &[
        "mode",
        "input",
        "mask",
        "output",
        "eps",
        "lambda0",
        "dt",
        "c1",
        "c2",
        "max_steps",
        "tol",
        "eps_schedule",
        "sigma",
        "delta",
        "order",
        "gray_levels",
        "samples",
        "seed",
        "family",
        "lower",
        "upper",
        "noise",
        "levels",
        "pgm16",
    ];

    /// Merges sources (later entries win) over the defaults and validates.
    /// `mode` must come from one of the sources.
    pub fn from_entries(entries: &[(String, String)]) -> Result<Self> {
        let mut merged: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, v) in entries {
            if !Self::KEYS.contains(&k.as_str()) {
                return Err(Error::config(k.as_str(), "unknown key"));
            }
            merged.insert(k, v);
        }
        let mode = merged
            .get("mode")
            .ok_or_else(|| Error::config("mode", "no mode given"))?
            .parse::<Mode>()
            .map_err(|m| Error::config("mode", m))?;
        let mut cfg = Self::defaults(mode);
        for (k, v) in merged {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "mode" => {}
            "input" => self.input = Some(PathBuf::from(value)),
            "mask" => self.mask = Some(PathBuf::from(value)),
            "output" => self.output = PathBuf::from(value),
            "eps" => self.eps = parse(key, value)?,
            "lambda0" => self.lambda0 = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "c1" => self.c1 = Some(parse(key, value)?),
            "c2" => self.c2 = Some(parse(key, value)?),
            "max_steps" => self.max_steps = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "eps_schedule" => self.eps_schedule = Some(parse_schedule(value)?),
            "sigma" => self.sigma = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "order" => self.order = parse(key, value)?,
            "gray_levels" => self.gray_levels = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "family" => {
                self.family = match value {
                    "hermite" => FamilyChoice::Hermite,
                    "legendre" => FamilyChoice::Legendre,
                    _ => {
                        return Err(Error::config(
                            key,
                            format!("expected hermite or legendre, got `{value}`"),
                        ))
                    }
                }
            }
            "lower" => self.lower = parse(key, value)?,
            "upper" => self.upper = parse(key, value)?,
            "noise" => {
                self.noise = match value {
                    "gaussian" => NoiseChoice::Gaussian,
                    "uniform" => NoiseChoice::Uniform,
                    _ => {
                        return Err(Error::config(
                            key,
                            format!("expected gaussian or uniform, got `{value}`"),
                        ))
                    }
                }
            }
            "levels" => self.levels = parse(key, value)?,
            "pgm16" => {
                self.pgm16 = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => {
                        return Err(Error::config(
                            key,
                            format!("expected true or false, got `{value}`"),
                        ))
                    }
                }
            }
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            c1: self.c1,
            c2: self.c2,
            max_steps: self.max_steps,
            tol: self.tol,
            eps_schedule: self.eps_schedule.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(
                    key,
                    format!("must be a finite number > 0, got {v}"),
                ))
            }
        };
        let non_negative = |key: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(
                    key,
                    format!("must be a finite number >= 0, got {v}"),
                ))
            }
        };
        positive("eps", self.eps)?;
        non_negative("lambda0", self.lambda0)?;
        positive("dt", self.dt)?;
        if let Some(c1) = self.c1 {
            positive("c1", c1)?;
        }
        if let Some(c2) = self.c2 {
            positive("c2", c2)?;
        }
        non_negative("tol", self.tol)?;
        non_negative("sigma", self.sigma)?;
        non_negative("delta", self.delta)?;
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::config(
                "lower",
                format!("need lower < upper, got {} and {}", self.lower, self.upper),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::config("max_steps", "must be at least 1"));
        }
        if matches!(self.mode, Mode::Galerkin | Mode::GpcDiag) && self.order < 1 {
            return Err(Error::config("order", "must be at least 1"));
        }
        if !(2..=256).contains(&self.gray_levels) {
            return Err(Error::config(
                "gray_levels",
                format!("must be in 2..=256, got {}", self.gray_levels),
            ));
        }
        if self.mode == Mode::Mc && self.samples < 2 {
            return Err(Error::config(
                "samples",
                format!("need at least 2, got {}", self.samples),
            ));
        }
        if self.levels > crate::wavelet::HaarBasis::MAX_LEVELS {
            return Err(Error::config(
                "levels",
                format!("at most {}", crate::wavelet::HaarBasis::MAX_LEVELS),
            ));
        }
        if self.mode.needs_image() {
            if self.input.is_none() {
                return Err(Error::config(
                    "input",
                    format!("required for mode {}", self.mode),
                ));
            }
            if self.mask.is_none() {
                return Err(Error::config(
                    "mask",
                    format!("required for mode {}", self.mode),
                ));
            }
        }
        self.solver().validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::config(name, reason),
            other => other,
        })
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

/// `eps:steps` pairs separated by commas, e.g. `1.5:2000,0.5:2000`.
pub fn parse_schedule(value: &str) -> Result<Vec<EpsStage>> {
    value
        .split(',')
        .map(|stage| {
            let (eps, steps) = stage.split_once(':').ok_or_else(|| {
                Error::config("eps_schedule", format!("stage `{stage}` is not eps:steps"))
            })?;
            Ok(EpsStage {
                eps: parse("eps_schedule", eps.trim())?,
                steps: parse("eps_schedule", steps.trim())?,
            })
        })
        .collect()
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::format(path, format!("line {}: expected key = value", n + 1)))?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}
