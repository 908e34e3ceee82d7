//! Flat `key = value` experiment configuration.
//!
//! One key per line; `#` starts a comment. A `preset` line selects the
//! baseline values (`fig3` or `fig1`) before the remaining keys are applied,
//! wherever it appears in the file. Every problem found is reported, not just
//! the first.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ctrecon::{InitialGuess, NoiseSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Fbp,
    TvSb,
    MaskedL2,
    ExactMask,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fbp => "fbp",
            Method::TvSb => "tv_sb",
            Method::MaskedL2 => "masked_l2",
            Method::ExactMask => "exact_mask",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fbp" => Ok(Method::Fbp),
            "tv_sb" => Ok(Method::TvSb),
            "masked_l2" => Ok(Method::MaskedL2),
            "exact_mask" => Ok(Method::ExactMask),
            other => Err(format!(
                "unknown method `{other}` (expected fbp, tv_sb, masked_l2 or exact_mask)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub phantom_size: usize,
    pub n_angles: usize,
    pub methods: Vec<Method>,
    pub tau: f64,
    pub lambda_masked: f64,
    pub lambda_tv: f64,
    pub noise: NoiseSpec,
    pub output_dir: PathBuf,
    /// CG budget of the masked and exact-mask solves.
    pub max_iters: usize,
    pub rel_tolerance: f64,
    pub initial_guess: InitialGuess,
    pub lambda_large: f64,
    pub sb_mu: f64,
    pub sb_outer_iters: usize,
    /// Inner CG steps per Split Bregman iteration; defaults to `max_iters`.
    pub sb_inner_iters: Option<usize>,
    /// Reconstruct from this CTMAT sinogram instead of projecting the phantom.
    pub sinogram_path: Option<PathBuf>,
}

/// Parameters accepted by `sweep`.
pub const SWEEP_PARAMETERS: [&str; 5] = ["n_angles", "tau", "lambda_masked", "lambda_tv", "sigma"];

impl ExperimentConfig {
    /// N=256, 45 views, τ=0.3, λ=0.1, λ_tv=0.01, noiseless.
    pub fn fig3() -> Self {
        Self {
            phantom_size: 256,
            n_angles: 45,
            methods: vec![Method::Fbp, Method::TvSb, Method::MaskedL2],
            tau: 0.3,
            lambda_masked: 0.1,
            lambda_tv: 0.01,
            noise: NoiseSpec::default(),
            output_dir: PathBuf::from("out"),
            max_iters: 500,
            rel_tolerance: 1e-8,
            initial_guess: InitialGuess::Zero,
            lambda_large: ctrecon::solvers::DEFAULT_LAMBDA_LARGE,
            sb_mu: 1.0,
            sb_outer_iters: 10,
            sb_inner_iters: None,
            sinogram_path: None,
        }
    }

    /// N=64, a single view, exact mask.
    pub fn fig1() -> Self {
        Self {
            phantom_size: 64,
            n_angles: 1,
            methods: vec![Method::ExactMask],
            max_iters: 100_000,
            rel_tolerance: 1e-16,
            ..Self::fig3()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "fig3" => Some(Self::fig3()),
            "fig1" => Some(Self::fig1()),
            _ => None,
        }
    }

    pub fn inner_cg_iters(&self) -> usize {
        self.sb_inner_iters.unwrap_or(self.max_iters)
    }

    /// Parses config text. Relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> CliResult<Self> {
        let mut errors = Vec::new();
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        let mut cfg = Self::fig3();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!("line {}: expected `key = value`", lineno + 1));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                errors.push(format!("line {}: duplicate key `{key}`", lineno + 1));
                continue;
            }
            if key == "preset" {
                match Self::preset(value) {
                    Some(p) => cfg = p,
                    None => errors.push(format!(
                        "preset: unknown preset `{value}` (expected fig3 or fig1)"
                    )),
                }
            } else {
                entries.push((lineno + 1, key, value));
            }
        }
        for (lineno, key, value) in entries {
            if let Err(e) = cfg.set(key, value) {
                errors.push(format!("line {lineno}: {e}"));
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base_dir.join(&cfg.output_dir);
        }
        if let Some(p) = &cfg.sinogram_path {
            if p.is_relative() {
                cfg.sinogram_path = Some(base_dir.join(p));
            }
        }
        errors.extend(cfg.problems());
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(CliError::Config(errors))
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("{key}: cannot parse `{value}`"))
        }
        match key {
            "phantom_size" => self.phantom_size = num(key, value)?,
            "n_angles" => self.n_angles = num(key, value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|e| format!("methods: {e}")))
                    .collect::<Result<_, _>>()?;
            }
            "tau" => self.tau = num(key, value)?,
            "lambda_masked" => self.lambda_masked = num(key, value)?,
            "lambda_tv" => self.lambda_tv = num(key, value)?,
            "sigma" => self.noise.sigma = num(key, value)?,
            "seed" => self.noise.seed = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "max_iters" => self.max_iters = num(key, value)?,
            "rel_tolerance" => self.rel_tolerance = num(key, value)?,
            "initial_guess" => {
                self.initial_guess = match value {
                    "zero" => InitialGuess::Zero,
                    "fbp" => InitialGuess::Fbp,
                    _ => {
                        return Err(format!(
                            "initial_guess: expected zero or fbp, got `{value}`"
                        ))
                    }
                }
            }
            "lambda_large" => self.lambda_large = num(key, value)?,
            "sb_mu" => self.sb_mu = num(key, value)?,
            "sb_outer_iters" => self.sb_outer_iters = num(key, value)?,
            "sb_inner_iters" => self.sb_inner_iters = Some(num(key, value)?),
            "sinogram_path" => self.sinogram_path = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Field-by-field range checks.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.phantom_size < 8 {
            p.push(format!(
                "phantom_size: must be at least 8, got {}",
                self.phantom_size
            ));
        }
        if self.n_angles == 0 {
            p.push("n_angles: must be positive".to_string());
        }
        if self.methods.is_empty() {
            p.push("methods: at least one method is required".to_string());
        }
        let mut seen = HashSet::new();
        for m in &self.methods {
            if !seen.insert(*m) {
                p.push(format!("methods: `{m}` listed twice"));
            }
        }
        for (name, v) in [
            ("tau", self.tau),
            ("lambda_masked", self.lambda_masked),
            ("lambda_tv", self.lambda_tv),
            ("lambda_large", self.lambda_large),
            ("sb_mu", self.sb_mu),
        ] {
            if !positive(v) {
                p.push(format!("{name}: must be positive and finite, got {v}"));
            }
        }
        if !(self.noise.sigma >= 0.0 && self.noise.sigma.is_finite()) {
            p.push(format!(
                "sigma: must be non-negative, got {}",
                self.noise.sigma
            ));
        }
        if self.max_iters == 0 {
            p.push("max_iters: must be positive".to_string());
        }
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            p.push(format!(
                "rel_tolerance: must lie in (0, 1), got {}",
                self.rel_tolerance
            ));
        }
        if self.sb_outer_iters == 0 {
            p.push("sb_outer_iters: must be positive".to_string());
        }
        if self.sb_inner_iters == Some(0) {
            p.push("sb_inner_iters: must be positive".to_string());
        }
        p
    }
}
