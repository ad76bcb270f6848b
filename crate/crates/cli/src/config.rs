//! `key = value` run configuration.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dims: Vec<u32>,
    pub seed: u64,
    /// Relative tolerance for inequality checks.
    pub tol: f64,
    /// Random data per dimension in the inequality suite.
    pub samples: usize,
    /// Ball radius for ball-based suites.
    pub radius: f64,
    /// Measure grid `[t_min V, V]` for the inequality suite.
    pub t_min: f64,
    pub t_points: usize,
    /// Bump radius as a fraction of `radius`.
    pub delta: f64,
    /// `ε/R` schedule of the balanced family.
    pub epsilons: Vec<f64>,
    /// Fixed `t/V` of the balanced family.
    pub t_fixed: f64,
    /// Radii of the translated-pair sweep.
    pub radii: Vec<f64>,
    /// Bump radius of the translated pair.
    pub delta0: f64,
    /// `λ = R^σ`.
    pub sigma: f64,
    pub cells_per_delta: usize,
    /// Bump radii of the exponential-integral sweep.
    pub bm_deltas: Vec<f64>,
    /// `α/π` values below the critical exponent.
    pub alphas: Vec<f64>,
    pub q3: Vec<f64>,
    pub q4: Vec<f64>,
    pub threshold: f64,
    pub majorant_points: usize,
    /// Heights of the truncated kernels.
    pub truncations: usize,
    /// Multiplies the kernel in the inequality suite; harness self-test.
    pub kernel_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4],
            seed: 20240901,
            tol: 1e-9,
            samples: 200,
            radius: 1.0,
            t_min: 1e-10,
            t_points: 60,
            delta: 0.05,
            epsilons: vec![1e-1, 1e-2, 1e-3, 1e-4],
            t_fixed: 1e-2,
            radii: vec![1e2, 1e3, 1e4],
            delta0: 0.25,
            sigma: 0.5,
            cells_per_delta: 64,
            bm_deltas: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8],
            alphas: vec![1.0, 2.0, 3.0],
            q3: vec![1.0, 1.5, 2.5],
            q4: vec![1.0, 1.5],
            threshold: 1e-3,
            majorant_points: 1000,
            truncations: 20,
            kernel_scale: 1.0,
        }
    }
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Config(format!("invalid value for `{key}`: {value}"))
}

fn parse_f64(key: &str, value: &str) -> Result<f64, CliError> {
    value.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(key, value))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, CliError> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    let value = value.trim();
    if value.is_empty() {
        return Ok(vec![]);
    }
    value.split(',').map(|s| s.trim().parse::<T>().map_err(|_| bad(key, value))).collect()
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = parse_list(key, value)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(bad(key, value));
    }
    Ok(v)
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "dims" => self.dims = parse_list(key, value)?,
            "seed" => self.seed = value.trim().parse().map_err(|_| bad(key, value))?,
            "tol" => self.tol = parse_f64(key, value)?,
            "samples" => self.samples = parse_usize(key, value)?,
            "radius" => self.radius = parse_f64(key, value)?,
            "t_min" => self.t_min = parse_f64(key, value)?,
            "t_points" => self.t_points = parse_usize(key, value)?,
            "delta" => self.delta = parse_f64(key, value)?,
            "epsilons" => self.epsilons = parse_f64_list(key, value)?,
            "t_fixed" => self.t_fixed = parse_f64(key, value)?,
            "radii" => self.radii = parse_f64_list(key, value)?,
            "delta0" => self.delta0 = parse_f64(key, value)?,
            "sigma" => self.sigma = parse_f64(key, value)?,
            "cells_per_delta" => self.cells_per_delta = parse_usize(key, value)?,
            "bm_deltas" => self.bm_deltas = parse_f64_list(key, value)?,
            "alphas" => self.alphas = parse_f64_list(key, value)?,
            "q3" => self.q3 = parse_f64_list(key, value)?,
            "q4" => self.q4 = parse_f64_list(key, value)?,
            "threshold" => self.threshold = parse_f64(key, value)?,
            "majorant_points" => self.majorant_points = parse_usize(key, value)?,
            "truncations" => self.truncations = parse_usize(key, value)?,
            "kernel_scale" => self.kernel_scale = parse_f64(key, value)?,
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected key = value", i + 1)));
            };
            cfg.set(k.trim(), v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Rejects schedules the families cannot be built on.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Config(m));
        if self.dims.is_empty() {
            return fail("dimension list is empty".into());
        }
        if let Some(n) = self.dims.iter().find(|&&n| !(2..=12).contains(&n)) {
            return fail(format!("dimension {n} outside 2..=12"));
        }
        if !(self.tol > 0.0) || !(self.radius > 0.0) {
            return fail("tol and radius must be positive".into());
        }
        if !(self.t_min > 0.0 && self.t_min < 1.0) || self.t_points < 2 {
            return fail("need 0 < t_min < 1 and t_points ≥ 2".into());
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return fail("delta must lie in (0, 1/2)".into());
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0 && self.delta + 2.0 * e < 1.0)) {
            return fail("every epsilon needs 0 < ε and δ + 2ε < 1".into());
        }
        if !(self.t_fixed > 0.0 && self.t_fixed < 1.0) {
            return fail("t_fixed must lie in (0, 1)".into());
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return fail("sigma must lie in (0, 1)".into());
        }
        for &r in &self.radii {
            let lambda = r.powf(self.sigma);
            if !(2.0 * self.delta0 < lambda && lambda < r && 2.0 * self.delta0 < r && lambda + self.delta0 <= r / 2.0) {
                return fail(format!("radius {r} violates 2δ0 < λ = R^σ ≤ R/2 - δ0"));
            }
        }
        if self.cells_per_delta == 0 || self.majorant_points < 2 {
            return fail("cells_per_delta and majorant_points must be positive".into());
        }
        if self.bm_deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return fail("bm_deltas must lie in (0, 1)".into());
        }
        if self.alphas.iter().any(|&a| !(a > 0.0 && a < 4.0)) {
            return fail("alphas are α/π values in (0, 4)".into());
        }
        if self.q3.iter().any(|&q| !(1.0..3.0).contains(&q)) || self.q4.iter().any(|&q| !(1.0..2.0).contains(&q)) {
            return fail("q3 must lie in [1, 3) and q4 in [1, 2)".into());
        }
        if !(self.threshold > 0.0) || !(self.kernel_scale > 0.0) {
            return fail("threshold and kernel_scale must be positive".into());
        }
        Ok(())
    }

    /// Canonical text form, one `key = value` per line.
    pub fn canonical(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let dims = self.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "dims = {dims}");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "tol = {:e}", self.tol);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "radius = {:e}", self.radius);
        let _ = writeln!(s, "t_min = {:e}", self.t_min);
        let _ = writeln!(s, "t_points = {}", self.t_points);
        let _ = writeln!(s, "delta = {:e}", self.delta);
        let _ = writeln!(s, "epsilons = {}", list(&self.epsilons));
        let _ = writeln!(s, "t_fixed = {:e}", self.t_fixed);
        let _ = writeln!(s, "radii = {}", list(&self.radii));
        let _ = writeln!(s, "delta0 = {:e}", self.delta0);
        let _ = writeln!(s, "sigma = {:e}", self.sigma);
        let _ = writeln!(s, "cells_per_delta = {}", self.cells_per_delta);
        let _ = writeln!(s, "bm_deltas = {}", list(&self.bm_deltas));
        let _ = writeln!(s, "alphas = {}", list(&self.alphas));
        let _ = writeln!(s, "q3 = {}", list(&self.q3));
        let _ = writeln!(s, "q4 = {}", list(&self.q4));
        let _ = writeln!(s, "threshold = {:e}", self.threshold);
        let _ = writeln!(s, "majorant_points = {}", self.majorant_points);
        let _ = writeln!(s, "truncations = {}", self.truncations);
        let _ = writeln!(s, "kernel_scale = {:e}", self.kernel_scale);
        s
    }

    pub fn hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.canonical().hash(&mut h);
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let cfg = RunConfig::parse("dims = 3, 4 # comment\nseed=7\n\nepsilons = 0.1,0.01\n").unwrap();
        assert_eq!(cfg.dims, vec![3, 4]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.epsilons, vec![0.1, 0.01]);
        let again = RunConfig::parse(&cfg.canonical()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("nope = 1").is_err());
        assert!(RunConfig::parse("tol = abc").is_err());
        assert!(RunConfig::parse("just text").is_err());
        let cfg = RunConfig::parse("dims =").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = RunConfig::parse("radii = 2").unwrap();
        assert!(cfg.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
