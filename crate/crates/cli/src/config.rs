//! Flat `section.key = value` configuration with a strict schema.
//!
//! Blank lines and lines starting with `#` are ignored. Every key has a
//! default, so an empty file is valid. All problems in a file are collected
//! and reported together.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub n: usize,
    /// `q(x) = q + q_r2 |x|²`.
    pub q: f64,
    pub q_r2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshConfig {
    pub h: f64,
    pub order: u32,
    pub slope: f64,
    pub origin_factor: f64,
    pub pole_factor: f64,
    pub reference_origin_h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// 0 picks the default block size.
    pub block: usize,
    pub gap_tol: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrackConfig {
    pub ladder: Vec<f64>,
    pub h_near: f64,
    pub tip_h: f64,
    pub richardson_order: f64,
    pub alpha_grid_deg: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayConfig {
    pub directions_deg: Vec<f64>,
    pub t0: f64,
    pub ratio: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Allowed deviation of the fitted exponent from `2j`; unset means `0.15 j`.
    pub exponent_tol: Option<f64>,
    /// Allowed relative error of `g*`; unset means 0.10 for `j = 1`, 0.15 otherwise.
    pub coefficient_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub model: ModelConfig,
    pub mesh: MeshConfig,
    pub eig: EigConfig,
    pub crack: CrackConfig,
    pub ray: RayConfig,
    pub verify: VerifyConfig,
    pub output_dir: String,
    /// SHA-256 of the file bytes (of the empty input without a file).
    pub hash: String,
}

impl Default for Config {
    fn default() -> Self {
        parse_config_str("").expect("defaults are valid")
    }
}

impl VerifyConfig {
    pub fn exponent_tol_for(&self, j: u32) -> f64 {
        self.exponent_tol.unwrap_or(0.15 * j as f64)
    }

    pub fn coefficient_tol_for(&self, j: u32) -> f64 {
        self.coefficient_tol.unwrap_or(if j == 1 { 0.10 } else { 0.15 })
    }
}

impl RayConfig {
    pub fn t_values(&self) -> Vec<f64> {
        (0..self.samples).map(|k| self.t0 * self.ratio.powi(k as i32)).collect()
    }
}

const KEYS: &[&str] = &[
    "model.N",
    "model.q",
    "model.q_r2",
    "mesh.h",
    "mesh.order",
    "mesh.slope",
    "mesh.origin_factor",
    "mesh.pole_factor",
    "mesh.reference_origin_h",
    "eig.tol",
    "eig.max_iter",
    "eig.block",
    "eig.gap_tol",
    "eig.seed",
    "crack.ladder",
    "crack.h_near",
    "crack.tip_h",
    "crack.richardson_order",
    "crack.alpha_grid_deg",
    "ray.directions_deg",
    "ray.t0",
    "ray.ratio",
    "ray.samples",
    "verify.exponent_tol",
    "verify.coefficient_tol",
    "output.dir",
];

pub fn parse_config(path: &Path) -> Result<Config, ConfigError> {
    let bytes = std::fs::read(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    let text = String::from_utf8(bytes).map_err(|_| ConfigError::Invalid(vec!["file is not UTF-8".into()]))?;
    parse_config_str(&text)
}

/// Parses configuration text; the hash covers exactly these bytes.
pub fn parse_config_str(text: &str) -> Result<Config, ConfigError> {
    let mut problems = Vec::new();
    let mut raw: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            problems.push(format!("line {lineno}: expected `key = value`"));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            problems.push(format!("line {lineno}: unknown key `{k}`"));
            continue;
        }
        if let Some((first, _)) = raw.insert(k, (lineno, v)) {
            problems.push(format!("line {lineno}: duplicate key `{k}` (first set on line {first})"));
        }
    }

    let mut p = Fields { raw: &raw, problems };
    let model = ModelConfig {
        n: p.int("model.N", 1, |v| v >= 1, "must be at least 1"),
        q: p.float("model.q", 1.0, |v| v > 0.0, "must be positive"),
        q_r2: p.float("model.q_r2", 0.0, |v| v >= 0.0, "must be non-negative"),
    };
    let mesh = MeshConfig {
        h: p.float("mesh.h", 0.05, |v| v > 0.0 && v < 0.5, "must lie in (0, 0.5)"),
        order: p.int("mesh.order", 2, |v| v == 1 || v == 2, "must be 1 or 2") as u32,
        slope: p.float("mesh.slope", 0.2, |v| v > 0.0 && v <= 1.0, "must lie in (0, 1]"),
        origin_factor: p.float("mesh.origin_factor", 0.05, |v| v > 0.0, "must be positive"),
        pole_factor: p.float("mesh.pole_factor", 0.005, |v| v > 0.0, "must be positive"),
        reference_origin_h: p.float("mesh.reference_origin_h", 0.005, |v| v > 0.0, "must be positive"),
    };
    let eig = EigConfig {
        tol: p.float("eig.tol", 1e-9, |v| v > 0.0, "must be positive"),
        max_iter: p.int("eig.max_iter", 500, |v| v >= 1, "must be at least 1"),
        block: p.int("eig.block", 0, |_| true, ""),
        gap_tol: p.float("eig.gap_tol", 0.05, |v| v > 0.0, "must be positive"),
        seed: p.int("eig.seed", 0x5eed, |_| true, "") as u64,
    };
    let crack = CrackConfig {
        ladder: p.list(
            "crack.ladder",
            &[8.0, 16.0, 32.0],
            |v| !v.is_empty() && v[0] >= 8.0 && v.windows(2).all(|w| w[1] > w[0]),
            "must be increasing radii, all at least 8",
        ),
        h_near: p.float("crack.h_near", 0.05, |v| v > 0.0, "must be positive"),
        tip_h: p.float("crack.tip_h", 0.002, |v| v > 0.0 && v <= 0.01, "must lie in (0, 0.01]"),
        richardson_order: p.float("crack.richardson_order", 2.0, |v| v > 0.0, "must be positive"),
        alpha_grid_deg: p.list(
            "crack.alpha_grid_deg",
            &linspace(-80.0, 80.0, 17),
            |v| !v.is_empty() && v.iter().all(|a| a.abs() <= 80.0),
            "angles must satisfy |alpha| <= 80 degrees",
        ),
    };
    let ray = RayConfig {
        directions_deg: p.list(
            "ray.directions_deg",
            &[0.0, 30.0, -30.0],
            |v| !v.is_empty() && v.iter().all(|a| a.abs() <= 80.0),
            "angles must satisfy |alpha| <= 80 degrees",
        ),
        t0: p.float("ray.t0", 0.2, |v| v > 0.0 && v <= 0.3, "must lie in (0, 0.3]"),
        ratio: p.float("ray.ratio", 0.7, |v| v > 0.0 && v <= 0.75, "must lie in (0, 0.75]"),
        samples: p.int("ray.samples", 8, |v| v >= 5, "must be at least 5"),
    };
    let verify = VerifyConfig {
        exponent_tol: p.opt_float("verify.exponent_tol"),
        coefficient_tol: p.opt_float("verify.coefficient_tol"),
    };
    let output_dir = p.raw.get("output.dir").map_or("out", |(_, v)| v).to_string();
    if crack.h_near <= crack.tip_h {
        p.problems.push("crack.h_near: must exceed crack.tip_h".into());
    }
    if p.problems.is_empty() {
        Ok(Config { model, mesh, eig, crack, ray, verify, output_dir, hash: sha256_hex(text.as_bytes()) })
    } else {
        Err(ConfigError::Invalid(p.problems))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `n` evenly spaced values from `a` to `b`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

struct Fields<'a> {
    raw: &'a BTreeMap<&'a str, (usize, &'a str)>,
    problems: Vec<String>,
}

impl Fields<'_> {
    fn bad(&mut self, key: &str, value: &str, what: impl fmt::Display) {
        self.problems.push(format!("{key} = `{value}`: {what}"));
    }

    fn float(&mut self, key: &str, default: f64, ok: impl Fn(f64) -> bool, msg: &str) -> f64 {
        let Some(&(_, v)) = self.raw.get(key) else {
            return default;
        };
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() && ok(x) => x,
            Ok(x) if x.is_finite() => {
                self.bad(key, v, msg);
                x
            }
            _ => {
                self.bad(key, v, "expected a finite number");
                default
            }
        }
    }

    fn opt_float(&mut self, key: &str) -> Option<f64> {
        self.raw.contains_key(key).then(|| self.float(key, 1.0, |v| v > 0.0, "must be positive"))
    }

    fn int(&mut self, key: &str, default: usize, ok: impl Fn(usize) -> bool, msg: &str) -> usize {
        let Some(&(_, v)) = self.raw.get(key) else {
            return default;
        };
        match v.parse::<usize>() {
            Ok(x) if ok(x) => x,
            Ok(x) => {
                self.bad(key, v, msg);
                x
            }
            Err(_) => {
                self.bad(key, v, "expected a non-negative integer");
                default
            }
        }
    }

    /// Comma-separated numbers, or `start:stop:count`.
    fn list(&mut self, key: &str, default: &[f64], ok: impl Fn(&[f64]) -> bool, msg: &str) -> Vec<f64> {
        let Some(&(_, v)) = self.raw.get(key) else {
            return default.to_vec();
        };
        let parsed: Option<Vec<f64>> = if let [a, b, n] = v.split(':').collect::<Vec<_>>()[..] {
            match (a.trim().parse::<f64>(), b.trim().parse::<f64>(), n.trim().parse::<usize>()) {
                (Ok(a), Ok(b), Ok(n)) if n >= 1 && a.is_finite() && b.is_finite() => Some(linspace(a, b, n)),
                _ => None,
            }
        } else {
            v.split(',').map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite())).collect()
        };
        match parsed {
            Some(list) if ok(&list) => list,
            Some(list) => {
                self.bad(key, v, msg);
                list
            }
            None => {
                self.bad(key, v, "expected comma-separated numbers or start:stop:count");
                default.to_vec()
            }
        }
    }
}
