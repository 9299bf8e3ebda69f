//! Almgren-type quantities on half-disks: boundary mass `H`, local energy `E`,
//! frequency `𝒩 = E/H`, the log-derivative identity, vanishing order and
//! leading coefficient at the origin, and blow-up comparisons.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
pub use crate::field::{AnalyticField, DiskIntegrals, FeField, Field};
use crate::geometry::{Direction, Point};

fn check_radius(field: &dyn Field, r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(Error::invalid(alloc::format!("radius must be positive, got {r}")));
    }
    if r > field.domain_radius() * (1.0 + 1e-12) {
        return Err(Error::RadiusTooLarge { radius: r, mesh_radius: field.domain_radius() });
    }
    Ok(())
}

/// `H(u, r) = (1/r) ∫_{∂D_r⁺} u² ds`.
pub fn boundary_average_h(field: &dyn Field, r: f64) -> Result<f64> {
    check_radius(field, r)?;
    field.arc_integral(r, &|v, _| v * v)
}

/// `E(u, r, λ) = ∫_{D_r⁺} |∇u|² − λ q u²`.
pub fn energy_e(field: &dyn Field, r: f64, lambda: f64, q: &dyn Fn(Point) -> f64) -> Result<f64> {
    check_radius(field, r)?;
    let d = field.integrate_disk(r, q);
    Ok(d.gradient - lambda * d.weighted_square)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyProfile {
    pub radii: Vec<f64>,
    pub h: Vec<f64>,
    pub e: Vec<f64>,
    pub n: Vec<f64>,
}

/// `𝒩(r) = E/H` at each radius.
pub fn frequency_profile(
    field: &dyn Field,
    lambda: f64,
    q: &dyn Fn(Point) -> f64,
    radii: &[f64],
) -> Result<FrequencyProfile> {
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("radii must be strictly increasing"));
    }
    let mut out = FrequencyProfile {
        radii: radii.to_vec(),
        h: Vec::with_capacity(radii.len()),
        e: Vec::with_capacity(radii.len()),
        n: Vec::with_capacity(radii.len()),
    };
    for &r in radii {
        let h = boundary_average_h(field, r)?;
        if !(h > 0.0) {
            return Err(Error::NonPositiveMass { radius: r, value: h });
        }
        let e = energy_e(field, r, lambda, q)?;
        out.h.push(h);
        out.e.push(e);
        out.n.push(e / h);
    }
    Ok(out)
}

/// Finite-difference stencil for `d/dr log H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    /// 3-point centred difference, `O(Δr²)`.
    Second,
    /// 5-point centred difference, `O(Δr⁴)`.
    Fourth,
}

/// Maximum over interior radii of `|d/dr log H − 2𝒩/r|`.
pub fn logh_derivative_check(
    field: &dyn Field,
    lambda: f64,
    q: &dyn Fn(Point) -> f64,
    radii: &[f64],
    stencil: Stencil,
) -> Result<f64> {
    let half = match stencil {
        Stencil::Second => 1,
        Stencil::Fourth => 2,
    };
    if radii.len() < 2 * half + 1 {
        return Err(Error::invalid(alloc::format!("log-derivative check needs at least {} radii", 2 * half + 1)));
    }
    let dr = radii[1] - radii[0];
    if radii.windows(2).any(|w| ((w[1] - w[0]) - dr).abs() > 1e-9 * dr) || !(dr > 0.0) {
        return Err(Error::invalid("radii must be uniformly spaced and increasing"));
    }
    let mut log_h = Vec::with_capacity(radii.len());
    for &r in radii {
        let h = boundary_average_h(field, r)?;
        if !(h > 0.0) {
            return Err(Error::NonPositiveMass { radius: r, value: h });
        }
        log_h.push(libm::log(h));
    }
    let mut worst: f64 = 0.0;
    for i in half..radii.len() - half {
        let d = match stencil {
            Stencil::Second => (log_h[i + 1] - log_h[i - 1]) / (2.0 * dr),
            Stencil::Fourth => (-log_h[i + 2] + 8.0 * log_h[i + 1] - 8.0 * log_h[i - 1] + log_h[i - 2]) / (12.0 * dr),
        };
        let r = radii[i];
        let n = energy_e(field, r, lambda, q)? / libm::exp(log_h[i]);
        worst = worst.max((d - 2.0 * n / r).abs());
    }
    Ok(worst)
}

/// `b_j(r) = (2/π) ∫ u(r cos t, r sin t) sin(j(π/2 − t)) dt`.
pub fn fourier_coefficient(field: &dyn Field, j: u32, r: f64) -> Result<f64> {
    check_radius(field, r)?;
    let jf = j as f64;
    Ok(2.0 / PI * field.arc_integral(r, &|v, t| v * libm::sin(jf * (FRAC_PI_2 - t)))?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VanishingOrderFit {
    pub j: u32,
    pub beta: f64,
    pub window: (f64, f64),
    /// Relative least-squares residual of `b_j(r)/r^j ≈ β + γ r²`.
    pub residual: f64,
    /// Residual and amplitude for every candidate order.
    pub candidates: Vec<(u32, f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VanishingOrderOptions {
    pub window: (f64, f64),
    pub samples: usize,
    pub max_j: u32,
    pub threshold: f64,
    /// Candidates whose coefficient amplitude is below this fraction of the
    /// largest one are treated as absent harmonics.
    pub min_relative_amplitude: f64,
}

impl Default for VanishingOrderOptions {
    fn default() -> Self {
        VanishingOrderOptions {
            window: (0.05, 0.25),
            samples: 9,
            max_j: 6,
            threshold: 1e-2,
            min_relative_amplitude: 1e-3,
        }
    }
}

/// Vanishing order at the origin and the leading coefficient `β` in
/// `u ≈ β r^j sin(j(π/2 − t))`.
///
/// The order is the lowest harmonic that is present (non-negligible
/// amplitude) and well described by `β r^j (1 + O(r²))`.
pub fn vanishing_order_and_beta(
    field: &dyn Field,
    j_hint: Option<u32>,
    opts: &VanishingOrderOptions,
) -> Result<VanishingOrderFit> {
    let (r0, r1) = opts.window;
    if !(r0 > 0.0 && r1 > r0) || opts.samples < 3 {
        return Err(Error::invalid("vanishing-order window must satisfy 0 < r_min < r_max with 3+ samples"));
    }
    let radii: Vec<f64> = (0..opts.samples).map(|i| r0 + (r1 - r0) * i as f64 / (opts.samples - 1) as f64).collect();
    let candidates: Vec<u32> = match j_hint {
        Some(j) => alloc::vec![j],
        None => (1..=opts.max_j).collect(),
    };
    let mut fits = Vec::new();
    for &j in &candidates {
        let mut y = Vec::with_capacity(radii.len());
        let mut amp: f64 = 0.0;
        for &r in &radii {
            let b = fourier_coefficient(field, j, r)?;
            amp = amp.max(b.abs());
            y.push(b / libm::pow(r, j as f64));
        }
        let (beta, gamma) = linear_fit(&radii.iter().map(|r| r * r).collect::<Vec<_>>(), &y);
        let num: f64 = radii
            .iter()
            .zip(&y)
            .map(|(r, yi)| {
                let m = beta + gamma * r * r;
                (m - yi) * (m - yi)
            })
            .sum();
        let den: f64 = y.iter().map(|v| v * v).sum();
        let residual = if den > 0.0 { libm::sqrt(num / den) } else { f64::INFINITY };
        fits.push((j, residual, amp, beta));
    }
    let max_amp = fits.iter().map(|f| f.2).fold(0.0, f64::max);
    let chosen =
        fits.iter().find(|f| f.2 > 0.0 && f.2 >= opts.min_relative_amplitude * max_amp && f.1 <= opts.threshold);
    match chosen {
        Some(&(j, residual, _, beta)) => Ok(VanishingOrderFit {
            j,
            beta,
            window: opts.window,
            residual,
            candidates: fits.iter().map(|f| (f.0, f.1, f.2)).collect(),
        }),
        None => Err(Error::NoVanishingOrder { max_j: *candidates.last().unwrap() as usize, threshold: opts.threshold }),
    }
}

/// Least-squares line `y ≈ a + b x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Points of the spacing-`s` lattice in `D₂⁺` that stay at least `s` away from
/// the half-line `{λp : λ ≥ 0}`.
pub fn blowup_grid(direction: &Direction, spacing: f64) -> Vec<Point> {
    let p = direction.unit();
    let n = (2.0 / spacing).ceil() as i64;
    let mut pts = Vec::new();
    for i in 1..=n {
        for k in -n..=n {
            let x = Point::new(i as f64 * spacing, k as f64 * spacing);
            if x.norm() >= 2.0 - 1e-12 {
                continue;
            }
            let along = x.dot(p);
            let dist = if along > 0.0 { x.cross(p).abs() } else { x.norm() };
            if dist < spacing {
                continue;
            }
            pts.push(x);
        }
    }
    pts
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupComparison {
    /// `sup | |u(t·x)|/(|β| t^j) − |L(x)| |` over the grid.
    pub distance: f64,
    /// `sup |L(x)|` over the grid.
    pub limit_sup: f64,
    pub points: usize,
}

/// Compares the rescaled modulus of `pole_field` with the modulus of `limit`
/// on [`blowup_grid`].
pub fn blowup_modulus_compare(
    pole_field: &dyn Field,
    t: f64,
    j: u32,
    beta_abs: f64,
    limit: &dyn Field,
    direction: &Direction,
    spacing: f64,
) -> Result<BlowupComparison> {
    if !(t > 0.0 && beta_abs > 0.0) {
        return Err(Error::invalid("blow-up scale and |beta| must be positive"));
    }
    let scale = beta_abs * libm::pow(t, j as f64);
    let grid = blowup_grid(direction, spacing);
    let mut distance: f64 = 0.0;
    let mut limit_sup: f64 = 0.0;
    for &x in &grid {
        let u = pole_field.value(t * x).ok_or(Error::Outside(t * x))?;
        let l = limit.value(x).ok_or(Error::Outside(x))?;
        distance = distance.max((u.abs() / scale - l.abs()).abs());
        limit_sup = limit_sup.max(l.abs());
    }
    Ok(BlowupComparison { distance, limit_sup, points: grid.len() })
}
