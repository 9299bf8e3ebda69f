//! Quadrature rules: triangle rules in barycentric form and Gauss-Legendre.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// A triangle rule: barycentric points and weights summing to one.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Symmetric 6-point rule, exact for polynomials of degree 4.
    pub fn degree4() -> Self {
        let a1 = 0.445_948_490_915_964_886_32;
        let w1 = 0.223_381_589_678_011_465_70;
        let a2 = 0.091_576_213_509_770_743_460;
        let w2 = 0.109_951_743_655_321_867_64;
        let mut rule = TriangleRule { points: Vec::with_capacity(6), weights: Vec::with_capacity(6) };
        rule.push_orbit(a1, w1);
        rule.push_orbit(a2, w2);
        rule
    }

    /// 7-point rule, exact for polynomials of degree 5.
    pub fn degree5() -> Self {
        let s15 = libm::sqrt(15.0);
        let mut rule = TriangleRule { points: alloc::vec![[1.0 / 3.0; 3]], weights: alloc::vec![9.0 / 40.0] };
        rule.push_orbit((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
        rule.push_orbit((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
        rule
    }

    fn push_orbit(&mut self, a: f64, w: f64) {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a, b], [a, b, a], [b, a, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` equal panels of `order` points.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    let h = (b - a) / panels as f64;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Composite rule on `[a, b]` with an extra panel break at each of `breaks` inside the interval.
pub fn composite_gauss_with_breaks(
    a: f64,
    b: f64,
    breaks: &[f64],
    total_points: usize,
    order: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    cuts.sort_by(f64::total_cmp);
    let mut ends = alloc::vec![a];
    ends.extend(cuts);
    ends.push(b);
    let total_panels = total_points.div_ceil(order).max(ends.len() - 1);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for win in ends.windows(2) {
        let share = ((win[1] - win[0]) / (b - a) * total_panels as f64).round().max(1.0) as usize;
        let (n, w) = composite_gauss(win[0], win[1], share, order);
        nodes.extend(n);
        weights.extend(w);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_monomial(rule: &TriangleRule, i: i32, j: i32) -> f64 {
        // reference triangle (0,0), (1,0), (0,1); area 1/2
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(l, w)| 0.5 * w * libm::pow(l[1], i as f64) * libm::pow(l[2], j as f64))
            .sum()
    }

    fn factorial(n: i32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn triangle_rules_are_exact_to_their_degree() {
        for (rule, deg) in [(TriangleRule::degree4(), 4), (TriangleRule::degree5(), 5)] {
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 1.0).abs() < 1e-14);
            for i in 0..=deg {
                for j in 0..=(deg - i) {
                    // ∫ x^i y^j over the reference triangle = i! j! / (i+j+2)!
                    let exact = factorial(i) * factorial(j) / factorial(i + j + 2);
                    let got = integrate_monomial(&rule, i, j);
                    assert!((got - exact).abs() < 1e-14, "deg {deg}: x^{i} y^{j}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for k in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * libm::pow(*xi, k as f64)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn breaks_are_panel_ends() {
        let (x, w) = composite_gauss_with_breaks(-1.0, 1.0, &[0.25], 64, 4);
        assert!(x.iter().all(|&v| v != 0.25));
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }
}
