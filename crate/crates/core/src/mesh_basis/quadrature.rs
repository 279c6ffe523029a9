use crate::error::{FemError, Result};

pub const MAX_POINTS: usize = 32;

/// Gauss-Legendre rule on the reference cell [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    /// Integral of `f` over [0, 1].
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Legendre polynomial value and derivative at `t` in [-1, 1].
pub(crate) fn legendre(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, t);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * t * p - kf * p_prev) / (kf + 1.0);
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// Roots of the degree-`n` Legendre polynomial on [-1, 1], ascending.
pub(crate) fn legendre_roots(n: usize) -> Vec<f64> {
    let mut roots = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // descending seed: cos(pi (i + 3/4) / (n + 1/2))
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let step = p / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        roots[n - 1 - i] = t;
        roots[i] = -t;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.0;
    }
    roots
}

pub fn gauss_legendre_rule(n_q: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_POINTS).contains(&n_q) {
        return Err(FemError::arg(format!(
            "quadrature point count {n_q} outside 1..={MAX_POINTS}"
        )));
    }
    let roots = legendre_roots(n_q);
    let mut points = Vec::with_capacity(n_q);
    let mut weights = Vec::with_capacity(n_q);
    for &t in &roots {
        let (_, dp) = legendre(n_q, t);
        points.push(0.5 * (t + 1.0));
        // 2 / ((1 - t^2) P'(t)^2) on [-1, 1], halved for [0, 1]
        weights.push(1.0 / ((1.0 - t * t) * dp * dp));
    }
    // mirror so the rule is exactly symmetric about 1/2
    for i in 0..n_q / 2 {
        let j = n_q - 1 - i;
        let x = 0.5 * (points[i] + (1.0 - points[j]));
        points[i] = x;
        points[j] = 1.0 - x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if n_q % 2 == 1 {
        points[n_q / 2] = 0.5;
    }
    Ok(QuadratureRule { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_rule() {
        let r = gauss_legendre_rule(1).unwrap();
        assert_eq!(r.points(), &[0.5]);
        assert_eq!(r.weights(), &[1.0]);
        assert_eq!(r.integrate(|x| x), 0.5);
    }

    #[test]
    fn two_and_three_point_exactness() {
        let r = gauss_legendre_rule(2).unwrap();
        assert!((r.integrate(|x| x.powi(3)) - 0.25).abs() <= 1e-15);
        let r = gauss_legendre_rule(3).unwrap();
        // antiderivative x^6 / 6 evaluated on [0, 1]
        assert!((r.integrate(|x| x.powi(5)) - 1.0 / 6.0).abs() <= 1e-15);
    }

    #[test]
    fn weights_positive_and_sum_to_one() {
        for n in 1..=MAX_POINTS {
            let r = gauss_legendre_rule(n).unwrap();
            assert!(r.weights().iter().all(|&w| w > 0.0));
            let s: f64 = r.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "n = {n}: sum = {s}");
            assert!(r.points().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn exact_for_all_monomials_up_to_2n_minus_1() {
        for n in 1..=MAX_POINTS {
            let r = gauss_legendre_rule(n).unwrap();
            for k in 0..2 * n {
                let exact = 1.0 / (k as f64 + 1.0);
                let got = r.integrate(|x| x.powi(k as i32));
                assert!(
                    ((got - exact) / exact).abs() < 1e-14,
                    "n = {n}, k = {k}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn out_of_range() {
        assert!(gauss_legendre_rule(0).is_err());
        assert!(gauss_legendre_rule(33).is_err());
    }
}
