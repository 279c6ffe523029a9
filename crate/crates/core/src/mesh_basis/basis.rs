use super::quadrature::{legendre, legendre_roots};
use crate::error::{FemError, Result};

pub const MAX_DEGREE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuity {
    /// C0 Lagrange elements, P_p.
    Continuous,
    /// Cell-wise discontinuous Lagrange elements, P_{p-1}^disc.
    Discontinuous,
}

/// Gauss-Lobatto support points of degree `p` on [0, 1] (p + 1 nodes).
///
/// Interior nodes are the roots of P_p'. Newton iteration is seeded with
/// Chebyshev-Lobatto points; if it leaves the bracket formed by the
/// neighbouring Gauss points it falls back to bisection.
pub fn gauss_lobatto_nodes(p: usize) -> Result<Vec<f64>> {
    if !(1..=MAX_DEGREE).contains(&p) {
        return Err(FemError::arg(format!(
            "Gauss-Lobatto degree {p} outside 1..={MAX_DEGREE}"
        )));
    }
    let mut t = vec![0.0; p + 1];
    t[0] = -1.0;
    t[p] = 1.0;
    if p >= 2 {
        // roots of P_p interlace the interior Lobatto nodes
        let gauss = legendre_roots(p);
        let dp = |x: f64| legendre(p, x).1;
        for k in 1..p {
            let (lo, hi) = (gauss[k - 1], gauss[k]);
            let mut x = -(std::f64::consts::PI * k as f64 / p as f64).cos();
            let mut converged = false;
            for _ in 0..50 {
                let (pv, dpv) = legendre(p, x);
                let d2 = (2.0 * x * dpv - (p * (p + 1)) as f64 * pv) / (1.0 - x * x);
                let step = dpv / d2;
                x -= step;
                if !(lo < x && x < hi) {
                    break;
                }
                if step.abs() < 1e-15 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                x = bisect(dp, lo, hi);
            }
            t[k] = x;
        }
    }
    let mut nodes: Vec<f64> = t.iter().map(|&ti| 0.5 * (ti + 1.0)).collect();
    for i in 0..(p + 1) / 2 {
        let j = p - i;
        let x = 0.5 * (nodes[i] + (1.0 - nodes[j]));
        nodes[i] = x;
        nodes[j] = 1.0 - x;
    }
    if p % 2 == 0 {
        nodes[p / 2] = 0.5;
    }
    nodes[0] = 0.0;
    nodes[p] = 1.0;
    Ok(nodes)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lagrange basis on the reference cell with Gauss-Lobatto support points.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    degree: usize,
    support_points: Vec<f64>,
    continuity: Continuity,
    // 1 / prod_{j != i} (x_i - x_j)
    denominators: Vec<f64>,
}

impl LagrangeBasis {
    /// Continuous P_p basis.
    pub fn continuous(p: usize) -> Result<Self> {
        Ok(Self::from_points(
            p,
            gauss_lobatto_nodes(p)?,
            Continuity::Continuous,
        ))
    }

    /// Discontinuous basis of the given degree (0 gives the cell constant,
    /// supported at the midpoint).
    pub fn discontinuous(degree: usize) -> Result<Self> {
        let pts = if degree == 0 {
            vec![0.5]
        } else {
            gauss_lobatto_nodes(degree)?
        };
        Ok(Self::from_points(degree, pts, Continuity::Discontinuous))
    }

    fn from_points(degree: usize, support_points: Vec<f64>, continuity: Continuity) -> Self {
        let denominators = (0..support_points.len())
            .map(|i| {
                let xi = support_points[i];
                let prod: f64 = support_points
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &xj)| xi - xj)
                    .product();
                1.0 / prod
            })
            .collect();
        LagrangeBasis {
            degree,
            support_points,
            continuity,
            denominators,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.support_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support_points.is_empty()
    }

    pub fn support_points(&self) -> &[f64] {
        &self.support_points
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    /// Values and first derivatives (reference coordinates) at `x`.
    pub fn eval(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        (self.eval_derivative(0, x), self.eval_derivative(1, x))
    }

    /// `order`-th reference derivative of every basis function at `x`.
    pub fn eval_derivative(&self, order: usize, x: f64) -> Vec<f64> {
        let n = self.len();
        let d: Vec<f64> = self.support_points.iter().map(|&xj| x - xj).collect();
        (0..n)
            .map(|i| {
                let others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d[j]).collect();
                elementary_derivative(&others, order) * self.denominators[i]
            })
            .collect()
    }

    /// Tabulates values and the first two derivatives at fixed points.
    pub fn tabulate(&self, points: &[f64]) -> BasisTable {
        let n = self.len();
        let mut table = BasisTable {
            n_basis: n,
            values: Vec::with_capacity(points.len() * n),
            first: Vec::with_capacity(points.len() * n),
            second: Vec::with_capacity(points.len() * n),
        };
        for &x in points {
            table.values.extend(self.eval_derivative(0, x));
            table.first.extend(self.eval_derivative(1, x));
            table.second.extend(self.eval_derivative(2, x));
        }
        table
    }
}

/// k-th derivative of prod_j (x - x_j), given the factors (x - x_j).
///
/// Equals k! times the sum over all size-k subsets of the product of the
/// remaining factors.
fn elementary_derivative(factors: &[f64], order: usize) -> f64 {
    match order {
        0 => factors.iter().product(),
        1 => (0..factors.len())
            .map(|k| {
                factors
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &f)| f)
                    .product::<f64>()
            })
            .sum(),
        2 => {
            let m = factors.len();
            let mut s = 0.0;
            for k in 0..m {
                for l in (k + 1)..m {
                    let prod: f64 = factors
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != k && j != l)
                        .map(|(_, &f)| f)
                        .product();
                    s += prod;
                }
            }
            2.0 * s
        }
        _ => unimplemented!("derivatives above second order are not used"),
    }
}

/// Basis data tabulated at a fixed list of reference points, laid out
/// point-major: entry `(q, i)` sits at `q * n_basis + i`.
#[derive(Debug, Clone)]
pub struct BasisTable {
    n_basis: usize,
    values: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl BasisTable {
    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    #[inline]
    pub fn row(&self, order: usize, q: usize) -> &[f64] {
        let r = q * self.n_basis..(q + 1) * self.n_basis;
        match order {
            0 => &self.values[r],
            1 => &self.first[r],
            2 => &self.second[r],
            _ => panic!("derivative order {order} not tabulated"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_basis::gauss_legendre_rule;

    fn bisection_oracle(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(m) < 0.0) == (f(a) < 0.0) {
                a = m
            } else {
                b = m
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn low_degree_nodes() {
        assert_eq!(gauss_lobatto_nodes(1).unwrap(), vec![0.0, 1.0]);
        assert_eq!(gauss_lobatto_nodes(2).unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn cubic_nodes_match_bisection_oracle() {
        // P3'(t) = (15 t^2 - 3) / 2, mapped to [0, 1]
        let dp3 = |x: f64| {
            let t = 2.0 * x - 1.0;
            7.5 * t * t - 1.5
        };
        let r1 = bisection_oracle(dp3, 0.01, 0.49);
        let r2 = bisection_oracle(dp3, 0.51, 0.99);
        let n = gauss_lobatto_nodes(3).unwrap();
        assert!((n[1] - r1).abs() < 1e-14);
        assert!((n[2] - r2).abs() < 1e-14);
        assert!((n[1] - 0.276_393_202_250_021).abs() < 1e-14);
        assert!((n[2] - 0.723_606_797_749_979).abs() < 1e-14);
    }

    #[test]
    fn nodes_increasing_and_symmetric() {
        for p in 1..=MAX_DEGREE {
            let n = gauss_lobatto_nodes(p).unwrap();
            assert_eq!(n.len(), p + 1);
            assert!(n.windows(2).all(|w| w[0] < w[1]), "p = {p}");
            for i in 0..=p {
                assert!((n[i] + n[p - i] - 1.0).abs() < 1e-14);
            }
            // interior nodes are stationary points of P_p
            for &x in &n[1..p] {
                let (_, dp) = legendre(p, 2.0 * x - 1.0);
                assert!(dp.abs() < 1e-10 * (p * p) as f64, "p = {p}, P' = {dp}");
            }
        }
    }

    #[test]
    fn degree_out_of_range() {
        assert!(gauss_lobatto_nodes(0).is_err());
        assert!(gauss_lobatto_nodes(21).is_err());
    }

    #[test]
    fn linear_hats() {
        let b = LagrangeBasis::continuous(1).unwrap();
        let (v, d) = b.eval(0.25);
        assert_eq!(v, vec![0.75, 0.25]);
        assert_eq!(d, vec![-1.0, 1.0]);
    }

    #[test]
    fn kronecker_delta() {
        for p in 1..=MAX_DEGREE {
            let b = LagrangeBasis::continuous(p).unwrap();
            for (j, &xj) in b.support_points().iter().enumerate() {
                let v = b.eval_derivative(0, xj);
                for (i, vi) in v.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((vi - expected).abs() < 1e-13, "p={p} i={i} j={j}: {vi}");
                }
            }
        }
    }

    #[test]
    fn cubic_derivatives_sum_to_zero_at_midpoint() {
        let b = LagrangeBasis::continuous(3).unwrap();
        let s: f64 = b.eval(0.5).1.iter().sum();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn partition_of_unity_at_quadrature_points() {
        for p in 1..=MAX_DEGREE {
            let b = LagrangeBasis::continuous(p).unwrap();
            let rule = gauss_legendre_rule((p + 4).min(32)).unwrap();
            for &x in rule.points() {
                let s0: f64 = b.eval_derivative(0, x).iter().sum();
                let s1: f64 = b.eval_derivative(1, x).iter().sum();
                assert!((s0 - 1.0).abs() < 1e-13, "p={p}: {s0}");
                assert!(s1.abs() < 1e-10, "p={p}: {s1}");
            }
        }
    }

    #[test]
    fn second_derivative_of_quadratic_basis() {
        // nodes 0, 1/2, 1: phi_0 = 2(x-1/2)(x-1), phi_0'' = 4
        let b = LagrangeBasis::continuous(2).unwrap();
        let d2 = b.eval_derivative(2, 0.3);
        assert!((d2[0] - 4.0).abs() < 1e-13);
        assert!((d2[1] + 8.0).abs() < 1e-13);
        assert!((d2[2] - 4.0).abs() < 1e-13);
    }

    #[test]
    fn discontinuous_constant() {
        let b = LagrangeBasis::discontinuous(0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.eval_derivative(0, 0.9), vec![1.0]);
        assert_eq!(b.eval_derivative(1, 0.9), vec![0.0]);
        assert_eq!(b.continuity(), Continuity::Discontinuous);
    }

    #[test]
    fn tabulate_layout() {
        let b = LagrangeBasis::continuous(2).unwrap();
        let t = b.tabulate(&[0.0, 0.5]);
        assert_eq!(t.row(0, 0), &[1.0, 0.0, 0.0]);
        assert_eq!(t.row(0, 1), &[0.0, 1.0, 0.0]);
        assert_eq!(t.n_basis(), 3);
    }
}
