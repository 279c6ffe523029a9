use std::time::Instant;

use super::{relative_residual, Method, SolveReport};
use crate::assembly::{BandedMatrix, LinearSystem};
use crate::error::{FemError, Result};

/// Optional row equilibration before factoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowScaling {
    None,
    /// Each row divided by the sum of its absolute values, as sparse direct
    /// solvers do by default.
    #[default]
    Sum,
}

/// LU factors of a band matrix with partial pivoting.
///
/// Row `i` of the work array holds columns `i - kl ..= i + kl + ku`; row
/// interchanges can push fill at most `kl` columns beyond the original upper
/// band. Multipliers of step `k` are kept in `mult[k]` in their original row
/// order and the interchange is applied before them during the forward solve.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    u: Vec<f64>,
    mult: Vec<f64>,
    pivots: Vec<usize>,
    row_scale: Option<Vec<f64>>,
}

impl BandedLu {
    pub fn factor(a: &BandedMatrix<f64>, scaling: RowScaling) -> Result<Self> {
        let n = a.dim();
        let kl = a.lower();
        let ku = a.upper();
        let width = 2 * kl + ku + 1;
        let mut u = vec![0.0; n * width];
        let row_scale = match scaling {
            RowScaling::None => None,
            RowScaling::Sum => Some(
                (0..n)
                    .map(|i| {
                        let s: f64 = a.row(i).iter().map(|v| v.abs()).sum();
                        if s > 0.0 {
                            s
                        } else {
                            1.0
                        }
                    })
                    .collect::<Vec<f64>>(),
            ),
        };
        for i in 0..n {
            for (j, v) in a.row_entries(i) {
                u[i * width + j + kl - i] = match &row_scale {
                    Some(s) => v / s[i],
                    None => v,
                };
            }
        }
        let mut mult = vec![0.0; n * kl.max(1)];
        let mut pivots = vec![0; n];
        // (row, col) -> flat index; valid for col in [row - kl, row + kl + ku]
        let at = |i: usize, j: usize| i * width + j + kl - i;

        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = u[at(k, k)].abs();
            for i in k + 1..=last {
                let v = u[at(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if !(best >= f64::MIN_POSITIVE) {
                return Err(FemError::SingularPivot { index: k });
            }
            pivots[k] = piv;
            let jend = (k + kl + ku).min(n - 1);
            if piv != k {
                for j in k..=jend {
                    u.swap(at(k, j), at(piv, j));
                }
            }
            let d = u[at(k, k)];
            for i in k + 1..=last {
                let l = u[at(i, k)] / d;
                mult[k * kl + (i - k - 1)] = l;
                u[at(i, k)] = 0.0;
                if l != 0.0 {
                    let (ri, rk) = (at(i, k + 1), at(k, k + 1));
                    for t in 0..jend - k {
                        u[ri + t] -= l * u[rk + t];
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            width,
            u,
            mult,
            pivots,
            row_scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        if let Some(s) = &self.row_scale {
            for (bi, si) in b.iter_mut().zip(s) {
                *bi /= si;
            }
        }
        self.forward_in_place(b);
        let (n, kl, w) = (self.n, self.kl, self.width);
        let ku_total = w - kl - 1;
        for k in (0..n).rev() {
            let row = k * w + kl - k;
            let jend = (k + ku_total).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=jend {
                s -= self.u[row + j] * b[j];
            }
            b[k] = s / self.u[row + k];
        }
    }

    /// Applies `L^-1 P` (interchanges and multipliers, no row scaling).
    pub fn forward_in_place(&self, b: &mut [f64]) {
        let (n, kl) = (self.n, self.kl);
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                b[i] -= self.mult[k * kl + (i - k - 1)] * bk;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Row divisors applied before factoring, if any.
    pub fn row_scale(&self) -> Option<&[f64]> {
        self.row_scale.as_deref()
    }

    /// Row permutation applied to the factored matrix, as a list where entry
    /// `i` is the original row now at position `i`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.n).collect();
        for k in 0..self.n {
            perm.swap(k, self.pivots[k]);
        }
        perm
    }

    /// Entry `(i, j)` of `U`.
    pub fn u_entry(&self, i: usize, j: usize) -> f64 {
        if j < i || j > i + self.width - self.kl - 1 || j >= self.n {
            0.0
        } else {
            self.u[i * self.width + j + self.kl - i]
        }
    }
}

pub fn lu_banded_solve(system: &LinearSystem) -> Result<SolveReport> {
    let start = Instant::now();
    let lu = BandedLu::factor(&system.matrix, RowScaling::Sum)?;
    let solution = lu.solve(&system.rhs);
    let wall_time = start.elapsed();
    Ok(SolveReport {
        relative_residual: relative_residual(system, &solution),
        solution,
        method: Method::Lu,
        iterations: 0,
        wall_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_dense(d: &[Vec<f64>], kl: usize, ku: usize) -> BandedMatrix<f64> {
        let n = d.len();
        let mut a = BandedMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in 0..n {
                if a.in_band(i, j) {
                    a.set(i, j, d[i][j]);
                } else {
                    assert_eq!(d[i][j], 0.0);
                }
            }
        }
        a
    }

    #[test]
    fn identity_is_exact() {
        let mut a = BandedMatrix::zeros(5, 1, 1);
        for i in 0..5 {
            a.set(i, i, 1.0);
        }
        let b = vec![0.1, -3.0, 1e300, 7.5, -0.0];
        assert_eq!(BandedLu::factor(&a, RowScaling::Sum).unwrap().solve(&b), b);
    }

    #[test]
    fn two_by_two_cramer() {
        let a = from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]], 1, 1);
        let x = BandedLu::factor(&a, RowScaling::Sum)
            .unwrap()
            .solve(&[3.0, 5.0]);
        // Cramer: det 5, x0 = (9 - 5) / 5, x1 = (10 - 3) / 5
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn pivoting_needed() {
        let a = from_dense(
            &[
                vec![0.0, 1.0, 0.0],
                vec![2.0, 0.0, 1.0],
                vec![0.0, 4.0, 1.0],
            ],
            1,
            1,
        );
        let lu = BandedLu::factor(&a, RowScaling::Sum).unwrap();
        let x = lu.solve(&[1.0, 3.0, 5.0]);
        assert!((x[0] - 1.0).abs() < 1e-15);
        assert!((x[1] - 1.0).abs() < 1e-15);
        assert!((x[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_reports_index() {
        let a = from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]], 1, 1);
        assert!(matches!(
            BandedLu::factor(&a, RowScaling::None),
            Err(FemError::SingularPivot { index: 1 })
        ));
    }
}
