use std::ops::{AddAssign, Mul};

use num_complex::Complex64;

/// Square band matrix. Row `i` stores columns `i - lower ..= i + upper`
/// contiguously, so a row slice is one cache line run for small bands.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T> {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<T>,
}

impl<T: Copy + Default + PartialEq> BandedMatrix<T> {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        BandedMatrix {
            n,
            lower,
            upper,
            data: vec![T::default(); n * (lower + upper + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    pub fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.lower >= i && j <= i + self.upper
    }

    /// Column range `[lo, hi)` of the stored part of row `i`.
    pub fn row_range(&self, i: usize) -> (usize, usize) {
        (
            i.saturating_sub(self.lower),
            (i + self.upper + 1).min(self.n),
        )
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.lower - i)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[self.offset(i, j)]
        } else {
            T::default()
        }
    }

    /// Panics outside the band: assembly never writes there.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.offset(i, j);
        self.data[k] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    /// Entries `(j, a_ij)` of row `i` inside the matrix.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let (lo, hi) = self.row_range(i);
        (lo..hi).map(move |j| (j, self.data[self.offset(i, j)]))
    }

    /// Replaces row `i` by the identity row.
    pub fn set_identity_row(&mut self, i: usize, one: T) {
        let (lo, hi) = self.row_range(i);
        for j in lo..hi {
            self.set(i, j, if j == i { one } else { T::default() });
        }
    }

    pub fn map<U: Copy + Default + PartialEq>(&self, f: impl Fn(T) -> U) -> BandedMatrix<U> {
        BandedMatrix {
            n: self.n,
            lower: self.lower,
            upper: self.upper,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

impl<T> BandedMatrix<T>
where
    T: Copy + Default + PartialEq + AddAssign + Mul<Output = T>,
{
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.offset(i, j);
        self.data[k] += v;
    }

    /// y = A x, summed left to right within each row.
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let w = self.width();
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = self.row_range(i);
            let base = i * w + self.lower - i;
            let mut s = T::default();
            for j in lo..hi {
                s += self.data[base + j] * x[j];
            }
            *yi = s;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::default(); self.n];
        self.matvec_into(x, &mut y);
        y
    }
}

impl BandedMatrix<f64> {
    /// Largest `|a_ij - a_ji| / max(|a_ij|, |a_ji|)` over the band.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, a) in self.row_entries(i) {
                let b = self.get(j, i);
                let m = a.abs().max(b.abs());
                if m > 0.0 {
                    worst = worst.max((a - b).abs() / m);
                }
            }
        }
        worst
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl BandedMatrix<Complex64> {
    pub fn real_part(&self) -> BandedMatrix<f64> {
        self.map(|z| z.re)
    }
}
