use num_complex::Complex64;

use super::BandedMatrix;

#[derive(Debug, Clone)]
pub struct ComplexSystem {
    pub matrix: BandedMatrix<Complex64>,
    pub rhs: Vec<Complex64>,
}

impl ComplexSystem {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        ComplexSystem {
            matrix: BandedMatrix::zeros(n, lower, upper),
            rhs: vec![Complex64::default(); n],
        }
    }
}

/// Real form of a complex system: `a + bi` becomes `[[a, -b], [b, a]]` on the
/// unknown pair `(Re, Im)`.
pub fn split_complex(sys: &ComplexSystem) -> (BandedMatrix<f64>, Vec<f64>) {
    let a = &sys.matrix;
    let n = a.dim();
    let mut out = BandedMatrix::zeros(2 * n, 2 * a.lower() + 1, 2 * a.upper() + 1);
    for i in 0..n {
        for (j, z) in a.row_entries(i) {
            out.set(2 * i, 2 * j, z.re);
            out.set(2 * i, 2 * j + 1, -z.im);
            out.set(2 * i + 1, 2 * j, z.im);
            out.set(2 * i + 1, 2 * j + 1, z.re);
        }
    }
    let rhs = sys.rhs.iter().flat_map(|z| [z.re, z.im]).collect();
    (out, rhs)
}

/// Inverse of the unknown layout used by [`split_complex`].
pub fn recombine(x: &[f64]) -> Vec<Complex64> {
    assert!(x.len() % 2 == 0);
    x.chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect()
}
