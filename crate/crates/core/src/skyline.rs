//! Profile ("skyline") Cholesky factorization for symmetric positive
//! definite matrices.
//!
//! Row `i` stores the lower-triangular entries from its first structural
//! nonzero column up to the diagonal. Cholesky fill never leaves the
//! profile, so a periodic block-banded matrix costs a band plus a few dense
//! trailing rows (the wrap-around blocks).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SkylineCholesky {
    first: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineCholesky {
    /// Factors the matrix given by its lower-triangular entries `(row, col, value)`
    /// with `col <= row`. Duplicate entries are summed.
    pub fn factor(n: usize, lower: &[(usize, usize, f64)]) -> Result<Self> {
        let mut first: Vec<usize> = (0..n).collect();
        for &(i, j, _) in lower {
            debug_assert!(j <= i && i < n);
            first[i] = first[i].min(j);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i] + 1));
        }
        let mut values = vec![0.0; offsets[n]];
        for &(i, j, v) in lower {
            values[offsets[i] + (j - first[i])] += v;
        }
        let mut out = Self { first, offsets, values };
        out.factor_in_place()?;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Number of stored entries.
    pub fn profile_len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.values[self.offsets[i]..self.offsets[i + 1]]
    }

    fn factor_in_place(&mut self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            for j in fi..=i {
                let fj = self.first[j];
                let start = fi.max(fj);
                let mut s = self.values[self.offsets[i] + (j - fi)];
                let (ri, rj) = (self.offsets[i], self.offsets[j]);
                for k in start..j {
                    s -= self.values[ri + (k - fi)] * self.values[rj + (k - fj)];
                }
                if j < i {
                    s /= self.values[rj + (j - fj)];
                } else {
                    if !(s > 0.0) {
                        return Err(Error::Factorization { pivot: i, value: s });
                    }
                    s = s.sqrt();
                }
                self.values[ri + (j - fi)] = s;
            }
        }
        Ok(())
    }

    /// Solves `L Lᵀ x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for i in 0..n {
            let fi = self.first[i];
            let row = self.row(i);
            let mut s = b[i];
            for (k, &l) in row[..row.len() - 1].iter().enumerate() {
                s -= l * b[fi + k];
            }
            b[i] = s / row[row.len() - 1];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = self.row(i);
            b[i] /= row[row.len() - 1];
            let xi = b[i];
            for (k, &l) in row[..row.len() - 1].iter().enumerate() {
                b[fi + k] -= l * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic_tridiag(n: usize) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = 4.0;
            a[i][(i + 1) % n] = -1.0;
            a[(i + 1) % n][i] = -1.0;
        }
        a
    }

    #[test]
    fn solves_periodic_system() {
        let n = 9;
        let a = periodic_tridiag(n);
        let lower: Vec<_> = (0..n)
            .flat_map(|i| (0..=i).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0.0)
            .map(|(i, j)| (i, j, a[i][j]))
            .collect();
        let f = SkylineCholesky::factor(n, &lower).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * x_true[j]).sum()).collect();
        f.solve_in_place(&mut b);
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-14);
        }
        // band rows plus one dense trailing row
        assert!(f.profile_len() < n * (n + 1) / 2);
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let lower = vec![(0, 0, 1.0), (1, 0, 2.0), (1, 1, 1.0)];
        assert!(matches!(
            SkylineCholesky::factor(2, &lower),
            Err(Error::Factorization { pivot: 1, .. })
        ));
    }
}
