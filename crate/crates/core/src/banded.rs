//! Banded LU with partial pivoting (LAPACK gbtrf-style storage).
//!
//! The implicit part of the perturbation stepper is a 7-diagonal matrix,
//! factored once and reused every step.

/// Band matrix with `kl` subdiagonals and `ku` superdiagonals.
///
/// Storage has `2*kl + ku + 1` diagonal rows: entry (i, j) lives at row
/// `kl + ku + i - j`, column j. The extra `kl` top rows hold the fill-in
/// produced by row pivoting, so the same index formula covers the
/// factored form (which has up to `kl + ku` superdiagonals).
pub struct BandedMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; (2 * kl + ku + 1) * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j + self.kl && j <= i + self.kl + self.ku);
        (self.kl + self.ku + i - j) * self.n + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// LU factorization with partial pivoting. Consumes the matrix.
    pub fn factor(mut self) -> BandedLu {
        let n = self.n;
        let kl = self.kl;
        let kv = kl + self.ku; // superdiagonal count in the factored form
        let mut ipiv = vec![0usize; n];

        for j in 0..n {
            let jmax = (j + kl).min(n - 1);
            let mut p = j;
            let mut pmax = self.get(j, j).abs();
            for i in j + 1..=jmax {
                let v = self.get(i, j).abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            ipiv[j] = p;
            if p != j {
                let cmax = (j + kv).min(n - 1);
                for c in j..=cmax {
                    let a = self.get(j, c);
                    let b = self.get(p, c);
                    self.set(j, c, b);
                    self.set(p, c, a);
                }
            }
            let d = self.get(j, j);
            assert!(d != 0.0, "singular banded matrix at column {j}");
            for i in j + 1..=jmax {
                let m = self.get(i, j) / d;
                self.set(i, j, m);
                let cmax = (j + kv).min(n - 1);
                for c in j + 1..=cmax {
                    let v = self.get(i, c) - m * self.get(j, c);
                    self.set(i, c, v);
                }
            }
        }
        BandedLu {
            n,
            kl,
            kv,
            data: self.data,
            ipiv,
        }
    }
}

pub struct BandedLu {
    n: usize,
    kl: usize,
    kv: usize,
    data: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[(self.kv + i - j) * self.n + j]
    }

    /// Solve A x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let jmax = (j + self.kl).min(n - 1);
            for i in j + 1..=jmax {
                b[i] -= self.at(i, j) * b[j];
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.at(j, j);
            let imin = j.saturating_sub(self.kv);
            for i in imin..j {
                b[i] -= self.at(i, j) * b[j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(a: &mut [Vec<f64>], b: &mut [f64]) {
        let n = b.len();
        for j in 0..n {
            let mut p = j;
            for i in j + 1..n {
                if a[i][j].abs() > a[p][j].abs() {
                    p = i;
                }
            }
            a.swap(j, p);
            b.swap(j, p);
            for i in j + 1..n {
                let m = a[i][j] / a[j][j];
                for c in j..n {
                    a[i][c] -= m * a[j][c];
                }
                b[i] -= m * b[j];
            }
        }
        for j in (0..n).rev() {
            b[j] /= a[j][j];
            for i in 0..j {
                b[i] -= a[i][j] * b[j];
            }
        }
    }

    #[test]
    fn matches_dense_solver_on_random_band() {
        let n = 40;
        let (kl, ku) = (3usize, 3usize);
        let mut seed = 12345u64;
        let mut rng = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let mut band = BandedMatrix::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if j + kl >= i && i + ku >= j {
                    let v = if i == j { 4.0 + rng() } else { rng() };
                    band.set(i, j, v);
                    dense[i][j] = v;
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng()).collect();
        let lu = band.factor();
        let mut x = b.clone();
        lu.solve(&mut x);
        let mut xd = b.clone();
        dense_solve(&mut dense, &mut xd);
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-10, "i = {i}: {} vs {}", x[i], xd[i]);
        }
    }

    #[test]
    fn pivoting_handles_weak_diagonal() {
        // small diagonal forces row swaps
        let n = 6;
        let mut band = BandedMatrix::zeros(n, 2, 2);
        let entries = [
            (0, 0, 1e-14),
            (0, 1, 2.0),
            (1, 0, 3.0),
            (1, 1, 1.0),
            (1, 2, -1.0),
            (2, 1, 0.5),
            (2, 2, 2.0),
            (2, 3, 1.0),
            (3, 2, 1.0),
            (3, 3, -3.0),
            (3, 4, 0.25),
            (4, 3, 2.0),
            (4, 4, 1.0),
            (4, 5, 1.0),
            (5, 4, -1.0),
            (5, 5, 2.0),
        ];
        let mut dense = vec![vec![0.0; n]; n];
        for &(i, j, v) in &entries {
            band.set(i, j, v);
            dense[i][j] = v;
        }
        let b = vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0];
        let lu = band.factor();
        let mut x = b.clone();
        lu.solve(&mut x);
        let mut xd = b.clone();
        dense_solve(&mut dense, &mut xd);
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-9);
        }
    }
}
