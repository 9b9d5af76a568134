/// Symmetric banded matrix stored by its lower band.
///
/// Entry `(i, j)` with `i >= j` and `i - j <= bandwidth` lives at
/// `data[i * (bandwidth + 1) + (i - j)]`.
#[derive(Clone, Debug)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bw = bandwidth.min(n.saturating_sub(1));
        SymBanded {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|a| *a = 0.0);
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= j && i - j <= self.bw, "({i},{j}) outside band {}", self.bw);
        i * (self.bw + 1) + (i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `val` to the symmetric pair `(i, j)`/`(j, i)`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, val: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.data[k] += val;
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.data[i * (self.bw + 1)]
    }

    pub fn add_diag(&mut self, i: usize, val: f64) {
        self.data[i * (self.bw + 1)] += val;
    }

    /// Replaces row and column `i` by the unit vector `e_i`.
    pub fn pin(&mut self, i: usize) {
        let w = self.bw + 1;
        let lo = i.saturating_sub(self.bw);
        for j in lo..i {
            self.data[i * w + (i - j)] = 0.0;
        }
        let hi = (i + self.bw).min(self.n - 1);
        for r in i + 1..=hi {
            self.data[r * w + (r - i)] = 0.0;
        }
        self.data[i * w] = 1.0;
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|a| *a = 0.0);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
    }

    /// In-place Cholesky factorisation `A = L Lᵀ`. Returns `false` when a
    /// non-positive pivot is met; the matrix contents are then unspecified.
    pub fn cholesky_in_place(&mut self) -> bool {
        let w = self.bw + 1;
        for i in 0..self.n {
            let lo_i = i.saturating_sub(self.bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(self.bw));
                let mut s = self.data[i * w + (i - j)];
                for k in lo..j {
                    s -= self.data[i * w + (i - k)] * self.data[j * w + (j - k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return false;
                    }
                    self.data[i * w] = s.sqrt();
                } else {
                    self.data[i * w + (i - j)] = s / self.data[j * w];
                }
            }
        }
        true
    }

    /// Solves `L Lᵀ x = b` in place after a successful [`cholesky_in_place`](Self::cholesky_in_place).
    pub fn cholesky_solve(&self, b: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut s = b[i];
            for k in lo..i {
                s -= self.data[i * w + (i - k)] * b[k];
            }
            b[i] = s / self.data[i * w];
        }
        for i in (0..self.n).rev() {
            let hi = (i + self.bw).min(self.n - 1);
            let mut s = b[i];
            for k in i + 1..=hi {
                s -= self.data[k * w + (k - i)] * b[k];
            }
            b[i] = s / self.data[i * w];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_system() {
        // -1 2 -1 stencil plus identity, compared with dense elimination.
        let n = 7;
        let mut a = SymBanded::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 3.0);
            if i + 1 < n {
                a.add(i + 1, i, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
        let mut b = vec![0.0; n];
        a.mul_vec(&x_true, &mut b);
        let mut f = a.clone();
        assert!(f.cholesky_in_place());
        f.cholesky_solve(&mut b);
        for (u, v) in b.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn wide_band_matches_dense() {
        let n = 9;
        let bw = 3;
        let mut a = SymBanded::zeros(n, bw);
        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let v = if i == j { 10.0 } else { 1.0 / (1.0 + (i * j) as f64) };
                a.add(i, j, v);
                dense[(i, j)] = v;
                dense[(j, i)] = v;
            }
        }
        let rhs: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let expect = dense
            .clone()
            .cholesky()
            .unwrap()
            .solve(&nalgebra::DVector::from_vec(rhs.clone()));
        let mut b = rhs;
        assert!(a.cholesky_in_place());
        a.cholesky_solve(&mut b);
        for i in 0..n {
            assert!((b[i] - expect[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut a = SymBanded::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert!(!a.cholesky_in_place());
    }

    #[test]
    fn pin_clears_row_and_column() {
        let mut a = SymBanded::zeros(4, 2);
        for i in 0..4usize {
            for j in i.saturating_sub(2)..=i {
                a.add(i, j, 1.0 + i as f64 + j as f64);
            }
        }
        a.pin(2);
        assert_eq!(a.get(2, 2), 1.0);
        assert_eq!(a.get(2, 1), 0.0);
        assert_eq!(a.get(3, 2), 0.0);
        assert_eq!(a.get(0, 2), 0.0);
        assert!(a.get(3, 1) != 0.0);
    }
}
