/// A tridiagonal matrix stored by diagonals.
#[derive(Clone, Debug)]
pub(crate) struct Tridiagonal {
    /// Sub-diagonal, `lower[i]` sits at (i+1, i).
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// Super-diagonal, `upper[i]` sits at (i, i+1).
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    /// Adds the 2×2 block [[a, b], [b, a]] at rows/columns (i, i+1).
    pub fn add_element(&mut self, i: usize, a: f64, b: f64) {
        self.diag[i] += a;
        self.diag[i + 1] += a;
        self.upper[i] += b;
        self.lower[i] += b;
    }

    /// Replaces row and column `j` by the identity.
    pub fn pin(&mut self, j: usize) {
        self.diag[j] = 1.0;
        if j > 0 {
            self.lower[j - 1] = 0.0;
            self.upper[j - 1] = 0.0;
        }
        if j + 1 < self.diag.len() {
            self.upper[j] = 0.0;
            self.lower[j] = 0.0;
        }
    }

    #[cfg(test)]
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting. Returns `None` on an exactly
    /// singular pivot or a non-finite result.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.diag.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return Some(Vec::new());
        }
        let mut b = rhs.to_vec();
        // Rows of the upper factor: entries at columns i, i+1, i+2.
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        // Current row i holds (cur_d, cur_e) at columns (i, i+1).
        let mut cur_d = self.diag[0];
        let mut cur_e = if n > 1 { self.upper[0] } else { 0.0 };
        for i in 0..n - 1 {
            let l = self.lower[i];
            let d_next = self.diag[i + 1];
            let e_next = if i + 2 < n { self.upper[i + 1] } else { 0.0 };
            if cur_d.abs() >= l.abs() {
                if cur_d == 0.0 {
                    return None;
                }
                let f = l / cur_d;
                u0[i] = cur_d;
                u1[i] = cur_e;
                u2[i] = 0.0;
                b[i + 1] -= f * b[i];
                cur_d = d_next - f * cur_e;
                cur_e = e_next;
            } else {
                let f = cur_d / l;
                u0[i] = l;
                u1[i] = d_next;
                u2[i] = e_next;
                let bi = b[i];
                b[i] = b[i + 1];
                b[i + 1] = bi - f * b[i + 1];
                cur_d = cur_e - f * d_next;
                cur_e = -f * e_next;
            }
        }
        if cur_d == 0.0 {
            return None;
        }
        u0[n - 1] = cur_d;

        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * x[i + 2];
            }
            x[i] = s / u0[i];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}
