use super::dense::SymmetricDense;
use super::tridiag::ql_implicit;
use super::{hypot, LinalgError};

/// Real symmetric band matrix, lower band stored by diagonals.
///
/// `data[d * dim + j]` holds `a[j + d][j]` for `d <= bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBanded {
    dim: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl SymmetricBanded {
    pub fn zeros(dim: usize, bandwidth: usize) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        Ok(Self {
            dim,
            bandwidth,
            data: vec![0.0; (bandwidth + 1) * dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        if d > self.bandwidth || r >= self.dim {
            0.0
        } else {
            self.data[d * self.dim + c]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<(), LinalgError> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        if d > self.bandwidth || r >= self.dim {
            return Err(LinalgError::OutsideBand {
                row: i,
                col: j,
                bandwidth: self.bandwidth,
            });
        }
        self.data[d * self.dim + c] = value;
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn check_finite(&self) -> Result<(), LinalgError> {
        for d in 0..=self.bandwidth {
            for c in 0..self.dim.saturating_sub(d) {
                if !self.data[d * self.dim + c].is_finite() {
                    return Err(LinalgError::NonFinite { row: c + d, col: c });
                }
            }
        }
        Ok(())
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.dim;
        if x.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        let mut y: Vec<f64> = (0..n).map(|i| self.data[i] * x[i]).collect();
        for d in 1..=self.bandwidth.min(n - 1) {
            let diag = &self.data[d * n..d * n + n - d];
            for (c, a) in diag.iter().enumerate() {
                y[c + d] += a * x[c];
                y[c] += a * x[c + d];
            }
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> Result<SymmetricDense, LinalgError> {
        SymmetricDense::from_lower_fn(self.dim, |i, j| self.get(i, j))
    }

    pub fn rayleigh_quotient(&self, v: &[f64]) -> Result<f64, LinalgError> {
        let av = self.matvec(v)?;
        let num: f64 = av.iter().zip(v).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|x| x * x).sum();
        Ok(num / den)
    }

    /// Reduces to tridiagonal form by Givens bulge chasing and returns
    /// `(diagonal, off_diagonal)`.
    pub fn tridiagonalize(&self) -> (Vec<f64>, Vec<f64>) {
        let mut work = BulgeBand::from(self);
        work.reduce();
        let n = self.dim;
        let diag = (0..n).map(|i| work.get(i, i)).collect();
        let off = (0..n.saturating_sub(1)).map(|i| work.get(i + 1, i)).collect();
        (diag, off)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, LinalgError> {
        self.check_finite()?;
        let (mut d, off) = self.tridiagonalize();
        let mut e = off;
        e.push(0.0);
        ql_implicit(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Unit eigenvectors for the given (accurate) eigenvalues, by shifted
    /// inverse iteration. Vectors whose eigenvalues lie within a cluster
    /// tolerance of each other are kept mutually orthogonal. Each vector is
    /// signed so that its largest-magnitude component is positive.
    pub fn eigenvectors_for(&self, values: &[f64]) -> Result<Vec<Vec<f64>>, LinalgError> {
        self.check_finite()?;
        let scale = self.max_abs().max(1.0);
        let cluster = 1e-6 * scale;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        for (idx, &lambda) in values.iter().enumerate() {
            let lu = BandLu::factor(self, lambda, scale);
            let mut v = start_vector(self.dim, idx);
            for _ in 0..4 {
                v = lu.solve(v);
                for (prev, &mu) in out.iter().zip(values) {
                    if (mu - lambda).abs() <= cluster {
                        let dot: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
                        for (x, p) in v.iter_mut().zip(prev) {
                            *x -= dot * p;
                        }
                    }
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !norm.is_finite() || norm == 0.0 {
                    return Err(LinalgError::ConvergenceFailure { index: idx });
                }
                for x in v.iter_mut() {
                    *x /= norm;
                }
            }
            let pivot = v
                .iter()
                .copied()
                .fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if pivot < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            out.push(v);
        }
        Ok(out)
    }
}

fn start_vector(n: usize, seed: usize) -> Vec<f64> {
    // fixed, non-symmetric pattern so no eigenvector is missed by symmetry
    (0..n)
        .map(|i| 1.0 + (((i + 1) * 7919 + seed * 104_729) % 997) as f64 / 997.0)
        .collect()
}

/// Lower band with one extra diagonal to hold the chased bulge.
struct BulgeBand {
    n: usize,
    width: usize,
    band: usize,
    data: Vec<f64>,
}

impl From<&SymmetricBanded> for BulgeBand {
    fn from(a: &SymmetricBanded) -> Self {
        let n = a.dim;
        let band = a.bandwidth.min(n.saturating_sub(1));
        let width = band + 1;
        let mut data = vec![0.0; (width + 1) * n];
        for d in 0..=band {
            data[d * n..d * n + n - d].copy_from_slice(&a.data[d * n..d * n + n - d]);
        }
        Self { n, width, band, data }
    }
}

impl BulgeBand {
    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        if d > self.width {
            0.0
        } else {
            self.data[d * self.n + c]
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        if d > self.width {
            debug_assert!(value == 0.0, "fill outside bulge band at ({i}, {j})");
            return;
        }
        self.data[d * self.n + c] = value;
    }

    /// Rotates planes `(p, p + 1)` so that `a[p + 1][col]` becomes zero.
    fn annihilate(&mut self, p: usize, col: usize) {
        let q = p + 1;
        let x = self.get(p, col);
        let y = self.get(q, col);
        if y == 0.0 {
            return;
        }
        let r = hypot(x, y);
        let (c, s) = (x / r, y / r);

        let lo = p.saturating_sub(self.width);
        let hi = (q + self.width).min(self.n - 1);
        for i in lo..=hi {
            if i == p || i == q {
                continue;
            }
            let a = self.get(i, p);
            let b = self.get(i, q);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            self.set(i, p, c * a + s * b);
            self.set(i, q, -s * a + c * b);
        }
        let app = self.get(p, p);
        let apq = self.get(q, p);
        let aqq = self.get(q, q);
        let cs = c * s;
        self.set(p, p, c * c * app + 2.0 * cs * apq + s * s * aqq);
        self.set(q, q, s * s * app - 2.0 * cs * apq + c * c * aqq);
        self.set(q, p, (c * c - s * s) * apq + cs * (aqq - app));
        self.set(q, col, 0.0);
    }

    fn reduce(&mut self) {
        let n = self.n;
        let b = self.band;
        if b < 2 {
            return;
        }
        for j in 0..n.saturating_sub(2) {
            for k in (2..=b).rev() {
                let q = j + k;
                if q >= n {
                    continue;
                }
                self.annihilate(q - 1, j);
                // bulge appears at (q + b, q - 1); chase it off the end
                let mut col = q - 1;
                let mut row = q + b;
                while row < n {
                    self.annihilate(row - 1, col);
                    col = row - 1;
                    row += b;
                }
            }
        }
    }
}

/// LU factorization with partial pivoting of `A - shift*I` in band form.
struct BandLu {
    n: usize,
    kl: usize,
    span: usize,
    width: usize,
    rows: Vec<f64>,
    multipliers: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn factor(a: &SymmetricBanded, shift: f64, scale: f64) -> Self {
        let n = a.dim;
        let kl = a.bandwidth;
        let span = 2 * kl; // upper width after pivoting
        let width = kl + span + 1;
        let mut lu = Self {
            n,
            kl,
            span,
            width,
            rows: vec![0.0; n * width],
            multipliers: vec![0.0; n * kl],
            pivots: vec![0; n],
        };
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + kl).min(n - 1);
            for j in lo..=hi {
                let mut v = a.get(i, j);
                if i == j {
                    v -= shift;
                }
                *lu.at(i, j) = v;
            }
        }
        let tiny = f64::EPSILON * scale;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.at_ref(k, k).abs();
            for r in (k + 1)..=last {
                let v = lu.at_ref(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            lu.pivots[k] = p;
            let right = (k + span).min(n - 1);
            if p != k {
                for col in k..=right {
                    let t = *lu.at(k, col);
                    *lu.at(k, col) = *lu.at(p, col);
                    *lu.at(p, col) = t;
                }
            }
            if lu.at_ref(k, k).abs() < tiny {
                *lu.at(k, k) = if lu.at_ref(k, k) < 0.0 { -tiny } else { tiny };
            }
            let pivot = lu.at_ref(k, k);
            for r in (k + 1)..=last {
                let m = lu.at_ref(r, k) / pivot;
                lu.multipliers[k * kl + (r - k - 1)] = m;
                *lu.at(r, k) = 0.0;
                if m != 0.0 {
                    for col in (k + 1)..=right {
                        let u = lu.at_ref(k, col);
                        *lu.at(r, col) -= m * u;
                    }
                }
            }
        }
        lu
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.span);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        let o = self.offset(i, j);
        &mut self.rows[o]
    }

    #[inline]
    fn at_ref(&self, i: usize, j: usize) -> f64 {
        self.rows[self.offset(i, j)]
    }

    fn solve(&self, mut b: Vec<f64>) -> Vec<f64> {
        let n = self.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let last = (k + self.kl).min(n - 1);
            let bk = b[k];
            let multipliers = &self.multipliers[k * self.kl..];
            for (x, m) in b[k + 1..=last].iter_mut().zip(multipliers) {
                *x -= m * bk;
            }
        }
        for k in (0..n).rev() {
            let right = (k + self.span).min(n - 1);
            let mut s = b[k];
            for (col, x) in b.iter().enumerate().take(right + 1).skip(k + 1) {
                s -= self.at_ref(k, col) * x;
            }
            b[k] = s / self.at_ref(k, k);
        }
        b
    }
}
