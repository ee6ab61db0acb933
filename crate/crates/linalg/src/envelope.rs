use crate::{CsrMatrix, LinalgError};

/// Signature counts of a symmetric matrix, read off the `D` factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Envelope (skyline) `L D L^T` factorization without pivoting.
///
/// Row `i` of `L` is stored densely from its first structural nonzero up to
/// the diagonal, so fill stays inside the profile of the input matrix.
#[derive(Clone, Debug)]
pub struct EnvelopeLdl {
    n: usize,
    first: Vec<usize>,
    rowptr: Vec<usize>,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl EnvelopeLdl {
    /// Factors the lower triangle of a symmetric matrix.
    pub fn factor(a: &CsrMatrix) -> Result<Self, LinalgError> {
        if a.nrows() != a.ncols() {
            return Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() });
        }
        let n = a.nrows();
        let mut first = vec![0usize; n];
        for (i, f) in first.iter_mut().enumerate() {
            let (cols, _) = a.row(i);
            *f = cols.iter().copied().filter(|&c| c <= i).min().unwrap_or(i);
        }
        let mut rowptr = vec![0usize; n + 1];
        for i in 0..n {
            rowptr[i + 1] = rowptr[i] + (i - first[i]);
        }
        let mut l = vec![0.0; rowptr[n]];
        let mut d = vec![0.0; n];
        let mut w = Vec::new();
        let scale = a.norm_inf().max(f64::MIN_POSITIVE);
        for i in 0..n {
            let fi = first[i];
            w.clear();
            w.resize(i - fi + 1, 0.0);
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if c <= i {
                    w[c - fi] = v;
                }
            }
            // w[j] becomes l_ij * d_j for j < i.
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let lj = &l[rowptr[j]..rowptr[j + 1]];
                let mut s = w[j - fi];
                for k in k0..j {
                    s -= w[k - fi] * lj[k - fj];
                }
                w[j - fi] = s;
            }
            let mut di = w[i - fi];
            let li = &mut l[rowptr[i]..rowptr[i + 1]];
            for j in fi..i {
                let lij = w[j - fi] / d[j];
                li[j - fi] = lij;
                di -= w[j - fi] * lij;
            }
            if di.abs() <= 1e-300 || di.abs() <= f64::EPSILON * 1e-6 * scale {
                return Err(LinalgError::ZeroPivot { row: i });
            }
            d[i] = di;
        }
        Ok(Self { n, first, rowptr, l, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal entries of `L`.
    pub fn envelope_size(&self) -> usize {
        self.l.len()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn inertia(&self) -> Inertia {
        let mut out = Inertia { positive: 0, negative: 0, zero: 0 };
        for &di in &self.d {
            if di > 0.0 {
                out.positive += 1;
            } else if di < 0.0 {
                out.negative += 1;
            } else {
                out.zero += 1;
            }
        }
        out
    }

    pub fn is_positive_definite(&self) -> bool {
        self.d.iter().all(|&v| v > 0.0)
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        for i in 0..self.n {
            let fi = self.first[i];
            let li = &self.l[self.rowptr[i]..self.rowptr[i + 1]];
            let mut s = b[i];
            for (k, lik) in li.iter().enumerate() {
                s -= lik * b[fi + k];
            }
            b[i] = s;
        }
        for (bi, di) in b.iter_mut().zip(&self.d) {
            *bi /= di;
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let bi = b[i];
            let li = &self.l[self.rowptr[i]..self.rowptr[i + 1]];
            for (k, lik) in li.iter().enumerate() {
                b[fi + k] -= lik * bi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
