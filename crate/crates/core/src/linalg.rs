//! Dense Householder QR with column pivoting.

use crate::scalar::Scalar;

/// Pivoted QR factorization of a tall column-major matrix.
pub struct PivotedQr<F> {
    rows: usize,
    cols: usize,
    /// Householder vectors below the diagonal, `R` on and above it.
    packed: Vec<F>,
    tau: Vec<F>,
    perm: Vec<usize>,
}

impl<F: Scalar> PivotedQr<F> {
    /// Factorizes the matrix whose columns are `columns`, each of length `rows`.
    pub fn new(rows: usize, columns: &[&[F]]) -> Self {
        let cols = columns.len();
        let mut a = Vec::with_capacity(rows * cols);
        for c in columns {
            debug_assert_eq!(c.len(), rows);
            a.extend_from_slice(c);
        }
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut norms: Vec<F> = (0..cols)
            .map(|j| sq_norm(&a[j * rows..(j + 1) * rows]))
            .collect();
        let mut tau = vec![F::zero(); cols.min(rows)];

        for k in 0..cols.min(rows) {
            // pivot: largest remaining column norm
            let (piv, _) =
                norms[k..]
                    .iter()
                    .enumerate()
                    .fold((k, F::neg_infinity()), |best, (o, &v)| {
                        if v > best.1 {
                            (k + o, v)
                        } else {
                            best
                        }
                    });
            if piv != k {
                for i in 0..rows {
                    a.swap(k * rows + i, piv * rows + i);
                }
                norms.swap(k, piv);
                perm.swap(k, piv);
            }
            let col = &mut a[k * rows..(k + 1) * rows];
            let alpha_norm = sq_norm(&col[k..]).sqrt();
            if alpha_norm == F::zero() {
                tau[k] = F::zero();
                continue;
            }
            let beta = if col[k] > F::zero() {
                -alpha_norm
            } else {
                alpha_norm
            };
            let v0 = col[k] - beta;
            for v in col[k + 1..].iter_mut() {
                *v = *v / v0;
            }
            tau[k] = (beta - col[k]) / beta;
            col[k] = beta;
            // apply H = I - tau v v^T to trailing columns, v = (1, col[k+1..])
            let (head, tail) = a.split_at_mut((k + 1) * rows);
            let v = &head[k * rows + k..(k + 1) * rows];
            for j in 0..(cols - k - 1) {
                let c = &mut tail[j * rows + k..(j + 1) * rows];
                let mut dot = c[0];
                for i in 1..v.len() {
                    dot = dot + v[i] * c[i];
                }
                let s = tau[k] * dot;
                c[0] = c[0] - s;
                for i in 1..v.len() {
                    c[i] = c[i] - s * v[i];
                }
                // downdate remaining norm, recompute when cancellation bites
                let jj = k + 1 + j;
                let r = c[0];
                let updated = norms[jj] - r * r;
                norms[jj] = if updated > F::lit(1e-3) * norms[jj] {
                    updated
                } else {
                    sq_norm(&c[1..])
                };
            }
        }
        PivotedQr {
            rows,
            cols,
            packed: a,
            tau,
            perm,
        }
    }

    fn r(&self, i: usize, j: usize) -> F {
        self.packed[j * self.rows + i]
    }

    /// Ratio of the largest to the smallest diagonal magnitude of `R`,
    /// an estimate of the 2-norm condition number of the input matrix.
    pub fn condition_estimate(&self) -> F {
        if self.cols == 0 {
            return F::one();
        }
        if self.cols > self.rows {
            return F::infinity();
        }
        let first = self.r(0, 0).abs();
        let last = self.r(self.cols - 1, self.cols - 1).abs();
        if last == F::zero() {
            F::infinity()
        } else {
            first / last
        }
    }

    /// Least-squares solution of `A x ≈ b`, in the original column order.
    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let (m, n) = (self.rows, self.cols);
        let mut qtb = b.to_vec();
        for k in 0..n.min(m) {
            let v = &self.packed[k * m + k..(k + 1) * m];
            let mut dot = qtb[k];
            for i in 1..v.len() {
                dot = dot + v[i] * qtb[k + i];
            }
            let s = self.tau[k] * dot;
            qtb[k] = qtb[k] - s;
            for i in 1..v.len() {
                qtb[k + i] = qtb[k + i] - s * v[i];
            }
        }
        let mut z = vec![F::zero(); n];
        for i in (0..n).rev() {
            let mut acc = qtb[i];
            for j in i + 1..n {
                acc = acc - self.r(i, j) * z[j];
            }
            z[i] = acc / self.r(i, i);
        }
        let mut x = vec![F::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }
}

/// Solves `A x = b` for symmetric positive definite `A` (row-major, `k×k`)
/// by Cholesky; `None` when `A` is not numerically positive definite.
pub fn cholesky_solve<F: Scalar>(a: &[F], k: usize, b: &[F]) -> Option<Vec<F>> {
    let mut l = vec![F::zero(); k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[i * k + j];
            for m in 0..j {
                s = s - l[i * k + m] * l[j * k + m];
            }
            if i == j {
                if !(s > F::zero()) {
                    return None;
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    let mut z = b.to_vec();
    for i in 0..k {
        let mut s = z[i];
        for m in 0..i {
            s = s - l[i * k + m] * z[m];
        }
        z[i] = s / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = z[i];
        for m in i + 1..k {
            s = s - l[m * k + i] * z[m];
        }
        z[i] = s / l[i * k + i];
    }
    Some(z)
}

pub(crate) fn sq_norm<F: Scalar>(v: &[F]) -> F {
    dot(v, v)
}

/// Inner product with four running sums.
pub(crate) fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    let n = a.len().min(b.len());
    let (mut s0, mut s1, mut s2, mut s3) = (F::zero(), F::zero(), F::zero(), F::zero());
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        s0 = s0 + a[i] * b[i];
        s1 = s1 + a[i + 1] * b[i + 1];
        s2 = s2 + a[i + 2] * b[i + 2];
        s3 = s3 + a[i + 3] * b[i + 3];
    }
    for i in 4 * chunks..n {
        s0 = s0 + a[i] * b[i];
    }
    (s0 + s1) + (s2 + s3)
}

/// `y ← y − alpha · x`.
pub(crate) fn sub_scaled<F: Scalar>(y: &mut [F], alpha: F, x: &[F]) {
    for (r, &v) in y.iter_mut().zip(x) {
        *r = *r - alpha * v;
    }
}
