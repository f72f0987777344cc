//! Householder QR with column pivoting for least-squares problems.

use nalgebra::{DMatrix, DVector};

/// Relative tolerance on `|R_jj| / max |R_ii|` below which a column counts as
/// linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// `A P = Q R` for an `n x p` matrix with `n >= p`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// Upper triangle holds `R`; below it is scratch.
    r: DMatrix<f64>,
    /// Householder vectors `v_j` (acting on rows `j..n`) and their `beta_j`,
    /// with `H_j = I - beta_j v_j v_j^T`.
    reflectors: Vec<(Vec<f64>, f64)>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (n, p) = a.shape();
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..p).collect();
        let mut reflectors = Vec::with_capacity(p.min(n));

        for j in 0..p.min(n) {
            // Bring the remaining column of largest norm to position j. Norms
            // are recomputed rather than downdated; p is small here.
            let norms: Vec<f64> = (j..p)
                .map(|c| r.view((j, c), (n - j, 1)).norm_squared())
                .collect();
            let (best, _) =
                norms
                    .iter()
                    .enumerate()
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |acc, (i, &v)| {
                            if v > acc.1 {
                                (i, v)
                            } else {
                                acc
                            }
                        },
                    );
            if best != 0 {
                r.swap_columns(j, j + best);
                perm.swap(j, j + best);
            }

            let x: Vec<f64> = (j..n).map(|i| r[(i, j)]).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                reflectors.push((vec![0.0; n - j], 0.0));
                continue;
            }
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            let mut v = x;
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|e| e * e).sum();
            let beta = if vnorm2 == 0.0 { 0.0 } else { 2.0 / vnorm2 };
            for c in j..p {
                let s: f64 = (j..n).map(|i| v[i - j] * r[(i, c)]).sum();
                let s = beta * s;
                for i in j..n {
                    r[(i, c)] -= s * v[i - j];
                }
            }
            reflectors.push((v, beta));
        }

        let diag: Vec<f64> = (0..p.min(n)).map(|i| r[(i, i)].abs()).collect();
        let max_diag = diag.iter().cloned().fold(0.0, f64::max);
        let rank = if max_diag == 0.0 {
            0
        } else {
            diag.iter()
                .take_while(|&&d| d > RANK_TOLERANCE * max_diag)
                .count()
        };
        Self {
            r,
            reflectors,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ncols(&self) -> usize {
        self.perm.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.ncols()
    }

    /// Original index of the first column judged dependent, if any.
    pub fn first_dependent_column(&self) -> Option<usize> {
        self.perm
            .get(self.rank)
            .copied()
            .filter(|_| !self.is_full_rank())
    }

    /// Computes `Q^T b` in place.
    pub fn apply_qt(&self, b: &mut DVector<f64>) {
        for (j, (v, beta)) in self.reflectors.iter().enumerate() {
            if *beta == 0.0 {
                continue;
            }
            let s: f64 = v.iter().enumerate().map(|(i, vi)| vi * b[j + i]).sum();
            let s = beta * s;
            for (i, vi) in v.iter().enumerate() {
                b[j + i] -= s * vi;
            }
        }
    }

    /// Least-squares solution of `A x = b`. Requires full column rank.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let p = self.ncols();
        let mut qtb = b.clone();
        self.apply_qt(&mut qtb);
        let mut z = vec![0.0; p];
        for i in (0..p).rev() {
            let s: f64 = (i + 1..p).map(|k| self.r[(i, k)] * z[k]).sum();
            z[i] = (qtb[i] - s) / self.r[(i, i)];
        }
        let mut x = DVector::zeros(p);
        for (k, &orig) in self.perm.iter().enumerate() {
            x[orig] = z[k];
        }
        x
    }

    /// `(A^T A)^{-1}` in the original column order. Requires full column rank.
    pub fn unscaled_covariance(&self) -> DMatrix<f64> {
        let p = self.ncols();
        // R^{-1} by back substitution on the identity.
        let mut rinv = DMatrix::zeros(p, p);
        for c in 0..p {
            for i in (0..=c).rev() {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for k in i + 1..=c {
                    s -= self.r[(i, k)] * rinv[(k, c)];
                }
                rinv[(i, c)] = s / self.r[(i, i)];
            }
        }
        let inner = &rinv * rinv.transpose();
        let mut out = DMatrix::zeros(p, p);
        for a in 0..p {
            for b in 0..p {
                out[(self.perm[a], self.perm[b])] = inner[(a, b)];
            }
        }
        out
    }
}
