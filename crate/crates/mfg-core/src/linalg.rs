//! Banded matrices and an LU factorization with partial pivoting.
//!
//! Storage follows the classical band scheme: a matrix of order `n` with
//! `kl` subdiagonals and `ku` superdiagonals is kept column-major in a
//! `(2 kl + ku + 1) x n` array, entry `(i, j)` at in-band row
//! `kl + ku + i - j`. The extra `kl` rows at the top hold the fill-in that
//! row pivoting creates, so factorization never allocates.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinAlgError {
    #[error("matrix is numerically singular at column {column}: pivot {pivot:e} below threshold {threshold:e}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
    #[error("invalid band structure: n = {n}, kl = {kl}, ku = {ku}")]
    BadShape { n: usize, kl: usize, ku: usize },
}

/// A square banded matrix in band storage.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column-major `(2 kl + ku + 1) x n`; column `j` starts at `j * ldab`.
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Result<Self, LinAlgError> {
        if n == 0 || kl >= n || ku >= n {
            return Err(LinAlgError::BadShape { n, kl, ku });
        }
        let ldab = 2 * kl + ku + 1;
        Ok(Self {
            n,
            kl,
            ku,
            data: vec![0.0; ldab * n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kl(&self) -> usize {
        self.kl
    }

    pub fn ku(&self) -> usize {
        self.ku
    }

    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    /// True when `(i, j)` lies inside the declared band.
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        let (i, j) = (i as isize, j as isize);
        j - i <= self.ku as isize && i - j <= self.kl as isize
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band kl={}, ku={}",
            self.kl,
            self.ku
        );
        j * self.ldab() + (self.kl + self.ku + i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    /// Sets an in-band entry; panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Adds to an in-band entry; panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Resets all entries to zero, keeping the allocation.
    pub fn clear(&mut self) {
        self.data.fill(0.0);
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        // The fill rows are zero before factorization, so scanning the whole
        // buffer is safe.
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Dense matrix-vector product `A x` (test and diagnostic helper).
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, LinAlgError> {
        if x.len() != self.n {
            return Err(LinAlgError::Mismatch(format!(
                "matvec: vector length {} vs order {}",
                x.len(),
                self.n
            )));
        }
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for i in lo..=hi {
                y[i] += self.data[self.slot(i, j)] * xj;
            }
        }
        Ok(y)
    }

    /// LU factorization with partial pivoting, consuming the matrix.
    ///
    /// A pivot whose magnitude falls below `1e-14` times the largest
    /// pre-factorization entry is treated as singular.
    pub fn factor(mut self) -> Result<BandedLu, LinAlgError> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku;
        let ldab = self.ldab();
        let threshold = 1e-14 * self.max_abs().max(f64::MIN_POSITIVE);
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;

        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // Pivot search over matrix rows j..=j+km in column j.
            let col = j * ldab;
            let mut jp = 0usize;
            let mut best = self.data[col + kv].abs();
            for k in 1..=km {
                let v = self.data[col + kv + k].abs();
                if v > best {
                    best = v;
                    jp = k;
                }
            }
            ipiv[j] = j + jp;
            if best <= threshold {
                return Err(LinAlgError::Singular {
                    column: j,
                    pivot: best,
                    threshold,
                });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                // Swap matrix rows j and j+jp across the active columns.
                for c in j..=ju {
                    let base = c * ldab + kv - c;
                    self.data.swap(base + j, base + j + jp);
                }
            }
            if km > 0 {
                let piv = self.data[col + kv];
                for k in 1..=km {
                    self.data[col + kv + k] /= piv;
                }
                for c in (j + 1)..=ju {
                    let u = self.data[c * ldab + kv + j - c];
                    if u != 0.0 {
                        let cbase = c * ldab + kv + j - c;
                        for k in 1..=km {
                            self.data[cbase + k] -= self.data[col + kv + k] * u;
                        }
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            data: self.data,
            ipiv,
        })
    }
}

/// The factored form `P A = L U` of a banded matrix.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinAlgError> {
        if b.len() != self.n {
            return Err(LinAlgError::Mismatch(format!(
                "solve: rhs length {} vs order {}",
                b.len(),
                self.n
            )));
        }
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut x = b.to_vec();

        // Forward: apply P and the unit lower factor.
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            let col = j * ldab;
            let xj = x[j];
            if xj != 0.0 {
                for k in 1..=km {
                    x[j + k] -= self.data[col + kv + k] * xj;
                }
            }
        }
        // Backward: the upper factor has bandwidth kl + ku after fill-in.
        for j in (0..n).rev() {
            let col = j * ldab;
            x[j] /= self.data[col + kv];
            let lo = j.saturating_sub(kv);
            let xj = x[j];
            if xj != 0.0 {
                for i in lo..j {
                    x[i] -= self.data[col + kv + i - j] * xj;
                }
            }
        }
        Ok(x)
    }
}
