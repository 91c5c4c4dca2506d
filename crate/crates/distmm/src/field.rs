//! Exact arithmetic over prime fields F_q and auxiliary residue rings Z_r.
//!
//! Everything here is plain integer arithmetic with canonical representatives
//! in `[0, q)`. Matrices are dense and row-major; all operations are pure and
//! return fresh values, so they can be called from any number of threads.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not a prime in [2, 65536]")]
    NotPrime(u64),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("operands live in different fields: F_{0} vs F_{1}")]
    ModulusMismatch(u32, u32),
    #[error("residue moduli differ: {0} vs {1}")]
    ResidueModulusMismatch(u64, u64),
    #[error("0 has no multiplicative inverse")]
    NoInverse,
    #[error("operation requires an odd field characteristic, got q = 2")]
    BinaryUnsupported,
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("entry {0} out of range for F_{1}")]
    EntryOutOfRange(u32, u32),
    #[error("matrix dimensions must be positive")]
    EmptyMatrix,
}

/// A verified prime modulus `q` with 2 <= q <= 2^16.
///
/// Entries fit in `u32` and a product of two canonical representatives fits
/// in `u64` with room for long accumulations before reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeModulus {
    q: u32,
}

impl PrimeModulus {
    pub fn new(q: u32) -> Result<Self, FieldError> {
        if !(2..=1 << 16).contains(&q) || !is_prime(q as u64) {
            return Err(FieldError::NotPrime(q as u64));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.q
    }

    #[inline]
    pub fn is_odd(self) -> bool {
        self.q != 2
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    #[inline]
    pub fn reduce(self, x: u64) -> u32 {
        (x % self.q as u64) as u32
    }

    /// Multiplicative inverse of a nonzero element, by the extended
    /// Euclidean algorithm.
    pub fn inverse(self, x: u32) -> Result<u32, FieldError> {
        let x = x % self.q;
        if x == 0 {
            return Err(FieldError::NoInverse);
        }
        let (mut r0, mut r1) = (self.q as i64, x as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1, "modulus is prime so gcd must be 1");
        Ok(t0.rem_euclid(self.q as i64) as u32)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Free-function form of `PrimeModulus::inverse`.
pub fn scalar_inverse(x: u32, q: PrimeModulus) -> Result<u32, FieldError> {
    q.inverse(x)
}

/// Dense matrix over F_q, row-major, canonical entries in `[0, q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
    modulus: PrimeModulus,
}

impl FieldMatrix {
    pub fn zeros(rows: usize, cols: usize, modulus: PrimeModulus) -> Result<Self, FieldError> {
        if rows == 0 || cols == 0 {
            return Err(FieldError::EmptyMatrix);
        }
        Ok(Self {
            rows,
            cols,
            entries: vec![0; rows * cols],
            modulus,
        })
    }

    pub fn from_rows(rows: &[Vec<u32>], modulus: PrimeModulus) -> Result<Self, FieldError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(FieldError::EmptyMatrix);
        }
        let cols = rows[0].len();
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(FieldError::DimensionMismatch(
                    rows.len(),
                    cols,
                    1,
                    row.len(),
                ));
            }
            for &e in row {
                if e >= modulus.value() {
                    return Err(FieldError::EntryOutOfRange(e, modulus.value()));
                }
                entries.push(e);
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries,
            modulus,
        })
    }

    /// Column vector from a flat slice.
    pub fn column_vector(entries: &[u32], modulus: PrimeModulus) -> Result<Self, FieldError> {
        let rows: Vec<Vec<u32>> = entries.iter().map(|&e| vec![e]).collect();
        Self::from_rows(&rows, modulus)
    }

    /// Decodes `index` as a base-q numeral into a `rows x cols` matrix.
    /// Used by the exhaustive verifiers to walk every matrix of a shape.
    pub fn from_index(
        mut index: u64,
        rows: usize,
        cols: usize,
        modulus: PrimeModulus,
    ) -> Result<Self, FieldError> {
        let mut m = Self::zeros(rows, cols, modulus)?;
        let q = modulus.value() as u64;
        for e in m.entries.iter_mut() {
            *e = (index % q) as u32;
            index /= q;
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: u32) {
        debug_assert!(value < self.modulus.value());
        self.entries[r * self.cols + c] = value;
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ModulusMismatch(
                self.modulus.value(),
                other.modulus.value(),
            ));
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(FieldError::DimensionMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        Ok(())
    }

    /// Entrywise modulo-q sum.
    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| self.modulus.add(a, b))
            .collect();
        Ok(Self { entries, ..*self })
    }

    /// Entrywise modulo-q difference.
    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| self.modulus.sub(a, b))
            .collect();
        Ok(Self { entries, ..*self })
    }

    /// Standard matrix product with all sums and products reduced mod q.
    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ModulusMismatch(
                self.modulus.value(),
                other.modulus.value(),
            ));
        }
        if self.cols != other.rows {
            return Err(FieldError::DimensionMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols, self.modulus)?;
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += self.get(i, k) as u64 * other.get(k, j) as u64;
                }
                out.set(i, j, self.modulus.reduce(acc));
            }
        }
        Ok(out)
    }

    pub fn scalar_mul(&self, s: u32) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|&a| self.modulus.mul(a, s))
            .collect();
        Self { entries, ..*self }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows, self.modulus).expect("nonempty");
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Rows `[start, end)` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> Result<Self, FieldError> {
        if start >= end || end > self.rows {
            return Err(FieldError::DimensionMismatch(
                start, end, self.rows, self.cols,
            ));
        }
        Ok(Self {
            rows: end - start,
            cols: self.cols,
            entries: self.entries[start * self.cols..end * self.cols].to_vec(),
            modulus: self.modulus,
        })
    }

    /// Vertical concatenation.
    pub fn vstack(&self, lower: &Self) -> Result<Self, FieldError> {
        if self.modulus != lower.modulus {
            return Err(FieldError::ModulusMismatch(
                self.modulus.value(),
                lower.modulus.value(),
            ));
        }
        if self.cols != lower.cols {
            return Err(FieldError::DimensionMismatch(
                self.rows, self.cols, lower.rows, lower.cols,
            ));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&lower.entries);
        Ok(Self {
            rows: self.rows + lower.rows,
            cols: self.cols,
            entries,
            modulus: self.modulus,
        })
    }

    /// Column `j` as an m x 1 matrix.
    pub fn column(&self, j: usize) -> Result<Self, FieldError> {
        if j >= self.cols {
            return Err(FieldError::DimensionMismatch(
                self.rows, self.cols, self.rows, j,
            ));
        }
        let entries = (0..self.rows).map(|i| self.get(i, j)).collect();
        Ok(Self {
            rows: self.rows,
            cols: 1,
            entries,
            modulus: self.modulus,
        })
    }

    /// Replicates column `j` into every one of `width` columns
    /// (the B_j 1_{1xl} construction of the square scheme).
    pub fn replicate_column(&self, j: usize, width: usize) -> Result<Self, FieldError> {
        let col = self.column(j)?;
        let mut out = Self::zeros(self.rows, width, self.modulus)?;
        for i in 0..self.rows {
            for w in 0..width {
                out.set(i, w, col.get(i, 0));
            }
        }
        Ok(out)
    }

    /// inv(2) * (D + D^T) mod q. Defined only for square matrices over odd q;
    /// fixes every symmetric matrix, and the output is always symmetric.
    pub fn symmetrize(&self) -> Result<Self, FieldError> {
        if self.rows != self.cols {
            return Err(FieldError::NotSquare(self.rows, self.cols));
        }
        if !self.modulus.is_odd() {
            return Err(FieldError::BinaryUnsupported);
        }
        let half = self.modulus.inverse(2)?;
        Ok(self.add(&self.transpose())?.scalar_mul(half))
    }
}

/// Free-function aliases matching the toolkit's operation vocabulary.
pub fn mat_add(x: &FieldMatrix, y: &FieldMatrix) -> Result<FieldMatrix, FieldError> {
    x.add(y)
}

pub fn mat_mul(x: &FieldMatrix, y: &FieldMatrix) -> Result<FieldMatrix, FieldError> {
    x.mul(y)
}

pub fn symmetrize(d: &FieldMatrix) -> Result<FieldMatrix, FieldError> {
    d.symmetrize()
}

/// An element of the residue ring Z_r used by the vector-wise embedding
/// scheme, where r = 2(q-1)m (m even) or 2(q-1)m + 1 (m odd).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueScalar {
    value: u64,
    modulus: u64,
}

impl ResidueScalar {
    pub fn new(value: u64, modulus: u64) -> Self {
        assert!(modulus >= 2, "residue modulus must be at least 2");
        Self {
            value: value % modulus,
            modulus,
        }
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn add(self, other: Self) -> Result<Self, FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ResidueModulusMismatch(
                self.modulus,
                other.modulus,
            ));
        }
        Ok(Self::new(self.value + other.value, self.modulus))
    }
}

pub fn residue_add(a: ResidueScalar, b: ResidueScalar) -> Result<ResidueScalar, FieldError> {
    a.add(b)
}
