use std::ops::Index;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Non-empty vector of finite complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(domain("complex vector must have at least one entry"));
        }
        if let Some(i) = entries
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(domain(format!("complex vector entry {i} is not finite")));
        }
        Ok(Self(entries))
    }

    /// Caller guarantees the invariants (non-empty, finite).
    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Bilinear product `Σ selfᵢ·otherᵢ` (no conjugation), i.e. `selfᵀ other`.
    pub fn dot(&self, other: &Self) -> Result<Complex64> {
        self.check_len(other.len())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    /// Hermitian product `Σ conj(selfᵢ)·otherᵢ`, i.e. `selfᴴ other`.
    pub fn hdot(&self, other: &Self) -> Result<Complex64> {
        self.check_len(other.len())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(Complex64::conj).collect())
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.len(),
                actual: expected,
            })
        }
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl<'a> IntoIterator for &'a ComplexVector {
    type Item = &'a Complex64;
    type IntoIter = std::slice::Iter<'a, Complex64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl TryFrom<Vec<Complex64>> for ComplexVector {
    type Error = Error;

    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        Self::new(v)
    }
}

/// Row-major dense complex matrix, used to materialize the factored channels
/// for cross-checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }
}
