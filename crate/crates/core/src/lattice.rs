//! Totally real cyclotomic fields and the rotated `Z^n` ideal lattice they
//! generate.
//!
//! For a prime `p >= 5` the maximal real subfield of the `p`-th cyclotomic
//! field has degree `n = (p - 1) / 2`. Embedding the integral basis
//! `{zeta^i + zeta^-i}` with the twist `(1 - zeta)(1 - zeta^-1)` yields an
//! orthogonal generator matrix, i.e. a rotation of `Z^n` whose minimum
//! product distance is `p^{-(n-1)/2}`.

use std::f64::consts::PI;

use crate::error::{NomaError, Result};

/// Largest prime accepted by [`build_field`] (degree 30).
pub const MAX_PRIME: u32 = 61;

/// Row-major square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn mul(&self, other: &Matrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self::from_fn(self.dim, |i, j| {
            (0..self.dim)
                .map(|k| self.get(i, k) * other.get(k, j))
                .sum()
        })
    }

    /// Row vector times matrix: `v * self`.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        let mut out = vec![0.0; self.dim];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &g) in out.iter_mut().zip(self.row(i)) {
                *o += vi * g;
            }
        }
        out
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
                .unwrap();
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for r in col + 1..n {
                let factor = a[r * n + col] / d;
                for k in col..n {
                    a[r * n + k] -= factor * a[col * n + k];
                }
            }
        }
        det
    }

    /// `max |(self * self^T - I)_{ij}|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let gram = self.mul(&self.transpose());
        let eye = Matrix::identity(self.dim);
        gram.data
            .iter()
            .zip(&eye.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The maximal real subfield `Q(zeta + zeta^-1)` of the `p`-th cyclotomic field.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberField {
    p: u32,
    n: usize,
    /// `embeddings.get(i, j) = 2 cos(2 pi (i+1)(j+1) / p)`: embedding `j` of basis element `i`.
    embeddings: Matrix,
}

impl NumberField {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn embeddings(&self) -> &Matrix {
        &self.embeddings
    }

    /// `sigma_j(varsigma) = 2 - 2 cos(2 pi j / p)` for `j = 1..=n`.
    pub fn twist_embeddings(&self) -> Vec<f64> {
        let p = self.p as f64;
        (1..=self.n)
            .map(|j| 2.0 - 2.0 * (2.0 * PI * j as f64 / p).cos())
            .collect()
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Builds the degree `(p-1)/2` totally real cyclotomic field.
pub fn build_field(p: u32) -> Result<NumberField> {
    if !is_prime(p) {
        return Err(NomaError::NonPrime { p });
    }
    if p < 5 {
        return Err(NomaError::TooSmall { p });
    }
    if p > MAX_PRIME {
        return Err(NomaError::Unsupported { p, max: MAX_PRIME });
    }
    let n = ((p - 1) / 2) as usize;
    let pf = p as f64;
    let embeddings = Matrix::from_fn(n, |i, j| {
        // Reduce i*j mod p first so the argument stays small.
        let k = ((i + 1) * (j + 1)) % p as usize;
        2.0 * (2.0 * PI * k as f64 / pf).cos()
    });
    Ok(NumberField { p, n, embeddings })
}

/// A lattice equivalent to `Z^n` given by an orthogonal generator matrix.
///
/// Lattice points are row vectors `b * G` for integer `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedLattice {
    field: Option<NumberField>,
    generator: Matrix,
    dpmin: f64,
}

impl RotatedLattice {
    /// Unrotated `Z^n` (generator = identity). Its minimum product distance is 0.
    pub fn identity(n: usize) -> Self {
        Self {
            field: None,
            generator: Matrix::identity(n),
            dpmin: 0.0,
        }
    }

    pub fn field(&self) -> Option<&NumberField> {
        self.field.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn dpmin(&self) -> f64 {
        self.dpmin
    }

    /// Maps an integer coordinate vector to the lattice point `b * G`.
    pub fn point(&self, b: &[f64]) -> Vec<f64> {
        self.generator.left_mul(b)
    }

    /// Short human-readable descriptor, e.g. `cyclotomic(p=5)`.
    pub fn describe(&self) -> String {
        match &self.field {
            Some(f) => format!("cyclotomic(p={})", f.p()),
            None => format!("identity(n={})", self.dim()),
        }
    }

    pub fn same_as(&self, other: &RotatedLattice) -> bool {
        self.field.as_ref().map(|f| f.p) == other.field.as_ref().map(|f| f.p)
            && self.generator == other.generator
    }
}

/// `G = (1/sqrt p) * T * M * D`, with `T` upper-triangular all-ones,
/// `M` the embedding table and `D = diag(sqrt(sigma_j(varsigma)))`.
pub fn generator_matrix(field: &NumberField) -> RotatedLattice {
    let n = field.degree();
    let m = field.embeddings();
    let twist: Vec<f64> = field.twist_embeddings().iter().map(|v| v.sqrt()).collect();
    let scale = 1.0 / (field.p() as f64).sqrt();
    let generator = Matrix::from_fn(n, |i, j| {
        let col_sum: f64 = (i..n).map(|k| m.get(k, j)).sum();
        scale * col_sum * twist[j]
    });
    RotatedLattice {
        dpmin: lattice_dpmin(field),
        field: Some(field.clone()),
        generator,
    }
}

/// `p^{-(n-1)/2}`.
pub fn lattice_dpmin(field: &NumberField) -> f64 {
    (field.p() as f64).powf(-((field.degree() as f64 - 1.0) / 2.0))
}

/// Convenience: `generator_matrix(build_field(p)?)`.
pub fn cyclotomic_lattice(p: u32) -> Result<RotatedLattice> {
    Ok(generator_matrix(&build_field(p)?))
}
