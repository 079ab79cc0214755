//! Collective-spin and truncated-boson operator matrices.
//!
//! Product bases are ordered with the boson index outermost and the spin
//! projection `m` ascending innermost, so that `kron(boson_op, spin_op)` acts on
//! index `n * (two_j + 1) + k` where `m = -J + k`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl RealSymmetricMatrix {
    /// Builds a matrix from the upper triangle of `f`; the lower triangle is
    /// mirrored so the result is symmetric bit-for-bit.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        Self { dim, entries }
    }

    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be at least 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_upper_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_upper_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_upper_fn(dim, |_, _| 0.0)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|v| v * factor).collect() }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(Self { dim: self.dim, entries })
    }

    /// `self * self`, which is again symmetric.
    pub fn square(&self) -> Self {
        let n = self.dim;
        Self::from_upper_fn(n, |i, j| {
            (0..n).map(|k| self.get(i, k) * self.get(k, j)).sum()
        })
    }

    /// Principal submatrix on the given (ordered) index set.
    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        Self::from_upper_fn(indices.len(), |a, b| self.get(indices[a], indices[b]))
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

/// One total-spin block of the N-qubit space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinSector {
    /// Twice the total spin J.
    pub two_j: usize,
    /// Number of copies of this block in the 2^N space.
    pub multiplicity: u64,
}

impl SpinSector {
    pub fn dim(&self) -> usize {
        self.two_j + 1
    }

    pub fn spin(&self) -> f64 {
        self.two_j as f64 / 2.0
    }
}

/// Largest atom count for which multiplicities are computed.
pub const MAX_SECTOR_ATOMS: usize = 20;

/// J_z with entries m = -J, ..., +J.
pub fn jz_matrix(two_j: usize) -> RealSymmetricMatrix {
    let j = two_j as f64 / 2.0;
    let diag: Vec<f64> = (0..=two_j).map(|k| -j + k as f64).collect();
    RealSymmetricMatrix::from_diagonal(&diag)
}

/// J_x = (J_+ + J_-)/2 in the J_z basis.
pub fn jx_matrix(two_j: usize) -> RealSymmetricMatrix {
    let j = two_j as f64 / 2.0;
    RealSymmetricMatrix::from_upper_fn(two_j + 1, |row, col| {
        if col == row + 1 {
            let m = -j + row as f64;
            0.5 * (j * (j + 1.0) - m * (m + 1.0)).sqrt()
        } else {
            0.0
        }
    })
}

pub fn jx_squared(two_j: usize) -> RealSymmetricMatrix {
    jx_matrix(two_j).square()
}

/// a†a truncated at occupation `cutoff`.
pub fn boson_number(cutoff: usize) -> RealSymmetricMatrix {
    let diag: Vec<f64> = (0..=cutoff).map(|n| n as f64).collect();
    RealSymmetricMatrix::from_diagonal(&diag)
}

/// a† + a truncated at occupation `cutoff`.
pub fn boson_x(cutoff: usize) -> RealSymmetricMatrix {
    RealSymmetricMatrix::from_upper_fn(cutoff + 1, |row, col| {
        if col == row + 1 {
            (col as f64).sqrt()
        } else {
            0.0
        }
    })
}

pub fn kron(a: &RealSymmetricMatrix, b: &RealSymmetricMatrix) -> RealSymmetricMatrix {
    let (da, db) = (a.dim(), b.dim());
    RealSymmetricMatrix::from_upper_fn(da * db, |row, col| {
        a.get(row / db, col / db) * b.get(row % db, col % db)
    })
}

fn binomial(n: u64, k: i64) -> u128 {
    if k < 0 || k as u64 > n {
        return 0;
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Total-spin sectors of `n_atoms` spin-1/2 particles, ascending in J.
pub fn sector_decomposition(n_atoms: usize) -> Result<Vec<SpinSector>> {
    if n_atoms == 0 {
        return Err(Error::InvalidParameter("n_atoms must be at least 1".into()));
    }
    if n_atoms > MAX_SECTOR_ATOMS {
        return Err(Error::TooManyAtoms { requested: n_atoms, max: MAX_SECTOR_ATOMS });
    }
    let n = n_atoms as u64;
    let sectors = (n_atoms % 2..=n_atoms)
        .step_by(2)
        .map(|two_j| {
            // N/2 - J = (N - 2J)/2
            let k = ((n_atoms - two_j) / 2) as i64;
            let multiplicity = binomial(n, k) - binomial(n, k - 1);
            SpinSector { two_j, multiplicity: multiplicity as u64 }
        })
        .collect();
    Ok(sectors)
}

/// Diagonal (-1)^(n + m + J) on the boson ⊗ spin product basis.
pub fn parity_matrix(sector: SpinSector, cutoff: usize) -> RealSymmetricMatrix {
    RealSymmetricMatrix::from_diagonal(&parity_signs(sector.two_j, cutoff))
}

pub(crate) fn parity_signs(two_j: usize, cutoff: usize) -> Vec<f64> {
    let d = two_j + 1;
    (0..(cutoff + 1) * d)
        .map(|idx| if (idx / d + idx % d) % 2 == 0 { 1.0 } else { -1.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commutator(a: &RealSymmetricMatrix, b: &RealSymmetricMatrix) -> DMatrix<f64> {
        let (a, b) = (a.to_dmatrix(), b.to_dmatrix());
        &a * &b - &b * &a
    }

    #[test]
    fn jz_examples() {
        assert_eq!(jz_matrix(1).diagonal(), vec![-0.5, 0.5]);
        assert_eq!(jz_matrix(0), RealSymmetricMatrix::zeros(1));
        assert_eq!(jz_matrix(2).diagonal(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(jz_matrix(2).max_abs(), 1.0);
    }

    #[test]
    fn jx_examples() {
        let half = jx_matrix(1);
        assert_eq!(half.entries(), &[0.0, 0.5, 0.5, 0.0]);
        let one = jx_matrix(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((one.get(0, 1) - s).abs() < 1e-15);
        assert!((one.get(1, 2) - s).abs() < 1e-15);
        assert_eq!(one.get(0, 2), 0.0);
        assert_eq!(one.diagonal(), vec![0.0; 3]);
        assert_eq!(jx_matrix(0), RealSymmetricMatrix::zeros(1));
    }

    #[test]
    fn jx_squared_examples() {
        let q = jx_squared(1);
        assert_eq!(q, RealSymmetricMatrix::identity(2).scaled(0.25));
        let q = jx_squared(2);
        let expect = [0.5, 0.0, 0.5, 0.0, 1.0, 0.0, 0.5, 0.0, 0.5];
        for (a, b) in q.entries().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(jx_squared(0), RealSymmetricMatrix::zeros(1));
    }

    #[test]
    fn boson_examples() {
        assert_eq!(boson_number(0), RealSymmetricMatrix::zeros(1));
        assert_eq!(boson_number(2).diagonal(), vec![0.0, 1.0, 2.0]);
        assert_eq!(boson_number(5).trace(), 15.0);
        assert_eq!(boson_x(1).entries(), &[0.0, 1.0, 1.0, 0.0]);
        let x = boson_x(2);
        assert_eq!(x.get(0, 1), 1.0);
        assert!((x.get(1, 2) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(x.diagonal(), vec![0.0; 3]);
        assert_eq!(boson_x(0), RealSymmetricMatrix::zeros(1));
    }

    #[test]
    fn kron_examples() {
        let i6 = kron(&RealSymmetricMatrix::identity(2), &RealSymmetricMatrix::identity(3));
        assert_eq!(i6, RealSymmetricMatrix::identity(6));
        let d = kron(
            &RealSymmetricMatrix::from_diagonal(&[1.0, 2.0]),
            &RealSymmetricMatrix::from_diagonal(&[3.0, 4.0]),
        );
        assert_eq!(d, RealSymmetricMatrix::from_diagonal(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_matches_nalgebra_and_trace_factorises() {
        let a = RealSymmetricMatrix::from_upper_fn(3, |i, j| 0.3 * i as f64 - 0.7 * j as f64 + 1.1);
        let b = RealSymmetricMatrix::from_upper_fn(3, |i, j| (i * j) as f64 + 0.25 * (i + j) as f64 - 2.0);
        let k = kron(&a, &b);
        let oracle = a.to_dmatrix().kronecker(&b.to_dmatrix());
        assert_eq!(k.to_dmatrix(), oracle);
        assert!((k.trace() - a.trace() * b.trace()).abs() < 1e-12);
        let c = RealSymmetricMatrix::identity(2);
        assert_eq!(kron(&kron(&a, &b), &c).dim(), 18);
    }

    #[test]
    fn sector_examples() {
        let s = |two_j, multiplicity| SpinSector { two_j, multiplicity };
        assert_eq!(sector_decomposition(2).unwrap(), vec![s(0, 1), s(2, 1)]);
        assert_eq!(sector_decomposition(4).unwrap(), vec![s(0, 2), s(2, 3), s(4, 1)]);
        assert_eq!(sector_decomposition(1).unwrap(), vec![s(1, 1)]);
        assert!(sector_decomposition(0).is_err());
        assert!(matches!(sector_decomposition(21), Err(Error::TooManyAtoms { .. })));
    }

    #[test]
    fn dimension_sum_rule() {
        for n in 1..=MAX_SECTOR_ATOMS {
            let total: u64 = sector_decomposition(n)
                .unwrap()
                .iter()
                .map(|s| s.multiplicity * s.dim() as u64)
                .sum();
            assert_eq!(total, 1u64 << n, "N = {n}");
        }
    }

    #[test]
    fn parity_examples() {
        let vac = parity_matrix(SpinSector { two_j: 0, multiplicity: 1 }, 0);
        assert_eq!(vac.entries(), &[1.0]);
        let p = parity_matrix(SpinSector { two_j: 2, multiplicity: 1 }, 3);
        assert!(p.diagonal().iter().all(|v| *v == 1.0 || *v == -1.0));
        assert_eq!(p.square(), RealSymmetricMatrix::identity(12));
    }

    #[test]
    fn casimir_identity() {
        for two_j in 0..=40 {
            let j = two_j as f64 / 2.0;
            let c = commutator(&jx_matrix(two_j), &jz_matrix(two_j));
            let lhs = jx_squared(two_j).to_dmatrix() - &c * &c + jz_matrix(two_j).square().to_dmatrix();
            let rhs = DMatrix::identity(two_j + 1, two_j + 1) * (j * (j + 1.0));
            let err = (lhs - rhs).abs().max();
            assert!(err < 1e-12, "two_j = {two_j}: {err}");
        }
    }

    #[test]
    fn spin_operators_traceless() {
        for two_j in 1..=30 {
            assert_eq!(jz_matrix(two_j).trace(), 0.0);
            assert_eq!(jx_matrix(two_j).trace(), 0.0);
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let err = RealSymmetricMatrix::from_row_major(2, vec![0.0, 1.0, 2.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::NotSymmetric { row: 0, col: 1 });
        assert!(RealSymmetricMatrix::from_row_major(0, vec![]).is_err());
    }
}
