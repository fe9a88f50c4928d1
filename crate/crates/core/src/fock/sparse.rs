use alloc::vec::Vec;

use num_complex::Complex64;

/// Row-compressed complex sparse matrix, rows sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, rows: alloc::vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal((0..dim).map(|_| Complex64::new(1.0, 0.0)))
    }

    pub fn diagonal<I: IntoIterator<Item = Complex64>>(diag: I) -> Self {
        let rows: Vec<Vec<(usize, Complex64)>> =
            diag.into_iter().enumerate().map(|(i, v)| if v == Complex64::new(0.0, 0.0) { Vec::new() } else { alloc::vec![(i, v)] }).collect();
        Self { dim: rows.len(), rows }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I: IntoIterator<Item = (usize, usize, Complex64)>>(dim: usize, triplets: I) -> Self {
        let mut rows = alloc::vec![Vec::new(); dim];
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "triplet out of range");
            rows[i].push((j, v));
        }
        let mut m = Self { dim, rows };
        m.normalize();
        m
    }

    fn normalize(&mut self) {
        for row in &mut self.rows {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some((lj, lv)) if *lj == j => *lv += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|&(_, v)| v != Complex64::new(0.0, 0.0));
            *row = merged;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(i, j, v)| (i, j, v * c)))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let triplets = self.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter().flat_map(move |&(k, a)| other.rows[k].iter().map(move |&(j, b)| (i, j, a * b)))
        });
        Self::from_triplets(self.dim, triplets.collect::<Vec<_>>())
    }

    /// `self * other + other * self`
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    /// `self * other - other * self`
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.triplets().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        self.rows.iter().map(|row| row.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    /// `<x| self |y>`
    pub fn expectation(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let ay = self.apply(y);
        x.iter().zip(&ay).map(|(a, b)| a.conj() * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pauli_algebra() {
        let x = SparseMatrix::from_triplets(2, [(0, 1, c(1.0)), (1, 0, c(1.0))]);
        let y = SparseMatrix::from_triplets(2, [(0, 1, Complex64::new(0.0, -1.0)), (1, 0, Complex64::new(0.0, 1.0))]);
        assert_eq!(x.mul(&x), SparseMatrix::identity(2));
        assert_eq!(x.anticommutator(&y).nnz(), 0);
        assert_eq!(y.hermiticity_defect(), 0.0);
        assert_eq!(x.commutator(&y).get(0, 0), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn duplicates_merge_and_cancel() {
        let m = SparseMatrix::from_triplets(3, [(0, 2, c(1.0)), (0, 2, c(2.0)), (1, 1, c(1.0)), (1, 1, c(-1.0))]);
        assert_eq!(m.get(0, 2), c(3.0));
        assert_eq!(m.nnz(), 1);
    }
}
