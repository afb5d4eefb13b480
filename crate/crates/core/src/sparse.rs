//! Compressed sparse row operators and banded factorizations of shifted operators.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definiteness {
    NegativeDefinite,
    NegativeSemidefinite,
    Unspecified,
}

/// A real sparse matrix in CSR form.
///
/// `blocks > 1` marks a stacked operator such as the gradient: rows are
/// grouped component-major, row `a * (rows / blocks) + g` holding component
/// `a` at output point `g`.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    blocks: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    symmetric: bool,
    definiteness: Definiteness,
}

impl SparseOperator {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed and exact zeros dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        blocks: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        assert!(blocks >= 1 && rows.is_multiple_of(blocks), "rows must split evenly into blocks");
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut counts = vec![0usize; rows];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                counts[r] += 1;
                last = Some((r, c));
            }
        }
        // drop exact zeros produced by cancellation
        let mut k = 0;
        let mut kept_cols = Vec::with_capacity(col_idx.len());
        let mut kept_vals = Vec::with_capacity(vals.len());
        for (r, &count) in counts.iter().enumerate() {
            let mut kept = 0;
            for _ in 0..count {
                if vals[k] != 0.0 {
                    kept_cols.push(col_idx[k]);
                    kept_vals.push(vals[k]);
                    kept += 1;
                }
                k += 1;
            }
            row_ptr[r + 1] = row_ptr[r] + kept;
        }
        let mut op = SparseOperator {
            rows,
            cols,
            blocks,
            row_ptr,
            col_idx: kept_cols,
            vals: kept_vals,
            symmetric: false,
            definiteness: Definiteness::Unspecified,
        };
        op.symmetric = op.check_symmetry(0.0);
        op
    }

    pub(crate) fn with_definiteness(mut self, d: Definiteness) -> Self {
        self.definiteness = d;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Number of output points (rows per block).
    pub fn output_points(&self) -> usize {
        self.rows / self.blocks
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn definiteness(&self) -> Definiteness {
        self.definiteness
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn check_symmetry(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        (0..self.rows).all(|i| self.row(i).all(|(j, v)| (self.get(j, i) - v).abs() <= tol))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.rows)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn mul_vec<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = T::default();
                for (j, v) in self.row(i) {
                    acc += x[j].scale(v);
                }
                acc
            })
            .collect()
    }

    pub fn mul_vec_transpose<T: Scalar>(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![T::default(); self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (j, v) in self.row(i) {
                out[j] += yi.scale(v);
            }
        }
        out
    }

    /// Applies the operator to each component of `f`.
    ///
    /// An `N`-component input yields `N * blocks` components per output point,
    /// ordered `l * blocks + a`.
    pub fn apply<T: Scalar>(&self, f: &Field<T>) -> Field<T> {
        assert_eq!(f.points(), self.cols, "field does not live on the operator's domain");
        let n = f.components();
        let out_points = self.output_points();
        let width = n * self.blocks;
        let mut out = vec![T::default(); out_points * width];
        for (l, comp) in f.split_components().iter().enumerate() {
            let y = self.mul_vec(comp);
            for a in 0..self.blocks {
                for g in 0..out_points {
                    out[g * width + l * self.blocks + a] = y[a * out_points + g];
                }
            }
        }
        Field::new(out, width, f.cell_volume()).expect("shape checked")
    }

    /// Transpose of [`apply`](Self::apply): folds `N * blocks` components back to `N`.
    pub fn apply_transpose<T: Scalar>(&self, g: &Field<T>) -> Field<T> {
        let out_points = self.output_points();
        assert_eq!(g.points(), out_points, "field does not live on the operator's range");
        assert_eq!(g.components() % self.blocks, 0, "component count not a multiple of blocks");
        let n = g.components() / self.blocks;
        let width = g.components();
        let mut parts = Vec::with_capacity(n);
        for l in 0..n {
            let mut y = vec![T::default(); self.rows];
            for a in 0..self.blocks {
                for p in 0..out_points {
                    y[a * out_points + p] = g.values()[p * width + l * self.blocks + a];
                }
            }
            parts.push(self.mul_vec_transpose(&y));
        }
        Field::from_components(&parts, g.cell_volume()).expect("shape checked")
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `‖(shift·I + scale·A)u − f‖₂ / ‖f‖₂` in the unweighted Euclidean norm.
    pub fn shifted_residual<T: Scalar>(&self, shift: T, scale: f64, u: &[T], f: &[T]) -> f64 {
        let au = self.mul_vec(u);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..u.len() {
            let r = shift * u[i] + au[i].scale(scale) - f[i];
            num += r.modulus_sq();
            den += f[i].modulus_sq();
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

/// LU factors of `shift·I + scale·A` in band storage, computed without pivoting.
///
/// Valid for the systems used here: `A` symmetric negative (semi)definite with
/// either a real shift that keeps the matrix definite, or a complex shift with
/// nonzero imaginary part (complex symmetric with definite imaginary part).
#[derive(Clone, Debug)]
pub struct BandedLu<T: Scalar> {
    n: usize,
    bw: usize,
    band: Vec<T>,
}

impl<T: Scalar> BandedLu<T> {
    pub fn factor(op: &SparseOperator, shift: T, scale: f64) -> Result<Self> {
        if op.rows() != op.cols() {
            return Err(Error::invalid("banded factorization needs a square operator"));
        }
        let n = op.rows();
        let bw = op.bandwidth();
        let width = 2 * bw + 1;
        let mut band = vec![T::default(); n * width];
        for i in 0..n {
            band[i * width + bw] = shift;
            for (j, v) in op.row(i) {
                band[i * width + j + bw - i] += T::from_real(scale * v);
            }
        }
        let scale_ref = band.iter().map(|v| v.modulus()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let pivot = band[k * width + bw];
            if pivot.modulus() <= 1e-14 * scale_ref {
                return Err(Error::SolverFailure {
                    node: format!("pivot {k}"),
                    reason: "vanishing pivot in banded factorization".into(),
                });
            }
            let last = (k + bw).min(n - 1);
            for i in k + 1..=last {
                let lik = band[i * width + k + bw - i] / pivot;
                band[i * width + k + bw - i] = lik;
                for j in k + 1..=last {
                    let ukj = band[k * width + j + bw - k];
                    band[i * width + j + bw - i] -= lik * ukj;
                }
            }
        }
        Ok(BandedLu { n, bw, band })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        assert_eq!(rhs.len(), self.n);
        let (n, bw, width) = (self.n, self.bw, 2 * self.bw + 1);
        let mut x = rhs.to_vec();
        for i in 0..n {
            let first = i.saturating_sub(bw);
            let mut acc = x[i];
            for j in first..i {
                acc -= self.band[i * width + j + bw - i] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let last = (i + bw).min(n - 1);
            let mut acc = x[i];
            for j in i + 1..=last {
                acc -= self.band[i * width + j + bw - i] * x[j];
            }
            x[i] = acc / self.band[i * width + bw];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn tridiag(n: usize) -> SparseOperator {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, -2.0));
            if i + 1 < n {
                t.push((i, i + 1, 1.0));
                t.push((i + 1, i, 1.0));
            }
        }
        SparseOperator::from_triplets(n, n, 1, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let op = SparseOperator::from_triplets(2, 2, 1, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 0.0)]);
        assert_eq!(op.get(0, 0), 3.0);
        assert_eq!(op.nnz(), 1);
    }

    #[test]
    fn complex_shifted_solve_has_small_residual() {
        let op = tridiag(40);
        let z = Complex64::new(-1.3, 0.01);
        let lu = BandedLu::factor(&op, z, 1.0).unwrap();
        let f: Vec<Complex64> = (0..40).map(|i| Complex64::new((i as f64).sin(), 0.0)).collect();
        let u = lu.solve(&f);
        assert!(op.shifted_residual(z, 1.0, &u, &f) < 1e-12);
    }

    #[test]
    fn transpose_apply_is_adjoint() {
        let op = SparseOperator::from_triplets(4, 2, 2, vec![(0, 0, 1.0), (1, 1, -1.0), (2, 0, 2.0), (3, 1, 3.0)]);
        let f = Field::scalar(vec![1.0, 2.0], 1.0);
        let g = Field::new(vec![0.5, -1.0, 2.0, 1.0], 2, 1.0).unwrap();
        let lhs = op.apply(&f).dot(&g);
        let rhs = f.dot(&op.apply_transpose(&g));
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
