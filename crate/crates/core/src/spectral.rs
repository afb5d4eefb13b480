//! Dense eigendecomposition of `−Δ` and exact spectral multipliers `m(−Δ)`.
//!
//! Eigenvectors are stored orthonormal in the plain Euclidean inner product.
//! Because the weighted inner product is that one times `h^n`, the matrix of
//! `m(−Δ)` acting on grid values is `U diag(m(λ)) Uᵀ` regardless of `h`.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::sparse::SparseOperator;

/// Largest number of degrees of freedom decomposed without an explicit override.
pub const DEFAULT_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    vectors: Mat<f64>,
    cell_volume: f64,
}

impl SpectralDecomposition {
    /// Decomposes `−op` for a symmetric generator `op` (such as `Δ_D`).
    pub fn new(op: &SparseOperator, cell_volume: f64) -> Result<Self> {
        Self::with_cap(op, cell_volume, DEFAULT_CAP)
    }

    pub fn with_cap(op: &SparseOperator, cell_volume: f64, cap: usize) -> Result<Self> {
        let dof = op.rows();
        if dof > cap {
            return Err(Error::CapExceeded { dof, cap });
        }
        if op.cols() != dof || !op.check_symmetry(1e-12) {
            return Err(Error::invalid("spectral decomposition needs a symmetric square operator"));
        }
        let a = op.to_dense();
        let dense = Mat::from_fn(dof, dof, |i, j| -a[(i, j)]);
        let evd = dense
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::SolverFailure { node: "eigendecomposition".into(), reason: format!(": {e:?}") })?;
        let eigenvalues = (0..dof).map(|i| evd.S().column_vector()[i]).collect();
        Ok(SpectralDecomposition { eigenvalues, vectors: evd.U().to_owned(), cell_volume })
    }

    pub fn dof(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues of `−Δ`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// Euclidean-orthonormal eigenvectors as columns.
    pub fn vectors(&self) -> MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    /// Eigenvector `i`, normalised in the weighted `L²` norm.
    pub fn eigenfunction(&self, i: usize) -> Field {
        let w = self.cell_volume.sqrt().recip();
        let col = self.vectors.col(i);
        Field::scalar((0..self.dof()).map(|x| col[x] * w).collect(), self.cell_volume)
    }

    /// `Uᵀ F` with one column per component of `f`.
    pub fn coefficients(&self, f: &Field) -> Mat<f64> {
        let n = self.check(f);
        let fm = field_matrix(f);
        let mut c = Mat::zeros(self.dof(), n);
        matmul(c.as_mut(), Accum::Replace, self.vectors.transpose(), fm.as_ref(), 1.0, Par::Seq);
        c
    }

    /// Inverse of [`Self::coefficients`]; one output field per block of `components` columns.
    pub fn synthesize(&self, coeffs: MatRef<'_, f64>, components: usize) -> Vec<Field> {
        let mut out = Mat::zeros(self.dof(), coeffs.ncols());
        matmul(out.as_mut(), Accum::Replace, self.vectors.as_ref(), coeffs, 1.0, Par::Seq);
        split_columns(out.as_ref(), components, self.cell_volume)
    }

    /// `m(−Δ) f`, componentwise.
    pub fn apply(&self, f: &Field, m: impl Fn(f64) -> f64) -> Field {
        let n = f.components();
        let mut c = self.coefficients(f);
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            let s = m(l);
            for k in 0..n {
                c[(i, k)] *= s;
            }
        }
        self.synthesize(c.as_ref(), n).pop().unwrap()
    }

    /// Complex multiplier applied to a real field, via two real products.
    pub fn apply_complex(&self, f: &Field, m: impl Fn(f64) -> Complex64) -> Field<Complex64> {
        let n = f.components();
        let c = self.coefficients(f);
        let r = self.dof();
        let mut stacked = Mat::zeros(r, 2 * n);
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            let s = m(l);
            for k in 0..n {
                stacked[(i, k)] = s.re * c[(i, k)];
                stacked[(i, n + k)] = s.im * c[(i, k)];
            }
        }
        let mut parts = self.synthesize(stacked.as_ref(), n);
        let im = parts.pop().unwrap();
        let re = parts.pop().unwrap();
        let values = re.values().iter().zip(im.values()).map(|(&a, &b)| Complex64::new(a, b)).collect();
        Field::new(values, n, self.cell_volume).expect("shape preserved")
    }

    /// `m_k(−Δ) f` for `k = 0..count`, computed with a single synthesis product.
    pub fn apply_batch(&self, f: &Field, count: usize, m: impl Fn(usize, f64) -> f64) -> Vec<Field> {
        if count == 0 {
            return Vec::new();
        }
        let n = f.components();
        let c = self.coefficients(f);
        let mut stacked = Mat::zeros(self.dof(), count * n);
        for k in 0..count {
            for (i, &l) in self.eigenvalues.iter().enumerate() {
                let s = m(k, l);
                for j in 0..n {
                    stacked[(i, k * n + j)] = s * c[(i, j)];
                }
            }
        }
        self.synthesize(stacked.as_ref(), n)
    }

    /// Dense matrix `U diag(m(λ)) Uᵀ` acting on grid values.
    pub fn multiplier_matrix(&self, m: impl Fn(f64) -> f64) -> Mat<f64> {
        let r = self.dof();
        let scaled = Mat::from_fn(r, r, |x, i| self.vectors[(x, i)] * m(self.eigenvalues[i]));
        let mut out = Mat::zeros(r, r);
        matmul(out.as_mut(), Accum::Replace, scaled.as_ref(), self.vectors.transpose(), 1.0, Par::Seq);
        out
    }

    /// `‖(z − sΔ)^{-1}‖_{2→2} = 1 / min_i |z + sλ_i|`.
    pub fn resolvent_norm2(&self, z: Complex64, s: f64) -> Result<f64> {
        let d = self.eigenvalues.iter().map(|&l| (z + s * l).norm()).fold(f64::INFINITY, f64::min);
        if d == 0.0 {
            return Err(Error::OnSpectrum { z: format!("{z}") });
        }
        Ok(1.0 / d)
    }

    fn check(&self, f: &Field) -> usize {
        assert_eq!(f.points(), self.dof(), "field does not live on this domain");
        f.components()
    }
}

fn field_matrix(f: &Field) -> Mat<f64> {
    let n = f.components();
    Mat::from_fn(f.points(), n, |x, k| f.values()[x * n + k])
}

fn split_columns(m: MatRef<'_, f64>, components: usize, cell_volume: f64) -> Vec<Field> {
    let points = m.nrows();
    (0..m.ncols() / components)
        .map(|b| {
            let mut v = Vec::with_capacity(points * components);
            for x in 0..points {
                for k in 0..components {
                    v.push(m[(x, b * components + k)]);
                }
            }
            Field::new(v, components, cell_volume).expect("valid shape")
        })
        .collect()
}

/// Eigenvalues of `sign · a` for a dense symmetric matrix, ascending.
pub fn dense_symmetric_eigenvalues(a: &MatRef<'_, f64>, sign: f64) -> Vec<f64> {
    let m = Mat::from_fn(a.nrows(), a.ncols(), |i, j| sign * a[(i, j)]);
    let mut ev = m.self_adjoint_eigenvalues(Side::Lower).expect("symmetric eigenvalues");
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dirichlet_laplacian, DomainDescriptor, GridDomain};
    use std::f64::consts::PI;

    fn setup(desc: DomainDescriptor) -> (GridDomain, SpectralDecomposition) {
        let d = GridDomain::build(&desc).unwrap();
        let s = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume()).unwrap();
        (d, s)
    }

    #[test]
    fn interval_eigenvalues_match_closed_form() {
        let (d, s) = setup(DomainDescriptor::interval(1.0, 40));
        let h = d.spacing();
        for (k, &l) in s.eigenvalues().iter().enumerate() {
            let exact = 4.0 / (h * h) * ((k + 1) as f64 * PI * h / 2.0).sin().powi(2);
            assert!((l - exact).abs() < 1e-9 * exact.max(1.0), "{k}: {l} vs {exact}");
        }
    }

    #[test]
    fn eigenfunctions_are_weighted_orthonormal() {
        let (_, s) = setup(DomainDescriptor::square_with_obstacle(8, 2));
        let a = s.eigenfunction(3);
        let b = s.eigenfunction(7);
        assert!((a.dot(&a) - 1.0).abs() < 1e-12);
        assert!(a.dot(&b).abs() < 1e-12);
    }

    #[test]
    fn identity_multiplier_reproduces_field() {
        let (d, s) = setup(DomainDescriptor::square(6));
        let f = d.sample(|x, y| x * (1.0 - y) + 0.3);
        let g = s.apply(&f, |_| 1.0);
        assert!(f.sub(&g).l2_norm() < 1e-13);
    }

    #[test]
    fn batch_matches_single_applications() {
        let (d, s) = setup(DomainDescriptor::interval(2.0, 15));
        let f = Field::from_components(&[d.sample(|x, _| x.sin()).into_values(), d.ones().into_values()], d.cell_volume())
            .unwrap();
        let ts = [0.01, 0.1, 1.0];
        let batch = s.apply_batch(&f, ts.len(), |k, l| (-ts[k] * l).exp());
        for (k, &t) in ts.iter().enumerate() {
            let single = s.apply(&f, |l| (-t * l).exp());
            assert!(batch[k].sub(&single).l2_norm() < 1e-13);
        }
    }

    #[test]
    fn complex_multiplier_splits() {
        let (d, s) = setup(DomainDescriptor::interval(1.0, 9));
        let f = d.sample(|x, _| x * x);
        let g = s.apply_complex(&f, |l| Complex64::new(0.0, -l).exp());
        let re = s.apply(&f, |l| l.cos());
        let im = s.apply(&f, |l| -l.sin());
        assert!(g.re().sub(&re).l2_norm() < 1e-12);
        assert!(g.im().sub(&im).l2_norm() < 1e-12);
    }

    #[test]
    fn multiplier_matrix_is_the_laplacian() {
        let (d, s) = setup(DomainDescriptor::square(5));
        let m = s.multiplier_matrix(|l| -l);
        let lap = dirichlet_laplacian(&d).to_dense();
        let err = (0..d.dof())
            .flat_map(|i| (0..d.dof()).map(move |j| (i, j)))
            .map(|(i, j)| (m[(i, j)] - lap[(i, j)]).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9 * s.lambda_max());
    }

    #[test]
    fn cap_is_enforced() {
        let d = GridDomain::build(&DomainDescriptor::interval(1.0, 20)).unwrap();
        let r = SpectralDecomposition::with_cap(&dirichlet_laplacian(&d), d.cell_volume(), 10);
        assert!(matches!(r, Err(Error::CapExceeded { dof: 20, cap: 10 })));
    }

    #[test]
    fn resolvent_norm_on_the_spectrum_is_an_error() {
        let (_, s) = setup(DomainDescriptor::interval(1.0, 3));
        let z = Complex64::new(-s.eigenvalues()[1], 0.0);
        assert!(s.resolvent_norm2(z, 1.0).is_err());
        let n = s.resolvent_norm2(Complex64::new(0.0, 2.0), 1.0).unwrap();
        assert!(n <= 0.5 + 1e-15);
    }
}
