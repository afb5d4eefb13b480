//! Grid functions, scalar or Hilbert-valued, with cell-weighted L^p norms.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entry type of a [`Field`] or a banded system: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + Default
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    fn from_real(x: f64) -> Self;
    fn modulus_sq(self) -> f64;
    fn scale(self, s: f64) -> Self;

    fn modulus(self) -> f64 {
        self.modulus_sq().sqrt()
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn modulus_sq(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn modulus_sq(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// Values over a set of grid points, `components` values per point.
///
/// Layout is point-major: component `l` of point `x` sits at
/// `values[x * components + l]`. Every point carries the weight
/// `cell_volume = h^n`, so norms and inner products are Riemann sums.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T: Scalar = f64> {
    values: Vec<T>,
    components: usize,
    cell_volume: f64,
}

impl<T: Scalar> Field<T> {
    pub fn new(values: Vec<T>, components: usize, cell_volume: f64) -> Result<Self> {
        if components == 0 {
            return Err(Error::invalid("a field needs at least one component"));
        }
        if !values.len().is_multiple_of(components) {
            return Err(Error::invalid(format!(
                "{} values do not split into {components} components",
                values.len()
            )));
        }
        if !(cell_volume > 0.0) {
            return Err(Error::invalid("cell volume must be positive"));
        }
        Ok(Field { values, components, cell_volume })
    }

    pub fn scalar(values: Vec<T>, cell_volume: f64) -> Self {
        assert!(cell_volume > 0.0, "cell volume must be positive");
        Field { values, components: 1, cell_volume }
    }

    pub fn zeros(points: usize, components: usize, cell_volume: f64) -> Self {
        assert!(components > 0 && cell_volume > 0.0);
        Field { values: vec![T::default(); points * components], components, cell_volume }
    }

    /// Stacks scalar component vectors of equal length into one field.
    pub fn from_components(parts: &[Vec<T>], cell_volume: f64) -> Result<Self> {
        let n = parts.len();
        if n == 0 {
            return Err(Error::invalid("no components given"));
        }
        let points = parts[0].len();
        if parts.iter().any(|p| p.len() != points) {
            return Err(Error::invalid("components differ in length"));
        }
        let mut values = Vec::with_capacity(points * n);
        for x in 0..points {
            for part in parts {
                values.push(part[x]);
            }
        }
        Field::new(values, n, cell_volume)
    }

    pub fn points(&self) -> usize {
        self.values.len() / self.components
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, point: usize) -> &[T] {
        &self.values[point * self.components..(point + 1) * self.components]
    }

    pub fn component(&self, l: usize) -> Vec<T> {
        assert!(l < self.components);
        self.values.iter().skip(l).step_by(self.components).copied().collect()
    }

    pub fn split_components(&self) -> Vec<Vec<T>> {
        (0..self.components).map(|l| self.component(l)).collect()
    }

    /// Pointwise modulus: Euclidean norm over components (complex modulus per entry).
    pub fn modulus(&self) -> Vec<f64> {
        self.values
            .chunks_exact(self.components)
            .map(|c| c.iter().map(|v| v.modulus_sq()).sum::<f64>().sqrt())
            .collect()
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.modulus_sq()).sum::<f64>() * self.cell_volume).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v.scale(s))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field {
            values: self.values.iter().map(|&v| f(v)).collect(),
            components: self.components,
            cell_volume: self.cell_volume,
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.values.len() == other.values.len() && self.components == other.components
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert!(self.same_shape(other), "field shape mismatch");
        Field {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect(),
            components: self.components,
            cell_volume: self.cell_volume,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.same_shape(other), "field shape mismatch");
        Field {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect(),
            components: self.components,
            cell_volume: self.cell_volume,
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert!(self.same_shape(other), "field shape mismatch");
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += b.scale(s);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.modulus_sq() == 0.0)
    }
}

impl Field<f64> {
    /// Weighted inner product `Σ f·g h^n` summed over all components.
    pub fn dot(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "field shape mismatch");
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.cell_volume
    }

    pub fn to_complex(&self) -> Field<Complex64> {
        self.map(Complex64::from_real)
    }
}

impl Field<Complex64> {
    pub fn re(&self) -> Field<f64> {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> Field<f64> {
        self.map(|v| v.im)
    }
}

/// `(Σ |f(x)|^p h^n)^{1/p}`, or `max |f(x)|` for `p = ∞`.
pub fn lp_norm<T: Scalar>(f: &Field<T>, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let modulus = f.modulus();
    if p.is_infinite() {
        return Ok(modulus.iter().fold(0.0, |m, &v| m.max(v)));
    }
    if p == 2.0 {
        return Ok((modulus.iter().map(|v| v * v).sum::<f64>() * f.cell_volume).sqrt());
    }
    // scale by the max to keep |f|^p in range for large p
    let top = modulus.iter().fold(0.0, |m: f64, &v| m.max(v));
    if top == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = modulus.iter().map(|v| (v / top).powf(p)).sum();
    Ok(top * (sum * f.cell_volume).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_indicator_norm() {
        // h = 0.5, n = 2: weight h^2 = 0.25, ||1_x||_2 = 0.5
        let mut v = vec![0.0; 9];
        v[4] = 1.0;
        let f = Field::scalar(v, 0.25);
        assert!((f.lp_norm(2.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sup_norm() {
        let f = Field::scalar(vec![1.0, -3.0, 2.0], 1.0);
        assert_eq!(f.lp_norm(f64::INFINITY).unwrap(), 3.0);
    }

    #[test]
    fn two_component_modulus() {
        let f = Field::new(vec![3.0, 4.0], 2, 1.0).unwrap();
        assert_eq!(f.modulus(), vec![5.0]);
        assert!((f.lp_norm(3.0).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_small_exponent() {
        let f = Field::scalar(vec![1.0], 1.0);
        assert!(matches!(f.lp_norm(0.5), Err(Error::InvalidExponent(_))));
        assert!(f.lp_norm(f64::NAN).is_err());
    }

    #[test]
    fn complex_modulus() {
        let f = Field::scalar(vec![Complex64::new(0.0, -2.0)], 1.0);
        assert_eq!(f.lp_norm(1.0).unwrap(), 2.0);
    }

    #[test]
    fn components_round_trip() {
        let f = Field::from_components(&[vec![1.0, 2.0], vec![3.0, 4.0]], 1.0).unwrap();
        assert_eq!(f.values(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(f.component(1), vec![3.0, 4.0]);
    }
}
