//! Induced `L^p → L^p` norms of linear maps on (possibly vector-valued) grid functions.
//!
//! Both sides carry the same cell weight, which cancels in the ratio, so all
//! norms here are unweighted. Vectors are point-major with a fixed number of
//! components per point and the pointwise modulus is Euclidean.

use faer::MatRef;
use num_complex::Complex64;

use crate::error::{Error, Result};

fn moduli(v: &[Complex64], components: usize) -> impl Iterator<Item = f64> + '_ {
    v.chunks_exact(components).map(|c| c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
}

pub fn vector_norm(v: &[Complex64], components: usize, p: f64) -> f64 {
    if p.is_infinite() {
        return moduli(v, components).fold(0.0, f64::max);
    }
    let top = moduli(v, components).fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    top * moduli(v, components).map(|m| (m / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Norming functional of `v` in the dual space: `‖d‖_q = 1` and `Re⟨d, v⟩ = ‖v‖_p`.
pub fn dual_vector(v: &[Complex64], components: usize, p: f64) -> Vec<Complex64> {
    let norm = vector_norm(v, components, p);
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    if norm == 0.0 {
        return out;
    }
    let mods: Vec<f64> = moduli(v, components).collect();
    if p.is_infinite() {
        let arg = mods.iter().enumerate().fold(0, |b, (i, &m)| if m > mods[b] { i } else { b });
        for k in 0..components {
            out[arg * components + k] = v[arg * components + k] / mods[arg];
        }
        return out;
    }
    for (x, &m) in mods.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let w = (m / norm).powf(p - 1.0) / m;
        for k in 0..components {
            out[x * components + k] = v[x * components + k] * w;
        }
    }
    out
}

fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Power iteration for `‖A‖_{p→p}`; every iterate is a valid lower bound, the best one is returned.
pub struct PowerMethod {
    pub p: f64,
    pub in_components: usize,
    pub out_components: usize,
    pub max_iter: usize,
}

impl PowerMethod {
    pub fn estimate(
        &self,
        apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
        adjoint: impl Fn(&[Complex64]) -> Vec<Complex64>,
        seeds: &[Vec<Complex64>],
    ) -> Result<f64> {
        let p = self.p;
        if !(p >= 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        let q = conjugate_exponent(p);
        let mut best: f64 = 0.0;
        for seed in seeds {
            let n0 = vector_norm(seed, self.in_components, p);
            if n0 == 0.0 {
                continue;
            }
            let mut x: Vec<Complex64> = seed.iter().map(|v| v / n0).collect();
            for _ in 0..self.max_iter {
                let y = apply(&x);
                let gamma = vector_norm(&y, self.out_components, p);
                best = best.max(gamma);
                if gamma == 0.0 {
                    break;
                }
                let z = adjoint(&dual_vector(&y, self.out_components, p));
                let zq = vector_norm(&z, self.in_components, q);
                let zx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
                if zq <= zx * (1.0 + 1e-12) {
                    break;
                }
                // norming vector of z in L^q is the next unit vector in L^p
                x = dual_vector(&z, self.in_components, q);
            }
        }
        Ok(best)
    }
}

/// Exact `‖M‖_{1→1}` (max column sum) of the complex matrix `re + i·im`.
pub fn matrix_norm_1(re: MatRef<'_, f64>, im: MatRef<'_, f64>) -> f64 {
    (0..re.ncols())
        .map(|j| (0..re.nrows()).map(|i| re[(i, j)].hypot(im[(i, j)])).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Exact `‖M‖_{∞→∞}` (max row sum) of the complex matrix `re + i·im`.
pub fn matrix_norm_inf(re: MatRef<'_, f64>, im: MatRef<'_, f64>) -> f64 {
    (0..re.nrows())
        .map(|i| (0..re.ncols()).map(|j| re[(i, j)].hypot(im[(i, j)])).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    fn c(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn dual_pairs_to_the_norm() {
        let v = c(&[3.0, -1.0, 0.0, 2.0]);
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let d = dual_vector(&v, 1, p);
            let q = conjugate_exponent(p);
            assert!((vector_norm(&d, 1, q) - 1.0).abs() < 1e-12, "p={p}");
            let pair: f64 = d.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum();
            assert!((pair - vector_norm(&v, 1, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn power_method_recovers_matrix_norms() {
        let a = Mat::from_fn(3, 3, |i, j| [[1.0, -2.0, 0.5], [0.0, 3.0, 1.0], [2.0, 1.0, -1.0]][i][j]);
        let zero = Mat::<f64>::zeros(3, 3);
        let apply = |x: &[Complex64]| (0..3).map(|i| (0..3).map(|j| x[j] * a[(i, j)]).sum()).collect();
        let adj = |x: &[Complex64]| (0..3).map(|j| (0..3).map(|i| x[i] * a[(i, j)]).sum()).collect();
        let seeds: Vec<Vec<Complex64>> = (0..3).map(|k| c(&[1.0 + k as f64, -0.5, 0.25 * k as f64])).collect();
        let est1 = PowerMethod { p: 1.0, in_components: 1, out_components: 1, max_iter: 20 }
            .estimate(apply, adj, &seeds)
            .unwrap();
        assert!((est1 - matrix_norm_1(a.as_ref(), zero.as_ref())).abs() < 1e-12);
        let est2 = PowerMethod { p: 2.0, in_components: 1, out_components: 1, max_iter: 200 }
            .estimate(apply, adj, &seeds)
            .unwrap();
        let sv = a.singular_values().unwrap();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        assert!((est2 - top).abs() < 1e-6 * top);
    }

    #[test]
    fn vector_valued_norm() {
        let v = c(&[3.0, 4.0, 0.0, 0.0]);
        assert_eq!(vector_norm(&v, 2, 1.0), 5.0);
        assert_eq!(vector_norm(&v, 2, f64::INFINITY), 5.0);
    }
}
