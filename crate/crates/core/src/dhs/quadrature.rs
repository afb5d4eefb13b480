use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::sparse::SparseOperator;
use crate::spectral::SpectralDecomposition;
use crate::symbol::Symbol;

use super::extension::AlmostAnalyticExtension;
use super::resolvent::ResolventSolver;

/// Tensor grid for the `∂̄` integral: uniform in `x` over the symbol support,
/// geometric in `y` from `y_min_rel·δ⟨x⟩` to `y_max_rel·δ⟨x⟩` where `δ⟨x⟩` is the cutoff height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DhsQuadrature {
    pub dx: f64,
    /// Step in `ln y`.
    pub dv: f64,
    #[serde(default = "default_y_min_rel")]
    pub y_min_rel: f64,
    #[serde(default = "default_y_max_rel")]
    pub y_max_rel: f64,
}

fn default_y_min_rel() -> f64 {
    1e-4
}

fn default_y_max_rel() -> f64 {
    2.0
}

impl DhsQuadrature {
    pub fn new(dx: f64, dv: f64) -> Self {
        DhsQuadrature { dx, dv, y_min_rel: default_y_min_rel(), y_max_rel: default_y_max_rel() }
    }

    /// Both steps divided by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        DhsQuadrature { dx: self.dx / factor, dv: self.dv / factor, ..*self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0 && self.dv > 0.0) {
            return Err(Error::invalid("quadrature steps must be positive"));
        }
        if !(self.y_min_rel > 0.0) {
            return Err(Error::invalid("the y grid must stay away from the real axis"));
        }
        if !(self.y_max_rel > self.y_min_rel) {
            return Err(Error::invalid("empty y range"));
        }
        Ok(())
    }

    /// Interior `x` nodes over `(lo, hi)` with their common weight.
    fn x_nodes(&self, lo: f64, hi: f64) -> (Vec<f64>, f64) {
        let n = ((hi - lo) / self.dx).ceil().max(2.0) as usize;
        let w = (hi - lo) / n as f64;
        ((1..n).map(|k| lo + k as f64 * w).collect(), w)
    }

    /// `(y, weight)` pairs for the trapezoid rule in `ln y`.
    fn y_nodes(&self, b: f64) -> Vec<(f64, f64)> {
        let (lo, hi) = (self.y_min_rel * b, self.y_max_rel * b);
        let n = ((hi / lo).ln() / self.dv).ceil().max(1.0) as usize;
        let dv = (hi / lo).ln() / n as f64;
        (0..=n)
            .map(|j| {
                let y = lo * (dv * j as f64).exp();
                let end = if j == 0 || j == n { 0.5 } else { 1.0 };
                (y, end * dv * y)
            })
            .collect()
    }

    pub fn node_count<S: Symbol>(&self, ext: &AlmostAnalyticExtension<S>) -> usize {
        let Some((lo, hi)) = ext.support() else { return 0 };
        let (xs, _) = self.x_nodes(lo, hi);
        xs.iter().map(|&x| self.y_nodes(ext.cutoff_height(x)).len()).sum()
    }
}

/// `Ψ(−s·A) f ≈ −(1/π) ∫ ∂̄Ψ̃(z) (z + s·A)^{−1} f dx dy`, using conjugate symmetry for the lower half-plane.
pub fn dhs_apply<S: Symbol>(
    ext: &AlmostAnalyticExtension<S>,
    op: &SparseOperator,
    scale: f64,
    f: &Field,
    quad: &DhsQuadrature,
) -> Result<Field> {
    let half = integrate(ext, op, scale, f, quad, true)?;
    Ok(half.re())
}

/// Same integral over both half-planes without the symmetry shortcut; the imaginary part measures asymmetry.
pub fn dhs_apply_full<S: Symbol>(
    ext: &AlmostAnalyticExtension<S>,
    op: &SparseOperator,
    scale: f64,
    f: &Field,
    quad: &DhsQuadrature,
) -> Result<Field<Complex64>> {
    integrate(ext, op, scale, f, quad, false)
}

fn integrate<S: Symbol>(
    ext: &AlmostAnalyticExtension<S>,
    op: &SparseOperator,
    scale: f64,
    f: &Field,
    quad: &DhsQuadrature,
    symmetric: bool,
) -> Result<Field<Complex64>> {
    quad.validate()?;
    if f.points() != op.rows() {
        return Err(Error::invalid("field does not match the operator"));
    }
    let solver = ResolventSolver::new(op, scale)?;
    let ncomp = f.components();
    let comps: Vec<Vec<Complex64>> = f.to_complex().split_components();
    let len = f.values().len();
    let Some((lo, hi)) = ext.support() else {
        return Err(Error::invalid("the extension needs a compactly supported symbol"));
    };
    if hi <= lo {
        return Ok(Field::zeros(f.points(), ncomp, f.cell_volume()));
    }
    let (xs, wx) = quad.x_nodes(lo, hi);
    let columns: Vec<Vec<Complex64>> = xs
        .par_iter()
        .map(|&x| -> Result<Vec<Complex64>> {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            let signs: &[f64] = if symmetric { &[1.0] } else { &[1.0, -1.0] };
            for (y, wy) in quad.y_nodes(ext.cutoff_height(x)) {
                for &sign in signs {
                    let z = Complex64::new(x, sign * y);
                    let d = ext.dbar(z);
                    if d == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let shift = solver.factor(z)?;
                    let c = d * wy;
                    for (l, comp) in comps.iter().enumerate() {
                        let u = shift.solve(comp)?;
                        for (p, v) in u.into_iter().enumerate() {
                            acc[p * ncomp + l] += c * v;
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let factor = if symmetric { -2.0 / std::f64::consts::PI } else { -1.0 / std::f64::consts::PI } * wx;
    let mut total = vec![Complex64::new(0.0, 0.0); len];
    for col in &columns {
        for (t, v) in total.iter_mut().zip(col) {
            *t += v;
        }
    }
    total.iter_mut().for_each(|v| *v *= factor);
    Field::new(total, ncomp, f.cell_volume())
}

/// Relative operator error `max_i |g(λ_i) − Ψ(sλ_i)| / max_i |Ψ(sλ_i)|`, where `g` is the
/// scalar function the quadrature realises; read off from a single probe `Σ_i v_i`.
pub fn dhs_operator_error<S: Symbol>(
    ext: &AlmostAnalyticExtension<S>,
    sd: &SpectralDecomposition,
    op: &SparseOperator,
    scale: f64,
    quad: &DhsQuadrature,
) -> Result<f64> {
    let u = sd.vectors();
    let n = sd.dof();
    let probe = Field::scalar((0..n).map(|x| (0..n).map(|i| u[(x, i)]).sum()).collect(), sd.cell_volume());
    let out = dhs_apply(ext, op, scale, &probe, quad)?;
    let coeffs = sd.coefficients(&out);
    let exact: Vec<f64> = sd.eigenvalues().iter().map(|&l| ext.symbol().value(scale * l)).collect();
    let top = exact.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if top == 0.0 {
        return Err(Error::invalid("the symbol vanishes on the spectrum"));
    }
    let worst = (0..n).map(|i| (coeffs[(i, 0)] - exact[i]).abs()).fold(0.0, f64::max);
    Ok(worst / top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dhs::make_extension;
    use crate::grid::{dirichlet_laplacian, DomainDescriptor, GridDomain};
    use crate::symbol::make_dyadic_bump;

    fn setup(cells: usize) -> (GridDomain, SparseOperator, SpectralDecomposition) {
        let d = GridDomain::build(&DomainDescriptor::interval(1.0, cells)).unwrap();
        let lap = dirichlet_laplacian(&d);
        let sd = SpectralDecomposition::new(&lap, d.cell_volume()).unwrap();
        (d, lap, sd)
    }

    #[test]
    fn scalar_case_reproduces_the_bump() {
        let (d, lap, sd) = setup(40);
        let ext = make_extension(make_dyadic_bump(1.0, 6).unwrap(), 4).unwrap();
        let s = 1.0 / sd.eigenvalues()[10];
        let f = d.sample(|x, _| x * (1.0 - x) + (9.0 * x).sin());
        let got = dhs_apply(&ext, &lap, s, &f, &DhsQuadrature::new(0.0025, 0.025)).unwrap();
        let want = sd.apply(&f, |l| ext.symbol().value(s * l));
        let err = got.sub(&want).l2_norm() / f.l2_norm();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn support_off_the_spectrum_gives_zero() {
        let (d, lap, sd) = setup(30);
        let ext = make_extension(make_dyadic_bump(1.0, 6).unwrap(), 4).unwrap();
        // s·λ_max < 1/4, so the spectrum misses [1/4, 4]
        let s = 0.2 / sd.lambda_max();
        let f = d.sample(|x, _| 1.0 + x);
        let got = dhs_apply(&ext, &lap, s, &f, &DhsQuadrature::new(0.0025, 0.025)).unwrap();
        assert!(got.l2_norm() <= 1e-6 * f.l2_norm());
    }

    #[test]
    fn full_plane_has_small_imaginary_part() {
        let (d, lap, sd) = setup(25);
        let ext = make_extension(make_dyadic_bump(1.0, 6).unwrap(), 3).unwrap();
        let s = 1.0 / sd.eigenvalues()[5];
        let f = d.sample(|x, _| (3.0 * x).cos());
        let q = DhsQuadrature::new(0.05, 0.1);
        let full = dhs_apply_full(&ext, &lap, s, &f, &q).unwrap();
        let half = dhs_apply(&ext, &lap, s, &f, &q).unwrap();
        assert!(full.im().l2_norm() <= 1e-8 * f.l2_norm());
        assert!(full.re().sub(&half).l2_norm() <= 1e-10 * f.l2_norm());
    }

    #[test]
    fn rejects_grid_touching_the_axis() {
        let (d, lap, _) = setup(5);
        let ext = make_extension(make_dyadic_bump(1.0, 6).unwrap(), 3).unwrap();
        let q = DhsQuadrature { y_min_rel: 0.0, ..DhsQuadrature::new(0.1, 0.1) };
        assert!(dhs_apply(&ext, &lap, 1.0, &d.ones(), &q).is_err());
    }
}
