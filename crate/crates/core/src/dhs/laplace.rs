use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::spectral::SpectralDecomposition;

/// Log-spaced nodes in `ρ` for `∫₀^∞ … dρ`, trapezoid in `ln ρ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayGrid {
    pub rho_min: f64,
    pub rho_max: f64,
    pub du: f64,
}

impl RayGrid {
    /// Grid adapted to decay rates between `slow` and `fast`: the head `[0, ρ_min]` and
    /// tail `[ρ_max, ∞)` both fall below `tol` relative to `1/fast` and `1/slow`.
    pub fn adapted(slow: f64, fast: f64, tol: f64) -> Self {
        RayGrid { rho_min: tol / fast, rho_max: (1.0 / tol).ln() / slow, du: 0.02 }
    }

    fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let span = (self.rho_max / self.rho_min).ln();
        let n = (span / self.du).ceil().max(1.0) as usize;
        let du = span / n as f64;
        (0..=n).map(move |k| {
            let rho = self.rho_min * (du * k as f64).exp();
            let end = if k == 0 || k == n { 0.5 } else { 1.0 };
            (rho, end * du * rho)
        })
    }
}

/// `(z − Δ)^{−1} f = ∫₀^∞ e^{−ρe^{iφ}z} S(ρe^{iφ}) f · e^{iφ} dρ` for `z = r e^{iθ}`.
///
/// Requires `|φ| < π/2` (the semigroup decays along the ray) and `|θ + φ| < π/2`.
pub fn laplace_resolvent(
    sd: &SpectralDecomposition,
    z: Complex64,
    phi: f64,
    f: &Field,
    grid: Option<RayGrid>,
) -> Result<Field<Complex64>> {
    let theta = z.arg();
    if z.norm() == 0.0 {
        return Err(Error::invalid("z = 0"));
    }
    if (theta.abs() - std::f64::consts::PI).abs() < 1e-15 {
        return Err(Error::AngleCondition("θ = π lies on the spectrum ray".into()));
    }
    if phi.abs() >= FRAC_PI_2 || (theta + phi).abs() >= FRAC_PI_2 {
        return Err(Error::AngleCondition(format!("need |φ| < π/2 and 2|θ+φ| < π, got θ = {theta}, φ = {phi}")));
    }
    let ray = Complex64::from_polar(1.0, phi);
    // decay rate along the ray is Re(e^{iφ}(z + λ)) ≥ r cos(θ+φ) + λ cos φ
    let slow = z.norm() * (theta + phi).cos() + sd.lambda_min() * phi.cos();
    let fast = (z.norm() + sd.lambda_max()) * 1.0;
    let grid = grid.unwrap_or_else(|| RayGrid::adapted(slow, fast, 1e-12));
    let nodes: Vec<(f64, f64)> = grid.nodes().collect();
    Ok(sd.apply_complex(f, |l| {
        let rate = ray * (z + l);
        nodes.iter().map(|&(rho, w)| (-rate * rho).exp() * w).sum::<Complex64>() * ray
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dirichlet_laplacian, DomainDescriptor, GridDomain};
    use std::f64::consts::PI;

    fn check(z: Complex64, phi: f64, tol: f64) {
        let d = GridDomain::build(&DomainDescriptor::interval(1.0, 50)).unwrap();
        let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume()).unwrap();
        let f = d.sample(|x, _| x.sin() + 1.0);
        let got = laplace_resolvent(&sd, z, phi, &f, None).unwrap();
        let want = sd.apply_complex(&f, |l| 1.0 / (z + l));
        let err = got.sub(&want).l2_norm() / want.l2_norm();
        assert!(err < tol, "z={z}, φ={phi}: {err}");
    }

    #[test]
    fn positive_real_point() {
        check(Complex64::new(1.0, 0.0), 0.0, 1e-6);
    }

    #[test]
    fn rotated_ray() {
        check(Complex64::from_polar(1.0, 3.0 * PI / 4.0), -3.0 * PI / 8.0, 1e-5);
    }

    #[test]
    fn angle_conditions() {
        let d = GridDomain::build(&DomainDescriptor::interval(1.0, 5)).unwrap();
        let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume()).unwrap();
        let f = d.ones();
        assert!(laplace_resolvent(&sd, Complex64::new(-1.0, 0.0), 0.0, &f, None).is_err());
        assert!(laplace_resolvent(&sd, Complex64::from_polar(1.0, 3.0 * PI / 4.0), -PI / 4.0, &f, None).is_err());
        assert!(laplace_resolvent(&sd, Complex64::new(1.0, 0.0), PI / 2.0, &f, None).is_err());
    }
}
