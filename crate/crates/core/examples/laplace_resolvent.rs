//! Resolvents from the heat semigroup along rotated rays, and L^p growth of the resolvent.

use std::f64::consts::PI;

use num_complex::Complex64;
use lpheat::dhs::{laplace_resolvent, resolvent_growth_exponent};
use lpheat::{dirichlet_laplacian, DomainDescriptor, GridDomain, SpectralDecomposition};

fn main() -> lpheat::Result<()> {
    let d = GridDomain::build(&DomainDescriptor::square(14))?;
    let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume())?;
    let f = d.sample(|x, y| (2.0 * x).exp() * y);

    for (theta, phi) in [(0.0, 0.0), (0.6 * PI, -0.3 * PI), (0.9 * PI, -0.45 * PI)] {
        let z = Complex64::from_polar(2.0 * sd.lambda_min(), theta);
        let got = laplace_resolvent(&sd, z, phi, &f, None)?;
        let want = sd.apply_complex(&f, |l| 1.0 / (z + l));
        println!("θ {:.2}π φ {:+.2}π: relative error {:.2e}", theta / PI, phi / PI, got.sub(&want).l2_norm() / want.l2_norm());
    }

    let thetas = [PI / 2.0, 3.0 * PI / 4.0, 7.0 * PI / 8.0, 15.0 * PI / 16.0];
    let radii: Vec<f64> = (0..5).map(|k| sd.lambda_min() * 4f64.powi(k)).collect();
    for p in [1.0, 2.0, f64::INFINITY] {
        let fit = resolvent_growth_exponent(&sd, 1.0, p, &thetas, &radii, &[])?;
        println!("p = {p}: α̂ = {:+.3} ± {:.3}, envelope c = {:.3}", fit.alpha, fit.alpha_stderr, fit.envelope_c);
    }
    Ok(())
}
