//! Spectral oracle: multipliers, the homomorphism property and resolvent norms.

use num_complex::Complex64;
use lpheat::{dirichlet_laplacian, DomainDescriptor, GridDomain, SpectralDecomposition};

fn main() -> lpheat::Result<()> {
    let d = GridDomain::build(&DomainDescriptor::square_with_obstacle(20, 6))?;
    let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume())?;
    let f = d.sample(|x, y| x * (1.0 - x) * y);
    println!("dof {}, spectrum [{:.3}, {:.1}]", sd.dof(), sd.lambda_min(), sd.lambda_max());

    let t = 1.0 / sd.lambda_min();
    let heat = |l: f64| (-t * l).exp();
    let resolvent = |l: f64| 1.0 / (1.0 + l / sd.lambda_min());
    let two_steps = sd.apply(&sd.apply(&f, heat), resolvent);
    let one_step = sd.apply(&f, |l| heat(l) * resolvent(l));
    println!("m1(−Δ)m2(−Δ)f vs (m1m2)(−Δ)f: {:.2e}", two_steps.sub(&one_step).l2_norm() / f.l2_norm());

    let back = sd.synthesize(sd.coefficients(&f).as_ref(), 1).remove(0);
    println!("reconstruction error: {:.2e}", back.sub(&f).l2_norm() / f.l2_norm());

    for theta in [0.5, 0.75, 0.95] {
        let z = Complex64::from_polar(10.0 * sd.lambda_min(), theta * std::f64::consts::PI);
        let n = sd.resolvent_norm2(z, 1.0)?;
        println!("θ = {theta}π: ‖(z − Δ)^-1‖₂·|Im z| = {:.6}", n * z.im.abs());
    }
    Ok(())
}
