//! Builds the three reference domain shapes and checks the discrete Green identity.

use lpheat::{dirichlet_laplacian, gradient, neumann_laplacian, DomainDescriptor, GridDomain, SpectralDecomposition};

fn main() -> lpheat::Result<()> {
    for desc in [
        DomainDescriptor::interval(1.0, 100),
        DomainDescriptor::square(24),
        DomainDescriptor::square_with_obstacle(24, 8),
    ] {
        let d = GridDomain::build(&desc)?;
        let lap = dirichlet_laplacian(&d);
        let grad = gradient(&d);
        let f = d.sample(|x, y| (5.0 * x).sin() * (1.0 + y) + x * y);
        // ∇ᵀ∇ = −Δ_D on the nose
        let defect = grad.apply_transpose(&grad.apply(&f)).add(&lap.apply(&f)).l2_norm() / f.l2_norm();
        let sd = SpectralDecomposition::new(&lap, d.cell_volume())?;
        let neumann = SpectralDecomposition::new(&neumann_laplacian(&d), d.cell_volume())?;
        println!(
            "{:<24} dof {:>4}  h {:.4}  nnz {:>5}  λ_min {:>10.4}  λ_max {:>10.1}  Neumann bottom {:+.1e}  ‖∇ᵀ∇f + Δf‖/‖f‖ {:.1e}",
            desc.label(),
            d.dof(),
            d.spacing(),
            lap.nnz(),
            sd.lambda_min(),
            sd.lambda_max(),
            neumann.eigenvalues()[0],
            defect
        );
    }
    Ok(())
}
