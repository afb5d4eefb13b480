//! Exact L² identities of the heat localizers and the factorization through Q*.

use lpheat::heat::{HeatFlow, KernelComparison, Localizer, TimeGrid};
use lpheat::square::besov_continuous;
use lpheat::{dirichlet_laplacian, DomainDescriptor, GridDomain, SpectralDecomposition};

fn main() -> lpheat::Result<()> {
    let d = GridDomain::build(&DomainDescriptor::square_with_obstacle(16, 4))?;
    let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume())?;
    let hf = HeatFlow::new(&d, &sd)?;
    let grid = TimeGrid::identity_grid(&sd);
    let f = d.sample(|x, y| ((x - 0.2).powi(2) + (y - 0.7).powi(2)).sqrt().min(0.3));
    let n2 = f.l2_norm().powi(2);

    let q = besov_continuous(&hf, &f, 2.0, &grid, Localizer::Gradient)?;
    let b = besov_continuous(&hf, &f, 2.0, &grid, Localizer::Time)?;
    println!("{} nodes on [{:.1e}, {:.1e}]", grid.len(), grid.t_min(), grid.t_max());
    println!("2∫‖Q_t f‖² dt/t  / ‖f‖² − 1 = {:+.2e}  (truncation ≤ {:.1e})", 2.0 * q.value.powi(2) / n2 - 1.0, q.truncation);
    println!("4∫‖tΔS(t)f‖² dt/t / ‖f‖² − 1 = {:+.2e}", 4.0 * b.value.powi(2) / n2 - 1.0);

    for t in [0.1 / sd.lambda_max(), 1.0 / sd.lambda_min()] {
        println!("factorization residual at t = {t:.2e}: {:.2e}", hf.factorization_residual(t, &f)?);
    }

    let cmp = KernelComparison::new(&d)?;
    let r = cmp.at(0.5 / sd.lambda_min(), d.dof() / 3, 1e-12)?;
    println!("kernel domination: max excess {:.1e}, max row sum {:.6}, dominated {}", r.max_excess, r.max_row_sum, r.dominated);
    Ok(())
}
