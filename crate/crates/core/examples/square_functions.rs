//! Littlewood–Paley square functions, dyadic Besov sums and the Rademacher chain.

use lpheat::heat::{HeatFlow, Localizer, TimeGrid};
use lpheat::square::{
    besov_continuous, besov_dyadic, k_range_for, lp_square_function, psi_squared_envelope, rademacher_equivalence, rademacher_samples,
};
use lpheat::symbol::{make_dyadic_bump, DyadicSymbolFamily};
use lpheat::{dirichlet_laplacian, DomainDescriptor, GridDomain, SpectralDecomposition};

fn main() -> lpheat::Result<()> {
    let d = GridDomain::build(&DomainDescriptor::square(24))?;
    let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume())?;
    let hf = HeatFlow::new(&d, &sd)?;
    let family = DyadicSymbolFamily::covering(make_dyadic_bump(1.0, 6)?, sd.lambda_min(), sd.lambda_max())?;
    let f = d.sample(|x, y| (-((x - 0.4).powi(2) + (y - 0.6).powi(2)) / 0.01).exp());

    let (lo, hi) = psi_squared_envelope(&sd, &family);
    println!("Σ_j Ψ_j² on the spectrum ∈ [{lo:.4}, {hi:.4}]");
    let sf = lp_square_function(&sd, &family, &f);
    for p in [1.5, 2.0, 3.0, 4.0] {
        println!("p = {p}: ‖f‖_p / ‖S f‖_p = {:.4}", f.lp_norm(p)? / sf.values.lp_norm(p)?);
    }

    let grid = TimeGrid::identity_grid(&sd);
    for p in [2.0, 4.0] {
        let cont = besov_continuous(&hf, &f, p, &grid, Localizer::Gradient)?.value;
        let dy = besov_dyadic(&hf, &f, p, k_range_for(&grid), Localizer::Gradient)?;
        println!("p = {p}: continuous²/dyadic² = {:.4}", (cont / dy).powi(2));
    }

    let samples = rademacher_samples((family.j_max - family.j_min + 1) as u32);
    let r = rademacher_equivalence(&sd, &family, &f, 4.0, &samples)?;
    println!("Rademacher average at p = 4: {:.4} vs square function {:.4} vs ‖f‖ {:.4}", r.aggregate, r.square_norm, r.f_norm);
    Ok(())
}
