//! Ψ(s·(−Δ)) through the ∂̄ integral against resolvents, refined toward the spectral oracle.

use lpheat::dhs::{dbar_flatness, dhs_apply, dhs_operator_error, make_extension, DhsQuadrature};
use lpheat::symbol::{make_dyadic_bump, Symbol};
use lpheat::{dirichlet_laplacian, DomainDescriptor, GridDomain, SpectralDecomposition};

fn main() -> lpheat::Result<()> {
    let d = GridDomain::build(&DomainDescriptor::interval(1.0, 120))?;
    let lap = dirichlet_laplacian(&d);
    let sd = SpectralDecomposition::new(&lap, d.cell_volume())?;
    let bump = make_dyadic_bump(1.0, 6)?;
    let ext = make_extension(bump, 4)?;
    let s = 4f64.powi(-6);

    for q in [DhsQuadrature::new(0.01, 0.1), DhsQuadrature::new(0.005, 0.05), DhsQuadrature::new(0.0025, 0.025)] {
        let err = dhs_operator_error(&ext, &sd, &lap, s, &q)?;
        println!("dx {:<7} dv {:<6} nodes {:>6}  operator error {:.3e}", q.dx, q.dv, q.node_count(&ext), err);
    }

    let f = d.sample(|x, _| (x * 40.0).sin() + (x * 9.0).cos());
    let via_dhs = dhs_apply(&ext, &lap, s, &f, &DhsQuadrature::new(0.0025, 0.025))?;
    let oracle = sd.apply(&f, |l| bump.value(s * l));
    println!("single field: relative error {:.3e}", via_dhs.sub(&oracle).l2_norm() / oracle.l2_norm());

    let ys: Vec<f64> = (0..=10).map(|i| 1e-3 * 100f64.powf(i as f64 / 10.0)).collect();
    for n in [2, 4] {
        let fit = dbar_flatness(&make_extension(bump, n)?, &ys, 400)?;
        println!("N = {n}: max|∂̄Ψ̃| ~ y^{:.3}", fit.slope);
    }
    Ok(())
}
