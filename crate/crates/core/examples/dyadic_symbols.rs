//! The dyadic bump, its telescoping family, Mikhlin seminorms and Khintchine ratios.

use lpheat::symbol::{
    khintchine_check, make_dyadic_bump, mikhlin_seminorm, psi_norm_n, randomized_symbol, DyadicSymbolFamily, LogGrid, Sign, Symbol,
};

fn main() -> lpheat::Result<()> {
    let bump = make_dyadic_bump(1.0, 6)?;
    println!("support of Ψ: {:?}", bump.support());
    for n in 0..=4 {
        println!("‖Ψ‖_{n} = {:.4}", psi_norm_n(&bump, n)?);
    }

    let family = DyadicSymbolFamily::covering(bump, 10.0, 1e5)?;
    println!("family scales {:?}, covered range {:?}", family.scales(), family.covered_range());
    for lambda in [10.0, 123.0, 4.5e3, 9.9e4] {
        println!("  Σ_j Ψ_j({lambda}) = {:.15}", family.partition_sum(lambda));
    }

    let (lo, hi) = family.covered_range();
    for t in [0.1, 0.37, 0.8] {
        let m = randomized_symbol(t, &family, Sign::Plus)?;
        let est = mikhlin_seminorm(&m, 4, LogGrid::with_density(lo / 4.0, hi * 4.0, 200)?)?;
        println!("m+(t={t}) Mikhlin seminorm (order 4) ≈ {:.3e} at λ = {:.3e}", est.value, est.at);
    }

    for a in [vec![1.0], vec![1.0, 1.0], vec![3.0, -1.0, 0.5, 2.0, 0.1]] {
        let (r1, r1u) = khintchine_check(&a, 1.0)?;
        let (r4, r4u) = khintchine_check(&a, 4.0)?;
        println!("Khintchine {a:?}: p=1 ({r1:.4}, {r1u:.4})  p=4 ({r4:.4}, {r4u:.4})");
    }
    Ok(())
}
