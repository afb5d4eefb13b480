use crate::error::{Error, Result};
use crate::quadrature::integrate;

use super::bump::Symbol;
use super::jet::Jet;

/// `Σ_{m≤N} ∫ |∂^m Ψ(x)| ⟨x⟩^{m−1} dx` over the support of `s`.
pub fn psi_norm_n(s: &dyn Symbol, n: usize) -> Result<f64> {
    psi_norm_with_tolerance(s, n, 1e-11)
}

/// Same as [`psi_norm_n`] with an explicit relative quadrature tolerance.
pub fn psi_norm_with_tolerance(s: &dyn Symbol, n: usize, rel_tol: f64) -> Result<f64> {
    if n > s.max_order() {
        return Err(Error::InsufficientDerivatives { needed: n, available: s.max_order() });
    }
    let (lo, hi) = s
        .support()
        .ok_or_else(|| Error::invalid("the symbol norm needs a compactly supported symbol"))?;
    if hi <= lo {
        return Ok(0.0);
    }
    let integrand = |x: f64| {
        let jet = s.jet(Jet::variable(x, n));
        let bracket = (1.0 + x * x).sqrt();
        (0..=n).map(|m| jet.derivative(m).abs() * bracket.powi(m as i32 - 1)).sum::<f64>()
    };
    // log-spaced panels keep the flat ends of the bump cheap
    let panels = 32;
    let ratio = (hi / lo).powf(1.0 / panels as f64);
    let total = (0..panels)
        .map(|i| {
            let a = lo * ratio.powi(i);
            let b = if i + 1 == panels { hi } else { a * ratio };
            integrate(integrand, a, b, 0.0, rel_tol)
        })
        .sum();
    Ok(total)
}

/// Log-spaced sample points `lo · (hi/lo)^{i/(count−1)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl LogGrid {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && count >= 2) {
            return Err(Error::invalid(format!("bad log grid [{lo}, {hi}] with {count} points")));
        }
        Ok(LogGrid { lo, hi, count })
    }

    /// `per_decade` points per factor of ten.
    pub fn with_density(lo: f64, hi: f64, per_decade: usize) -> Result<Self> {
        let count = ((hi / lo).log10() * per_decade as f64).ceil() as usize + 1;
        Self::new(lo, hi, count.max(2))
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.hi / self.lo).ln() / (self.count - 1) as f64;
        (0..self.count).map(move |i| self.lo * (step * i as f64).exp())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MikhlinEstimate {
    pub value: f64,
    pub at: f64,
    pub order: usize,
    pub grid: LogGrid,
}

/// `max_{ξ ∈ grid, k ≤ N} |ξ^k ∂^k m(ξ)|`, a lower bound for the continuum supremum.
pub fn mikhlin_seminorm(m: &dyn Symbol, n: usize, grid: LogGrid) -> Result<MikhlinEstimate> {
    if n > m.max_order() {
        return Err(Error::InsufficientDerivatives { needed: n, available: m.max_order() });
    }
    let mut best = MikhlinEstimate { value: 0.0, at: grid.lo, order: 0, grid };
    for xi in grid.points() {
        let jet = m.jet(Jet::variable(xi, n));
        for k in 0..=n {
            let v = (xi.powi(k as i32) * jet.derivative(k)).abs();
            if v > best.value {
                best = MikhlinEstimate { value: v, at: xi, order: k, grid };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::bump::{make_dyadic_bump, Constant, DyadicSymbolFamily, Log};
    use crate::symbol::rademacher::{randomized_symbol, Sign};

    fn grid(per_decade: usize) -> LogGrid {
        LogGrid::with_density(1e-4, 1e6, per_decade).unwrap()
    }

    #[test]
    fn zero_symbol_has_zero_norm() {
        assert_eq!(psi_norm_n(&Constant(0.0), 3).unwrap(), 0.0);
    }

    #[test]
    fn norm_zero_refinement_and_monotonicity() {
        let b = make_dyadic_bump(1.0, 6).unwrap();
        let coarse = psi_norm_with_tolerance(&b, 0, 1e-6).unwrap();
        let fine = psi_norm_with_tolerance(&b, 0, 1e-12).unwrap();
        assert!((coarse - fine).abs() < 1e-8);
        let n1 = psi_norm_n(&b, 1).unwrap();
        let n2 = psi_norm_n(&b, 2).unwrap();
        assert!(fine > 0.0 && n1 >= fine && n2 >= n1);
        assert!(psi_norm_n(&b, 7).is_err());
    }

    #[test]
    fn norm_zero_against_trapezoid() {
        // plain composite trapezoid on the analytic values as an independent oracle
        let b = make_dyadic_bump(1.0, 2).unwrap();
        let n = 400_000;
        let (lo, hi) = (0.25, 4.0);
        let h = (hi - lo) / n as f64;
        let trap: f64 = (0..=n)
            .map(|i| {
                let x = lo + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * b.value(x).abs() / (1.0 + x * x).sqrt()
            })
            .sum::<f64>()
            * h;
        assert!((psi_norm_n(&b, 0).unwrap() - trap).abs() < 1e-9);
    }

    #[test]
    fn constant_one() {
        let e = mikhlin_seminorm(&Constant(1.0), 3, grid(10)).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.order, 0);
    }

    #[test]
    fn bump_seminorm_is_stable_under_refinement() {
        let b = make_dyadic_bump(1.0, 4).unwrap();
        let c = mikhlin_seminorm(&b, 2, grid(200)).unwrap().value;
        let f = mikhlin_seminorm(&b, 2, grid(400)).unwrap().value;
        assert!(((c - f) / f).abs() < 0.05);
    }

    #[test]
    fn log_is_not_a_mikhlin_symbol() {
        let small = mikhlin_seminorm(&Log, 1, LogGrid::new(1e-2, 1e2, 50).unwrap()).unwrap().value;
        let large = mikhlin_seminorm(&Log, 1, LogGrid::new(1e-8, 1e8, 50).unwrap()).unwrap().value;
        assert!(large > 3.0 * small);
    }

    #[test]
    fn randomized_symbols_are_uniformly_mikhlin() {
        let b = make_dyadic_bump(1.0, 4).unwrap();
        let fam = DyadicSymbolFamily::new(b, -6, 6).unwrap();
        let reference = mikhlin_seminorm(&b, 2, grid(100)).unwrap().value;
        for i in 0..100 {
            let t = (i as f64 + 0.37) / 100.0;
            for sign in [Sign::Plus, Sign::Minus] {
                let m = randomized_symbol(t, &fam, sign).unwrap();
                let v = mikhlin_seminorm(&m, 2, grid(100)).unwrap().value;
                assert!(v <= 10.0 * reference, "t={t}: {v} vs {reference}");
            }
        }
    }
}
