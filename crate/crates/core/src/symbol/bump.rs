use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};

use super::jet::{Jet, JET_CAPACITY};

/// A real function on `(0, ∞)` that can be evaluated on jets.
pub trait Symbol: Send + Sync + Debug {
    fn jet(&self, x: Jet) -> Jet;

    /// Closed interval outside which the symbol and all its derivatives vanish.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }

    /// Highest derivative order the symbol promises.
    fn max_order(&self) -> usize {
        JET_CAPACITY - 1
    }

    fn value(&self, x: f64) -> f64 {
        self.jet(Jet::constant(x, 0)).value()
    }

    /// `∂^k m(x)` for `k = 0..=order`.
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if order > self.max_order() {
            return Err(Error::InsufficientDerivatives { needed: order, available: self.max_order() });
        }
        Ok(self.jet(Jet::variable(x, order)).derivatives())
    }
}

impl<S: Symbol + ?Sized> Symbol for &S {
    fn jet(&self, x: Jet) -> Jet {
        (**self).jet(x)
    }
    fn support(&self) -> Option<(f64, f64)> {
        (**self).support()
    }
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
}

impl<S: Symbol + ?Sized> Symbol for Arc<S> {
    fn jet(&self, x: Jet) -> Jet {
        (**self).jet(x)
    }
    fn support(&self) -> Option<(f64, f64)> {
        (**self).support()
    }
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
}

impl<S: Symbol + ?Sized> Symbol for Box<S> {
    fn jet(&self, x: Jet) -> Jet {
        (**self).jet(x)
    }
    fn support(&self) -> Option<(f64, f64)> {
        (**self).support()
    }
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
}

/// `exp(−1/x)` for `x > 0`, zero otherwise.
pub fn smooth_step(x: Jet) -> Jet {
    // beyond this the value and every stored derivative underflow
    if x.value() <= 1.0 / 700.0 {
        return x.lift(0.0);
    }
    (-x.recip()).exp()
}

/// Smooth transition equal to 1 on `(−∞, lo]` and 0 on `[hi, ∞)`.
pub fn transition(s: Jet, lo: f64, hi: f64) -> Jet {
    let v = s.value();
    if v <= lo {
        return s.lift(1.0);
    }
    if v >= hi {
        return s.lift(0.0);
    }
    let up = smooth_step(s.lift(hi) - s);
    let down = smooth_step(s.offset(-lo));
    up / (up + down)
}

/// `Ψ(λ) = χ(λ/a) − χ(4λ/a)` with `χ` the `[1, 4]` transition; supported on `[a/4, 4a]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicBump {
    a: f64,
    order: usize,
}

pub fn make_dyadic_bump(a: f64, order: usize) -> Result<DyadicBump> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::invalid(format!("bump anchor must be positive, got {a}")));
    }
    if order >= JET_CAPACITY {
        return Err(Error::InsufficientDerivatives { needed: order, available: JET_CAPACITY - 1 });
    }
    Ok(DyadicBump { a, order })
}

impl DyadicBump {
    pub fn anchor(&self) -> f64 {
        self.a
    }
}

impl Symbol for DyadicBump {
    fn jet(&self, x: Jet) -> Jet {
        let v = x.value();
        if v <= self.a / 4.0 || v >= 4.0 * self.a {
            return x.lift(0.0);
        }
        transition(x.scale(1.0 / self.a), 1.0, 4.0) - transition(x.scale(4.0 / self.a), 1.0, 4.0)
    }
    fn support(&self) -> Option<(f64, f64)> {
        Some((self.a / 4.0, 4.0 * self.a))
    }
    fn max_order(&self) -> usize {
        self.order
    }
}

/// `Ψ̃`: equal to 1 on `[a/4, 4a]` (the support of the bump) and supported on `[a/16, 16a]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    a: f64,
}

impl Plateau {
    pub fn new(a: f64) -> Result<Self> {
        make_dyadic_bump(a, 0)?;
        Ok(Plateau { a })
    }

    pub fn covering(bump: &DyadicBump) -> Self {
        Plateau { a: bump.a }
    }
}

impl Symbol for Plateau {
    fn jet(&self, x: Jet) -> Jet {
        let v = x.value();
        if v <= self.a / 16.0 || v >= 16.0 * self.a {
            return x.lift(0.0);
        }
        let upper = transition(x.scale(0.25 / self.a), 1.0, 4.0);
        let lower = x.lift(1.0) - transition(x.scale(16.0 / self.a), 1.0, 4.0);
        upper * lower
    }
    fn support(&self) -> Option<(f64, f64)> {
        Some((self.a / 16.0, 16.0 * self.a))
    }
}

/// `x ↦ inner(c·x)`.
#[derive(Clone, Debug)]
pub struct Scaled<S> {
    pub inner: S,
    pub factor: f64,
}

impl<S: Symbol> Symbol for Scaled<S> {
    fn jet(&self, x: Jet) -> Jet {
        self.inner.jet(x.scale(self.factor))
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.inner.support().map(|(lo, hi)| (lo / self.factor, hi / self.factor))
    }
    fn max_order(&self) -> usize {
        self.inner.max_order()
    }
}

#[derive(Clone, Debug)]
pub struct Product<A, B>(pub A, pub B);

impl<A: Symbol, B: Symbol> Symbol for Product<A, B> {
    fn jet(&self, x: Jet) -> Jet {
        self.0.jet(x) * self.1.jet(x)
    }
    fn support(&self) -> Option<(f64, f64)> {
        match (self.0.support(), self.1.support()) {
            (Some((a, b)), Some((c, d))) => Some((a.max(c), b.min(d).max(a.max(c)))),
            (s, None) | (None, s) => s,
        }
    }
    fn max_order(&self) -> usize {
        self.0.max_order().min(self.1.max_order())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant(pub f64);

impl Symbol for Constant {
    fn jet(&self, x: Jet) -> Jet {
        x.lift(self.0)
    }
    fn support(&self) -> Option<(f64, f64)> {
        (self.0 == 0.0).then_some((1.0, 1.0))
    }
}

/// `x^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Power(pub i32);

impl Symbol for Power {
    fn jet(&self, x: Jet) -> Jet {
        x.powi(self.0)
    }
}

/// `e^{c x}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponential(pub f64);

impl Symbol for Exponential {
    fn jet(&self, x: Jet) -> Jet {
        x.scale(self.0).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Log;

impl Symbol for Log {
    fn jet(&self, x: Jet) -> Jet {
        x.ln()
    }
}

/// `Ψ̆(λ) = Ψ̃(λ)/λ`.
pub fn psi_breve(bump: &DyadicBump) -> Product<Plateau, Power> {
    Product(Plateau::covering(bump), Power(-1))
}

/// `Ψ₁(λ) = Ψ̃(λ)·e^λ`.
pub fn psi_one(bump: &DyadicBump) -> Product<Plateau, Exponential> {
    Product(Plateau::covering(bump), Exponential(1.0))
}

/// The rescaled bumps `Ψ_j(λ) = Ψ(4^{−j}λ)` for `j_min ≤ j ≤ j_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicSymbolFamily {
    pub base: DyadicBump,
    pub j_min: i32,
    pub j_max: i32,
}

impl DyadicSymbolFamily {
    pub fn new(base: DyadicBump, j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::invalid(format!("empty scale range {j_min}..={j_max}")));
        }
        Ok(DyadicSymbolFamily { base, j_min, j_max })
    }

    /// Smallest family whose partition sum is exactly one on `[lo, hi]`.
    pub fn covering(base: DyadicBump, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::invalid(format!("cannot cover [{lo}, {hi}]")));
        }
        let a = base.anchor();
        let j_min = ((lo / a).ln() / 4f64.ln()).floor() as i32;
        let j_max = ((hi / a).ln() / 4f64.ln()).ceil() as i32;
        Self::new(base, j_min, j_max)
    }

    pub fn scales(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn member(&self, j: i32) -> Scaled<DyadicBump> {
        Scaled { inner: self.base, factor: 4f64.powi(-j) }
    }

    /// Interval on which `Σ_j Ψ_j = 1` exactly.
    pub fn covered_range(&self) -> (f64, f64) {
        let a = self.base.anchor();
        (4f64.powi(self.j_min) * a, 4f64.powi(self.j_max) * a)
    }

    pub fn partition_sum(&self, lambda: f64) -> f64 {
        self.scales().map(|j| self.member(j).value(lambda)).sum()
    }

    /// Scales whose support meets `[lo, hi]`.
    pub fn active(&self, lo: f64, hi: f64) -> Vec<i32> {
        self.scales()
            .filter(|&j| {
                let (s, e) = self.member(j).support().unwrap();
                e > lo && s < hi
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent scalar implementation used as an oracle.
    fn psi_plain(a: f64, x: f64) -> f64 {
        let g = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
        let chi = |s: f64| {
            if s <= 1.0 {
                1.0
            } else if s >= 4.0 {
                0.0
            } else {
                g(4.0 - s) / (g(4.0 - s) + g(s - 1.0))
            }
        };
        chi(x / a) - chi(4.0 * x / a)
    }

    #[test]
    fn values_match_plain_formula() {
        let b = make_dyadic_bump(1.3, 8).unwrap();
        for i in 0..200 {
            let x = 0.2 + i as f64 * 0.03;
            assert!((b.value(x) - psi_plain(1.3, x)).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let a = 1.0;
        let b = make_dyadic_bump(a, 4).unwrap();
        for &x in &[0.4, 0.9, 1.0, 2.5, 3.3] {
            let h = 1e-5;
            let fd = (psi_plain(a, x + h) - psi_plain(a, x - h)) / (2.0 * h);
            let d = b.derivatives(x, 4).unwrap();
            assert!((d[1] - fd).abs() < 1e-6, "x={x}: {} vs {fd}", d[1]);
            let h2 = 1e-4;
            let fd2 = (psi_plain(a, x + h2) - 2.0 * psi_plain(a, x) + psi_plain(a, x - h2)) / (h2 * h2);
            assert!((d[2] - fd2).abs() < 1e-4 * d[2].abs().max(1.0));
        }
    }

    #[test]
    fn vanishes_outside_support() {
        let b = make_dyadic_bump(2.0, 6).unwrap();
        let (lo, hi) = b.support().unwrap();
        for x in [0.01, lo, hi, 9.0, 100.0] {
            assert!(b.derivatives(x, 6).unwrap().iter().all(|&d| d == 0.0));
        }
        assert!(b.value(2.0) > 0.0);
    }

    #[test]
    fn partition_of_unity_at_one() {
        let fam = DyadicSymbolFamily::new(make_dyadic_bump(0.7, 4).unwrap(), -5, 5).unwrap();
        assert!((fam.partition_sum(1.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn family_derivatives_telescope_to_zero() {
        let fam = DyadicSymbolFamily::new(make_dyadic_bump(1.0, 6).unwrap(), -3, 3).unwrap();
        for x in [0.1, 0.5, 3.7, 20.0] {
            let total: Vec<f64> = fam
                .scales()
                .map(|j| fam.member(j).derivatives(x, 6).unwrap())
                .fold(vec![0.0; 7], |acc, d| acc.iter().zip(&d).map(|(a, b)| a + b).collect());
            assert!((total[0] - 1.0).abs() < 1e-12);
            for (k, t) in total.iter().enumerate().skip(1) {
                assert!(t.abs() < 1e-8 * x.powi(-(k as i32)), "k={k}: {t}");
            }
        }
    }

    #[test]
    fn disjoint_members() {
        let fam = DyadicSymbolFamily::new(make_dyadic_bump(1.0, 2).unwrap(), -4, 4).unwrap();
        for j in -4..=2 {
            let (_, e) = fam.member(j).support().unwrap();
            let (s, _) = fam.member(j + 2).support().unwrap();
            assert!(e <= s);
        }
    }

    #[test]
    fn plateau_is_one_on_bump_support() {
        let b = make_dyadic_bump(1.0, 4).unwrap();
        let p = Plateau::covering(&b);
        for i in 0..=100 {
            let x = 0.25 * 16f64.powf(i as f64 / 100.0);
            assert_eq!(p.value(x), 1.0);
        }
        assert_eq!(p.value(1.0 / 16.0), 0.0);
        assert!(p.value(0.1) > 0.0 && p.value(0.1) < 1.0);
    }

    #[test]
    fn derived_symbols() {
        let b = make_dyadic_bump(1.0, 4).unwrap();
        let p = Plateau::covering(&b);
        let breve = psi_breve(&b);
        let one = psi_one(&b);
        for i in 1..400 {
            let x = 0.05 * i as f64;
            assert!((breve.value(x) * x - p.value(x)).abs() < 1e-12);
            assert!((one.value(x) - p.value(x) * x.exp()).abs() < 1e-12 * x.exp());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_dyadic_bump(0.0, 3).is_err());
        assert!(make_dyadic_bump(-1.0, 3).is_err());
        assert!(make_dyadic_bump(1.0, 40).is_err());
        let b = make_dyadic_bump(1.0, 3).unwrap();
        assert!(matches!(b.derivatives(1.0, 5), Err(Error::InsufficientDerivatives { .. })));
    }

    #[test]
    fn covering_family() {
        let fam = DyadicSymbolFamily::covering(make_dyadic_bump(1.0, 2).unwrap(), 9.0, 4.0e4).unwrap();
        let (lo, hi) = fam.covered_range();
        assert!(lo <= 9.0 && hi >= 4.0e4);
        for i in 0..=50 {
            let x = 9.0 * (4.0e4f64 / 9.0).powf(i as f64 / 50.0);
            assert!((fam.partition_sum(x) - 1.0).abs() < 1e-12);
        }
    }
}
