use crate::error::{Error, Result};

use super::bump::{DyadicBump, DyadicSymbolFamily, Scaled, Symbol};
use super::jet::Jet;

/// Longest coefficient vector accepted by [`khintchine_check`] (`2^20` pieces).
pub const MAX_KHINTCHINE_LEN: usize = 20;

/// `r_m(t) = r_0(2^m t)` with `r_0 = 1` on `[0, 1/2]` and `−1` on `(1/2, 1)`, extended with period 1.
pub fn rademacher(m: u32, t: f64) -> f64 {
    let s = t * 2f64.powi(m as i32);
    let frac = s - s.floor();
    if frac <= 0.5 {
        1.0
    } else {
        -1.0
    }
}

/// Value of `r_m` on the dyadic piece `[i/2^L, (i+1)/2^L)`, `m < L`.
fn rademacher_on_piece(m: usize, levels: usize, piece: usize) -> f64 {
    if (piece >> (levels - 1 - m)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(‖Σ a_m r_m‖_{L^p[0,1]} / ‖a‖₂, ‖a‖₂ / ‖Σ a_m r_m‖_{L^p[0,1]})`, integrated exactly.
pub fn khintchine_check(a: &[f64], p: f64) -> Result<(f64, f64)> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    if a.is_empty() || a.len() > MAX_KHINTCHINE_LEN {
        return Err(Error::invalid(format!(
            "coefficient vector length {} outside 1..={MAX_KHINTCHINE_LEN}",
            a.len()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite coefficient"));
    }
    let l2 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if l2 == 0.0 {
        return Err(Error::invalid("zero coefficient vector"));
    }
    let levels = a.len();
    let pieces = 1usize << levels;
    let sum: f64 = (0..pieces)
        .map(|i| {
            let s: f64 = a.iter().enumerate().map(|(m, &am)| am * rademacher_on_piece(m, levels, i)).sum();
            (s.abs() / l2).powf(p)
        })
        .sum();
    let ratio = (sum / pieces as f64).powf(1.0 / p);
    Ok((ratio, 1.0 / ratio))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `m^±(t, ξ) = Σ_{j≥0} r_j(t) Ψ_{±j}(ξ)`, truncated to the scales of the family.
#[derive(Clone, Debug)]
pub struct RandomizedSymbol {
    terms: Vec<(f64, Scaled<DyadicBump>)>,
}

pub fn randomized_symbol(t: f64, family: &DyadicSymbolFamily, sign: Sign) -> Result<RandomizedSymbol> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("t = {t} outside [0, 1]")));
    }
    let top = match sign {
        Sign::Plus => family.j_max,
        Sign::Minus => -family.j_min,
    };
    let terms = (0..=top.max(0))
        .map(|j| {
            let scale = if sign == Sign::Plus { j } else { -j };
            let member = Scaled { inner: family.base, factor: 4f64.powi(-scale) };
            (rademacher(j as u32, t), member)
        })
        .collect();
    Ok(RandomizedSymbol { terms })
}

impl Symbol for RandomizedSymbol {
    fn jet(&self, x: Jet) -> Jet {
        self.terms.iter().fold(x.lift(0.0), |acc, (r, m)| acc + m.jet(x).scale(*r))
    }
    fn support(&self) -> Option<(f64, f64)> {
        let lo = self.terms.iter().map(|(_, m)| m.support().unwrap().0).fold(f64::INFINITY, f64::min);
        let hi = self.terms.iter().map(|(_, m)| m.support().unwrap().1).fold(0.0, f64::max);
        Some((lo, hi))
    }
    fn max_order(&self) -> usize {
        self.terms.iter().map(|(_, m)| m.max_order()).min().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::bump::make_dyadic_bump;

    #[test]
    fn square_wave() {
        assert_eq!(rademacher(0, 0.25), 1.0);
        assert_eq!(rademacher(0, 0.5), 1.0);
        assert_eq!(rademacher(0, 0.75), -1.0);
        assert_eq!(rademacher(1, 0.3), -1.0);
        assert_eq!(rademacher(2, 0.3), 1.0);
        assert_eq!(rademacher(3, 1.3), rademacher(3, 0.3));
    }

    #[test]
    fn piece_rule_matches_pointwise_definition() {
        let levels = 6;
        for i in 0..(1 << levels) {
            let mid = (i as f64 + 0.5) / (1 << levels) as f64;
            for m in 0..levels {
                assert_eq!(rademacher_on_piece(m, levels, i), rademacher(m as u32, mid));
            }
        }
    }

    #[test]
    fn khintchine_examples() {
        let (r, inv) = khintchine_check(&[1.0], 3.0).unwrap();
        assert_eq!(r, 1.0);
        assert_eq!(inv, 1.0);
        assert!((khintchine_check(&[1.0, 1.0], 2.0).unwrap().0 - 1.0).abs() < 1e-15);
        // values 2, 0, 0, −2 on quarters: ((16 + 16)/4)^{1/4} / √2 = 2^{1/4}
        let r4 = khintchine_check(&[1.0, 1.0], 4.0).unwrap().0;
        assert!((r4 - 2f64.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn khintchine_errors() {
        assert!(khintchine_check(&[], 2.0).is_err());
        assert!(khintchine_check(&[0.0, 0.0], 2.0).is_err());
        assert!(khintchine_check(&[1.0; 21], 2.0).is_err());
        assert!(khintchine_check(&[1.0], 0.5).is_err());
    }

    #[test]
    fn all_plus_symbol_is_partition_sum() {
        let fam = DyadicSymbolFamily::new(make_dyadic_bump(1.0, 4).unwrap(), 0, 6).unwrap();
        let m = randomized_symbol(0.0, &fam, Sign::Plus).unwrap();
        for x in [1.0, 10.0, 300.0, 4000.0] {
            assert!((m.value(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flipping_signs_changes_only_flipped_scales() {
        let fam = DyadicSymbolFamily::new(make_dyadic_bump(1.0, 2).unwrap(), -4, 4).unwrap();
        let a = randomized_symbol(0.1, &fam, Sign::Minus).unwrap();
        let b = randomized_symbol(0.3, &fam, Sign::Minus).unwrap();
        for i in 0..200 {
            let x = 1e-3 * 1.05f64.powi(i);
            let differs = (a.value(x) - b.value(x)).abs() > 0.0;
            let flipped = (0..=4).any(|j| {
                rademacher(j, 0.1) != rademacher(j, 0.3)
                    && fam.member(-(j as i32)).value(x) != 0.0
            });
            assert!(!differs || flipped);
        }
    }
}
