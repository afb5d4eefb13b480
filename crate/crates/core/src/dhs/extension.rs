use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::bump::transition;
use crate::symbol::{Jet, Symbol};

/// `Ψ̃(x + iy) = Σ_{m≤N} ∂^mΨ(x) (iy)^m / m! · τ(y/(δ⟨x⟩))` with `τ = 1` on `|s| ≤ 1`, `0` on `|s| ≥ 2`.
///
/// Any `δ > 0` gives a valid extension. Wide cutoffs let the Taylor polynomial
/// grow large away from the axis, which the `∂̄` integral must then cancel;
/// [`DEFAULT_WIDTH`] keeps that cancellation within quadrature accuracy.
pub const DEFAULT_WIDTH: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct AlmostAnalyticExtension<S> {
    symbol: S,
    order: usize,
    width: f64,
}

pub fn make_extension<S: Symbol>(symbol: S, order: usize) -> Result<AlmostAnalyticExtension<S>> {
    let available = symbol.max_order();
    if order + 1 > available {
        return Err(Error::InsufficientDerivatives { needed: order + 1, available });
    }
    Ok(AlmostAnalyticExtension { symbol, order, width: DEFAULT_WIDTH })
}

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// `τ(s)` and `τ'(s)`.
fn cutoff(s: f64) -> (f64, f64) {
    let j = transition(Jet::variable(s.abs(), 1), 1.0, 2.0);
    (j.value(), j.derivative(1) * s.signum())
}

impl<S: Symbol> AlmostAnalyticExtension<S> {
    pub fn with_width(mut self, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid(format!("cutoff width must be positive, got {width}")));
        }
        self.width = width;
        Ok(self)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// `δ⟨x⟩`: the cutoff is 1 below this height and 0 above twice it.
    pub fn cutoff_height(&self, x: f64) -> f64 {
        self.width * bracket(x)
    }

    pub fn symbol(&self) -> &S {
        &self.symbol
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Real-axis support of the underlying symbol.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.symbol.support()
    }

    fn taylor(&self, jet: &Jet, y: f64, upto: usize) -> Complex64 {
        let iy = Complex64::new(0.0, y);
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for m in 0..=upto {
            // coeff(m) is ∂^mΨ/m!
            sum += power * jet.coeff(m);
            power *= iy;
        }
        sum
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        let (x, y) = (z.re, z.im);
        let (tau, _) = cutoff(y / self.cutoff_height(x));
        if tau == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let jet = self.symbol.jet(Jet::variable(x, self.order));
        self.taylor(&jet, y, self.order) * tau
    }

    /// `∂̄Ψ̃ = ½(∂_x + i∂_y)Ψ̃` in closed form.
    pub fn dbar(&self, z: Complex64) -> Complex64 {
        let (x, y) = (z.re, z.im);
        let b = self.cutoff_height(x);
        let s = y / b;
        let (tau, dtau) = cutoff(s);
        if tau == 0.0 && dtau == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let n = self.order;
        let jet = self.symbol.jet(Jet::variable(x, n + 1));
        let iy = Complex64::new(0.0, y);
        // the Taylor sum telescopes to the top term
        let top = iy.powu(n as u32) * jet.coeff(n + 1) * ((n + 1) as f64) * 0.5 * tau;
        if dtau == 0.0 {
            return top;
        }
        let poly = self.taylor(&jet, y, n);
        let bx = bracket(x);
        let ds = Complex64::new(-y * x / (b * bx * bx), 1.0 / b);
        top + poly * ds * (0.5 * dtau)
    }
}

/// `max_x |∂̄Ψ̃(x + iy)|` against `y`, with its log–log slope.
#[derive(Clone, Debug, serde::Serialize)]
pub struct FlatnessFit {
    pub order: usize,
    pub slope: f64,
    /// `(y, max_x |∂̄Ψ̃|)`.
    pub samples: Vec<(f64, f64)>,
}

/// Samples `|∂̄Ψ̃|` on `x_points` uniform points of the support at each height in `ys`.
pub fn dbar_flatness<S: Symbol>(ext: &AlmostAnalyticExtension<S>, ys: &[f64], x_points: usize) -> Result<FlatnessFit> {
    let (lo, hi) = ext.support().ok_or_else(|| Error::invalid("symbol has empty support"))?;
    if ys.len() < 2 || ys.iter().any(|&y| !(y > 0.0)) || x_points < 2 {
        return Err(Error::DegenerateFit("need two positive heights and two x points".into()));
    }
    let samples: Vec<(f64, f64)> = ys
        .iter()
        .map(|&y| {
            let top = (0..x_points)
                .map(|i| lo + (hi - lo) * i as f64 / (x_points - 1) as f64)
                .map(|x| ext.dbar(Complex64::new(x, y)).norm())
                .fold(0.0, f64::max);
            (y, top)
        })
        .collect();
    if samples.iter().any(|s| s.1 <= 0.0) {
        return Err(Error::DegenerateFit("∂̄Ψ̃ vanishes at a sampled height".into()));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(y, m)| (y.ln(), m.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(FlatnessFit { order: ext.order(), slope: sxy / sxx, samples })
}
