use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opnorm::{matrix_norm_1, matrix_norm_inf, PowerMethod};
use crate::spectral::SpectralDecomposition;

/// How a resolvent norm was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Exact,
    LowerBound,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GrowthSample {
    pub z_re: f64,
    pub z_im: f64,
    pub norm: f64,
    pub kind: NormKind,
}

impl GrowthSample {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.z_re, self.z_im)
    }

    /// `(ln(|z|/|Im z|), ln(‖R(z)‖·|Im z|))`.
    pub fn coordinates(&self) -> (f64, f64) {
        let z = self.z();
        ((z.norm() / z.im.abs()).ln(), (self.norm * z.im.abs()).ln())
    }
}

/// Least-squares fit of `ln(‖R‖·|Im z|) = ln c + α ln(|z|/|Im z|)`.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    pub p: f64,
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub log_c: f64,
    /// Smallest `c` with `‖R‖·|Im z| ≤ c (|z|/|Im z|)^α̂` at every sample.
    pub envelope_c: f64,
    pub samples: Vec<GrowthSample>,
}

/// `‖(z − s·Δ)^{−1}‖_{p→p}`: exact for `p ∈ {1, 2, ∞}`, otherwise a power-method lower bound.
pub fn resolvent_lp_norm(
    sd: &SpectralDecomposition,
    z: Complex64,
    scale: f64,
    p: f64,
    seeds: &[Vec<f64>],
) -> Result<(f64, NormKind)> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if p == 2.0 {
        return Ok((sd.resolvent_norm2(z, scale)?, NormKind::Exact));
    }
    if sd.eigenvalues().iter().any(|&l| z + scale * l == Complex64::new(0.0, 0.0)) {
        return Err(Error::OnSpectrum { z: format!("{z}") });
    }
    let symbol = |l: f64| 1.0 / (z + scale * l);
    let re = sd.multiplier_matrix(|l| symbol(l).re);
    let im = sd.multiplier_matrix(|l| symbol(l).im);
    if p == 1.0 {
        return Ok((matrix_norm_1(re.as_ref(), im.as_ref()), NormKind::Exact));
    }
    if p.is_infinite() {
        return Ok((matrix_norm_inf(re.as_ref(), im.as_ref()), NormKind::Exact));
    }
    let n = sd.dof();
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| (0..n).map(|j| Complex64::new(re[(i, j)], im[(i, j)]) * x[j]).sum())
            .collect()
    };
    // the matrix is complex symmetric, so its adjoint is its entrywise conjugate
    let adjoint = |x: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| (0..n).map(|j| Complex64::new(re[(i, j)], -im[(i, j)]) * x[j]).sum())
            .collect()
    };
    let seeds: Vec<Vec<Complex64>> =
        seeds.iter().map(|s| s.iter().map(|&v| Complex64::new(v, 0.0)).collect()).collect();
    let est = PowerMethod { p, in_components: 1, out_components: 1, max_iter: 30 }.estimate(apply, adjoint, &seeds)?;
    Ok((est, NormKind::LowerBound))
}

/// Samples `z = r e^{iθ}` over the grids and fits the growth law.
pub fn resolvent_growth_exponent(
    sd: &SpectralDecomposition,
    scale: f64,
    p: f64,
    thetas: &[f64],
    radii: &[f64],
    seeds: &[Vec<f64>],
) -> Result<GrowthFit> {
    let mut samples = Vec::with_capacity(thetas.len() * radii.len());
    for &theta in thetas {
        for &r in radii {
            let z = Complex64::from_polar(r, theta);
            if z.im.abs() <= 1e-12 * r {
                return Err(Error::DegenerateFit(format!("θ = {theta} puts z on the real axis")));
            }
            let (norm, kind) = resolvent_lp_norm(sd, z, scale, p, seeds)?;
            samples.push(GrowthSample { z_re: z.re, z_im: z.im, norm, kind });
        }
    }
    fit_growth(p, samples)
}

pub fn fit_growth(p: f64, samples: Vec<GrowthSample>) -> Result<GrowthFit> {
    let pts: Vec<(f64, f64)> = samples.iter().map(GrowthSample::coordinates).collect();
    let n = pts.len() as f64;
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} samples are too few", pts.len())));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx < 1e-12 {
        return Err(Error::DegenerateFit("all samples share one angle".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let alpha = sxy / sxx;
    let log_c = my - alpha * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - log_c - alpha * p.0).powi(2)).sum();
    let alpha_stderr = (rss / (n - 2.0) / sxx).sqrt();
    let envelope_c = pts.iter().map(|p| (p.1 - alpha * p.0).exp()).fold(0.0, f64::max);
    Ok(GrowthFit { p, alpha, alpha_stderr, log_c, envelope_c, samples })
}
