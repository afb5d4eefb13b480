//! Littlewood–Paley and heat-flow square functions, Besov-type norms,
//! almost orthogonality and equivalence-ratio summaries.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::heat::{HeatFlow, Localizer, TimeGrid};
use crate::spectral::SpectralDecomposition;
use crate::symbol::{psi_one, rademacher, DyadicSymbolFamily, Symbol};

/// Time nodes per sweep chunk; bounds memory for many-component fields.
const CHUNK: usize = 48;

/// `Δ_j f = Ψ(4^{−j}(−Δ)) f` for every scale of the family, in scale order.
pub fn lp_blocks(sd: &SpectralDecomposition, family: &DyadicSymbolFamily, f: &Field) -> Vec<(i32, Field)> {
    let scales: Vec<i32> = family.scales().collect();
    let members: Vec<_> = scales.iter().map(|&j| family.member(j)).collect();
    let blocks = sd.apply_batch(f, scales.len(), |k, l| members[k].value(l));
    scales.into_iter().zip(blocks).collect()
}

/// Pointwise `(Σ_j |Δ_j f|²)^{1/2}` together with the partition-of-unity defect on the spectrum.
#[derive(Clone, Debug)]
pub struct SquareFunction {
    pub values: Field,
    /// `max_λ |Σ_j Ψ_j(λ) − 1|`; nonzero means the family does not cover the spectrum.
    pub coverage_defect: f64,
}

pub fn lp_square_function(sd: &SpectralDecomposition, family: &DyadicSymbolFamily, f: &Field) -> SquareFunction {
    let mut acc = vec![0.0; f.points()];
    for (_, b) in lp_blocks(sd, family, f) {
        for (a, m) in acc.iter_mut().zip(b.modulus()) {
            *a += m * m;
        }
    }
    let coverage_defect = sd.eigenvalues().iter().map(|&l| (family.partition_sum(l) - 1.0).abs()).fold(0.0, f64::max);
    SquareFunction { values: Field::scalar(acc.into_iter().map(f64::sqrt).collect(), f.cell_volume()), coverage_defect }
}

/// `(min_λ, max_λ)` of `Σ_j Ψ_j(λ)²` over the spectrum: the exact `p = 2` window of `‖SF f‖₂² / ‖f‖₂²`.
pub fn psi_squared_envelope(sd: &SpectralDecomposition, family: &DyadicSymbolFamily) -> (f64, f64) {
    sd.eigenvalues().iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| {
        let s: f64 = family.scales().map(|j| family.member(j).value(l).powi(2)).sum();
        (lo.min(s), hi.max(s))
    })
}

/// Scales `k` whose times `4^{−k}` cover `[t_min, t_max]` of the grid.
pub fn k_range_for(grid: &TimeGrid) -> RangeInclusive<i32> {
    let log4 = |t: f64| t.ln() / 4f64.ln();
    (-log4(grid.t_max())).floor() as i32..=(-log4(grid.t_min())).ceil() as i32
}

/// `(Σ_k ‖L_{4^{−k}} f‖_p²)^{1/2}` for the chosen localizer `L`.
pub fn besov_dyadic(hf: &HeatFlow, f: &Field, p: f64, ks: RangeInclusive<i32>, variant: Localizer) -> Result<f64> {
    if ks.is_empty() {
        return Err(Error::invalid("empty k-range"));
    }
    let times: Vec<f64> = ks.map(|k| 4f64.powi(-k)).collect();
    let mut sum = 0.0;
    for q in hf.localizer_sweep(variant, &times, f)? {
        sum += q.lp_norm(p)?.powi(2);
    }
    Ok(sum.sqrt())
}

/// Continuous norm `(∫ ‖L_t f‖_p² dt/t)^{1/2}` with the grid's truncation bound attached.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContinuousNorm {
    pub value: f64,
    /// Per-mode relative mass of `∫ dt/t` outside the grid (exact bound at `p = 2`).
    pub truncation: f64,
}

pub fn besov_continuous(hf: &HeatFlow, f: &Field, p: f64, grid: &TimeGrid, variant: Localizer) -> Result<ContinuousNorm> {
    let mut sum = 0.0;
    for (ts, ws) in grid.nodes().chunks(CHUNK).zip(grid.weights().chunks(CHUNK)) {
        for (q, &w) in hf.localizer_sweep(variant, ts, f)?.iter().zip(ws) {
            sum += w * q.lp_norm(p)?.powi(2);
        }
    }
    let sd = hf.spectral();
    Ok(ContinuousNorm { value: sum.sqrt(), truncation: grid.truncation_bound(sd.lambda_min(), sd.lambda_max(), variant) })
}

/// Pointwise `(∫ |L_t f|² dt/t)^{1/2}`.
///
/// For [`Localizer::Gradient`] the result lives on the gradient points (interior then ghosts).
pub fn heat_square_function(hf: &HeatFlow, f: &Field, grid: &TimeGrid, variant: Localizer) -> Result<Field> {
    let mut acc: Option<Vec<f64>> = None;
    for (ts, ws) in grid.nodes().chunks(CHUNK).zip(grid.weights().chunks(CHUNK)) {
        for (q, &w) in hf.localizer_sweep(variant, ts, f)?.iter().zip(ws) {
            let a = acc.get_or_insert_with(|| vec![0.0; q.points()]);
            for (s, m) in a.iter_mut().zip(q.modulus()) {
                *s += w * m * m;
            }
        }
    }
    let acc = acc.expect("time grids are nonempty");
    Ok(Field::scalar(acc.into_iter().map(f64::sqrt).collect(), f.cell_volume()))
}

/// `R(k, j) = max_f ‖Q_{4^{−k}} Δ_j f‖_p / ‖Δ_j f‖_p` over a corpus.
#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalityMatrix {
    pub p: f64,
    pub j_values: Vec<i32>,
    pub k_values: Vec<i32>,
    /// Row per `k`, column per `j`; `None` when every `Δ_j f` vanished.
    pub entries: Vec<Vec<Option<f64>>>,
}

impl OrthogonalityMatrix {
    pub fn entry(&self, k: i32, j: i32) -> Option<f64> {
        let a = self.k_values.iter().position(|&x| x == k)?;
        let b = self.j_values.iter().position(|&x| x == j)?;
        self.entries[a][b]
    }

    /// `(k, j, R)` for every present entry.
    pub fn present(&self) -> impl Iterator<Item = (i32, i32, f64)> + '_ {
        self.k_values.iter().enumerate().flat_map(move |(a, &k)| {
            self.j_values.iter().enumerate().filter_map(move |(b, &j)| self.entries[a][b].map(|r| (k, j, r)))
        })
    }

    /// Smallest `C` with `R(k, j) ≤ C·2^{−|j−k|}` for `|j − k| ≤ max_gap`.
    pub fn decay_constant(&self, max_gap: i32) -> f64 {
        self.present()
            .filter(|&(k, j, _)| (j - k).abs() <= max_gap)
            .map(|(k, j, r)| r * 2f64.powi((j - k).abs()))
            .fold(0.0, f64::max)
    }

    /// Least-squares slope of `max_{|j−k|=d} log₂ R` against `d`.
    pub fn decay_slope(&self, max_gap: i32) -> Option<f64> {
        let pts: Vec<(f64, f64)> = (0..=max_gap)
            .filter_map(|d| {
                let best = self.present().filter(|&(k, j, _)| (j - k).abs() == d).map(|e| e.2).fold(0.0, f64::max);
                (best > 0.0).then(|| (d as f64, best.log2()))
            })
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        Some(sxy / sxx)
    }
}

pub fn almost_orthogonality_matrix(
    hf: &HeatFlow,
    family: &DyadicSymbolFamily,
    corpus: &[Field],
    js: RangeInclusive<i32>,
    ks: RangeInclusive<i32>,
    p: f64,
) -> Result<OrthogonalityMatrix> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let j_values: Vec<i32> = js.collect();
    let k_values: Vec<i32> = ks.collect();
    let times: Vec<f64> = k_values.iter().map(|&k| 4f64.powi(-k)).collect();
    let sd = hf.spectral();
    // per corpus member: column of ratios for each j, or None
    let per_member: Vec<Vec<Vec<Option<f64>>>> = corpus
        .par_iter()
        .map(|f| -> Result<Vec<Vec<Option<f64>>>> {
            let scale = f.l2_norm();
            let mut cols = Vec::with_capacity(j_values.len());
            for &j in &j_values {
                let member = family.member(j);
                let block = sd.apply(f, |l| member.value(l));
                let denom = block.lp_norm(p)?;
                if block.l2_norm() <= 1e-12 * scale || denom == 0.0 {
                    cols.push(vec![None; times.len()]);
                    continue;
                }
                let qs = hf.q_sweep(&times, &block)?;
                cols.push(qs.iter().map(|q| q.lp_norm(p).ok().map(|n| n / denom)).collect());
            }
            Ok(cols)
        })
        .collect::<Result<_>>()?;
    let entries = (0..k_values.len())
        .map(|a| {
            (0..j_values.len())
                .map(|b| {
                    per_member.iter().filter_map(|m| m[b][a]).fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |x| x.max(r))))
                })
                .collect()
        })
        .collect();
    Ok(OrthogonalityMatrix { p, j_values, k_values, entries })
}

/// Ratios `left/right` over a corpus with order statistics.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceMeasurement {
    pub p: f64,
    pub corpus: String,
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    /// Relative change of [`Self::two_sided_constant`] against a reference measurement.
    pub drift: Option<f64>,
}

impl EquivalenceMeasurement {
    pub fn new(p: f64, corpus: impl Into<String>, ratios: Vec<f64>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::invalid("no ratios to summarise"));
        }
        if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::invalid(format!("ratio {r} is not positive and finite")));
        }
        let mut sorted = ratios.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
        Ok(EquivalenceMeasurement { p, corpus: corpus.into(), min: sorted[0], max: sorted[n - 1], median, ratios, drift: None })
    }

    /// `max(max, 1/min)`: the smallest `C` with every ratio in `[1/C, C]`.
    pub fn two_sided_constant(&self) -> f64 {
        self.max.max(1.0 / self.min)
    }

    pub fn with_drift_from(mut self, reference: &EquivalenceMeasurement) -> Self {
        self.drift = Some((self.two_sided_constant() / reference.two_sided_constant() - 1.0).abs());
        self
    }
}

/// Rademacher-randomized multipliers `m(t) = Σ_j r_{j−j_min}(t) Ψ_j` applied to one field.
#[derive(Clone, Debug, Serialize)]
pub struct RademacherMeasurement {
    pub p: f64,
    /// `‖m(t_i)(−Δ) f‖_p` per sample.
    pub norms: Vec<f64>,
    /// `(mean_i ‖m(t_i) f‖_p²)^{1/2}`.
    pub aggregate: f64,
    /// `‖(Σ_j |Δ_j f|²)^{1/2}‖_p`.
    pub square_norm: f64,
    pub f_norm: f64,
}

/// Samples `t_i = (i + 1/3)/2^J`, one per dyadic piece; exact for `J` Rademacher levels.
pub fn rademacher_samples(levels: u32) -> Vec<f64> {
    let n = 1u64 << levels;
    (0..n).map(|i| (i as f64 + 1.0 / 3.0) / n as f64).collect()
}

pub fn rademacher_equivalence(
    sd: &SpectralDecomposition,
    family: &DyadicSymbolFamily,
    f: &Field,
    p: f64,
    samples: &[f64],
) -> Result<RademacherMeasurement> {
    if samples.is_empty() {
        return Err(Error::invalid("no t samples"));
    }
    let members: Vec<(u32, _)> = family.scales().map(|j| ((j - family.j_min) as u32, family.member(j))).collect();
    let fields: Vec<Field> = samples
        .par_chunks(CHUNK)
        .flat_map_iter(|ts| {
            sd.apply_batch(f, ts.len(), |i, l| members.iter().map(|(m, s)| rademacher(*m, ts[i]) * s.value(l)).sum())
        })
        .collect();
    let norms = fields.iter().map(|u| u.lp_norm(p)).collect::<Result<Vec<_>>>()?;
    let aggregate = (norms.iter().map(|n| n * n).sum::<f64>() / norms.len() as f64).sqrt();
    let square_norm = lp_square_function(sd, family, f).values.lp_norm(p)?;
    Ok(RademacherMeasurement { p, norms, aggregate, square_norm, f_norm: f.lp_norm(p)? })
}

/// `‖S(4^{−k} − 4^{−j}) Δ_j f − S(4^{−k}) Ψ₁(4^{−j}·) Ψ(4^{−j}·) f‖₂ / ‖f‖₂`.
///
/// The left side runs the flow backwards when `k < j`; on a bounded spectrum both sides are finite.
pub fn backward_heat_residual(sd: &SpectralDecomposition, family: &DyadicSymbolFamily, j: i32, k: i32, f: &Field) -> f64 {
    let (tj, tk) = (4f64.powi(-j), 4f64.powi(-k));
    let member = family.member(j);
    let lift = psi_one(&family.base);
    let lhs = sd.apply(f, |l| (-(tk - tj) * l).exp() * member.value(l));
    let rhs = sd.apply(f, |l| (-tk * l).exp() * lift.value(tj * l) * member.value(l));
    lhs.sub(&rhs).l2_norm() / f.l2_norm().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dirichlet_laplacian, DomainDescriptor, GridDomain};
    use crate::symbol::make_dyadic_bump;

    fn setup(desc: DomainDescriptor) -> (GridDomain, SpectralDecomposition) {
        let d = GridDomain::build(&desc).unwrap();
        let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume()).unwrap();
        (d, sd)
    }

    fn family(sd: &SpectralDecomposition) -> DyadicSymbolFamily {
        DyadicSymbolFamily::covering(make_dyadic_bump(1.0, 6).unwrap(), sd.lambda_min(), sd.lambda_max()).unwrap()
    }

    fn probe(d: &GridDomain) -> Field {
        d.sample(|x, y| (5.0 * x).sin() * (1.0 + y) + (x - 0.4).abs())
    }

    #[test]
    fn square_function_of_eigenvector() {
        let (_, sd) = setup(DomainDescriptor::square(8));
        let fam = family(&sd);
        let v = sd.eigenfunction(9);
        let l = sd.eigenvalues()[9];
        let env: f64 = fam.scales().map(|j| fam.member(j).value(l).powi(2)).sum::<f64>().sqrt();
        let sf = lp_square_function(&sd, &fam, &v);
        assert!(sf.coverage_defect < 1e-12);
        for (a, b) in sf.values.values().iter().zip(v.values()) {
            assert!((a - env * b.abs()).abs() < 1e-10);
        }
        assert!(lp_square_function(&sd, &fam, &Field::zeros(sd.dof(), 1, sd.cell_volume())).values.is_zero());
    }

    #[test]
    fn square_function_p2_envelope() {
        let (d, sd) = setup(DomainDescriptor::square_with_obstacle(12, 4));
        let fam = family(&sd);
        let f = probe(&d);
        let (lo, hi) = psi_squared_envelope(&sd, &fam);
        let ratio = lp_square_function(&sd, &fam, &f).values.l2_norm().powi(2) / f.l2_norm().powi(2);
        assert!(lo - 1e-12 <= ratio && ratio <= hi + 1e-12, "{lo} {ratio} {hi}");
        assert!(lo >= 0.5 - 1e-12 && hi <= 1.0 + 1e-12);
    }

    #[test]
    fn uncovered_spectrum_is_reported() {
        let (_, sd) = setup(DomainDescriptor::square(6));
        let fam = DyadicSymbolFamily::new(make_dyadic_bump(1.0, 4).unwrap(), 0, 1).unwrap();
        assert!(lp_square_function(&sd, &fam, &sd.eigenfunction(0)).coverage_defect > 0.5);
    }

    #[test]
    fn heat_identities_at_p2() {
        let (d, sd) = setup(DomainDescriptor::square(10));
        let hf = HeatFlow::new(&d, &sd).unwrap();
        let grid = TimeGrid::identity_grid(&sd);
        let f = probe(&d);
        let n2 = f.l2_norm().powi(2);
        let c = besov_continuous(&hf, &f, 2.0, &grid, Localizer::Gradient).unwrap();
        assert!((2.0 * c.value.powi(2) - n2).abs() <= 1e-6 * n2);
        let b = besov_continuous(&hf, &f, 2.0, &grid, Localizer::Time).unwrap();
        assert!((4.0 * b.value.powi(2) - n2).abs() <= 1e-6 * n2);
        let h = heat_square_function(&hf, &f, &grid, Localizer::Gradient).unwrap();
        assert!((2.0 * h.l2_norm().powi(2) - n2).abs() <= 1e-6 * n2);
        assert!(heat_square_function(&hf, &d.zeros(), &grid, Localizer::Time).unwrap().is_zero());
    }

    #[test]
    #[allow(clippy::reversed_empty_ranges)]
    fn dyadic_besov_of_eigenvector() {
        let (d, sd) = setup(DomainDescriptor::square(6));
        let hf = HeatFlow::new(&d, &sd).unwrap();
        let v = sd.eigenfunction(2);
        let l = sd.eigenvalues()[2];
        let want: f64 = (-6..=4).map(|k| 4f64.powi(-k) * l * (-2.0 * 4f64.powi(-k) * l).exp()).sum();
        let got = besov_dyadic(&hf, &v, 2.0, -6..=4, Localizer::Gradient).unwrap();
        assert!((got * got - want).abs() < 1e-12 * want);
        assert!(besov_dyadic(&hf, &v, 2.0, 3..=2, Localizer::Gradient).is_err());
        // monotone in the k-range
        let wider = besov_dyadic(&hf, &v, 4.0, -7..=5, Localizer::Gradient).unwrap();
        assert!(wider >= besov_dyadic(&hf, &v, 4.0, -6..=4, Localizer::Gradient).unwrap());
    }

    #[test]
    fn orthogonality_on_eigenvectors() {
        let (d, sd) = setup(DomainDescriptor::interval(1.0, 40));
        let hf = HeatFlow::new(&d, &sd).unwrap();
        let fam = family(&sd);
        let corpus: Vec<Field> = (0..sd.dof()).step_by(3).map(|i| sd.eigenfunction(i)).collect();
        let js = fam.j_min + 1..=fam.j_max - 1;
        let m = almost_orthogonality_matrix(&hf, &fam, &corpus, js.clone(), js, 2.0).unwrap();
        // scalar oracle: max over the support of √(tλ) e^{−tλ}, attained by some eigenvalue in it
        for (k, j, r) in m.present() {
            let (lo, hi) = fam.member(j).support().unwrap();
            let t = 4f64.powi(-k);
            let bound = (0..=2000)
                .map(|i| lo * (hi / lo).powf(i as f64 / 2000.0))
                .map(|l| (t * l).sqrt() * (-t * l).exp())
                .fold(0.0, f64::max);
            assert!(r <= bound + 1e-12, "R({k},{j}) = {r} > {bound}");
            if k == j {
                assert!(r <= (2.0 * std::f64::consts::E).powf(-0.5) + 1e-12);
            }
        }
        assert!(m.decay_constant(6) <= 16.0);
    }

    #[test]
    fn equivalence_summary() {
        let m = EquivalenceMeasurement::new(2.0, "c", vec![2.0, 0.5, 1.0, 4.0]).unwrap();
        assert_eq!((m.min, m.median, m.max), (0.5, 1.5, 4.0));
        assert_eq!(m.two_sided_constant(), 4.0);
        let r = EquivalenceMeasurement::new(2.0, "c", vec![1.0, 0.25]).unwrap();
        assert_eq!(m.with_drift_from(&r).drift, Some(0.0));
        assert!(EquivalenceMeasurement::new(2.0, "c", vec![]).is_err());
        assert!(EquivalenceMeasurement::new(2.0, "c", vec![0.0]).is_err());
    }

    #[test]
    fn rademacher_identities() {
        let (d, sd) = setup(DomainDescriptor::square(8));
        let fam = family(&sd);
        let levels = (fam.j_max - fam.j_min + 1) as u32;
        let samples = rademacher_samples(levels);
        let f = probe(&d);
        let m = rademacher_equivalence(&sd, &fam, &f, 2.0, &samples).unwrap();
        let blocks: f64 = lp_blocks(&sd, &fam, &f).iter().map(|(_, b)| b.l2_norm().powi(2)).sum();
        assert!((m.aggregate.powi(2) - blocks).abs() <= 1e-10 * blocks);
        assert!((m.square_norm.powi(2) - blocks).abs() <= 1e-10 * blocks);
        // one active block: |r_0| = 1, so the aggregate is ‖Δ_j f‖_p
        let j = fam.j_min + 2;
        let one = DyadicSymbolFamily::new(fam.base, j, j).unwrap();
        let m = rademacher_equivalence(&sd, &one, &f, 4.0, &samples).unwrap();
        let block = sd.apply(&f, |l| fam.member(j).value(l)).lp_norm(4.0).unwrap();
        assert!(block > 0.0);
        assert!((m.aggregate - block).abs() <= 1e-10 * block);
    }

    #[test]
    fn backward_heat_identity() {
        let (d, sd) = setup(DomainDescriptor::square(8));
        let fam = family(&sd);
        let f = probe(&d);
        for (j, k) in [(fam.j_min + 1, fam.j_min + 2), (fam.j_max - 1, fam.j_max - 2), (2, 2)] {
            assert!(backward_heat_residual(&sd, &fam, j, k, &f) < 1e-10);
        }
    }

    #[test]
    fn k_range_covers_grid() {
        let g = TimeGrid::new(1e-4, 3.0, 2.0).unwrap();
        let ks = k_range_for(&g);
        assert!(4f64.powi(-ks.start()) >= 3.0 && 4f64.powi(-ks.end()) <= 1e-4);
    }
}
