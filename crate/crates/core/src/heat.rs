//! Heat semigroup `S(t) = e^{tΔ}`, the localizations `Q_t = √t ∇S(t)` and
//! `𝐐_t = tΔS(t)`, maximal functions and kernel comparisons.

use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{dirichlet_laplacian, gradient, GridDomain};
use crate::sparse::{BandedLu, SparseOperator};
use crate::spectral::SpectralDecomposition;

/// Nodes evaluated per synthesis product in time sweeps.
const BATCH: usize = 24;

/// Geometric nodes `t_k = t_min·r^k` with trapezoid weights for `∫ · dt/t` in `u = ln t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    ratio: f64,
}

impl TimeGrid {
    /// Ratio is rounded down so that `t_max` is hit exactly.
    pub fn new(t_min: f64, t_max: f64, ratio: f64) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(Error::invalid(format!("time grid needs 0 < t_min < t_max, got [{t_min}, {t_max}]")));
        }
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(Error::invalid(format!("time grid ratio must exceed 1, got {ratio}")));
        }
        let span = (t_max / t_min).ln();
        let n = (span / ratio.ln()).ceil().max(1.0) as usize;
        let du = span / n as f64;
        let nodes: Vec<f64> = (0..=n).map(|k| if k == n { t_max } else { t_min * (du * k as f64).exp() }).collect();
        let weights = (0..=n).map(|k| if k == 0 || k == n { 0.5 * du } else { du }).collect();
        Ok(TimeGrid { nodes, weights, ratio: du.exp() })
    }

    /// `t_min = 0.01/λ_max`, `t_max = 20/λ_min`, ratio `2^{1/8}`.
    pub fn default_for(sd: &SpectralDecomposition) -> Self {
        TimeGrid::new(0.01 / sd.lambda_max(), 20.0 / sd.lambda_min(), 2f64.powf(0.125)).expect("spectrum is positive")
    }

    /// Grid whose truncated head and tail are below `~1e−9` for the given spectrum.
    pub fn identity_grid(sd: &SpectralDecomposition) -> Self {
        TimeGrid::new(1e-9 / sd.lambda_max(), 20.0 / sd.lambda_min(), 2f64.powf(0.125)).expect("spectrum is positive")
    }

    /// Same range with `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Self {
        TimeGrid::new(self.t_min(), self.t_max(), self.ratio.powf(1.0 / factor.max(1) as f64)).expect("valid grid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// `Σ w_k g(t_k) ≈ ∫_{t_min}^{t_max} g(t) dt/t`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * g(t)).sum()
    }

    /// Largest per-mode fraction of `∫₀^∞ ‖·‖² dt/t` lying outside `[t_min, t_max]`.
    pub fn truncation_bound(&self, lambda_min: f64, lambda_max: f64, variant: Localizer) -> f64 {
        let (a, b) = (2.0 * self.t_min() * lambda_max, 2.0 * self.t_max() * lambda_min);
        match variant {
            // ∫ λe^{−2tλ} dt: head 1 − e^{−a}, tail e^{−b}
            Localizer::Gradient => (1.0 - (-a).exp()).max((-b).exp()),
            // ∫ 4tλ²e^{−2tλ} dt: head 1 − e^{−a}(1 + a), tail e^{−b}(1 + b)
            Localizer::Time => (1.0 - (-a).exp() * (1.0 + a)).max((-b).exp() * (1.0 + b)),
        }
    }
}

/// Which heat localization a square function uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Localizer {
    /// `Q_t = √t ∇S(t)`.
    Gradient,
    /// `𝐐_t = tΔS(t)`.
    Time,
}

fn check_time(t: f64, strict: bool) -> Result<()> {
    if !t.is_finite() || t < 0.0 || (strict && t == 0.0) {
        return Err(Error::invalid(format!("time must be {}, got {t}", if strict { "positive" } else { "nonnegative" })));
    }
    Ok(())
}

/// `S(t) f` by the spectral multiplier `e^{−tλ}`.
pub fn semigroup(sd: &SpectralDecomposition, t: f64, f: &Field) -> Result<Field> {
    check_time(t, false)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(sd.apply(f, |l| (-t * l).exp()))
}

/// `S(t) f` by `steps` Crank–Nicolson steps of the generator `op`, componentwise.
pub fn crank_nicolson(op: &SparseOperator, t: f64, f: &Field, steps: usize) -> Result<Field> {
    check_time(t, false)?;
    if steps == 0 {
        return Err(Error::invalid("Crank–Nicolson needs at least one step"));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let dt = t / steps as f64;
    let lu = BandedLu::factor(op, 1.0, -0.5 * dt)?;
    let parts: Vec<Vec<f64>> = f
        .split_components()
        .into_iter()
        .map(|mut u| {
            for _ in 0..steps {
                let au = op.mul_vec(&u);
                let rhs: Vec<f64> = u.iter().zip(&au).map(|(&a, &b)| a + 0.5 * dt * b).collect();
                u = lu.solve(&rhs);
            }
            u
        })
        .collect();
    Field::from_components(&parts, f.cell_volume())
}

/// Heat-flow operators on one domain, evaluated through its spectral decomposition.
#[derive(Debug)]
pub struct HeatFlow<'a> {
    sd: &'a SpectralDecomposition,
    grad: SparseOperator,
}

impl<'a> HeatFlow<'a> {
    pub fn new(domain: &GridDomain, sd: &'a SpectralDecomposition) -> Result<Self> {
        if domain.dof() != sd.dof() {
            return Err(Error::invalid("decomposition does not belong to this domain"));
        }
        Ok(HeatFlow { sd, grad: gradient(domain) })
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        self.sd
    }

    pub fn gradient(&self) -> &SparseOperator {
        &self.grad
    }

    pub fn semigroup(&self, t: f64, f: &Field) -> Result<Field> {
        semigroup(self.sd, t, f)
    }

    /// `√t ∇S(t) f`; an `N`-component input gives `N·n` components per gradient point.
    pub fn q(&self, t: f64, f: &Field) -> Result<Field> {
        check_time(t, true)?;
        Ok(self.grad.apply(&self.sd.apply(f, |l| t.sqrt() * (-t * l).exp())))
    }

    /// `tΔS(t) f`.
    pub fn bold_q(&self, t: f64, f: &Field) -> Result<Field> {
        check_time(t, true)?;
        Ok(self.sd.apply(f, |l| -t * l * (-t * l).exp()))
    }

    /// `√s S(s) div g` with `div = −∇ᵀ`.
    pub fn q_star(&self, s: f64, g: &Field) -> Result<Field> {
        check_time(s, true)?;
        let div = self.grad.apply_transpose(g).scaled(-1.0);
        Ok(self.sd.apply(&div, |l| s.sqrt() * (-s * l).exp()))
    }

    /// `‖𝐐_t f − 2 Q*_{t/2} Q_{t/2} f‖₂ / ‖f‖₂`.
    pub fn factorization_residual(&self, t: f64, f: &Field) -> Result<f64> {
        let lhs = self.bold_q(t, f)?;
        let rhs = self.q_star(t / 2.0, &self.q(t / 2.0, f)?)?.scaled(2.0);
        let norm = f.l2_norm();
        Ok(if norm == 0.0 { lhs.sub(&rhs).l2_norm() } else { lhs.sub(&rhs).l2_norm() / norm })
    }

    /// `S(t_k) f` for every `t_k`, in order, batched through the eigenbasis.
    pub fn semigroup_sweep(&self, times: &[f64], f: &Field) -> Result<Vec<Field>> {
        self.sweep(times, f, |t, l| (-t * l).exp())
    }

    /// `Q_{t_k} f` for every `t_k`.
    pub fn q_sweep(&self, times: &[f64], f: &Field) -> Result<Vec<Field>> {
        let heat = self.sweep(times, f, |t, l| t.sqrt() * (-t * l).exp())?;
        Ok(heat.par_iter().map(|u| self.grad.apply(u)).collect())
    }

    /// `𝐐_{t_k} f` for every `t_k`.
    pub fn bold_q_sweep(&self, times: &[f64], f: &Field) -> Result<Vec<Field>> {
        self.sweep(times, f, |t, l| -t * l * (-t * l).exp())
    }

    pub fn localizer_sweep(&self, variant: Localizer, times: &[f64], f: &Field) -> Result<Vec<Field>> {
        match variant {
            Localizer::Gradient => self.q_sweep(times, f),
            Localizer::Time => self.bold_q_sweep(times, f),
        }
    }

    fn sweep(&self, times: &[f64], f: &Field, m: impl Fn(f64, f64) -> f64 + Sync) -> Result<Vec<Field>> {
        for &t in times {
            check_time(t, false)?;
        }
        let chunks: Vec<Vec<Field>> = times
            .par_chunks(BATCH)
            .map(|ts| self.sd.apply_batch(f, ts.len(), |k, l| m(ts[k], l)))
            .collect();
        Ok(chunks.into_iter().flatten().collect())
    }

    /// Pointwise `sup_{t ∈ grid ∪ {0}} |S(t) f|`, Euclidean over components.
    pub fn maximal_function(&self, grid: &TimeGrid, f: &Field) -> Result<Vec<f64>> {
        let mut best = f.modulus();
        for u in self.semigroup_sweep(grid.nodes(), f)? {
            for (b, v) in best.iter_mut().zip(u.modulus()) {
                *b = b.max(v);
            }
        }
        Ok(best)
    }

    /// `sup_k ‖Q_{t_k} f‖_p / ‖f‖_p` over the grid.
    pub fn q_ratio(&self, grid: &TimeGrid, f: &Field, p: f64) -> Result<f64> {
        let denom = f.lp_norm(p)?;
        if denom == 0.0 {
            return Err(Error::invalid("ratio of a zero field"));
        }
        let mut best: f64 = 0.0;
        for q in self.q_sweep(grid.nodes(), f)? {
            best = best.max(q.lp_norm(p)? / denom);
        }
        Ok(best)
    }
}

/// Induced `∞→∞` and `1→1` norms of `𝐐_t = tΔe^{tΔ}` at one time.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoldQNorm {
    pub t: f64,
    pub inf_norm: f64,
    pub one_norm: f64,
}

/// Exact row- and column-sum norms of the dense kernel of `𝐐_t` at each grid time.
pub fn linfty_bound_boldq(sd: &SpectralDecomposition, times: &[f64], cap: usize) -> Result<Vec<BoldQNorm>> {
    if sd.dof() > cap {
        return Err(Error::CapExceeded { dof: sd.dof(), cap });
    }
    times
        .par_iter()
        .map(|&t| {
            check_time(t, true)?;
            let m = sd.multiplier_matrix(|l| -t * l * (-t * l).exp());
            let (inf_norm, one_norm) = row_col_norms(&m);
            Ok(BoldQNorm { t, inf_norm, one_norm })
        })
        .collect()
}

fn row_col_norms(m: &Mat<f64>) -> (f64, f64) {
    let n = m.nrows();
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; m.ncols()];
    for j in 0..m.ncols() {
        for i in 0..n {
            let a = m[(i, j)].abs();
            rows[i] += a;
            cols[j] += a;
        }
    }
    (rows.into_iter().fold(0.0, f64::max), cols.into_iter().fold(0.0, f64::max))
}

/// Kernel comparison between a domain and its obstacle-free bounding box.
#[derive(Debug)]
pub struct KernelComparison {
    inner: SpectralDecomposition,
    free: SpectralDecomposition,
    embedding: Vec<usize>,
}

/// One column of the domination check `S_Ω(t)δ_x ≤ S_free(t)δ_x`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DominationReport {
    pub t: f64,
    pub cell: usize,
    /// `max_y (S_Ω(t)(y, x) − S_free(t)(y, x))`; nonpositive up to rounding.
    pub max_excess: f64,
    /// `min_y S_Ω(t)(y, x)`.
    pub min_kernel: f64,
    /// Largest row sum of the full Dirichlet kernel matrix.
    pub max_row_sum: f64,
    pub dominated: bool,
}

impl KernelComparison {
    pub fn new(domain: &GridDomain) -> Result<Self> {
        let free_domain = domain.companion_full();
        let embedding = domain.embed_into(&free_domain)?;
        let inner = SpectralDecomposition::new(&dirichlet_laplacian(domain), domain.cell_volume())?;
        let free = SpectralDecomposition::new(&dirichlet_laplacian(&free_domain), free_domain.cell_volume())?;
        Ok(KernelComparison { inner, free, embedding })
    }

    pub fn inner(&self) -> &SpectralDecomposition {
        &self.inner
    }

    /// Compares the kernel columns at `cell` with tolerance `tol`.
    pub fn at(&self, t: f64, cell: usize, tol: f64) -> Result<DominationReport> {
        check_time(t, false)?;
        if cell >= self.inner.dof() {
            return Err(Error::invalid(format!("cell {cell} is outside the interior")));
        }
        let column = |sd: &SpectralDecomposition, x: usize| {
            let mut delta = vec![0.0; sd.dof()];
            delta[x] = 1.0;
            semigroup(sd, t, &Field::scalar(delta, sd.cell_volume()))
        };
        let k_in = column(&self.inner, cell)?;
        let k_free = column(&self.free, self.embedding[cell])?;
        let max_excess = k_in
            .values()
            .iter()
            .zip(&self.embedding)
            .map(|(&a, &y)| a - k_free.values()[y])
            .fold(f64::NEG_INFINITY, f64::max);
        let min_kernel = k_in.values().iter().copied().fold(f64::INFINITY, f64::min);
        let ones = Field::scalar(vec![1.0; self.inner.dof()], self.inner.cell_volume());
        // the kernel is symmetric, so row sums are S(t)·1
        let max_row_sum = semigroup(&self.inner, t, &ones)?.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(DominationReport { t, cell, max_excess, min_kernel, max_row_sum, dominated: max_excess <= tol })
    }
}
