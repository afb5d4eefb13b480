//! Seeded test-function corpora.
//!
//! Each member draws from its own ChaCha stream keyed by `(seed, index)`, so a
//! member does not depend on how many others were generated. Continuum kinds
//! (`sine`, `gaussian`, `boundary-layer`) draw parameters independently of the
//! grid and therefore describe the same function on every refinement.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::GridDomain;
use crate::spectral::SpectralDecomposition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    /// A single eigenfunction.
    Eigen,
    /// Gaussian coefficients on a contiguous band of eigenfunctions.
    Band,
    /// Random low box modes `sin(kπx/L) sin(lπy/L)`.
    Sine,
    Gaussian,
    /// Profile `(d/ε) e^{1 − d/ε}` of the distance `d` to the boundary.
    BoundaryLayer,
    /// One cell.
    Indicator,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 6] = [
        CorpusKind::Eigen,
        CorpusKind::Band,
        CorpusKind::Sine,
        CorpusKind::Gaussian,
        CorpusKind::BoundaryLayer,
        CorpusKind::Indicator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::Eigen => "eigen",
            CorpusKind::Band => "band",
            CorpusKind::Sine => "sine",
            CorpusKind::Gaussian => "gaussian",
            CorpusKind::BoundaryLayer => "boundary-layer",
            CorpusKind::Indicator => "indicator",
        }
    }
}

impl FromStr for CorpusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorpusKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::UnknownCorpusKind(s.into()))
    }
}

#[derive(Clone, Debug)]
pub struct CorpusMember {
    pub id: String,
    pub kind: CorpusKind,
    pub field: Field,
}

/// `count` members cycling through `kinds`, each with `components` independent draws.
pub fn generate_corpus(
    domain: &GridDomain,
    sd: &SpectralDecomposition,
    kinds: &[CorpusKind],
    count: usize,
    components: usize,
    seed: u64,
) -> Result<Vec<CorpusMember>> {
    if kinds.is_empty() || components == 0 {
        return Err(Error::invalid("corpus needs at least one kind and one component"));
    }
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let kind = kinds[index % kinds.len()];
        // stream keyed by member index; component draws follow in order
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64 + 1);
        let parts: Vec<Vec<f64>> = (0..components).map(|_| draw(kind, domain, sd, &mut rng).into_values()).collect();
        let field = Field::from_components(&parts, domain.cell_volume())?;
        let id = if components == 1 { format!("{}-{index}", kind.name()) } else { format!("{}-{index}/n{components}", kind.name()) };
        out.push(CorpusMember { id, kind, field });
    }
    Ok(out)
}

fn draw(kind: CorpusKind, domain: &GridDomain, sd: &SpectralDecomposition, rng: &mut ChaCha8Rng) -> Field {
    let dof = domain.dof();
    let [lx, ly] = domain.extent();
    let two_d = domain.dimension() == 2;
    let field = match kind {
        CorpusKind::Eigen => sd.eigenfunction(rng.random_range(0..dof)),
        CorpusKind::Band => {
            let width = rng.random_range(1..=(dof / 8).max(1));
            let lo = rng.random_range(0..=dof - width);
            let coeffs: Vec<f64> = (0..width).map(|_| rng.sample(StandardNormal)).collect();
            let mut v = vec![0.0; dof];
            for (c, i) in coeffs.iter().zip(lo..lo + width) {
                let e = sd.eigenfunction(i);
                for (a, b) in v.iter_mut().zip(e.values()) {
                    *a += c * b;
                }
            }
            Field::scalar(v, domain.cell_volume())
        }
        CorpusKind::Sine => {
            let modes: Vec<(f64, f64, f64)> = (1..=4)
                .flat_map(|k| (1..=4).map(move |l| (k as f64, l as f64)))
                .map(|(k, l)| {
                    let a: f64 = rng.sample(StandardNormal);
                    (k, l, a / (k * k + l * l))
                })
                .collect();
            domain.sample(|x, y| {
                modes
                    .iter()
                    .filter(|m| two_d || m.1 == 1.0)
                    .map(|&(k, l, a)| {
                        let sy = if two_d { (l * PI * y / ly).sin() } else { 1.0 };
                        a * (k * PI * x / lx).sin() * sy
                    })
                    .sum()
            })
        }
        CorpusKind::Gaussian => {
            let (cx, cy) = (rng.random_range(0.2..0.8), rng.random_range(0.2..0.8));
            let sigma = rng.random_range(0.03..0.2) * lx;
            domain.sample(|x, y| {
                let dy = if two_d { y - cy * ly } else { 0.0 };
                let r2 = (x - cx * lx).powi(2) + dy * dy;
                (-r2 / (2.0 * sigma * sigma)).exp()
            })
        }
        CorpusKind::BoundaryLayer => {
            let eps = rng.random_range(0.02..0.1) * lx;
            let d = domain.distance_to_boundary();
            Field::scalar(d.iter().map(|&d| (d / eps) * (1.0 - d / eps).exp()).collect(), domain.cell_volume())
        }
        CorpusKind::Indicator => domain.indicator(rng.random_range(0..dof)),
    };
    if field.is_zero() {
        // a sine draw can vanish on a coarse grid; the constant keeps the member nonzero
        domain.ones()
    } else {
        field
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dirichlet_laplacian, DomainDescriptor};

    fn setup(desc: DomainDescriptor) -> (GridDomain, SpectralDecomposition) {
        let d = GridDomain::build(&desc).unwrap();
        let sd = SpectralDecomposition::new(&dirichlet_laplacian(&d), d.cell_volume()).unwrap();
        (d, sd)
    }

    #[test]
    fn deterministic_and_nonzero() {
        let (d, sd) = setup(DomainDescriptor::square_with_obstacle(10, 2));
        let a = generate_corpus(&d, &sd, &CorpusKind::ALL, 12, 1, 9).unwrap();
        let b = generate_corpus(&d, &sd, &CorpusKind::ALL, 12, 1, 9).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.field, y.field);
            assert_eq!(x.id, y.id);
            assert!(!x.field.is_zero());
        }
        let c = generate_corpus(&d, &sd, &CorpusKind::ALL, 12, 1, 10).unwrap();
        assert!(a.iter().zip(&c).any(|(x, y)| x.field != y.field));
        // prefix stability: a member does not depend on the corpus size
        let short = generate_corpus(&d, &sd, &CorpusKind::ALL, 3, 1, 9).unwrap();
        assert_eq!(short[2].field, a[2].field);
    }

    #[test]
    fn band_is_spectrally_confined() {
        let (d, sd) = setup(DomainDescriptor::square(10));
        for m in generate_corpus(&d, &sd, &[CorpusKind::Band], 6, 1, 1).unwrap() {
            let c = sd.coefficients(&m.field);
            let mass: Vec<f64> = (0..sd.dof()).map(|i| c[(i, 0)].abs()).collect();
            let first = mass.iter().position(|&v| v > 1e-8).unwrap();
            let last = mass.iter().rposition(|&v| v > 1e-8).unwrap();
            let outside: f64 = mass.iter().enumerate().filter(|(i, _)| *i < first || *i > last).map(|(_, v)| v * v).sum();
            let total: f64 = mass.iter().map(|v| v * v).sum();
            assert!(outside <= 1e-10 * total);
            assert!(last - first < sd.dof() / 8);
        }
    }

    #[test]
    fn components_are_independent_and_nonzero() {
        let (d, sd) = setup(DomainDescriptor::interval(1.0, 30));
        for m in generate_corpus(&d, &sd, &CorpusKind::ALL, 6, 4, 5).unwrap() {
            assert_eq!(m.field.components(), 4);
            let parts = m.field.split_components();
            assert!(parts.iter().all(|p| p.iter().any(|&v| v != 0.0)), "{}", m.id);
        }
    }

    #[test]
    fn continuum_kinds_agree_across_grids() {
        let (c, sc) = setup(DomainDescriptor::square(15));
        let (f, sf) = setup(DomainDescriptor::square(31));
        let kinds = [CorpusKind::Sine, CorpusKind::Gaussian];
        let coarse = generate_corpus(&c, &sc, &kinds, 2, 1, 4).unwrap();
        let fine = generate_corpus(&f, &sf, &kinds, 2, 1, 4).unwrap();
        // coarse cell (i, j) has the same centre as fine cell (2i+1, 2j+1)
        for (a, b) in coarse.iter().zip(&fine) {
            for i in 0..c.dof() {
                let [x, y] = c.cells()[i];
                let j = f.index_of(2 * x as isize + 1, 2 * y as isize + 1).unwrap();
                assert!((a.field.values()[i] - b.field.values()[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unknown_kind() {
        assert!(matches!("fractal".parse::<CorpusKind>(), Err(Error::UnknownCorpusKind(_))));
        assert_eq!("boundary-layer".parse::<CorpusKind>().unwrap(), CorpusKind::BoundaryLayer);
    }
}
