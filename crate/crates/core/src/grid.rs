//! Cell-centred grid domains and their Dirichlet, Neumann and gradient stencils.
//!
//! A domain is a boolean mask over a bounding box of cells with spacing `h`.
//! Cells outside the mask (including everything outside the box) carry the
//! value zero, which is how the Dirichlet condition enters: the boundary is
//! never represented by cells of its own.
//!
//! The gradient uses forward differences on every edge that touches an
//! interior cell. Its output lives on the interior cells followed by the
//! "ghost" cells just below/left of the mask, so that `∇ᵀ∇ = −Δ_D` holds as a
//! matrix identity and `⟨−Δ_D f, f⟩ = Σ|∇f|² h^n` exactly.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::sparse::{Definiteness, SparseOperator};

/// How a domain is described in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainDescriptor {
    /// `cells` interior cells on `(0, length)`, spacing `length / (cells + 1)`.
    Interval { length: f64, cells: usize },
    /// `nx × ny` interior cells on `(0, width) × (0, height)`.
    Rectangle { width: f64, height: f64, cells: [usize; 2] },
    /// A rectangle with the half-open cell block `[x0, x1) × [y0, y1)` removed.
    Obstacle { width: f64, height: f64, cells: [usize; 2], obstacle: [usize; 4] },
    /// Explicit mask, one string per row (`#` or `1` marks an interior cell).
    Mask { spacing: f64, dimension: usize, rows: Vec<String> },
}

impl DomainDescriptor {
    pub fn interval(length: f64, cells: usize) -> Self {
        DomainDescriptor::Interval { length, cells }
    }

    /// Unit square with `n × n` interior cells.
    pub fn square(n: usize) -> Self {
        DomainDescriptor::Rectangle { width: 1.0, height: 1.0, cells: [n, n] }
    }

    /// Unit square with `n × n` cells and a centred `m × m` obstacle.
    pub fn square_with_obstacle(n: usize, m: usize) -> Self {
        let lo = (n - m) / 2;
        DomainDescriptor::Obstacle {
            width: 1.0,
            height: 1.0,
            cells: [n, n],
            obstacle: [lo, lo, lo + m, lo + m],
        }
    }

    /// Short human-readable tag used in reports.
    pub fn label(&self) -> String {
        match self {
            DomainDescriptor::Interval { cells, .. } => format!("1d-{cells}"),
            DomainDescriptor::Rectangle { cells, .. } => format!("2d-{}x{}", cells[0], cells[1]),
            DomainDescriptor::Obstacle { cells, obstacle, .. } => format!(
                "2d-{}x{}-obstacle-{}x{}",
                cells[0],
                cells[1],
                obstacle[2] - obstacle[0],
                obstacle[3] - obstacle[1]
            ),
            DomainDescriptor::Mask { dimension, rows, .. } => {
                format!("{dimension}d-mask-{}x{}", rows.first().map_or(0, |r| r.len()), rows.len())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct GridDomain {
    dimension: usize,
    spacing: f64,
    shape: [usize; 2],
    mask: Vec<bool>,
    dof_of: Vec<Option<usize>>,
    cells: Vec<[usize; 2]>,
    grad_points: Vec<[isize; 2]>,
}

const AXES: [[isize; 2]; 2] = [[1, 0], [0, 1]];

impl GridDomain {
    /// Builds and validates a domain from its descriptor.
    pub fn build(desc: &DomainDescriptor) -> Result<Self> {
        match *desc {
            DomainDescriptor::Interval { length, cells } => {
                check_length(length)?;
                if cells == 0 {
                    return Err(Error::EmptyDomain);
                }
                Self::from_mask(1, length / (cells as f64 + 1.0), [cells, 1], vec![true; cells])
            }
            DomainDescriptor::Rectangle { width, height, cells } => {
                let h = rectangle_spacing(width, height, cells)?;
                Self::from_mask(2, h, cells, vec![true; cells[0] * cells[1]])
            }
            DomainDescriptor::Obstacle { width, height, cells, obstacle } => {
                let h = rectangle_spacing(width, height, cells)?;
                let [x0, y0, x1, y1] = obstacle;
                if x0 >= x1 || y0 >= y1 || x1 > cells[0] || y1 > cells[1] {
                    return Err(Error::InvalidDescriptor(format!(
                        "obstacle {obstacle:?} is empty or leaves the {}x{} box",
                        cells[0], cells[1]
                    )));
                }
                let mask = (0..cells[1])
                    .flat_map(|y| (0..cells[0]).map(move |x| !(x0..x1).contains(&x) || !(y0..y1).contains(&y)))
                    .collect();
                Self::from_mask(2, h, cells, mask)
            }
            DomainDescriptor::Mask { spacing, dimension, ref rows } => {
                check_length(spacing)?;
                let ny = rows.len();
                let nx = rows.first().map_or(0, |r| r.chars().count());
                if ny == 0 || nx == 0 {
                    return Err(Error::EmptyDomain);
                }
                if rows.iter().any(|r| r.chars().count() != nx) {
                    return Err(Error::InvalidDescriptor("mask rows differ in length".into()));
                }
                if dimension == 1 && ny != 1 {
                    return Err(Error::InvalidDescriptor("a 1d mask has exactly one row".into()));
                }
                let mut mask = Vec::with_capacity(nx * ny);
                for r in rows {
                    for ch in r.chars() {
                        mask.push(match ch {
                            '#' | '1' => true,
                            '.' | '0' => false,
                            other => {
                                return Err(Error::InvalidDescriptor(format!("unexpected mask character {other:?}")))
                            }
                        });
                    }
                }
                Self::from_mask(dimension, spacing, [nx, ny], mask)
            }
        }
    }

    /// Builds a domain from a row-major mask (`x` fastest).
    pub fn from_mask(dimension: usize, spacing: f64, shape: [usize; 2], mask: Vec<bool>) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::InvalidDescriptor(format!("dimension must be 1 or 2, got {dimension}")));
        }
        if dimension == 1 && shape[1] != 1 {
            return Err(Error::InvalidDescriptor("a 1d domain has a single row".into()));
        }
        check_length(spacing)?;
        if mask.len() != shape[0] * shape[1] {
            return Err(Error::InvalidDescriptor("mask size does not match shape".into()));
        }
        let mut dof_of = vec![None; mask.len()];
        let mut cells = Vec::new();
        for y in 0..shape[1] {
            for x in 0..shape[0] {
                if mask[y * shape[0] + x] {
                    dof_of[y * shape[0] + x] = Some(cells.len());
                    cells.push([x, y]);
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let mut d = GridDomain { dimension, spacing, shape, mask, dof_of, cells, grad_points: Vec::new() };
        let components = d.count_components();
        if components > 1 {
            return Err(Error::DisconnectedDomain { components });
        }
        d.grad_points = d.collect_gradient_points();
        Ok(d)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `h^n`, the weight of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dimension as i32)
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn dof(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[[usize; 2]] {
        &self.cells
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Index of the interior cell at box coordinates, if any.
    pub fn index_of(&self, x: isize, y: isize) -> Option<usize> {
        if x < 0 || y < 0 || x as usize >= self.shape[0] || y as usize >= self.shape[1] {
            return None;
        }
        self.dof_of[y as usize * self.shape[0] + x as usize]
    }

    /// Physical centre of box cell `(x, y)`; the box edge sits at coordinate 0.
    pub fn center_of(&self, x: isize, y: isize) -> [f64; 2] {
        [(x as f64 + 1.0) * self.spacing, (y as f64 + 1.0) * self.spacing]
    }

    /// Side lengths of the box whose edges carry the Dirichlet condition.
    pub fn extent(&self) -> [f64; 2] {
        let ny = if self.dimension == 1 { 0.0 } else { self.shape[1] as f64 + 1.0 };
        [(self.shape[0] as f64 + 1.0) * self.spacing, ny * self.spacing]
    }

    pub fn cell_center(&self, i: usize) -> [f64; 2] {
        let [x, y] = self.cells[i];
        self.center_of(x as isize, y as isize)
    }

    /// Points carrying gradient values: interior cells (in dof order) followed by ghost cells.
    pub fn gradient_points(&self) -> &[[isize; 2]] {
        &self.grad_points
    }

    /// The full bounding box with the same spacing (no obstacle).
    pub fn companion_full(&self) -> GridDomain {
        GridDomain::from_mask(self.dimension, self.spacing, self.shape, vec![true; self.mask.len()])
            .expect("a full box is a valid domain")
    }

    /// Box index `(x, y)` of each interior cell of `self` inside `other`, which must share spacing and box.
    pub fn embed_into(&self, other: &GridDomain) -> Result<Vec<usize>> {
        if other.shape != self.shape || (other.spacing - self.spacing).abs() > 1e-12 * self.spacing {
            return Err(Error::invalid("domains do not share a bounding box"));
        }
        self.cells
            .iter()
            .map(|&[x, y]| {
                other
                    .index_of(x as isize, y as isize)
                    .ok_or_else(|| Error::invalid("domain is not contained in the companion"))
            })
            .collect()
    }

    /// Distance from each cell centre to the nearest exterior cell centre (the discrete boundary).
    pub fn distance_to_boundary(&self) -> Vec<f64> {
        let exterior = self.exterior_layer();
        self.cells
            .iter()
            .map(|&[x, y]| {
                exterior
                    .iter()
                    .map(|&[ex, ey]| {
                        let dx = (x as isize - ex) as f64;
                        let dy = (y as isize - ey) as f64;
                        (dx * dx + dy * dy).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
                    * self.spacing
            })
            .collect()
    }

    pub fn zeros(&self) -> Field {
        Field::zeros(self.dof(), 1, self.cell_volume())
    }

    pub fn ones(&self) -> Field {
        Field::scalar(vec![1.0; self.dof()], self.cell_volume())
    }

    pub fn indicator(&self, cell: usize) -> Field {
        let mut v = vec![0.0; self.dof()];
        v[cell] = 1.0;
        Field::scalar(v, self.cell_volume())
    }

    /// Samples `f` at the cell centres.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let v = (0..self.dof()).map(|i| {
            let [x, y] = self.cell_center(i);
            f(x, y)
        });
        Field::scalar(v.collect(), self.cell_volume())
    }

    fn axes(&self) -> &'static [[isize; 2]] {
        &AXES[..self.dimension]
    }

    fn neighbors(&self, i: usize) -> impl Iterator<Item = Option<usize>> + '_ {
        let [x, y] = self.cells[i];
        let (x, y) = (x as isize, y as isize);
        self.axes()
            .iter()
            .flat_map(move |&[dx, dy]| [self.index_of(x + dx, y + dy), self.index_of(x - dx, y - dy)])
    }

    fn count_components(&self) -> usize {
        let mut seen = vec![false; self.dof()];
        let mut components = 0;
        for start in 0..self.dof() {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for j in self.neighbors(i).flatten() {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        components
    }

    fn collect_gradient_points(&self) -> Vec<[isize; 2]> {
        let mut points: Vec<[isize; 2]> = self.cells.iter().map(|&[x, y]| [x as isize, y as isize]).collect();
        let mut ghosts = Vec::new();
        let ylo = if self.dimension == 1 { 0 } else { -1 };
        for y in ylo..self.shape[1] as isize {
            for x in -1..self.shape[0] as isize {
                if self.index_of(x, y).is_some() {
                    continue;
                }
                if self.axes().iter().any(|&[dx, dy]| self.index_of(x + dx, y + dy).is_some()) {
                    ghosts.push([x, y]);
                }
            }
        }
        points.extend(ghosts);
        points
    }

    fn exterior_layer(&self) -> Vec<[isize; 2]> {
        let (ylo, yhi) = if self.dimension == 1 { (0, 0) } else { (-1, self.shape[1] as isize) };
        let mut out = Vec::new();
        for y in ylo..=yhi {
            for x in -1..=self.shape[0] as isize {
                if self.index_of(x, y).is_some() {
                    continue;
                }
                let touches = self.axes().iter().any(|&[dx, dy]| {
                    self.index_of(x + dx, y + dy).is_some() || self.index_of(x - dx, y - dy).is_some()
                });
                if touches {
                    out.push([x, y]);
                }
            }
        }
        out
    }
}

fn check_length(v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDescriptor(format!("lengths must be positive and finite, got {v}")))
    }
}

fn rectangle_spacing(width: f64, height: f64, cells: [usize; 2]) -> Result<f64> {
    check_length(width)?;
    check_length(height)?;
    if cells[0] == 0 || cells[1] == 0 {
        return Err(Error::EmptyDomain);
    }
    let hx = width / (cells[0] as f64 + 1.0);
    let hy = height / (cells[1] as f64 + 1.0);
    if (hx - hy).abs() > 1e-12 * hx {
        return Err(Error::InvalidDescriptor(format!("anisotropic spacing {hx} vs {hy}")));
    }
    Ok(hx)
}

/// Masked 3-point (1d) or 5-point (2d) stencil for `Δ_D`, scaled by `1/h²`.
pub fn dirichlet_laplacian(d: &GridDomain) -> SparseOperator {
    let inv = 1.0 / (d.spacing * d.spacing);
    let diag = -2.0 * d.dimension as f64 * inv;
    let mut t = Vec::with_capacity(d.dof() * (1 + 2 * d.dimension));
    for i in 0..d.dof() {
        t.push((i, i, diag));
        for j in d.neighbors(i).flatten() {
            t.push((i, j, inv));
        }
    }
    SparseOperator::from_triplets(d.dof(), d.dof(), 1, t).with_definiteness(Definiteness::NegativeDefinite)
}

/// Reflecting (no-flux) stencil: only edges between two interior cells contribute.
pub fn neumann_laplacian(d: &GridDomain) -> SparseOperator {
    let inv = 1.0 / (d.spacing * d.spacing);
    let mut t = Vec::new();
    for i in 0..d.dof() {
        let mut count = 0.0;
        for j in d.neighbors(i).flatten() {
            t.push((i, j, inv));
            count += 1.0;
        }
        t.push((i, i, -count * inv));
    }
    SparseOperator::from_triplets(d.dof(), d.dof(), 1, t).with_definiteness(Definiteness::NegativeSemidefinite)
}

/// Forward differences with zero extension, stacked by axis over [`GridDomain::gradient_points`].
pub fn gradient(d: &GridDomain) -> SparseOperator {
    let inv = 1.0 / d.spacing;
    let g = d.grad_points.len();
    let mut t = Vec::new();
    for (a, &[dx, dy]) in d.axes().iter().enumerate() {
        for (p, &[x, y]) in d.grad_points.iter().enumerate() {
            if let Some(j) = d.index_of(x + dx, y + dy) {
                t.push((a * g + p, j, inv));
            }
            if let Some(i) = d.index_of(x, y) {
                t.push((a * g + p, i, -inv));
            }
        }
    }
    SparseOperator::from_triplets(d.dimension * g, d.dof(), d.dimension, t)
}
