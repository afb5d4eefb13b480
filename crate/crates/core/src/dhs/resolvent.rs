use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::{BandedLu, SparseOperator};

/// Relative residual every accepted solve must meet.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Solves `(z + s·A) u = f` by a banded factorization per shift.
#[derive(Clone, Copy, Debug)]
pub struct ResolventSolver<'a> {
    op: &'a SparseOperator,
    scale: f64,
}

/// A factored shift, reusable for several right-hand sides.
pub struct FactoredShift<'a> {
    solver: ResolventSolver<'a>,
    z: Complex64,
    lu: BandedLu<Complex64>,
}

impl<'a> ResolventSolver<'a> {
    pub fn new(op: &'a SparseOperator, scale: f64) -> Result<Self> {
        if op.rows() != op.cols() || !op.is_symmetric() {
            return Err(Error::invalid("the resolvent solver needs a symmetric square operator"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!("operator scale must be positive, got {scale}")));
        }
        Ok(ResolventSolver { op, scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn factor(&self, z: Complex64) -> Result<FactoredShift<'a>> {
        let lu = BandedLu::factor(self.op, z, self.scale).map_err(|e| match e {
            Error::SolverFailure { reason, .. } => Error::SolverFailure { node: format!("z = {z}"), reason },
            other => other,
        })?;
        Ok(FactoredShift { solver: *self, z, lu })
    }

    pub fn solve(&self, z: Complex64, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.factor(z)?.solve(f)
    }
}

impl FactoredShift<'_> {
    pub fn solve(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let u = self.lu.solve(f);
        let r = self.solver.op.shifted_residual(self.z, self.solver.scale, &u, f);
        if !(r <= RESIDUAL_TOLERANCE) {
            return Err(Error::SolverFailure {
                node: format!("z = {}", self.z),
                reason: format!("relative residual {r:.3e} above {RESIDUAL_TOLERANCE:e}"),
            });
        }
        Ok(u)
    }
}
