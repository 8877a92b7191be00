use sprs::{CsMat, FillInReduction, SymmetryCheck};
use sprs_ldl::{Ldl, LdlNumeric};

use crate::error::{Error, Result};
use crate::operators::spmv;

/// Relative residual accepted from a factorized solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// LDL^T factorization of a sparse symmetric positive definite matrix,
/// computed once and reused for every right-hand side.
pub struct SpdFactor {
    csr: CsMat<f64>,
    ldl: LdlNumeric<f64, usize>,
}

impl std::fmt::Debug for SpdFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpdFactor")
            .field("size", &self.csr.rows())
            .field("nnz", &self.csr.nnz())
            .finish()
    }
}

impl SpdFactor {
    pub fn new(matrix: CsMat<f64>) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::SizeMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let csc = matrix.to_csc();
        let ldl = Ldl::new()
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .check_symmetry(SymmetryCheck::DontCheckSymmetry)
            .numeric(csc.view())
            .map_err(|e| Error::LinearSolveFailure {
                reason: format!("factorization failed: {e}"),
                relative_residual: f64::NAN,
            })?;
        if let Some(pivot) = ldl.d().iter().find(|&&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::LinearSolveFailure {
                reason: format!("matrix is not positive definite (pivot {pivot:e})"),
                relative_residual: f64::NAN,
            });
        }
        Ok(Self {
            csr: csc.to_csr(),
            ldl,
        })
    }

    pub fn size(&self) -> usize {
        self.csr.rows()
    }

    pub fn matrix(&self) -> &CsMat<f64> {
        &self.csr
    }

    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = spmv(&self.csr, x);
        let r: f64 = ax
            .iter()
            .zip(b)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nb > 0.0 {
            r / nb
        } else {
            r
        }
    }

    /// Solves `A x = b`, with one round of iterative refinement if the
    /// first pass misses [`SOLVE_TOLERANCE`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.size() {
            return Err(Error::SizeMismatch {
                expected: self.size(),
                found: b.len(),
            });
        }
        let mut x: Vec<f64> = self.ldl.solve(b);
        let mut rel = self.relative_residual(&x, b);
        if !(rel <= SOLVE_TOLERANCE) && rel.is_finite() {
            let ax = spmv(&self.csr, &x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let dx: Vec<f64> = self.ldl.solve(&r[..]);
            x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
            rel = self.relative_residual(&x, b);
        }
        if !(rel <= SOLVE_TOLERANCE) {
            return Err(Error::LinearSolveFailure {
                reason: "residual above tolerance".into(),
                relative_residual: rel,
            });
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sprs::TriMat;

    #[test]
    fn solves_small_spd_system() {
        let mut t = TriMat::new((3, 3));
        for (i, j, v) in [
            (0, 0, 4.0),
            (0, 1, 1.0),
            (1, 0, 1.0),
            (1, 1, 3.0),
            (2, 2, 2.0),
            (1, 2, -0.5),
            (2, 1, -0.5),
        ] {
            t.add_triplet(i, j, v);
        }
        let f = SpdFactor::new(t.to_csc()).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = f.solve(&b).unwrap();
        assert!(f.relative_residual(&x, &b) < 1e-14);
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let mut t = TriMat::new((2, 2));
        t.add_triplet(0, 0, 1.0);
        t.add_triplet(1, 1, -1.0);
        assert!(matches!(
            SpdFactor::new(t.to_csc()),
            Err(Error::LinearSolveFailure { .. })
        ));
    }
}
