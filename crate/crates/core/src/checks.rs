//! Self-test of the discrete operators on a given mesh with random fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::{EdgeField, FaceField, Field, StencilField};
use crate::mesh::{EdgeOrientation, TriMesh};
use crate::operators::{self, OperatorBundle};

/// Pass threshold for every residual in [`OperatorCheckReport`].
pub const CHECK_TOLERANCE: f64 = 1e-10;

/// Worst residual of each check over all trials.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OperatorCheckReport {
    /// `|(Du, v)_V - (u, D*v)_U| / (|u|_U |v|_V)`
    pub adjoint_d: f64,
    /// `|(G2 u, w)_W - (u, G2* w)_U| / (|u|_U |w|_W)`
    pub adjoint_grad2: f64,
    /// Largest entry of `D c` and `G2 c` for constant `c`.
    pub kernel: f64,
    /// Largest violation of `D' u = -D u` and `G2' u = G2 u` under flipped
    /// edge orientation.
    pub orientation: f64,
    /// Largest difference between matrix and matrix-free applications.
    pub matrix_vs_free: f64,
    pub trials: usize,
}

impl OperatorCheckReport {
    pub fn max_residual(&self) -> f64 {
        self.adjoint_d
            .max(self.adjoint_grad2)
            .max(self.kernel)
            .max(self.orientation)
            .max(self.matrix_vs_free)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= CHECK_TOLERANCE
    }

    pub fn lines(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("adjoint_d", self.adjoint_d),
            ("adjoint_grad2", self.adjoint_grad2),
            ("kernel", self.kernel),
            ("orientation", self.orientation),
            ("matrix_vs_free", self.matrix_vs_free),
        ]
    }
}

pub fn random_field<S>(rng: &mut impl Rng, channels: usize, len: usize) -> Field<S> {
    let data = (0..channels * len)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    Field::from_raw(channels, len, data).expect("shape matches by construction")
}

fn max_abs_diff<S>(a: &Field<S>, b: &Field<S>) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn relative_gap(lhs: f64, rhs: f64, scale: f64) -> f64 {
    let gap = (lhs - rhs).abs();
    if scale > 0.0 {
        gap / scale
    } else {
        gap
    }
}

pub fn run_operator_checks(
    mesh: &TriMesh,
    trials: usize,
    seed: u64,
) -> Result<OperatorCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ops = OperatorBundle::assemble(mesh);
    let flipped_orientation = match mesh.orientation() {
        EdgeOrientation::LowToHigh => EdgeOrientation::HighToLow,
        EdgeOrientation::HighToLow => EdgeOrientation::LowToHigh,
    };
    let flipped = TriMesh::with_orientation(
        mesh.positions().to_vec(),
        mesh.faces().to_vec(),
        flipped_orientation,
    )?;
    let t = mesh.face_count();
    let e = mesh.edge_count();

    let mut report = OperatorCheckReport {
        trials,
        ..Default::default()
    };

    let constant = FaceField::constant(3, t, rng.gen_range(-2.0..2.0));
    let kernel_d = operators::apply_d(mesh, &constant)?;
    let kernel_g2 = operators::apply_grad2(mesh, &constant)?;
    report.kernel = kernel_d
        .as_slice()
        .iter()
        .chain(kernel_g2.as_slice())
        .map(|x| x.abs())
        .fold(0.0, f64::max);

    for _ in 0..trials {
        let u: FaceField = random_field(&mut rng, 1, t);
        let v: EdgeField = random_field(&mut rng, 1, e);
        let w: StencilField = random_field(&mut rng, 1, 3 * t);

        let du = operators::apply_d(mesh, &u)?;
        let dsv = operators::apply_d_star(mesh, &v)?;
        let g2u = operators::apply_grad2(mesh, &u)?;
        let g2sw = operators::apply_grad2_star(mesh, &w)?;

        let nu = operators::norm_u(mesh, &u)?;
        report.adjoint_d = report.adjoint_d.max(relative_gap(
            operators::inner_v(mesh, &du, &v)?,
            operators::inner_u(mesh, &u, &dsv)?,
            nu * operators::norm_v(mesh, &v)?,
        ));
        report.adjoint_grad2 = report.adjoint_grad2.max(relative_gap(
            operators::inner_w(mesh, &g2u, &w)?,
            operators::inner_u(mesh, &u, &g2sw)?,
            nu * operators::norm_w(mesh, &w)?,
        ));

        let du_flip = operators::apply_d(&flipped, &u)?;
        let g2u_flip = operators::apply_grad2(&flipped, &u)?;
        let sign_gap = max_abs_diff(&du_flip.map(|x| -x), &du);
        report.orientation = report
            .orientation
            .max(sign_gap)
            .max(max_abs_diff(&g2u_flip, &g2u));

        report.matrix_vs_free = report
            .matrix_vs_free
            .max(max_abs_diff(&ops.apply_d(&u)?, &du))
            .max(max_abs_diff(&ops.apply_d_star(&v)?, &dsv))
            .max(max_abs_diff(&ops.apply_grad2(&u)?, &g2u))
            .max(max_abs_diff(&ops.apply_grad2_star(&w)?, &g2sw));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;

    #[test]
    fn reference_meshes_pass() {
        for mesh in [
            primitives::single_triangle(),
            primitives::grid(3, 2),
            primitives::cube(2),
        ] {
            let r = run_operator_checks(&mesh, 10, 1).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }
}
