//! Comparison of a denoised mesh with its ground truth.

use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub mean_angular_error_deg: f64,
    pub max_angular_error_deg: f64,
    pub vertex_rms: f64,
    pub face_count: usize,
    pub vertex_count: usize,
}

/// Angle between two vectors in degrees, in `[0, 180]`.
pub fn angle_deg(a: &Point, b: &Point) -> f64 {
    a.cross(b).norm().atan2(a.dot(b)).to_degrees()
}

pub fn compute_metrics(denoised: &TriMesh, ground_truth: &TriMesh) -> Result<MetricsReport> {
    if denoised.vertex_count() != ground_truth.vertex_count() {
        return Err(Error::ConnectivityMismatch(format!(
            "{} vs {} vertices",
            denoised.vertex_count(),
            ground_truth.vertex_count()
        )));
    }
    if denoised.faces() != ground_truth.faces() {
        return Err(Error::ConnectivityMismatch("face lists differ".to_string()));
    }
    let a = denoised.face_normals()?;
    let b = ground_truth.face_normals()?;
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for f in 0..denoised.face_count() {
        let angle = angle_deg(&a.vector(f), &b.vector(f));
        sum += angle;
        max = max.max(angle);
    }
    let sq: f64 = denoised
        .positions()
        .iter()
        .zip(ground_truth.positions())
        .map(|(p, q)| (p - q).norm_squared())
        .sum();
    Ok(MetricsReport {
        mean_angular_error_deg: sum / denoised.face_count() as f64,
        max_angular_error_deg: max,
        vertex_rms: (sq / denoised.vertex_count() as f64).sqrt(),
        face_count: denoised.face_count(),
        vertex_count: denoised.vertex_count(),
    })
}

impl std::fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "faces={}", self.face_count)?;
        writeln!(f, "vertices={}", self.vertex_count)?;
        writeln!(f, "mean_angular_error_deg={}", self.mean_angular_error_deg)?;
        writeln!(f, "max_angular_error_deg={}", self.max_angular_error_deg)?;
        write!(f, "vertex_rms={}", self.vertex_rms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;
    use approx::assert_relative_eq;

    #[test]
    fn identical_meshes_score_zero() {
        let m = primitives::icosphere(1);
        let r = compute_metrics(&m, &m).unwrap();
        assert_eq!(r.mean_angular_error_deg, 0.0);
        assert_eq!(r.max_angular_error_deg, 0.0);
        assert_eq!(r.vertex_rms, 0.0);
    }

    #[test]
    fn translation_only_moves_vertices() {
        let m = primitives::cube(2);
        let h = 0.25;
        let moved = m
            .with_positions(
                m.positions()
                    .iter()
                    .map(|p| p + Point::new(0.0, 0.0, h))
                    .collect(),
            )
            .unwrap();
        let r = compute_metrics(&moved, &m).unwrap();
        assert_relative_eq!(r.vertex_rms, h, epsilon = 1e-15);
        assert!(r.mean_angular_error_deg < 1e-6);
    }

    #[test]
    fn quarter_turn_gives_ninety_degrees() {
        // Rotating a flat grid about the x axis turns every normal by 90
        // degrees.
        let m = primitives::grid(3, 3);
        let rotated = m
            .with_positions(
                m.positions()
                    .iter()
                    .map(|p| Point::new(p.x, -p.z, p.y))
                    .collect(),
            )
            .unwrap();
        let r = compute_metrics(&rotated, &m).unwrap();
        assert_relative_eq!(r.mean_angular_error_deg, 90.0, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_in_arguments() {
        let a = primitives::icosphere(1);
        let b = a
            .with_positions(
                a.positions()
                    .iter()
                    .map(|p| p * 1.1 + Point::new(0.01 * p.y, 0.0, 0.0))
                    .collect(),
            )
            .unwrap();
        let ab = compute_metrics(&a, &b).unwrap();
        let ba = compute_metrics(&b, &a).unwrap();
        assert_eq!(ab.mean_angular_error_deg, ba.mean_angular_error_deg);
    }

    #[test]
    fn mismatched_connectivity() {
        let a = primitives::cube(1);
        let b = primitives::cube(2);
        assert!(matches!(
            compute_metrics(&a, &b),
            Err(Error::ConnectivityMismatch(_))
        ));
    }
}
