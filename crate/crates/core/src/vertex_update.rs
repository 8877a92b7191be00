//! Vertex positions from a filtered normal field.
//!
//! Each sweep moves every vertex towards the planes of its incident faces,
//! where each plane passes through the face barycenter with the filtered
//! normal. Updates are Jacobi style: all new positions are computed from
//! the previous sweep.

use crate::error::{Error, Result};
use crate::field::FaceField;
use crate::mesh::{Point, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexUpdateParams {
    pub iterations: usize,
    /// Fraction of the averaged correction applied per sweep, in (0, 1].
    pub step: f64,
}

impl Default for VertexUpdateParams {
    fn default() -> Self {
        Self {
            iterations: 20,
            step: 1.0,
        }
    }
}

impl VertexUpdateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "vertex step must lie in (0, 1], got {}",
                self.step
            )));
        }
        Ok(())
    }
}

fn barycenters(faces: &[[usize; 3]], positions: &[Point]) -> Vec<Point> {
    faces
        .iter()
        .map(|&[a, b, c]| (positions[a] + positions[b] + positions[c]) / 3.0)
        .collect()
}

/// Returns updated positions; connectivity is that of `mesh`. Vertices
/// with no incident face stay where they are.
pub fn update_vertices(
    mesh: &TriMesh,
    normals: &FaceField,
    params: &VertexUpdateParams,
) -> Result<Vec<Point>> {
    params.validate()?;
    normals.ensure_shape(3, mesh.face_count())?;
    let normals = normals.to_vectors();
    let faces = mesh.faces();
    let mut current = mesh.positions().to_vec();
    for _ in 0..params.iterations {
        let centres = barycenters(faces, &current);
        let next: Vec<Point> = current
            .iter()
            .zip(mesh.vertex_faces())
            .map(|(v, incident)| {
                if incident.is_empty() {
                    return *v;
                }
                let mut shift = Point::zeros();
                for &f in incident {
                    let n = &normals[f];
                    shift += n * n.dot(&(centres[f] - v));
                }
                v + shift * (params.step / incident.len() as f64)
            })
            .collect();
        current = next;
    }
    Ok(current)
}

/// `sum_f sum_{v in f} (N_f . (c_f - v))^2`, the quantity the update drives
/// down.
pub fn plane_residual(faces: &[[usize; 3]], positions: &[Point], normals: &FaceField) -> f64 {
    let centres = barycenters(faces, positions);
    let mut total = 0.0;
    for (f, tri) in faces.iter().enumerate() {
        let n = normals.vector(f);
        for &v in tri {
            let d = n.dot(&(centres[f] - positions[v]));
            total += d * d;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;

    #[test]
    fn flat_mesh_with_true_normals_is_fixed() {
        let mesh = primitives::grid(4, 4);
        let n = mesh.face_normals().unwrap();
        let out = update_vertices(&mesh, &n, &VertexUpdateParams::default()).unwrap();
        assert_eq!(out, mesh.positions());
    }

    #[test]
    fn zero_iterations_is_identity() {
        let mesh = primitives::icosphere(1);
        let n = FaceField::from_vectors(&vec![Point::new(1.0, 0.0, 0.0); mesh.face_count()]);
        let params = VertexUpdateParams {
            iterations: 0,
            step: 1.0,
        };
        assert_eq!(
            update_vertices(&mesh, &n, &params).unwrap(),
            mesh.positions()
        );
    }

    #[test]
    fn isolated_vertex_is_left_alone() {
        let mut positions = primitives::single_triangle().positions().to_vec();
        positions.push(Point::new(5.0, 5.0, 5.0));
        let mesh = TriMesh::new(positions, vec![[0, 1, 2]]).unwrap();
        let n = FaceField::from_vectors(&[Point::new(0.0, 0.6, 0.8)]);
        let out = update_vertices(&mesh, &n, &VertexUpdateParams::default()).unwrap();
        assert_eq!(out[3], Point::new(5.0, 5.0, 5.0));
    }

    #[test]
    fn tangential_perturbation_residual_does_not_grow() {
        let cube = primitives::cube(4);
        let normals = cube.face_normals().unwrap();
        // Shift interior vertices of each side within that side's plane.
        let mut positions = cube.positions().to_vec();
        for (i, p) in positions.iter_mut().enumerate() {
            let on_side: Vec<usize> = (0..3).filter(|&a| p[a] == 0.0 || p[a] == 1.0).collect();
            if on_side.len() == 1 {
                let fixed = on_side[0];
                let wobble = 0.05 * ((i * 7919 % 13) as f64 / 13.0 - 0.5);
                for a in 0..3 {
                    if a != fixed {
                        p[a] += wobble;
                    }
                }
            }
        }
        let perturbed = cube.with_positions(positions).unwrap();
        let mut residuals = vec![plane_residual(
            cube.faces(),
            perturbed.positions(),
            &normals,
        )];
        let mut mesh = perturbed;
        for _ in 0..10 {
            let params = VertexUpdateParams {
                iterations: 1,
                step: 1.0,
            };
            let next = update_vertices(&mesh, &normals, &params).unwrap();
            residuals.push(plane_residual(cube.faces(), &next, &normals));
            mesh = mesh.with_positions(next).unwrap();
        }
        for w in residuals.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "{residuals:?}");
        }
    }
}
