//! The full pipeline: noisy normals, filtered normals, updated vertices.

use crate::error::Result;
use crate::field::FaceField;
use crate::mesh::TriMesh;
use crate::solver::{solve_normal_filter, Diagnostics, SolverParams};
use crate::vertex_update::{update_vertices, VertexUpdateParams};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DenoiseParams {
    pub solver: SolverParams,
    pub vertex: VertexUpdateParams,
}

#[derive(Debug, Clone)]
pub struct DenoiseOutput {
    pub mesh: TriMesh,
    pub normals: FaceField,
    pub diagnostics: Diagnostics,
}

/// Rescaled copy of `mesh` with unit mean edge length.
///
/// Face normals do not change under uniform scaling, so the normal filter
/// runs on this copy; that keeps one set of weights meaningful across
/// meshes of different size.
pub fn unit_scale(mesh: &TriMesh) -> Result<TriMesh> {
    let scale = 1.0 / mesh.mean_edge_length();
    mesh.with_positions(mesh.positions().iter().map(|p| p * scale).collect())
}

pub fn denoise(mesh: &TriMesh, params: &DenoiseParams) -> Result<DenoiseOutput> {
    params.solver.validate()?;
    params.vertex.validate()?;
    let scaled = unit_scale(mesh)?;
    let n0 = scaled.face_normals()?;
    let (normals, diagnostics) = solve_normal_filter(&scaled, &n0, &params.solver)?;
    let positions = update_vertices(mesh, &normals, &params.vertex)?;
    Ok(DenoiseOutput {
        mesh: mesh.with_positions(positions)?,
        normals,
        diagnostics,
    })
}
