//! Triangle mesh denoising by semi-sparse filtering of the face normal
//! field.
//!
//! Face normals are treated as a piecewise-constant function on the mesh.
//! The filter keeps them close to the noisy input, keeps their jumps across
//! edges close to the input's jumps in a group-L1 sense, and asks the
//! second differences along each face's line stencils to be sparse (L0).
//! The problem is solved by ADMM; vertex positions are then moved to agree
//! with the filtered normals.
//!
//! ```no_run
//! use semisparse::{denoise, io, DenoiseParams};
//!
//! let mesh = io::read_mesh("noisy.obj", io::ReadOptions::default())?;
//! let out = denoise::denoise(&mesh, &DenoiseParams::default())?;
//! io::write_mesh("clean.obj", &out.mesh)?;
//! # Ok::<(), semisparse::Error>(())
//! ```

pub mod checks;
pub mod denoise;
mod error;
pub mod field;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod noise;
pub mod operators;
pub mod primitives;
pub mod solver;
pub mod vertex_update;

pub use denoise::{DenoiseOutput, DenoiseParams};
pub use error::{Error, Result};
pub use field::{EdgeField, FaceField, StencilField};
pub use mesh::{EdgeOrientation, LineStencil, Point, TriMesh};
pub use metrics::{compute_metrics, MetricsReport};
pub use noise::{add_noise, DirectionMode, NoiseSpec};
pub use operators::OperatorBundle;
pub use solver::{solve_normal_filter, Diagnostics, SolverParams, ThresholdMode};
pub use vertex_update::{update_vertices, VertexUpdateParams};
