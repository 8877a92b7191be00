//! Seeded Gaussian vertex noise with standard deviation relative to the
//! mean edge length.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectionMode {
    /// Uniformly distributed unit vectors.
    #[default]
    RandomUnit,
    /// The area-weighted vertex normal.
    VertexNormal,
}

impl std::str::FromStr for DirectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-unit" => Ok(Self::RandomUnit),
            "vertex-normal" => Ok(Self::VertexNormal),
            other => Err(Error::InvalidParameter(format!(
                "unknown direction mode {other:?} (expected random-unit or vertex-normal)"
            ))),
        }
    }
}

impl std::fmt::Display for DirectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::RandomUnit => "random-unit",
            Self::VertexNormal => "vertex-normal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation as a multiple of the mean edge length.
    pub sigma_rel: f64,
    pub direction_mode: DirectionMode,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            sigma_rel: 0.3,
            direction_mode: DirectionMode::RandomUnit,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_rel >= 0.0) || !self.sigma_rel.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma_rel must be finite and non-negative, got {}",
                self.sigma_rel
            )));
        }
        Ok(())
    }

    /// Provenance record written next to a noisy mesh.
    pub fn meta(&self, mesh: &TriMesh, source: &str) -> String {
        let l = mesh.mean_edge_length();
        let mut out = String::new();
        let _ = writeln!(out, "source={source}");
        let _ = writeln!(out, "sigma_rel={}", self.sigma_rel);
        let _ = writeln!(out, "direction_mode={}", self.direction_mode);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "mean_edge_length={l}");
        let _ = writeln!(out, "sigma={}", self.sigma_rel * l);
        out
    }
}

fn vertex_normals(mesh: &TriMesh) -> Vec<Point> {
    let mut normals = vec![Point::zeros(); mesh.vertex_count()];
    for tri in mesh.faces() {
        // The cross product's length is twice the area.
        let [a, b, c] = *tri;
        let p = mesh.positions();
        let n = (p[b] - p[a]).cross(&(p[c] - p[a]));
        for &v in tri {
            normals[v] += n;
        }
    }
    normals
        .into_iter()
        .map(|n| {
            let len = n.norm();
            if len > 0.0 {
                n / len
            } else {
                n
            }
        })
        .collect()
}

/// Per-vertex displacement vectors for `spec`.
pub fn displacements(mesh: &TriMesh, spec: &NoiseSpec) -> Result<Vec<Point>> {
    spec.validate()?;
    let sigma = spec.sigma_rel * mesh.mean_edge_length();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let amplitude = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidParameter(format!("noise amplitude: {e}")))?;
    let normals = match spec.direction_mode {
        DirectionMode::VertexNormal => Some(vertex_normals(mesh)),
        DirectionMode::RandomUnit => None,
    };
    let mut out = Vec::with_capacity(mesh.vertex_count());
    for v in 0..mesh.vertex_count() {
        let direction = match &normals {
            Some(n) => n[v],
            None => loop {
                let d = Point::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                );
                let len = d.norm();
                if len > 1e-12 {
                    break d / len;
                }
            },
        };
        let g: f64 = amplitude.sample(&mut rng);
        out.push(direction * g);
    }
    Ok(out)
}

/// Displaces every vertex by `g * d` with `g ~ N(0, (sigma_rel * mean
/// edge length)^2)`. The same seed always yields the same mesh.
pub fn add_noise(mesh: &TriMesh, spec: &NoiseSpec) -> Result<TriMesh> {
    let shifts = displacements(mesh, spec)?;
    let positions = mesh
        .positions()
        .iter()
        .zip(&shifts)
        .map(|(p, d)| p + d)
        .collect();
    mesh.with_positions(positions)
}
