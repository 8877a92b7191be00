//! Indexed triangle surface with the combinatorial and metric data the
//! piecewise-constant operators need: edge adjacency, relative orientation
//! signs, face areas, edge lengths, boundary flags and line stencils.

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::field::FaceField;

pub type Point = Vector3<f64>;

/// Direction assigned to every edge at construction time.
///
/// Any fixed choice yields the same operators up to per-edge signs of the
/// jump; the choice only exists so that tests can flip it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeOrientation {
    /// Edges run from the lower vertex index to the higher one.
    #[default]
    LowToHigh,
    /// Edges run from the higher vertex index to the lower one.
    HighToLow,
}

/// One face incident to an edge, with the relative orientation sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub face: usize,
    /// +1 when the edge direction agrees with the face's counter-clockwise
    /// traversal, -1 otherwise.
    pub sgn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFaces {
    pub first: Incidence,
    pub second: Option<Incidence>,
}

impl EdgeFaces {
    pub fn is_boundary(&self) -> bool {
        self.second.is_none()
    }

    /// The face on the other side of `face`, if any.
    pub fn opposite(&self, face: usize) -> Option<usize> {
        match self.second {
            Some(s) if self.first.face == face => Some(s.face),
            Some(s) if s.face == face => Some(self.first.face),
            _ => None,
        }
    }

    pub fn sgn(&self, face: usize) -> Option<f64> {
        if self.first.face == face {
            Some(self.first.sgn)
        } else {
            self.second.filter(|s| s.face == face).map(|s| s.sgn)
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Incidence> + '_ {
        std::iter::once(self.first).chain(self.second)
    }
}

/// Second-order difference stencil anchored at one vertex of a face.
///
/// `e_plus` and `e_minus` are the two edges of `tau` meeting at the apex;
/// `tau_plus` and `tau_minus` are the faces across them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineStencil {
    pub tau: usize,
    pub apex: usize,
    pub e_plus: usize,
    pub e_minus: usize,
    pub tau_plus: Option<usize>,
    pub tau_minus: Option<usize>,
    /// False when either edge lies on the boundary; the stencil then
    /// evaluates to zero.
    pub active: bool,
}

impl LineStencil {
    /// `(tau_plus, tau, tau_minus)` for an active stencil.
    pub fn faces(&self) -> Option<(usize, usize, usize)> {
        if !self.active {
            return None;
        }
        Some((self.tau_plus?, self.tau, self.tau_minus?))
    }
}

/// Immutable triangle mesh.
#[derive(Debug, Clone)]
pub struct TriMesh {
    positions: Vec<Point>,
    faces: Vec<[usize; 3]>,
    orientation: EdgeOrientation,
    edges: Vec<[usize; 2]>,
    edge_faces: Vec<EdgeFaces>,
    // Edge `i` of a face is the one opposite its local vertex `i`.
    face_edges: Vec<[usize; 3]>,
    face_sgn: Vec<[f64; 3]>,
    area: Vec<f64>,
    edge_len: Vec<f64>,
    stencils: Vec<[LineStencil; 3]>,
    vertex_faces: Vec<Vec<usize>>,
}

impl TriMesh {
    /// Builds a mesh with the default low-to-high edge orientation.
    pub fn new(positions: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<Self> {
        Self::with_orientation(positions, faces, EdgeOrientation::LowToHigh)
    }

    pub fn with_orientation(
        positions: Vec<Point>,
        faces: Vec<[usize; 3]>,
        orientation: EdgeOrientation,
    ) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if let Some(vertex) = positions
            .iter()
            .position(|p| !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::NonFiniteVertex { vertex });
        }
        for (f, tri) in faces.iter().enumerate() {
            for &index in tri {
                if index >= positions.len() {
                    return Err(Error::IndexOutOfRange {
                        face: f,
                        index,
                        vertex_count: positions.len(),
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::DegenerateFace { face: f });
            }
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_faces: Vec<EdgeFaces> = Vec::new();
        let mut face_edges = Vec::with_capacity(faces.len());
        let mut face_sgn = Vec::with_capacity(faces.len());

        for (f, tri) in faces.iter().enumerate() {
            let mut fe = [0usize; 3];
            let mut fs = [0.0f64; 3];
            for i in 0..3 {
                // Traversal direction of the edge opposite local vertex i.
                let from = tri[(i + 1) % 3];
                let to = tri[(i + 2) % 3];
                let canonical = match orientation {
                    EdgeOrientation::LowToHigh => [from.min(to), from.max(to)],
                    EdgeOrientation::HighToLow => [from.max(to), from.min(to)],
                };
                let sgn = if canonical == [from, to] { 1.0 } else { -1.0 };
                let key = (from.min(to), from.max(to));
                let incidence = Incidence { face: f, sgn };
                let e = match edge_index.get(&key) {
                    Some(&e) => {
                        let slot = &mut edge_faces[e];
                        if slot.second.is_some() {
                            return Err(Error::NonManifoldEdge { a: key.0, b: key.1 });
                        }
                        if slot.first.sgn == sgn {
                            return Err(Error::InconsistentOrientation {
                                first: slot.first.face,
                                second: f,
                            });
                        }
                        slot.second = Some(incidence);
                        e
                    }
                    None => {
                        let e = edges.len();
                        edges.push(canonical);
                        edge_faces.push(EdgeFaces {
                            first: incidence,
                            second: None,
                        });
                        edge_index.insert(key, e);
                        e
                    }
                };
                fe[i] = e;
                fs[i] = sgn;
            }
            face_edges.push(fe);
            face_sgn.push(fs);
        }

        let edge_len: Vec<f64> = edges
            .iter()
            .map(|&[a, b]| (positions[b] - positions[a]).norm())
            .collect();

        let mut area = Vec::with_capacity(faces.len());
        for (f, tri) in faces.iter().enumerate() {
            let cross = face_cross(&positions, tri);
            let longest = face_edges[f]
                .iter()
                .map(|&e| edge_len[e])
                .fold(0.0f64, f64::max);
            let twice_area = cross.norm();
            if !(twice_area > f64::EPSILON * longest * longest) {
                return Err(Error::DegenerateFace { face: f });
            }
            area.push(0.5 * twice_area);
        }

        let mut stencils = Vec::with_capacity(faces.len());
        for f in 0..faces.len() {
            let fe = face_edges[f];
            let mut local = [LineStencil {
                tau: f,
                apex: 0,
                e_plus: 0,
                e_minus: 0,
                tau_plus: None,
                tau_minus: None,
                active: false,
            }; 3];
            for (apex, stencil) in local.iter_mut().enumerate() {
                // The two edges touching local vertex `apex` are the ones
                // opposite the other two local vertices.
                let e_plus = fe[(apex + 2) % 3];
                let e_minus = fe[(apex + 1) % 3];
                let tau_plus = edge_faces[e_plus].opposite(f);
                let tau_minus = edge_faces[e_minus].opposite(f);
                if tau_plus.is_some() && tau_plus == tau_minus {
                    return Err(Error::DegenerateStencil { face: f });
                }
                *stencil = LineStencil {
                    tau: f,
                    apex,
                    e_plus,
                    e_minus,
                    tau_plus,
                    tau_minus,
                    active: tau_plus.is_some() && tau_minus.is_some(),
                };
            }
            stencils.push(local);
        }

        let mut vertex_faces = vec![Vec::new(); positions.len()];
        for (f, tri) in faces.iter().enumerate() {
            for &v in tri {
                vertex_faces[v].push(f);
            }
        }

        Ok(Self {
            positions,
            faces,
            orientation,
            edges,
            edge_faces,
            face_edges,
            face_sgn,
            area,
            edge_len,
            stencils,
            vertex_faces,
        })
    }

    /// Same connectivity and edge orientation, new vertex positions.
    pub fn with_positions(&self, positions: Vec<Point>) -> Result<Self> {
        if positions.len() != self.positions.len() {
            return Err(Error::SizeMismatch {
                expected: self.positions.len(),
                found: positions.len(),
            });
        }
        Self::with_orientation(positions, self.faces.clone(), self.orientation)
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn orientation(&self) -> EdgeOrientation {
        self.orientation
    }

    /// Canonically oriented vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_faces(&self) -> &[EdgeFaces] {
        &self.edge_faces
    }

    pub fn face_edges(&self) -> &[[usize; 3]] {
        &self.face_edges
    }

    /// Relative orientation of each face's edges, aligned with `face_edges`.
    pub fn face_edge_signs(&self) -> &[[f64; 3]] {
        &self.face_sgn
    }

    pub fn areas(&self) -> &[f64] {
        &self.area
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_len
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_faces[e].is_boundary()
    }

    pub fn stencils(&self) -> &[[LineStencil; 3]] {
        &self.stencils
    }

    pub fn vertex_faces(&self) -> &[Vec<usize>] {
        &self.vertex_faces
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edge_faces.iter().filter(|e| e.is_boundary()).count()
    }

    pub fn active_stencil_count(&self) -> usize {
        self.stencils.iter().flatten().filter(|s| s.active).count()
    }

    pub fn total_area(&self) -> f64 {
        self.area.iter().sum()
    }

    pub fn barycenter(&self, face: usize) -> Point {
        let [a, b, c] = self.faces[face];
        (self.positions[a] + self.positions[b] + self.positions[c]) / 3.0
    }

    /// Unit normals following the counter-clockwise vertex order.
    pub fn face_normals(&self) -> Result<FaceField> {
        let mut normals = Vec::with_capacity(self.faces.len());
        for (f, tri) in self.faces.iter().enumerate() {
            let n = face_cross(&self.positions, tri);
            let len = n.norm();
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::DegenerateFace { face: f });
            }
            normals.push(n / len);
        }
        Ok(FaceField::from_vectors(&normals))
    }

    /// Average edge length, the unit of the noise protocol.
    pub fn mean_edge_length(&self) -> f64 {
        self.edge_len.iter().sum::<f64>() / self.edge_len.len() as f64
    }
}

pub(crate) fn face_cross(positions: &[Point], tri: &[usize; 3]) -> Point {
    let [a, b, c] = *tri;
    (positions[b] - positions[a]).cross(&(positions[c] - positions[a]))
}

/// Convenience wrapper matching the free-function style used elsewhere.
pub fn build_mesh(positions: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<TriMesh> {
    TriMesh::new(positions, faces)
}

pub fn face_normals(mesh: &TriMesh) -> Result<FaceField> {
    mesh.face_normals()
}

pub fn mean_edge_length(mesh: &TriMesh) -> f64 {
    mesh.mean_edge_length()
}
