//! Discrete calculus on piecewise-constant face functions.
//!
//! `D` maps face values to signed jumps across interior edges, `grad2`
//! maps them to second differences along the three line stencils of each
//! face. Inner products are area weighted on faces and slots and length
//! weighted on edges; the adjoints below are taken with respect to those.
//!
//! The free functions are matrix-free reference implementations. The
//! solver goes through [`OperatorBundle`], which holds the same maps as
//! sparse matrices.

use std::collections::BTreeMap;

use sprs::{CsMat, TriMat};

use crate::error::Result;
use crate::field::{EdgeField, FaceField, Field, OnSlots, StencilField};
use crate::mesh::TriMesh;

/// Per-face triple of edge jumps, stored like a [`StencilField`].
pub type FaceGradient = Field<OnSlots>;

pub fn apply_d(mesh: &TriMesh, u: &FaceField) -> Result<EdgeField> {
    u.ensure_shape(u.channels(), mesh.face_count())?;
    let mut out = EdgeField::zeros(u.channels(), mesh.edge_count());
    for k in 0..u.channels() {
        let uk = u.channel(k);
        let ok = out.channel_mut(k);
        for (e, ef) in mesh.edge_faces().iter().enumerate() {
            if let Some(second) = ef.second {
                ok[e] = uk[ef.first.face] * ef.first.sgn + uk[second.face] * second.sgn;
            }
        }
    }
    Ok(out)
}

/// Adjoint of [`apply_d`]: `(D u, v)_V = (u, D* v)_U`.
pub fn apply_d_star(mesh: &TriMesh, v: &EdgeField) -> Result<FaceField> {
    v.ensure_shape(v.channels(), mesh.edge_count())?;
    let mut out = FaceField::zeros(v.channels(), mesh.face_count());
    let len = mesh.edge_lengths();
    for k in 0..v.channels() {
        let vk = v.channel(k);
        let ok = out.channel_mut(k);
        for (f, (edges, signs)) in mesh
            .face_edges()
            .iter()
            .zip(mesh.face_edge_signs())
            .enumerate()
        {
            let mut acc = 0.0;
            for i in 0..3 {
                let e = edges[i];
                if !mesh.is_boundary_edge(e) {
                    acc += vk[e] * signs[i] * len[e];
                }
            }
            ok[f] = acc / mesh.areas()[f];
        }
    }
    Ok(out)
}

/// The jumps across the three edges of every face; slot `i` holds the
/// edge opposite local vertex `i`.
pub fn apply_grad(mesh: &TriMesh, u: &FaceField) -> Result<FaceGradient> {
    let jumps = apply_d(mesh, u)?;
    let mut out = FaceGradient::zeros(u.channels(), 3 * mesh.face_count());
    for k in 0..u.channels() {
        let jk = jumps.channel(k);
        let ok = out.channel_mut(k);
        for (f, edges) in mesh.face_edges().iter().enumerate() {
            for i in 0..3 {
                ok[3 * f + i] = jk[edges[i]];
            }
        }
    }
    Ok(out)
}

/// Second differences `u(tau+) - 2 u(tau) + u(tau-)` on every active
/// stencil, zero on inactive ones.
pub fn apply_grad2(mesh: &TriMesh, u: &FaceField) -> Result<StencilField> {
    u.ensure_shape(u.channels(), mesh.face_count())?;
    let mut out = StencilField::zeros(u.channels(), 3 * mesh.face_count());
    for k in 0..u.channels() {
        let uk = u.channel(k);
        let ok = out.channel_mut(k);
        for (f, stencils) in mesh.stencils().iter().enumerate() {
            for (i, s) in stencils.iter().enumerate() {
                if let Some((tp, t, tm)) = s.faces() {
                    ok[3 * f + i] = uk[tp] - 2.0 * uk[t] + uk[tm];
                }
            }
        }
    }
    Ok(out)
}

/// Adjoint of [`apply_grad2`] under the area-weighted slot inner product.
pub fn apply_grad2_star(mesh: &TriMesh, w: &StencilField) -> Result<FaceField> {
    w.ensure_shape(w.channels(), 3 * mesh.face_count())?;
    let area = mesh.areas();
    let mut out = FaceField::zeros(w.channels(), mesh.face_count());
    for k in 0..w.channels() {
        let wk = w.channel(k);
        let ok = out.channel_mut(k);
        for (f, stencils) in mesh.stencils().iter().enumerate() {
            for (i, s) in stencils.iter().enumerate() {
                if let Some((tp, t, tm)) = s.faces() {
                    let weighted = area[f] * wk[3 * f + i];
                    ok[tp] += weighted;
                    ok[t] -= 2.0 * weighted;
                    ok[tm] += weighted;
                }
            }
        }
        for (o, a) in ok.iter_mut().zip(area) {
            *o /= a;
        }
    }
    Ok(out)
}

fn weighted_inner<S>(a: &Field<S>, b: &Field<S>, weight: impl Fn(usize) -> f64) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let mut total = 0.0;
    for k in 0..a.channels() {
        for (i, (x, y)) in a.channel(k).iter().zip(b.channel(k)).enumerate() {
            total += x * y * weight(i);
        }
    }
    Ok(total)
}

pub fn inner_u(mesh: &TriMesh, a: &FaceField, b: &FaceField) -> Result<f64> {
    a.ensure_shape(a.channels(), mesh.face_count())?;
    let area = mesh.areas();
    weighted_inner(a, b, |i| area[i])
}

pub fn inner_v(mesh: &TriMesh, a: &EdgeField, b: &EdgeField) -> Result<f64> {
    a.ensure_shape(a.channels(), mesh.edge_count())?;
    let len = mesh.edge_lengths();
    weighted_inner(a, b, |i| len[i])
}

/// Every slot of a face carries that face's area.
pub fn inner_w(mesh: &TriMesh, a: &StencilField, b: &StencilField) -> Result<f64> {
    a.ensure_shape(a.channels(), 3 * mesh.face_count())?;
    let area = mesh.areas();
    weighted_inner(a, b, |i| area[i / 3])
}

pub fn norm_u(mesh: &TriMesh, a: &FaceField) -> Result<f64> {
    Ok(inner_u(mesh, a, a)?.sqrt())
}

pub fn norm_v(mesh: &TriMesh, a: &EdgeField) -> Result<f64> {
    Ok(inner_v(mesh, a, a)?.sqrt())
}

pub fn norm_w(mesh: &TriMesh, a: &StencilField) -> Result<f64> {
    Ok(inner_w(mesh, a, a)?.sqrt())
}

/// `y = m x` for a CSR matrix, summing each row in storage order.
pub(crate) fn spmv(m: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    debug_assert!(m.is_csr());
    debug_assert_eq!(m.cols(), x.len());
    m.outer_iterator()
        .map(|row| row.iter().map(|(j, &a)| a * x[j]).sum())
        .collect()
}

/// The operators as sparse matrices, plus the diagonal mass weights.
#[derive(Debug, Clone)]
pub struct OperatorBundle {
    pub d: CsMat<f64>,
    pub d_star: CsMat<f64>,
    pub g2: CsMat<f64>,
    pub g2_star: CsMat<f64>,
    pub mass_u: Vec<f64>,
    pub mass_v: Vec<f64>,
    pub mass_w: Vec<f64>,
}

impl OperatorBundle {
    pub fn assemble(mesh: &TriMesh) -> Self {
        let t = mesh.face_count();
        let e_count = mesh.edge_count();
        let mass_u = mesh.areas().to_vec();
        let mass_v = mesh.edge_lengths().to_vec();
        let mass_w: Vec<f64> = (0..3 * t).map(|i| mass_u[i / 3]).collect();

        let mut d = TriMat::new((e_count, t));
        let mut d_star = TriMat::new((t, e_count));
        for (e, ef) in mesh.edge_faces().iter().enumerate() {
            if ef.is_boundary() {
                continue;
            }
            for inc in ef.iter() {
                d.add_triplet(e, inc.face, inc.sgn);
                d_star.add_triplet(inc.face, e, inc.sgn * mass_v[e] / mass_u[inc.face]);
            }
        }

        let mut g2 = TriMat::new((3 * t, t));
        let mut g2_star = TriMat::new((t, 3 * t));
        for (f, stencils) in mesh.stencils().iter().enumerate() {
            for (i, s) in stencils.iter().enumerate() {
                if let Some((tp, tau, tm)) = s.faces() {
                    let row = 3 * f + i;
                    for (col, c) in [(tp, 1.0), (tau, -2.0), (tm, 1.0)] {
                        g2.add_triplet(row, col, c);
                        g2_star.add_triplet(col, row, c * mass_w[row] / mass_u[col]);
                    }
                }
            }
        }

        Self {
            d: d.to_csr(),
            d_star: d_star.to_csr(),
            g2: g2.to_csr(),
            g2_star: g2_star.to_csr(),
            mass_u,
            mass_v,
            mass_w,
        }
    }

    pub fn face_count(&self) -> usize {
        self.mass_u.len()
    }

    fn channelwise<A, B>(m: &CsMat<f64>, x: &Field<A>) -> Result<Field<B>> {
        x.ensure_shape(x.channels(), m.cols())?;
        let mut data = Vec::with_capacity(x.channels() * m.rows());
        for k in 0..x.channels() {
            data.extend(spmv(m, x.channel(k)));
        }
        Field::from_raw(x.channels(), m.rows(), data)
    }

    pub fn apply_d(&self, u: &FaceField) -> Result<EdgeField> {
        Self::channelwise(&self.d, u)
    }

    pub fn apply_d_star(&self, v: &EdgeField) -> Result<FaceField> {
        Self::channelwise(&self.d_star, v)
    }

    pub fn apply_grad2(&self, u: &FaceField) -> Result<StencilField> {
        Self::channelwise(&self.g2, u)
    }

    pub fn apply_grad2_star(&self, w: &StencilField) -> Result<FaceField> {
        Self::channelwise(&self.g2_star, w)
    }

    /// `mass_U * D* v`, i.e. `D^T mass_V v`.
    pub fn weighted_d_adjoint(&self, v: &EdgeField) -> Result<FaceField> {
        let mut out = self.apply_d_star(v)?;
        for k in 0..out.channels() {
            for (o, m) in out.channel_mut(k).iter_mut().zip(&self.mass_u) {
                *o *= m;
            }
        }
        Ok(out)
    }

    /// `mass_U * (grad2)* w`, i.e. `G2^T mass_W w`.
    pub fn weighted_grad2_adjoint(&self, w: &StencilField) -> Result<FaceField> {
        let mut out = self.apply_grad2_star(w)?;
        for k in 0..out.channels() {
            for (o, m) in out.channel_mut(k).iter_mut().zip(&self.mass_u) {
                *o *= m;
            }
        }
        Ok(out)
    }

    /// `beta mass_U + rho1 D^T mass_V D + rho2 G2^T mass_W G2` in CSC form.
    ///
    /// Assembled from per-edge and per-stencil outer products so that the
    /// result is exactly symmetric.
    pub fn normal_system(&self, mesh: &TriMesh, beta: f64, rho1: f64, rho2: f64) -> CsMat<f64> {
        let t = self.face_count();
        let mut upper: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut add = |i: usize, j: usize, value: f64| {
            *upper.entry((i.min(j), i.max(j))).or_insert(0.0) += value;
        };
        for (f, &m) in self.mass_u.iter().enumerate() {
            add(f, f, beta * m);
        }
        for (e, ef) in mesh.edge_faces().iter().enumerate() {
            if let Some(second) = ef.second {
                let w = rho1 * self.mass_v[e];
                let (a, sa) = (ef.first.face, ef.first.sgn);
                let (b, sb) = (second.face, second.sgn);
                add(a, a, w * sa * sa);
                add(b, b, w * sb * sb);
                add(a, b, w * sa * sb);
            }
        }
        for (f, stencils) in mesh.stencils().iter().enumerate() {
            for (i, s) in stencils.iter().enumerate() {
                if let Some((tp, tau, tm)) = s.faces() {
                    let w = rho2 * self.mass_w[3 * f + i];
                    let terms = [(tp, 1.0), (tau, -2.0), (tm, 1.0)];
                    for (x, &(ci, a)) in terms.iter().enumerate() {
                        // Each unordered pair once; mirrored below.
                        for &(cj, b) in &terms[x..] {
                            add(ci, cj, w * a * b);
                        }
                    }
                }
            }
        }
        let mut tri = TriMat::with_capacity((t, t), 2 * upper.len());
        for (&(i, j), &v) in &upper {
            tri.add_triplet(i, j, v);
            if i != j {
                tri.add_triplet(j, i, v);
            }
        }
        tri.to_csc()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;

    fn ramp(mesh: &TriMesh) -> FaceField {
        let vals: Vec<f64> = (0..mesh.face_count()).map(|f| f as f64).collect();
        FaceField::from_channels(vec![vals]).unwrap()
    }

    #[test]
    fn constant_field_has_zero_jumps_and_second_differences() {
        for mesh in [primitives::grid(3, 3), primitives::cube(2)] {
            let u = FaceField::constant(2, mesh.face_count(), 0.7);
            assert!(apply_d(&mesh, &u)
                .unwrap()
                .as_slice()
                .iter()
                .all(|&x| x == 0.0));
            assert!(apply_grad2(&mesh, &u)
                .unwrap()
                .as_slice()
                .iter()
                .all(|&x| x == 0.0));
        }
    }

    #[test]
    fn two_triangle_jump() {
        let mesh = primitives::grid(1, 1);
        let u = FaceField::from_channels(vec![vec![3.0, 1.25]]).unwrap();
        let du = apply_d(&mesh, &u).unwrap();
        let interior: Vec<usize> = (0..mesh.edge_count())
            .filter(|&e| !mesh.is_boundary_edge(e))
            .collect();
        assert_eq!(interior.len(), 1);
        let e = interior[0];
        // The shared edge is (0, 3); face 0 = [0,1,3] traverses it 3 -> 0
        // and face 1 = [0,3,2] traverses it 0 -> 3, so sgn(e, 0) = -1 and
        // sgn(e, 1) = +1.
        assert_eq!(mesh.faces(), &[[0, 1, 3], [0, 3, 2]]);
        assert_eq!(mesh.edges()[e], [0, 3]);
        assert_eq!(du.get(0, e), -(3.0 - 1.25));
        for f in 0..mesh.edge_count() {
            if f != e {
                assert_eq!(du.get(0, f), 0.0);
            }
        }

        let g = apply_grad(&mesh, &u).unwrap();
        for f in 0..2 {
            let nonzero: Vec<f64> = (0..3)
                .map(|i| g.get(0, 3 * f + i))
                .filter(|&x| x != 0.0)
                .collect();
            assert_eq!(nonzero.len(), 1);
            assert_eq!(nonzero[0].abs(), 1.75);
        }
    }

    #[test]
    fn isolated_triangle_is_annihilated() {
        let mesh = primitives::single_triangle();
        let u = FaceField::from_channels(vec![vec![5.0]]).unwrap();
        let v = EdgeField::from_channels(vec![vec![1.0, -2.0, 3.0]]).unwrap();
        let w = StencilField::from_channels(vec![vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(apply_d_star(&mesh, &v).unwrap().as_slice(), &[0.0]);
        assert_eq!(apply_grad(&mesh, &u).unwrap().as_slice(), &[0.0; 3]);
        assert_eq!(apply_grad2(&mesh, &u).unwrap().as_slice(), &[0.0; 3]);
        assert_eq!(apply_grad2_star(&mesh, &w).unwrap().as_slice(), &[0.0]);
    }

    #[test]
    fn second_difference_arithmetic() {
        let mesh = primitives::cube(2);
        let s = mesh.stencils()[5][1];
        let (tp, t, tm) = s.faces().unwrap();
        let mut vals = vec![0.0; mesh.face_count()];
        vals[tp] = 3.0;
        vals[t] = 2.0;
        vals[tm] = 1.0;
        let u = FaceField::from_channels(vec![vals]).unwrap();
        assert_eq!(apply_grad2(&mesh, &u).unwrap().get(0, 3 * 5 + 1), 0.0);
    }

    #[test]
    fn boundary_stencils_vanish() {
        let mesh = primitives::grid(3, 2);
        let u = ramp(&mesh);
        let g2 = apply_grad2(&mesh, &u).unwrap();
        let mut inactive = 0;
        for (f, st) in mesh.stencils().iter().enumerate() {
            for (i, s) in st.iter().enumerate() {
                if !s.active {
                    inactive += 1;
                    assert_eq!(g2.get(0, 3 * f + i).to_bits(), 0);
                }
            }
        }
        assert!(inactive > 0);
    }

    #[test]
    fn inner_products() {
        let mesh = primitives::cube(2);
        let mut ind = FaceField::zeros(1, mesh.face_count());
        ind.set(0, 3, 1.0);
        assert_eq!(inner_u(&mesh, &ind, &ind).unwrap(), mesh.areas()[3]);

        let mut a = EdgeField::zeros(1, mesh.edge_count());
        let mut b = EdgeField::zeros(1, mesh.edge_count());
        a.set(0, 0, 2.0);
        b.set(0, 1, 5.0);
        assert_eq!(inner_v(&mesh, &a, &b).unwrap(), 0.0);

        let one = FaceField::constant(1, mesh.face_count(), 1.0);
        approx::assert_relative_eq!(
            norm_u(&mesh, &one).unwrap().powi(2),
            6.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn size_mismatch_is_reported() {
        let mesh = primitives::grid(2, 2);
        let u = FaceField::zeros(1, 3);
        assert!(apply_d(&mesh, &u).is_err());
        assert!(apply_grad2(&mesh, &u).is_err());
        let v = EdgeField::zeros(1, 2);
        assert!(apply_d_star(&mesh, &v).is_err());
    }

    #[test]
    fn boundary_rows_of_d_are_empty() {
        let mesh = primitives::grid(2, 2);
        let ops = OperatorBundle::assemble(&mesh);
        for (e, row) in ops.d.outer_iterator().enumerate() {
            if mesh.is_boundary_edge(e) {
                assert_eq!(row.nnz(), 0);
            } else {
                assert_eq!(row.nnz(), 2);
            }
        }
    }

    #[test]
    fn system_matrix_is_symmetric() {
        let mesh = primitives::icosphere(1);
        let ops = OperatorBundle::assemble(&mesh);
        let a = ops.normal_system(&mesh, 1.0, 0.3, 2.0);
        let at = a.transpose_view().to_csc();
        assert_eq!(a, at);
    }
}
