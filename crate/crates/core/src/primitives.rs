//! Procedural reference meshes used by tests, benchmarks and the CLI.

use std::collections::HashMap;

use crate::mesh::{Point, TriMesh};

pub fn single_triangle() -> TriMesh {
    TriMesh::new(
        vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ],
        vec![[0, 1, 2]],
    )
    .expect("reference triangle is valid")
}

/// Open planar grid of `nx` by `ny` unit squares in the z = 0 plane, each
/// split into two counter-clockwise triangles (seen from +z).
pub fn grid(nx: usize, ny: usize) -> TriMesh {
    assert!(nx > 0 && ny > 0);
    let mut positions = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            positions.push(Point::new(i as f64, j as f64, 0.0));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::new(positions, faces).expect("grid is valid")
}

/// Surface of the unit cube `[0,1]^3` with every face divided into an
/// `n`-by-`n` grid of squares, each split along one diagonal.
pub fn cube(n: usize) -> TriMesh {
    assert!(n > 0);
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut positions = Vec::new();
    let mut vertex = |c: [usize; 3], positions: &mut Vec<Point>| -> usize {
        *index.entry(c).or_insert_with(|| {
            positions.push(Point::new(
                c[0] as f64 / n as f64,
                c[1] as f64 / n as f64,
                c[2] as f64 / n as f64,
            ));
            positions.len() - 1
        })
    };

    // (fixed axis, at max?, u axis, v axis) with u x v pointing outward.
    let sides: [(usize, bool, usize, usize); 6] = [
        (0, true, 1, 2),
        (0, false, 2, 1),
        (1, true, 2, 0),
        (1, false, 0, 2),
        (2, true, 0, 1),
        (2, false, 1, 0),
    ];
    let mut faces = Vec::with_capacity(12 * n * n);
    for &(axis, at_max, u, v) in &sides {
        let lattice = |a: usize, b: usize| {
            let mut c = [0usize; 3];
            c[axis] = if at_max { n } else { 0 };
            c[u] = a;
            c[v] = b;
            c
        };
        for b in 0..n {
            for a in 0..n {
                let p00 = vertex(lattice(a, b), &mut positions);
                let p10 = vertex(lattice(a + 1, b), &mut positions);
                let p11 = vertex(lattice(a + 1, b + 1), &mut positions);
                let p01 = vertex(lattice(a, b + 1), &mut positions);
                faces.push([p00, p10, p11]);
                faces.push([p00, p11, p01]);
            }
        }
    }
    TriMesh::new(positions, faces).expect("cube is valid")
}

/// Unit sphere from a subdivided icosahedron: `20 * 4^subdivisions` faces.
pub fn icosphere(subdivisions: usize) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut positions: Vec<Point> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, positions: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                positions.push(((positions[a] + positions[b]) * 0.5).normalize());
                positions.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut positions);
            let bc = midpoint(b, c, &mut positions);
            let ca = midpoint(c, a, &mut positions);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    TriMesh::new(positions, faces).expect("icosphere is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let c = cube(4);
        assert_eq!(c.face_count(), 6 * 2 * 16);
        assert_eq!(c.vertex_count(), 6 * 16 + 2);
        assert_eq!(c.boundary_edge_count(), 0);

        let s = icosphere(2);
        assert_eq!(s.face_count(), 320);
        assert_eq!(s.vertex_count(), 162);
        assert_eq!(s.boundary_edge_count(), 0);

        let g = grid(3, 2);
        assert_eq!(g.face_count(), 12);
        assert_eq!(g.boundary_edge_count(), 10);
    }

    #[test]
    fn closed_shapes_face_outward() {
        for mesh in [cube(2), icosphere(1)] {
            let centre = mesh.positions().iter().sum::<Point>() / mesh.vertex_count() as f64;
            let normals = mesh.face_normals().unwrap();
            for f in 0..mesh.face_count() {
                assert!(normals.vector(f).dot(&(mesh.barycenter(f) - centre)) > 0.0);
            }
        }
    }
}
