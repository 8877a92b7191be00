#![no_main]

use libfuzzer_sys::fuzz_target;
use semisparse::{checks, Point, TriMesh};

// Bytes are read as a vertex count, then little-endian f32 coordinates,
// then u8 index triples. Small indices keep a good share of inputs valid.
fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else {
        return;
    };
    let n = (n % 16) as usize;
    if rest.len() < 12 * n {
        return;
    }
    let (coords, indices) = rest.split_at(12 * n);
    let positions: Vec<Point> = coords
        .chunks_exact(12)
        .map(|c| {
            let f = |i: usize| f32::from_le_bytes(c[4 * i..4 * i + 4].try_into().unwrap()) as f64;
            Point::new(f(0), f(1), f(2))
        })
        .collect();
    let faces: Vec<[usize; 3]> = indices
        .chunks_exact(3)
        .map(|t| [t[0] as usize % 17, t[1] as usize % 17, t[2] as usize % 17])
        .collect();
    if let Ok(mesh) = TriMesh::new(positions, faces) {
        if let Ok(report) = checks::run_operator_checks(&mesh, 2, 0) {
            // Kernel and orientation checks are exact by construction.
            assert_eq!(report.kernel, 0.0);
            assert_eq!(report.orientation, 0.0);
        }
    }
});
