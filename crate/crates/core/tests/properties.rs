use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semisparse::checks::random_field;
use semisparse::io::{self, MeshFormat, ReadOptions};
use semisparse::mesh::EdgeOrientation;
use semisparse::operators;
use semisparse::solver::prox;
use semisparse::{primitives, EdgeField, FaceField, Point, StencilField, TriMesh};

/// A reference mesh with every vertex jittered, so that areas and lengths
/// vary from face to face.
fn jittered(kind: u8, jitter: f64, seed: u64) -> TriMesh {
    let base = match kind % 4 {
        0 => primitives::grid(5, 4),
        1 => primitives::cube(3),
        2 => primitives::icosphere(2),
        _ => primitives::grid(1, 1),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 0.2 * base.mean_edge_length() * jitter;
    let positions = base
        .positions()
        .iter()
        .map(|p| {
            let d: FaceField = random_field(&mut rng, 3, 1);
            p + Point::new(d.get(0, 0), d.get(1, 0), d.get(2, 0)) * h
        })
        .collect();
    base.with_positions(positions).unwrap()
}

fn mesh_strategy() -> impl Strategy<Value = TriMesh> {
    (any::<u8>(), 0.0..1.0f64, any::<u64>()).prop_map(|(k, j, s)| jittered(k, j, s))
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_and_its_adjoint_agree(mesh in mesh_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: FaceField = random_field(&mut rng, 3, mesh.face_count());
        let v: EdgeField = random_field(&mut rng, 3, mesh.edge_count());
        let lhs = operators::inner_v(&mesh, &operators::apply_d(&mesh, &u).unwrap(), &v).unwrap();
        let rhs = operators::inner_u(&mesh, &u, &operators::apply_d_star(&mesh, &v).unwrap()).unwrap();
        let scale = operators::norm_u(&mesh, &u).unwrap() * operators::norm_v(&mesh, &v).unwrap();
        prop_assert!(rel(lhs, rhs, scale) <= 1e-10);
    }

    #[test]
    fn grad2_and_its_adjoint_agree(mesh in mesh_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: FaceField = random_field(&mut rng, 3, mesh.face_count());
        let w: StencilField = random_field(&mut rng, 3, 3 * mesh.face_count());
        let lhs = operators::inner_w(&mesh, &operators::apply_grad2(&mesh, &u).unwrap(), &w).unwrap();
        let rhs = operators::inner_u(&mesh, &u, &operators::apply_grad2_star(&mesh, &w).unwrap()).unwrap();
        let scale = operators::norm_u(&mesh, &u).unwrap() * operators::norm_w(&mesh, &w).unwrap();
        prop_assert!(rel(lhs, rhs, scale) <= 1e-10);
    }

    #[test]
    fn operators_are_linear(
        mesh in mesh_strategy(),
        seed in any::<u64>(),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: FaceField = random_field(&mut rng, 3, mesh.face_count());
        let v: FaceField = random_field(&mut rng, 3, mesh.face_count());
        let combo = u.map(|x| a * x).add_scaled(b, &v).unwrap();

        let d = |f: &FaceField| operators::apply_d(&mesh, f).unwrap();
        let expected = d(&u).map(|x| a * x).add_scaled(b, &d(&v)).unwrap();
        for (x, y) in d(&combo).as_slice().iter().zip(expected.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }

        let g = |f: &FaceField| operators::apply_grad2(&mesh, f).unwrap();
        let expected = g(&u).map(|x| a * x).add_scaled(b, &g(&v)).unwrap();
        for (x, y) in g(&combo).as_slice().iter().zip(expected.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn flipping_orientation_negates_jumps(mesh in mesh_strategy(), seed in any::<u64>()) {
        let flipped = TriMesh::with_orientation(
            mesh.positions().to_vec(),
            mesh.faces().to_vec(),
            EdgeOrientation::HighToLow,
        ).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: FaceField = random_field(&mut rng, 3, mesh.face_count());
        let d = operators::apply_d(&mesh, &u).unwrap();
        let d_flip = operators::apply_d(&flipped, &u).unwrap();
        for (x, y) in d.as_slice().iter().zip(d_flip.as_slice()) {
            prop_assert_eq!(*x, -*y);
        }
        prop_assert_eq!(
            operators::apply_grad2(&mesh, &u).unwrap(),
            operators::apply_grad2(&flipped, &u).unwrap()
        );
    }

    #[test]
    fn soft_shrink_is_optimal(
        x in prop::array::uniform3(-5.0..5.0f64),
        t in 0.0..3.0f64,
        probe in prop::array::uniform3(-1.0..1.0f64),
        step in 1e-6..1.0f64,
    ) {
        // t |p| + |p - x|^2 / 2 is minimized by the shrunk group.
        let objective = |p: &[f64; 3]| {
            let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dist = p.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            t * norm + 0.5 * dist
        };
        let mut p = x;
        prox::soft_shrink_group(&mut p, t);
        let mut other = p;
        for (o, d) in other.iter_mut().zip(&probe) {
            *o += step * d;
        }
        prop_assert!(objective(&p) <= objective(&other) + 1e-12);
        prop_assert!(objective(&p) <= objective(&[0.0; 3]) + 1e-12);
    }

    #[test]
    fn hard_threshold_is_all_or_nothing(
        x in prop::array::uniform3(-5.0..5.0f64),
        t in 0.0..3.0f64,
    ) {
        let mut p = x;
        prox::hard_threshold_group(&mut p, t);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= t {
            prop_assert_eq!(p, [0.0; 3]);
        } else {
            prop_assert_eq!(p, x);
        }
    }

    #[test]
    fn obj_and_off_round_trip_exactly(mesh in mesh_strategy()) {
        for format in [MeshFormat::Obj, MeshFormat::Off] {
            let text = io::format_mesh(&mesh, format);
            let back = io::parse_mesh(&text, format, ReadOptions::default())
                .unwrap()
                .build()
                .unwrap();
            prop_assert_eq!(back.positions(), mesh.positions());
            prop_assert_eq!(back.faces(), mesh.faces());
        }
    }
}
