//! Grid search over solver weights on the noisy cube and icosphere.
//!
//! Every argument is `key=v1,v2,...` with keys `beta`, `a1`, `a2`, `rho1`,
//! `rho2`, `grow`, `rmax`, `cube`, `ico`, `iter`, `vit` (vertex
//! iterations) and `mode`; `trace=1` prints the residual trajectory of each
//! run. Unset keys take the library defaults.
//!
//! `cargo run --release -p semisparse --example sweep -- a2=0.5,1 rho2=0.1,1`

use std::collections::HashMap;
use std::time::Instant;

use semisparse::metrics::angle_deg;
use semisparse::{
    compute_metrics, denoise, primitives, DenoiseParams, NoiseSpec, SolverParams, ThresholdMode,
    TriMesh, VertexUpdateParams,
};

fn values(args: &HashMap<String, String>, key: &str, default: f64) -> Vec<f64> {
    match args.get(key) {
        Some(list) => list
            .split(',')
            .map(|s| s.parse().expect("numeric value"))
            .collect(),
        None => vec![default],
    }
}

fn mean_normal_error(a: &TriMesh, normals: &semisparse::FaceField) -> f64 {
    let gt = a.face_normals().unwrap();
    let total: f64 = (0..a.face_count())
        .map(|f| angle_deg(&gt.vector(f), &normals.vector(f)))
        .sum();
    total / a.face_count() as f64
}

fn main() {
    let args: HashMap<String, String> = std::env::args()
        .skip(1)
        .filter_map(|a| {
            a.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
        })
        .collect();
    let trace = args.contains_key("trace");
    let base = DenoiseParams::default();
    let mode: ThresholdMode = args
        .get("mode")
        .map(|m| m.parse().expect("threshold mode"))
        .unwrap_or(base.solver.threshold_mode);
    let cube_n = values(&args, "cube", 20.0)[0] as usize;
    let ico_n = values(&args, "ico", 4.0)[0] as usize;
    let cases: Vec<(&str, TriMesh, TriMesh)> = [
        ("cube", primitives::cube(cube_n), 7),
        ("icosphere", primitives::icosphere(ico_n), 11),
    ]
    .into_iter()
    .map(|(name, clean, seed)| {
        let spec = NoiseSpec {
            seed,
            ..NoiseSpec::default()
        };
        let noisy = semisparse::add_noise(&clean, &spec).unwrap();
        let m = compute_metrics(&noisy, &clean).unwrap();
        println!(
            "{name}: faces={} noisy mean={:.3} rms={:.5}",
            clean.face_count(),
            m.mean_angular_error_deg,
            m.vertex_rms
        );
        (name, clean, noisy)
    })
    .collect();

    let grow = values(&args, "grow", base.solver.rho_growth);
    let rmax = values(&args, "rmax", base.solver.rho_max)[0];
    for &rho_growth in &grow {
        for &beta in &values(&args, "beta", base.solver.beta) {
            for &alpha1 in &values(&args, "a1", base.solver.alpha1) {
                for &alpha2 in &values(&args, "a2", base.solver.alpha2) {
                    for &rho1 in &values(&args, "rho1", base.solver.rho1) {
                        for &rho2 in &values(&args, "rho2", base.solver.rho2) {
                            for &max_iter in &values(&args, "iter", base.solver.max_iter as f64) {
                                for &vit in &values(&args, "vit", base.vertex.iterations as f64) {
                                    let params = DenoiseParams {
                                        solver: SolverParams {
                                            beta,
                                            alpha1,
                                            alpha2,
                                            rho1,
                                            rho2,
                                            rho_growth,
                                            rho_max: rmax,
                                            max_iter: max_iter as usize,
                                            threshold_mode: mode,
                                            ..SolverParams::default()
                                        },
                                        vertex: VertexUpdateParams {
                                            iterations: vit as usize,
                                            ..VertexUpdateParams::default()
                                        },
                                    };
                                    let mut line = format!(
                                    "k={rho_growth} b={beta} a1={alpha1} a2={alpha2} r1={rho1} r2={rho2} it={max_iter} vit={vit}"
                                );
                                    for (name, clean, noisy) in &cases {
                                        let start = Instant::now();
                                        let out = denoise::denoise(noisy, &params).unwrap();
                                        let before = compute_metrics(noisy, clean).unwrap();
                                        let after = compute_metrics(&out.mesh, clean).unwrap();
                                        let gain = 100.0
                                            * (1.0
                                                - after.mean_angular_error_deg
                                                    / before.mean_angular_error_deg);
                                        let nerr = mean_normal_error(clean, &out.normals);
                                        let last = out.diagnostics.records.last().unwrap();
                                        line += &format!(
                                        " | {name} gain={gain:5.1}% nerr={nerr:5.2} rms {:.4}->{:.4} n={} res={:.1e} {:.1}s",
                                        before.vertex_rms,
                                        after.vertex_rms,
                                        out.diagnostics.records.len(),
                                        last.max_relative_residual(),
                                        start.elapsed().as_secs_f64()
                                    );
                                        if trace {
                                            for r in &out.diagnostics.records {
                                                println!(
                                                "  {name} {:3} E={:.6e} rP={:.3e} rQ={:.3e} dN={:.3e}",
                                                r.iter, r.energy, r.rel_r_p, r.rel_r_q, r.d_n
                                            );
                                            }
                                        }
                                    }
                                    println!("{line}");
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
