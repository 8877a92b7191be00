//! ADMM solver for the semi-sparse normal filtering energy
//!
//! ```text
//! beta/2 |N - N0|_U^2 + alpha1 |D N - D N0|_{V,1} + alpha2 |grad2 N|_W^0
//! ```
//!
//! with the unit-length constraint on every face normal. The splitting uses
//! `P = D N - D N0` on edges and `Q = grad2 N` on stencils. Each sweep
//! solves the quadratic N-subproblem with a prefactored SPD system and
//! projects onto the unit sphere, then group-shrinks P, hard-thresholds Q
//! and takes a dual ascent step on both multipliers.

mod linear;
pub mod prox;

use std::io::Write;
use std::time::Instant;

pub use linear::{SpdFactor, SOLVE_TOLERANCE};

use crate::error::{Error, Result};
use crate::field::{EdgeField, FaceField, StencilField};
use crate::mesh::TriMesh;
use crate::operators::{self, OperatorBundle};

/// How the hard threshold of the L0 step is derived from the weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    /// `alpha2 / rho2`.
    #[default]
    Direct,
    /// `sqrt(2 alpha2 / rho2)`, the exact minimizer of the scalar L0 prox.
    ProxDerived,
}

impl std::str::FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" => Ok(Self::Direct),
            "prox-derived" => Ok(Self::ProxDerived),
            other => Err(Error::InvalidParameter(format!(
                "unknown threshold mode {other:?} (expected paper-literal or prox-derived)"
            ))),
        }
    }
}

impl std::fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Direct => "paper-literal",
            Self::ProxDerived => "prox-derived",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Fidelity weight.
    pub beta: f64,
    /// Weight of the group-L1 penalty on first-order deviations.
    pub alpha1: f64,
    /// Weight of the L0 penalty on second differences.
    pub alpha2: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Factor applied to both penalties after every sweep; 1 keeps them
    /// fixed.
    pub rho_growth: f64,
    /// Cap on either penalty under growth.
    pub rho_max: f64,
    pub max_iter: usize,
    pub primal_tol: f64,
    pub threshold_mode: ThresholdMode,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            alpha1: 0.1,
            alpha2: 1.0,
            rho1: 1.0,
            rho2: 0.1,
            rho_growth: 1.2,
            rho_max: 1e7,
            max_iter: 400,
            primal_tol: 1e-6,
            threshold_mode: ThresholdMode::Direct,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("beta", self.beta),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("primal_tol", self.primal_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if !(self.rho_growth >= 1.0) || !self.rho_growth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rho_growth must be at least 1, got {}",
                self.rho_growth
            )));
        }
        if !(self.rho_max >= self.rho1.max(self.rho2)) || self.rho_max.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "rho_max must be at least max(rho1, rho2), got {}",
                self.rho_max
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn shrink_threshold(&self) -> f64 {
        self.alpha1 / self.rho1
    }

    pub fn hard_threshold(&self) -> f64 {
        match self.threshold_mode {
            ThresholdMode::Direct => self.alpha2 / self.rho2,
            ThresholdMode::ProxDerived => (2.0 * self.alpha2 / self.rho2).sqrt(),
        }
    }
}

/// ADMM iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub normals: FaceField,
    pub p: EdgeField,
    pub q: StencilField,
    pub lambda_p: EdgeField,
    pub lambda_q: StencilField,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: f64,
    /// `|(D N - D N0) - P|_V`
    pub r_p: f64,
    /// `|grad2 N - Q|_W`
    pub r_q: f64,
    /// `|N_k - N_{k-1}|_U`
    pub d_n: f64,
    /// Wall time since the solve started.
    pub seconds: f64,
    /// `r_p` and `r_q` divided by the larger norm of the two sides of
    /// their constraints.
    pub rel_r_p: f64,
    pub rel_r_q: f64,
}

impl IterationRecord {
    pub fn max_relative_residual(&self) -> f64 {
        self.rel_r_p.max(self.rel_r_q)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
}

impl Diagnostics {
    pub const CSV_HEADER: &'static str = "iter,energy,r_P,r_Q,dN,seconds";

    /// Writes the per-iteration CSV. With `timing` off the `seconds` column
    /// is written as 0 so that repeated runs are byte-identical.
    pub fn write_csv<W: Write>(&self, mut out: W, timing: bool) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            let seconds = if timing { r.seconds } else { 0.0 };
            writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{}",
                r.iter, r.energy, r.r_p, r.r_q, r.d_n, seconds
            )?;
        }
        Ok(())
    }

    /// Equality of everything except wall time.
    pub fn same_trajectory(&self, other: &Self) -> bool {
        self.converged == other.converged
            && self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.iter == b.iter
                    && a.energy.to_bits() == b.energy.to_bits()
                    && a.r_p.to_bits() == b.r_p.to_bits()
                    && a.r_q.to_bits() == b.r_q.to_bits()
                    && a.d_n.to_bits() == b.d_n.to_bits()
            })
    }
}

/// `sum_e len(e) |v_e|` over the channel groups of an edge field.
pub fn group_l1_v(mesh: &TriMesh, v: &EdgeField) -> f64 {
    mesh.edge_lengths()
        .iter()
        .enumerate()
        .map(|(e, len)| len * v.group_norm(e))
        .sum()
}

/// Number of active stencils whose channel group is not identically zero.
pub fn count_nonzero_stencils(mesh: &TriMesh, w: &StencilField) -> usize {
    mesh.stencils()
        .iter()
        .flatten()
        .enumerate()
        .filter(|(l, s)| s.active && w.group(*l).any(|x| x != 0.0))
        .count()
}

/// The filtering energy, evaluated with the matrix-free operators.
pub fn energy(mesh: &TriMesh, n: &FaceField, n0: &FaceField, params: &SolverParams) -> Result<f64> {
    n.ensure_same_shape(n0)?;
    let diff = n.add_scaled(-1.0, n0)?;
    let fidelity = operators::inner_u(mesh, &diff, &diff)?;
    let jump_diff = operators::apply_d(mesh, &diff)?;
    let second = operators::apply_grad2(mesh, n)?;
    Ok(0.5 * params.beta * fidelity
        + params.alpha1 * group_l1_v(mesh, &jump_diff)
        + params.alpha2 * count_nonzero_stencils(mesh, &second) as f64)
}

/// Normalizes every face vector; zero or non-finite results fall back to
/// the corresponding vector of `previous`.
pub fn project_to_sphere(n: &mut FaceField, previous: &FaceField) {
    for f in 0..n.len() {
        let norm = n.group_norm(f);
        if norm > 0.0 && norm.is_finite() {
            for k in 0..n.channels() {
                let v = n.get(k, f) / norm;
                n.set(k, f, v);
            }
        } else {
            for k in 0..n.channels() {
                n.set(k, f, previous.get(k, f));
            }
        }
    }
}

fn relative(r: f64, a: f64, b: f64) -> f64 {
    let scale = a.max(b);
    if r == 0.0 {
        0.0
    } else if scale > 0.0 {
        r / scale
    } else {
        f64::INFINITY
    }
}

/// A prepared ADMM problem on one mesh: operators assembled, system
/// matrix factorized, constant right-hand side terms cached.
#[derive(Debug)]
pub struct NormalFilter<'m> {
    mesh: &'m TriMesh,
    ops: OperatorBundle,
    params: SolverParams,
    n0: FaceField,
    grad_n0: EdgeField,
    system: SpdFactor,
    base_rhs: FaceField,
}

impl<'m> NormalFilter<'m> {
    pub fn new(mesh: &'m TriMesh, n0: &FaceField, params: SolverParams) -> Result<Self> {
        params.validate()?;
        n0.ensure_shape(3, mesh.face_count())?;
        if !n0.is_finite() {
            return Err(Error::NonFinite { iteration: 0 });
        }
        let ops = OperatorBundle::assemble(mesh);
        let system =
            SpdFactor::new(ops.normal_system(mesh, params.beta, params.rho1, params.rho2))?;
        let grad_n0 = ops.apply_d(n0)?;
        let base_rhs = Self::base_rhs(&ops, n0, &grad_n0, &params)?;
        Ok(Self {
            mesh,
            ops,
            params,
            n0: n0.clone(),
            grad_n0,
            system,
            base_rhs,
        })
    }

    // beta M N0 + rho1 D^T M_V D N0
    fn base_rhs(
        ops: &OperatorBundle,
        n0: &FaceField,
        grad_n0: &EdgeField,
        params: &SolverParams,
    ) -> Result<FaceField> {
        let mut rhs = ops.weighted_d_adjoint(grad_n0)?.map(|x| params.rho1 * x);
        for k in 0..3 {
            for (f, v) in rhs.channel_mut(k).iter_mut().enumerate() {
                *v += params.beta * ops.mass_u[f] * n0.get(k, f);
            }
        }
        Ok(rhs)
    }

    /// Multiplies both penalties by `rho_growth`, capped at `rho_max`, and
    /// refactors the system if they changed.
    fn grow_penalties(&mut self) -> Result<()> {
        let p = self.params;
        let rho1 = (p.rho1 * p.rho_growth).min(p.rho_max.max(p.rho1));
        let rho2 = (p.rho2 * p.rho_growth).min(p.rho_max.max(p.rho2));
        if rho1 == p.rho1 && rho2 == p.rho2 {
            return Ok(());
        }
        self.params.rho1 = rho1;
        self.params.rho2 = rho2;
        self.system = SpdFactor::new(self.ops.normal_system(self.mesh, p.beta, rho1, rho2))?;
        self.base_rhs = Self::base_rhs(&self.ops, &self.n0, &self.grad_n0, &self.params)?;
        Ok(())
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn operators(&self) -> &OperatorBundle {
        &self.ops
    }

    pub fn system(&self) -> &SpdFactor {
        &self.system
    }

    /// `N = N0, P = 0, Q = grad2 N0`, zero multipliers.
    pub fn initial_state(&self) -> Result<SolverState> {
        let t = self.mesh.face_count();
        let e = self.mesh.edge_count();
        Ok(SolverState {
            normals: self.n0.clone(),
            p: EdgeField::zeros(3, e),
            q: self.ops.apply_grad2(&self.n0)?,
            lambda_p: EdgeField::zeros(3, e),
            lambda_q: StencilField::zeros(3, 3 * t),
            iteration: 0,
        })
    }

    /// Right-hand side of the N-subproblem normal equations.
    pub fn n_rhs(&self, state: &SolverState) -> Result<FaceField> {
        let rho1 = self.params.rho1;
        let rho2 = self.params.rho2;
        let p_term = state.p.add_scaled(-1.0 / rho1, &state.lambda_p)?;
        let q_term = state.q.add_scaled(-1.0 / rho2, &state.lambda_q)?;
        let from_p = self.ops.weighted_d_adjoint(&p_term)?;
        let from_q = self.ops.weighted_grad2_adjoint(&q_term)?;
        self.base_rhs
            .add_scaled(rho1, &from_p)?
            .add_scaled(rho2, &from_q)
    }

    /// Unconstrained minimizer of the N-subproblem, before projection.
    pub fn n_quadratic(&self, state: &SolverState) -> Result<FaceField> {
        let rhs = self.n_rhs(state)?;
        let mut out = FaceField::zeros(3, self.mesh.face_count());
        for k in 0..3 {
            let x = self.system.solve(rhs.channel(k))?;
            out.channel_mut(k).copy_from_slice(&x);
        }
        Ok(out)
    }

    /// N-subproblem: quadratic solve followed by unit-sphere projection.
    pub fn n_subproblem(&self, state: &SolverState) -> Result<FaceField> {
        let mut n = self.n_quadratic(state)?;
        if !n.is_finite() {
            return Err(Error::NonFinite {
                iteration: state.iteration + 1,
            });
        }
        project_to_sphere(&mut n, &state.normals);
        Ok(n)
    }

    /// P-subproblem: group soft shrinkage of `(D N - D N0) + lambda_P / rho1`
    /// on every interior edge.
    pub fn p_subproblem(&self, normals: &FaceField, lambda_p: &EdgeField) -> Result<EdgeField> {
        let target = self
            .ops
            .apply_d(normals)?
            .add_scaled(-1.0, &self.grad_n0)?
            .add_scaled(1.0 / self.params.rho1, lambda_p)?;
        let threshold = self.params.shrink_threshold();
        let mut out = EdgeField::zeros(3, self.mesh.edge_count());
        let mut group = [0.0; 3];
        for e in 0..self.mesh.edge_count() {
            if self.mesh.is_boundary_edge(e) {
                continue;
            }
            for (k, g) in group.iter_mut().enumerate() {
                *g = target.get(k, e);
            }
            prox::soft_shrink_group(&mut group, threshold);
            for (k, g) in group.iter().enumerate() {
                out.set(k, e, *g);
            }
        }
        Ok(out)
    }

    /// Q-subproblem: group hard threshold of `grad2 N + lambda_Q / rho2`
    /// on every active stencil.
    pub fn q_subproblem(
        &self,
        normals: &FaceField,
        lambda_q: &StencilField,
    ) -> Result<StencilField> {
        let target = self
            .ops
            .apply_grad2(normals)?
            .add_scaled(1.0 / self.params.rho2, lambda_q)?;
        let threshold = self.params.hard_threshold();
        let mut out = StencilField::zeros(3, 3 * self.mesh.face_count());
        let mut group = [0.0; 3];
        for (l, s) in self.mesh.stencils().iter().flatten().enumerate() {
            if !s.active {
                continue;
            }
            for (k, g) in group.iter_mut().enumerate() {
                *g = target.get(k, l);
            }
            prox::hard_threshold_group(&mut group, threshold);
            for (k, g) in group.iter().enumerate() {
                out.set(k, l, *g);
            }
        }
        Ok(out)
    }

    /// Constraint violations `(D N - D N0) - P` and `grad2 N - Q`.
    pub fn constraint_residuals(&self, state: &SolverState) -> Result<(EdgeField, StencilField)> {
        let grad_diff = self
            .ops
            .apply_d(&state.normals)?
            .add_scaled(-1.0, &self.grad_n0)?;
        let rp = grad_diff.add_scaled(-1.0, &state.p)?;
        let rq = self
            .ops
            .apply_grad2(&state.normals)?
            .add_scaled(-1.0, &state.q)?;
        Ok((rp, rq))
    }

    /// Dual ascent on both multipliers.
    pub fn update_multipliers(&self, state: &mut SolverState) -> Result<()> {
        let (rp, rq) = self.constraint_residuals(state)?;
        state.lambda_p = state.lambda_p.add_scaled(self.params.rho1, &rp)?;
        state.lambda_q = state.lambda_q.add_scaled(self.params.rho2, &rq)?;
        Ok(())
    }

    pub fn energy(&self, n: &FaceField) -> Result<f64> {
        let diff = n.add_scaled(-1.0, &self.n0)?;
        let fidelity = operators::inner_u(self.mesh, &diff, &diff)?;
        let jump_diff = self.ops.apply_d(&diff)?;
        let second = self.ops.apply_grad2(n)?;
        Ok(0.5 * self.params.beta * fidelity
            + self.params.alpha1 * group_l1_v(self.mesh, &jump_diff)
            + self.params.alpha2 * count_nonzero_stencils(self.mesh, &second) as f64)
    }

    /// One ADMM sweep: N, P, Q, multipliers, then penalty growth.
    pub fn step(&mut self, state: &mut SolverState, started: Instant) -> Result<IterationRecord> {
        let iteration = state.iteration + 1;
        let normals = self.n_subproblem(state)?;
        let change = normals.add_scaled(-1.0, &state.normals)?;
        state.normals = normals;
        state.p = self.p_subproblem(&state.normals, &state.lambda_p)?;
        state.q = self.q_subproblem(&state.normals, &state.lambda_q)?;

        let (rp, rq) = self.constraint_residuals(state)?;
        state.lambda_p = state.lambda_p.add_scaled(self.params.rho1, &rp)?;
        state.lambda_q = state.lambda_q.add_scaled(self.params.rho2, &rq)?;
        state.iteration = iteration;

        if !state.p.is_finite()
            || !state.q.is_finite()
            || !state.lambda_p.is_finite()
            || !state.lambda_q.is_finite()
        {
            return Err(Error::NonFinite { iteration });
        }

        let mesh = self.mesh;
        let r_p = operators::norm_v(mesh, &rp)?;
        let r_q = operators::norm_w(mesh, &rq)?;
        let grad_diff = rp.add_scaled(1.0, &state.p)?;
        let second = rq.add_scaled(1.0, &state.q)?;
        let rel_r_p = relative(
            r_p,
            operators::norm_v(mesh, &grad_diff)?,
            operators::norm_v(mesh, &state.p)?,
        );
        let rel_r_q = relative(
            r_q,
            operators::norm_w(mesh, &second)?,
            operators::norm_w(mesh, &state.q)?,
        );
        let record = IterationRecord {
            iter: iteration,
            energy: self.energy(&state.normals)?,
            r_p,
            r_q,
            d_n: operators::norm_u(mesh, &change)?,
            seconds: started.elapsed().as_secs_f64(),
            rel_r_p,
            rel_r_q,
        };
        self.grow_penalties()?;
        Ok(record)
    }

    /// Iterates until the relative primal residuals drop below
    /// `primal_tol` or `max_iter` sweeps have run.
    pub fn run(&mut self) -> Result<(FaceField, Diagnostics)> {
        self.run_with(|_, _| {})
    }

    /// Like [`run`](Self::run), calling `observe` after every sweep.
    pub fn run_with(
        &mut self,
        mut observe: impl FnMut(&SolverState, &IterationRecord),
    ) -> Result<(FaceField, Diagnostics)> {
        let started = Instant::now();
        let mut state = self.initial_state()?;
        let mut diagnostics = Diagnostics::default();
        let max_iter = self.params.max_iter;
        for _ in 0..max_iter {
            let record = self.step(&mut state, started)?;
            observe(&state, &record);
            diagnostics.records.push(record);
            if record.max_relative_residual() < self.params.primal_tol {
                diagnostics.converged = true;
                break;
            }
        }
        Ok((state.normals, diagnostics))
    }
}

/// Filters the normal field `n0` of `mesh`.
pub fn solve_normal_filter(
    mesh: &TriMesh,
    n0: &FaceField,
    params: &SolverParams,
) -> Result<(FaceField, Diagnostics)> {
    NormalFilter::new(mesh, n0, *params)?.run()
}
