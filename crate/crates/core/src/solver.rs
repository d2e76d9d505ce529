//! Damped Newton solution of the prescribed-expansion equation, homotopy
//! in the expansion weight, foliation sweeps and lapse diagnostics.
//!
//! A closed surface is sought as a radial graph `ρ` over a fixed center
//! such that the weighted expansion satisfies
//! `Θ_b = H + b·tr_Σ K̄ = -2/σ` for a prescribed curvature index `σ` and
//! weight `b ∈ [-1, 1]` (`b = 0`: constant mean curvature; `b = ±1`:
//! constant expansion with respect to the future/past null direction).
//!
//! The Newton linearization composes the normal-graph operator `J^b`
//! with the radial-to-normal conversion `v = ḡ(ν, n̂)` and adds the
//! explicit tangential transport of the expansion along the radial
//! direction; no terms are dropped. The graph center is held fixed
//! during a Newton solve and re-aligned with the measured coordinate
//! center only between continuation steps.

use nalgebra::DMatrix;

use crate::error::{CoreError, Result};
use crate::initialdata::InitialData;
use crate::sphere::{Field, SphereGrid};
use crate::stability::{
    format_g17, laplace_eigenbasis, smallest_eigenvalue, temporal_action,
    weighted_pseudo_stability, TemporalData,
};
use crate::surface::{concentricity_check, sobolev_norm, RadialSurface, SurfaceGeometry};

/// Numerical parameters of the Newton/continuation solvers. The defaults
/// are the empirical values used throughout the test suite; the step-size
/// selection has no sharp theory behind it, so the adaptive loop records
/// what it actually did in the continuation trace.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Sup-norm residual tolerance on `Θ_b + 2/σ`.
    pub newton_tol: f64,
    /// Maximum number of accepted Newton iterations per solve.
    pub max_newton: usize,
    /// Step-halving factor for the damped line search.
    pub damping: f64,
    /// Initial step for the weight homotopy `b: 0 → ±1`.
    pub b_step_init: f64,
    /// Smallest admissible homotopy step before the continuation aborts.
    pub b_step_min: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            newton_tol: 1e-10,
            max_newton: 25,
            damping: 0.5,
            b_step_init: 0.1,
            b_step_min: 1e-4,
        }
    }
}

/// Result of one Newton solve: the converged surface, its geometry, and
/// the sup-norm residual history (first entry: the initial guess).
#[derive(Debug)]
pub struct SolveOutcome {
    pub surface: RadialSurface,
    pub geometry: SurfaceGeometry,
    /// Number of accepted Newton updates.
    pub iterations: usize,
    /// Final sup-norm residual `sup |Θ_b + 2/σ|`.
    pub residual: f64,
    /// Residual after each accepted iterate, starting with the guess.
    pub residuals: Vec<f64>,
}

fn sup_residual(theta: &Field, target: f64) -> f64 {
    theta.iter().map(|t| (t - target).abs()).fold(0.0, f64::max)
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Galerkin matrix of the full radial-graph linearization
/// `f ↦ J^b(v·f) + (t^A ∂_A Θ_b)·f` with `v = ḡ(ν, n̂)` and `t^A` the
/// tangential components of the radial direction.
fn radial_jacobian(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    b: f64,
    theta: &Field,
) -> Result<DMatrix<f64>> {
    let op = weighted_pseudo_stability(grid, geo, b)?;
    let n = grid.node_count();
    let m = grid.coeff_count();
    let a = grid.analysis_matrix();
    let y = grid.basis_values();
    let dth = grid.differentiate(theta);
    // diag(v)·Y and diag(t·∇Θ)·Y assembled jointly.
    let mut vy = DMatrix::zeros(n, m);
    let mut qy = DMatrix::zeros(n, m);
    for q in 0..n {
        let v = geo.radial_speed[q];
        let t = geo.transport_up[q];
        let drift = t[0] * dth.dt[q] + t[1] * dth.dp[q];
        for k in 0..m {
            vy[(q, k)] = v * y[(q, k)];
            qy[(q, k)] = drift * y[(q, k)];
        }
    }
    Ok(op.coeff_matrix() * (a * vy) + a * qy)
}

/// One damped Newton update from `(surface, geometry)`. Returns the
/// accepted iterate with its geometry and new residual, or a divergence
/// error when step halving bottoms out without a residual decrease.
fn newton_step(
    grid: &SphereGrid,
    data: &dyn InitialData,
    surface: &RadialSurface,
    geometry: &SurfaceGeometry,
    b: f64,
    target: f64,
    residual: f64,
    iterations: usize,
    cfg: &SolveConfig,
) -> Result<(RadialSurface, SurfaceGeometry, f64)> {
    let theta = geometry.expansion(b)?.theta;
    let jac = radial_jacobian(grid, geometry, b, &theta)?;
    let res_nodes = theta.add_scalar(-target);
    let rhs = grid.analysis_matrix() * (-res_nodes);
    // In the vacuum-flat limit the translational near-kernel of the
    // linearization becomes exact; the step is then the minimum-norm
    // Gauss-Newton direction (the kernel carries no residual decrease).
    let delta_c = crate::stability::solve_linear(&jac, &rhs, false)?;
    let delta = grid.synthesize(&delta_c);

    let mut alpha = 1.0;
    loop {
        let rho = &surface.rho + alpha * &delta;
        let candidate = RadialSurface {
            center: surface.center,
            rho,
        };
        // A trial step may leave the admissible region (degenerate graph,
        // provider domain violation); that counts as a failed step and is
        // damped exactly like a residual increase.
        if let Ok(geo) = candidate.geometry(grid, data) {
            if let Ok(ex) = geo.expansion(b) {
                let r_new = sup_residual(&ex.theta, target);
                if r_new < residual {
                    return Ok((candidate, geo, r_new));
                }
            }
        }
        alpha *= cfg.damping;
        if alpha < 1e-8 {
            return Err(CoreError::NewtonDivergence {
                residual,
                iterations,
            });
        }
    }
}

/// Solves `Θ_b = -2/σ_target` by damped Newton iteration from the given
/// guess, holding the graph center fixed. After the tolerance is met one
/// additional undamped step is attempted (and kept only if it reduces the
/// residual further) so the surface itself, not just the residual,
/// reaches the quadratic-convergence floor.
pub fn solve_prescribed_expansion(
    grid: &SphereGrid,
    data: &dyn InitialData,
    guess: &RadialSurface,
    b: f64,
    sigma_target: f64,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    if !(sigma_target.is_finite() && sigma_target > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "curvature index sigma = {sigma_target} must be positive"
        )));
    }
    let target = -2.0 / sigma_target;
    let mut surface = guess.clone();
    let mut geometry = surface.geometry(grid, data)?;
    let mut residual = sup_residual(&geometry.expansion(b)?.theta, target);
    let mut residuals = vec![residual];
    let mut iterations = 0usize;

    while residual > cfg.newton_tol {
        if iterations >= cfg.max_newton {
            return Err(CoreError::NewtonDivergence {
                residual,
                iterations,
            });
        }
        let (s, g, r) = newton_step(
            grid, data, &surface, &geometry, b, target, residual, iterations, cfg,
        )?;
        surface = s;
        geometry = g;
        residual = r;
        iterations += 1;
        residuals.push(residual);
    }

    // Polish step, skipped when the guess was already converged (so a
    // warm restart is an exact no-op).
    if iterations > 0 {
        if let Ok((s, g, r)) = newton_step(
            grid, data, &surface, &geometry, b, target, residual, iterations, cfg,
        ) {
            if r < residual {
                surface = s;
                geometry = g;
                residual = r;
                iterations += 1;
                residuals.push(residual);
            }
        }
    }

    Ok(SolveOutcome {
        surface,
        geometry,
        iterations,
        residual,
        residuals,
    })
}

/// Solution of an elliptic equation `op·u = rhs` on a surface, with its
/// decomposition against the translational near-kernel.
#[derive(Debug, Clone)]
pub struct LapseField {
    /// Node values of the solution.
    pub values: Field,
    /// `L²(dμ)` norm of the projection onto the translational eigenspace
    /// of the induced Laplacian (eigenvalues near `2/σ²`).
    pub norm_translational: f64,
    /// `L²(dμ)` norm of the complement.
    pub norm_orthogonal: f64,
    /// `W^{1,∞}` norm: sup of the value and of the surface-gradient
    /// length.
    pub w1_inf: f64,
    pub min: f64,
    pub max: f64,
}

fn operator_lapse(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    op: &crate::stability::OperatorMatrix,
    rhs_nodes: &Field,
) -> Result<LapseField> {
    let rhs = grid.analysis_matrix() * rhs_nodes;
    let coeffs = op.solve_coeffs(&rhs)?;
    let values = grid.synthesize(&coeffs);
    let basis = laplace_eigenbasis(grid, geo)?;
    let tpart = basis.project_translational(&coeffs);
    let norm_translational = basis.norm(&tpart);
    let opart = &coeffs - &tpart;
    let norm_orthogonal = basis.norm(&opart);
    let w1_inf = sobolev_norm(grid, geo, &values, 1, f64::INFINITY)?;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(LapseField {
        values,
        norm_translational,
        norm_orthogonal,
        w1_inf,
        min,
        max,
    })
}

/// Lapse of the weight homotopy: solves `J^b u = -tr_Σ K̄`, the linear
/// response of the surface to a change of the expansion weight `b` at
/// frozen target. Vanishes identically when the ambient curvature `K̄`
/// is zero, and is linear in `K̄` at frozen geometry.
pub fn weight_lapse(grid: &SphereGrid, geo: &SurfaceGeometry, b: f64) -> Result<LapseField> {
    let op = weighted_pseudo_stability(grid, geo, b)?;
    let n = geo.node_count();
    let mut rhs = Field::zeros(n);
    for q in 0..n {
        rhs[q] = -geo.k_trace_tan[q];
    }
    operator_lapse(grid, geo, &op, &rhs)
}

/// Lapse of the radial foliation sweep: solves `J^b u = 2/σ²`, the
/// linear response of the leaf to a change of the curvature index. A
/// positive lapse at every node certifies that the sweep moves outward
/// monotonically.
pub fn radius_lapse(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    b: f64,
    sigma: f64,
) -> Result<LapseField> {
    let op = weighted_pseudo_stability(grid, geo, b)?;
    let rhs = Field::from_element(geo.node_count(), 2.0 / (sigma * sigma));
    operator_lapse(grid, geo, &op, &rhs)
}

/// Lapse of the time evolution: solves
/// `(J^b + b·(D_ν α)·tr_Σ K̄) u = -J̃ᵗα`, the normal speed at which the
/// constant-expansion leaf moves under the spacetime evolution generated
/// by the lapse `α` (zero shift). The diagonal correction is the
/// derivative of the weighted trace term along the time flow; it
/// vanishes whenever the data are static (`K̄ = 0`) or the lapse is
/// constant.
pub fn time_lapse(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    td: &dyn TemporalData,
    b: f64,
) -> Result<LapseField> {
    let action = temporal_action(grid, geo, td, b)?;
    let base = weighted_pseudo_stability(grid, geo, b)?;
    let n = geo.node_count();
    let mut diag = Field::zeros(n);
    for q in 0..n {
        let (_, da, _) = td.lapse_jet(geo.pos[q])?;
        let nu = geo.normal[q];
        let d_nu_alpha = da[0] * nu[0] + da[1] * nu[1] + da[2] * nu[2];
        diag[q] = b * d_nu_alpha * geo.k_trace_tan[q];
    }
    let op = base.with_potential(grid, &diag);
    operator_lapse(grid, geo, &op, &(-action))
}

/// One accepted continuation/solve event: weight, prescribed curvature
/// index, Newton effort, residual, and the leaf diagnostics (Hawking
/// mass, coordinate center, trace-free second-form sup, smallest
/// eigenvalue of the linearization, minimum of the radius lapse).
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub b: f64,
    pub sigma: f64,
    pub iters: usize,
    pub residual: f64,
    pub m_h: f64,
    pub z: [f64; 3],
    pub sup_aring: f64,
    pub min_eig: f64,
    pub min_lapse: f64,
}

/// Ordered list of accepted continuation events.
#[derive(Debug, Clone, Default)]
pub struct ContinuationTrace {
    pub records: Vec<TraceRecord>,
}

/// CSV rendering of a continuation trace (17 significant digits,
/// newline-terminated rows).
pub fn trace_csv(trace: &ContinuationTrace) -> String {
    let mut out = String::from("b,sigma,iters,residual,mH,zx,zy,zz,sup_Aring,min_eig,min_lapse\n");
    for r in &trace.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            format_g17(r.b),
            format_g17(r.sigma),
            r.iters,
            format_g17(r.residual),
            format_g17(r.m_h),
            format_g17(r.z[0]),
            format_g17(r.z[1]),
            format_g17(r.z[2]),
            format_g17(r.sup_aring),
            format_g17(r.min_eig),
            format_g17(r.min_lapse),
        ));
    }
    out
}

/// Diagnostic record of one accepted solve (Hawking mass, coordinate
/// center, umbilicity defect, smallest operator eigenvalue, radius-lapse
/// minimum).
pub fn trace_record(
    grid: &SphereGrid,
    outcome: &SolveOutcome,
    b: f64,
    sigma_target: f64,
) -> Result<TraceRecord> {
    let geo = &outcome.geometry;
    let op = weighted_pseudo_stability(grid, geo, b)?;
    let (min_eig, _) = smallest_eigenvalue(&op)?;
    let lapse = radius_lapse(grid, geo, b, sigma_target)?;
    Ok(TraceRecord {
        b,
        sigma: sigma_target,
        iters: outcome.iterations,
        residual: outcome.residual,
        m_h: geo.hawking_mass,
        z: geo.center_euclid,
        sup_aring: geo.sup_tracefree(),
        min_eig,
        min_lapse: lapse.min,
    })
}

/// Continuation in the expansion weight: solves the constant-mean-
/// curvature problem (`b = 0`) from a round guess of radius `σ`, then
/// follows the family `Θ_b = -2/σ` to `b = ±1` with an adaptive step
/// (doubling on success, halving on failure, aborting below
/// `b_step_min`). Each accepted step is predicted by the weight lapse
/// and corrected by a full Newton solve; the graph center is re-aligned
/// with the measured coordinate center between accepted steps. When
/// `tr_Σ K̄` vanishes identically at the CMC solution the homotopy is a
/// no-op and the target weight is reached in a single step.
pub fn continue_weight(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sigma_target: f64,
    b_target: f64,
    cfg: &SolveConfig,
) -> Result<(SolveOutcome, ContinuationTrace)> {
    let mut trace = ContinuationTrace::default();
    let outcome = continue_weight_into(grid, data, sigma_target, b_target, cfg, &mut trace)?;
    Ok((outcome, trace))
}

/// [`continue_weight`] variant that appends accepted steps to a caller-
/// owned trace, so the partial record survives a failed continuation.
pub fn continue_weight_into(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sigma_target: f64,
    b_target: f64,
    cfg: &SolveConfig,
    trace: &mut ContinuationTrace,
) -> Result<SolveOutcome> {
    if b_target.abs() != 1.0 {
        return Err(CoreError::InvalidArgument(format!(
            "weight target {b_target} must be -1 or +1"
        )));
    }
    let guess = RadialSurface::round(grid, [0.0; 3], sigma_target);
    let mut outcome = solve_prescribed_expansion(grid, data, &guess, 0.0, sigma_target, cfg)?;
    trace
        .records
        .push(trace_record(grid, &outcome, 0.0, sigma_target)?);

    let sup_trk = outcome
        .geometry
        .k_trace_tan
        .iter()
        .fold(0.0, |a: f64, v| a.max(v.abs()));
    if sup_trk <= cfg.newton_tol {
        // Θ_b is independent of b here; jump straight to the target.
        let done = solve_prescribed_expansion(
            grid,
            data,
            &outcome.surface,
            b_target,
            sigma_target,
            cfg,
        )?;
        trace
            .records
            .push(trace_record(grid, &done, b_target, sigma_target)?);
        return Ok(done);
    }

    let dir = b_target.signum();
    let mut b = 0.0_f64;
    let mut step = cfg.b_step_init.min(1.0);
    while b != b_target {
        let remaining = (b_target - b).abs();
        let db = step.min(remaining);
        let b_next = if db >= remaining { b_target } else { b + dir * db };

        // First-order predictor along the homotopy, converted from a
        // normal speed into a radial-graph increment.
        let predicted = match weight_lapse(grid, &outcome.geometry, b) {
            Ok(u) => {
                let mut rho = outcome.surface.rho.clone();
                for q in 0..rho.len() {
                    rho[q] += dir * db * u.values[q] / outcome.geometry.radial_speed[q];
                }
                RadialSurface {
                    center: outcome.surface.center,
                    rho,
                }
            }
            Err(_) => outcome.surface.clone(),
        };

        match solve_prescribed_expansion(grid, data, &predicted, b_next, sigma_target, cfg) {
            Ok(mut next) => {
                // Re-align the graph center with the measured coordinate
                // center, then re-converge at the new center (centers are
                // never moved during a Newton solve).
                let z = next.geometry.center_euclid;
                let shift = [
                    z[0] - next.surface.center[0],
                    z[1] - next.surface.center[1],
                    z[2] - next.surface.center[2],
                ];
                if norm3(&shift) > 1e-9 * sigma_target {
                    let moved = next.surface.recentered(grid, shift)?;
                    next = solve_prescribed_expansion(
                        grid,
                        data,
                        &moved,
                        b_next,
                        sigma_target,
                        cfg,
                    )?;
                }
                b = b_next;
                outcome = next;
                trace
                    .records
                    .push(trace_record(grid, &outcome, b, sigma_target)?);
                step = (step * 2.0).min(1.0);
            }
            Err(CoreError::NewtonDivergence { .. }) | Err(CoreError::SingularJacobian(_)) => {
                step *= 0.5;
                if step < cfg.b_step_min {
                    return Err(CoreError::ContinuationStall { b, min_step: step });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(outcome)
}

/// One leaf of a constant-expansion foliation sweep.
#[derive(Debug)]
pub struct FoliationLeaf {
    pub sigma: f64,
    pub surface: RadialSurface,
    pub iterations: usize,
    pub residual: f64,
    /// Extremes of the radius lapse `J^b u = 2/σ²` on the leaf.
    pub lapse_min: f64,
    pub lapse_max: f64,
    /// `true` when the radius lapse is positive at every node.
    pub lapse_positive: bool,
}

/// Result of a foliation sweep: the leaves in ascending order of the
/// curvature index, a nestedness certificate, and the full continuation
/// trace of all accepted solves.
#[derive(Debug)]
pub struct FoliationResult {
    pub leaves: Vec<FoliationLeaf>,
    /// `true` when every consecutive pair of leaves, expressed as radial
    /// graphs about a common center, is strictly ordered at every node.
    pub nested: bool,
    pub trace: ContinuationTrace,
}

/// Sweeps a family of constant-expansion leaves `Θ_±1 = -2/σ` over an
/// ascending list of curvature indices. The first leaf is produced by the
/// full weight continuation; later leaves are solved directly from the
/// previous leaf scaled by the ratio of indices, falling back to the full
/// continuation if the warm start diverges.
pub fn foliation_sweep(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sign: f64,
    sigma_list: &[f64],
    cfg: &SolveConfig,
) -> Result<FoliationResult> {
    let mut trace = ContinuationTrace::default();
    let (leaves, nested) = foliation_sweep_into(grid, data, sign, sigma_list, cfg, &mut trace)?;
    Ok(FoliationResult {
        leaves,
        nested,
        trace,
    })
}

/// [`foliation_sweep`] variant that appends accepted solves to a caller-
/// owned trace, so the partial record survives a failed sweep.
pub fn foliation_sweep_into(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sign: f64,
    sigma_list: &[f64],
    cfg: &SolveConfig,
    trace: &mut ContinuationTrace,
) -> Result<(Vec<FoliationLeaf>, bool)> {
    if sign.abs() != 1.0 {
        return Err(CoreError::InvalidArgument(format!(
            "expansion weight sign {sign} must be -1 or +1"
        )));
    }
    if sigma_list.is_empty() {
        return Err(CoreError::InvalidArgument(
            "empty curvature index list".into(),
        ));
    }
    for w in sigma_list.windows(2) {
        if !(w[1] > w[0]) {
            return Err(CoreError::InvalidArgument(format!(
                "curvature indices must be strictly ascending, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    if !(sigma_list[0].is_finite() && sigma_list[0] > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "curvature index {} must be positive",
            sigma_list[0]
        )));
    }

    let mut leaves: Vec<FoliationLeaf> = Vec::with_capacity(sigma_list.len());
    let mut prev: Option<(f64, SolveOutcome)> = None;
    for &sigma in sigma_list {
        let outcome = match &prev {
            None => continue_weight_into(grid, data, sigma, sign, cfg, trace)?,
            Some((psigma, p)) => {
                let warm = RadialSurface {
                    center: p.surface.center,
                    rho: &p.surface.rho * (sigma / psigma),
                };
                match solve_prescribed_expansion(grid, data, &warm, sign, sigma, cfg) {
                    Ok(o) => {
                        trace.records.push(trace_record(grid, &o, sign, sigma)?);
                        o
                    }
                    Err(CoreError::NewtonDivergence { .. })
                    | Err(CoreError::SingularJacobian(_)) => {
                        continue_weight_into(grid, data, sigma, sign, cfg, trace)?
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        let lapse = radius_lapse(grid, &outcome.geometry, sign, sigma)?;
        leaves.push(FoliationLeaf {
            sigma,
            surface: outcome.surface.clone(),
            iterations: outcome.iterations,
            residual: outcome.residual,
            lapse_min: lapse.min,
            lapse_max: lapse.max,
            lapse_positive: lapse.min > 0.0,
        });
        prev = Some((sigma, outcome));
    }

    let nested = nested_leaves(grid, &leaves)?;
    Ok((leaves, nested))
}

/// Checks that consecutive leaves, expressed as radial graphs about the
/// inner leaf's center, satisfy `ρ_outer > ρ_inner` at every node.
fn nested_leaves(grid: &SphereGrid, leaves: &[FoliationLeaf]) -> Result<bool> {
    for pair in leaves.windows(2) {
        let inner = &pair[0].surface;
        let outer = &pair[1].surface;
        let shift = [
            inner.center[0] - outer.center[0],
            inner.center[1] - outer.center[1],
            inner.center[2] - outer.center[2],
        ];
        let outer_about_inner = if norm3(&shift) > 0.0 {
            outer.recentered(grid, shift)?
        } else {
            outer.clone()
        };
        for q in 0..inner.rho.len() {
            if !(outer_about_inner.rho[q] > inner.rho[q]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Result of a uniqueness probe at one curvature index.
#[derive(Debug)]
pub struct UniquenessReport {
    pub sigma: f64,
    /// Indices of the guesses admitted by the concentric-class check.
    pub admissible: Vec<usize>,
    /// Rejected guesses with the reason for rejection. These are flagged
    /// before any solve is attempted.
    pub inadmissible: Vec<(usize, String)>,
    /// Converged surfaces, parallel to `admissible`.
    pub surfaces: Vec<RadialSurface>,
    /// Largest sup-distance between any two converged surfaces, measured
    /// as radial graphs about a common center.
    pub pairwise_sup: f64,
}

/// Empirical constants of the concentric surface class used to screen
/// uniqueness-probe guesses; the decay offset `η` is taken from the
/// provider metadata.
const CLASS_CENTER_FRACTION: f64 = 0.25;
const CLASS_CONSTANT: f64 = 1.0;

/// Solves `Θ_sign = -2/σ` from several initial guesses and measures the
/// spread of the results. Guesses outside the concentric surface class
/// (off-center, wrong scale, or Willmore-energy excess) are flagged and
/// skipped *without* solving; at least one guess must be admissible.
pub fn uniqueness_probe(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sign: f64,
    sigma: f64,
    guesses: &[RadialSurface],
    cfg: &SolveConfig,
) -> Result<UniquenessReport> {
    if sign.abs() != 1.0 {
        return Err(CoreError::InvalidArgument(format!(
            "expansion weight sign {sign} must be -1 or +1"
        )));
    }
    if guesses.is_empty() {
        return Err(CoreError::InvalidArgument("no guesses supplied".into()));
    }
    let md = data.metadata();
    let eta = md.eps;
    let mut admissible = Vec::new();
    let mut inadmissible = Vec::new();
    for (i, g) in guesses.iter().enumerate() {
        match g.geometry(grid, data) {
            Err(e) => inadmissible.push((i, format!("geometry rejected: {e}"))),
            Ok(geo) => {
                let rep = concentricity_check(&geo, md.eps, eta, CLASS_CENTER_FRACTION, CLASS_CONSTANT);
                if rep.passed {
                    admissible.push(i);
                } else {
                    let mut why = Vec::new();
                    if !rep.center_ok {
                        why.push(format!(
                            "center offset {:.3e} exceeds bound {:.3e}",
                            rep.center_offset, rep.center_bound
                        ));
                    }
                    if !rep.scale_ok {
                        why.push(format!(
                            "scale {:.3e} exceeds chart-radius bound {:.3e}",
                            rep.scale_value, rep.scale_bound
                        ));
                    }
                    if !rep.willmore_ok {
                        why.push(format!(
                            "Willmore defect {:.3e} exceeds bound {:.3e}",
                            rep.willmore_defect, rep.willmore_bound
                        ));
                    }
                    inadmissible.push((i, why.join("; ")));
                }
            }
        }
    }
    if admissible.is_empty() {
        return Err(CoreError::InadmissibleGuess(format!(
            "all {} guesses fail the concentric-class check",
            guesses.len()
        )));
    }

    let mut surfaces = Vec::with_capacity(admissible.len());
    for &i in &admissible {
        let o = solve_prescribed_expansion(grid, data, &guesses[i], sign, sigma, cfg)?;
        surfaces.push(o.surface);
    }

    // Sup-distance of the radial graphs about a common center.
    let c0 = surfaces[0].center;
    let mut aligned = Vec::with_capacity(surfaces.len());
    for s in &surfaces {
        let shift = [
            c0[0] - s.center[0],
            c0[1] - s.center[1],
            c0[2] - s.center[2],
        ];
        aligned.push(if norm3(&shift) > 0.0 {
            s.recentered(grid, shift)?
        } else {
            s.clone()
        });
    }
    let mut pairwise_sup = 0.0_f64;
    for i in 0..aligned.len() {
        for j in (i + 1)..aligned.len() {
            let d = (&aligned[i].rho - &aligned[j].rho)
                .iter()
                .fold(0.0_f64, |a, v| a.max(v.abs()));
            pairwise_sup = pairwise_sup.max(d);
        }
    }

    Ok(UniquenessReport {
        sigma,
        admissible,
        inadmissible,
        surfaces,
        pairwise_sup,
    })
}
