//! Task orchestration: builds the grid and provider from a parsed
//! config, dispatches the requested task, and emits all artifacts
//! through the atomic writer. The continuation trace is flushed even
//! when a solver fails, so failed runs keep their partial record.

use std::path::Path;

use cefoliator_core::adm::{
    adm_csv, adm_linear_momentum, adm_mass_curvature, adm_mass_flux, hawking_limit,
    momentum_limit_check, smallness_integrals, RadiusSeries,
};
use cefoliator_core::initialdata::audit::{decay_audit, DecayAuditRow};
use cefoliator_core::initialdata::InitialData;
use cefoliator_core::solver::{
    continue_weight_into, foliation_sweep_into, solve_prescribed_expansion, time_lapse,
    trace_csv, trace_record, ContinuationTrace, SolveConfig, SolveOutcome, TraceRecord,
};
use cefoliator_core::sphere::SphereGrid;
use cefoliator_core::stability::{
    format_g17, spectrum, spectrum_csv, verify_invertibility_estimates, weighted_pseudo_stability,
    StaticSchwarzschildLapse, TemporalData, UnitLapse,
};
use cefoliator_core::surface::{RadialSurface, SurfaceFile};
use serde::Serialize;

use crate::artifacts::ArtifactWriter;
use crate::config::{ConfigFile, GuessConfig, LapseModel, TaskConfig};
use crate::RunError;

#[derive(Serialize)]
struct RunMeta {
    schema: &'static str,
    task: &'static str,
    data: String,
    lmax: usize,
    threads: usize,
}

#[derive(Serialize)]
struct SurfaceSummary {
    sigma: f64,
    weight: f64,
    iterations: usize,
    residual: f64,
    hawking_mass: f64,
    area_radius: f64,
    center: [f64; 3],
    sup_tracefree: f64,
    min_rho: f64,
    max_rho: f64,
}

fn surface_summary(outcome: &SolveOutcome, sigma: f64, weight: f64) -> SurfaceSummary {
    let geo = &outcome.geometry;
    let rho = &outcome.surface.rho;
    SurfaceSummary {
        sigma,
        weight,
        iterations: outcome.iterations,
        residual: outcome.residual,
        hawking_mass: geo.hawking_mass,
        area_radius: geo.area_radius,
        center: geo.center_euclid,
        sup_tracefree: geo.sup_tracefree(),
        min_rho: rho.iter().copied().fold(f64::INFINITY, f64::min),
        max_rho: rho.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

fn surface_file(grid: &SphereGrid, outcome: &SolveOutcome, sigma: f64, weight: f64) -> SurfaceFile {
    SurfaceFile {
        lmax: grid.lmax(),
        sigma,
        b: weight,
        center: outcome.surface.center,
        rho: outcome.surface.rho.iter().copied().collect(),
    }
}

/// Solves one surface: by weight continuation from the mean-curvature
/// problem, or directly from a round guess. Every accepted solve is
/// appended to the trace.
#[allow(clippy::too_many_arguments)]
fn solve_leaf(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sigma: f64,
    weight: f64,
    continuation: bool,
    guess: Option<GuessConfig>,
    cfg: &SolveConfig,
    trace: &mut ContinuationTrace,
) -> Result<SolveOutcome, RunError> {
    if continuation {
        Ok(continue_weight_into(grid, data, sigma, weight, cfg, trace)?)
    } else {
        let start = match guess {
            Some(g) => RadialSurface::round(grid, g.center, g.radius),
            None => RadialSurface::round(grid, [0.0; 3], sigma),
        };
        let outcome = solve_prescribed_expansion(grid, data, &start, weight, sigma, cfg)?;
        trace
            .records
            .push(trace_record(grid, &outcome, weight, sigma)?);
        Ok(outcome)
    }
}

/// The last accepted record at the target weight and index (the final
/// state of that leaf's solve).
fn final_record(trace: &ContinuationTrace, weight: f64, sigma: f64) -> Option<TraceRecord> {
    trace
        .records
        .iter()
        .rev()
        .find(|r| r.b == weight && r.sigma == sigma)
        .cloned()
}

/// Runs the configured task, writing all artifacts into `out_dir`.
/// Returns a one-line human summary for stdout.
pub fn run(
    cli_task: &'static str,
    cfg: &ConfigFile,
    config_dir: &Path,
    out_dir: &Path,
    threads: usize,
) -> Result<String, RunError> {
    if cli_task != cfg.task.name() {
        return Err(RunError::Config(format!(
            "command-line task {cli_task:?} does not match config task {:?}",
            cfg.task.name()
        )));
    }
    let grid = SphereGrid::new(cfg.numerics.lmax)?;
    let data = cfg.data.build(config_dir)?;
    let solve_cfg = cfg.numerics.solve_config();
    let meta = RunMeta {
        schema: crate::config::SCHEMA,
        task: cfg.task.name(),
        data: cfg.data.describe(),
        lmax: cfg.numerics.lmax,
        threads,
    };
    let mut writer = ArtifactWriter::new(out_dir)?;
    let mut trace = ContinuationTrace::default();
    let result = dispatch(
        cfg,
        &grid,
        data.as_ref(),
        &solve_cfg,
        meta,
        &mut writer,
        &mut trace,
    );
    // Retain whatever trace exists — also (especially) on failure.
    if !trace.records.is_empty() {
        writer.write_text("trace.csv", &trace_csv(&trace))?;
    }
    writer.finish()?;
    result.map(|line| format!("{line} ({} artifacts in {})", writer.artifact_count(), out_dir.display()))
}

#[allow(clippy::too_many_arguments)]
fn dispatch(
    cfg: &ConfigFile,
    grid: &SphereGrid,
    data: &dyn InitialData,
    solve_cfg: &SolveConfig,
    meta: RunMeta,
    w: &mut ArtifactWriter,
    trace: &mut ContinuationTrace,
) -> Result<String, RunError> {
    match &cfg.task {
        TaskConfig::Solve {
            sigma,
            weight,
            continuation,
            guess,
        } => run_solve(
            grid,
            data,
            *sigma,
            *weight,
            continuation.unwrap_or(weight.abs() == 1.0),
            *guess,
            solve_cfg,
            meta,
            w,
            trace,
        ),
        TaskConfig::Foliate { sign, sigmas } => {
            run_foliate(grid, data, *sign, sigmas, solve_cfg, meta, w, trace)
        }
        TaskConfig::Spectrum {
            sigma,
            weight,
            continuation,
            pairs,
        } => run_spectrum(
            grid,
            data,
            *sigma,
            *weight,
            continuation.unwrap_or(weight.abs() == 1.0),
            *pairs,
            solve_cfg,
            meta,
            w,
            trace,
        ),
        TaskConfig::Audit { radii } => run_audit(data, radii, meta, w),
        TaskConfig::Adm { radii, eps } => run_adm(grid, data, radii, *eps, meta, w),
        TaskConfig::Evolve {
            sigmas,
            weight,
            continuation,
            lapse,
        } => run_evolve(
            grid,
            data,
            sigmas,
            *weight,
            continuation.unwrap_or(weight.abs() == 1.0),
            *lapse,
            solve_cfg,
            meta,
            w,
            trace,
        ),
        TaskConfig::Unique {
            sigma,
            sign,
            guesses,
        } => run_unique(grid, data, *sigma, *sign, guesses, solve_cfg, meta, w),
    }
}

#[derive(Serialize)]
struct SolveReport {
    meta: RunMeta,
    surface: SurfaceSummary,
    residual_history: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn run_solve(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sigma: f64,
    weight: f64,
    continuation: bool,
    guess: Option<GuessConfig>,
    cfg: &SolveConfig,
    meta: RunMeta,
    w: &mut ArtifactWriter,
    trace: &mut ContinuationTrace,
) -> Result<String, RunError> {
    let outcome = solve_leaf(grid, data, sigma, weight, continuation, guess, cfg, trace)?;
    w.write_surface("surface.cesurf", &surface_file(grid, &outcome, sigma, weight))?;
    let iters: Vec<f64> = (0..outcome.residuals.len()).map(|i| i as f64).collect();
    w.write_plot("newton_residual", &iters, &outcome.residuals, false)?;
    let report = SolveReport {
        meta,
        surface: surface_summary(&outcome, sigma, weight),
        residual_history: outcome.residuals.clone(),
    };
    w.write_json("report.json", &report)?;
    Ok(format!(
        "solve: sigma={sigma} weight={weight} iterations={} residual={:.3e}",
        outcome.iterations, outcome.residual
    ))
}

#[derive(Serialize)]
struct LeafSummary {
    sigma: f64,
    iterations: usize,
    residual: f64,
    lapse_min: f64,
    lapse_max: f64,
    lapse_positive: bool,
    hawking_mass: f64,
    sup_tracefree: f64,
    center: [f64; 3],
}

#[derive(Serialize)]
struct FoliateReport {
    meta: RunMeta,
    sign: f64,
    nested: bool,
    lapse_all_positive: bool,
    leaves: Vec<LeafSummary>,
}

#[allow(clippy::too_many_arguments)]
fn run_foliate(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sign: f64,
    sigmas: &[f64],
    cfg: &SolveConfig,
    meta: RunMeta,
    w: &mut ArtifactWriter,
    trace: &mut ContinuationTrace,
) -> Result<String, RunError> {
    let (leaves, nested) = foliation_sweep_into(grid, data, sign, sigmas, cfg, trace)?;
    let mut csv = String::from("sigma,iterations,residual,lapse_min,lapse_max,lapse_positive\n");
    let mut rows = Vec::with_capacity(leaves.len());
    for (i, leaf) in leaves.iter().enumerate() {
        let file = SurfaceFile {
            lmax: grid.lmax(),
            sigma: leaf.sigma,
            b: sign,
            center: leaf.surface.center,
            rho: leaf.surface.rho.iter().copied().collect(),
        };
        w.write_surface(&format!("leaf_{i:03}.cesurf"), &file)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_g17(leaf.sigma),
            leaf.iterations,
            format_g17(leaf.residual),
            format_g17(leaf.lapse_min),
            format_g17(leaf.lapse_max),
            u8::from(leaf.lapse_positive),
        ));
        let rec = final_record(trace, sign, leaf.sigma).ok_or_else(|| {
            RunError::Config(format!("missing trace record for leaf sigma {}", leaf.sigma))
        })?;
        rows.push(LeafSummary {
            sigma: leaf.sigma,
            iterations: leaf.iterations,
            residual: leaf.residual,
            lapse_min: leaf.lapse_min,
            lapse_max: leaf.lapse_max,
            lapse_positive: leaf.lapse_positive,
            hawking_mass: rec.m_h,
            sup_tracefree: rec.sup_aring,
            center: rec.z,
        });
    }
    w.write_text("foliation.csv", &csv)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.sigma).collect();
    let hawking: Vec<f64> = rows.iter().map(|r| r.hawking_mass).collect();
    let umb: Vec<f64> = rows.iter().map(|r| r.sup_tracefree).collect();
    let lmin: Vec<f64> = rows.iter().map(|r| r.lapse_min).collect();
    w.write_plot("hawking", &xs, &hawking, false)?;
    w.write_plot("umbilicity", &xs, &umb, true)?;
    w.write_plot("lapse_min", &xs, &lmin, false)?;
    let all_positive = rows.iter().all(|r| r.lapse_positive);
    let report = FoliateReport {
        meta,
        sign,
        nested,
        lapse_all_positive: all_positive,
        leaves: rows,
    };
    w.write_json("report.json", &report)?;
    Ok(format!(
        "foliate: {} leaves, nested={nested}, lapse_all_positive={all_positive}",
        leaves.len()
    ))
}

#[derive(Serialize)]
struct EigenSummary {
    re: f64,
    im: f64,
    translational: bool,
}

#[derive(Serialize)]
struct InvertibilitySummary {
    sigma: f64,
    hawking_mass: f64,
    translational_rank: usize,
    d_measured: f64,
    translational_scale: f64,
    complement_min_singular: f64,
    complement_bound: f64,
    complement_margin: f64,
    global_min_singular: f64,
    global_bound: f64,
    global_margin: f64,
    mass_hypothesis_met: bool,
}

#[derive(Serialize)]
struct SpectrumReport {
    meta: RunMeta,
    surface: SurfaceSummary,
    eigenvalue_count: usize,
    translational_rank: usize,
    smallest: Vec<EigenSummary>,
    invertibility: InvertibilitySummary,
}

#[allow(clippy::too_many_arguments)]
fn run_spectrum(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sigma: f64,
    weight: f64,
    continuation: bool,
    pairs: usize,
    cfg: &SolveConfig,
    meta: RunMeta,
    w: &mut ArtifactWriter,
    trace: &mut ContinuationTrace,
) -> Result<String, RunError> {
    let outcome = solve_leaf(grid, data, sigma, weight, continuation, None, cfg, trace)?;
    let geo = &outcome.geometry;
    let op = weighted_pseudo_stability(grid, geo, weight)?;
    let summary = spectrum(grid, geo, &op, pairs)?;
    w.write_text("spectrum.csv", &spectrum_csv(&summary))?;
    w.write_surface("surface.cesurf", &surface_file(grid, &outcome, sigma, weight))?;
    let inv = verify_invertibility_estimates(grid, geo, weight)?;
    let report = SpectrumReport {
        meta,
        surface: surface_summary(&outcome, sigma, weight),
        eigenvalue_count: summary.eigenvalues.len(),
        translational_rank: summary.translational_rank,
        smallest: summary
            .smallest
            .iter()
            .map(|p| EigenSummary {
                re: p.re,
                im: p.im,
                translational: p.translational,
            })
            .collect(),
        invertibility: InvertibilitySummary {
            sigma: inv.sigma,
            hawking_mass: inv.hawking_mass,
            translational_rank: inv.translational_rank,
            d_measured: inv.d_measured,
            translational_scale: inv.translational_scale,
            complement_min_singular: inv.complement_min_singular,
            complement_bound: inv.complement_bound,
            complement_margin: inv.complement_margin,
            global_min_singular: inv.global_min_singular,
            global_bound: inv.global_bound,
            global_margin: inv.global_margin,
            mass_hypothesis_met: inv.mass_hypothesis_met,
        },
    };
    w.write_json("report.json", &report)?;
    let smallest_mag = summary
        .smallest
        .first()
        .map(|p| (p.re * p.re + p.im * p.im).sqrt())
        .unwrap_or(f64::NAN);
    Ok(format!(
        "spectrum: sigma={sigma} weight={weight} eigenvalues={} smallest|λ|={smallest_mag:.3e}",
        summary.eigenvalues.len()
    ))
}

#[derive(Serialize)]
struct AuditColumnSup {
    metric_defect: f64,
    metric_gradient_defect: f64,
    curvature_defect: f64,
    curvature_gradient_defect: f64,
    antisymmetry_defect: f64,
}

#[derive(Serialize)]
struct AuditReport {
    meta: RunMeta,
    eps: f64,
    column_sup: AuditColumnSup,
}

fn run_audit(
    data: &dyn InitialData,
    radii: &[f64],
    meta: RunMeta,
    w: &mut ArtifactWriter,
) -> Result<String, RunError> {
    let report = decay_audit(data, radii)?;
    let mut csv = String::from("radius");
    for name in DecayAuditRow::COLUMN_NAMES {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for row in &report.rows {
        csv.push_str(&format_g17(row.radius));
        for v in row.columns() {
            csv.push(',');
            csv.push_str(&format_g17(v));
        }
        csv.push('\n');
    }
    w.write_text("audit.csv", &csv)?;
    let xs: Vec<f64> = report.rows.iter().map(|r| r.radius).collect();
    for (j, name) in DecayAuditRow::COLUMN_NAMES.iter().enumerate() {
        let ys: Vec<f64> = report.rows.iter().map(|r| r.columns()[j]).collect();
        w.write_plot(name, &xs, &ys, true)?;
    }
    let sup_all = report
        .column_sup
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    let json = AuditReport {
        meta,
        eps: report.eps,
        column_sup: AuditColumnSup {
            metric_defect: report.column_sup[0],
            metric_gradient_defect: report.column_sup[1],
            curvature_defect: report.column_sup[2],
            curvature_gradient_defect: report.column_sup[3],
            antisymmetry_defect: report.column_sup[4],
        },
    };
    w.write_json("report.json", &json)?;
    Ok(format!(
        "audit: {} radii, sup defect={sup_all:.3e}",
        radii.len()
    ))
}

#[derive(Serialize)]
struct ScalarLimit {
    value: f64,
    error: f64,
}

#[derive(Serialize)]
struct VectorLimit {
    value: Vec<f64>,
    error: Vec<f64>,
}

#[derive(Serialize)]
struct AdmReport {
    meta: RunMeta,
    eps: f64,
    mass_flux: ScalarLimit,
    mass_curvature: ScalarLimit,
    hawking: ScalarLimit,
    momentum: VectorLimit,
    momentum_limit_factor: f64,
    momentum_limit_max_rel_deviation: f64,
    smallness_c_bars: [f64; 5],
}

fn scalar_limit(series: &RadiusSeries, eps: f64) -> Result<ScalarLimit, RunError> {
    let e = series.extrapolate(eps)?;
    Ok(ScalarLimit {
        value: e.value[0],
        error: e.error[0],
    })
}

fn run_adm(
    grid: &SphereGrid,
    data: &dyn InitialData,
    radii: &[f64],
    eps_override: Option<f64>,
    meta: RunMeta,
    w: &mut ArtifactWriter,
) -> Result<String, RunError> {
    let eps = eps_override.unwrap_or_else(|| data.metadata().eps);
    let flux = adm_mass_flux(grid, data, radii)?;
    let curv = adm_mass_curvature(grid, data, radii)?;
    let hawk = hawking_limit(grid, data, radii)?;
    let mom = adm_linear_momentum(grid, data, radii)?;
    let ml = momentum_limit_check(grid, data, radii)?;
    let small = smallness_integrals(grid, data, radii)?;
    let csv = adm_csv(&[
        ("adm_mass_flux", &flux),
        ("adm_mass_curvature", &curv),
        ("hawking_mass", &hawk),
        ("adm_momentum", &mom),
        ("momentum_limit", &ml.integral),
        ("momentum_limit_scaled", &ml.scaled),
        ("smallness_rotation", &small.rotation),
        ("smallness_trace", &small.trace),
        ("smallness_mean_moment2", &small.mean_moment2),
        ("smallness_mean_moment1", &small.mean_moment1),
        ("smallness_trace_moment1", &small.trace_moment1),
    ]);
    w.write_text("adm.csv", &csv)?;
    let scalars = |s: &RadiusSeries| -> Vec<f64> { s.values.iter().map(|r| r[0]).collect() };
    w.write_plot("hawking", radii, &scalars(&hawk), false)?;
    w.write_plot("mass_flux", radii, &scalars(&flux), false)?;
    w.write_plot("mass_curvature", radii, &scalars(&curv), false)?;
    let mom_limit = mom.extrapolate(eps)?;
    let report = AdmReport {
        meta,
        eps,
        mass_flux: scalar_limit(&flux, eps)?,
        mass_curvature: scalar_limit(&curv, eps)?,
        hawking: scalar_limit(&hawk, eps)?,
        momentum: VectorLimit {
            value: mom_limit.value,
            error: mom_limit.error,
        },
        momentum_limit_factor: ml.convention_factor,
        momentum_limit_max_rel_deviation: ml.max_rel_deviation,
        smallness_c_bars: small.c_bars,
    };
    let flux_limit = report.mass_flux.value;
    let curv_limit = report.mass_curvature.value;
    w.write_json("report.json", &report)?;
    Ok(format!(
        "adm: {} radii, mass(flux)={flux_limit:.6} mass(curvature)={curv_limit:.6}",
        radii.len()
    ))
}

#[derive(Serialize)]
struct EvolveRow {
    sigma: f64,
    w1_inf: f64,
    translational_norm: f64,
    orthogonal_norm: f64,
    lapse_min: f64,
    lapse_max: f64,
}

#[derive(Serialize)]
struct EvolveReport {
    meta: RunMeta,
    weight: f64,
    lapse: &'static str,
    w1_inf_decreasing: bool,
    rows: Vec<EvolveRow>,
}

#[allow(clippy::too_many_arguments)]
fn run_evolve(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sigmas: &[f64],
    weight: f64,
    continuation: bool,
    lapse: LapseModel,
    cfg: &SolveConfig,
    meta: RunMeta,
    w: &mut ArtifactWriter,
    trace: &mut ContinuationTrace,
) -> Result<String, RunError> {
    let static_lapse;
    let (td, lapse_name): (&dyn TemporalData, &'static str) = match lapse {
        LapseModel::Unit => (&UnitLapse, "unit"),
        LapseModel::StaticSchwarzschild => {
            static_lapse = StaticSchwarzschildLapse {
                m: data.metadata().mass_param,
            };
            (&static_lapse, "static-schwarzschild")
        }
    };
    let mut rows = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let outcome = solve_leaf(grid, data, sigma, weight, continuation, None, cfg, trace)?;
        let u = time_lapse(grid, &outcome.geometry, td, weight)?;
        rows.push(EvolveRow {
            sigma,
            w1_inf: u.w1_inf,
            translational_norm: u.norm_translational,
            orthogonal_norm: u.norm_orthogonal,
            lapse_min: u.min,
            lapse_max: u.max,
        });
    }
    let mut csv =
        String::from("sigma,w1_inf,translational_norm,orthogonal_norm,lapse_min,lapse_max\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_g17(r.sigma),
            format_g17(r.w1_inf),
            format_g17(r.translational_norm),
            format_g17(r.orthogonal_norm),
            format_g17(r.lapse_min),
            format_g17(r.lapse_max),
        ));
    }
    w.write_text("evolve.csv", &csv)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.sigma).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.w1_inf).collect();
    w.write_plot("time_lapse_w1inf", &xs, &ys, true)?;
    let decreasing = rows.windows(2).all(|p| p[1].w1_inf <= p[0].w1_inf);
    let sup = ys.iter().fold(0.0_f64, |a, v| a.max(*v));
    let report = EvolveReport {
        meta,
        weight,
        lapse: lapse_name,
        w1_inf_decreasing: decreasing,
        rows,
    };
    w.write_json("report.json", &report)?;
    Ok(format!(
        "evolve: {} leaves, sup ‖u‖_W1inf={sup:.3e}, decreasing={decreasing}",
        sigmas.len()
    ))
}

#[derive(Serialize)]
struct RejectedGuess {
    index: usize,
    reason: String,
}

#[derive(Serialize)]
struct UniqueReport {
    meta: RunMeta,
    sigma: f64,
    sign: f64,
    admissible: Vec<usize>,
    inadmissible: Vec<RejectedGuess>,
    pairwise_sup: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_unique(
    grid: &SphereGrid,
    data: &dyn InitialData,
    sigma: f64,
    sign: f64,
    guesses: &[GuessConfig],
    cfg: &SolveConfig,
    meta: RunMeta,
    w: &mut ArtifactWriter,
) -> Result<String, RunError> {
    let starts: Vec<RadialSurface> = guesses
        .iter()
        .map(|g| RadialSurface::round(grid, g.center, g.radius))
        .collect();
    let probe = cefoliator_core::solver::uniqueness_probe(grid, data, sign, sigma, &starts, cfg)?;
    for (i, surface) in probe.surfaces.iter().enumerate() {
        let file = SurfaceFile {
            lmax: grid.lmax(),
            sigma,
            b: sign,
            center: surface.center,
            rho: surface.rho.iter().copied().collect(),
        };
        w.write_surface(&format!("candidate_{:03}.cesurf", probe.admissible[i]), &file)?;
    }
    let report = UniqueReport {
        meta,
        sigma,
        sign,
        admissible: probe.admissible.clone(),
        inadmissible: probe
            .inadmissible
            .iter()
            .map(|(index, reason)| RejectedGuess {
                index: *index,
                reason: reason.clone(),
            })
            .collect(),
        pairwise_sup: probe.pairwise_sup,
    };
    w.write_json("report.json", &report)?;
    Ok(format!(
        "unique: {} admissible / {} guesses, pairwise sup={:.3e}",
        probe.admissible.len(),
        guesses.len(),
        probe.pairwise_sup
    ))
}
