use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;
use tn_core::curvature::{invariants_report, ReportOptions};
use tn_core::geodesics::{energy_drift, integrate_direct, integrate_split, path_gap, sample_initial_conditions};
use tn_core::lagrangian::{classify, flat_chart, gauss_flatness_check, oracle_gap_at, ClassifyReport, PotentialGraph};
use tn_core::line_space::{kahler_isometry_residual, linespace_report, sample_line_points, LinePoint};
use tn_core::manifold::{make_builtin, Builtin, RiemannianChart};
use tn_core::source_fields::{intensity_custom, intensity_hminimal, intensity_minimal, source_graph_report};
use tn_core::tangent_bundle::sample_bundle_points;
use tn_core::verify::{run_criterion, Bound, VerifyOptions, CRITERIA};

use crate::args::{
    Command, CurvatureArgs, Expectation, GeodesicArgs, LagrangianArgs, LinespaceArgs, SourceArgs, SourceKind,
    VerifyArgs,
};
use crate::report::{Collector, Report, Residual};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] tn_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_geometric() => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Points used for the closed-form against oracle comparison.
const ORACLE_SAMPLES: usize = 8;

pub fn load_manifold(spec: &str) -> Result<RiemannianChart> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: spec.to_string(),
            source,
        })?;
        return Ok(RiemannianChart::from_json(&text)?);
    }
    Ok(make_builtin(Builtin::parse(spec)?)?)
}

pub fn run(command: &Command) -> Result<Report> {
    let config = serde_json::to_value(command).expect("config serializes");
    let mut report = Report::new(command.name(), config);
    match command {
        Command::Curvature(a) => curvature(a, &mut report)?,
        Command::Geodesic(a) => geodesic(a, &mut report)?,
        Command::Lagrangian(a) => lagrangian(a, &mut report)?,
        Command::Source(a) => source(a, &mut report)?,
        Command::Linespace(a) => linespace(a, &mut report)?,
        Command::VerifyAll(a) => verify_all(a, &mut report),
    }
    Ok(report)
}

fn max_by<T>(items: &[T], f: impl Fn(&T) -> f64) -> f64 {
    items.iter().map(f).fold(0.0, f64::max)
}

fn curvature(a: &CurvatureArgs, report: &mut Report) -> Result<()> {
    let chart = load_manifold(&a.manifold)?;
    let pts = sample_bundle_points(&chart, a.common.samples as usize, a.common.seed);
    let opts = ReportOptions {
        oracle: true,
        covariant: a.covariant,
    };
    let reps = pts
        .par_iter()
        .map(|p| invariants_report(&chart, p, opts))
        .collect::<tn_core::Result<Vec<_>>>()?;
    let mut c = Collector::new(&a.common.tolerances);
    c.at_most("scalar_g", max_by(&reps, |r| r.scalar_g.abs()), 1e-6);
    c.at_most("ricci_structure", max_by(&reps, |r| r.ricci_structure_residual), 1e-6);
    c.at_most("oracle_gap", max_by(&reps, |r| r.oracle_gap), 1e-4);
    // These describe the base rather than test the code.
    c.info("weyl", max_by(&reps, |r| r.weyl_max), 1e-5, false);
    if a.covariant {
        c.info(
            "covariant_riemann",
            max_by(&reps, |r| r.locally_symmetric_residual),
            1e-4,
            false,
        );
    }
    report.residuals = c.residuals;
    report.notes.push(format!("{} points on {}", reps.len(), chart.name()));
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn geodesic(a: &GeodesicArgs, report: &mut Report) -> Result<()> {
    if !(a.t_end > 0.0 && a.t_end.is_finite()) {
        return Err(CliError::Usage(format!("--t-end must be positive, got {}", a.t_end)));
    }
    let chart = load_manifold(&a.manifold)?;
    let ics = sample_initial_conditions(&chart, a.common.samples as usize, a.common.seed, a.t_end);
    if ics.is_empty() {
        return Err(CliError::Usage(
            "no initial condition stays in the chart for this --t-end".into(),
        ));
    }
    let steps = a.steps as usize;
    let runs = ics
        .par_iter()
        .map(|(p, v)| {
            let split = integrate_split(&chart, p, v, a.t_end, steps)?;
            let direct = integrate_direct(&chart, p, v, a.t_end, steps)?;
            split.complete()?;
            direct.complete()?;
            let drift = energy_drift(&chart, &split)?;
            Ok((path_gap(&split, &direct), drift, split))
        })
        .collect::<tn_core::Result<Vec<_>>>()?;
    let mut c = Collector::new(&a.common.tolerances);
    c.at_most("split_vs_direct", max_by(&runs, |r| r.0), 1e-6);
    c.info("energy_drift", max_by(&runs, |r| r.1), 1e-8, false);
    report.residuals = c.residuals;
    if let Some(dir) = &a.paths_dir {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for (k, (_, _, path)) in runs.iter().enumerate() {
            let file = dir.join(format!("path_{k:03}.csv"));
            write_file(&file, &path.to_csv())?;
            report.artifacts.push(file.display().to_string());
        }
    }
    report
        .notes
        .push(format!("{} trajectories on {}", runs.len(), chart.name()));
    Ok(())
}

fn classification(c: &mut Collector, cl: &ClassifyReport, expect: &[Expectation], flat: Option<f64>) {
    let gate = |e| expect.contains(&e);
    c.info(
        "minimal_residual",
        cl.minimal_residual_stat,
        1e-6,
        gate(Expectation::Minimal),
    );
    c.info(
        "hminimal_residual",
        cl.hminimal_residual_stat,
        1e-4,
        gate(Expectation::Hminimal),
    );
    c.info(
        "totally_geodesic_residual",
        cl.totally_geodesic_residual_stat,
        1e-10,
        gate(Expectation::TotallyGeodesic),
    );
    if let Some(f) = flat {
        c.info("induced_curvature", f, 1e-5, gate(Expectation::Flat));
    }
}

fn graph_checks(graph: &PotentialGraph, samples: usize, seed: u64, c: &mut Collector) -> Result<ClassifyReport> {
    let cl = classify(graph, samples, seed)?;
    let chart = flat_chart(graph)?;
    let pts = graph.region().sample(samples.min(ORACLE_SAMPLES), seed);
    let gaps = pts
        .par_iter()
        .map(|x| oracle_gap_at(graph, &chart, x))
        .collect::<tn_core::Result<Vec<_>>>()?;
    c.at_most("oracle_gap", max_by(&gaps, |g| *g), 1e-6);
    c.at_most("gradient_identity", cl.gradient_identity_max, 1e-6);
    Ok(cl)
}

fn lagrangian(a: &LagrangianArgs, report: &mut Report) -> Result<()> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let graph = PotentialGraph::from_expr(&a.u, vec![a.domain; a.n])?;
    let (samples, seed) = (a.common.samples as usize, a.common.seed);
    let mut c = Collector::new(&a.common.tolerances);
    let cl = graph_checks(&graph, samples, seed, &mut c)?;
    let flat = gauss_flatness_check(&graph, samples, seed)?;
    classification(&mut c, &cl, &a.expect, Some(flat));
    report.residuals = c.residuals;
    report
        .notes
        .push(format!("mean det Hess u over the samples: {:e}", cl.fitted_c0));
    Ok(())
}

fn source(a: &SourceArgs, report: &mut Report) -> Result<()> {
    let mut profile = match (&a.intensity, a.kind) {
        (Some(h), _) => intensity_custom(a.n, h)?,
        (None, Some(SourceKind::Minimal)) => intensity_minimal(a.n, a.c0, a.c1)?,
        (None, Some(SourceKind::Hminimal)) => intensity_hminimal(a.n, a.c0, a.c1, a.c2)?,
        (None, None) => return Err(CliError::Usage("give --kind or --H".into())),
    };
    if let Some((lo, hi)) = a.interval {
        profile = profile.with_interval(lo, hi)?;
    }
    let (samples, seed) = (a.common.samples as usize, a.common.seed);
    let sr = source_graph_report(&profile, samples, seed)?;
    let mut c = Collector::new(&a.common.tolerances);
    c.at_most("det_formula", sr.det_formula_residual, 1e-8);
    c.at_most("inverse_metric", sr.inverse_metric_residual, 1e-8);
    c.at_most("eigenvalue_det", sr.eigenvalue_residual, 1e-10);
    let graph = profile.graph();
    graph_checks(&graph, samples, seed, &mut c)?;
    classification(&mut c, &sr.classify, &a.expect, None);
    report.residuals = c.residuals;
    report
        .notes
        .push(format!("mean det Hess u over the samples: {:e}", sr.classify.fitted_c0));
    Ok(())
}

fn linespace(a: &LinespaceArgs, report: &mut Report) -> Result<()> {
    let pts = match (a.p, a.v) {
        (Some(p), Some(v)) => vec![LinePoint::new(p, v)?],
        _ => {
            let n = a.common.samples as usize;
            sample_line_points(n, (n / 8).max(1).min(n), a.common.seed)
        }
    };
    let reps = pts
        .par_iter()
        .map(linespace_report)
        .collect::<tn_core::Result<Vec<_>>>()?;
    let mut c = Collector::new(&a.common.tolerances);
    c.at_most("isometry", max_by(&reps, |r| r.isometry_residual), 1e-10);
    c.at_most("frame_norms", max_by(&reps, |r| r.frame.norm_residual), 1e-10);
    c.at_most("frame_vs_oracle", max_by(&reps, |r| r.frame_vs_oracle), 1e-6);
    c.at_most("kahler_isometry", max_by(&pts, kahler_isometry_residual), 1e-10);
    c.at_most("mean_curvature", max_by(&reps, |r| r.h_max), 1e-6);
    report.residuals = c.residuals;
    if let [one] = reps.as_slice() {
        report.notes.push(format!("mean curvature vector {:?}", one.h));
    }
    Ok(())
}

fn verify_all(a: &VerifyArgs, report: &mut Report) {
    let opts = VerifyOptions {
        samples: a.common.samples as usize,
        seed: a.common.seed,
        tolerances: a.common.tolerances.clone(),
    };
    let ids: Vec<u8> = if a.criteria.is_empty() {
        CRITERIA.iter().map(|(id, _)| *id).collect()
    } else {
        a.criteria.clone()
    };
    for id in ids {
        let Some(result) = run_criterion(id, &opts) else {
            continue;
        };
        eprint!("{result}");
        for check in &result.checks {
            report.residuals.push(Residual {
                name: format!("c{:02}/{}", id, check.name),
                value: check.value,
                tolerance: check.tolerance,
                bound: match check.bound {
                    Bound::AtMost => "at_most",
                    Bound::AtLeast => "at_least",
                },
                pass: check.pass,
                informational: false,
                error: check.error.clone(),
            });
        }
        report
            .notes
            .extend(result.notes.iter().map(|n| format!("c{id:02}: {n}")));
    }
}

pub fn render(report: &Report, format: crate::args::Format) -> String {
    match format {
        crate::args::Format::Json => report.to_json(),
        crate::args::Format::Csv => report.to_csv(),
    }
}

pub fn emit(report: &Report, command: &Command) -> Result<()> {
    let common = command.common();
    let text = render(report, common.format);
    match &common.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
