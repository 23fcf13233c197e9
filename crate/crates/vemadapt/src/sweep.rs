//! Batch execution of runs with resumable on-disk reports.
//!
//! Output layout under the chosen directory:
//!
//! ```text
//! runs/<run key>.csv          one report per run
//! runs/<run key>/step<k>.mesh meshes (emit mesh)
//! runs/<run key>/step<k>-<indicator>.svg  indicator heat maps (emit svg)
//! plots/<group key>-*.svg     convergence plots (emit svg)
//! pre.csv                     relative efforts of every adaptive run
//! summary.csv                 procedures ranked by average relative effort
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use anyhow::{Context, Result};
use vemadapt_core::adapt::{
    overkill_reference, run_adaptive_observed, uniform_run_elements, Procedure, StepView, OVERKILL_FACTOR,
};
use vemadapt_core::metrics::{effort_values, EffortMetric, MeshReference, ReferenceSolution};
use vemadapt_core::problems::{problem, Problem, ProblemId};

use crate::config::{Emit, Group, RunSpec};
use crate::report::{read_report, write_pre_table, write_report, write_summary, PreRow, RunReport};
use crate::svg::{convergence_plot, heat_map, Series};
use crate::{meshio, StdClock};

/// Reference field used for error measurement.
#[derive(Clone)]
pub enum Reference {
    Exact(vemadapt_core::metrics::AnalyticSolution),
    Overkill(Arc<MeshReference>),
}

impl Reference {
    pub fn as_dyn(&self) -> &(dyn ReferenceSolution + Sync) {
        match self {
            Reference::Exact(a) => a,
            Reference::Overkill(m) => m.as_ref(),
        }
    }
}

/// Builds and caches reference solutions per (problem, nu).
#[derive(Default)]
pub struct ReferenceCache {
    entries: HashMap<(ProblemId, u64), (usize, Arc<MeshReference>)>,
}

impl ReferenceCache {
    /// Reference fine enough for `spec`'s uniform run.
    pub fn get(&mut self, spec: &RunSpec) -> Result<Reference> {
        let p = problem(spec.problem, spec.nu)?;
        if let Some(exact) = &p.exact {
            return Ok(Reference::Exact(exact.clone()));
        }
        let finest = uniform_run_elements(&p, &spec.reference().adapt_config())?;
        let needed = OVERKILL_FACTOR * finest;
        let key = (spec.problem, spec.nu.to_bits());
        if let Some((have, r)) = self.entries.get(&key) {
            if *have >= needed {
                return Ok(Reference::Overkill(r.clone()));
            }
        }
        eprintln!("building reference solution for {} nu={} ({needed}+ elements)", p.name, spec.nu);
        let r = Arc::new(overkill_reference(&p, needed)?);
        self.entries.insert(key, (needed, r.clone()));
        Ok(Reference::Overkill(r))
    }
}

/// Result of one run plus the data needed for heat maps and mesh files.
struct Captured {
    steps: Vec<(usize, vemadapt_core::mesh::Mesh, Vec<vemadapt_core::indicators::IndicatorField>)>,
}

/// Runs one configuration. `target` stops the run at that H1 error.
pub fn execute_run(
    spec: &RunSpec,
    p: &Problem,
    reference: &dyn ReferenceSolution,
    target: Option<f64>,
    emit: Emit,
    dir: Option<&Path>,
) -> Result<RunReport> {
    let mut cfg = spec.adapt_config();
    cfg.target_error = target;
    let clock = StdClock::new();
    let mut captured = Captured { steps: Vec::new() };
    let keep = emit.svg || emit.mesh;
    let out = run_adaptive_observed(p, &cfg, reference, &clock, &mut |view: StepView<'_>| {
        if keep {
            captured.steps.push((view.record.step, view.mesh.clone(), view.indicators.to_vec()));
        }
    })
    .with_context(|| format!("run {}", spec.key()))?;
    let report = RunReport { spec: *spec, records: out.records };
    if let Some(dir) = dir {
        write_run_files(dir, &report, &captured, emit)?;
    }
    Ok(report)
}

fn write_run_files(dir: &Path, report: &RunReport, captured: &Captured, emit: Emit) -> Result<()> {
    let runs = dir.join("runs");
    fs::create_dir_all(&runs)?;
    let key = report.spec.key();
    if emit.svg || emit.mesh {
        let sub = runs.join(&key);
        fs::create_dir_all(&sub)?;
        for (step, mesh, fields) in &captured.steps {
            if emit.mesh {
                meshio::save_mesh(mesh, &sub.join(format!("step{step}.mesh")))?;
            }
            if emit.svg {
                for f in fields {
                    let title = format!("{key} step {step}: {} indicator", f.kind.name());
                    fs::write(sub.join(format!("step{step}-{}.svg", f.kind.name())), heat_map(mesh, &f.values, &title))?;
                }
            }
        }
    }
    if emit.csv {
        let path = runs.join(format!("{key}.csv"));
        let tmp = runs.join(format!("{key}.csv.tmp"));
        fs::write(&tmp, write_report(report))?;
        fs::rename(&tmp, &path)?;
    }
    Ok(())
}

fn report_path(dir: &Path, spec: &RunSpec) -> PathBuf {
    dir.join("runs").join(format!("{}.csv", spec.key()))
}

/// A finished report for exactly this configuration, if one is on disk.
pub fn completed(dir: &Path, spec: &RunSpec) -> Option<RunReport> {
    let text = fs::read_to_string(report_path(dir, spec)).ok()?;
    let r = read_report(&text).ok()?;
    (r.spec == *spec && !r.records.is_empty()).then_some(r)
}

/// Executes `runs`, skipping those already completed in `dir`, then
/// rebuilds the tables and plots of the whole directory.
pub fn execute(runs: &[RunSpec], dir: &Path, emit: Emit) -> Result<Vec<RunReport>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut cache = ReferenceCache::default();
    let mut groups: Vec<Group> = Vec::new();
    for r in runs {
        if !groups.contains(&r.group()) {
            groups.push(r.group());
        }
    }
    let mut reports = Vec::new();
    for g in groups {
        let members: Vec<&RunSpec> = runs.iter().filter(|r| r.group() == g).collect();
        let uniform: Option<RunSpec> = members
            .iter()
            .find(|r| r.procedure == Procedure::Reference)
            .copied()
            .copied()
            .or_else(|| members.iter().any(|r| r.stop_at_reference).then(|| members[0].reference()));
        let p = problem(g.problem, g.nu)?;
        let mut reference: Option<Reference> = None;
        let mut target = None;
        if let Some(u) = uniform {
            let rep = match completed(dir, &u) {
                Some(rep) => rep,
                None => {
                    let rf = cache.get(&u)?;
                    eprintln!("running {}", u.key());
                    let rep = execute_run(&u, &p, rf.as_dyn(), None, emit, Some(dir))?;
                    reference = Some(rf);
                    rep
                }
            };
            target = rep.records.last().map(|r| r.h1);
            reports.push(rep);
        }
        let pending: Vec<RunSpec> = members
            .iter()
            .filter(|r| r.procedure != Procedure::Reference)
            .map(|r| **r)
            .collect();
        let mut todo = Vec::new();
        for spec in pending {
            match completed(dir, &spec) {
                Some(rep) => reports.push(rep),
                None => todo.push(spec),
            }
        }
        if todo.is_empty() {
            continue;
        }
        let rf = match reference {
            Some(r) => r,
            None => cache.get(&todo[0])?,
        };
        let results = run_parallel(&todo, &p, &rf, target, emit, dir)?;
        reports.extend(results);
    }
    rebuild_tables(dir, emit)?;
    Ok(reports)
}

fn run_parallel(
    todo: &[RunSpec],
    p: &Problem,
    rf: &Reference,
    target: Option<f64>,
    emit: Emit,
    dir: &Path,
) -> Result<Vec<RunReport>> {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(todo.len()).max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunReport>>>> = Mutex::new((0..todo.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(spec) = todo.get(i) else { break };
                eprintln!("running {}", spec.key());
                let t = if spec.stop_at_reference { target } else { None };
                let r = execute_run(spec, p, rf.as_dyn(), t, emit, Some(dir));
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.expect("every job ran")).collect()
}

/// Every readable report in `dir/runs`.
pub fn load_reports(dir: &Path) -> Result<Vec<RunReport>> {
    let runs = dir.join("runs");
    let mut paths: Vec<PathBuf> = match fs::read_dir(&runs) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect(),
        Err(_) => return Ok(Vec::new()),
    };
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let text = fs::read_to_string(&path)?;
        out.push(read_report(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?);
    }
    Ok(out)
}

/// Relative-effort rows for every adaptive report that has a uniform report
/// in its group.
pub fn pre_rows(reports: &[RunReport]) -> Vec<PreRow> {
    reports
        .iter()
        .filter(|r| r.spec.procedure != Procedure::Reference)
        .filter_map(|a| {
            reports
                .iter()
                .find(|r| r.spec.procedure == Procedure::Reference && r.spec.group() == a.spec.group())
                .map(|reference| PreRow::compute(a, reference))
        })
        .collect()
}

/// Rewrites `pre.csv`, `summary.csv` and the convergence plots from the
/// reports on disk.
pub fn rebuild_tables(dir: &Path, emit: Emit) -> Result<()> {
    let reports = load_reports(dir)?;
    let rows = pre_rows(&reports);
    if emit.csv {
        fs::write(dir.join("pre.csv"), write_pre_table(&rows))?;
        fs::write(dir.join("summary.csv"), write_summary(&rows))?;
    }
    if emit.svg {
        write_plots(dir, &reports)?;
    }
    Ok(())
}

fn label(spec: &RunSpec) -> String {
    match spec.procedure {
        Procedure::Reference => "REFERENCE".into(),
        p => format!("{} T={}", p.label(), spec.threshold),
    }
}

fn write_plots(dir: &Path, reports: &[RunReport]) -> Result<()> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots)?;
    let mut groups: Vec<Group> = Vec::new();
    for r in reports {
        if !groups.contains(&r.spec.group()) {
            groups.push(r.spec.group());
        }
    }
    for g in groups {
        let members: Vec<&RunReport> = reports.iter().filter(|r| r.spec.group() == g).collect();
        let series = |x: &dyn Fn(&RunReport) -> Vec<f64>, y: fn(&vemadapt_core::adapt::StepRecord) -> f64| {
            members
                .iter()
                .map(|r| Series {
                    label: label(&r.spec),
                    points: x(r).into_iter().zip(r.records.iter().map(y)).collect(),
                })
                .collect::<Vec<_>>()
        };
        let nodes = |r: &RunReport| effort_values(&r.records, EffortMetric::Nodes);
        let runtime = |r: &RunReport| effort_values(&r.records, EffortMetric::Runtime);
        let size = |r: &RunReport| effort_values(&r.records, EffortMetric::MeshSize);
        let key = g.key();
        let plots_to_write = [
            ("h1-nodes", "nodes", "H1 error", series(&nodes, |s| s.h1)),
            ("h1-runtime", "cumulative run time excluding remeshing (s)", "H1 error", series(&runtime, |s| s.h1)),
            ("h1-mesh-size", "mean element diameter (m)", "H1 error", series(&size, |s| s.h1)),
            ("pse-nodes", "nodes", "PSE", series(&nodes, |s| s.pse)),
        ];
        for (name, xl, yl, s) in plots_to_write {
            fs::write(plots.join(format!("{key}-{name}.svg")), convergence_plot(&key, xl, yl, &s))?;
        }
    }
    Ok(())
}
