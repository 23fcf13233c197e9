//! CSV run reports and relative-effort tables.
//!
//! A run report starts with the schema line and the run configuration as
//! `#`-prefixed `key = value` lines, followed by one CSV row per step:
//!
//! ```text
//! # vemadapt-report 1
//! # problem = A1
//! # indicator = DB
//! # ...
//! step,nodes,elements,mean_diameter,solve_time,remesh_time,h1,l2_displacement,l2_strain,pse
//! 1,88,60,0.17...,0.0012,0,6.12...,0.80...,6.07...,0.10...
//! ```
//!
//! Times are in seconds; `solve_time` includes the indicator and selection
//! time that produced the step's mesh. `pse` is a fraction in [0, 1].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use vemadapt_core::adapt::{Procedure, StepRecord};
use vemadapt_core::metrics::{pre, pre_of, pre_star, EffortMetric};

use crate::config::{mode_name, Group, RunSpec};
use crate::meshio::FormatError;

pub const REPORT_HEADER: &str = "# vemadapt-report 1";
pub const PRE_HEADER: &str = "# vemadapt-pre 1";

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub spec: RunSpec,
    pub records: Vec<StepRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Row {
    step: usize,
    nodes: usize,
    elements: usize,
    mean_diameter: f64,
    solve_time: f64,
    remesh_time: f64,
    h1: f64,
    l2_displacement: f64,
    l2_strain: f64,
    pse: f64,
}

impl From<&StepRecord> for Row {
    fn from(r: &StepRecord) -> Row {
        Row {
            step: r.step,
            nodes: r.nodes,
            elements: r.elements,
            mean_diameter: r.mean_diameter,
            solve_time: r.solve_time,
            remesh_time: r.remesh_time,
            h1: r.h1,
            l2_displacement: r.l2_displacement,
            l2_strain: r.l2_strain,
            pse: r.pse,
        }
    }
}

impl From<Row> for StepRecord {
    fn from(r: Row) -> StepRecord {
        StepRecord {
            step: r.step,
            nodes: r.nodes,
            elements: r.elements,
            mean_diameter: r.mean_diameter,
            solve_time: r.solve_time,
            remesh_time: r.remesh_time,
            h1: r.h1,
            l2_displacement: r.l2_displacement,
            l2_strain: r.l2_strain,
            pse: r.pse,
        }
    }
}

fn csv_error(e: csv::Error, offset: usize) -> FormatError {
    let line = e.position().map(|p| p.line() as usize + offset).unwrap_or(offset);
    FormatError { line, message: e.to_string() }
}

pub fn write_report(report: &RunReport) -> String {
    let mut s = String::new();
    writeln!(s, "{REPORT_HEADER}").unwrap();
    for l in report.spec.to_lines() {
        writeln!(s, "# {l}").unwrap();
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    if report.records.is_empty() {
        w.write_record([
            "step", "nodes", "elements", "mean_diameter", "solve_time", "remesh_time", "h1",
            "l2_displacement", "l2_strain", "pse",
        ])
        .unwrap();
    }
    for r in &report.records {
        w.serialize(Row::from(r)).unwrap();
    }
    s.push_str(std::str::from_utf8(&w.into_inner().unwrap()).unwrap());
    s
}

pub fn read_report(text: &str) -> Result<RunReport, FormatError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(REPORT_HEADER) {
        return Err(FormatError { line: 1, message: format!("expected '{REPORT_HEADER}'") });
    }
    let mut echo = String::new();
    let mut n_comment = 1;
    for l in text.lines().skip(1) {
        match l.strip_prefix('#') {
            Some(rest) => {
                echo.push_str(rest);
                echo.push('\n');
                n_comment += 1;
            }
            None => break,
        }
    }
    let spec = RunSpec::parse(&echo).map_err(|e| FormatError {
        line: e.line.map(|l| l + 1).unwrap_or(1),
        message: format!("run configuration: {}", e.message),
    })?;
    let body: String = text.lines().skip(n_comment).flat_map(|l| [l, "\n"]).collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let mut records = Vec::new();
    for row in rdr.deserialize::<Row>() {
        records.push(row.map_err(|e| csv_error(e, n_comment))?.into());
    }
    Ok(RunReport { spec, records })
}

/// Relative efforts of one adaptive run against its group's uniform run.
/// `None` where the curves do not cross.
#[derive(Debug, Clone, PartialEq)]
pub struct PreRow {
    pub spec: RunSpec,
    pub nodes: Option<f64>,
    pub runtime: Option<f64>,
    pub runtime_with_remeshing: Option<f64>,
    /// PRE* of the mean element diameter.
    pub mesh_size: Option<f64>,
    /// PRE of the PSE curve against nodes.
    pub pse_nodes: Option<f64>,
}

impl PreRow {
    pub fn compute(adaptive: &RunReport, reference: &RunReport) -> PreRow {
        let a = &adaptive.records;
        let r = &reference.records;
        let positive = |v: Option<f64>| v.filter(|x| x.is_finite() && *x > 0.0);
        PreRow {
            spec: adaptive.spec,
            nodes: positive(pre(a, r, EffortMetric::Nodes).ok()),
            runtime: positive(pre(a, r, EffortMetric::Runtime).ok()),
            runtime_with_remeshing: positive(pre(a, r, EffortMetric::RuntimeWithRemeshing).ok()),
            mesh_size: positive(pre(a, r, EffortMetric::MeshSize).ok()).and_then(|p| pre_star(p).ok()),
            pse_nodes: positive(pre_of(a, r, EffortMetric::Nodes, |s| s.pse).ok()),
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Long-form table of every adaptive run's relative efforts.
pub fn write_pre_table(rows: &[PreRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "problem",
        "mesh",
        "nu",
        "seed",
        "procedure",
        "T",
        "pre_nodes",
        "pre_runtime",
        "pre_runtime_with_remeshing",
        "pre_star_mesh_size",
        "pre_pse_nodes",
    ])
    .unwrap();
    for r in rows {
        w.write_record([
            r.spec.problem.name().to_string(),
            mode_name(r.spec.mode).to_string(),
            r.spec.nu.to_string(),
            r.spec.seed.to_string(),
            r.spec.procedure.label(),
            r.spec.threshold.to_string(),
            cell(r.nodes),
            cell(r.runtime),
            cell(r.runtime_with_remeshing),
            cell(r.mesh_size),
            cell(r.pse_nodes),
        ])
        .unwrap();
    }
    format!("{PRE_HEADER}\n{}", String::from_utf8(w.into_inner().unwrap()).unwrap())
}

/// One row of the summary: a procedure at one threshold, averaged over all
/// groups and over the node and run-time efforts.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub procedure: Procedure,
    pub threshold: f64,
    /// Per group: (PRE nodes, PRE runtime).
    pub cells: Vec<(Option<f64>, Option<f64>)>,
    pub average: Option<f64>,
}

/// Groups (columns) and rows sorted ascending by average PRE; rows without
/// any comparable value go last.
pub fn summarize(rows: &[PreRow]) -> (Vec<Group>, Vec<SummaryRow>) {
    let mut groups: Vec<Group> = Vec::new();
    for r in rows {
        if !groups.contains(&r.spec.group()) {
            groups.push(r.spec.group());
        }
    }
    let mut keys: Vec<(Procedure, f64)> = Vec::new();
    for r in rows {
        let k = (r.spec.procedure, r.spec.threshold);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut out: Vec<SummaryRow> = keys
        .into_iter()
        .map(|(procedure, threshold)| {
            let cells: Vec<(Option<f64>, Option<f64>)> = groups
                .iter()
                .map(|g| {
                    rows.iter()
                        .find(|r| {
                            r.spec.group() == *g && r.spec.procedure == procedure && r.spec.threshold == threshold
                        })
                        .map(|r| (r.nodes, r.runtime))
                        .unwrap_or((None, None))
                })
                .collect();
            let vals: Vec<f64> = cells.iter().flat_map(|&(a, b)| [a, b]).flatten().collect();
            let average = (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
            SummaryRow { procedure, threshold, cells, average }
        })
        .collect();
    out.sort_by(|a, b| match (a.average, b.average) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    (groups, out)
}

pub fn write_summary(rows: &[PreRow]) -> String {
    let (groups, summary) = summarize(rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["rank".to_string(), "procedure".to_string(), "T".to_string()];
    for g in &groups {
        header.push(format!("{}/nodes", g.key()));
        header.push(format!("{}/runtime", g.key()));
    }
    header.push("average".to_string());
    w.write_record(&header).unwrap();
    for (i, s) in summary.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string(), s.procedure.label(), s.threshold.to_string()];
        for &(a, b) in &s.cells {
            rec.push(cell(a));
            rec.push(cell(b));
        }
        rec.push(cell(s.average));
        w.write_record(&rec).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
