//! The adaptive loop: solve, measure, indicate, select, refine.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::indicators::{self, combine_plans, select_elements, IndicatorField, IndicatorKind};
use crate::mesh::{Mesh, MeshMode, RefinementPlan};
use crate::metrics::{error_norms, pse, MeshReference, ReferenceSolution};
use crate::problems::Problem;
use crate::rng::mix;
use crate::vem::{assemble_and_solve, Solution};

/// Default cap on the node count of a solved mesh.
pub const DEFAULT_NODE_BUDGET: usize = 30_000;

/// How elements are chosen for refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Procedure {
    Single(IndicatorKind),
    /// Two indicators merged; the first one leads the alternation.
    Combined(IndicatorKind, IndicatorKind),
    /// Every element refined at every step, no indicators.
    Reference,
}

impl Procedure {
    pub fn parse(s: &str) -> Result<Self> {
        let kind = |k: &str| match k {
            "db" => Ok(IndicatorKind::Db),
            "sj" => Ok(IndicatorKind::Sj),
            "z2" => Ok(IndicatorKind::Z2),
            _ => Err(Error::InvalidInput(format!("unknown indicator '{k}'"))),
        };
        let lower = s.trim().to_ascii_lowercase();
        if lower == "reference" || lower == "ref" {
            return Ok(Procedure::Reference);
        }
        match lower.split_once('+') {
            Some((a, b)) => Ok(Procedure::Combined(kind(a.trim())?, kind(b.trim())?)),
            None => Ok(Procedure::Single(kind(&lower)?)),
        }
    }

    pub fn label(&self) -> alloc::string::String {
        match self {
            Procedure::Single(k) => k.name().into(),
            Procedure::Combined(a, b) => format!("{}+{}", a.name(), b.name()),
            Procedure::Reference => "REFERENCE".into(),
        }
    }
}

/// Monotonic time source in seconds.
pub trait Clock {
    fn now(&self) -> f64;
}

/// A clock that never advances; records carry zero times.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    pub procedure: Procedure,
    /// Threshold percentage in (0, 100].
    pub threshold: f64,
    pub max_steps: usize,
    pub node_budget: usize,
    pub mode: MeshMode,
    pub rng_seed: u64,
    /// Stop once the H1 error is at or below this value.
    pub target_error: Option<f64>,
}

impl AdaptConfig {
    pub fn new(procedure: Procedure, threshold: f64, mode: MeshMode) -> Self {
        AdaptConfig {
            procedure,
            threshold,
            max_steps: 10,
            node_budget: DEFAULT_NODE_BUDGET,
            mode,
            rng_seed: 0,
            target_error: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 100.0) {
            return Err(Error::InvalidInput(format!("threshold {} outside (0, 100]", self.threshold)));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Measurements of one refinement step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepRecord {
    /// 1-based; step 1 is the initial mesh.
    pub step: usize,
    pub nodes: usize,
    pub elements: usize,
    pub mean_diameter: f64,
    /// Solve time of this step plus the indicator and selection time spent
    /// on the previous mesh to get here (s).
    pub solve_time: f64,
    /// Time spent refining the previous mesh into this one (s).
    pub remesh_time: f64,
    pub h1: f64,
    pub l2_displacement: f64,
    pub l2_strain: f64,
    pub pse: f64,
}

/// What an observer sees after each solve.
pub struct StepView<'a> {
    pub record: &'a StepRecord,
    pub mesh: &'a Mesh,
    pub solution: &'a Solution,
    /// Indicator fields computed on this mesh (empty for the last step and
    /// for the reference procedure).
    pub indicators: &'a [IndicatorField],
    pub plan: Option<&'a RefinementPlan>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<StepRecord>,
    pub mesh: Mesh,
    pub solution: Solution,
}

/// Indicator fields and refinement plan for one mesh.
pub fn mark(
    procedure: Procedure,
    threshold: f64,
    mesh: &Mesh,
    sol: &Solution,
) -> Result<(Vec<IndicatorField>, RefinementPlan)> {
    match procedure {
        Procedure::Reference => Ok((Vec::new(), RefinementPlan::all(mesh.n_elements()))),
        Procedure::Single(k) => {
            let f = indicators::compute(k, mesh, sol);
            let plan = select_elements(&f, threshold)?;
            Ok((alloc::vec![f], plan))
        }
        Procedure::Combined(a, b) => {
            let fa = indicators::compute(a, mesh, sol);
            let fb = indicators::compute(b, mesh, sol);
            let pa = select_elements(&fa, threshold)?;
            let pb = select_elements(&fb, threshold)?;
            let plan = combine_plans((&fa, &pa), (&fb, &pb));
            Ok((alloc::vec![fa, fb], plan))
        }
    }
}

pub fn run_adaptive(
    problem: &Problem,
    cfg: &AdaptConfig,
    reference: &dyn ReferenceSolution,
    clock: &dyn Clock,
) -> Result<RunOutput> {
    run_adaptive_observed(problem, cfg, reference, clock, &mut |_| {})
}

/// [`run_adaptive`] with a callback invoked after every step.
pub fn run_adaptive_observed(
    problem: &Problem,
    cfg: &AdaptConfig,
    reference: &dyn ReferenceSolution,
    clock: &dyn Clock,
    observer: &mut dyn FnMut(StepView<'_>),
) -> Result<RunOutput> {
    cfg.validate()?;
    let mut mesh = problem.initial_mesh(cfg.mode, cfg.rng_seed).map_err(|e| e.at_step(1))?;
    let mut records = Vec::new();
    let mut carried = 0.0;
    let mut remesh_time = 0.0;
    for step in 1..=cfg.max_steps {
        let t0 = clock.now();
        let sol = assemble_and_solve(&mesh, &problem.material, &problem.loads).map_err(|e| e.at_step(step))?;
        let solve_time = clock.now() - t0 + carried;
        let norms = error_norms(&mesh, &sol, reference).map_err(|e| e.at_step(step))?;
        let share = pse(&mesh, &problem.material, &sol).map_err(|e| e.at_step(step))?;
        let record = StepRecord {
            step,
            nodes: mesh.n_vertices(),
            elements: mesh.n_elements(),
            mean_diameter: mesh.mean_diameter(),
            solve_time,
            remesh_time,
            h1: norms.h1,
            l2_displacement: norms.l2_displacement,
            l2_strain: norms.l2_strain,
            pse: share,
        };
        records.push(record);
        let done = step == cfg.max_steps || cfg.target_error.is_some_and(|t| norms.h1 <= t);
        if done {
            observer(StepView { record: &record, mesh: &mesh, solution: &sol, indicators: &[], plan: None });
            return Ok(RunOutput { records, mesh, solution: sol });
        }
        let t1 = clock.now();
        let (fields, plan) = match mark(cfg.procedure, cfg.threshold, &mesh, &sol) {
            Ok(x) => x,
            Err(Error::NothingToRefine) => {
                observer(StepView { record: &record, mesh: &mesh, solution: &sol, indicators: &[], plan: None });
                return Ok(RunOutput { records, mesh, solution: sol });
            }
            Err(e) => return Err(e.at_step(step)),
        };
        carried = clock.now() - t1;
        observer(StepView { record: &record, mesh: &mesh, solution: &sol, indicators: &fields, plan: Some(&plan) });
        let t2 = clock.now();
        let next = mesh
            .refine_elements(&plan, cfg.mode, mix(cfg.rng_seed, step as u64))
            .map_err(|e| e.at_step(step))?;
        remesh_time = clock.now() - t2;
        if next.n_vertices() > cfg.node_budget {
            return Ok(RunOutput { records, mesh, solution: sol });
        }
        mesh = next;
    }
    unreachable!("the loop returns at max_steps")
}

/// Element-count ratio between the overkill mesh and the finest mesh it is
/// compared against.
pub const OVERKILL_FACTOR: usize = 16;

/// Element count of the last mesh a uniform run under `cfg` would solve,
/// found by refining without solving.
pub fn uniform_run_elements(problem: &Problem, cfg: &AdaptConfig) -> Result<usize> {
    let mut mesh = problem.initial_mesh(cfg.mode, cfg.rng_seed)?;
    for step in 1..cfg.max_steps {
        let next = mesh.reference_refine(cfg.mode, mix(cfg.rng_seed, step as u64))?;
        if next.n_vertices() > cfg.node_budget {
            break;
        }
        mesh = next;
    }
    Ok(mesh.n_elements())
}

/// Fine reference solution: the structured initial mesh refined uniformly
/// until it has at least `min_elements` elements.
pub fn overkill_reference(problem: &Problem, min_elements: usize) -> Result<MeshReference> {
    let mut mesh = problem.initial_mesh(MeshMode::Structured, 0)?;
    while mesh.n_elements() < min_elements {
        mesh = mesh.reference_refine(MeshMode::Structured, 0)?;
    }
    let sol = assemble_and_solve(&mesh, &problem.material, &problem.loads)?;
    Ok(MeshReference::new(mesh, sol))
}
