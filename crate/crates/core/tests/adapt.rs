use std::sync::Arc;

use vemadapt_core::adapt::{
    mark, run_adaptive, run_adaptive_observed, AdaptConfig, NoClock, Procedure, StepRecord,
};
use vemadapt_core::geometry::Point;
use vemadapt_core::indicators::IndicatorKind;
use vemadapt_core::mesh::{Mesh, MeshMode};
use vemadapt_core::metrics::AnalyticSolution;
use vemadapt_core::problems::{problem, ProblemId, HOLE_SIDE};
use vemadapt_core::vem::assemble_and_solve;

fn zero_reference() -> AnalyticSolution {
    AnalyticSolution { displacement: Arc::new(|_| [0.0; 2]), gradient: Arc::new(|_| [[0.0; 2]; 2]) }
}

fn config(procedure: Procedure, t: f64, mode: MeshMode, steps: usize) -> AdaptConfig {
    AdaptConfig { max_steps: steps, ..AdaptConfig::new(procedure, t, mode) }
}

#[test]
fn reference_procedure_quadruples_structured_grid() {
    let mut p = problem(ProblemId::Manufactured, 0.3).unwrap();
    p.structured_grid = (2, 2);
    let exact = p.exact.clone().unwrap();
    let out = run_adaptive(&p, &config(Procedure::Reference, 100.0, MeshMode::Structured, 3), &exact, &NoClock).unwrap();
    let counts: Vec<usize> = out.records.iter().map(|r| r.elements).collect();
    assert_eq!(counts, vec![4, 16, 64]);
    let nodes: Vec<usize> = out.records.iter().map(|r| r.nodes).collect();
    assert_eq!(nodes, vec![9, 25, 81]);
    assert!(out.records.windows(2).all(|w| w[1].h1 < w[0].h1));
}

#[test]
fn full_threshold_marks_every_element() {
    let p = problem(ProblemId::A1, 0.3).unwrap();
    let mesh = p.initial_mesh(MeshMode::Voronoi, 0).unwrap();
    let sol = assemble_and_solve(&mesh, &p.material, &p.loads).unwrap();
    for proc in ["db", "sj", "z2", "db+sj", "db+z2"] {
        let (fields, plan) = mark(Procedure::parse(proc).unwrap(), 100.0, &mesh, &sol).unwrap();
        assert_eq!(plan.len(), mesh.n_elements(), "{proc}");
        assert!(!fields.is_empty());
    }
}

#[test]
fn adaptive_runs_grow_and_repeat_exactly() {
    let p = problem(ProblemId::B4, 0.3).unwrap();
    for proc in [Procedure::Single(IndicatorKind::Z2), Procedure::Combined(IndicatorKind::Db, IndicatorKind::Sj)] {
        let cfg = AdaptConfig { rng_seed: 5, ..config(proc, 20.0, MeshMode::Voronoi, 4) };
        let a = run_adaptive(&p, &cfg, &zero_reference(), &NoClock).unwrap();
        let b = run_adaptive(&p, &cfg, &zero_reference(), &NoClock).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.mesh, b.mesh);
        assert_eq!(a.records.len(), 4);
        assert!(a.records.windows(2).all(|w| w[1].nodes > w[0].nodes));
        assert!(a.records.iter().enumerate().all(|(k, r)| r.step == k + 1));
    }
}

#[test]
fn reference_steps_halve_the_mesh_size() {
    let p = problem(ProblemId::C5, 0.3).unwrap();
    for mode in [MeshMode::Structured, MeshMode::Voronoi] {
        let out = run_adaptive(&p, &config(Procedure::Reference, 100.0, mode, 3), &zero_reference(), &NoClock).unwrap();
        for w in out.records.windows(2) {
            let ratio = w[0].mean_diameter / w[1].mean_diameter;
            assert!((1.7..=2.3).contains(&ratio), "{mode:?}: {ratio}");
        }
    }
}

#[test]
fn budget_and_target_stop_the_loop() {
    let p = problem(ProblemId::A1, 0.3).unwrap();
    let cfg = AdaptConfig { node_budget: 400, ..config(Procedure::Reference, 100.0, MeshMode::Structured, 10) };
    let out = run_adaptive(&p, &cfg, &zero_reference(), &NoClock).unwrap();
    assert!(out.records.iter().all(|r| r.nodes <= 400));
    assert_eq!(out.records.len(), 2);

    let m = problem(ProblemId::Manufactured, 0.3).unwrap();
    let exact = m.exact.clone().unwrap();
    let full = run_adaptive(&m, &config(Procedure::Reference, 100.0, MeshMode::Structured, 3), &exact, &NoClock).unwrap();
    let target = full.records[1].h1;
    let cfg = AdaptConfig { target_error: Some(target), ..config(Procedure::Reference, 100.0, MeshMode::Structured, 3) };
    let stopped = run_adaptive(&m, &cfg, &exact, &NoClock).unwrap();
    assert_eq!(stopped.records.len(), 2);
}

#[test]
fn observer_sees_every_step() {
    let p = problem(ProblemId::A1, 0.3).unwrap();
    let mut seen: Vec<(StepRecord, usize, bool)> = Vec::new();
    let out = run_adaptive_observed(
        &p,
        &config(Procedure::Combined(IndicatorKind::Db, IndicatorKind::Z2), 25.0, MeshMode::Structured, 3),
        &zero_reference(),
        &NoClock,
        &mut |v| seen.push((*v.record, v.indicators.len(), v.plan.is_some())),
    )
    .unwrap();
    assert_eq!(seen.len(), 3);
    assert_eq!(seen.iter().map(|s| s.0).collect::<Vec<_>>(), out.records);
    assert_eq!((seen[0].1, seen[0].2), (2, true));
    assert_eq!((seen[2].1, seen[2].2), (0, false));
}

#[test]
fn invalid_configurations_are_rejected() {
    let p = problem(ProblemId::A1, 0.3).unwrap();
    for cfg in [config(Procedure::Reference, 0.0, MeshMode::Structured, 2), config(Procedure::Reference, 50.0, MeshMode::Structured, 0)] {
        assert!(run_adaptive(&p, &cfg, &zero_reference(), &NoClock).is_err());
    }
}

fn mean_diameters_near(mesh: &Mesh, corners: &[Point], radius: f64) -> (f64, f64) {
    let (mut near, mut far) = ((0.0, 0usize), (0.0, 0usize));
    for e in 0..mesh.n_elements() {
        let (_, c, d) = mesh.element_geometry(e);
        let bucket = if corners.iter().any(|k| k.dist(c) <= radius) { &mut near } else { &mut far };
        bucket.0 += d;
        bucket.1 += 1;
    }
    (near.0 / near.1 as f64, far.0 / far.1 as f64)
}

#[test]
fn displacement_indicator_concentrates_at_hole_corners() {
    let p = problem(ProblemId::A1, 0.3).unwrap();
    let (a, b) = (0.5 - HOLE_SIDE / 2.0, 0.5 + HOLE_SIDE / 2.0);
    let corners = [Point::new(a, a), Point::new(b, a), Point::new(b, b), Point::new(a, b)];
    for mode in [MeshMode::Structured, MeshMode::Voronoi] {
        let initial = p.initial_mesh(mode, 0).unwrap().mean_diameter();
        let cfg = config(Procedure::Single(IndicatorKind::Db), 20.0, mode, 6);
        let out = run_adaptive(&p, &cfg, &zero_reference(), &NoClock).unwrap();
        assert_eq!(out.records.len(), 6);
        let (near, far) = mean_diameters_near(&out.mesh, &corners, 0.1);
        assert!(near < 0.6 * far, "{mode:?}: near {near}, elsewhere {far}");
        // every element touching a hole corner went through at least two refinements
        for k in &corners {
            let v = out.mesh.vertices().iter().position(|q| q.dist(*k) < 1e-12).unwrap();
            for &e in out.mesh.vertex_elements(v) {
                assert!(out.mesh.element_geometry(e).2 < initial / 3.0, "{mode:?} corner {k:?}");
            }
        }
    }
}
