//! Error norms against a reference solution, stabilization energy share and
//! relative-effort comparisons between refinement runs.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::adapt::StepRecord;
use crate::error::{Error, Result};
use crate::geometry::{boundary_distance, point_in_polygon, BBox, Point};
use crate::mesh::Mesh;
use crate::vem::{element_stiffness, ElementGeometry, Material, Solution};

pub type Gradient = [[f64; 2]; 2];

/// Displacement and displacement gradient of a reference field.
pub trait ReferenceSolution {
    fn evaluate(&self, p: Point) -> Result<([f64; 2], Gradient)>;
}

/// Closed-form reference field.
#[derive(Clone)]
pub struct AnalyticSolution {
    pub displacement: Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>,
    pub gradient: Arc<dyn Fn(Point) -> Gradient + Send + Sync>,
}

impl ReferenceSolution for AnalyticSolution {
    fn evaluate(&self, p: Point) -> Result<([f64; 2], Gradient)> {
        Ok(((self.displacement)(p), (self.gradient)(p)))
    }
}

/// Reference field from a fine mesh solution. Displacements are
/// interpolated inside the containing element with mean value coordinates;
/// the gradient is the area-weighted mean of the projected gradients of all
/// elements containing the point.
#[derive(Debug, Clone)]
pub struct MeshReference {
    mesh: Mesh,
    solution: Solution,
    gradients: Vec<Gradient>,
    areas: Vec<f64>,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl MeshReference {
    pub fn new(mesh: Mesh, solution: Solution) -> Self {
        let n = mesh.n_elements();
        let mut gradients = Vec::with_capacity(n);
        let mut areas = Vec::with_capacity(n);
        let mut boxes = Vec::with_capacity(n);
        for e in 0..n {
            let pts = mesh.element_points(e);
            let g = ElementGeometry::new(&pts).expect("valid mesh element");
            gradients.push(g.gradient(&solution.element_dofs(&mesh, e)));
            areas.push(g.area);
            boxes.push(BBox::of(&pts));
        }
        let bb = BBox::of(mesh.vertices());
        let (w, h) = (bb.max.x - bb.min.x, bb.max.y - bb.min.y);
        let cell = libm::sqrt(w * h / n as f64).max(1e-12);
        let nx = ((w / cell) as usize + 1).min(2048);
        let ny = ((h / cell) as usize + 1).min(2048);
        let cell = (w / nx as f64).max(h / ny as f64).max(1e-12);
        let mut buckets = vec![Vec::new(); nx * ny];
        let idx = |v: f64, lo: f64, n: usize| (libm::floor((v - lo) / cell).max(0.0) as usize).min(n - 1);
        for (e, b) in boxes.iter().enumerate() {
            for j in idx(b.min.y, bb.min.y, ny)..=idx(b.max.y, bb.min.y, ny) {
                for i in idx(b.min.x, bb.min.x, nx)..=idx(b.max.x, bb.min.x, nx) {
                    buckets[j * nx + i].push(e);
                }
            }
        }
        MeshReference { mesh, solution, gradients, areas, origin: bb.min, cell, nx, ny, buckets }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }

    fn candidates(&self, p: Point) -> &[usize] {
        let fx = libm::floor((p.x - self.origin.x) / self.cell);
        let fy = libm::floor((p.y - self.origin.y) / self.cell);
        let i = (fx.max(0.0) as usize).min(self.nx - 1);
        let j = (fy.max(0.0) as usize).min(self.ny - 1);
        &self.buckets[j * self.nx + i]
    }
}

/// Mean value coordinates of `p` with respect to a polygon; exact at
/// vertices and linear along edges.
pub fn mean_value_coordinates(pts: &[Point], p: Point, tol: f64) -> Vec<f64> {
    let n = pts.len();
    let mut w = vec![0.0; n];
    for i in 0..n {
        if pts[i].dist(p) <= tol {
            w[i] = 1.0;
            return w;
        }
    }
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let (d, t) = crate::geometry::point_segment_distance(p, a, b);
        if d <= tol {
            w[i] = 1.0 - t;
            w[(i + 1) % n] = t;
            return w;
        }
    }
    let r: Vec<f64> = pts.iter().map(|v| v.dist(p)).collect();
    // tan(alpha_i / 2) for the angle at p between v_i and v_{i+1}
    let tan_half: Vec<f64> = (0..n)
        .map(|i| {
            let (s, t) = (pts[i] - p, pts[(i + 1) % n] - p);
            let cross = s.cross(t);
            let dot = s.dot(t);
            // p on the line through a non-adjacent edge, outside the segment
            if libm::fabs(cross) <= 1e-14 * r[i] * r[(i + 1) % n] {
                return 0.0;
            }
            (r[i] * r[(i + 1) % n] - dot) / cross
        })
        .collect();
    let mut sum = 0.0;
    for i in 0..n {
        w[i] = (tan_half[(i + n - 1) % n] + tan_half[i]) / r[i];
        sum += w[i];
    }
    w.iter_mut().for_each(|x| *x /= sum);
    w
}

impl ReferenceSolution for MeshReference {
    fn evaluate(&self, p: Point) -> Result<([f64; 2], Gradient)> {
        let tol = 1e3 * self.mesh.tolerance();
        // element with the smallest outside distance (0 when it contains p)
        let mut best: Option<(usize, f64)> = None;
        let mut g = [[0.0; 2]; 2];
        let mut wsum = 0.0;
        for &e in self.candidates(p) {
            let pts = self.mesh.element_points(e);
            let outside = if point_in_polygon(p, &pts) { 0.0 } else { boundary_distance(p, &pts) };
            if outside > tol {
                continue;
            }
            if best.is_none_or(|(_, d)| outside < d) {
                best = Some((e, outside));
            }
            let a = self.areas[e];
            for i in 0..2 {
                for j in 0..2 {
                    g[i][j] += a * self.gradients[e][i][j];
                }
            }
            wsum += a;
        }
        let Some((e, outside)) = best else {
            return Err(Error::EvaluationError { x: p.x, y: p.y });
        };
        let pts = self.mesh.element_points(e);
        // a point just outside snaps onto the nearest edge
        let w = mean_value_coordinates(&pts, p, (1e-3 * self.mesh.tolerance()).max(2.0 * outside));
        let mut u = [0.0; 2];
        for (k, &v) in self.mesh.element(e).iter().enumerate() {
            let nv = self.solution.node(v);
            u[0] += w[k] * nv[0];
            u[1] += w[k] * nv[1];
        }
        g.iter_mut().flatten().for_each(|x| *x /= wsum);
        Ok((u, g))
    }
}

/// Vertex-quadrature error norms of a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub h1: f64,
    pub l2_displacement: f64,
    pub l2_strain: f64,
}

/// Vertex quadrature with weights `|E| / n_v` of the displacement error and
/// of the gradient error against the element's projected gradient.
pub fn error_norms(mesh: &Mesh, sol: &Solution, reference: &dyn ReferenceSolution) -> Result<ErrorNorms> {
    let refs: Vec<([f64; 2], Gradient)> = mesh
        .vertices()
        .iter()
        .map(|&p| reference.evaluate(p))
        .collect::<Result<_>>()?;
    let mut disp = 0.0;
    let mut strain = 0.0;
    for e in 0..mesh.n_elements() {
        let geom = ElementGeometry::new(&mesh.element_points(e)).expect("valid mesh element");
        let g = geom.gradient(&sol.element_dofs(mesh, e));
        let w = geom.area / mesh.element(e).len() as f64;
        for &v in mesh.element(e) {
            let (ur, gr) = refs[v];
            let uh = sol.node(v);
            let du = (ur[0] - uh[0]) * (ur[0] - uh[0]) + (ur[1] - uh[1]) * (ur[1] - uh[1]);
            let mut dg = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    dg += (gr[i][j] - g[i][j]) * (gr[i][j] - g[i][j]);
                }
            }
            disp += w * du;
            strain += w * dg;
        }
    }
    Ok(ErrorNorms {
        h1: libm::sqrt(disp + strain),
        l2_displacement: libm::sqrt(disp),
        l2_strain: libm::sqrt(strain),
    })
}

pub fn h1_error(mesh: &Mesh, sol: &Solution, reference: &dyn ReferenceSolution) -> Result<f64> {
    Ok(error_norms(mesh, sol, reference)?.h1)
}

/// `(displacement, strain)` components of the H1 error.
pub fn l2_components(mesh: &Mesh, sol: &Solution, reference: &dyn ReferenceSolution) -> Result<(f64, f64)> {
    let n = error_norms(mesh, sol, reference)?;
    Ok((n.l2_displacement, n.l2_strain))
}

/// Stabilization share of the stored elastic energy, as a fraction in [0, 1].
pub fn pse(mesh: &Mesh, mat: &Material, sol: &Solution) -> Result<f64> {
    let mut total = 0.0;
    let mut stab = 0.0;
    for e in 0..mesh.n_elements() {
        let em = element_stiffness(&mesh.element_points(e), mat)?;
        let d = sol.element_dofs(mesh, e);
        let es = 0.5 * em.ks.quad_form(&d);
        stab += es;
        total += 0.5 * em.kc.quad_form(&d) + es;
    }
    if !(total > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    Ok((stab / total).clamp(0.0, 1.0))
}

/// Effort measure compared by [`pre`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffortMetric {
    Nodes,
    /// Cumulative solve and indicator time, remeshing excluded.
    Runtime,
    /// Cumulative time including remeshing.
    RuntimeWithRemeshing,
    /// Mean element diameter.
    MeshSize,
}

pub fn effort_values(records: &[StepRecord], metric: EffortMetric) -> Vec<f64> {
    let mut acc = 0.0;
    records
        .iter()
        .map(|r| match metric {
            EffortMetric::Nodes => r.nodes as f64,
            EffortMetric::MeshSize => r.mean_diameter,
            EffortMetric::Runtime => {
                acc += r.solve_time;
                acc
            }
            EffortMetric::RuntimeWithRemeshing => {
                acc += r.solve_time + r.remesh_time;
                acc
            }
        })
        .collect()
}

/// Metric value at which a decreasing error curve reaches `level`, by
/// log-log linear interpolation between the first bracketing pair.
pub fn interpolate_effort(errors: &[f64], effort: &[f64], level: f64) -> Result<f64> {
    if errors.len() != effort.len() {
        return Err(Error::InvalidInput(alloc::format!(
            "{} errors for {} effort values",
            errors.len(),
            effort.len()
        )));
    }
    for k in 0..errors.len() {
        if errors[k] == level {
            return Ok(effort[k]);
        }
        if k + 1 < errors.len() {
            let (e0, e1) = (errors[k], errors[k + 1]);
            if e1 == level {
                return Ok(effort[k + 1]);
            }
            if e0 > level && level > e1 {
                let (m0, m1) = (effort[k], effort[k + 1]);
                if m0 > 0.0 && m1 > 0.0 && e1 > 0.0 {
                    let t = (libm::log(level) - libm::log(e0)) / (libm::log(e1) - libm::log(e0));
                    return Ok(libm::exp(libm::log(m0) + t * (libm::log(m1) - libm::log(m0))));
                }
                let t = (level - e0) / (e1 - e0);
                return Ok(m0 + t * (m1 - m0));
            }
        }
    }
    Err(Error::NotComparable)
}

/// Percentage relative effort of an adaptive run to reach the final error
/// of the reference run.
pub fn pre(adaptive: &[StepRecord], reference: &[StepRecord], metric: EffortMetric) -> Result<f64> {
    pre_of(adaptive, reference, metric, |r| r.h1)
}

/// [`pre`] on another decreasing per-step quantity, such as the PSE.
pub fn pre_of(
    adaptive: &[StepRecord],
    reference: &[StepRecord],
    metric: EffortMetric,
    quantity: fn(&StepRecord) -> f64,
) -> Result<f64> {
    let last = reference.last().ok_or(Error::NotComparable)?;
    let level = quantity(last);
    let reference_effort = *effort_values(reference, metric).last().unwrap();
    let errors: Vec<f64> = adaptive.iter().map(quantity).collect();
    let effort = effort_values(adaptive, metric);
    let m = interpolate_effort(&errors, &effort, level)?;
    if !(reference_effort > 0.0) {
        return Err(Error::DivisionByZero);
    }
    Ok(m / reference_effort * 100.0)
}

/// Inverted effort convention for mesh size, where lower is better.
pub fn pre_star(pre: f64) -> Result<f64> {
    if pre == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok(10000.0 / pre)
}
