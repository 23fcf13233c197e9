//! Refinement indicators, nodal strain smoothing and element marking.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{Mesh, RefinementPlan};
use crate::vem::{ElementGeometry, Solution};

/// Strain tensor components, in the order xx, yy, xy.
pub const COMPONENTS: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

/// Relative tolerance under which indicator values count as duplicates.
pub const DUPLICATE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum IndicatorKind {
    /// Deviation of nodal displacements from the element's planar fit.
    Db,
    /// Area-weighted maximum strain jump to vertex-sharing neighbours.
    Sj,
    /// Area-weighted mismatch between smoothed nodal and projected strains.
    Z2,
}

impl IndicatorKind {
    pub fn name(self) -> &'static str {
        match self {
            IndicatorKind::Db => "DB",
            IndicatorKind::Sj => "SJ",
            IndicatorKind::Z2 => "Z2",
        }
    }
}

/// One non-negative value per element.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    pub kind: IndicatorKind,
    pub values: Vec<f64>,
}

/// Coefficients of `u_x = a1 + a3 x + a5 y`, `u_y = a2 + a4 x + a6 y`,
/// stored as `a[0..6] = [a1, a2, a3, a4, a5, a6]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub a: [f64; 6],
}

impl LinearFit {
    pub fn eval(&self, p: Point) -> [f64; 2] {
        let a = &self.a;
        [a[0] + a[2] * p.x + a[4] * p.y, a[1] + a[3] * p.x + a[5] * p.y]
    }
}

/// Slopes from the average gradient, offsets from the vertex means.
pub fn linear_fit(pts: &[Point], geom: &ElementGeometry, d: &[f64]) -> LinearFit {
    let g = geom.gradient(d);
    let n = pts.len() as f64;
    let (a3, a5, a4, a6) = (g[0][0], g[0][1], g[1][0], g[1][1]);
    let mut a1 = 0.0;
    let mut a2 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        a1 += d[2 * i] - a3 * p.x - a5 * p.y;
        a2 += d[2 * i + 1] - a4 * p.x - a6 * p.y;
    }
    LinearFit { a: [a1 / n, a2 / n, a3, a4, a5, a6] }
}

pub fn indicator_db(mesh: &Mesh, sol: &Solution) -> IndicatorField {
    let values = (0..mesh.n_elements())
        .map(|e| {
            let pts = mesh.element_points(e);
            let geom = ElementGeometry::new(&pts).expect("valid mesh element");
            let d = sol.element_dofs(mesh, e);
            let fit = linear_fit(&pts, &geom, &d);
            let s: f64 = pts
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let u = fit.eval(p);
                    let (rx, ry) = (d[2 * i] - u[0], d[2 * i + 1] - u[1]);
                    rx * rx + ry * ry
                })
                .sum();
            libm::sqrt(s)
        })
        .collect();
    IndicatorField { kind: IndicatorKind::Db, values }
}

/// Projected strain and area of every element.
pub fn element_strains(mesh: &Mesh, sol: &Solution) -> Vec<([[f64; 2]; 2], f64)> {
    (0..mesh.n_elements())
        .map(|e| {
            let geom = ElementGeometry::new(&mesh.element_points(e)).expect("valid mesh element");
            (geom.strain(&sol.element_dofs(mesh, e)), geom.area)
        })
        .collect()
}

pub fn indicator_sj(mesh: &Mesh, sol: &Solution) -> IndicatorField {
    let strains = element_strains(mesh, sol);
    let values = (0..mesh.n_elements())
        .map(|e| {
            let (eps, area) = strains[e];
            let mut total = 0.0;
            for &(i, j) in &COMPONENTS {
                let jump = mesh
                    .surrounding_elements(e)
                    .iter()
                    .map(|&o| (eps[i][j] - strains[o].0[i][j]).abs())
                    .fold(0.0, f64::max);
                total += (area * jump) * (area * jump);
            }
            libm::sqrt(total)
        })
        .collect();
    IndicatorField { kind: IndicatorKind::Sj, values }
}

/// Per-vertex smoothed strain tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedStrain {
    pub strains: Vec<[[f64; 2]; 2]>,
}

/// Outward direction at each boundary vertex (sum of the outward normals
/// of its boundary edges); zero for interior vertices.
pub fn outward_directions(mesh: &Mesh) -> Vec<Point> {
    let mut out = vec![Point::default(); mesh.n_vertices()];
    for b in mesh.boundary_edges() {
        let (v, w) = mesh.edge_vertices(b);
        let d = mesh.vertices()[w] - mesh.vertices()[v];
        let n = Point::new(d.y, -d.x) * (1.0 / d.norm());
        out[v] = out[v] + n;
        out[w] = out[w] + n;
    }
    out
}

fn wrap(a: f64) -> f64 {
    let mut a = a;
    while a < 0.0 {
        a += 2.0 * PI;
    }
    while a >= 2.0 * PI {
        a -= 2.0 * PI;
    }
    a
}

/// Mean value weights of the fictitious vertices `centres` around `v`.
/// `outward` is `Some` at boundary vertices, where the fan is open across
/// the gap that contains the outward direction. Returns weights in input
/// order, summing to one.
pub fn mvc_weights(v: Point, centres: &[Point], outward: Option<Point>) -> Vec<f64> {
    let k = centres.len();
    if k == 1 {
        return vec![1.0];
    }
    let ang: Vec<f64> = centres.iter().map(|c| libm::atan2(c.y - v.y, c.x - v.x)).collect();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| ang[a].total_cmp(&ang[b]).then(a.cmp(&b)));
    // beta[p] is the angle from idx[p] to idx[p+1] (cyclic)
    let beta: Vec<f64> = (0..k).map(|p| wrap(ang[idx[(p + 1) % k]] - ang[idx[p]])).collect();
    let mut theta = vec![0.0; k];
    match outward {
        None => {
            for p in 0..k {
                let prev = beta[(p + k - 1) % k];
                let c = centres[idx[p]];
                theta[idx[p]] = (libm::tan(prev / 2.0) + libm::tan(beta[p] / 2.0)) / c.dist(v);
            }
        }
        Some(dir) => {
            let out_ang = libm::atan2(dir.y, dir.x);
            // the gap containing the outward direction is left open
            let gap = (0..k)
                .find(|&p| wrap(out_ang - ang[idx[p]]) < beta[p])
                .unwrap_or_else(|| (0..k).max_by(|&a, &b| beta[a].total_cmp(&beta[b])).unwrap());
            let fan: Vec<usize> = (1..=k).map(|s| (gap + s) % k).collect();
            for (s, &p) in fan.iter().enumerate() {
                let mut t = 0.0;
                if s > 0 {
                    t += libm::tan(beta[fan[s - 1]] / 2.0);
                }
                if s + 1 < k {
                    t += libm::tan(beta[p] / 2.0);
                }
                theta[idx[p]] = t / centres[idx[p]].dist(v);
            }
        }
    }
    let sum: f64 = theta.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() || theta.iter().any(|t| !t.is_finite()) {
        return vec![1.0 / k as f64; k];
    }
    theta.iter().map(|t| t / sum).collect()
}

pub fn smooth_strains(mesh: &Mesh, sol: &Solution) -> SmoothedStrain {
    let strains = element_strains(mesh, sol);
    let centroids: Vec<Point> = (0..mesh.n_elements()).map(|e| mesh.element_geometry(e).1).collect();
    let outward = outward_directions(mesh);
    let boundary = mesh.boundary_vertex_flags();
    let out = (0..mesh.n_vertices())
        .map(|v| {
            let elems = mesh.vertex_elements(v);
            let centres: Vec<Point> = elems.iter().map(|&e| centroids[e]).collect();
            let dir = boundary[v].then_some(outward[v]);
            let w = mvc_weights(mesh.vertices()[v], &centres, dir);
            let mut s = [[0.0; 2]; 2];
            for (&e, &wk) in elems.iter().zip(&w) {
                for i in 0..2 {
                    for j in 0..2 {
                        s[i][j] += wk * strains[e].0[i][j];
                    }
                }
            }
            s
        })
        .collect();
    SmoothedStrain { strains: out }
}

pub fn indicator_z2(mesh: &Mesh, sol: &Solution, smoothed: &SmoothedStrain) -> IndicatorField {
    let strains = element_strains(mesh, sol);
    let values = (0..mesh.n_elements())
        .map(|e| {
            let (eps, area) = strains[e];
            let mut total = 0.0;
            for &(i, j) in &COMPONENTS {
                let s: f64 = mesh
                    .element(e)
                    .iter()
                    .map(|&v| {
                        let d = smoothed.strains[v][i][j] - eps[i][j];
                        d * d
                    })
                    .sum();
                let c = area * libm::sqrt(s);
                total += c * c;
            }
            libm::sqrt(total)
        })
        .collect();
    IndicatorField { kind: IndicatorKind::Z2, values }
}

pub fn compute(kind: IndicatorKind, mesh: &Mesh, sol: &Solution) -> IndicatorField {
    match kind {
        IndicatorKind::Db => indicator_db(mesh, sol),
        IndicatorKind::Sj => indicator_sj(mesh, sol),
        IndicatorKind::Z2 => indicator_z2(mesh, sol, &smooth_strains(mesh, sol)),
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= DUPLICATE_REL * a.abs().max(b.abs())
}

/// Cut-off value at `t` percent down the duplicate-free descending list.
pub fn threshold_value(values: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 100.0) {
        return Err(Error::InvalidInput(alloc::format!("threshold {t} outside (0, 100]")));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput("indicator values must be finite and non-negative".into()));
    }
    if values.iter().all(|&v| v == 0.0) {
        return Err(Error::NothingToRefine);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut unique: Vec<f64> = Vec::with_capacity(sorted.len());
    for v in sorted {
        if unique.last().map_or(true, |&u| !same(u, v)) {
            unique.push(v);
        }
    }
    let len = unique.len();
    let idx = (libm::ceil(t * len as f64 / 100.0) as usize).clamp(1, len);
    Ok(unique[idx - 1])
}

/// Marks every element whose value is at least the threshold value.
pub fn select_elements(field: &IndicatorField, t: f64) -> Result<RefinementPlan> {
    let tval = threshold_value(&field.values, t)?;
    let marked = field
        .values
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v >= tval || same(v, tval))
        .map(|(e, _)| e);
    RefinementPlan::new(marked, field.values.len())
}

/// Marked elements in descending value order (ties by element index).
fn ranked(field: &IndicatorField, plan: &RefinementPlan) -> Vec<usize> {
    let mut r = plan.marked().to_vec();
    r.sort_by(|&a, &b| field.values[b].total_cmp(&field.values[a]).then(a.cmp(&b)));
    r
}

/// Merges two plans to the size of the shorter one: common elements first,
/// then alternating picks from each list in descending order, `a` first.
pub fn combine_plans(
    a: (&IndicatorField, &RefinementPlan),
    b: (&IndicatorField, &RefinementPlan),
) -> RefinementPlan {
    let target = a.1.len().min(b.1.len());
    let mut chosen: Vec<usize> = a.1.marked().iter().copied().filter(|&e| b.1.contains(e)).collect();
    chosen.truncate(target);
    let la: Vec<usize> = ranked(a.0, a.1).into_iter().filter(|e| !chosen.contains(e)).collect();
    let lb: Vec<usize> = ranked(b.0, b.1).into_iter().filter(|e| !chosen.contains(e)).collect();
    let (mut ia, mut ib) = (0, 0);
    let mut turn_a = true;
    while chosen.len() < target && (ia < la.len() || ib < lb.len()) {
        let (list, pos) = if turn_a { (&la, &mut ia) } else { (&lb, &mut ib) };
        while *pos < list.len() && chosen.contains(&list[*pos]) {
            *pos += 1;
        }
        if *pos < list.len() {
            chosen.push(list[*pos]);
            *pos += 1;
        }
        turn_a = !turn_a;
    }
    let n = a.0.values.len();
    RefinementPlan::new(chosen, n).expect("combined plan is non-empty and in range")
}
