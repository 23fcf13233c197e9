//! Conforming polygonal meshes and element refinement.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{
    bounded_voronoi, dedup_loop, diameter, point_segment_distance, polygon_area_centroid_diameter,
    signed_area, smooth_seeds, BBox, DomainShape, Point, Polygon, SeedMode, SeedSet,
    DEGENERACY_REL, LLOYD_CV_TOL, LLOYD_MAX_ITERS,
};
use crate::rng::mix;

/// How marked elements are subdivided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshMode {
    /// Quadtree-like split from a 2x2 grid of seeds on the element's bounding box.
    Structured,
    /// Lloyd-smoothed Voronoi split from as many random seeds as the element has nodes.
    Voronoi,
}

/// Number of redraws for a failed random sub-tessellation.
pub const REFINE_RETRIES: u64 = 5;

/// Snapping is skipped on an edge whose optimal spacing falls below this
/// fraction of the element diameter.
pub const MIN_SNAP_SPACING_REL: f64 = 1e-6;

/// An element edge on the domain boundary. `marker` is the index of the
/// domain boundary segment that contains it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub element: usize,
    pub local_edge: usize,
    pub marker: usize,
}

/// Elements selected for refinement (sorted, unique, non-empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementPlan {
    marked: Vec<usize>,
}

impl RefinementPlan {
    pub fn new(marked: impl IntoIterator<Item = usize>, n_elements: usize) -> Result<Self> {
        let mut marked: Vec<usize> = marked.into_iter().collect();
        marked.sort_unstable();
        marked.dedup();
        if marked.is_empty() {
            return Err(Error::InvalidInput("empty refinement plan".into()));
        }
        if let Some(&e) = marked.iter().find(|&&e| e >= n_elements) {
            return Err(Error::InvalidInput(format!(
                "element {e} out of range for {n_elements} elements"
            )));
        }
        Ok(RefinementPlan { marked })
    }

    pub fn all(n_elements: usize) -> Self {
        RefinementPlan { marked: (0..n_elements).collect() }
    }

    pub fn marked(&self) -> &[usize] {
        &self.marked
    }

    pub fn len(&self) -> usize {
        self.marked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marked.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.marked.binary_search(&e).is_ok()
    }
}

/// Uniform bucket grid over a bounding box.
struct PointGrid {
    min: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl PointGrid {
    fn new(bb: BBox, n: usize, min_cell: f64) -> Self {
        let w = (bb.max.x - bb.min.x).max(min_cell);
        let h = (bb.max.y - bb.min.y).max(min_cell);
        let cell = (libm::sqrt(w * h / n.max(1) as f64)).max(min_cell);
        let nx = ((w / cell) as usize + 1).min(4096);
        let ny = ((h / cell) as usize + 1).min(4096);
        let cell = (w / nx as f64).max(h / ny as f64).max(min_cell);
        PointGrid { min: bb.min, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] }
    }

    fn index(&self, v: f64, lo: f64, n: usize) -> usize {
        let i = libm::floor((v - lo) / self.cell);
        if i < 0.0 {
            0
        } else {
            (i as usize).min(n - 1)
        }
    }

    fn insert(&mut self, p: Point, id: usize) {
        let i = self.index(p.x, self.min.x, self.nx);
        let j = self.index(p.y, self.min.y, self.ny);
        self.buckets[j * self.nx + i].push(id);
    }

    fn for_each_in(&self, lo: Point, hi: Point, mut f: impl FnMut(usize)) {
        let (i0, i1) = (self.index(lo.x, self.min.x, self.nx), self.index(hi.x, self.min.x, self.nx));
        let (j0, j1) = (self.index(lo.y, self.min.y, self.ny), self.index(hi.y, self.min.y, self.ny));
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &id in &self.buckets[j * self.nx + i] {
                    f(id);
                }
            }
        }
    }
}

/// A conforming polygonal mesh. Immutable; refinement returns a new mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    elements: Vec<Vec<usize>>,
    segments: Vec<[Point; 2]>,
    vertex_elements: Vec<Vec<usize>>,
    boundary: Vec<BoundaryEdge>,
    tol: f64,
}

fn tolerance_of(segments: &[[Point; 2]]) -> f64 {
    let pts: Vec<Point> = segments.iter().flat_map(|s| s.iter().copied()).collect();
    DEGENERACY_REL * BBox::of(&pts).diagonal()
}

impl Mesh {
    /// Tessellates `domain` from `seeds` (with Lloyd smoothing for random seeds).
    pub fn generate(domain: &DomainShape, seeds: &SeedSet) -> Result<Mesh> {
        let seeds = match seeds.mode {
            SeedMode::Structured => seeds.clone(),
            SeedMode::Random => smooth_seeds(seeds, domain, LLOYD_MAX_ITERS, LLOYD_CV_TOL)?.seeds,
        };
        let cells = bounded_voronoi(&seeds, domain)?;
        let polys = cells.into_iter().map(|c| c.polygon.into_vertices()).collect();
        Mesh::from_polygons(polys, domain.segments())
    }

    /// Builds a mesh from CCW element polygons: welds coincident vertices,
    /// inserts vertices lying inside neighbouring edges into those loops and
    /// classifies boundary edges against the domain `segments`.
    pub fn from_polygons(polys: Vec<Vec<Point>>, segments: Vec<[Point; 2]>) -> Result<Mesh> {
        let tol = tolerance_of(&segments);
        let all: Vec<Point> = polys.iter().flat_map(|p| p.iter().copied()).collect();
        let bb = BBox::of(&all);
        let mut grid = PointGrid::new(bb, all.len(), 4.0 * tol);
        let mut vertices: Vec<Point> = Vec::new();
        let mut elements: Vec<Vec<usize>> = Vec::with_capacity(polys.len());
        for poly in &polys {
            let mut lp = Vec::with_capacity(poly.len());
            for &p in poly {
                let pad = Point::new(tol, tol);
                let mut found = None;
                grid.for_each_in(p - pad, p + pad, |id| {
                    if found.is_none() && vertices[id].dist(p) <= tol {
                        found = Some(id);
                    }
                });
                let id = match found {
                    Some(id) => id,
                    None => {
                        vertices.push(p);
                        grid.insert(p, vertices.len() - 1);
                        vertices.len() - 1
                    }
                };
                if lp.last() != Some(&id) {
                    lp.push(id);
                }
            }
            while lp.len() > 1 && lp[0] == lp[lp.len() - 1] {
                lp.pop();
            }
            elements.push(lp);
        }

        // T-junctions: vertices strictly inside another element's edge.
        let mut out = Vec::with_capacity(elements.len());
        for lp in &elements {
            let n = lp.len();
            let mut nl = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (lp[i], lp[(i + 1) % n]);
                let (pa, pb) = (vertices[a], vertices[b]);
                nl.push(a);
                let lo = Point::new(pa.x.min(pb.x) - tol, pa.y.min(pb.y) - tol);
                let hi = Point::new(pa.x.max(pb.x) + tol, pa.y.max(pb.y) + tol);
                let mut on: Vec<(f64, usize)> = Vec::new();
                grid.for_each_in(lo, hi, |v| {
                    if v == a || v == b {
                        return;
                    }
                    let q = vertices[v];
                    if q.dist(pa) <= tol || q.dist(pb) <= tol {
                        return;
                    }
                    let (d, t) = point_segment_distance(q, pa, pb);
                    if d <= tol && t > 0.0 && t < 1.0 {
                        on.push((t, v));
                    }
                });
                on.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                nl.extend(on.into_iter().map(|x| x.1));
            }
            out.push(nl);
        }
        Mesh::from_parts(vertices, out, segments).map(Mesh::without_orphans)
    }

    fn without_orphans(self) -> Mesh {
        if self.vertex_elements.iter().all(|v| !v.is_empty()) {
            return self;
        }
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (v, p) in self.vertices.iter().enumerate() {
            if !self.vertex_elements[v].is_empty() {
                map[v] = vertices.len();
                vertices.push(*p);
            }
        }
        let elements = self
            .elements
            .iter()
            .map(|l| l.iter().map(|&v| map[v]).collect())
            .collect();
        Mesh::from_parts(vertices, elements, self.segments).expect("renumbering keeps validity")
    }

    /// Builds a mesh from explicit data without welding or junction repair,
    /// validating every invariant.
    pub fn from_parts(
        vertices: Vec<Point>,
        elements: Vec<Vec<usize>>,
        segments: Vec<[Point; 2]>,
    ) -> Result<Mesh> {
        if elements.is_empty() {
            return Err(Error::InvalidInput("mesh without elements".into()));
        }
        if segments.is_empty() {
            return Err(Error::InvalidInput("mesh without boundary segments".into()));
        }
        let tol = tolerance_of(&segments);
        let mut vertex_elements = vec![Vec::new(); vertices.len()];
        let mut directed: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
        for (e, lp) in elements.iter().enumerate() {
            if lp.len() < 3 {
                return Err(Error::DegenerateGeometry(format!("element {e} has {} vertices", lp.len())));
            }
            if let Some(&v) = lp.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidInput(format!("element {e} references vertex {v}")));
            }
            let mut sorted = lp.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != lp.len() {
                return Err(Error::DegenerateGeometry(format!("element {e} repeats a vertex")));
            }
            let pts: Vec<Point> = lp.iter().map(|&v| vertices[v]).collect();
            polygon_area_centroid_diameter(&pts)
                .map_err(|err| Error::DegenerateGeometry(format!("element {e}: {err}")))?;
            for (i, &v) in lp.iter().enumerate() {
                vertex_elements[v].push(e);
                let w = lp[(i + 1) % lp.len()];
                if directed.insert((v, w), (e, i)).is_some() {
                    return Err(Error::NonConforming(format!("edge {v}-{w} used twice")));
                }
            }
        }
        let mut boundary = Vec::new();
        for (&(v, w), &(e, i)) in &directed {
            if directed.contains_key(&(w, v)) {
                continue;
            }
            let (p, q) = (vertices[v], vertices[w]);
            let marker = segments.iter().position(|s| {
                point_segment_distance(p, s[0], s[1]).0 <= tol
                    && point_segment_distance(q, s[0], s[1]).0 <= tol
            });
            match marker {
                Some(marker) => boundary.push(BoundaryEdge { element: e, local_edge: i, marker }),
                None => {
                    return Err(Error::NonConforming(format!(
                        "edge ({}, {})-({}, {}) of element {e} has no partner",
                        p.x, p.y, q.x, q.y
                    )))
                }
            }
        }
        boundary.sort_by_key(|b| (b.element, b.local_edge));
        Ok(Mesh { vertices, elements, segments, vertex_elements, boundary, tol })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn segments(&self) -> &[[Point; 2]] {
        &self.segments
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e]
    }

    pub fn element_points(&self, e: usize) -> Vec<Point> {
        self.elements[e].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn element_polygon(&self, e: usize) -> Polygon {
        Polygon::from_trusted(self.element_points(e))
    }

    /// Area, centroid, diameter of element `e`.
    pub fn element_geometry(&self, e: usize) -> (f64, Point, f64) {
        polygon_area_centroid_diameter(&self.element_points(e))
            .expect("mesh elements are validated on construction")
    }

    pub fn vertex_elements(&self, v: usize) -> &[usize] {
        &self.vertex_elements[v]
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Endpoint vertex indices of a boundary edge.
    pub fn edge_vertices(&self, b: &BoundaryEdge) -> (usize, usize) {
        let lp = &self.elements[b.element];
        (lp[b.local_edge], lp[(b.local_edge + 1) % lp.len()])
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn area(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.element_geometry(e).0).sum()
    }

    pub fn mean_diameter(&self) -> f64 {
        let s: f64 = (0..self.n_elements()).map(|e| self.element_geometry(e).2).sum();
        s / self.n_elements() as f64
    }

    /// Elements other than `e` that share at least one vertex with it, sorted.
    pub fn surrounding_elements(&self, e: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.elements[e]
            .iter()
            .flat_map(|&v| self.vertex_elements[v].iter().copied())
            .filter(|&o| o != e)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Whether each vertex lies on a boundary edge.
    pub fn boundary_vertex_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for b in &self.boundary {
            let (v, w) = self.edge_vertices(b);
            flags[v] = true;
            flags[w] = true;
        }
        flags
    }

    /// Full invariant check: valid simple CCW elements and, when given, a
    /// total area matching `domain_area` within 1e-8 relative.
    pub fn check_invariants(&self, domain_area: Option<f64>) -> Result<()> {
        for e in 0..self.n_elements() {
            Polygon::new(self.element_points(e))
                .map_err(|err| Error::DegenerateGeometry(format!("element {e}: {err}")))?;
        }
        Mesh::from_parts(self.vertices.clone(), self.elements.clone(), self.segments.clone())?;
        if self.vertex_elements.iter().any(Vec::is_empty) {
            return Err(Error::InvalidInput("orphan vertex".into()));
        }
        if let Some(a) = domain_area {
            let total = self.area();
            if (total - a).abs() > 1e-8 * a {
                return Err(Error::NonConforming(format!("mesh area {total} vs domain {a}")));
            }
        }
        Ok(())
    }

    /// Replaces every marked element by a sub-tessellation and stitches
    /// the new edge nodes into the unrefined neighbours.
    pub fn refine_elements(&self, plan: &RefinementPlan, mode: MeshMode, rng_seed: u64) -> Result<Mesh> {
        if let Some(&e) = plan.marked().iter().find(|&&e| e >= self.n_elements()) {
            return Err(Error::InvalidInput(format!("element {e} out of range")));
        }
        let mut polys: Vec<Vec<Point>> = Vec::with_capacity(self.n_elements() + 4 * plan.len());
        for e in 0..self.n_elements() {
            let pts = self.element_points(e);
            if plan.contains(e) {
                let children = refine_polygon(&pts, mode, mix(rng_seed, e as u64))
                    .map_err(|_| Error::RefinementFailed { element: e })?;
                polys.extend(children);
            } else {
                polys.push(pts);
            }
        }
        Mesh::from_polygons(polys, self.segments.clone())
    }

    /// Uniform refinement: every element is refined.
    pub fn reference_refine(&self, mode: MeshMode, rng_seed: u64) -> Result<Mesh> {
        self.refine_elements(&RefinementPlan::all(self.n_elements()), mode, rng_seed)
    }
}

/// Children of one polygon, after edge-node snapping.
pub fn refine_polygon(parent: &[Point], mode: MeshMode, seed: u64) -> Result<Vec<Vec<Point>>> {
    let poly = Polygon::new(parent.to_vec())?;
    let parent_area = poly.area();
    let domain = DomainShape::polygon(poly);
    let attempt = |seeds: SeedSet| -> Result<Vec<Vec<Point>>> {
        let seeds = if seeds.mode == SeedMode::Random {
            smooth_seeds(&seeds, &domain, LLOYD_MAX_ITERS, LLOYD_CV_TOL)?.seeds
        } else {
            seeds
        };
        if seeds.points.len() < 2 {
            return Err(Error::DegenerateGeometry("fewer than two seeds".into()));
        }
        let cells = bounded_voronoi(&seeds, &domain)?;
        let mut children: Vec<Vec<Point>> =
            cells.into_iter().map(|c| c.polygon.into_vertices()).collect();
        let sum: f64 = children.iter().map(|c| signed_area(c)).sum();
        if (sum - parent_area).abs() > 1e-9 * parent_area {
            return Err(Error::DegenerateGeometry("children do not cover parent".into()));
        }
        snap_edge_nodes(parent, &mut children, domain.tolerance(), domain.diameter());
        Ok(children)
    };
    match mode {
        MeshMode::Structured => {
            attempt(SeedSet::structured(&domain, 2, 2)).or_else(|_| attempt(star_seeds(parent)))
        }
        MeshMode::Voronoi => {
            let mut last = Err(Error::DegenerateGeometry("no attempt".into()));
            for k in 0..REFINE_RETRIES {
                last = attempt(SeedSet::random_stream(&domain, parent.len(), seed, k));
                if last.is_ok() {
                    break;
                }
            }
            last
        }
    }
}

/// One seed halfway between the centroid and each vertex.
fn star_seeds(parent: &[Point]) -> SeedSet {
    let (_, c, _) = polygon_area_centroid_diameter(parent).expect("validated parent");
    SeedSet {
        points: parent.iter().map(|&v| (v + c) * 0.5).collect(),
        mode: SeedMode::Structured,
        rng_seed: 0,
    }
}

fn children_valid(children: &[Vec<Point>]) -> bool {
    children.iter().all(|c| Polygon::new(c.clone()).is_ok())
}

/// Moves the new nodes on each parent edge to the nearest of the evenly
/// spaced positions along that edge. Nodes landing on the same position are
/// merged; an edge whose snap would invalidate a child is left untouched.
pub fn snap_edge_nodes(parent: &[Point], children: &mut [Vec<Point>], eps: f64, diam: f64) {
    let n = parent.len();
    for i in 0..n {
        let (a, b) = (parent[i], parent[(i + 1) % n]);
        let len = a.dist(b);
        let mut on: Vec<(f64, Point)> = Vec::new();
        for c in children.iter() {
            for &p in c {
                if p.dist(a) <= eps || p.dist(b) <= eps {
                    continue;
                }
                let (d, t) = point_segment_distance(p, a, b);
                if d <= eps && t > 0.0 && t < 1.0 && !on.iter().any(|q| q.1.dist(p) <= eps) {
                    on.push((t, p));
                }
            }
        }
        if on.is_empty() {
            continue;
        }
        let slots = (on.len() + 1) as f64;
        if len / slots < MIN_SNAP_SPACING_REL * diam {
            continue;
        }
        let moves: Vec<(Point, Point)> = on
            .iter()
            .map(|&(t, p)| {
                let k = libm::round(t * slots);
                let target = if k <= 0.0 {
                    a
                } else if k >= slots {
                    b
                } else {
                    a.lerp(b, k / slots)
                };
                (p, target)
            })
            .collect();
        let snapped: Vec<Vec<Point>> = children
            .iter()
            .map(|c| {
                let mut c: Vec<Point> = c
                    .iter()
                    .map(|&p| moves.iter().find(|m| m.0.dist(p) <= eps).map_or(p, |m| m.1))
                    .collect();
                dedup_loop(&mut c, eps);
                c
            })
            .collect();
        if children_valid(&snapped) {
            children.clone_from_slice(&snapped);
        }
    }
}

/// Structured mesh of `nx x ny` rectangles on `[x0,x1] x [y0,y1]`; boundary
/// segments are the four sides, bottom first, counter-clockwise.
pub fn rectangle_grid(x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> Result<Mesh> {
    let outer = Polygon::rectangle(x0, y0, x1, y1)?;
    let domain = DomainShape::polygon(outer);
    let mut polys = Vec::with_capacity(nx * ny);
    let xs = |i: usize| x0 + (x1 - x0) * i as f64 / nx as f64;
    let ys = |j: usize| y0 + (y1 - y0) * j as f64 / ny as f64;
    for j in 0..ny {
        for i in 0..nx {
            polys.push(vec![
                Point::new(xs(i), ys(j)),
                Point::new(xs(i + 1), ys(j)),
                Point::new(xs(i + 1), ys(j + 1)),
                Point::new(xs(i), ys(j + 1)),
            ]);
        }
    }
    Mesh::from_polygons(polys, domain.segments())
}

/// Maximum pairwise vertex distance of element `e` (convenience for tests).
pub fn element_diameter(m: &Mesh, e: usize) -> f64 {
    diameter(&m.element_points(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Mesh {
        rectangle_grid(0.0, 0.0, 1.0, 1.0, 1, 1).unwrap()
    }

    #[test]
    fn single_element_has_no_neighbours() {
        assert!(unit().surrounding_elements(0).is_empty());
    }

    #[test]
    fn centre_of_three_by_three_has_full_ring() {
        let m = rectangle_grid(0.0, 0.0, 1.0, 1.0, 3, 3).unwrap();
        assert_eq!(m.surrounding_elements(4), vec![0, 1, 2, 3, 5, 6, 7, 8]);
        assert_eq!(m.boundary_edges().len(), 12);
    }

    #[test]
    fn refining_one_square_adds_mid_edge_nodes_to_neighbours() {
        let m = rectangle_grid(0.0, 0.0, 3.0, 3.0, 3, 3).unwrap();
        let plan = RefinementPlan::new([4], 9).unwrap();
        let r = m.refine_elements(&plan, MeshMode::Structured, 7).unwrap();
        assert_eq!(r.n_elements(), 12);
        let children: Vec<usize> = (0..r.n_elements()).filter(|&e| r.element(e).len() == 4 && r.element_geometry(e).0 < 0.3).collect();
        assert_eq!(children.len(), 4);
        for &e in &children {
            assert!((r.element_geometry(e).0 - 0.25).abs() < 1e-14);
        }
        // side neighbours gained one node, corner neighbours none
        let side: Vec<usize> = (0..r.n_elements()).filter(|&e| r.element(e).len() == 5).collect();
        assert_eq!(side.len(), 4);
        r.check_invariants(Some(9.0)).unwrap();
    }

    #[test]
    fn refining_two_by_two_gives_four_by_four() {
        let m = rectangle_grid(0.0, 0.0, 1.0, 1.0, 2, 2).unwrap();
        let r = m.reference_refine(MeshMode::Structured, 0).unwrap();
        assert_eq!(r.n_elements(), 16);
        assert_eq!(r.n_vertices(), 25);
        r.check_invariants(Some(1.0)).unwrap();
    }

    #[test]
    fn voronoi_split_of_pentagon_preserves_area() {
        let penta = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.1),
            Point::new(1.3, 0.8),
            Point::new(0.5, 1.2),
            Point::new(-0.2, 0.7),
        ];
        let area = signed_area(&penta);
        let kids = refine_polygon(&penta, MeshMode::Voronoi, 42).unwrap();
        assert!(kids.len() >= 2);
        let sum: f64 = kids.iter().map(|k| signed_area(k)).sum();
        assert!((sum - area).abs() < 1e-9 * area);
        assert_eq!(kids, refine_polygon(&penta, MeshMode::Voronoi, 42).unwrap());
    }

    #[test]
    fn colliding_snaps_merge() {
        let parent = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let strip = |x0: f64, x1: f64| {
            vec![Point::new(x0, 0.0), Point::new(x1, 0.0), Point::new(x1, 1.0), Point::new(x0, 1.0)]
        };
        // the middle strip's bottom edge collapses: x=0.3 and x=0.36 both go to 1/3
        let mut kids = vec![strip(0.0, 0.3), strip(0.3, 0.36), strip(0.36, 1.0)];
        snap_edge_nodes(&parent, &mut kids, 1e-12, 2f64.sqrt());
        let mut bottom: Vec<f64> = kids
            .iter()
            .flat_map(|k| k.iter().filter(|p| p.y == 0.0).map(|p| p.x))
            .collect();
        bottom.sort_by(f64::total_cmp);
        bottom.dedup();
        assert_eq!(bottom, vec![0.0, 1.0 / 3.0, 1.0]);
        assert_eq!(kids[1].len(), 3);
        // the top edge would flatten the middle child, so it is left alone
        assert!(kids[1].iter().any(|p| p.y == 1.0 && p.x == 0.3));
        let total: f64 = kids.iter().map(|k| signed_area(k)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn plan_validation() {
        assert!(RefinementPlan::new([], 3).is_err());
        assert!(RefinementPlan::new([3], 3).is_err());
        assert_eq!(RefinementPlan::new([2, 0, 2], 3).unwrap().marked(), &[0, 2]);
    }

    #[test]
    fn unmatched_interior_edge_is_rejected() {
        let segs = unit().segments().to_vec();
        let polys = vec![vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 0.5),
        ]];
        assert!(matches!(Mesh::from_polygons(polys, segs), Err(Error::NonConforming(_))));
    }
}
