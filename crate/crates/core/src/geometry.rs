//! Polygon primitives, bounded Voronoi tessellation and Lloyd smoothing.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Vertices closer than this fraction of the domain diameter are merged.
pub const DEGENERACY_REL: f64 = 1e-9;

/// Polygons whose area is below `AREA_REL * diameter^2` are degenerate.
pub const AREA_REL: f64 = 1e-12;

/// Default Lloyd stopping rule.
pub const LLOYD_MAX_ITERS: usize = 100;
pub const LLOYD_CV_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2D cross product.
    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    #[inline]
    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(points: &[Point]) -> BBox {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BBox { min, max }
    }

    pub fn diagonal(&self) -> f64 {
        self.min.dist(self.max)
    }

    pub fn overlaps(&self, o: &BBox, pad: f64) -> bool {
        self.min.x <= o.max.x + pad
            && o.min.x <= self.max.x + pad
            && self.min.y <= o.max.y + pad
            && o.min.y <= self.max.y + pad
    }
}

/// Twice the signed area is avoided on purpose; this is the actual area.
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        s += pts[i].cross(pts[(i + 1) % n]);
    }
    0.5 * s
}

/// Maximum pairwise vertex distance.
pub fn diameter(pts: &[Point]) -> f64 {
    let mut d2: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i] - pts[j];
            d2 = d2.max(d.dot(d));
        }
    }
    libm::sqrt(d2)
}

/// Area, area-weighted centroid and diameter of a CCW vertex loop.
pub fn polygon_area_centroid_diameter(pts: &[Point]) -> Result<(f64, Point, f64)> {
    if pts.len() < 3 {
        return Err(Error::DegenerateGeometry(format!("{} vertices", pts.len())));
    }
    let diam = diameter(pts);
    // centroid relative to the first vertex to limit cancellation
    let o = pts[0];
    let n = pts.len();
    let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = pts[i] - o;
        let q = pts[(i + 1) % n] - o;
        let c = p.cross(q);
        a2 += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    let area = 0.5 * a2;
    if !(area > AREA_REL * diam * diam) {
        return Err(Error::DegenerateGeometry(format!(
            "polygon area {area:e} with diameter {diam:e}"
        )));
    }
    let centroid = Point::new(o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2));
    Ok((area, centroid, diam))
}

/// Distance from `p` to segment `ab` and the clamped parameter of the
/// closest point.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> (f64, f64) {
    let d = b - a;
    let l2 = d.dot(d);
    if l2 == 0.0 {
        return (p.dist(a), 0.0);
    }
    let t = ((p - a).dot(d) / l2).clamp(0.0, 1.0);
    (p.dist(a + d * t), t)
}

/// Crossing-number point-in-polygon test. Points on the boundary may go
/// either way.
pub fn point_in_polygon(p: Point, pts: &[Point]) -> bool {
    let n = pts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (pts[i], pts[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the boundary of a closed loop.
pub fn boundary_distance(p: Point, pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| point_segment_distance(p, pts[i], pts[(i + 1) % n]).0)
        .fold(f64::INFINITY, f64::min)
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn is_simple(pts: &[Point]) -> bool {
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Convexity test that tolerates collinear vertices.
pub fn is_convex(pts: &[Point]) -> bool {
    let n = pts.len();
    let scale = diameter(pts);
    let tol = 1e-12 * scale * scale;
    (0..n).all(|i| {
        let a = pts[(i + n - 1) % n];
        let b = pts[i];
        let c = pts[(i + 1) % n];
        (b - a).cross(c - b) >= -tol
    })
}

/// A simple polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates vertex count, orientation, area and simplicity.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        polygon_area_centroid_diameter(&vertices)?;
        let diam = diameter(&vertices);
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].dist(vertices[(i + 1) % n]) <= DEGENERACY_REL * diam {
                return Err(Error::DegenerateGeometry(format!(
                    "consecutive vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        if !is_simple(&vertices) {
            return Err(Error::DegenerateGeometry("self-intersecting polygon".into()));
        }
        Ok(Polygon { vertices })
    }

    /// Accepts either orientation and reverses clockwise input.
    pub fn from_any_orientation(mut vertices: Vec<Point>) -> Result<Self> {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Polygon::new(vertices)
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Polygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub(crate) fn from_trusted(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Always succeeds for a validated polygon.
    pub fn area_centroid_diameter(&self) -> (f64, Point, f64) {
        polygon_area_centroid_diameter(&self.vertices)
            .expect("validated polygon has positive area")
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.vertices)
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(p, &self.vertices)
    }

    pub fn is_convex(&self) -> bool {
        is_convex(&self.vertices)
    }
}

/// Half-plane `normal . p <= offset`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HalfPlane {
    normal: Point,
    offset: f64,
}

impl HalfPlane {
    /// Points closer to `keep` than to `other`.
    fn bisector(keep: Point, other: Point) -> Self {
        let normal = other - keep;
        let mid = (keep + other) * 0.5;
        HalfPlane { normal, offset: normal.dot(mid) }
    }

    /// Left side (inside) of the directed edge `a -> b`.
    fn left_of(a: Point, b: Point) -> Self {
        let d = b - a;
        let normal = Point::new(d.y, -d.x);
        HalfPlane { normal, offset: normal.dot(a) }
    }

    fn flipped(self) -> Self {
        HalfPlane { normal: -self.normal, offset: -self.offset }
    }

    #[inline]
    fn eval(&self, p: Point) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Sutherland-Hodgman clip of a loop against one half-plane.
pub(crate) fn clip(poly: &[Point], hp: HalfPlane) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let da = hp.eval(a);
        let db = hp.eval(b);
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            out.push(a.lerp(b, t));
        }
    }
    out
}

/// Drops consecutive near-duplicates (including the wrap-around pair).
pub(crate) fn dedup_loop(pts: &mut Vec<Point>, eps: f64) {
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter() {
        if out.last().map_or(true, |q: &Point| q.dist(p) > eps) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= eps {
        out.pop();
    }
    *pts = out;
}

/// Inserts any of `extra` lying strictly inside an edge of `pts`.
pub(crate) fn insert_points_on_edges(pts: &[Point], extra: &[Point], eps: f64) -> Vec<Point> {
    let n = pts.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        out.push(a);
        let mut on: Vec<(f64, Point)> = extra
            .iter()
            .filter_map(|&q| {
                if q.dist(a) <= eps || q.dist(b) <= eps {
                    return None;
                }
                let (d, t) = point_segment_distance(q, a, b);
                (d <= eps && t > 0.0 && t < 1.0).then_some((t, q))
            })
            .collect();
        on.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (_, q) in on {
            if out.last().map_or(true, |l: &Point| l.dist(q) > eps) {
                out.push(q);
            }
        }
    }
    out
}

/// Removes vertices collinear with their neighbours unless they are in
/// `keep`.
fn drop_collinear(pts: &mut Vec<Point>, keep: &[Point], eps: f64) {
    loop {
        let n = pts.len();
        if n <= 3 {
            return;
        }
        let mut removed = false;
        for i in 0..n {
            let a = pts[(i + n - 1) % n];
            let b = pts[i];
            let c = pts[(i + 1) % n];
            let (d, _) = point_segment_distance(b, a, c);
            if d <= eps && (b - a).dot(c - b) > 0.0 && !keep.iter().any(|k| k.dist(b) <= eps) {
                pts.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return;
        }
    }
}

/// Ear-clipping triangulation of a CCW simple loop.
fn triangulate(pts: &[Point]) -> Vec<Vec<Point>> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut tris = Vec::new();
    let scale = diameter(pts);
    let tiny = 1e-14 * scale * scale;
    while idx.len() > 3 {
        let n = idx.len();
        let mut clipped = false;
        for pass in 0..2 {
            for k in 0..n {
                let a = pts[idx[(k + n - 1) % n]];
                let b = pts[idx[k]];
                let c = pts[idx[(k + 1) % n]];
                let cr = (b - a).cross(c - b);
                let ok = if pass == 0 { cr > tiny } else { cr >= -tiny };
                if !ok {
                    continue;
                }
                let blocked = pass == 0
                    && idx.iter().any(|&m| {
                        let p = pts[m];
                        if p == a || p == b || p == c {
                            return false;
                        }
                        (b - a).cross(p - a) >= 0.0
                            && (c - b).cross(p - b) >= 0.0
                            && (a - c).cross(p - c) >= 0.0
                    });
                if blocked {
                    continue;
                }
                if cr > tiny {
                    tris.push(vec![a, b, c]);
                }
                idx.remove(k);
                clipped = true;
                break;
            }
            if clipped {
                break;
            }
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        let t: Vec<Point> = idx.iter().map(|&i| pts[i]).collect();
        if signed_area(&t) > tiny {
            tris.push(t);
        }
    }
    tris
}

/// Convex pieces of `piece \ hole` for convex `piece` and `hole`.
fn subtract_convex(piece: &[Point], hole: &[Point], eps: f64) -> Vec<Vec<Point>> {
    if !BBox::of(piece).overlaps(&BBox::of(hole), 0.0) {
        return vec![piece.to_vec()];
    }
    let m = hole.len();
    let mut out = Vec::new();
    for j in 0..m {
        let outside = HalfPlane::left_of(hole[j], hole[(j + 1) % m]).flipped();
        let mut p = clip(piece, outside);
        for k in 0..j {
            if p.len() < 3 {
                break;
            }
            p = clip(&p, HalfPlane::left_of(hole[k], hole[(k + 1) % m]));
        }
        dedup_loop(&mut p, eps);
        if p.len() >= 3 && signed_area(&p) > eps * eps {
            out.push(p);
        }
    }
    out
}

/// Union of interior-disjoint convex pieces by cancelling shared edges.
/// Returns closed loops; clockwise loops are holes of the union.
fn union_loops(pieces: &[Vec<Point>], keep: &[Point], eps: f64) -> Vec<Vec<Point>> {
    let mut pool: Vec<Point> = Vec::new();
    let id = |p: Point, pool: &mut Vec<Point>| -> usize {
        if let Some(i) = pool.iter().position(|q| q.dist(p) <= eps) {
            i
        } else {
            pool.push(p);
            pool.len() - 1
        }
    };
    let mut loops: Vec<Vec<usize>> = Vec::new();
    for piece in pieces {
        let mut l: Vec<usize> = piece.iter().map(|&p| id(p, &mut pool)).collect();
        l.dedup();
        while l.len() > 1 && l[0] == l[l.len() - 1] {
            l.pop();
        }
        if l.len() >= 3 {
            loops.push(l);
        }
    }
    let mut count: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for l in &loops {
        let n = l.len();
        for i in 0..n {
            let (a, b) = (l[i], l[(i + 1) % n]);
            // split at T-junctions
            let (pa, pb) = (pool[a], pool[b]);
            let mut on: Vec<(f64, usize)> = (0..pool.len())
                .filter(|&v| v != a && v != b)
                .filter_map(|v| {
                    let (d, t) = point_segment_distance(pool[v], pa, pb);
                    (d <= eps && t > 0.0 && t < 1.0).then_some((t, v))
                })
                .collect();
            on.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut chain = vec![a];
            chain.extend(on.into_iter().map(|x| x.1));
            chain.push(b);
            for w in chain.windows(2) {
                let (u, v) = (w[0], w[1]);
                if let Some(c) = count.get_mut(&(v, u)) {
                    if *c > 0 {
                        *c -= 1;
                        continue;
                    }
                }
                *count.entry((u, v)).or_insert(0) += 1;
            }
        }
    }
    let mut out_edges: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut remaining = 0usize;
    for (&(u, v), &c) in &count {
        for _ in 0..c.max(0) {
            out_edges.entry(u).or_default().push(v);
            remaining += 1;
        }
    }
    let mut result = Vec::new();
    while remaining > 0 {
        let start = *out_edges.iter().find(|(_, v)| !v.is_empty()).unwrap().0;
        let mut lp = vec![start];
        let mut prev = start;
        let mut cur = out_edges.get_mut(&start).unwrap().remove(0);
        remaining -= 1;
        while cur != start {
            lp.push(cur);
            let outs = match out_edges.get_mut(&cur) {
                Some(o) if !o.is_empty() => o,
                _ => break,
            };
            let din = pool[cur] - pool[prev];
            let pick = (0..outs.len())
                .min_by(|&i, &j| {
                    let ang = |k: usize| {
                        let dout = pool[outs[k]] - pool[cur];
                        libm::atan2(din.cross(dout), din.dot(dout))
                    };
                    ang(i).total_cmp(&ang(j))
                })
                .unwrap();
            let next = outs.remove(pick);
            remaining -= 1;
            prev = cur;
            cur = next;
        }
        let mut pts: Vec<Point> = lp.iter().map(|&i| pool[i]).collect();
        drop_collinear(&mut pts, keep, eps);
        if pts.len() >= 3 {
            result.push(pts);
        }
    }
    result
}

/// Outer boundary plus optional convex holes.
#[derive(Debug, Clone)]
pub struct DomainShape {
    outer: Polygon,
    holes: Vec<Polygon>,
    parts: Vec<Vec<Point>>,
    single_convex: bool,
    diameter: f64,
}

impl DomainShape {
    pub fn new(outer: Polygon, holes: Vec<Polygon>) -> Result<Self> {
        let diameter = diameter(outer.vertices());
        let eps = DEGENERACY_REL * diameter;
        for (k, h) in holes.iter().enumerate() {
            if !h.is_convex() {
                return Err(Error::InvalidInput(format!("hole {k} is not convex")));
            }
            for &v in h.vertices() {
                if !outer.contains(v) || boundary_distance(v, outer.vertices()) <= eps {
                    return Err(Error::InvalidInput(format!(
                        "hole {k} is not strictly inside the outer boundary"
                    )));
                }
            }
        }
        let single_convex = holes.is_empty() && outer.is_convex();
        let mut parts = if outer.is_convex() {
            vec![outer.vertices().to_vec()]
        } else {
            triangulate(outer.vertices())
        };
        for h in &holes {
            parts = parts
                .iter()
                .flat_map(|p| subtract_convex(p, h.vertices(), eps))
                .collect();
        }
        Ok(DomainShape { outer, holes, parts, single_convex, diameter })
    }

    pub fn polygon(outer: Polygon) -> Self {
        DomainShape::new(outer, Vec::new()).expect("a domain without holes is always valid")
    }

    pub fn outer(&self) -> &Polygon {
        &self.outer
    }

    pub fn holes(&self) -> &[Polygon] {
        &self.holes
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Merge tolerance for this domain.
    pub fn tolerance(&self) -> f64 {
        DEGENERACY_REL * self.diameter
    }

    pub fn area(&self) -> f64 {
        self.outer.area() - self.holes.iter().map(Polygon::area).sum::<f64>()
    }

    pub fn bbox(&self) -> BBox {
        self.outer.bbox()
    }

    /// Strictly inside: away from every boundary by more than the tolerance.
    pub fn contains(&self, p: Point) -> bool {
        let eps = self.tolerance();
        self.outer.contains(p)
            && boundary_distance(p, self.outer.vertices()) > eps
            && self
                .holes
                .iter()
                .all(|h| !h.contains(p) && boundary_distance(p, h.vertices()) > eps)
    }

    /// Boundary segments: outer edges first, then the edges of each hole.
    /// The index of a segment is the boundary marker used by meshes.
    pub fn segments(&self) -> Vec<[Point; 2]> {
        let mut segs = Vec::new();
        for poly in core::iter::once(&self.outer).chain(self.holes.iter()) {
            let v = poly.vertices();
            for i in 0..v.len() {
                segs.push([v[i], v[(i + 1) % v.len()]]);
            }
        }
        segs
    }

    fn corner_points(&self) -> Vec<Point> {
        core::iter::once(&self.outer)
            .chain(self.holes.iter())
            .flat_map(|p| p.vertices().iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    Structured,
    Random,
}

/// Seed points of a tessellation.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSet {
    pub points: Vec<Point>,
    pub mode: SeedMode,
    pub rng_seed: u64,
}

impl SeedSet {
    /// Cell centres of an `nx x ny` grid over the domain bounding box,
    /// keeping those strictly inside the domain.
    pub fn structured(domain: &DomainShape, nx: usize, ny: usize) -> SeedSet {
        let bb = domain.bbox();
        let (w, h) = (bb.max.x - bb.min.x, bb.max.y - bb.min.y);
        let mut points = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let p = Point::new(
                    bb.min.x + w * (i as f64 + 0.5) / nx as f64,
                    bb.min.y + h * (j as f64 + 0.5) / ny as f64,
                );
                if domain.contains(p) {
                    points.push(p);
                }
            }
        }
        SeedSet { points, mode: SeedMode::Structured, rng_seed: 0 }
    }

    /// `n` uniformly random points strictly inside the domain.
    pub fn random(domain: &DomainShape, n: usize, rng_seed: u64) -> SeedSet {
        Self::random_stream(domain, n, rng_seed, 0)
    }

    pub(crate) fn random_stream(
        domain: &DomainShape,
        n: usize,
        rng_seed: u64,
        substream: u64,
    ) -> SeedSet {
        let bb = domain.bbox();
        let mut rng = Stream::new(rng_seed, substream);
        let min_gap = 1e-3 * domain.diameter() / libm::sqrt(n.max(1) as f64);
        let mut points: Vec<Point> = Vec::with_capacity(n);
        let mut attempts = 0usize;
        while points.len() < n && attempts < 10_000 * (n + 1) {
            attempts += 1;
            let p = Point::new(rng.range(bb.min.x, bb.max.x), rng.range(bb.min.y, bb.max.y));
            if domain.contains(p) && points.iter().all(|q| q.dist(p) > min_gap) {
                points.push(p);
            }
        }
        SeedSet { points, mode: SeedMode::Random, rng_seed }
    }
}

/// One Voronoi cell clipped to the domain. A seed whose clipped region is
/// disconnected owns several cells.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    pub polygon: Polygon,
    pub seed: usize,
}

fn cell_pieces(i: usize, seeds: &[Point], domain: &DomainShape, eps: f64) -> Result<Vec<Vec<Point>>> {
    let s = seeds[i];
    let mut others: Vec<(f64, usize)> = seeds
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, q)| (q.dist(s), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if let Some(&(d, j)) = others.first() {
        if d <= eps {
            return Err(Error::DuplicateSeed { first: i.min(j), second: i.max(j) });
        }
    }
    let mut pieces: Vec<Vec<Point>> = domain.parts.clone();
    let radius = |pieces: &[Vec<Point>]| {
        pieces
            .iter()
            .flat_map(|p| p.iter())
            .map(|v| v.dist(s))
            .fold(0.0, f64::max)
    };
    let mut r = radius(&pieces);
    for &(d, j) in &others {
        if d > 2.0 * r {
            break;
        }
        let hp = HalfPlane::bisector(s, seeds[j]);
        for p in pieces.iter_mut() {
            if p.len() >= 3 {
                *p = clip(p, hp);
            }
        }
        pieces.retain(|p| p.len() >= 3);
        r = radius(&pieces);
    }
    let min_area = AREA_REL * domain.diameter * domain.diameter;
    for p in pieces.iter_mut() {
        dedup_loop(p, eps);
    }
    pieces.retain(|p| p.len() >= 3 && signed_area(p) > min_area);
    Ok(pieces)
}

/// Domain clipped by perpendicular-bisector half-planes against all other
/// seeds, one or more polygons per seed, in seed order.
pub fn bounded_voronoi(seeds: &SeedSet, domain: &DomainShape) -> Result<Vec<VoronoiCell>> {
    if seeds.points.is_empty() {
        return Err(Error::InvalidInput("no seeds".into()));
    }
    let eps = domain.tolerance();
    let corners = domain.corner_points();
    let mut cells = Vec::with_capacity(seeds.points.len());
    for i in 0..seeds.points.len() {
        let pieces = cell_pieces(i, &seeds.points, domain, eps)?;
        if pieces.is_empty() {
            return Err(Error::DegenerateGeometry(format!("seed {i} has an empty cell")));
        }
        let loops = if domain.single_convex || pieces.len() == 1 {
            pieces
        } else {
            let merged = union_loops(&pieces, &corners, eps);
            if merged.iter().all(|l| signed_area(l) > 0.0) {
                merged
            } else {
                // the union encloses a hole: keep the convex pieces apart
                pieces
            }
        };
        for l in loops {
            let l = insert_points_on_edges(&l, &corners, eps);
            cells.push(VoronoiCell { polygon: Polygon::new(l)?, seed: i });
        }
    }
    Ok(cells)
}

/// Result of Lloyd smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydOutcome {
    pub seeds: SeedSet,
    /// Number of seed updates performed.
    pub iterations: usize,
    /// Coefficient of variation of per-seed cell areas, one entry per
    /// tessellation evaluated (initial one first).
    pub area_cv: Vec<f64>,
}

/// Per-seed cell area and centroid.
fn seed_moments(cells: &[VoronoiCell], n: usize) -> Vec<(f64, Point)> {
    let mut acc = vec![(0.0, Point::default()); n];
    for c in cells {
        let (a, cen, _) = c.polygon.area_centroid_diameter();
        acc[c.seed].0 += a;
        acc[c.seed].1 = acc[c.seed].1 + cen * a;
    }
    acc.into_iter()
        .map(|(a, m)| (a, if a > 0.0 { m * (1.0 / a) } else { m }))
        .collect()
}

fn coefficient_of_variation(areas: &[f64]) -> f64 {
    let n = areas.len() as f64;
    let mean = areas.iter().sum::<f64>() / n;
    let var = areas.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    libm::sqrt(var) / mean
}

/// Lloyd iteration: move every seed to its cell centroid until the area
/// coefficient of variation drops below `tol` or `max_iters` moves were made.
pub fn smooth_seeds(
    seeds: &SeedSet,
    domain: &DomainShape,
    max_iters: usize,
    tol: f64,
) -> Result<LloydOutcome> {
    let mut current = seeds.clone();
    let mut area_cv = Vec::new();
    let mut iterations = 0;
    loop {
        let cells = bounded_voronoi(&current, domain)?;
        let moments = seed_moments(&cells, current.points.len());
        let areas: Vec<f64> = moments.iter().map(|m| m.0).collect();
        let cv = coefficient_of_variation(&areas);
        area_cv.push(cv);
        if cv < tol || iterations >= max_iters {
            break;
        }
        let moved: Vec<Point> = current
            .points
            .iter()
            .zip(&moments)
            .map(|(&s, &(_, c))| if domain.contains(c) { c } else { s })
            .collect();
        if moved == current.points {
            break;
        }
        current.points = moved;
        iterations += 1;
    }
    Ok(LloydOutcome { seeds: current, iterations, area_cv })
}
