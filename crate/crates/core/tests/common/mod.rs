//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vemadapt_core::geometry::{DomainShape, Point, Polygon, SeedMode, SeedSet};
use vemadapt_core::mesh::Mesh;
use vemadapt_core::vem::{BoundaryTag, LoadCase, VectorFn};

pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }
}

/// Star-shaped polygon around `centre`, vertices in CCW order. Consecutive
/// angular gaps stay below pi so the polygon is star-shaped w.r.t. `centre`.
pub fn star_polygon(rng: &mut TestRng, centre: Point, n: usize, convex: bool) -> Vec<Point> {
    loop {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.range(0.0, 2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let gaps_ok = (0..n).all(|i| {
            let next = if i + 1 < n { angles[i + 1] } else { angles[0] + 2.0 * PI };
            let g = next - angles[i];
            g > 0.15 && g < 0.9 * PI
        });
        if !gaps_ok {
            continue;
        }
        let pts: Vec<Point> = angles
            .iter()
            .map(|&a| {
                let r = if convex { 1.0 } else { rng.range(0.4, 1.0) };
                Point::new(centre.x + r * a.cos(), centre.y + r * a.sin())
            })
            .collect();
        if Polygon::new(pts.clone()).is_ok() {
            return pts;
        }
    }
}

pub fn unit_square() -> DomainShape {
    DomainShape::polygon(Polygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap())
}

pub fn random_seeds(rng: &mut TestRng, n: usize) -> SeedSet {
    let points = (0..n).map(|_| Point::new(rng.range(0.02, 0.98), rng.range(0.02, 0.98))).collect();
    SeedSet { points, mode: SeedMode::Random, rng_seed: 0 }
}

pub fn random_voronoi_mesh(seed: u64, n: usize) -> Mesh {
    let domain = unit_square();
    Mesh::generate(&domain, &SeedSet::random(&domain, n, seed)).unwrap()
}

/// Every segment of `mesh` prescribed by `g`.
pub fn dirichlet_everywhere(mesh: &Mesh, g: VectorFn) -> LoadCase {
    LoadCase {
        body_force: None,
        tags: vec![BoundaryTag::displacement(g); mesh.segments().len()],
        point_constraints: vec![],
    }
}

pub fn affine_field(a: [f64; 6]) -> impl Fn(Point) -> [f64; 2] + Send + Sync + Clone {
    move |p| [a[0] + a[2] * p.x + a[4] * p.y, a[1] + a[3] * p.x + a[5] * p.y]
}

pub fn vector_fn(f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> VectorFn {
    Arc::new(f)
}

pub fn to_matrix(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Outward-normal boundary integral of each vertex hat function, computed
/// edge by edge: half of each adjacent edge's length times its normal.
pub fn hat_normal_integrals(pts: &[Point]) -> Vec<[f64; 2]> {
    let n = pts.len();
    let mut q = vec![[0.0; 2]; n];
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        // length times outward normal of a CCW edge
        let ln = [b.y - a.y, -(b.x - a.x)];
        for v in [i, (i + 1) % n] {
            q[v][0] += 0.5 * ln[0];
            q[v][1] += 0.5 * ln[1];
        }
    }
    q
}

pub fn shoelace(pts: &[Point]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| pts[i].x * pts[(i + 1) % n].y - pts[(i + 1) % n].x * pts[i].y).sum::<f64>()
}

/// Average gradient `G[i][j] = d u_i / d x_j` of nodal values over a polygon.
pub fn average_gradient(pts: &[Point], u: &[[f64; 2]]) -> [[f64; 2]; 2] {
    let q = hat_normal_integrals(pts);
    let area = shoelace(pts);
    let mut g = [[0.0; 2]; 2];
    for (a, qa) in q.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] += u[a][i] * qa[j] / area;
            }
        }
    }
    g
}
