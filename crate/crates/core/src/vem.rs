//! First-order virtual elements for plane-strain elasticity: element
//! projection and stiffness, global assembly with boundary conditions, solve.
//!
//! Degrees of freedom are interleaved per vertex: `[ux0, uy0, ux1, uy1, ...]`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{cholesky_in_place, cholesky_solve, Dense};
use crate::error::{Error, Result};
use crate::geometry::{polygon_area_centroid_diameter, Point};
use crate::mesh::Mesh;
use crate::sparse::{nested_dissection, solve_spd, CsrMatrix, SolveInfo};

/// Isotropic linear elastic material in plane strain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub young: f64,
    pub poisson: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl Material {
    pub fn new(young: f64, poisson: f64) -> Result<Self> {
        if !(young > 0.0) || !young.is_finite() {
            return Err(Error::InvalidInput(format!("Young's modulus {young} must be positive")));
        }
        if !(0.0..0.5).contains(&poisson) {
            return Err(Error::InvalidInput(format!("Poisson's ratio {poisson} outside [0, 0.5)")));
        }
        let mu = young / (2.0 * (1.0 + poisson));
        let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        Ok(Material { young, poisson, lambda, mu })
    }

    /// Constitutive matrix in Voigt form `[xx, yy, 2xy]`.
    pub fn voigt(&self) -> [[f64; 3]; 3] {
        let (l, m) = (self.lambda, self.mu);
        [[l + 2.0 * m, l, 0.0], [l, l + 2.0 * m, 0.0], [0.0, 0.0, m]]
    }
}

/// Per-element quantities needed for the projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
    /// Boundary integral of each vertex's hat function times the outward
    /// normal; exact for piecewise-linear edge traces.
    pub normal_weights: Vec<[f64; 2]>,
}

impl ElementGeometry {
    pub fn new(pts: &[Point]) -> Result<Self> {
        let (area, centroid, diameter) = polygon_area_centroid_diameter(pts)?;
        let n = pts.len();
        let normal_weights = (0..n)
            .map(|a| {
                let prev = pts[(a + n - 1) % n];
                let next = pts[(a + 1) % n];
                [0.5 * (next.y - prev.y), -0.5 * (next.x - prev.x)]
            })
            .collect();
        Ok(ElementGeometry { area, centroid, diameter, normal_weights })
    }

    pub fn n_vertices(&self) -> usize {
        self.normal_weights.len()
    }

    /// Average displacement gradient `g[i][j] = d u_i / d x_j`.
    pub fn gradient(&self, d: &[f64]) -> [[f64; 2]; 2] {
        let mut g = [[0.0; 2]; 2];
        for (a, q) in self.normal_weights.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    g[i][j] += d[2 * a + i] * q[j];
                }
            }
        }
        for row in g.iter_mut() {
            for v in row.iter_mut() {
                *v /= self.area;
            }
        }
        g
    }

    /// Projected (constant) strain, the symmetric part of [`Self::gradient`].
    pub fn strain(&self, d: &[f64]) -> [[f64; 2]; 2] {
        sym(self.gradient(d))
    }
}

pub fn sym(g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let off = 0.5 * (g[0][1] + g[1][0]);
    [[g[0][0], off], [off, g[1][1]]]
}

/// Projected strain and full average gradient of a nodal field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub strain: [[f64; 2]; 2],
    pub gradient: [[f64; 2]; 2],
}

pub fn element_projection(pts: &[Point], d: &[f64]) -> Result<Projection> {
    if d.len() != 2 * pts.len() {
        return Err(Error::InvalidInput(format!(
            "{} dofs for {} vertices",
            d.len(),
            pts.len()
        )));
    }
    let g = ElementGeometry::new(pts)?;
    let gradient = g.gradient(d);
    Ok(Projection { strain: sym(gradient), gradient })
}

/// Element stiffness split into consistency and stabilization parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub geometry: ElementGeometry,
    /// Strain-displacement rows `[xx, yy, 2xy]` of the projection, `3 x 2n`.
    pub projection: Dense,
    /// Nodal values of the six affine modes, `2n x 6`.
    pub affine: Dense,
    pub kc: Dense,
    pub ks: Dense,
}

impl ElementMatrices {
    pub fn k(&self) -> Dense {
        let mut k = self.kc.clone();
        k.data.iter_mut().zip(&self.ks.data).for_each(|(a, b)| *a += b);
        k
    }
}

pub fn element_stiffness(pts: &[Point], mat: &Material) -> Result<ElementMatrices> {
    let geometry = ElementGeometry::new(pts)?;
    let n = pts.len();
    let m = 2 * n;
    let mut b = Dense::zeros(3, m);
    for (a, q) in geometry.normal_weights.iter().enumerate() {
        let (qx, qy) = (q[0] / geometry.area, q[1] / geometry.area);
        b.set(0, 2 * a, qx);
        b.set(1, 2 * a + 1, qy);
        b.set(2, 2 * a, qy);
        b.set(2, 2 * a + 1, qx);
    }
    let c = mat.voigt();
    let mut kc = Dense::zeros(m, m);
    let mut cb = Dense::zeros(3, m);
    for r in 0..3 {
        for j in 0..m {
            cb.set(r, j, (0..3).map(|s| c[r][s] * b.get(s, j)).sum());
        }
    }
    for i in 0..m {
        for j in 0..m {
            let v: f64 = (0..3).map(|r| b.get(r, i) * cb.get(r, j)).sum();
            kc.set(i, j, geometry.area * v);
        }
    }

    let h = geometry.diameter;
    let mut d = Dense::zeros(m, 6);
    for (a, p) in pts.iter().enumerate() {
        let xi = (p.x - geometry.centroid.x) / h;
        let eta = (p.y - geometry.centroid.y) / h;
        for (col, v) in [1.0, 0.0, xi, 0.0, eta, 0.0].into_iter().enumerate() {
            d.set(2 * a, col, v);
        }
        for (col, v) in [0.0, 1.0, 0.0, xi, 0.0, eta].into_iter().enumerate() {
            d.set(2 * a + 1, col, v);
        }
    }
    let mut dtd = vec![0.0; 36];
    for i in 0..6 {
        for j in 0..6 {
            dtd[i * 6 + j] = (0..m).map(|r| d.get(r, i) * d.get(r, j)).sum();
        }
    }
    if !cholesky_in_place(&mut dtd, 6) {
        return Err(Error::DegenerateGeometry("affine modes are linearly dependent".into()));
    }
    // columns of (D^T D)^{-1} D^T
    let mut w = Dense::zeros(6, m);
    for r in 0..m {
        let mut col: Vec<f64> = (0..6).map(|i| d.get(r, i)).collect();
        cholesky_solve(&dtd, 6, &mut col);
        for i in 0..6 {
            w.set(i, r, col[i]);
        }
    }
    let mut ks = Dense::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let proj: f64 = (0..6).map(|k| d.get(i, k) * w.get(k, j)).sum();
            let id = if i == j { 1.0 } else { 0.0 };
            ks.set(i, j, mat.mu * (id - proj));
        }
    }
    // symmetrize away rounding
    for i in 0..m {
        for j in i + 1..m {
            let avg = 0.5 * (ks.get(i, j) + ks.get(j, i));
            ks.set(i, j, avg);
            ks.set(j, i, avg);
        }
    }
    Ok(ElementMatrices { geometry, projection: b, affine: d, kc, ks })
}

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

pub fn constant(v: f64) -> ScalarFn {
    Arc::new(move |_| v)
}

pub fn constant_vector(v: [f64; 2]) -> VectorFn {
    Arc::new(move |_| v)
}

/// Conditions on one domain boundary segment. A fixed component takes
/// precedence over a traction on the same component.
#[derive(Clone, Default)]
pub struct BoundaryTag {
    /// Prescribed displacement per component (m).
    pub fixed: [Option<ScalarFn>; 2],
    /// Prescribed traction (N/m).
    pub traction: Option<VectorFn>,
}

impl core::fmt::Debug for BoundaryTag {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BoundaryTag")
            .field("fixed_x", &self.fixed[0].is_some())
            .field("fixed_y", &self.fixed[1].is_some())
            .field("traction", &self.traction.is_some())
            .finish()
    }
}

impl BoundaryTag {
    pub fn free() -> Self {
        BoundaryTag::default()
    }

    pub fn fixed_x(v: f64) -> Self {
        BoundaryTag { fixed: [Some(constant(v)), None], traction: None }
    }

    pub fn fixed_y(v: f64) -> Self {
        BoundaryTag { fixed: [None, Some(constant(v))], traction: None }
    }

    pub fn clamped() -> Self {
        BoundaryTag { fixed: [Some(constant(0.0)), Some(constant(0.0))], traction: None }
    }

    pub fn traction(t: [f64; 2]) -> Self {
        BoundaryTag { fixed: [None, None], traction: Some(constant_vector(t)) }
    }

    /// Every component prescribed by `g`.
    pub fn displacement(g: VectorFn) -> Self {
        let gx = g.clone();
        BoundaryTag {
            fixed: [Some(Arc::new(move |p| gx(p)[0])), Some(Arc::new(move |p| g(p)[1]))],
            traction: None,
        }
    }
}

/// Displacement constraint on the mesh vertex located at `at`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointConstraint {
    pub at: Point,
    pub fixed: [Option<f64>; 2],
}

/// Loads and boundary conditions. `tags[s]` applies to boundary segment `s`.
#[derive(Clone, Default)]
pub struct LoadCase {
    pub body_force: Option<VectorFn>,
    pub tags: Vec<BoundaryTag>,
    pub point_constraints: Vec<PointConstraint>,
}

/// Nodal displacements of a solved system.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub displacement: Vec<f64>,
    pub info: Option<SolveInfo>,
}

impl Solution {
    pub fn node(&self, v: usize) -> [f64; 2] {
        [self.displacement[2 * v], self.displacement[2 * v + 1]]
    }

    pub fn element_dofs(&self, mesh: &Mesh, e: usize) -> Vec<f64> {
        mesh.element(e)
            .iter()
            .flat_map(|&v| [self.displacement[2 * v], self.displacement[2 * v + 1]])
            .collect()
    }

    /// Nodal interpolant of a displacement field.
    pub fn interpolate(mesh: &Mesh, u: impl Fn(Point) -> [f64; 2]) -> Solution {
        let displacement = mesh.vertices().iter().flat_map(|&p| u(p)).collect();
        Solution { displacement, info: None }
    }

    pub fn scaled(&self, alpha: f64) -> Solution {
        Solution {
            displacement: self.displacement.iter().map(|v| v * alpha).collect(),
            info: self.info,
        }
    }
}

/// Constrained global system after eliminating prescribed components.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Free-system index of each global dof, or `None` when prescribed.
    pub free_index: Vec<Option<usize>>,
    /// Prescribed value of each global dof.
    pub prescribed: Vec<Option<f64>>,
    /// Fill-reducing elimination order over free indices.
    pub order: Vec<usize>,
}

fn prescribed_values(mesh: &Mesh, loads: &LoadCase) -> Result<Vec<Option<f64>>> {
    let nv = mesh.n_vertices();
    let mut fixed: Vec<Option<f64>> = vec![None; 2 * nv];
    for b in mesh.boundary_edges() {
        let Some(tag) = loads.tags.get(b.marker) else { continue };
        let (v, w) = mesh.edge_vertices(b);
        for c in 0..2 {
            if let Some(g) = &tag.fixed[c] {
                for node in [v, w] {
                    if fixed[2 * node + c].is_none() {
                        fixed[2 * node + c] = Some(g(mesh.vertices()[node]));
                    }
                }
            }
        }
    }
    for pc in &loads.point_constraints {
        let node = mesh
            .vertices()
            .iter()
            .position(|p| p.dist(pc.at) <= 1e3 * mesh.tolerance())
            .ok_or_else(|| {
                Error::InvalidInput(format!("no mesh vertex at ({}, {})", pc.at.x, pc.at.y))
            })?;
        for c in 0..2 {
            if let Some(g) = pc.fixed[c] {
                fixed[2 * node + c] = Some(g);
            }
        }
    }
    Ok(fixed)
}

/// Assembled nodal load vector from tractions and body forces (no
/// boundary-condition elimination).
pub fn load_vector(mesh: &Mesh, loads: &LoadCase) -> Vec<f64> {
    let mut f = vec![0.0; 2 * mesh.n_vertices()];
    for b in mesh.boundary_edges() {
        let Some(tag) = loads.tags.get(b.marker) else { continue };
        let Some(t) = &tag.traction else { continue };
        let (v, w) = mesh.edge_vertices(b);
        let (pv, pw) = (mesh.vertices()[v], mesh.vertices()[w]);
        let len = pv.dist(pw);
        let (tv, tw) = (t(pv), t(pw));
        for c in 0..2 {
            f[2 * v + c] += len / 6.0 * (2.0 * tv[c] + tw[c]);
            f[2 * w + c] += len / 6.0 * (tv[c] + 2.0 * tw[c]);
        }
    }
    if let Some(bf) = &loads.body_force {
        for e in 0..mesh.n_elements() {
            let (area, _, _) = mesh.element_geometry(e);
            let lp = mesh.element(e);
            let wgt = area / lp.len() as f64;
            for &v in lp {
                let val = bf(mesh.vertices()[v]);
                f[2 * v] += wgt * val[0];
                f[2 * v + 1] += wgt * val[1];
            }
        }
    }
    f
}

/// Node adjacency through shared elements (each node includes itself).
pub fn node_graph(mesh: &Mesh) -> Vec<Vec<usize>> {
    (0..mesh.n_vertices())
        .map(|v| {
            let mut adj: Vec<usize> = mesh
                .vertex_elements(v)
                .iter()
                .flat_map(|&e| mesh.element(e).iter().copied())
                .collect();
            adj.sort_unstable();
            adj.dedup();
            adj
        })
        .collect()
}

pub fn assemble(mesh: &Mesh, mat: &Material, loads: &LoadCase) -> Result<LinearSystem> {
    let nv = mesh.n_vertices();
    let prescribed = prescribed_values(mesh, loads)?;
    let graph = node_graph(mesh);
    let node_order = nested_dissection(mesh.vertices(), &graph);
    let mut free_index = vec![None; 2 * nv];
    let mut order = Vec::new();
    let mut count = 0;
    for dof in 0..2 * nv {
        if prescribed[dof].is_none() {
            free_index[dof] = Some(count);
            count += 1;
        }
    }
    for &v in &node_order {
        for c in 0..2 {
            if let Some(i) = free_index[2 * v + c] {
                order.push(i);
            }
        }
    }
    if count == 0 {
        return Err(Error::InvalidInput("every degree of freedom is prescribed".into()));
    }
    let mut rows = vec![Vec::new(); count];
    for v in 0..nv {
        for c in 0..2 {
            let Some(i) = free_index[2 * v + c] else { continue };
            rows[i] = graph[v]
                .iter()
                .flat_map(|&w| [free_index[2 * w], free_index[2 * w + 1]])
                .flatten()
                .collect();
        }
    }
    let mut matrix = CsrMatrix::from_pattern(rows);
    let full_load = load_vector(mesh, loads);
    let mut rhs = vec![0.0; count];
    for dof in 0..2 * nv {
        if let Some(i) = free_index[dof] {
            rhs[i] = full_load[dof];
        }
    }
    for e in 0..mesh.n_elements() {
        let em = element_stiffness(&mesh.element_points(e), mat)?;
        let k = em.k();
        let dofs: Vec<usize> = mesh.element(e).iter().flat_map(|&v| [2 * v, 2 * v + 1]).collect();
        for (a, &ga) in dofs.iter().enumerate() {
            let Some(i) = free_index[ga] else { continue };
            for (b, &gb) in dofs.iter().enumerate() {
                match free_index[gb] {
                    Some(j) => matrix.add(i, j, k.get(a, b)),
                    None => rhs[i] -= k.get(a, b) * prescribed[gb].unwrap_or(0.0),
                }
            }
        }
    }
    Ok(LinearSystem { matrix, rhs, free_index, prescribed, order })
}

impl LinearSystem {
    pub fn solve(&self) -> Result<Solution> {
        let (x, info) = solve_spd(&self.matrix, &self.rhs, &self.order)?;
        let displacement = self
            .free_index
            .iter()
            .zip(&self.prescribed)
            .map(|(fi, g)| match fi {
                Some(i) => x[*i],
                None => g.unwrap_or(0.0),
            })
            .collect();
        Ok(Solution { displacement, info: Some(info) })
    }
}

pub fn assemble_and_solve(mesh: &Mesh, mat: &Material, loads: &LoadCase) -> Result<Solution> {
    assemble(mesh, mat, loads)?.solve()
}

/// `Ks^E d^E` for every element.
pub fn stabilization_residuals(mesh: &Mesh, mat: &Material, sol: &Solution) -> Result<Vec<f64>> {
    (0..mesh.n_elements())
        .map(|e| {
            let em = element_stiffness(&mesh.element_points(e), mat)?;
            let r = em.ks.mul_vec(&sol.element_dofs(mesh, e));
            Ok(libm::sqrt(r.iter().map(|v| v * v).sum()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::rectangle_grid;

    fn square() -> Vec<Point> {
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)]
    }

    fn hexagon() -> Vec<Point> {
        (0..6)
            .map(|k| {
                let t = core::f64::consts::PI / 3.0 * k as f64 + 0.2;
                Point::new(1.0 + libm::cos(t) * (1.0 + 0.1 * k as f64), 2.0 + libm::sin(t))
            })
            .collect()
    }

    fn sample(pts: &[Point], u: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        pts.iter().flat_map(|&p| u(p)).collect()
    }

    #[test]
    fn projection_reproduces_linear_fields() {
        for pts in [square(), hexagon()] {
            let p = element_projection(&pts, &sample(&pts, |q| [q.x, 0.0])).unwrap();
            assert!((p.strain[0][0] - 1.0).abs() < 1e-14);
            assert!(p.strain[0][1].abs() < 1e-14 && p.strain[1][1].abs() < 1e-14);
            let r = element_projection(&pts, &sample(&pts, |q| [-q.y, q.x])).unwrap();
            assert!(r.strain.iter().flatten().all(|v| v.abs() < 1e-14));
            assert!((r.gradient[0][1] + 1.0).abs() < 1e-14 && (r.gradient[1][0] - 1.0).abs() < 1e-14);
        }
    }

    /// Edgewise trapezoid integration of the linear trace of `d` against the
    /// outward normal, divided by the area.
    fn edge_quadrature_gradient(pts: &[Point], d: &[f64]) -> [[f64; 2]; 2] {
        let n = pts.len();
        let mut g = [[0.0; 2]; 2];
        for a in 0..n {
            let b = (a + 1) % n;
            let (p, q) = (pts[a], pts[b]);
            // outward normal times edge length
            let nl = [q.y - p.y, p.x - q.x];
            for i in 0..2 {
                let mean = 0.5 * (d[2 * a + i] + d[2 * b + i]);
                for j in 0..2 {
                    g[i][j] += mean * nl[j];
                }
            }
        }
        let area = crate::geometry::signed_area(pts);
        g.map(|row| row.map(|v| v / area))
    }

    #[test]
    fn projection_of_quadratic_matches_edge_quadrature() {
        for pts in [square(), hexagon()] {
            let d = sample(&pts, |q| [q.x * q.x, q.x * q.y + q.y * q.y * q.y]);
            let p = element_projection(&pts, &d).unwrap();
            let g = edge_quadrature_gradient(&pts, &d);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((p.gradient[i][j] - g[i][j]).abs() < 1e-13);
                }
            }
            assert!((p.strain[0][1] - 0.5 * (g[0][1] + g[1][0])).abs() < 1e-13);
        }
        let pts = square();
        let p = element_projection(&pts, &sample(&pts, |q| [q.x * q.x, 0.0])).unwrap();
        assert!((p.strain[0][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn material_lame_parameters() {
        let m = Material::new(1.0, 0.3).unwrap();
        assert!((m.mu - 1.0 / 2.6).abs() < 1e-15);
        assert!((m.lambda - 0.3 / (1.3 * 0.4)).abs() < 1e-15);
        assert!(Material::new(1.0, 0.5).is_err());
        assert!(Material::new(0.0, 0.3).is_err());
    }

    #[test]
    fn stiffness_kills_rigid_modes() {
        let mat = Material::new(1.0, 0.3).unwrap();
        for pts in [square(), hexagon()] {
            let em = element_stiffness(&pts, &mat).unwrap();
            let k = em.k();
            for u in [
                sample(&pts, |_| [1.0, 0.0]),
                sample(&pts, |_| [0.0, 1.0]),
                sample(&pts, |q| [-q.y, q.x]),
            ] {
                assert!(k.mul_vec(&u).iter().all(|v| v.abs() < 1e-12));
            }
            let affine = sample(&pts, |q| [0.3 * q.x - 0.2 * q.y + 1.0, 0.7 * q.y + 0.1 * q.x]);
            assert!(em.ks.mul_vec(&affine).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn uniaxial_patch() {
        let mesh = rectangle_grid(0.0, 0.0, 2.0, 1.0, 4, 3).unwrap();
        let mat = Material::new(1.0, 0.0).unwrap();
        let q = 0.25;
        let mut tags = vec![BoundaryTag::free(); 4];
        tags[0] = BoundaryTag::fixed_y(0.0);
        tags[1] = BoundaryTag::traction([q, 0.0]);
        tags[3] = BoundaryTag::fixed_x(0.0);
        let loads = LoadCase { body_force: None, tags, point_constraints: vec![] };
        let sol = assemble_and_solve(&mesh, &mat, &loads).unwrap();
        for (v, p) in mesh.vertices().iter().enumerate() {
            assert!((sol.node(v)[0] - p.x * q).abs() < 1e-12);
            assert!(sol.node(v)[1].abs() < 1e-12);
        }
    }

    #[test]
    fn unconstrained_system_is_singular() {
        let mesh = rectangle_grid(0.0, 0.0, 1.0, 1.0, 3, 3).unwrap();
        let mat = Material::new(1.0, 0.3).unwrap();
        let mut tags = vec![BoundaryTag::free(); 4];
        tags[1] = BoundaryTag::traction([1.0, 0.0]);
        tags[3] = BoundaryTag::traction([-1.0, 0.0]);
        // self-equilibrated loads, no displacement constraint
        let loads = LoadCase { body_force: None, tags, point_constraints: vec![] };
        assert_eq!(assemble_and_solve(&mesh, &mat, &loads), Err(Error::SingularSystem));
    }
}
