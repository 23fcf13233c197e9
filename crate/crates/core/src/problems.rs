//! Benchmark problem catalog.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{DomainShape, Point, Polygon, SeedSet};
use crate::mesh::{Mesh, MeshMode};
use crate::metrics::AnalyticSolution;
use crate::vem::{BoundaryTag, LoadCase, Material, PointConstraint};

/// Young's modulus used by every catalog problem (Pa).
pub const YOUNG: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProblemId {
    /// Plate with a central square hole under an edge traction.
    A1,
    /// Plate with a notch, top edge pulled by a prescribed displacement.
    B4,
    /// Block indented by a punch load on the top edge.
    C5,
    /// Unit square with a smooth divergence-free closed-form solution.
    Manufactured,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] = [ProblemId::A1, ProblemId::B4, ProblemId::C5, ProblemId::Manufactured];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::A1 => "A1",
            ProblemId::B4 => "B4",
            ProblemId::C5 => "C5",
            ProblemId::Manufactured => "MS",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A1" | "A(1)" => Ok(ProblemId::A1),
            "B4" | "B(4)" => Ok(ProblemId::B4),
            "C5" | "C(5)" => Ok(ProblemId::C5),
            "MS" | "MANUFACTURED" => Ok(ProblemId::Manufactured),
            _ => Err(Error::InvalidInput(format!("unknown problem '{s}'"))),
        }
    }
}

/// A complete boundary value problem with its initial mesh resolution.
#[derive(Clone)]
pub struct Problem {
    pub id: ProblemId,
    pub name: String,
    pub domain: DomainShape,
    pub loads: LoadCase,
    pub material: Material,
    /// Seed grid for structured initial meshes.
    pub structured_grid: (usize, usize),
    /// Seed count for Voronoi initial meshes.
    pub voronoi_seeds: usize,
    /// Closed-form solution, when one is known.
    pub exact: Option<AnalyticSolution>,
}

impl core::fmt::Debug for Problem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("material", &self.material)
            .field("structured_grid", &self.structured_grid)
            .field("voronoi_seeds", &self.voronoi_seeds)
            .finish()
    }
}

impl Problem {
    pub fn initial_mesh(&self, mode: MeshMode, rng_seed: u64) -> Result<Mesh> {
        let seeds = match mode {
            MeshMode::Structured => {
                SeedSet::structured(&self.domain, self.structured_grid.0, self.structured_grid.1)
            }
            MeshMode::Voronoi => SeedSet::random(&self.domain, self.voronoi_seeds, rng_seed),
        };
        Mesh::generate(&self.domain, &seeds)
    }
}

fn poly(pts: &[(f64, f64)]) -> Polygon {
    Polygon::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).expect("catalog polygon")
}

pub fn problem(id: ProblemId, nu: f64) -> Result<Problem> {
    let material = Material::new(YOUNG, nu)?;
    Ok(match id {
        ProblemId::A1 => plate_with_hole(material),
        ProblemId::B4 => plate_with_notch(material),
        ProblemId::C5 => punch(material),
        ProblemId::Manufactured => manufactured(material),
    })
}

/// Side of the central square hole of the A1 plate (m).
pub const HOLE_SIDE: f64 = 0.3;
/// Edge traction on the A1 plate (N/m).
pub const PLATE_TRACTION: f64 = 0.2;
/// Prescribed top-edge displacement of the B4 plate (m).
pub const NOTCH_PULL: f64 = 0.5;
/// Punch load intensity on C5 (N/m).
pub const PUNCH_LOAD: f64 = 0.675;

/// Unit plate with a centred square hole. Left edge fixed horizontally,
/// bottom-left corner pinned, downward traction on the right edge.
fn plate_with_hole(material: Material) -> Problem {
    let outer = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
    let (a, b) = (0.5 - HOLE_SIDE / 2.0, 0.5 + HOLE_SIDE / 2.0);
    let hole = poly(&[(a, a), (b, a), (b, b), (a, b)]);
    let domain = DomainShape::new(outer, vec![hole]).expect("catalog domain");
    // segments: bottom, right, top, left, then the four hole sides
    let mut tags = vec![BoundaryTag::free(); 8];
    tags[1] = BoundaryTag::traction([0.0, -PLATE_TRACTION]);
    tags[3] = BoundaryTag::fixed_x(0.0);
    Problem {
        id: ProblemId::A1,
        name: "A1".into(),
        domain,
        loads: LoadCase {
            body_force: None,
            tags,
            point_constraints: vec![PointConstraint {
                at: Point::new(0.0, 0.0),
                fixed: [Some(0.0), Some(0.0)],
            }],
        },
        material,
        structured_grid: (8, 8),
        voronoi_seeds: 64,
        exact: None,
    }
}

/// Unit plate with a 0.6 x 0.2 notch cut in from the right edge at
/// mid-height. Bottom on rollers, left edge fixed horizontally,
/// bottom-left corner pinned, top edge pulled up.
fn plate_with_notch(material: Material) -> Problem {
    let outer = poly(&[
        (0.0, 0.0),
        (1.0, 0.0),
        (1.0, 0.4),
        (0.4, 0.4),
        (0.4, 0.6),
        (1.0, 0.6),
        (1.0, 1.0),
        (0.0, 1.0),
    ]);
    let domain = DomainShape::polygon(outer);
    let mut tags = vec![BoundaryTag::free(); 8];
    tags[0] = BoundaryTag::fixed_y(0.0);
    tags[6] = BoundaryTag::fixed_y(NOTCH_PULL);
    tags[7] = BoundaryTag::fixed_x(0.0);
    Problem {
        id: ProblemId::B4,
        name: "B4".into(),
        domain,
        loads: LoadCase {
            body_force: None,
            tags,
            point_constraints: vec![PointConstraint {
                at: Point::new(0.0, 0.0),
                fixed: [Some(0.0), Some(0.0)],
            }],
        },
        material,
        structured_grid: (10, 10),
        voronoi_seeds: 64,
        exact: None,
    }
}

/// Unit block with a distributed punch load over the middle fifth of the
/// top edge. Bottom on rollers with its midpoint pinned, top edge fixed
/// horizontally.
fn punch(material: Material) -> Problem {
    let outer = poly(&[
        (0.0, 0.0),
        (0.5, 0.0),
        (1.0, 0.0),
        (1.0, 1.0),
        (0.6, 1.0),
        (0.4, 1.0),
        (0.0, 1.0),
    ]);
    let domain = DomainShape::polygon(outer);
    let mut tags = vec![BoundaryTag::free(); 7];
    tags[0] = BoundaryTag::fixed_y(0.0);
    tags[1] = BoundaryTag::fixed_y(0.0);
    tags[3] = BoundaryTag::fixed_x(0.0);
    tags[4] = BoundaryTag {
        fixed: [Some(crate::vem::constant(0.0)), None],
        traction: Some(crate::vem::constant_vector([0.0, -PUNCH_LOAD])),
    };
    tags[5] = BoundaryTag::fixed_x(0.0);
    Problem {
        id: ProblemId::C5,
        name: "C5".into(),
        domain,
        loads: LoadCase {
            body_force: None,
            tags,
            point_constraints: vec![PointConstraint {
                at: Point::new(0.5, 0.0),
                fixed: [Some(0.0), Some(0.0)],
            }],
        },
        material,
        structured_grid: (10, 10),
        voronoi_seeds: 64,
        exact: None,
    }
}

/// Displacement derived from the stream function `sin^2(pi x) sin^2(pi y)`.
pub fn manufactured_displacement(p: Point) -> [f64; 2] {
    let (sx, sy) = (libm::sin(PI * p.x), libm::sin(PI * p.y));
    [PI * sx * sx * libm::sin(2.0 * PI * p.y), -PI * libm::sin(2.0 * PI * p.x) * sy * sy]
}

pub fn manufactured_gradient(p: Point) -> [[f64; 2]; 2] {
    let (sx, sy) = (libm::sin(PI * p.x), libm::sin(PI * p.y));
    let (s2x, s2y) = (libm::sin(2.0 * PI * p.x), libm::sin(2.0 * PI * p.y));
    let (c2x, c2y) = (libm::cos(2.0 * PI * p.x), libm::cos(2.0 * PI * p.y));
    let pi2 = PI * PI;
    [
        [pi2 * s2x * s2y, 2.0 * pi2 * sx * sx * c2y],
        [-2.0 * pi2 * c2x * sy * sy, -pi2 * s2x * s2y],
    ]
}

/// Divergence-free field, so the body force is `-mu * laplacian(u)` for
/// every Poisson's ratio.
fn manufactured(material: Material) -> Problem {
    let domain = DomainShape::polygon(poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]));
    let mu = material.mu;
    let pi3 = PI * PI * PI;
    let body = move |p: Point| {
        let (s2x, s2y) = (libm::sin(2.0 * PI * p.x), libm::sin(2.0 * PI * p.y));
        let (c2x, c2y) = (libm::cos(2.0 * PI * p.x), libm::cos(2.0 * PI * p.y));
        let lap_x = 2.0 * pi3 * s2y * (2.0 * c2x - 1.0);
        let lap_y = -2.0 * pi3 * s2x * (2.0 * c2y - 1.0);
        [-mu * lap_x, -mu * lap_y]
    };
    let tags = vec![BoundaryTag::displacement(Arc::new(manufactured_displacement)); 4];
    Problem {
        id: ProblemId::Manufactured,
        name: "MS".into(),
        domain,
        loads: LoadCase { body_force: Some(Arc::new(body)), tags, point_constraints: Vec::new() },
        material,
        structured_grid: (8, 8),
        voronoi_seeds: 64,
        exact: Some(AnalyticSolution {
            displacement: Arc::new(manufactured_displacement),
            gradient: Arc::new(manufactured_gradient),
        }),
    }
}
