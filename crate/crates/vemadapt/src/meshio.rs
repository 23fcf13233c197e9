//! Text mesh format.
//!
//! ```text
//! vemadapt-mesh 1
//! vertices 4
//! 0 0
//! 1 0
//! 1 1
//! 0 1
//! elements 1
//! 4 0 1 2 3
//! segments 4
//! 0 0 1 0
//! ...
//! boundary 4
//! 0 0 0
//! ...
//! end
//! ```
//!
//! Element lines start with the loop length followed by CCW vertex indices.
//! Boundary lines are `element local_edge segment`, where edge `i` joins
//! loop positions `i` and `i + 1`. Coordinates use the shortest decimal
//! form that parses back to the same `f64`, so a write/read cycle is exact.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use vemadapt_core::geometry::Point;
use vemadapt_core::mesh::{BoundaryEdge, Mesh};

pub const MESH_HEADER: &str = "vemadapt-mesh 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for FormatError {}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    writeln!(s, "{MESH_HEADER}").unwrap();
    writeln!(s, "vertices {}", mesh.n_vertices()).unwrap();
    for p in mesh.vertices() {
        writeln!(s, "{} {}", p.x, p.y).unwrap();
    }
    writeln!(s, "elements {}", mesh.n_elements()).unwrap();
    for lp in mesh.elements() {
        write!(s, "{}", lp.len()).unwrap();
        for v in lp {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "segments {}", mesh.segments().len()).unwrap();
    for [a, b] in mesh.segments() {
        writeln!(s, "{} {} {} {}", a.x, a.y, b.x, b.y).unwrap();
    }
    writeln!(s, "boundary {}", mesh.boundary_edges().len()).unwrap();
    for b in mesh.boundary_edges() {
        writeln!(s, "{} {} {}", b.element, b.local_edge, b.marker).unwrap();
    }
    s.push_str("end\n");
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str, FormatError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim())
            }
            None => Err(FormatError { line: self.line + 1, message: "unexpected end of file".into() }),
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, FormatError> {
        Err(FormatError { line: self.line, message: message.into() })
    }

    fn section(&mut self, name: &str) -> Result<usize, FormatError> {
        let l = self.next()?;
        match l.split_once(' ') {
            Some((n, count)) if n == name => match count.trim().parse() {
                Ok(c) => Ok(c),
                Err(_) => self.fail(format!("invalid {name} count '{count}'")),
            },
            _ => self.fail(format!("expected '{name} <count>', found '{l}'")),
        }
    }

    fn numbers<T: std::str::FromStr>(&mut self, expected: Option<usize>) -> Result<Vec<T>, FormatError> {
        let l = self.next()?;
        let mut out = Vec::new();
        for tok in l.split_whitespace() {
            match tok.parse() {
                Ok(v) => out.push(v),
                Err(_) => return self.fail(format!("invalid number '{tok}'")),
            }
        }
        if let Some(n) = expected {
            if out.len() != n {
                return self.fail(format!("expected {n} values, found {}", out.len()));
            }
        }
        Ok(out)
    }
}

pub fn read_mesh(text: &str) -> Result<Mesh, FormatError> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    let header = lines.next()?;
    if header != MESH_HEADER {
        return lines.fail(format!("expected header '{MESH_HEADER}', found '{header}'"));
    }
    let nv = lines.section("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let xy: Vec<f64> = lines.numbers(Some(2))?;
        vertices.push(Point::new(xy[0], xy[1]));
    }
    let ne = lines.section("elements")?;
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let row: Vec<usize> = lines.numbers(None)?;
        if row.is_empty() || row.len() != row[0] + 1 {
            return lines.fail("element line length does not match its vertex count");
        }
        elements.push(row[1..].to_vec());
    }
    let ns = lines.section("segments")?;
    let mut segments = Vec::with_capacity(ns);
    for _ in 0..ns {
        let c: Vec<f64> = lines.numbers(Some(4))?;
        segments.push([Point::new(c[0], c[1]), Point::new(c[2], c[3])]);
    }
    let nb = lines.section("boundary")?;
    let boundary_line = lines.line;
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let b: Vec<usize> = lines.numbers(Some(3))?;
        boundary.push(BoundaryEdge { element: b[0], local_edge: b[1], marker: b[2] });
    }
    if lines.next()? != "end" {
        return lines.fail("expected 'end'");
    }
    let mesh = Mesh::from_parts(vertices, elements, segments)
        .map_err(|e| FormatError { line: lines.line, message: format!("invalid mesh: {e}") })?;
    if mesh.boundary_edges() != boundary.as_slice() {
        return Err(FormatError {
            line: boundary_line,
            message: "boundary section disagrees with the element loops and segments".into(),
        });
    }
    Ok(mesh)
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> std::io::Result<()> {
    fs::write(path, write_mesh(mesh))
}

pub fn load_mesh(path: &Path) -> anyhow::Result<Mesh> {
    let text = fs::read_to_string(path)?;
    Ok(read_mesh(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use vemadapt_core::mesh::rectangle_grid;

    #[test]
    fn unit_square_text() {
        let m = rectangle_grid(0.0, 0.0, 1.0, 1.0, 1, 1).unwrap();
        let text = write_mesh(&m);
        assert!(text.starts_with("vemadapt-mesh 1\nvertices 4\n"));
        assert_eq!(read_mesh(&text).unwrap(), m);
    }

    #[test]
    fn rejects_tampered_boundary() {
        let m = rectangle_grid(0.0, 0.0, 1.0, 1.0, 2, 1).unwrap();
        let text = write_mesh(&m);
        let pos = text.find("boundary").unwrap();
        let (head, tail) = text.split_at(pos);
        let mut rows: Vec<&str> = tail.lines().collect();
        let swapped = rows[1].rsplit_once(' ').map(|(a, _)| format!("{a} 99")).unwrap();
        rows[1] = &swapped;
        let bad = format!("{head}{}\n", rows.join("\n"));
        let e = read_mesh(&bad).unwrap_err();
        assert!(e.message.contains("boundary"), "{e}");
    }

    #[test]
    fn reports_line_of_bad_number() {
        let m = rectangle_grid(0.0, 0.0, 1.0, 1.0, 1, 1).unwrap();
        let bad = write_mesh(&m).replacen("1 0\n", "1 zero\n", 1);
        assert_eq!(read_mesh(&bad).unwrap_err().line, 4);
        assert_eq!(read_mesh("nonsense").unwrap_err().line, 1);
    }
}
