//! Text mesh formats `POLY2` and `POLY3`.
//!
//! Both are whitespace-separated with `#` comments and 0-based indices.
//! Coordinates are printed with the shortest decimal representation that
//! round-trips the exact f64 bits, so write-read is the identity.
//!
//! ```text
//! POLY2                    POLY3
//! <V> <F>                  <V> <F> <C>
//! x y        (V lines)     x y z      (V lines)
//! n i1 .. in (F lines)     n i1 .. in (F lines)
//!                          m f1 .. fm (C lines)
//! ```
//!
//! `POLY3` face cycles carry no global orientation convention; per-cell
//! outward signs are resolved when the mesh is built.

use std::fmt::Write as _;

use nalgebra::{Point2, Point3};

use super::{Mesh2, Mesh3};
use crate::{Error, Result};

pub fn write_mesh2(mesh: &Mesh2) -> String {
    let mut out = String::new();
    out.push_str("POLY2\n");
    let _ = writeln!(out, "{} {}", mesh.num_vertices(), mesh.num_faces());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {}", v.x, v.y);
    }
    for f in &mesh.faces {
        let _ = write!(out, "{}", f.len());
        for &i in f {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

pub fn write_mesh3(mesh: &Mesh3) -> String {
    let mut out = String::new();
    out.push_str("POLY3\n");
    let _ = writeln!(out, "{} {} {}", mesh.num_vertices(), mesh.num_faces(), mesh.num_cells());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    for f in &mesh.faces {
        let _ = write!(out, "{}", f.len());
        for &i in f {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    for c in &mesh.cells {
        let _ = write!(out, "{}", c.len());
        for &(f, _) in c {
            let _ = write!(out, " {f}");
        }
        out.push('\n');
    }
    out
}

struct Tokens<'a> {
    inner: Box<dyn Iterator<Item = &'a str> + 'a>,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split_whitespace());
        Self { inner: Box::new(inner) }
    }

    fn next(&mut self) -> Result<&'a str> {
        self.inner.next().ok_or_else(|| Error::Parse("unexpected end of file".into()))
    }

    fn usize(&mut self) -> Result<usize> {
        let t = self.next()?;
        t.parse().map_err(|_| Error::Parse(format!("expected integer, got '{t}'")))
    }

    fn f64(&mut self) -> Result<f64> {
        let t = self.next()?;
        t.parse().map_err(|_| Error::Parse(format!("expected number, got '{t}'")))
    }
}

pub fn read_mesh2(text: &str) -> Result<Mesh2> {
    let mut tk = Tokens::new(text);
    let header = tk.next()?;
    if header != "POLY2" {
        return Err(Error::Parse(format!("expected POLY2 header, got '{header}'")));
    }
    let nv = tk.usize()?;
    let nf = tk.usize()?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        vertices.push(Point2::new(tk.f64()?, tk.f64()?));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let n = tk.usize()?;
        let mut cycle = Vec::with_capacity(n);
        for _ in 0..n {
            cycle.push(tk.usize()?);
        }
        faces.push(cycle);
    }
    Mesh2::build(vertices, faces)
}

pub fn read_mesh3(text: &str) -> Result<Mesh3> {
    let mut tk = Tokens::new(text);
    let header = tk.next()?;
    if header != "POLY3" {
        return Err(Error::Parse(format!("expected POLY3 header, got '{header}'")));
    }
    let nv = tk.usize()?;
    let nf = tk.usize()?;
    let nc = tk.usize()?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        vertices.push(Point3::new(tk.f64()?, tk.f64()?, tk.f64()?));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let n = tk.usize()?;
        let mut cycle = Vec::with_capacity(n);
        for _ in 0..n {
            cycle.push(tk.usize()?);
        }
        faces.push(cycle);
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let m = tk.usize()?;
        let mut fl = Vec::with_capacity(m);
        for _ in 0..m {
            fl.push(tk.usize()?);
        }
        cells.push(fl);
    }
    Mesh3::build(vertices, faces, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::mesh3::tests::two_stacked_cubes;

    #[test]
    fn mesh2_round_trip_is_identity() {
        let m = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 1e-17),
                Point2::new(0.3333333333333333, 0.9),
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let text = write_mesh2(&m);
        let back = read_mesh2(&text).unwrap();
        assert_eq!(m, back);
        assert_eq!(text, write_mesh2(&back));
    }

    #[test]
    fn mesh3_round_trip_is_identity() {
        let m = two_stacked_cubes();
        let back = read_mesh3(&write_mesh3(&m)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let text = "POLY2  # header\n3 1\n0 0\n1 0 # a vertex\n0 1\n3 0 1 2\n";
        let m = read_mesh2(text).unwrap();
        assert_eq!(m.num_faces(), 1);
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(read_mesh2("POLY3\n0 0 0\n").is_err());
    }
}
