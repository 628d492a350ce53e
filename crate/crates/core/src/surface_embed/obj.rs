//! Wavefront OBJ output for grid surfaces.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::frame::FrameField;

/// Writes `ns·nt` vertices in row-major order and two triangles per grid
/// cell, split along the `(i, j) → (i+1, j+1)` diagonal. Indices are 1-based.
pub fn write_obj<W: Write>(frame: &FrameField, mut w: W) -> std::io::Result<()> {
    let g = frame.grid();
    for p in frame.positions() {
        writeln!(w, "v {} {} {}", p[0], p[1], p[2])?;
    }
    for i in 0..g.ns() - 1 {
        for j in 0..g.nt() - 1 {
            let a = g.index(i, j) + 1;
            let b = g.index(i + 1, j) + 1;
            let c = g.index(i + 1, j + 1) + 1;
            let d = g.index(i, j + 1) + 1;
            writeln!(w, "f {a} {b} {c}")?;
            writeln!(w, "f {a} {c} {d}")?;
        }
    }
    Ok(())
}

pub fn export_obj(frame: &FrameField, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    write_obj(frame, &mut w)?;
    w.flush()?;
    Ok(())
}

/// A parsed mesh: vertices and 1-based triangle indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

/// Reads `v` and triangular `f` lines; everything else is ignored.
pub fn read_obj<R: BufRead>(r: R) -> Result<ObjMesh> {
    let mut mesh = ObjMesh::default();
    let bad = |n: usize, line: &str| Error::Io(format!("malformed OBJ line {}: {line}", n + 1));
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let v: Vec<f64> = parts
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(n, &line))?;
                if v.len() < 3 {
                    return Err(bad(n, &line));
                }
                mesh.vertices.push([v[0], v[1], v[2]]);
            }
            Some("f") => {
                let f: Vec<usize> = parts
                    .map(|p| p.split('/').next().unwrap_or("").parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(n, &line))?;
                if f.len() != 3 {
                    return Err(bad(n, &line));
                }
                mesh.faces.push([f[0], f[1], f[2]]);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

pub fn read_obj_file(path: &Path) -> Result<ObjMesh> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_obj(BufReader::new(file))
}
