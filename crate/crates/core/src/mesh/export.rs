//! Plain-text `tetmesh v1` files.
//!
//! ```text
//! tetmesh v1
//! vertices <N>
//! v x y z                      (N lines)
//! tets <M>
//! t i j k l                    (M lines, 0-based)
//! gradients <M>                (optional)
//! g F11 F12 F13 F21 ... F33    (M lines, row-major)
//! displacements <4M>           (field files only)
//! u x y z                      (4 lines per tet, in the tet's vertex order)
//! ```
//!
//! Reals are written with 17 significant digits.

use std::fmt::Write as _;

use super::{CuboidPartition, PiecewiseAffineField};
use crate::error::{Error, Result};
use crate::tensor::{Mat3, Vec3};

pub const MAGIC: &str = "tetmesh v1";

/// 17 significant digits in scientific notation, negative zero folded to zero.
pub fn fmt_real(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

fn push_vec(out: &mut String, tag: &str, v: &Vec3) {
    let _ = writeln!(out, "{tag} {} {} {}", fmt_real(v[0]), fmt_real(v[1]), fmt_real(v[2]));
}

/// Mesh with an optional per-tet gradient block.
pub fn write_mesh(part: &CuboidPartition, gradients: Option<&[Mat3]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "vertices {}", part.vertices.len());
    for v in &part.vertices {
        push_vec(&mut out, "v", v);
    }
    let _ = writeln!(out, "tets {}", part.tets.len());
    for t in &part.tets {
        let _ = writeln!(out, "t {} {} {} {}", t[0], t[1], t[2], t[3]);
    }
    if let Some(grads) = gradients {
        let _ = writeln!(out, "gradients {}", grads.len());
        for g in grads {
            let row_major: Vec<String> =
                (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|ij| fmt_real(g[ij])).collect();
            let _ = writeln!(out, "g {}", row_major.join(" "));
        }
    }
    out
}

/// Mesh, gradients and the per-tet vertex displacements of a field.
pub fn write_field(field: &PiecewiseAffineField) -> String {
    let part = &field.partition;
    let mut out = write_mesh(part, Some(&field.gradients()));
    let _ = writeln!(out, "displacements {}", 4 * part.tets.len());
    for (t, tet) in part.tets.iter().enumerate() {
        for &v in tet {
            push_vec(&mut out, "u", &field.maps[t].displacement(&part.vertices[v]));
        }
    }
    out
}

/// Parsed contents of a `tetmesh v1` file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TetMesh {
    pub vertices: Vec<Vec3>,
    pub tets: Vec<[usize; 4]>,
    pub gradients: Vec<Mat3>,
    pub displacements: Vec<Vec3>,
}

pub fn read(text: &str) -> Result<TetMesh> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(Error::Argument(format!("missing `{MAGIC}` header"))),
    }
    let mut mesh = TetMesh::default();
    for (no, line) in lines {
        let bad = |what: &str| Error::Argument(format!("line {}: {what}: {line:?}", no + 1));
        let mut fields = line.split_whitespace();
        let Some(tag) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        let reals = || rest.iter().map(|s| s.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>();
        match tag {
            "vertices" | "tets" | "gradients" | "displacements" => {}
            "v" | "u" => {
                let r = reals().map_err(|_| bad("bad number"))?;
                let [x, y, z] = r[..] else { return Err(bad("expected 3 numbers")) };
                if tag == "v" { &mut mesh.vertices } else { &mut mesh.displacements }.push(Vec3::new(x, y, z));
            }
            "t" => {
                let idx = rest.iter().map(|s| s.parse::<usize>()).collect::<std::result::Result<Vec<_>, _>>();
                let idx = idx.map_err(|_| bad("bad index"))?;
                let [i, j, k, l] = idx[..] else { return Err(bad("expected 4 indices")) };
                mesh.tets.push([i, j, k, l]);
            }
            "g" => {
                let r = reals().map_err(|_| bad("bad number"))?;
                if r.len() != 9 {
                    return Err(bad("expected 9 numbers"));
                }
                mesh.gradients.push(Mat3::from_row_slice(&r));
            }
            _ => return Err(bad("unknown record")),
        }
    }
    Ok(mesh)
}
