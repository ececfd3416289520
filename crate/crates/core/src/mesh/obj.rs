use std::fmt::Write;

use super::{fmt_coord, Mesh};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        format: "OBJ",
        line,
        msg: msg.into(),
    }
}

pub(crate) fn parse_float(tok: &str, line: usize, format: &'static str) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Parse {
            format,
            line,
            msg: format!("malformed float {tok:?}"),
        }),
    }
}

/// Parses the `v` and `f` records of a Wavefront OBJ file.
///
/// Face references may carry `/vt/vn` suffixes, which are ignored. Negative
/// references are resolved relative to the vertices read so far. Only
/// triangles are accepted.
pub fn parse_obj(bytes: &[u8]) -> Result<Mesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(0, e.to_string()))?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    // (line, raw one-based index) kept for range checks after all vertices are known
    let mut refs: Vec<(usize, i64)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let mut xyz = [0.0; 3];
                for c in &mut xyz {
                    let tok = toks
                        .next()
                        .ok_or_else(|| parse_err(lineno, "vertex needs 3 coordinates"))?;
                    *c = parse_float(tok, lineno, "OBJ")?;
                }
                vertices.push(xyz);
            }
            Some("f") => {
                let items: Vec<&str> = toks.collect();
                if items.len() != 3 {
                    return Err(parse_err(
                        lineno,
                        format!("non-triangle face with {} vertex references", items.len()),
                    ));
                }
                let mut face = [0usize; 3];
                for (slot, item) in face.iter_mut().zip(&items) {
                    let head = item.split('/').next().unwrap_or("");
                    let idx: i64 = head
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("malformed index {item:?}")))?;
                    let resolved = match idx {
                        0 => return Err(parse_err(lineno, "face index 0 is invalid")),
                        i if i > 0 => i - 1,
                        i => vertices.len() as i64 + i,
                    };
                    if resolved < 0 {
                        return Err(parse_err(lineno, format!("face index {idx} out of range")));
                    }
                    refs.push((lineno, resolved));
                    *slot = resolved as usize;
                }
                faces.push(face);
            }
            _ => {}
        }
    }

    let n = vertices.len() as i64;
    if let Some(&(line, idx)) = refs.iter().find(|(_, i)| *i >= n) {
        return Err(parse_err(
            line,
            format!("face index {} out of range (vertex count {n})", idx + 1),
        ));
    }
    Ok(Mesh { vertices, faces })
}

/// Serialises a mesh as OBJ text; coordinates use the shortest exact
/// decimal form so that [`parse_obj`] restores identical bits.
pub fn write_obj(mesh: &Mesh) -> Vec<u8> {
    let mut out = String::with_capacity(32 * (mesh.vertices.len() + mesh.faces.len()));
    for v in &mesh.vertices {
        let _ = writeln!(
            out,
            "v {} {} {}",
            fmt_coord(v[0]),
            fmt_coord(v[1]),
            fmt_coord(v[2])
        );
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let m = parse_obj(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn index_out_of_range() {
        let err = parse_obj(b"v 0 0 0\nf 1 2 3\n").unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn attribute_suffixes_ignored() {
        let src = b"# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2/2/2 3/3/3\nf 1//1 2//1 3//1\nf -3 -2 -1\n";
        let m = parse_obj(src).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2]; 3]);
    }

    #[test]
    fn rejects_quads_and_bad_floats() {
        let quad = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 4 3\n";
        assert!(parse_obj(quad)
            .unwrap_err()
            .to_string()
            .contains("non-triangle"));
        assert!(parse_obj(b"v 0 0 0\nv 1 0 0\nf 1 2\n").is_err());
        assert!(parse_obj(b"v 0 zero 0\n")
            .unwrap_err()
            .to_string()
            .contains("malformed float"));
        assert!(parse_obj(b"v 0 nan 0\n").is_err());
    }

    #[test]
    fn writer_emits_expected_records() {
        let m = parse_obj(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        let text = String::from_utf8(write_obj(&m)).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 1);
    }

    #[test]
    fn shortest_decimal_round_trip() {
        let m = Mesh {
            vertices: vec![
                [0.1, 0.2, 0.3],
                [1e-300, -0.0, 5e300],
                [1.0 / 3.0, 2.0, 3.0],
            ],
            faces: vec![[0, 1, 2]],
        };
        let back = parse_obj(&write_obj(&m)).unwrap();
        for (a, b) in m.vertices.iter().zip(&back.vertices) {
            for k in 0..3 {
                assert_eq!(a[k].to_bits(), b[k].to_bits());
            }
        }
        assert!(String::from_utf8(write_obj(&m))
            .unwrap()
            .contains("v 0.1 0.2 0.3"));
    }
}
