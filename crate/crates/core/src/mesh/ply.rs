use std::fmt::Write;

use super::obj::parse_float;
use super::{fmt_coord, Mesh};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        format: "PLY",
        line,
        msg: msg.into(),
    }
}

#[derive(Debug)]
enum Property {
    Scalar(String),
    List(String),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

/// Parses an ASCII 1.0 PLY file with `vertex` (x, y, z) and `face`
/// (`vertex_indices` list) elements. Other elements and properties are
/// skipped. Binary encodings are rejected.
pub fn parse_ply(bytes: &[u8]) -> Result<Mesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(0, e.to_string()))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(1, "missing \"ply\" magic")),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut saw_format = false;
    loop {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, "header is not terminated by end_header"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.first().copied() {
            Some("end_header") => break,
            Some("comment") | Some("obj_info") | None => {}
            Some("format") => {
                match toks.get(1).copied() {
                    Some("ascii") => {}
                    Some(enc) if enc.starts_with("binary") => {
                        return Err(parse_err(lineno, "binary PLY is not supported"))
                    }
                    other => return Err(parse_err(lineno, format!("unknown format {other:?}"))),
                }
                saw_format = true;
            }
            Some("element") => {
                if toks.len() != 3 {
                    return Err(parse_err(lineno, "malformed element line"));
                }
                let count = toks[2]
                    .parse()
                    .map_err(|_| parse_err(lineno, "malformed element count"))?;
                elements.push(Element {
                    name: toks[1].to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let elem = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(lineno, "property before element"))?;
                let prop = match toks.get(1).copied() {
                    Some("list") if toks.len() == 5 => Property::List(toks[4].to_string()),
                    Some(_) if toks.len() == 3 => Property::Scalar(toks[2].to_string()),
                    _ => return Err(parse_err(lineno, "malformed property line")),
                };
                elem.props.push(prop);
            }
            Some(other) => {
                return Err(parse_err(
                    lineno,
                    format!("unknown header keyword {other:?}"),
                ))
            }
        }
    }
    if !saw_format {
        return Err(parse_err(2, "missing format line"));
    }

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for elem in &elements {
        for _ in 0..elem.count {
            let (lineno, line) = lines
                .by_ref()
                .find(|(_, l)| !l.is_empty())
                .ok_or_else(|| parse_err(0, format!("truncated {} element data", elem.name)))?;
            let mut toks = line.split_whitespace();
            let mut xyz = [None; 3];
            let mut face: Option<Vec<i64>> = None;
            for prop in &elem.props {
                match prop {
                    Property::Scalar(name) => {
                        let tok = toks
                            .next()
                            .ok_or_else(|| parse_err(lineno, "too few values"))?;
                        let slot = match name.as_str() {
                            "x" => Some(0),
                            "y" => Some(1),
                            "z" => Some(2),
                            _ => None,
                        };
                        if elem.name == "vertex" {
                            if let Some(k) = slot {
                                xyz[k] = Some(parse_float(tok, lineno, "PLY")?);
                            }
                        }
                    }
                    Property::List(name) => {
                        let n: usize = toks
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| parse_err(lineno, "malformed list length"))?;
                        let mut items = Vec::with_capacity(n);
                        for _ in 0..n {
                            let t = toks
                                .next()
                                .ok_or_else(|| parse_err(lineno, "too few list items"))?;
                            items.push(t);
                        }
                        if elem.name == "face"
                            && (name == "vertex_indices" || name == "vertex_index")
                        {
                            let idx = items
                                .iter()
                                .map(|t| t.parse::<i64>())
                                .collect::<std::result::Result<Vec<_>, _>>()
                                .map_err(|_| parse_err(lineno, "malformed face index"))?;
                            face = Some(idx);
                        }
                    }
                }
            }
            match elem.name.as_str() {
                "vertex" => {
                    let v = match xyz {
                        [Some(x), Some(y), Some(z)] => [x, y, z],
                        _ => return Err(parse_err(lineno, "vertex lacks x/y/z properties")),
                    };
                    vertices.push(v);
                }
                "face" => {
                    let idx = face.ok_or_else(|| parse_err(lineno, "face lacks vertex_indices"))?;
                    if idx.len() != 3 {
                        return Err(parse_err(
                            lineno,
                            format!("non-triangle face with {} vertices", idx.len()),
                        ));
                    }
                    faces.push((lineno, [idx[0], idx[1], idx[2]]));
                }
                _ => {}
            }
        }
    }

    let n = vertices.len() as i64;
    let faces = faces
        .into_iter()
        .map(|(line, f)| {
            if f.iter().any(|&i| i < 0 || i >= n) {
                Err(parse_err(line, format!("face index out of range in {f:?}")))
            } else {
                Ok([f[0] as usize, f[1] as usize, f[2] as usize])
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Mesh { vertices, faces })
}

/// Writes ASCII PLY. Coordinates are declared `double` so the text values
/// survive a round trip bit-for-bit.
pub fn write_ply(mesh: &Mesh) -> Vec<u8> {
    let mut out = String::new();
    let _ = write!(
        out,
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices.len(),
        mesh.faces.len()
    );
    for v in &mesh.vertices {
        let _ = writeln!(
            out,
            "{} {} {}",
            fmt_coord(v[0]),
            fmt_coord(v[1]),
            fmt_coord(v[2])
        );
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out.into_bytes()
}
