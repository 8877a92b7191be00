//! Wavefront OBJ and OFF readers and writers.
//!
//! Only positions and triangle connectivity are kept. Coordinates are
//! written in shortest round-trip decimal form, so `read(write(m))`
//! reproduces every position bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        match ext.as_str() {
            "obj" => Ok(Self::Obj),
            "off" => Ok(Self::Off),
            _ => Err(Error::UnsupportedFormat(ext)),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadOptions {
    /// Fan-triangulate polygons instead of rejecting them.
    pub triangulate: bool,
}

/// Positions and triangles as read from a file, not yet validated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawMesh {
    pub positions: Vec<Point>,
    pub faces: Vec<[usize; 3]>,
}

impl RawMesh {
    pub fn build(self) -> Result<TriMesh> {
        TriMesh::new(self.positions, self.faces)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(token: Option<&str>, line: usize) -> Result<f64> {
    let token = token.ok_or_else(|| parse_err(line, "missing coordinate"))?;
    let v: f64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid number {token:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite coordinate {token:?}")));
    }
    Ok(v)
}

fn push_polygon(
    faces: &mut Vec<[usize; 3]>,
    polygon: &[usize],
    line: usize,
    options: ReadOptions,
) -> Result<()> {
    match polygon.len() {
        0..=2 => Err(parse_err(
            line,
            format!("face with {} vertices", polygon.len()),
        )),
        3 => {
            faces.push([polygon[0], polygon[1], polygon[2]]);
            Ok(())
        }
        n if options.triangulate => {
            for i in 1..n - 1 {
                faces.push([polygon[0], polygon[i], polygon[i + 1]]);
            }
            Ok(())
        }
        n => Err(Error::UnsupportedFace { line, arity: n }),
    }
}

/// Parses OBJ text. `v` and `f` records are read; everything else is
/// ignored. Face references may use `v/vt/vn` syntax and negative
/// (relative) indices.
pub fn parse_obj(text: &str, options: ReadOptions) -> Result<RawMesh> {
    let mut mesh = RawMesh::default();
    let mut polygon = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let x = parse_f64(tokens.next(), line)?;
                let y = parse_f64(tokens.next(), line)?;
                let z = parse_f64(tokens.next(), line)?;
                mesh.positions.push(Point::new(x, y, z));
            }
            Some("f") => {
                polygon.clear();
                for token in tokens {
                    let index_str = token.split('/').next().unwrap_or("");
                    let index: i64 = index_str
                        .parse()
                        .map_err(|_| parse_err(line, format!("invalid face index {token:?}")))?;
                    let count = mesh.positions.len() as i64;
                    let resolved = match index {
                        0 => return Err(parse_err(line, "face index 0 (OBJ indices start at 1)")),
                        i if i > 0 => i - 1,
                        i => count + i,
                    };
                    if resolved < 0 {
                        return Err(parse_err(line, format!("face index {index} out of range")));
                    }
                    polygon.push(resolved as usize);
                }
                push_polygon(&mut mesh.faces, &polygon, line, options)?;
            }
            _ => {}
        }
    }
    Ok(mesh)
}

/// Parses OFF text: `OFF` header, `V F E` counts, `V` vertex lines and
/// `F` face lines of the form `n i_1 .. i_n` (0-based). Trailing values on
/// vertex and face lines (colours) are ignored.
pub fn parse_off(text: &str, options: ReadOptions) -> Result<RawMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some("OFF") {
        return Err(parse_err(header_line, "missing OFF header"));
    }
    let rest: Vec<&str> = header_tokens.collect();
    let (count_line, count_tokens): (usize, Vec<&str>) = if rest.is_empty() {
        let (n, l) = lines
            .next()
            .ok_or_else(|| parse_err(header_line, "missing counts line"))?;
        (n, l.split_whitespace().collect())
    } else {
        (header_line, rest)
    };
    if count_tokens.len() < 2 {
        return Err(parse_err(count_line, "expected vertex and face counts"));
    }
    let count = |t: &str| -> Result<usize> {
        t.parse()
            .map_err(|_| parse_err(count_line, format!("invalid count {t:?}")))
    };
    let n_vertices = count(count_tokens[0])?;
    let n_faces = count(count_tokens[1])?;

    let mut mesh = RawMesh::default();
    for _ in 0..n_vertices {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(count_line, "unexpected end of file in vertex block"))?;
        let mut tokens = l.split_whitespace();
        let x = parse_f64(tokens.next(), line)?;
        let y = parse_f64(tokens.next(), line)?;
        let z = parse_f64(tokens.next(), line)?;
        mesh.positions.push(Point::new(x, y, z));
    }
    let mut polygon = Vec::new();
    for _ in 0..n_faces {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(count_line, "unexpected end of file in face block"))?;
        let mut tokens = l.split_whitespace();
        let arity: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(line, "invalid face arity"))?;
        polygon.clear();
        for _ in 0..arity {
            let t = tokens
                .next()
                .ok_or_else(|| parse_err(line, "face line shorter than its arity"))?;
            let index: usize = t
                .parse()
                .map_err(|_| parse_err(line, format!("invalid face index {t:?}")))?;
            polygon.push(index);
        }
        push_polygon(&mut mesh.faces, &polygon, line, options)?;
    }
    Ok(mesh)
}

pub fn parse_mesh(text: &str, format: MeshFormat, options: ReadOptions) -> Result<RawMesh> {
    match format {
        MeshFormat::Obj => parse_obj(text, options),
        MeshFormat::Off => parse_off(text, options),
    }
}

pub fn format_obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for p in mesh.positions() {
        let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
    }
    for [a, b, c] in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1);
    }
    out
}

pub fn format_off(mesh: &TriMesh) -> String {
    let mut out = String::from("OFF\n");
    let _ = writeln!(
        out,
        "{} {} {}",
        mesh.vertex_count(),
        mesh.face_count(),
        mesh.edge_count()
    );
    for p in mesh.positions() {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    for [a, b, c] in mesh.faces() {
        let _ = writeln!(out, "3 {a} {b} {c}");
    }
    out
}

pub fn format_mesh(mesh: &TriMesh, format: MeshFormat) -> String {
    match format {
        MeshFormat::Obj => format_obj(mesh),
        MeshFormat::Off => format_off(mesh),
    }
}

/// Reads an `.obj` or `.off` file, choosing the parser by extension.
pub fn read_mesh(path: impl AsRef<Path>, options: ReadOptions) -> Result<TriMesh> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path)?;
    let text = fs::read_to_string(path)?;
    parse_mesh(&text, format, options)?.build()
}

pub fn write_mesh(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<()> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path)?;
    fs::write(path, format_mesh(mesh, format))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;

    #[test]
    fn minimal_off() {
        let text = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let mesh = parse_off(text, ReadOptions::default())
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(mesh.face_count(), 1);
        assert_eq!(mesh.edge_count(), 3);
    }

    #[test]
    fn off_counts_on_header_line_and_comments() {
        let text = "OFF 3 1 0 # counts\n# a comment\n0 0 0\n1 0 0\n\n0 1 0\n3 0 1 2 255 0 0\n";
        let raw = parse_off(text, ReadOptions::default()).unwrap();
        assert_eq!(raw.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn obj_quad_fan() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let err = parse_obj(text, ReadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedFace { line: 5, arity: 4 }));
        let raw = parse_obj(text, ReadOptions { triangulate: true }).unwrap();
        assert_eq!(raw.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn obj_slash_and_negative_indices() {
        let text = "# header\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nf -3/1/1 -2//1 -1\n";
        let raw = parse_obj(text, ReadOptions::default()).unwrap();
        assert_eq!(raw.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_obj("v 0 0 0\nv 1 x 0\n", ReadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_obj("v 0 0 0\nf 0 1 2\n", ReadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_off("OFF\n2 0 0\n0 0 0\n", ReadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = parse_off("PLY\n", ReadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn round_trip_is_stable() {
        let cube = primitives::cube(3);
        let moved: Vec<Point> = cube
            .positions()
            .iter()
            .map(|p| p * (1.0 / 3.0) + Point::new(1e-9, -0.1, 7.0))
            .collect();
        let mesh = cube.with_positions(moved).unwrap();
        for format in [MeshFormat::Obj, MeshFormat::Off] {
            let first = format_mesh(&mesh, format);
            let back = parse_mesh(&first, format, ReadOptions::default())
                .unwrap()
                .build()
                .unwrap();
            assert_eq!(back.positions(), mesh.positions());
            assert_eq!(back.faces(), mesh.faces());
            assert_eq!(format_mesh(&back, format), first);
        }
    }

    #[test]
    fn extension_dispatch() {
        assert_eq!(
            MeshFormat::from_path(Path::new("a/b.OBJ")).unwrap(),
            MeshFormat::Obj
        );
        assert_eq!(
            MeshFormat::from_path(Path::new("b.off")).unwrap(),
            MeshFormat::Off
        );
        assert!(MeshFormat::from_path(Path::new("b.ply")).is_err());
    }
}
