//! ASCII OBJ subset: `v`, `vt` and triangular `f` records.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{MeshError, SurfaceMesh};
use crate::scalar::{Real, Vec2, Vec3};

/// Raw records of an OBJ file before mesh validation.
#[derive(Debug, Clone, Default)]
pub struct ObjData {
    pub positions: Vec<[f64; 3]>,
    pub texcoords: Vec<[f64; 2]>,
    pub faces: Vec<[usize; 3]>,
    /// Texture coordinate index per face corner, when every corner carries one.
    pub face_texcoords: Option<Vec<[usize; 3]>>,
    /// 1-based source line of each face.
    pub face_lines: Vec<usize>,
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse { line, message: message.into() }
}

fn resolve_index(token: &str, count: usize, line: usize) -> Result<usize, MeshError> {
    let raw: i64 = token.parse().map_err(|_| parse_err(line, format!("bad index `{token}`")))?;
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        count as i64 + raw
    } else {
        return Err(parse_err(line, "index 0 is not valid in OBJ"));
    };
    if idx < 0 || idx as usize >= count {
        return Err(parse_err(line, format!("index {raw} out of range (have {count})")));
    }
    Ok(idx as usize)
}

pub fn parse_obj<R: BufRead>(reader: R) -> Result<ObjData, MeshError> {
    let mut data = ObjData::default();
    let mut corner_tex: Vec<Option<[usize; 3]>> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        match tag {
            "v" => {
                let mut p = [0.0; 3];
                for slot in &mut p {
                    let t = tokens.next().ok_or_else(|| parse_err(lineno, "vertex needs 3 coordinates"))?;
                    *slot = t.parse().map_err(|_| parse_err(lineno, format!("bad coordinate `{t}`")))?;
                }
                data.positions.push(p);
            }
            "vt" => {
                let mut uv = [0.0; 2];
                for slot in &mut uv {
                    let t = tokens.next().ok_or_else(|| parse_err(lineno, "texture coordinate needs 2 values"))?;
                    *slot = t.parse().map_err(|_| parse_err(lineno, format!("bad coordinate `{t}`")))?;
                }
                data.texcoords.push(uv);
            }
            "f" => {
                let corners: Vec<&str> = tokens.collect();
                if corners.len() != 3 {
                    return Err(MeshError::NonTriangular { line: lineno, count: corners.len() });
                }
                let mut face = [0; 3];
                let mut tex = [0; 3];
                let mut has_tex = true;
                for (k, c) in corners.iter().enumerate() {
                    let mut parts = c.split('/');
                    face[k] = resolve_index(parts.next().unwrap_or(""), data.positions.len(), lineno)?;
                    match parts.next() {
                        Some(t) if !t.is_empty() => tex[k] = resolve_index(t, data.texcoords.len(), lineno)?,
                        _ => has_tex = false,
                    }
                }
                if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                    return Err(MeshError::Parse {
                        line: lineno,
                        message: format!("degenerate face repeats a vertex: {:?}", face.map(|v| v + 1)),
                    });
                }
                data.faces.push(face);
                data.face_lines.push(lineno);
                corner_tex.push(has_tex.then_some(tex));
            }
            // normals, groups, materials and smoothing are ignored
            _ => {}
        }
    }
    if !corner_tex.is_empty() && corner_tex.iter().all(Option::is_some) {
        data.face_texcoords = Some(corner_tex.into_iter().flatten().collect());
    }
    Ok(data)
}

impl ObjData {
    pub fn into_mesh<T: Real>(self) -> Result<SurfaceMesh<T>, MeshError> {
        let positions: Vec<Vec3<T>> = self.positions.iter().map(|p| p.map(T::lit)).collect();
        SurfaceMesh::new(positions, self.faces)
    }

    /// Per-vertex texture coordinates, if every face corner carries one and no vertex is split
    /// by a seam.
    pub fn vertex_texcoords<T: Real>(&self) -> Result<Option<Vec<Vec2<T>>>, MeshError> {
        let Some(ft) = &self.face_texcoords else { return Ok(None) };
        let mut uv: Vec<Option<usize>> = vec![None; self.positions.len()];
        for (face, tex) in self.faces.iter().zip(ft) {
            for k in 0..3 {
                match uv[face[k]] {
                    None => uv[face[k]] = Some(tex[k]),
                    Some(t) if self.texcoords[t] != self.texcoords[tex[k]] => {
                        return Err(MeshError::UvSeam { vertex: face[k] })
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(Some(
            uv.into_iter()
                .map(|t| t.map_or([T::zero(); 2], |t| self.texcoords[t].map(T::lit)))
                .collect(),
        ))
    }
}

/// Loads and validates a triangle mesh. Texture coordinates and normals are ignored.
pub fn load_obj<T: Real>(path: impl AsRef<Path>) -> Result<SurfaceMesh<T>, MeshError> {
    load_obj_with_uv(path).map(|(m, _)| m)
}

/// Loads a mesh along with per-vertex texture coordinates when the file carries them.
pub fn load_obj_with_uv<T: Real>(path: impl AsRef<Path>) -> Result<(SurfaceMesh<T>, Option<Vec<Vec2<T>>>), MeshError> {
    let data = parse_obj(BufReader::new(File::open(path)?))?;
    let uv = data.vertex_texcoords()?;
    let lines = data.face_lines.clone();
    let mesh = data.into_mesh().map_err(|e| match e {
        MeshError::DegenerateFace { face, vertices } => MeshError::Parse {
            line: lines.get(face).copied().unwrap_or(0),
            message: format!("degenerate face repeats a vertex: {:?}", vertices.map(|v| v + 1)),
        },
        other => other,
    })?;
    Ok((mesh, uv))
}

pub fn write_obj_with_uv<T: Real, W: Write>(mesh: &SurfaceMesh<T>, uv: Option<&[Vec2<T>]>, mut w: W) -> Result<(), MeshError> {
    if let Some(uv) = uv {
        if uv.len() != mesh.n_vertices() {
            return Err(MeshError::UvLength { expected: mesh.n_vertices(), got: uv.len() });
        }
    }
    for p in mesh.positions() {
        writeln!(w, "v {} {} {}", p[0].as_f64(), p[1].as_f64(), p[2].as_f64())?;
    }
    if let Some(uv) = uv {
        for t in uv {
            writeln!(w, "vt {} {}", t[0].as_f64(), t[1].as_f64())?;
        }
        for f in mesh.faces() {
            let [a, b, c] = f.map(|v| v + 1);
            writeln!(w, "f {a}/{a} {b}/{b} {c}/{c}")?;
        }
    } else {
        for f in mesh.faces() {
            let [a, b, c] = f.map(|v| v + 1);
            writeln!(w, "f {a} {b} {c}")?;
        }
    }
    Ok(())
}

pub fn save_obj_with_uv<T: Real>(mesh: &SurfaceMesh<T>, uv: &[Vec2<T>], path: impl AsRef<Path>) -> Result<(), MeshError> {
    if uv.len() != mesh.n_vertices() {
        return Err(MeshError::UvLength { expected: mesh.n_vertices(), got: uv.len() });
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_obj_with_uv(mesh, Some(uv), &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn save_obj<T: Real>(mesh: &SurfaceMesh<T>, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_obj_with_uv(mesh, None, &mut w)?;
    w.flush()?;
    Ok(())
}
