//! OBJ and PLY mesh readers, PLY writers for meshes and point clouds.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::mesh::Mesh;
use super::point_cloud::PointCloud;
use super::Vec3;
use crate::error::{Error, Result};

/// Loads an `.obj` or `.ply` (ASCII or binary) triangle mesh. Polygons are
/// fan-triangulated.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("obj") => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_obj(&text, path)
        }
        Some("ply") => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            parse_ply(&bytes, path)
        }
        _ => Err(Error::UnsupportedFormat(path.to_path_buf())),
    }
}

fn fan(face: &[u32], out: &mut Vec<[u32; 3]>) -> Result<()> {
    if face.len() < 3 {
        return Err(Error::DegenerateFace(face.len()));
    }
    for k in 1..face.len() - 1 {
        out.push([face[0], face[k], face[k + 1]]);
    }
    Ok(())
}

pub fn parse_obj(text: &str, path: &Path) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut xyz = [0.0; 3];
                for c in &mut xyz {
                    let tok = it.next().ok_or_else(|| perr(ln + 1, "vertex needs 3 coordinates".into()))?;
                    *c = tok
                        .parse()
                        .map_err(|_| perr(ln + 1, format!("bad coordinate {tok:?}")))?;
                }
                vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
            }
            Some("f") => {
                let mut face = Vec::new();
                for tok in it {
                    let idx = tok.split('/').next().unwrap_or("");
                    let i: i64 = idx
                        .parse()
                        .map_err(|_| perr(ln + 1, format!("bad face index {tok:?}")))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        return Err(perr(ln + 1, "face index 0".into()));
                    };
                    if resolved < 0 {
                        return Err(perr(ln + 1, format!("face index {i} before first vertex")));
                    }
                    face.push(resolved as u32);
                }
                fan(&face, &mut triangles)?;
            }
            _ => {}
        }
    }
    Mesh::new(vertices, triangles)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Scalar> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Encoding {
    Ascii,
    Binary { little: bool },
}

/// Sequential value source over either ASCII tokens or binary bytes.
struct Values<'a> {
    encoding: Encoding,
    tokens: std::str::SplitAsciiWhitespace<'a>,
    bytes: &'a [u8],
    pos: usize,
}

impl Values<'_> {
    fn next(&mut self, ty: Scalar) -> Option<f64> {
        match self.encoding {
            Encoding::Ascii => self.tokens.next()?.parse().ok(),
            Encoding::Binary { little } => {
                let n = ty.size();
                let b = self.bytes.get(self.pos..self.pos + n)?;
                self.pos += n;
                let mut buf = [0u8; 8];
                buf[..n].copy_from_slice(b);
                if !little {
                    buf[..n].reverse();
                }
                Some(match ty {
                    Scalar::I8 => buf[0] as i8 as f64,
                    Scalar::U8 => buf[0] as f64,
                    Scalar::I16 => i16::from_le_bytes([buf[0], buf[1]]) as f64,
                    Scalar::U16 => u16::from_le_bytes([buf[0], buf[1]]) as f64,
                    Scalar::I32 => i32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
                    Scalar::U32 => u32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
                    Scalar::F32 => f32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
                    Scalar::F64 => f64::from_le_bytes(buf),
                })
            }
        }
    }
}

pub fn parse_ply(bytes: &[u8], path: &Path) -> Result<Mesh> {
    let bad = |m: &str| Error::malformed(path, m);
    let marker = b"end_header";
    let header_end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| bad("missing end_header"))?;
    let mut body_start = header_end + marker.len();
    // The header terminates with "\n" or "\r\n".
    if bytes.get(body_start) == Some(&b'\r') {
        body_start += 1;
    }
    if bytes.get(body_start) == Some(&b'\n') {
        body_start += 1;
    }
    let header = std::str::from_utf8(&bytes[..header_end]).map_err(|_| bad("header is not UTF-8"))?;

    let mut lines = header.lines().map(str::trim);
    if lines.next() != Some("ply") {
        return Err(bad("missing ply magic"));
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            ["format", fmt, _] => {
                encoding = Some(match *fmt {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::Binary { little: true },
                    "binary_big_endian" => Encoding::Binary { little: false },
                    other => return Err(bad(&format!("unknown format {other}"))),
                })
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| bad("bad element count"))?,
                properties: Vec::new(),
            }),
            ["property", "list", ct, it, name] => {
                let el = elements.last_mut().ok_or_else(|| bad("property before element"))?;
                let ct = Scalar::parse(ct).ok_or_else(|| bad("bad list count type"))?;
                let it = Scalar::parse(it).ok_or_else(|| bad("bad list item type"))?;
                el.properties.push(Property::List(name.to_string(), ct, it));
            }
            ["property", ty, name] => {
                let el = elements.last_mut().ok_or_else(|| bad("property before element"))?;
                let ty = Scalar::parse(ty).ok_or_else(|| bad(&format!("bad property type {ty}")))?;
                el.properties.push(Property::Scalar(name.to_string(), ty));
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            _ => return Err(bad(&format!("unrecognised header line {line:?}"))),
        }
    }
    let encoding = encoding.ok_or_else(|| bad("missing format line"))?;
    let body = &bytes[body_start..];
    let text = match encoding {
        Encoding::Ascii => std::str::from_utf8(body).map_err(|_| bad("ASCII body is not UTF-8"))?,
        Encoding::Binary { .. } => "",
    };
    let mut values = Values {
        encoding,
        tokens: text.split_ascii_whitespace(),
        bytes: body,
        pos: 0,
    };

    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let truncated = || bad("truncated body");
    for el in &elements {
        let is_vertex = el.name == "vertex";
        let is_face = el.name == "face";
        let find = |n: &str| {
            el.properties
                .iter()
                .position(|p| matches!(p, Property::Scalar(name, _) if name == n))
        };
        let (xi, yi, zi) = (find("x"), find("y"), find("z"));
        if is_vertex && (xi.is_none() || yi.is_none() || zi.is_none()) {
            return Err(bad("vertex element lacks x/y/z"));
        }
        let mut scalars = vec![0.0; el.properties.len()];
        let mut face = Vec::new();
        for _ in 0..el.count {
            for (k, prop) in el.properties.iter().enumerate() {
                match prop {
                    Property::Scalar(_, ty) => scalars[k] = values.next(*ty).ok_or_else(truncated)?,
                    Property::List(name, ct, it) => {
                        let n = values.next(*ct).ok_or_else(truncated)? as usize;
                        let wanted = is_face && (name == "vertex_indices" || name == "vertex_index");
                        if wanted {
                            face.clear();
                        }
                        for _ in 0..n {
                            let v = values.next(*it).ok_or_else(truncated)?;
                            if wanted {
                                if v < 0.0 {
                                    return Err(bad("negative face index"));
                                }
                                face.push(v as u32);
                            }
                        }
                        if wanted {
                            fan(&face, &mut triangles)?;
                        }
                    }
                }
            }
            if is_vertex {
                vertices.push(Vec3::new(
                    scalars[xi.unwrap()],
                    scalars[yi.unwrap()],
                    scalars[zi.unwrap()],
                ));
            }
        }
    }
    Mesh::new(vertices, triangles)
}

/// Binary little-endian PLY of a point cloud: `x y z` as float, then
/// `nx ny nz` when normals are present, then a `uchar provenance`
/// (0 visible, 1 hidden) when labels are present.
pub fn write_point_cloud_ply(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_point_cloud_ply_to(&mut w, cloud)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_point_cloud_ply_to(w: &mut impl Write, cloud: &PointCloud) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format binary_little_endian 1.0")?;
    writeln!(w, "element vertex {}", cloud.len())?;
    for c in ["x", "y", "z"] {
        writeln!(w, "property float {c}")?;
    }
    if cloud.normals.is_some() {
        for c in ["nx", "ny", "nz"] {
            writeln!(w, "property float {c}")?;
        }
    }
    if cloud.provenance.is_some() {
        writeln!(w, "property uchar provenance")?;
    }
    writeln!(w, "end_header")?;
    for i in 0..cloud.len() {
        let p = cloud.points[i];
        for c in [p.x, p.y, p.z] {
            w.write_all(&(c as f32).to_le_bytes())?;
        }
        if let Some(n) = &cloud.normals {
            for c in [n[i].x, n[i].y, n[i].z] {
                w.write_all(&(c as f32).to_le_bytes())?;
            }
        }
        if let Some(l) = &cloud.provenance {
            w.write_all(&[l[i] as u8])?;
        }
    }
    Ok(())
}

/// ASCII PLY of a triangle mesh with double-precision vertices.
pub fn write_mesh_ply(path: impl AsRef<Path>, mesh: &Mesh) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res: std::io::Result<()> = (|| {
        writeln!(w, "ply")?;
        writeln!(w, "format ascii 1.0")?;
        writeln!(w, "element vertex {}", mesh.vertices().len())?;
        for c in ["x", "y", "z"] {
            writeln!(w, "property double {c}")?;
        }
        writeln!(w, "element face {}", mesh.triangle_count())?;
        writeln!(w, "property list uchar int vertex_indices")?;
        writeln!(w, "end_header")?;
        for v in mesh.vertices() {
            writeln!(w, "{:?} {:?} {:?}", v.x, v.y, v.z)?;
        }
        for t in mesh.triangles() {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

/// Minimal reader for the point-cloud PLY layout written above.
pub fn read_point_cloud_ply(path: impl AsRef<Path>) -> Result<PointCloud> {
    use super::point_cloud::Provenance;
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::malformed(path, m);
    let marker = b"end_header\n";
    let end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| bad("missing end_header"))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8"))?;
    if !header.contains("format binary_little_endian") {
        return Err(bad("expected binary_little_endian"));
    }
    let count: usize = header
        .lines()
        .find_map(|l| l.strip_prefix("element vertex "))
        .and_then(|n| n.trim().parse().ok())
        .ok_or_else(|| bad("missing vertex count"))?;
    let has_normals = header.contains("property float nx");
    let has_labels = header.contains("property uchar provenance");
    let stride = 12 + if has_normals { 12 } else { 0 } + usize::from(has_labels);
    let body = &bytes[end + marker.len()..];
    if body.len() != stride * count {
        return Err(bad("body size does not match header"));
    }
    let f = |b: &[u8], o: usize| f32::from_le_bytes([b[o], b[o + 1], b[o + 2], b[o + 3]]) as f64;
    let mut cloud = PointCloud {
        points: Vec::with_capacity(count),
        normals: has_normals.then(|| Vec::with_capacity(count)),
        provenance: has_labels.then(|| Vec::with_capacity(count)),
    };
    for rec in body.chunks_exact(stride) {
        cloud.points.push(Vec3::new(f(rec, 0), f(rec, 4), f(rec, 8)));
        if let Some(n) = &mut cloud.normals {
            n.push(Vec3::new(f(rec, 12), f(rec, 16), f(rec, 20)));
        }
        if let Some(l) = &mut cloud.provenance {
            l.push(match rec[stride - 1] {
                0 => Provenance::Visible,
                1 => Provenance::Hidden,
                _ => return Err(bad("provenance must be 0 or 1")),
            });
        }
    }
    Ok(cloud)
}
