use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

const AXIS_TOLERANCE: f64 = 1e-9;

/// A single revolute joint. Triangles listed in `member_triangles` rotate
/// about `axis` through `pivot` by the pose's articulation angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub axis: Vec3,
    pub pivot: Vec3,
    pub member_triangles: BTreeSet<usize>,
}

/// Known object model. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    joint: Option<Joint>,
    centroid: Vec3,
}

impl TriangleMesh {
    /// Builds a mesh from 0-based indices, checking every invariant.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, joint: Option<Joint>) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            for &index in tri {
                if index >= vertices.len() {
                    return Err(Error::VertexIndexOutOfRange {
                        triangle: t,
                        index,
                        count: vertices.len(),
                    });
                }
            }
        }
        if let Some(joint) = &joint {
            let norm = joint.axis.iter().map(|a| a * a).sum::<f64>().sqrt();
            if !((norm - 1.0).abs() <= AXIS_TOLERANCE) {
                return Err(Error::JointAxisNotUnit { norm });
            }
            if let Some(&index) = joint.member_triangles.iter().find(|&&i| i >= triangles.len()) {
                return Err(Error::JointTriangleOutOfRange {
                    index,
                    count: triangles.len(),
                });
            }
        }
        let centroid = centroid(&vertices);
        Ok(Self {
            vertices,
            triangles,
            joint,
            centroid,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn joint(&self) -> Option<&Joint> {
        self.joint.as_ref()
    }

    /// Mean of all vertices; the center of rotation for the pose.
    pub fn centroid(&self) -> Vec3 {
        self.centroid
    }

    /// Parses the line-oriented mesh format. `origin` is only used in error
    /// messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut joint: Option<Joint> = None;

        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let keyword = tokens.next().unwrap_or_default();
            let rest: Vec<&str> = tokens.collect();
            let err = |msg: String| Error::parse(origin, line_no, msg);

            match keyword {
                "v" => {
                    let xyz = parse_floats::<3>(&rest).map_err(err)?;
                    vertices.push(xyz);
                }
                "f" => {
                    let ijk = parse_indices::<3>(&rest).map_err(err)?;
                    let mut tri = [0usize; 3];
                    for (slot, &index) in tri.iter_mut().zip(ijk.iter()) {
                        if index > vertices.len() {
                            return Err(Error::VertexIndexOutOfRange {
                                triangle: triangles.len(),
                                index: index - 1,
                                count: vertices.len(),
                            });
                        }
                        *slot = index - 1;
                    }
                    triangles.push(tri);
                }
                "joint" => {
                    if joint.is_some() {
                        return Err(err("only one joint is supported".into()));
                    }
                    let Some((name, nums)) = rest.split_first() else {
                        return Err(err("joint needs a name, an axis and a pivot".into()));
                    };
                    let values = parse_floats::<6>(nums).map_err(err)?;
                    joint = Some(Joint {
                        name: (*name).to_string(),
                        axis: [values[0], values[1], values[2]],
                        pivot: [values[3], values[4], values[5]],
                        member_triangles: BTreeSet::new(),
                    });
                }
                "jf" => {
                    let Some(joint) = joint.as_mut() else {
                        return Err(err("`jf` before any `joint` line".into()));
                    };
                    for index in parse_index_list(&rest).map_err(err)? {
                        joint.member_triangles.insert(index - 1);
                    }
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }

        Self::new(vertices, triangles, joint)
    }
}

/// Reads a mesh file from disk.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TriangleMesh::parse(&text, path)
}

fn centroid(vertices: &[Vec3]) -> Vec3 {
    if vertices.is_empty() {
        return [0.0; 3];
    }
    let mut sum = [0.0; 3];
    for v in vertices {
        for k in 0..3 {
            sum[k] += v[k];
        }
    }
    let n = vertices.len() as f64;
    [sum[0] / n, sum[1] / n, sum[2] / n]
}

fn parse_floats<const N: usize>(tokens: &[&str]) -> std::result::Result<[f64; N], String> {
    if tokens.len() != N {
        return Err(format!("expected {N} numbers, found {}", tokens.len()));
    }
    let mut out = [0.0; N];
    for (slot, tok) in out.iter_mut().zip(tokens) {
        let value: f64 = tok.parse().map_err(|_| format!("invalid number `{tok}`"))?;
        if !value.is_finite() {
            return Err(format!("non-finite number `{tok}`"));
        }
        *slot = value;
    }
    Ok(out)
}

fn parse_indices<const N: usize>(tokens: &[&str]) -> std::result::Result<[usize; N], String> {
    if tokens.len() != N {
        return Err(format!("expected {N} indices, found {}", tokens.len()));
    }
    let list = parse_index_list(tokens)?;
    let mut out = [0usize; N];
    out.copy_from_slice(&list);
    Ok(out)
}

fn parse_index_list(tokens: &[&str]) -> std::result::Result<Vec<usize>, String> {
    if tokens.is_empty() {
        return Err("expected at least one index".into());
    }
    tokens
        .iter()
        .map(|tok| match tok.parse::<usize>() {
            Ok(0) => Err("indices are 1-based; found 0".to_string()),
            Ok(i) => Ok(i),
            Err(_) => Err(format!("invalid index `{tok}`")),
        })
        .collect()
}
