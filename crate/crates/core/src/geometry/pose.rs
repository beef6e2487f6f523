use super::mesh::{TriangleMesh, Vec3};
use crate::error::{Error, Result};

pub type Point2 = [f64; 2];
pub type Triangle2 = [Point2; 3];
pub type Mat3 = [[f64; 3]; 3];

/// One particle state: the affine camera plus the optional joint angle.
///
/// Angles are radians, translation is in pixels and `scale` is pixels per
/// model unit. The mesh is rotated about its centroid with intrinsic Z-Y-X
/// order (yaw about z, then pitch about y, then roll about x), projected
/// orthographically along the camera z axis, scaled and then translated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseParams {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub tx: f64,
    pub ty: f64,
    pub scale: f64,
    pub articulation: f64,
}

impl PoseParams {
    pub const FIELD_COUNT: usize = 7;
    pub const FIELD_NAMES: [&'static str; 7] =
        ["yaw", "pitch", "roll", "tx", "ty", "scale", "articulation"];

    pub fn identity() -> Self {
        Self {
            yaw: 0.0,
            pitch: 0.0,
            roll: 0.0,
            tx: 0.0,
            ty: 0.0,
            scale: 1.0,
            articulation: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.to_array().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPose(format!(
                "{} is not finite",
                Self::FIELD_NAMES[i]
            )));
        }
        if !(self.scale > 0.0) {
            return Err(Error::InvalidPose(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.yaw,
            self.pitch,
            self.roll,
            self.tx,
            self.ty,
            self.scale,
            self.articulation,
        ]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self {
            yaw: a[0],
            pitch: a[1],
            roll: a[2],
            tx: a[3],
            ty: a[4],
            scale: a[5],
            articulation: a[6],
        }
    }
}

/// `Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn rotation_matrix(yaw: f64, pitch: f64, roll: f64) -> Mat3 {
    let (sy, cy) = yaw.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sr, cr) = roll.sin_cos();
    [
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ]
}

/// Inverse of [`rotation_matrix`]; returns `(yaw, pitch, roll)` with pitch in
/// `[-pi/2, pi/2]`. At gimbal lock roll is set to zero.
pub fn euler_from_matrix(r: &Mat3) -> (f64, f64, f64) {
    let pitch = (-r[2][0]).clamp(-1.0, 1.0).asin();
    if r[2][0].abs() < 1.0 - 1e-12 {
        let yaw = r[1][0].atan2(r[0][0]);
        let roll = r[2][1].atan2(r[2][2]);
        (yaw, pitch, roll)
    } else {
        let yaw = (-r[0][1]).atan2(r[1][1]);
        (yaw, pitch, 0.0)
    }
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Rotation by `angle` about the unit vector `axis` (Rodrigues).
pub fn axis_angle_matrix(axis: Vec3, angle: f64) -> Mat3 {
    let delta = axis_angle_delta(axis, angle);
    let mut out = delta;
    for (i, row) in out.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    out
}

// `R - I` for the Rodrigues rotation: sin(a) K + (1 - cos(a)) K^2. Exactly
// zero at a = 0.
fn axis_angle_delta(axis: Vec3, angle: f64) -> Mat3 {
    let [x, y, z] = axis;
    let (s, c) = angle.sin_cos();
    let k: Mat3 = [[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]];
    let k2 = mat_mul(&k, &k);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = s * k[i][j] + (1.0 - c) * k2[i][j];
        }
    }
    out
}

fn rotation_delta(yaw: f64, pitch: f64, roll: f64) -> Mat3 {
    let mut r = rotation_matrix(yaw, pitch, roll);
    for (i, row) in r.iter_mut().enumerate() {
        row[i] -= 1.0;
    }
    r
}

fn mul_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

// Rotations are applied as `v + (R - I)(v - center)` so that a zero angle
// leaves coordinates bit-identical.
fn rotate_about(delta: &Mat3, center: Vec3, v: Vec3) -> Vec3 {
    let d = mul_vec(delta, [v[0] - center[0], v[1] - center[1], v[2] - center[2]]);
    [v[0] + d[0], v[1] + d[1], v[2] + d[2]]
}

struct Projector {
    body: Mat3,
    centroid: Vec3,
    joint: Option<(Mat3, Vec3)>,
    scale: f64,
    tx: f64,
    ty: f64,
}

impl Projector {
    fn new(mesh: &TriangleMesh, pose: &PoseParams) -> Self {
        let joint = mesh
            .joint()
            .map(|j| (axis_angle_delta(j.axis, pose.articulation), j.pivot));
        Self {
            body: rotation_delta(pose.yaw, pose.pitch, pose.roll),
            centroid: mesh.centroid(),
            joint,
            scale: pose.scale,
            tx: pose.tx,
            ty: pose.ty,
        }
    }

    fn project(&self, v: Vec3, articulated: bool) -> Point2 {
        let v = match (&self.joint, articulated) {
            (Some((delta, pivot)), true) => rotate_about(delta, *pivot, v),
            _ => v,
        };
        let w = rotate_about(&self.body, self.centroid, v);
        [self.scale * w[0] + self.tx, self.scale * w[1] + self.ty]
    }
}

/// Articulates, rotates, projects, scales and translates every triangle of
/// the mesh into pixel coordinates (x right, y down).
///
/// Joint member triangles use the articulated positions of their vertices;
/// all other triangles use the rigid positions, so a vertex shared across
/// the hinge stays attached to both sides.
pub fn apply_pose(mesh: &TriangleMesh, pose: &PoseParams) -> Vec<Triangle2> {
    let projector = Projector::new(mesh, pose);
    let rigid: Vec<Point2> = mesh
        .vertices()
        .iter()
        .map(|&v| projector.project(v, false))
        .collect();
    let members = mesh.joint().map(|j| &j.member_triangles);

    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            if members.is_some_and(|m| m.contains(&t)) {
                tri.map(|i| projector.project(mesh.vertices()[i], true))
            } else {
                tri.map(|i| rigid[i])
            }
        })
        .collect()
}

/// Axis-aligned bounds of a set of projected triangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox2 {
    pub min: Point2,
    pub max: Point2,
}

impl BBox2 {
    pub fn of_triangles(tris: &[Triangle2]) -> Option<Self> {
        let mut points = tris.iter().flatten();
        let first = *points.next()?;
        let mut b = BBox2 {
            min: first,
            max: first,
        };
        for p in points {
            for k in 0..2 {
                b.min[k] = b.min[k].min(p[k]);
                b.max[k] = b.max[k].max(p[k]);
            }
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Fraction of the box lying inside `[0, w] x [0, h]`. Per axis, a
    /// zero-extent side counts as fully inside when its coordinate is within
    /// the image range.
    pub fn visible_fraction(&self, width: f64, height: f64) -> f64 {
        fn axis(lo: f64, hi: f64, limit: f64) -> f64 {
            let extent = hi - lo;
            if extent <= 0.0 {
                return if (0.0..=limit).contains(&lo) { 1.0 } else { 0.0 };
            }
            let overlap = hi.min(limit) - lo.max(0.0);
            (overlap / extent).clamp(0.0, 1.0)
        }
        axis(self.min[0], self.max[0], width) * axis(self.min[1], self.max[1], height)
    }
}

/// Projected bounding box of the posed mesh, `None` for a mesh without
/// triangles.
pub fn projected_bbox(mesh: &TriangleMesh, pose: &PoseParams) -> Option<BBox2> {
    BBox2::of_triangles(&apply_pose(mesh, pose))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn mesh_with(v: Vec3) -> TriangleMesh {
        // Second vertex mirrors the first so the centroid is the origin.
        TriangleMesh::new(vec![v, [-v[0], -v[1], -v[2]], [0.0; 3]], vec![[0, 1, 2]], None).unwrap()
    }

    #[test]
    fn identity_drops_z() {
        let mesh = mesh_with([1.0, 2.0, 3.0]);
        let tris = apply_pose(&mesh, &PoseParams::identity());
        assert_eq!(tris[0][0], [1.0, 2.0]);
    }

    #[test]
    fn scale_and_translate() {
        let mesh = mesh_with([1.0, 2.0, 3.0]);
        let pose = PoseParams {
            scale: 2.0,
            tx: 10.0,
            ty: 10.0,
            ..PoseParams::identity()
        };
        assert_eq!(apply_pose(&mesh, &pose)[0][0], [12.0, 14.0]);
    }

    #[test]
    fn yaw_pi_flips_x() {
        let mesh = mesh_with([1.0, 0.0, 0.0]);
        let pose = PoseParams {
            yaw: PI,
            ..PoseParams::identity()
        };
        let p = apply_pose(&mesh, &pose)[0][0];
        assert!((p[0] + 1.0).abs() < 1e-9 && p[1].abs() < 1e-9, "{p:?}");
    }

    #[test]
    fn rotation_order_is_zyx() {
        // Independent composition of the elementary rotations.
        let (y, p, r): (f64, f64, f64) = (0.3, -0.7, 1.1);
        let rz = [[y.cos(), -y.sin(), 0.0], [y.sin(), y.cos(), 0.0], [0.0, 0.0, 1.0]];
        let ry = [[p.cos(), 0.0, p.sin()], [0.0, 1.0, 0.0], [-p.sin(), 0.0, p.cos()]];
        let rx = [[1.0, 0.0, 0.0], [0.0, r.cos(), -r.sin()], [0.0, r.sin(), r.cos()]];
        let expected = mat_mul(&mat_mul(&rz, &ry), &rx);
        let got = rotation_matrix(y, p, r);
        for i in 0..3 {
            for j in 0..3 {
                assert!((expected[i][j] - got[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn euler_round_trip() {
        let (y, p, r) = (2.5, 0.4, -1.9);
        let (y2, p2, r2) = euler_from_matrix(&rotation_matrix(y, p, r));
        assert!((y - y2).abs() < 1e-12 && (p - p2).abs() < 1e-12 && (r - r2).abs() < 1e-12);
    }

    #[test]
    fn rotation_is_about_centroid() {
        let mesh = TriangleMesh::new(
            vec![[10.0, 0.0, 0.0], [12.0, 0.0, 0.0], [11.0, 3.0, 0.0]],
            vec![[0, 1, 2]],
            None,
        )
        .unwrap();
        let pose = PoseParams {
            yaw: 1.3,
            ..PoseParams::identity()
        };
        let tris = apply_pose(&mesh, &pose);
        let cx = tris[0].iter().map(|p| p[0]).sum::<f64>() / 3.0;
        let cy = tris[0].iter().map(|p| p[1]).sum::<f64>() / 3.0;
        assert!((cx - 11.0).abs() < 1e-12 && (cy - 1.0).abs() < 1e-12);
    }

    fn hinge_mesh() -> TriangleMesh {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\nv 2 1 0\nv 1 1 0\n\
                    f 1 2 3\nf 2 4 5\nf 2 5 6\njoint panel 0 1 0 1 0 0\njf 2 3\n";
        TriangleMesh::parse(text, std::path::Path::new("hinge")).unwrap()
    }

    #[test]
    fn articulation_moves_only_members() {
        let mesh = hinge_mesh();
        let rest = apply_pose(&mesh, &PoseParams::identity());
        let folded = apply_pose(
            &mesh,
            &PoseParams {
                articulation: PI / 2.0,
                ..PoseParams::identity()
            },
        );
        assert_eq!(rest[0], folded[0]);
        // Panel folded 90 degrees about the y axis through x = 1: its far
        // edge projects onto the hinge line.
        for p in folded[1].iter().chain(folded[2].iter()) {
            assert!((p[0] - 1.0).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn zero_articulation_is_exact() {
        let mesh = hinge_mesh();
        let pose = PoseParams {
            yaw: 0.4,
            pitch: 0.2,
            roll: -0.3,
            tx: 5.5,
            ty: 7.25,
            scale: 3.0,
            articulation: 0.0,
        };
        let rigid = TriangleMesh::new(mesh.vertices().to_vec(), mesh.triangles().to_vec(), None).unwrap();
        assert_eq!(apply_pose(&mesh, &pose), apply_pose(&rigid, &pose));
    }

    #[test]
    fn bbox_visible_fraction() {
        let b = BBox2 {
            min: [-5.0, 0.0],
            max: [5.0, 10.0],
        };
        assert_eq!(b.visible_fraction(100.0, 100.0), 0.5);
        assert_eq!(b.diagonal(), 200f64.sqrt());
        let line = BBox2 {
            min: [3.0, -2.0],
            max: [3.0, 2.0],
        };
        assert_eq!(line.visible_fraction(10.0, 10.0), 0.5);
    }

    #[test]
    fn validate_rejects_bad_poses() {
        assert!(PoseParams::identity().validate().is_ok());
        let bad = PoseParams {
            scale: 0.0,
            ..PoseParams::identity()
        };
        assert!(bad.validate().is_err());
        let nan = PoseParams {
            roll: f64::NAN,
            ..PoseParams::identity()
        };
        assert!(nan.validate().is_err());
    }

    proptest! {
        #[test]
        fn identity_pose_is_exact(x in -1e3f64..1e3, y in -1e3f64..1e3, z in -1e3f64..1e3,
                                  ox in -50f64..50.0, oy in -50f64..50.0) {
            // Off-centre mesh: rotation about the centroid must still be exact.
            let mesh = TriangleMesh::new(
                vec![[x, y, z], [ox, oy, 1.0], [0.1, 0.7, -0.3]],
                vec![[0, 1, 2]],
                None,
            ).unwrap();
            let tris = apply_pose(&mesh, &PoseParams::identity());
            prop_assert_eq!(tris[0][0], [x, y]);
            prop_assert_eq!(tris[0][1], [ox, oy]);
        }
    }
}
