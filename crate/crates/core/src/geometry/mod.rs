//! Mesh model, affine camera and silhouette rasterization.

mod mesh;
mod pose;
mod raster;

pub use mesh::{load_mesh, Joint, TriangleMesh, Vec3};
pub use pose::{
    apply_pose, axis_angle_matrix, euler_from_matrix, mat_mul, projected_bbox, rotation_matrix,
    BBox2, Mat3, Point2, PoseParams, Triangle2,
};
pub use raster::{rasterize_silhouette, SilhouetteMask};

/// Renders the silhouette of `mesh` at `pose` into a `width x height` mask.
pub fn render_silhouette(
    mesh: &TriangleMesh,
    pose: &PoseParams,
    width: usize,
    height: usize,
) -> SilhouetteMask {
    rasterize_silhouette(&apply_pose(mesh, pose), width, height)
}
