//! Oriented bounding boxes, separating-axis overlap tests, and the cuboid
//! triangle meshes used for boards and finished-assembly obstacles.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use std::collections::HashMap;

use crate::se3::Pose;

/// Box centered on `center`, oriented by `rotation`, with `half_extents`
/// along its local axes.
#[derive(Clone, Debug)]
pub struct Obb {
    pub center: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
    pub half_extents: Vector3<f64>,
}

impl Obb {
    pub fn new(center: Vector3<f64>, rotation: UnitQuaternion<f64>, half_extents: Vector3<f64>) -> Self {
        Self {
            center,
            rotation,
            half_extents,
        }
    }

    /// Box centered on a pose's origin with the pose's axes.
    pub fn from_pose(pose: &Pose, half_extents: Vector3<f64>) -> Self {
        Self {
            center: pose.position,
            rotation: pose.rotation,
            half_extents,
        }
    }

    /// Re-express a box given in a local frame under `pose`.
    pub fn transformed(&self, pose: &Pose) -> Obb {
        Obb {
            center: pose.transform_point(&self.center),
            rotation: pose.rotation * self.rotation,
            half_extents: self.half_extents,
        }
    }

    /// Proxy box around the segment `a..b` with square cross-section of
    /// half-width `radius`, used for arm links and tool sticks.
    pub fn around_segment(a: &Vector3<f64>, b: &Vector3<f64>, radius: f64) -> Obb {
        let mid = (a + b) * 0.5;
        let d = b - a;
        let len = d.norm();
        let rotation = if len < 1e-12 {
            UnitQuaternion::identity()
        } else {
            UnitQuaternion::rotation_between(&Vector3::z(), &d)
                .unwrap_or_else(|| UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI))
        };
        Obb {
            center: mid,
            rotation,
            half_extents: Vector3::new(radius, radius, len * 0.5 + radius),
        }
    }

    pub fn contains_point(&self, p: &Vector3<f64>) -> bool {
        let local = self.rotation.inverse() * (p - self.center);
        local.x.abs() <= self.half_extents.x
            && local.y.abs() <= self.half_extents.y
            && local.z.abs() <= self.half_extents.z
    }

    /// Strict-interpenetration test via the 15 separating axes of the two
    /// box frames. Exact touching counts as separated.
    pub fn intersects(&self, other: &Obb) -> bool {
        let ra = self.rotation.to_rotation_matrix().into_inner();
        let rb = other.rotation.to_rotation_matrix().into_inner();
        let r = ra.transpose() * rb; // b axes in a frame
        let t_world = other.center - self.center;
        let t = ra.transpose() * t_world;

        let abs_r: Matrix3<f64> = r.map(f64::abs);
        let ea = self.half_extents;
        let eb = other.half_extents;

        // a face axes
        for i in 0..3 {
            let rb_proj = abs_r[(i, 0)] * eb.x + abs_r[(i, 1)] * eb.y + abs_r[(i, 2)] * eb.z;
            if t[i].abs() >= ea[i] + rb_proj {
                return false;
            }
        }
        // b face axes
        for j in 0..3 {
            let ra_proj = abs_r[(0, j)] * ea.x + abs_r[(1, j)] * ea.y + abs_r[(2, j)] * ea.z;
            let tb = t.x * r[(0, j)] + t.y * r[(1, j)] + t.z * r[(2, j)];
            if tb.abs() >= ra_proj + eb[j] {
                return false;
            }
        }
        // Edge-edge cross axes a_i x b_j. Strict inequality so that a
        // degenerate axis (near-parallel edges) never separates on its own.
        for i in 0..3 {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            for j in 0..3 {
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                let ra_proj = ea[i1] * abs_r[(i2, j)] + ea[i2] * abs_r[(i1, j)];
                let rb_proj = eb[j1] * abs_r[(i, j2)] + eb[j2] * abs_r[(i, j1)];
                let dist = (t[i2] * r[(i1, j)] - t[i1] * r[(i2, j)]).abs();
                if dist > ra_proj + rb_proj {
                    return false;
                }
            }
        }
        true
    }
}

/// Immutable collision environment: named boxes to test against.
#[derive(Clone, Debug, Default)]
pub struct ObstacleSet {
    pub boxes: Vec<(String, Obb)>,
}

impl ObstacleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, id: impl Into<String>, obb: Obb) {
        self.boxes.push((id.into(), obb));
    }

    pub fn first_hit(&self, probe: &Obb) -> Option<&str> {
        self.boxes
            .iter()
            .find(|(_, b)| b.intersects(probe))
            .map(|(id, _)| id.as_str())
    }

    pub fn hits_any(&self, probe: &Obb) -> bool {
        self.first_hit(probe).is_some()
    }
}

/// Indexed triangle mesh in a local frame.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Axis-aligned cuboid centered on the origin.
    pub fn cuboid(length: f64, width: f64, thickness: f64) -> Self {
        let (hx, hy, hz) = (length / 2.0, width / 2.0, thickness / 2.0);
        let vertices = vec![
            Vector3::new(-hx, -hy, -hz),
            Vector3::new(hx, -hy, -hz),
            Vector3::new(hx, hy, -hz),
            Vector3::new(-hx, hy, -hz),
            Vector3::new(-hx, -hy, hz),
            Vector3::new(hx, -hy, hz),
            Vector3::new(hx, hy, hz),
            Vector3::new(-hx, hy, hz),
        ];
        let triangles = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        Self {
            vertices,
            triangles,
        }
    }

    /// Euler check (V - E + F = 2) plus every edge shared by exactly two
    /// triangles.
    pub fn is_watertight(&self) -> bool {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        if edge_count.values().any(|&c| c != 2) {
            return false;
        }
        let v = self.vertices.len() as i64;
        let e = edge_count.len() as i64;
        let f = self.triangles.len() as i64;
        v - e + f == 2
    }

    pub fn world_triangles<'a>(
        &'a self,
        pose: &'a Pose,
    ) -> impl Iterator<Item = [Vector3<f64>; 3]> + 'a {
        self.triangles.iter().map(move |tri| {
            [
                pose.transform_point(&self.vertices[tri[0]]),
                pose.transform_point(&self.vertices[tri[1]]),
                pose.transform_point(&self.vertices[tri[2]]),
            ]
        })
    }
}

/// A mesh instance placed in the world; boards are cuboids, so the box test
/// is exact for them.
#[derive(Clone, Debug)]
pub struct PlacedMesh {
    pub id: String,
    pub mesh: TriMesh,
    pub half_extents: Vector3<f64>,
    pub pose: Pose,
}

impl PlacedMesh {
    pub fn obb(&self) -> Obb {
        Obb::from_pose(&self.pose, self.half_extents)
    }
}
