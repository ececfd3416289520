use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{closest_point_on_triangle, dist2, triangle_area, Vec3};
use crate::mesh::{Mesh, ZERO_AREA_EPS};

pub const DEFAULT_LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        }
    }

    fn grow(&mut self, p: Vec3) {
        for (i, x) in p.into_iter().enumerate() {
            self.min[i] = self.min[i].min(x);
            self.max[i] = self.max[i].max(x);
        }
    }

    /// Pads the box so rounding in the triangle query can never put a
    /// closest point outside it.
    fn padded(mut self) -> Self {
        let ext = (0..3)
            .map(|i| self.max[i] - self.min[i])
            .fold(0.0, f64::max);
        let mag = (0..3)
            .map(|i| self.min[i].abs().max(self.max[i].abs()))
            .fold(0.0, f64::max);
        let pad = 1e-9 * (ext + mag) + 1e-12;
        for i in 0..3 {
            self.min[i] -= pad;
            self.max[i] += pad;
        }
        self
    }

    fn dist2(&self, p: Vec3) -> f64 {
        (0..3)
            .map(|i| {
                let d = if p[i] < self.min[i] {
                    self.min[i] - p[i]
                } else if p[i] > self.max[i] {
                    p[i] - self.max[i]
                } else {
                    0.0
                };
                d * d
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        bounds: Aabb,
        start: usize,
        end: usize,
    },
    Inner {
        bounds: Aabb,
        left: usize,
        right: usize,
    },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Axis-aligned bounding-box hierarchy over the non-degenerate triangles
/// of a mesh, split at the centroid median of the longest axis.
#[derive(Debug, Clone)]
pub struct TriangleBvh {
    triangles: Vec<[Vec3; 3]>,
    nodes: Vec<Node>,
}

impl TriangleBvh {
    pub fn new(mesh: &Mesh, leaf_size: usize) -> Result<Self> {
        if leaf_size == 0 {
            return Err(Error::InvalidArgument(
                "BVH leaf size must be at least 1".into(),
            ));
        }
        let n = mesh.vertex_count();
        let mut triangles = Vec::with_capacity(mesh.face_count());
        for f in &mesh.faces {
            if f.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "face {f:?} references a missing vertex"
                )));
            }
            let t = [
                mesh.vertices[f[0]],
                mesh.vertices[f[1]],
                mesh.vertices[f[2]],
            ];
            if t.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("mesh vertices".into()));
            }
            if triangle_area(t[0], t[1], t[2]) >= ZERO_AREA_EPS {
                triangles.push(t);
            }
        }
        if triangles.is_empty() {
            return Err(Error::Degenerate(
                "mesh has no non-degenerate triangle".into(),
            ));
        }
        let centroids: Vec<Vec3> = triangles
            .iter()
            .map(|t| {
                let mut c = [0.0; 3];
                for (i, ci) in c.iter_mut().enumerate() {
                    *ci = (t[0][i] + t[1][i] + t[2][i]) / 3.0;
                }
                c
            })
            .collect();
        let mut order: Vec<usize> = (0..triangles.len()).collect();
        let mut nodes = Vec::new();
        build(
            &triangles,
            &centroids,
            &mut order,
            0,
            triangles.len(),
            leaf_size,
            &mut nodes,
        );
        let triangles = order.iter().map(|&i| triangles[i]).collect();
        Ok(TriangleBvh { triangles, nodes })
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Exact distance from `p` to the nearest triangle.
    pub fn distance(&self, p: Vec3) -> f64 {
        let mut best = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match &self.nodes[id] {
                Node::Leaf { bounds, start, end } => {
                    if bounds.dist2(p) > best {
                        continue;
                    }
                    for t in &self.triangles[*start..*end] {
                        let (q, _) = closest_point_on_triangle(p, t[0], t[1], t[2]);
                        best = best.min(dist2(p, q));
                    }
                }
                Node::Inner {
                    bounds,
                    left,
                    right,
                } => {
                    if bounds.dist2(p) > best {
                        continue;
                    }
                    let (dl, dr) = (
                        self.nodes[*left].bounds().dist2(p),
                        self.nodes[*right].bounds().dist2(p),
                    );
                    if dl <= dr {
                        stack.push(*right);
                        stack.push(*left);
                    } else {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
            }
        }
        best.sqrt()
    }
}

fn build(
    tris: &[[Vec3; 3]],
    centroids: &[Vec3],
    order: &mut [usize],
    start: usize,
    end: usize,
    leaf_size: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut bounds = Aabb::empty();
    for &i in &order[start..end] {
        tris[i].iter().for_each(|v| bounds.grow(*v));
    }
    let bounds = bounds.padded();
    let id = nodes.len();
    if end - start <= leaf_size {
        nodes.push(Node::Leaf { bounds, start, end });
        return id;
    }
    nodes.push(Node::Leaf { bounds, start, end });
    let mut cb = Aabb::empty();
    order[start..end]
        .iter()
        .for_each(|&i| cb.grow(centroids[i]));
    let axis = (0..3)
        .max_by(|&a, &b| (cb.max[a] - cb.min[a]).total_cmp(&(cb.max[b] - cb.min[b])))
        .unwrap();
    order[start..end].sort_by(|&a, &b| {
        centroids[a][axis]
            .total_cmp(&centroids[b][axis])
            .then(a.cmp(&b))
    });
    let mid = start + (end - start) / 2;
    let left = build(tris, centroids, order, start, mid, leaf_size, nodes);
    let right = build(tris, centroids, order, mid, end, leaf_size, nodes);
    nodes[id] = Node::Inner {
        bounds,
        left,
        right,
    };
    id
}

/// Distance from each point to the closest point on `mesh`.
pub fn point_to_mesh_distances(points: &[Vec3], mesh: &Mesh) -> Result<Vec<f64>> {
    point_to_mesh_distances_with(points, mesh, DEFAULT_LEAF_SIZE)
}

pub fn point_to_mesh_distances_with(
    points: &[Vec3],
    mesh: &Mesh,
    leaf_size: usize,
) -> Result<Vec<f64>> {
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("query points".into()));
    }
    let bvh = TriangleBvh::new(mesh, leaf_size)?;
    Ok(points.par_iter().map(|p| bvh.distance(*p)).collect())
}
