//! Mesh coarsening by quadric-error half-edge collapse, with a selection
//! matrix for down-sampling and barycentric interpolation for up-sampling.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use super::{face_adjacency, SparseMatrix};
use crate::error::{Error, Result};
use crate::geom::{
    closest_point_on_segment, closest_point_on_triangle, cross, dist2, dot, norm, sub,
    triangle_area, Vec3,
};
use crate::mesh::Mesh;

const BOUNDARY_WEIGHT: f64 = 1.0;
const AREA_EPS: f64 = 1e-12;

/// Down/up transforms between a fine mesh and its decimated version.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingPair {
    /// `M × N` one-hot selection of the surviving vertices.
    pub down: SparseMatrix,
    /// `N × M` barycentric interpolation from the coarse mesh.
    pub up: SparseMatrix,
    pub coarse_mesh: Mesh,
    /// Vertex graph of the coarse mesh. Collapse keeps edges alive even
    /// where every incident face has vanished, so this can be richer than
    /// the face adjacency of `coarse_mesh`.
    pub coarse_adjacency: SparseMatrix,
    /// Fine index of each coarse vertex, ascending.
    pub kept: Vec<usize>,
    /// `(removed, kept)` fine-vertex pairs in collapse order.
    pub collapses: Vec<(usize, usize)>,
    /// False if the vertex graph ran out of edges before the target count.
    pub reached_target: bool,
}

impl PoolingPair {
    pub fn identity(mesh: &Mesh) -> Result<Self> {
        let adj = face_adjacency(mesh.vertex_count(), &mesh.faces)?;
        Ok(Self::identity_with_graph(mesh, adj))
    }

    fn identity_with_graph(mesh: &Mesh, adjacency: SparseMatrix) -> Self {
        let n = mesh.vertex_count();
        PoolingPair {
            down: SparseMatrix::identity(n),
            up: SparseMatrix::identity(n),
            coarse_mesh: mesh.clone(),
            coarse_adjacency: adjacency,
            kept: (0..n).collect(),
            collapses: Vec::new(),
            reached_target: true,
        }
    }

    pub fn fine_count(&self) -> usize {
        self.down.cols()
    }

    pub fn coarse_count(&self) -> usize {
        self.down.rows()
    }
}

/// Symmetric 4×4 quadric stored as its upper triangle.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Quadric([f64; 10]);

impl Quadric {
    pub(crate) fn plane(n: Vec3, d: f64, w: f64) -> Self {
        let p = [n[0], n[1], n[2], d];
        let mut q = [0.0; 10];
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                q[k] = w * p[i] * p[j];
                k += 1;
            }
        }
        Quadric(q)
    }

    fn add(&mut self, o: &Quadric) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a += b;
        }
    }

    pub(crate) fn eval(&self, v: Vec3) -> f64 {
        let p = [v[0], v[1], v[2], 1.0];
        let mut s = 0.0;
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                let t = self.0[k] * p[i] * p[j];
                s += if i == j { t } else { 2.0 * t };
                k += 1;
            }
        }
        s
    }
}

/// Plane quadrics of every non-degenerate face plus perpendicular
/// constraint planes along boundary edges.
pub(crate) fn vertex_quadrics(mesh: &Mesh) -> Vec<Quadric> {
    let mut q = vec![Quadric::default(); mesh.vertex_count()];
    let mut edge_faces: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
    let mut normals = vec![None; mesh.faces.len()];
    for (fi, f) in mesh.faces.iter().enumerate() {
        let [a, b, c] = f.map(|i| mesh.vertices[i]);
        let n = cross(sub(b, a), sub(c, a));
        let len = norm(n);
        if len > 2.0 * AREA_EPS {
            let n = [n[0] / len, n[1] / len, n[2] / len];
            normals[fi] = Some(n);
            let plane = Quadric::plane(n, -dot(n, a), 1.0);
            for &v in f {
                q[v].add(&plane);
            }
        }
        for k in 0..3 {
            let (u, v) = (f[k], f[(k + 1) % 3]);
            edge_faces.entry((u.min(v), u.max(v))).or_default().push(fi);
        }
    }
    for ((u, v), faces) in edge_faces {
        if faces.len() != 1 {
            continue;
        }
        let Some(fnormal) = normals[faces[0]] else {
            continue;
        };
        let (pu, pv) = (mesh.vertices[u], mesh.vertices[v]);
        let e = sub(pv, pu);
        let n = cross(e, fnormal);
        let len = norm(n);
        if len == 0.0 {
            continue;
        }
        let n = [n[0] / len, n[1] / len, n[2] / len];
        let plane = Quadric::plane(n, -dot(n, pu), BOUNDARY_WEIGHT);
        q[u].add(&plane);
        q[v].add(&plane);
    }
    q
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    len2: f64,
    removed: usize,
    kept: usize,
    stamp: (u64, u64),
}

impl Candidate {
    fn key(&self) -> (f64, f64, usize, usize) {
        (
            self.cost,
            self.len2,
            self.removed.min(self.kept),
            self.removed.max(self.kept),
        )
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // reversed so that BinaryHeap pops the cheapest collapse
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0)
            .then(b.1.total_cmp(&a.1))
            .then(b.2.cmp(&a.2))
            .then(b.3.cmp(&a.3))
    }
}

struct Decimator<'a> {
    pos: &'a [Vec3],
    quadric: Vec<Quadric>,
    alive: Vec<bool>,
    stamp: Vec<u64>,
    nbrs: Vec<BTreeSet<usize>>,
    faces: Vec<Option<[usize; 3]>>,
    incident: Vec<BTreeSet<usize>>,
    alive_count: usize,
}

impl<'a> Decimator<'a> {
    fn new(mesh: &'a Mesh, adjacency: &SparseMatrix) -> Self {
        let n = mesh.vertex_count();
        let mut nbrs = vec![BTreeSet::new(); n];
        for (a, b, _) in adjacency.entries() {
            if a != b {
                nbrs[a].insert(b);
                nbrs[b].insert(a);
            }
        }
        let mut incident = vec![BTreeSet::new(); n];
        for (fi, f) in mesh.faces.iter().enumerate() {
            for &v in f {
                incident[v].insert(fi);
            }
        }
        Decimator {
            pos: &mesh.vertices,
            quadric: vertex_quadrics(mesh),
            alive: vec![true; n],
            stamp: vec![0; n],
            nbrs,
            faces: mesh.faces.iter().map(|f| Some(*f)).collect(),
            incident,
            alive_count: n,
        }
    }

    /// Cheaper of the two half-edge collapses along `(a, b)`.
    fn candidate(&self, a: usize, b: usize) -> Candidate {
        let mut q = self.quadric[a];
        q.add(&self.quadric[b]);
        let keep_b = q.eval(self.pos[b]);
        let keep_a = q.eval(self.pos[a]);
        let (removed, kept, cost) = match keep_b.total_cmp(&keep_a) {
            Ordering::Less => (a, b, keep_b),
            Ordering::Greater => (b, a, keep_a),
            // tie: keep the lower index
            Ordering::Equal => (a.max(b), a.min(b), keep_b),
        };
        Candidate {
            cost,
            len2: dist2(self.pos[a], self.pos[b]),
            removed,
            kept,
            stamp: (self.stamp[removed], self.stamp[kept]),
        }
    }

    fn is_current(&self, c: &Candidate) -> bool {
        self.alive[c.removed]
            && self.alive[c.kept]
            && c.stamp == (self.stamp[c.removed], self.stamp[c.kept])
            && self.nbrs[c.removed].contains(&c.kept)
    }

    /// Link condition: the common neighbours of the edge endpoints are
    /// exactly the opposite vertices of the faces sharing the edge.
    fn link_ok(&self, a: usize, b: usize) -> bool {
        let common = self.nbrs[a].intersection(&self.nbrs[b]).count();
        let shared = self.incident[a]
            .iter()
            .filter(|&&f| self.faces[f].is_some_and(|t| t.contains(&b)))
            .count();
        common == shared
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (a, ns) in self.nbrs.iter().enumerate() {
            if !self.alive[a] {
                continue;
            }
            e.extend(ns.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        e
    }

    fn heap(&self) -> BinaryHeap<Candidate> {
        self.edges()
            .into_iter()
            .map(|(a, b)| self.candidate(a, b))
            .collect()
    }

    fn collapse(&mut self, removed: usize, kept: usize) {
        let faces: Vec<usize> = self.incident[removed].iter().copied().collect();
        for fi in faces {
            let Some(mut f) = self.faces[fi] else {
                continue;
            };
            let drop = f.contains(&kept) || {
                f.iter_mut()
                    .filter(|v| **v == removed)
                    .for_each(|v| *v = kept);
                let key = sorted(f);
                self.incident[kept]
                    .iter()
                    .any(|&g| self.faces[g].is_some_and(|t| sorted(t) == key))
            };
            if drop {
                for v in self.faces[fi].unwrap() {
                    self.incident[v].remove(&fi);
                }
                self.faces[fi] = None;
            } else {
                self.faces[fi] = Some(f);
                self.incident[removed].remove(&fi);
                self.incident[kept].insert(fi);
            }
        }
        let moved: Vec<usize> = std::mem::take(&mut self.nbrs[removed])
            .into_iter()
            .collect();
        for c in moved {
            self.nbrs[c].remove(&removed);
            if c != kept {
                self.nbrs[c].insert(kept);
                self.nbrs[kept].insert(c);
            }
        }
        let qr = self.quadric[removed];
        self.quadric[kept].add(&qr);
        self.alive[removed] = false;
        self.alive_count -= 1;
        self.stamp[removed] += 1;
        self.stamp[kept] += 1;
    }

    /// Collapses edges until `target` vertices remain. Link-condition-safe
    /// collapses are preferred; when none is left the cheapest remaining
    /// edge is collapsed regardless.
    fn run(&mut self, target: usize, log: &mut Vec<(usize, usize)>) -> bool {
        let mut heap = self.heap();
        let mut progressed = false;
        while self.alive_count > target {
            let mut next = None;
            while let Some(c) = heap.pop() {
                if self.is_current(&c) && self.link_ok(c.removed, c.kept) {
                    next = Some(c);
                    break;
                }
            }
            let chosen = match next {
                Some(c) => c,
                None if progressed => {
                    heap = self.heap();
                    progressed = false;
                    continue;
                }
                None => match self.heap().pop() {
                    Some(c) => c,
                    None => return false,
                },
            };
            self.collapse(chosen.removed, chosen.kept);
            log.push((chosen.removed, chosen.kept));
            progressed = true;
            let k = chosen.kept;
            for &c in &self.nbrs[k] {
                heap.push(self.candidate(k, c));
            }
            if next.is_none() {
                heap = self.heap();
            }
        }
        true
    }
}

fn sorted(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

/// Decimates `mesh` to `⌈ratio·N⌉` vertices and builds the pooling transforms.
pub fn build_pooling(mesh: &Mesh, ratio: f64) -> Result<PoolingPair> {
    check_ratio(ratio)?;
    mesh.check()?;
    let adj = face_adjacency(mesh.vertex_count(), &mesh.faces)?;
    pool_with_graph(mesh, &adj, ratio)
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio > 0.0 && ratio <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "pooling ratio must lie in (0, 1], got {ratio}"
        )))
    }
}

/// Pooling of an already-coarsened level whose vertex graph is given
/// explicitly. Used when chaining levels inside a network.
pub(crate) fn pool_with_graph(
    mesh: &Mesh,
    adjacency: &SparseMatrix,
    ratio: f64,
) -> Result<PoolingPair> {
    check_ratio(ratio)?;
    let n = mesh.vertex_count();
    if n == 0 || adjacency.rows() != n {
        return Err(Error::mismatch("pooling graph", n, adjacency.rows()));
    }
    let target = ((ratio * n as f64).ceil() as usize).clamp(1, n);
    if target == n {
        return Ok(PoolingPair::identity_with_graph(mesh, adjacency.clone()));
    }

    let mut dec = Decimator::new(mesh, adjacency);
    let mut collapses = Vec::new();
    let reached_target = dec.run(target, &mut collapses);

    let kept: Vec<usize> = (0..n).filter(|&v| dec.alive[v]).collect();
    let mut coarse_of = vec![usize::MAX; n];
    for (ci, &v) in kept.iter().enumerate() {
        coarse_of[v] = ci;
    }
    let mut seen = HashSet::new();
    let coarse_faces: Vec<[usize; 3]> = dec
        .faces
        .iter()
        .flatten()
        .filter(|f| seen.insert(sorted(**f)))
        .map(|f| f.map(|v| coarse_of[v]))
        .collect();
    let coarse_vertices: Vec<Vec3> = kept.iter().map(|&v| mesh.vertices[v]).collect();
    let coarse_edges: Vec<(usize, usize)> = dec
        .edges()
        .into_iter()
        .map(|(a, b)| (coarse_of[a], coarse_of[b]))
        .collect();

    let m = kept.len();
    let down = SparseMatrix::from_triplets(
        m,
        n,
        kept.iter()
            .enumerate()
            .map(|(ci, &v)| (ci, v, 1.0))
            .collect(),
    )?;

    let tris: Vec<[usize; 3]> = coarse_faces
        .iter()
        .copied()
        .filter(|f| {
            let [a, b, c] = f.map(|i| coarse_vertices[i]);
            triangle_area(a, b, c) >= AREA_EPS
        })
        .collect();
    let mut up = Vec::with_capacity(3 * n);
    for (v, &c) in coarse_of.iter().enumerate().take(n) {
        if c != usize::MAX {
            up.push((v, c, 1.0));
            continue;
        }
        let p = mesh.vertices[v];
        let weights = interpolation_weights(p, &coarse_vertices, &tris, &coarse_edges);
        let total: f64 = weights.iter().map(|w| w.1).sum();
        up.extend(weights.into_iter().map(|(ci, w)| (v, ci, w / total)));
    }
    let up = SparseMatrix::from_triplets(n, m, up)?;
    let coarse_adjacency = SparseMatrix::from_triplets(
        m,
        m,
        coarse_edges
            .iter()
            .flat_map(|&(a, b)| [(a, b, 1.0), (b, a, 1.0)])
            .collect(),
    )?;

    Ok(PoolingPair {
        down,
        up,
        coarse_mesh: Mesh {
            vertices: coarse_vertices,
            faces: coarse_faces,
        },
        coarse_adjacency,
        kept,
        collapses,
        reached_target,
    })
}

/// Barycentric weights of the closest point on the coarse surface, falling
/// back to coarse edges and then to the nearest coarse vertex.
fn interpolation_weights(
    p: Vec3,
    verts: &[Vec3],
    tris: &[[usize; 3]],
    edges: &[(usize, usize)],
) -> Vec<(usize, f64)> {
    let mut best: Option<(f64, Vec<(usize, f64)>)> = None;
    let mut consider = |d: f64, w: Vec<(usize, f64)>| {
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, w));
        }
    };
    if !tris.is_empty() {
        for t in tris {
            let (q, bary) = closest_point_on_triangle(p, verts[t[0]], verts[t[1]], verts[t[2]]);
            consider(dist2(p, q), t.iter().copied().zip(bary).collect());
        }
    } else if !edges.is_empty() {
        for &(a, b) in edges {
            let (q, w) = closest_point_on_segment(p, verts[a], verts[b]);
            consider(dist2(p, q), vec![(a, w[0]), (b, w[1])]);
        }
    } else {
        for (i, &q) in verts.iter().enumerate() {
            consider(dist2(p, q), vec![(i, 1.0)]);
        }
    }
    let (_, mut w) = best.expect("coarse mesh has at least one vertex");
    w.retain(|&(_, x)| x > 0.0);
    if w.is_empty() {
        unreachable!("closest-point weights sum to one");
    }
    w
}
