//! Combinatorial open surfaces: raw file data, validation and the derived
//! incidence structure used by every topology routine.
//!
//! A mesh is a finite oriented 2-complex. Every boundary cycle of the complex
//! is an *end*: the surface continues past it to infinity with infinite area.
//! Faces are listed counter-clockwise with respect to the area form.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::SurfaceError;

/// Global chart carried by generated meshes. Coordinates are `(x, y)` on the
/// plane and `(theta, y)` on the cylinder, with `theta` in `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Plane,
    Cylinder,
}

/// On-disk mesh description. Ends are vertex cycles; consecutive entries
/// (cyclically) name the end's edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshData {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartKind>,
    pub vertices: Vec<u64>,
    pub faces: Vec<Vec<u64>>,
    pub face_area: Vec<f64>,
    pub ends: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[f64; 2]>>,
}

/// One violated mesh invariant, with the offending element identifiers.
#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    DuplicateVertexId(u64),
    UnknownVertex { face: usize, vertex: u64 },
    DegenerateFace(usize),
    AreaCountMismatch { faces: usize, areas: usize },
    NonPositiveArea(usize),
    NonManifoldEdge { edge: (u64, u64), faces: usize },
    InconsistentOrientation { edge: (u64, u64) },
    NonManifoldVertex(u64),
    IsolatedVertex(u64),
    UnmarkedEnd(Vec<u64>),
    InvalidEnd(usize),
    NoEnds,
    Disconnected { components: usize },
    CoordsMismatch { vertices: usize, coords: usize },
    NonFiniteCoordinate(u64),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateVertexId(v) => write!(f, "duplicate vertex id {v}"),
            Diagnostic::UnknownVertex { face, vertex } => {
                write!(f, "face {face} references unknown vertex {vertex}")
            }
            Diagnostic::DegenerateFace(face) => {
                write!(f, "face {face} has fewer than 3 distinct vertices")
            }
            Diagnostic::AreaCountMismatch { faces, areas } => {
                write!(f, "{faces} faces but {areas} face areas")
            }
            Diagnostic::NonPositiveArea(face) => write!(f, "face {face} has non-positive area"),
            Diagnostic::NonManifoldEdge { edge, faces } => {
                write!(f, "edge {:?} bounds {faces} faces", edge)
            }
            Diagnostic::InconsistentOrientation { edge } => {
                write!(f, "faces on edge {:?} have incompatible orientations", edge)
            }
            Diagnostic::NonManifoldVertex(v) => write!(f, "vertex {v} is not a manifold point"),
            Diagnostic::IsolatedVertex(v) => write!(f, "vertex {v} belongs to no face"),
            Diagnostic::UnmarkedEnd(cycle) => {
                write!(f, "boundary cycle {:?} is not marked as an end", cycle)
            }
            Diagnostic::InvalidEnd(i) => {
                write!(f, "end {i} is not a cycle of boundary edges or is listed twice")
            }
            Diagnostic::NoEnds => write!(f, "mesh has no ends (surface must be open)"),
            Diagnostic::Disconnected { components } => {
                write!(f, "mesh has {components} connected components")
            }
            Diagnostic::CoordsMismatch { vertices, coords } => {
                write!(f, "{vertices} vertices but {coords} coordinates")
            }
            Diagnostic::NonFiniteCoordinate(v) => write!(f, "vertex {v} has a non-finite coordinate"),
        }
    }
}

/// An undirected edge `a < b` together with the faces on either side:
/// `left` contains the half-edge `a -> b`, `right` contains `b -> a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub verts: [usize; 2],
    pub left: Option<usize>,
    pub right: Option<usize>,
}

impl Edge {
    pub fn faces(&self) -> impl Iterator<Item = usize> {
        self.left.into_iter().chain(self.right)
    }

    pub fn is_boundary(&self) -> bool {
        self.left.is_none() || self.right.is_none()
    }
}

/// Counter-clockwise neighbourhood of a vertex. `gaps[i]` is the face between
/// `neighbors[i]` and `neighbors[i + 1]` (cyclically); `None` marks the
/// single open gap of a vertex on an end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexRing {
    pub neighbors: Vec<usize>,
    pub gaps: Vec<Option<usize>>,
}

impl VertexRing {
    pub fn is_boundary(&self) -> bool {
        self.gaps.iter().any(Option::is_none)
    }
}

/// A validated open surface. Construct with [`SurfaceMesh::from_data`].
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    name: String,
    chart: Option<ChartKind>,
    ids: Vec<u64>,
    faces: Vec<Vec<usize>>,
    face_area: Vec<f64>,
    ends: Vec<Vec<usize>>,
    coords: Option<Vec<[f64; 2]>>,
    edges: Vec<Edge>,
    edge_index: HashMap<(usize, usize), usize>,
    face_edges: Vec<Vec<usize>>,
    rings: Vec<VertexRing>,
    edge_end: Vec<Option<usize>>,
    vertex_end: Vec<Option<usize>>,
}

struct Incidence {
    edges: Vec<Edge>,
    edge_index: HashMap<(usize, usize), usize>,
    face_edges: Vec<Vec<usize>>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Builds edges from faces. Returns diagnostics for non-manifold edges and
/// orientation clashes (the offending faces are dropped from the edge record).
fn build_incidence(faces: &[Vec<usize>], ids: &[u64], diags: &mut Vec<Diagnostic>) -> Incidence {
    let mut edges: Vec<Edge> = Vec::new();
    let mut edge_index = HashMap::new();
    let mut face_edges = Vec::with_capacity(faces.len());
    let mut reported = BTreeSet::new();
    for (f, face) in faces.iter().enumerate() {
        let mut fe = Vec::with_capacity(face.len());
        for i in 0..face.len() {
            let a = face[i];
            let b = face[(i + 1) % face.len()];
            let k = key(a, b);
            let e = *edge_index.entry(k).or_insert_with(|| {
                edges.push(Edge { verts: [k.0, k.1], left: None, right: None });
                edges.len() - 1
            });
            let slot = if a < b { &mut edges[e].left } else { &mut edges[e].right };
            if slot.is_some() {
                if reported.insert(e) {
                    let other = edges[e].faces().count();
                    if other == 2 {
                        diags.push(Diagnostic::NonManifoldEdge {
                            edge: (ids[k.0], ids[k.1]),
                            faces: 3,
                        });
                    } else {
                        diags.push(Diagnostic::InconsistentOrientation {
                            edge: (ids[k.0], ids[k.1]),
                        });
                    }
                }
            } else {
                *slot = Some(f);
            }
            fe.push(e);
        }
        face_edges.push(fe);
    }
    Incidence { edges, edge_index, face_edges }
}

/// Ring of a vertex from its face corners; `None` if the corners do not form a
/// single fan (non-manifold vertex).
fn build_ring(v: usize, corners: &[(usize, usize, usize)]) -> Option<VertexRing> {
    // corner = (face, next, prev): ccw from v->next through face to v->prev
    let mut succ: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut has_pred: BTreeSet<usize> = BTreeSet::new();
    for &(f, next, prev) in corners {
        if succ.insert(next, (f, prev)).is_some() {
            return None;
        }
        has_pred.insert(prev);
    }
    let starts: Vec<usize> = succ.keys().copied().filter(|n| !has_pred.contains(n)).collect();
    let (start, open) = match starts.len() {
        0 => (*succ.keys().min()?, false),
        1 => (starts[0], true),
        _ => return None,
    };
    let mut neighbors = vec![start];
    let mut gaps = Vec::new();
    let mut cur = start;
    loop {
        match succ.get(&cur) {
            Some(&(f, nxt)) => {
                gaps.push(Some(f));
                if !open && nxt == start {
                    break;
                }
                if neighbors.contains(&nxt) {
                    return None;
                }
                neighbors.push(nxt);
                cur = nxt;
            }
            None => {
                gaps.push(None);
                break;
            }
        }
    }
    if gaps.iter().flatten().count() != corners.len() {
        return None;
    }
    let _ = v;
    Some(VertexRing { neighbors, gaps })
}

/// Traces boundary cycles: half-edges with no face on their left, i.e. the
/// reverse of a boundary face edge. Requires manifold vertices.
fn trace_boundary(
    n: usize,
    edges: &[Edge],
) -> Result<Vec<Vec<usize>>, usize> {
    let mut out_of: Vec<Option<usize>> = vec![None; n];
    for e in edges {
        let [a, b] = e.verts;
        let (from, to) = match (e.left, e.right) {
            (Some(_), None) => (b, a),
            (None, Some(_)) => (a, b),
            _ => continue,
        };
        if out_of[from].replace(to).is_some() {
            return Err(from);
        }
    }
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for s in 0..n {
        if seen[s] || out_of[s].is_none() {
            continue;
        }
        let mut cycle = Vec::new();
        let mut cur = s;
        while !seen[cur] {
            seen[cur] = true;
            cycle.push(cur);
            match out_of[cur] {
                Some(nxt) => cur = nxt,
                None => return Err(cur),
            }
        }
        if cur != s {
            return Err(cur);
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

fn canonical_cycle(c: &[usize]) -> Vec<usize> {
    let k = c.len();
    let m = (0..k).min_by_key(|&i| c[i]).unwrap_or(0);
    let fwd: Vec<usize> = (0..k).map(|i| c[(m + i) % k]).collect();
    let bwd: Vec<usize> = (0..k).map(|i| c[(m + k - i) % k]).collect();
    fwd.min(bwd)
}

/// Checks every mesh invariant. An empty list means the data describes a
/// valid open surface.
pub fn validate_mesh(data: &MeshData) -> Vec<Diagnostic> {
    validate_and_build(data).err().unwrap_or_default()
}

fn validate_and_build(data: &MeshData) -> Result<SurfaceMesh, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let n = data.vertices.len();
    let mut index: HashMap<u64, usize> = HashMap::with_capacity(n);
    for (i, &id) in data.vertices.iter().enumerate() {
        if index.insert(id, i).is_some() {
            diags.push(Diagnostic::DuplicateVertexId(id));
        }
    }
    let mut faces = Vec::with_capacity(data.faces.len());
    for (f, face) in data.faces.iter().enumerate() {
        let mut local = Vec::with_capacity(face.len());
        for &vid in face {
            match index.get(&vid) {
                Some(&i) => local.push(i),
                None => diags.push(Diagnostic::UnknownVertex { face: f, vertex: vid }),
            }
        }
        let distinct: BTreeSet<usize> = local.iter().copied().collect();
        if face.len() < 3 || distinct.len() != face.len() {
            diags.push(Diagnostic::DegenerateFace(f));
        }
        faces.push(local);
    }
    if data.face_area.len() != data.faces.len() {
        diags.push(Diagnostic::AreaCountMismatch {
            faces: data.faces.len(),
            areas: data.face_area.len(),
        });
    }
    for (f, &a) in data.face_area.iter().enumerate() {
        if !(a > 0.0 && a.is_finite()) {
            diags.push(Diagnostic::NonPositiveArea(f));
        }
    }
    if let Some(coords) = &data.coords {
        if coords.len() != n {
            diags.push(Diagnostic::CoordsMismatch { vertices: n, coords: coords.len() });
        }
        for (i, c) in coords.iter().enumerate() {
            if !(c[0].is_finite() && c[1].is_finite()) {
                diags.push(Diagnostic::NonFiniteCoordinate(data.vertices.get(i).copied().unwrap_or(i as u64)));
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let ids = data.vertices.clone();
    let inc = build_incidence(&faces, &ids, &mut diags);

    let mut corners: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n];
    for (f, face) in faces.iter().enumerate() {
        let k = face.len();
        for i in 0..k {
            corners[face[i]].push((f, face[(i + 1) % k], face[(i + k - 1) % k]));
        }
    }
    let mut rings = Vec::with_capacity(n);
    for v in 0..n {
        if corners[v].is_empty() {
            diags.push(Diagnostic::IsolatedVertex(ids[v]));
            rings.push(VertexRing { neighbors: vec![], gaps: vec![] });
            continue;
        }
        match build_ring(v, &corners[v]) {
            Some(r) => rings.push(r),
            None => {
                diags.push(Diagnostic::NonManifoldVertex(ids[v]));
                rings.push(VertexRing { neighbors: vec![], gaps: vec![] });
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    // connectivity through shared edges
    let mut dsu = Dsu::new(faces.len());
    for e in &inc.edges {
        if let (Some(a), Some(b)) = (e.left, e.right) {
            dsu.union(a, b);
        }
    }
    let components = (0..faces.len()).filter(|&f| dsu.find(f) == f).count();
    if components != 1 {
        diags.push(Diagnostic::Disconnected { components });
    }

    let boundary = match trace_boundary(n, &inc.edges) {
        Ok(b) => b,
        Err(v) => {
            diags.push(Diagnostic::NonManifoldVertex(ids[v]));
            return Err(diags);
        }
    };
    let mut ends: Vec<Vec<usize>> = Vec::new();
    let mut end_keys = BTreeSet::new();
    for (i, end) in data.ends.iter().enumerate() {
        let local: Option<Vec<usize>> = end.iter().map(|id| index.get(id).copied()).collect();
        let Some(local) = local else {
            diags.push(Diagnostic::InvalidEnd(i));
            continue;
        };
        let ok = local.len() >= 3
            && (0..local.len()).all(|j| {
                let a = local[j];
                let b = local[(j + 1) % local.len()];
                inc.edge_index
                    .get(&key(a, b))
                    .is_some_and(|&e| inc.edges[e].is_boundary())
            });
        if !ok || !end_keys.insert(canonical_cycle(&local)) {
            diags.push(Diagnostic::InvalidEnd(i));
            continue;
        }
        ends.push(local);
    }
    for cycle in &boundary {
        if !end_keys.contains(&canonical_cycle(cycle)) {
            diags.push(Diagnostic::UnmarkedEnd(cycle.iter().map(|&v| ids[v]).collect()));
        }
    }
    if data.ends.is_empty() {
        diags.push(Diagnostic::NoEnds);
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    // orient each end as its traced boundary cycle (exterior on the left)
    let traced: HashMap<Vec<usize>, &Vec<usize>> =
        boundary.iter().map(|c| (canonical_cycle(c), c)).collect();
    let ends: Vec<Vec<usize>> = ends
        .iter()
        .map(|e| traced[&canonical_cycle(e)].clone())
        .collect();

    let mut edge_end = vec![None; inc.edges.len()];
    let mut vertex_end = vec![None; n];
    for (i, end) in ends.iter().enumerate() {
        for j in 0..end.len() {
            let a = end[j];
            let b = end[(j + 1) % end.len()];
            edge_end[inc.edge_index[&key(a, b)]] = Some(i);
            vertex_end[a] = Some(i);
        }
    }

    Ok(SurfaceMesh {
        name: data.name.clone(),
        chart: data.chart,
        ids,
        faces,
        face_area: data.face_area.clone(),
        ends,
        coords: data.coords.clone(),
        edges: inc.edges,
        edge_index: inc.edge_index,
        face_edges: inc.face_edges,
        rings,
        edge_end,
        vertex_end,
    })
}

/// Path-compressed disjoint sets over `0..n`.
#[derive(Clone, Debug)]
pub(crate) struct Dsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let p = self.parent[x];
            self.parent[x] = root;
            x = p;
        }
        root
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.rank[a] < self.rank[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] += 1;
        }
        true
    }
}

impl SurfaceMesh {
    /// Validates `data` and builds the incidence structure.
    pub fn from_data(data: &MeshData) -> Result<Self, SurfaceError> {
        validate_and_build(data).map_err(SurfaceError::InvalidMesh)
    }

    /// Assembles a mesh from local faces, marking every boundary cycle as an
    /// end. Vertex ids are `0..n`.
    pub fn from_faces(
        name: &str,
        chart: Option<ChartKind>,
        n_vertices: usize,
        faces: Vec<Vec<usize>>,
        face_area: Vec<f64>,
        coords: Option<Vec<[f64; 2]>>,
    ) -> Result<Self, SurfaceError> {
        let ids: Vec<u64> = (0..n_vertices as u64).collect();
        let mut diags = Vec::new();
        let local: Vec<Vec<usize>> = faces.clone();
        if local.iter().flatten().any(|&v| v >= n_vertices) {
            return Err(SurfaceError::InvalidParams("face references missing vertex".into()));
        }
        let inc = build_incidence(&local, &ids, &mut diags);
        if !diags.is_empty() {
            return Err(SurfaceError::InvalidMesh(diags));
        }
        let boundary = trace_boundary(n_vertices, &inc.edges)
            .map_err(|v| SurfaceError::InvalidMesh(vec![Diagnostic::NonManifoldVertex(v as u64)]))?;
        let data = MeshData {
            name: name.to_string(),
            chart,
            vertices: ids,
            faces: faces.iter().map(|f| f.iter().map(|&v| v as u64).collect()).collect(),
            face_area,
            ends: boundary
                .iter()
                .map(|c| c.iter().map(|&v| v as u64).collect())
                .collect(),
            coords,
        };
        Self::from_data(&data)
    }

    pub fn to_data(&self) -> MeshData {
        MeshData {
            name: self.name.clone(),
            chart: self.chart,
            vertices: self.ids.clone(),
            faces: self
                .faces
                .iter()
                .map(|f| f.iter().map(|&v| self.ids[v]).collect())
                .collect(),
            face_area: self.face_area.clone(),
            ends: self
                .ends
                .iter()
                .map(|e| e.iter().map(|&v| self.ids[v]).collect())
                .collect(),
            coords: self.coords.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chart(&self) -> Option<ChartKind> {
        self.chart
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// External id of local vertex `v`.
    pub fn vertex_id(&self, v: usize) -> u64 {
        self.ids[v]
    }

    pub fn vertex_ids(&self) -> &[u64] {
        &self.ids
    }

    /// Local index of an external vertex id.
    pub fn vertex_index(&self, id: u64) -> Option<usize> {
        // ids of generated meshes are 0..n
        if (id as usize) < self.ids.len() && self.ids[id as usize] == id {
            return Some(id as usize);
        }
        self.ids.iter().position(|&x| x == id)
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &[usize] {
        &self.faces[f]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.face_area[f]
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_area
    }

    /// Sum of the finite face areas.
    pub fn total_area(&self) -> f64 {
        self.face_area.iter().sum()
    }

    pub fn face_edges(&self, f: usize) -> &[usize] {
        &self.face_edges[f]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&key(a, b)).copied()
    }

    /// Face to the left of the half-edge `from -> to`.
    pub fn left_face(&self, from: usize, to: usize) -> Option<usize> {
        let e = &self.edges[self.edge_between(from, to)?];
        if from < to {
            e.left
        } else {
            e.right
        }
    }

    pub fn ring(&self, v: usize) -> &VertexRing {
        &self.rings[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.rings[v].neighbors
    }

    /// End cycles, oriented with the exterior on the left.
    pub fn ends(&self) -> &[Vec<usize>] {
        &self.ends
    }

    pub fn end_count(&self) -> usize {
        self.ends.len()
    }

    /// End that contains edge `e`, if any.
    pub fn edge_end(&self, e: usize) -> Option<usize> {
        self.edge_end[e]
    }

    pub fn vertex_end(&self, v: usize) -> Option<usize> {
        self.vertex_end[v]
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.ids.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Genus of the compact core; `chi = 2 - 2g - #ends`.
    pub fn genus(&self) -> i64 {
        (2 - self.ends.len() as i64 - self.euler_characteristic()) / 2
    }

    /// Rank of the first homology, `1 - chi` for a connected surface with
    /// non-empty boundary.
    pub fn first_betti(&self) -> i64 {
        1 - self.euler_characteristic()
    }

    /// The surface is the plane: a disc with a single end.
    pub fn is_simply_connected(&self) -> bool {
        self.euler_characteristic() == 1
    }

    /// Vertices of faces that touch an end. Compactly supported fields vanish
    /// on this ring.
    pub fn end_ring(&self) -> Vec<bool> {
        let mut ring = vec![false; self.ids.len()];
        for face in &self.faces {
            if face.iter().any(|&v| self.vertex_end[v].is_some()) {
                for &v in face {
                    ring[v] = true;
                }
            }
        }
        ring
    }

    /// Link of `v` as it appears around the vertex: ring neighbours
    /// interleaved with the far corners of non-triangular faces. The second
    /// value is true when the link is a closed cycle.
    pub fn link(&self, v: usize) -> (Vec<usize>, bool) {
        let ring = &self.rings[v];
        let mut link = Vec::new();
        let k = ring.neighbors.len();
        for i in 0..k {
            link.push(ring.neighbors[i]);
            if let Some(f) = ring.gaps[i] {
                let face = &self.faces[f];
                let m = face.len();
                let pos = face.iter().position(|&x| x == v).expect("vertex in its face");
                // ccw: v, next, ..., prev; far corners sit strictly between next and prev
                for j in 2..m - 1 {
                    link.push(face[(pos + j) % m]);
                }
            }
        }
        (link, !ring.is_boundary())
    }
}
