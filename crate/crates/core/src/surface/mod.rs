//! Open oriented surfaces of infinite area, modelled as finite 2-complexes
//! whose boundary cycles are ends.
//!
//! Contractibility is decided combinatorially: an embedded loop is
//! contractible exactly when cutting along it leaves a disc component that
//! touches no end.

mod cut;
mod mesh;
mod region;
mod standard;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cut::{cut_along_loop, is_loop_contractible};
pub use mesh::{validate_mesh, ChartKind, Diagnostic, Edge, MeshData, SurfaceMesh, VertexRing};
pub(crate) use mesh::Dsu;
pub use region::{
    boundary_walks, generator_cycles, hull, is_region_contractible, region_contractible,
    region_contractible_by_cuts, region_summary, HullResult,
};
pub use standard::{make_standard_surface, Puncture, StandardSurface};

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("invalid mesh: {}", join(.0))]
    InvalidMesh(Vec<Diagnostic>),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("loop is not embedded (repeated vertex {0})")]
    NotEmbedded(u64),
    #[error("loop is not in the mesh: {0}")]
    LoopNotInMesh(String),
    #[error("region is not a subcomplex: {0}")]
    NotRegularRegion(String),
    #[error("region has a non-contractible boundary circle {:?}", .0.vertices())]
    NonContractibleBoundary(MeshLoop),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("mesh file: {0}")]
    Io(#[from] std::io::Error),
    #[error("mesh file: {0}")]
    Json(#[from] serde_json::Error),
}

fn join(d: &[Diagnostic]) -> String {
    d.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Reads a mesh JSON file and validates it.
pub fn load_mesh(path: &Path) -> Result<SurfaceMesh, SurfaceError> {
    let text = std::fs::read_to_string(path)?;
    let data: MeshData = serde_json::from_str(&text)?;
    SurfaceMesh::from_data(&data)
}

/// A closed edge path given by its cyclic vertex sequence (local indices).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MeshLoop {
    vertices: Vec<usize>,
}

impl MeshLoop {
    pub fn new(vertices: Vec<usize>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v }
    }

    /// Edge ids of the cycle, in order. Fails if a step is not a mesh edge.
    pub fn edge_cycle(&self, mesh: &SurfaceMesh) -> Result<Vec<usize>, SurfaceError> {
        let k = self.vertices.len();
        (0..k)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % k];
                mesh.edge_between(a, b).ok_or_else(|| {
                    SurfaceError::LoopNotInMesh(format!(
                        "no edge {}-{}",
                        mesh.vertex_id(a),
                        mesh.vertex_id(b)
                    ))
                })
            })
            .collect()
    }

    /// Checks that the loop is a simple closed edge path of the mesh.
    pub fn check_embedded(&self, mesh: &SurfaceMesh) -> Result<Vec<usize>, SurfaceError> {
        if self.vertices.len() < 3 {
            return Err(SurfaceError::LoopNotInMesh("fewer than 3 vertices".into()));
        }
        if let Some(&v) = self.vertices.iter().find(|&&v| v >= mesh.vertex_count()) {
            return Err(SurfaceError::LoopNotInMesh(format!("vertex index {v} out of range")));
        }
        let mut seen = vec![false; mesh.vertex_count()];
        for &v in &self.vertices {
            if std::mem::replace(&mut seen[v], true) {
                return Err(SurfaceError::NotEmbedded(mesh.vertex_id(v)));
            }
        }
        self.edge_cycle(mesh)
    }

    /// External vertex ids, for reports.
    pub fn vertex_ids(&self, mesh: &SurfaceMesh) -> Vec<u64> {
        self.vertices.iter().map(|&v| mesh.vertex_id(v)).collect()
    }
}

/// Topological summary of a cut component or of a region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub component_id: usize,
    pub euler_characteristic: i64,
    pub boundary_count: usize,
    pub touches_end: bool,
    /// Indices of the ends this component reaches.
    pub ends_touched: Vec<usize>,
    pub area: f64,
    /// Faces of the component (local indices), sorted.
    pub faces: Vec<usize>,
}

impl RegionSummary {
    /// A closed disc `D(gamma)`: Euler characteristic 1, one boundary circle,
    /// no end.
    pub fn is_disc(&self) -> bool {
        self.euler_characteristic == 1 && self.boundary_count == 1 && !self.touches_end
    }
}

/// Vertex, edge and face subsets of a mesh closed under incidence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubComplex {
    pub vertices: Vec<bool>,
    pub edges: Vec<bool>,
    pub faces: Vec<bool>,
}

impl SubComplex {
    pub fn empty(mesh: &SurfaceMesh) -> Self {
        Self {
            vertices: vec![false; mesh.vertex_count()],
            edges: vec![false; mesh.edge_count()],
            faces: vec![false; mesh.face_count()],
        }
    }

    pub fn full(mesh: &SurfaceMesh) -> Self {
        Self {
            vertices: vec![true; mesh.vertex_count()],
            edges: vec![true; mesh.edge_count()],
            faces: vec![true; mesh.face_count()],
        }
    }

    /// Full subcomplex spanned by the selected vertices: every edge and face
    /// whose vertices are all selected.
    pub fn induced(mesh: &SurfaceMesh, selected: &[bool]) -> Self {
        let class: Vec<Option<u8>> = selected.iter().map(|&s| s.then_some(0)).collect();
        Self::classed(mesh, &class)
    }

    /// Like [`SubComplex::induced`], but an edge or face is kept only if all
    /// its vertices carry the same class. Vertices of different classes are
    /// separated by a level crossing and stay apart.
    pub fn classed(mesh: &SurfaceMesh, class: &[Option<u8>]) -> Self {
        let vertices: Vec<bool> = class.iter().map(Option::is_some).collect();
        let edges = mesh
            .edges()
            .iter()
            .map(|e| {
                let [a, b] = e.verts;
                class[a].is_some() && class[a] == class[b]
            })
            .collect();
        let faces = mesh
            .faces()
            .iter()
            .map(|face| {
                let c = class[face[0]];
                c.is_some() && face.iter().all(|&v| class[v] == c)
            })
            .collect();
        Self { vertices, edges, faces }
    }

    /// Closure of a face set.
    pub fn from_faces(mesh: &SurfaceMesh, faces: &[bool]) -> Self {
        let mut s = Self::empty(mesh);
        for (f, &on) in faces.iter().enumerate() {
            if on {
                s.faces[f] = true;
                for &v in mesh.face(f) {
                    s.vertices[v] = true;
                }
                for &e in mesh.face_edges(f) {
                    s.edges[e] = true;
                }
            }
        }
        s
    }

    /// Verifies sizes and closure under incidence.
    pub fn check(&self, mesh: &SurfaceMesh) -> Result<(), SurfaceError> {
        if self.vertices.len() != mesh.vertex_count()
            || self.edges.len() != mesh.edge_count()
            || self.faces.len() != mesh.face_count()
        {
            return Err(SurfaceError::NotRegularRegion("size mismatch with mesh".into()));
        }
        for (f, &on) in self.faces.iter().enumerate() {
            if on && !mesh.face_edges(f).iter().all(|&e| self.edges[e]) {
                return Err(SurfaceError::NotRegularRegion(format!("face {f} without its edges")));
            }
        }
        for (e, &on) in self.edges.iter().enumerate() {
            let [a, b] = mesh.edge(e).verts;
            if on && !(self.vertices[a] && self.vertices[b]) {
                return Err(SurfaceError::NotRegularRegion(format!(
                    "edge {}-{} without its vertices",
                    mesh.vertex_id(a),
                    mesh.vertex_id(b)
                )));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        !self.vertices.iter().any(|&v| v)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.iter().filter(|&&v| v).count()
    }

    pub fn face_count(&self) -> usize {
        self.faces.iter().filter(|&&v| v).count()
    }

    pub fn euler_characteristic(&self) -> i64 {
        let count = |s: &[bool]| s.iter().filter(|&&x| x).count() as i64;
        count(&self.vertices) - count(&self.edges) + count(&self.faces)
    }

    pub fn area(&self, mesh: &SurfaceMesh) -> f64 {
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .map(|(f, _)| mesh.face_area(f))
            .sum()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        let sub = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(&x, &y)| !x || y);
        sub(&self.vertices, &other.vertices)
            && sub(&self.edges, &other.edges)
            && sub(&self.faces, &other.faces)
    }

    pub fn union(&self, other: &Self) -> Self {
        let or = |a: &[bool], b: &[bool]| a.iter().zip(b).map(|(&x, &y)| x || y).collect();
        Self {
            vertices: or(&self.vertices, &other.vertices),
            edges: or(&self.edges, &other.edges),
            faces: or(&self.faces, &other.faces),
        }
    }

    pub fn is_disjoint_from(&self, other: &Self) -> bool {
        !self.vertices.iter().zip(&other.vertices).any(|(&a, &b)| a && b)
    }

    /// Connected components of the 1-skeleton, each as its own subcomplex,
    /// ordered by smallest vertex.
    pub fn components(&self, mesh: &SurfaceMesh) -> Vec<SubComplex> {
        let n = mesh.vertex_count();
        let mut dsu = Dsu::new(n);
        for (e, &on) in self.edges.iter().enumerate() {
            if on {
                let [a, b] = mesh.edge(e).verts;
                dsu.union(a, b);
            }
        }
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<SubComplex> = Vec::new();
        for v in 0..n {
            if !self.vertices[v] {
                continue;
            }
            let r = dsu.find(v);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(SubComplex::empty(mesh));
            }
            out[slot[r]].vertices[v] = true;
        }
        for (e, &on) in self.edges.iter().enumerate() {
            if on {
                let r = dsu.find(mesh.edge(e).verts[0]);
                out[slot[r]].edges[e] = true;
            }
        }
        for (f, &on) in self.faces.iter().enumerate() {
            if on {
                let r = dsu.find(mesh.face(f)[0]);
                out[slot[r]].faces[f] = true;
            }
        }
        out
    }
}
