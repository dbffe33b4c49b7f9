//! Contractibility and hulls of subcomplexes.
//!
//! A region is contractible in the surface when every embedded circle inside
//! it is. Two routes decide this:
//!
//! * `region_contractible_by_cuts` checks a generating set of circles of the
//!   region (fundamental cycles left over by a tree/co-tree split) with the
//!   cut criterion. It is valid for any genus.
//! * On genus-0 surfaces an embedded circle is contractible iff it does not
//!   separate the ends, so a region is contractible iff all ends lie in one
//!   component of its complement. This is near-linear and is what the level
//!   sweeps use.

use std::collections::VecDeque;

use super::cut::cut_components;
use super::{is_loop_contractible, Dsu, MeshLoop, RegionSummary, SubComplex, SurfaceError, SurfaceMesh};

/// Components of the complement of a region: faces outside it, glued across
/// edges outside it, plus one collar node per end glued across end edges
/// outside it.
pub(crate) struct ComplementPartition {
    dsu: Dsu,
    n_faces: usize,
}

impl ComplementPartition {
    pub(crate) fn new(mesh: &SurfaceMesh, region: &SubComplex) -> Self {
        let n_faces = mesh.face_count();
        let mut dsu = Dsu::new(n_faces + mesh.end_count());
        for (e, edge) in mesh.edges().iter().enumerate() {
            if region.edges[e] {
                continue;
            }
            match (edge.left, edge.right) {
                (Some(a), Some(b)) => {
                    dsu.union(a, b);
                }
                (Some(a), None) | (None, Some(a)) => {
                    if let Some(end) = mesh.edge_end(e) {
                        dsu.union(a, n_faces + end);
                    }
                }
                (None, None) => {}
            }
        }
        Self { dsu, n_faces }
    }

    fn collar(&mut self, end: usize) -> usize {
        self.dsu.find(self.n_faces + end)
    }

    fn face_root(&mut self, f: usize) -> usize {
        self.dsu.find(f)
    }

    pub(crate) fn ends_connected(&mut self, n_ends: usize) -> bool {
        let first = self.collar(0);
        (1..n_ends).all(|e| self.collar(e) == first)
    }
}

/// Closed walks around the thickened region, one per boundary circle of a
/// small regular neighbourhood. Pinch vertices are passed through and edges
/// without faces are walked on both sides. Isolated vertices give walks of
/// length one.
pub fn boundary_walks(mesh: &SurfaceMesh, region: &SubComplex) -> Vec<Vec<usize>> {
    // boundary half-edge: edge in region, face on its left outside the region
    let is_boundary = |from: usize, to: usize| -> bool {
        match mesh.edge_between(from, to) {
            Some(e) if region.edges[e] => match mesh.left_face(from, to) {
                Some(f) => !region.faces[f],
                None => true,
            },
            _ => false,
        }
    };
    let mut walks = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut has_edge = vec![false; mesh.vertex_count()];
    for (e, &on) in region.edges.iter().enumerate() {
        if on {
            let [a, b] = mesh.edge(e).verts;
            has_edge[a] = true;
            has_edge[b] = true;
        }
    }
    for v in 0..mesh.vertex_count() {
        if region.vertices[v] && !has_edge[v] {
            walks.push(vec![v]);
        }
    }
    for (e, &on) in region.edges.iter().enumerate() {
        if !on {
            continue;
        }
        let [a, b] = mesh.edge(e).verts;
        for (from, to) in [(a, b), (b, a)] {
            if !is_boundary(from, to) || seen.contains(&(from, to)) {
                continue;
            }
            let mut walk = Vec::new();
            let (mut u, mut v) = (from, to);
            while seen.insert((u, v)) {
                walk.push(u);
                // rotate clockwise around v from v->u, through the exterior
                let ring = mesh.ring(v);
                let k = ring.neighbors.len();
                let j = ring.neighbors.iter().position(|&x| x == u).expect("ring neighbour");
                let mut next = None;
                for step in 1..=k {
                    let w = ring.neighbors[(j + k - step) % k];
                    if is_boundary(v, w) {
                        next = Some(w);
                        break;
                    }
                }
                let w = next.expect("boundary walk continues");
                u = v;
                v = w;
            }
            walks.push(walk);
        }
    }
    walks
}

/// Fundamental cycles of the edges left over after a spanning forest of the
/// region's 1-skeleton and a spanning forest of its dual (rooted at the
/// outside). They generate the fundamental group of every component.
pub fn generator_cycles(mesh: &SurfaceMesh, region: &SubComplex) -> Vec<MeshLoop> {
    let n = mesh.vertex_count();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut in_tree = vec![false; mesh.edge_count()];
    let mut visited = vec![false; n];
    for root in 0..n {
        if !region.vertices[root] || visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in mesh.neighbors(u) {
                let e = mesh.edge_between(u, w).expect("ring edge");
                if region.edges[e] && !visited[w] {
                    visited[w] = true;
                    parent[w] = u;
                    depth[w] = depth[u] + 1;
                    in_tree[e] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let nf = mesh.face_count();
    let outside = nf;
    let mut dual = Dsu::new(nf + 1);
    let mut leftover = Vec::new();
    for (e, edge) in mesh.edges().iter().enumerate() {
        if !region.edges[e] || in_tree[e] {
            continue;
        }
        let inside: Vec<usize> = edge.faces().filter(|&f| region.faces[f]).collect();
        let joined = match inside.as_slice() {
            [a, b] => dual.union(*a, *b),
            [a] => dual.union(*a, outside),
            _ => false,
        };
        if !joined {
            leftover.push(e);
        }
    }
    leftover
        .into_iter()
        .map(|e| {
            let [mut a, mut b] = mesh.edge(e).verts;
            let mut up = vec![a];
            let mut down = vec![b];
            while a != b {
                if depth[a] >= depth[b] {
                    a = parent[a];
                    up.push(a);
                } else {
                    b = parent[b];
                    down.push(b);
                }
            }
            down.pop();
            down.reverse();
            up.extend(down);
            MeshLoop::new(up)
        })
        .collect()
}

/// Contractibility through the cut criterion applied to generator cycles.
/// Returns the first non-contractible generator, if any.
pub fn region_contractible_by_cuts(
    mesh: &SurfaceMesh,
    region: &SubComplex,
) -> Result<Option<MeshLoop>, SurfaceError> {
    for lp in generator_cycles(mesh, region) {
        if !is_loop_contractible(mesh, &lp)?.0 {
            return Ok(Some(lp));
        }
    }
    Ok(None)
}

/// Whether the region is contractible in the surface, without a witness.
pub fn region_contractible(mesh: &SurfaceMesh, region: &SubComplex) -> Result<bool, SurfaceError> {
    region.check(mesh)?;
    if mesh.genus() == 0 {
        if mesh.end_count() <= 1 {
            return Ok(true);
        }
        return Ok(ComplementPartition::new(mesh, region).ends_connected(mesh.end_count()));
    }
    Ok(region_contractible_by_cuts(mesh, region)?.is_none())
}

fn simple_walk(walk: &[usize]) -> bool {
    if walk.len() < 3 {
        return false;
    }
    let mut s = walk.to_vec();
    s.sort_unstable();
    s.windows(2).all(|w| w[0] != w[1])
}

/// Contractibility of a region in the surface, with a non-contractible
/// circle of the region as witness when it is not. Boundary circles are
/// preferred as witnesses; interior generators are used when no boundary
/// circle is embedded.
pub fn is_region_contractible(
    mesh: &SurfaceMesh,
    region: &SubComplex,
) -> Result<(bool, Option<MeshLoop>), SurfaceError> {
    if region_contractible(mesh, region)? {
        return Ok((true, None));
    }
    for walk in boundary_walks(mesh, region) {
        if simple_walk(&walk) {
            let lp = MeshLoop::new(walk);
            if !is_loop_contractible(mesh, &lp)?.0 {
                return Ok((false, Some(lp)));
            }
        }
    }
    match region_contractible_by_cuts(mesh, region)? {
        Some(lp) => Ok((false, Some(lp))),
        None => Err(SurfaceError::Inconsistent(
            "end separation found but every generator circle is contractible".into(),
        )),
    }
}

/// Summary of a region treated as a thickened subcomplex.
pub fn region_summary(mesh: &SurfaceMesh, region: &SubComplex, component_id: usize) -> RegionSummary {
    let mut ends: Vec<usize> = (0..mesh.vertex_count())
        .filter(|&v| region.vertices[v])
        .filter_map(|v| mesh.vertex_end(v))
        .collect();
    ends.sort_unstable();
    ends.dedup();
    RegionSummary {
        component_id,
        euler_characteristic: region.euler_characteristic(),
        boundary_count: boundary_walks(mesh, region).len(),
        touches_end: !ends.is_empty(),
        ends_touched: ends,
        area: region.area(mesh),
        faces: (0..mesh.face_count()).filter(|&f| region.faces[f]).collect(),
    }
}

/// Maximal pairwise disjoint discs whose union contains a contractible region.
#[derive(Clone, Debug)]
pub struct HullResult {
    pub discs: Vec<SubComplex>,
    pub summaries: Vec<RegionSummary>,
}

impl HullResult {
    pub fn total_area(&self) -> f64 {
        self.summaries.iter().map(|s| s.area).sum()
    }
}

/// Hull of a region: the region together with every complementary piece that
/// reaches no end, split into connected discs.
pub fn hull(mesh: &SurfaceMesh, region: &SubComplex) -> Result<HullResult, SurfaceError> {
    let (ok, witness) = is_region_contractible(mesh, region)?;
    if !ok {
        return Err(SurfaceError::NonContractibleBoundary(
            witness.expect("non-contractible region has a witness"),
        ));
    }
    let mut part = ComplementPartition::new(mesh, region);
    let collar_roots: Vec<usize> = (0..mesh.end_count()).map(|e| part.collar(e)).collect();
    let mut filled = region.faces.clone();
    for (f, slot) in filled.iter_mut().enumerate() {
        if !*slot && !collar_roots.contains(&part.face_root(f)) {
            *slot = true;
        }
    }
    let whole = region.union(&SubComplex::from_faces(mesh, &filled));
    let discs = whole.components(mesh);
    let summaries: Vec<RegionSummary> = discs
        .iter()
        .enumerate()
        .map(|(i, d)| region_summary(mesh, d, i))
        .collect();
    if let Some(bad) = summaries.iter().find(|s| s.euler_characteristic != 1) {
        return Err(SurfaceError::Inconsistent(format!(
            "hull component {} has Euler characteristic {}",
            bad.component_id, bad.euler_characteristic
        )));
    }
    Ok(HullResult { discs, summaries })
}

#[allow(dead_code)]
pub(crate) fn cut_summary(mesh: &SurfaceMesh, cut: &[bool]) -> Vec<RegionSummary> {
    cut_components(mesh, cut)
}
