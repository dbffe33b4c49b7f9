//! Cutting a surface along an embedded loop and classifying the pieces.
//!
//! The cut surface is built from face corners: two corners at the same vertex
//! are glued when their faces share an uncut edge through that vertex. Each
//! class of glued corners is one vertex of the cut surface, so a vertex on the
//! loop is duplicated once per side.

use super::{Dsu, MeshLoop, RegionSummary, SurfaceError, SurfaceMesh};

/// Summaries of the connected components of `mesh` cut along `cut`
/// (an edge mask). Loop edges that lie on an end do not count as touching it.
pub(crate) fn cut_components(mesh: &SurfaceMesh, cut: &[bool]) -> Vec<RegionSummary> {
    let nf = mesh.face_count();
    let mut offset = Vec::with_capacity(nf + 1);
    offset.push(0usize);
    for f in 0..nf {
        offset.push(offset[f] + mesh.face(f).len());
    }
    let corner = |f: usize, v: usize| -> usize {
        let pos = mesh.face(f).iter().position(|&x| x == v).expect("corner of face");
        offset[f] + pos
    };

    let mut faces_dsu = Dsu::new(nf);
    let mut corners = Dsu::new(offset[nf]);
    for (e, edge) in mesh.edges().iter().enumerate() {
        if cut[e] {
            continue;
        }
        if let (Some(l), Some(r)) = (edge.left, edge.right) {
            faces_dsu.union(l, r);
            for &v in &edge.verts {
                corners.union(corner(l, v), corner(r, v));
            }
        }
    }

    let mut comp_of = vec![usize::MAX; nf];
    let mut roots: Vec<usize> = Vec::new();
    for f in 0..nf {
        let r = faces_dsu.find(f);
        let id = match roots.iter().position(|&x| x == r) {
            Some(i) => i,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        comp_of[f] = id;
    }
    let k = roots.len();

    let mut faces_of = vec![Vec::new(); k];
    let mut area = vec![0.0; k];
    let mut half_incidences = vec![0i64; k];
    let mut open_incidences = vec![0i64; k];
    let mut ends_touched: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut corner_classes: Vec<Vec<usize>> = vec![Vec::new(); k];
    // boundary half-edges of the cut surface, face on the left
    let mut bnd_start_class: Vec<(usize, usize)> = Vec::new(); // (class at tail, comp)
    let mut bnd_head_class: Vec<usize> = Vec::new();

    for f in 0..nf {
        let c = comp_of[f];
        faces_of[c].push(f);
        area[c] += mesh.face_area(f);
        let face = mesh.face(f);
        let m = face.len();
        for i in 0..m {
            corner_classes[c].push(corners.find(offset[f] + i));
            let e = mesh.face_edges(f)[i];
            let edge = mesh.edge(e);
            if cut[e] || edge.is_boundary() {
                open_incidences[c] += 1;
                let a = face[i];
                let b = face[(i + 1) % m];
                bnd_start_class.push((corners.find(corner(f, a)), c));
                bnd_head_class.push(corners.find(corner(f, b)));
                if edge.is_boundary() && !cut[e] {
                    if let Some(end) = mesh.edge_end(e) {
                        if !ends_touched[c].contains(&end) {
                            ends_touched[c].push(end);
                        }
                    }
                }
            } else {
                half_incidences[c] += 1;
            }
        }
    }

    // trace boundary cycles: next(h) is the boundary half-edge leaving the
    // corner class where h arrives
    let mut leaving = std::collections::HashMap::new();
    for (h, &(cls, _)) in bnd_start_class.iter().enumerate() {
        leaving.insert(cls, h);
    }
    let mut boundary_count = vec![0usize; k];
    let mut seen = vec![false; bnd_start_class.len()];
    for s in 0..bnd_start_class.len() {
        if seen[s] {
            continue;
        }
        boundary_count[bnd_start_class[s].1] += 1;
        let mut h = s;
        while !seen[h] {
            seen[h] = true;
            h = leaving[&bnd_head_class[h]];
        }
    }

    (0..k)
        .map(|c| {
            let mut classes = std::mem::take(&mut corner_classes[c]);
            classes.sort_unstable();
            classes.dedup();
            let v = classes.len() as i64;
            let e = half_incidences[c] / 2 + open_incidences[c];
            let f = faces_of[c].len() as i64;
            let mut ends = std::mem::take(&mut ends_touched[c]);
            ends.sort_unstable();
            RegionSummary {
                component_id: c,
                euler_characteristic: v - e + f,
                boundary_count: boundary_count[c],
                touches_end: !ends.is_empty(),
                ends_touched: ends,
                area: area[c],
                faces: std::mem::take(&mut faces_of[c]),
            }
        })
        .collect()
}

/// Connected components of the complement of an embedded loop.
pub fn cut_along_loop(
    mesh: &SurfaceMesh,
    lp: &MeshLoop,
) -> Result<Vec<RegionSummary>, SurfaceError> {
    let edges = lp.check_embedded(mesh)?;
    let mut cut = vec![false; mesh.edge_count()];
    for e in edges {
        cut[e] = true;
    }
    Ok(cut_components(mesh, &cut))
}

/// Whether an embedded loop bounds a disc, and the disc if it does.
pub fn is_loop_contractible(
    mesh: &SurfaceMesh,
    lp: &MeshLoop,
) -> Result<(bool, Option<RegionSummary>), SurfaceError> {
    let comps = cut_along_loop(mesh, lp)?;
    let disc = comps.into_iter().find(RegionSummary::is_disc);
    Ok((disc.is_some(), disc))
}
