//! Shared helpers for the integration tests: seeded random fields and an
//! independent minimax oracle based on winding numbers.

#![allow(dead_code)]

use std::f64::consts::PI;

use hofer_asym_core::field::HamiltonianField;
use hofer_asym_core::surface::{make_standard_surface, Puncture, StandardSurface, SurfaceMesh};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn cylinder(n_theta: usize, n_y: usize) -> SurfaceMesh {
    make_standard_surface(&StandardSurface::Cylinder { n_theta, n_y, half_height: 3.0 }).unwrap()
}

pub fn plane(n: usize) -> SurfaceMesh {
    make_standard_surface(&StandardSurface::Plane { n, extent: 3.0 }).unwrap()
}

pub fn two_punctures() -> SurfaceMesh {
    make_standard_surface(&StandardSurface::PuncturedPlane {
        n: 20,
        extent: 3.5,
        punctures: vec![
            Puncture { center: [-1.4, 0.0], radius: 0.45 },
            Puncture { center: [1.4, 0.0], radius: 0.45 },
        ],
    })
    .unwrap()
}

/// Random compactly supported field. The mixture produces both contractible
/// and non-contractible supports: noise, a few integer levels, and a noisy
/// band around the core of the surface.
pub fn random_field(mesh: &SurfaceMesh, rng: &mut ChaCha8Rng) -> HamiltonianField {
    let ring = mesh.end_ring();
    let coords = mesh.coords().expect("generated meshes have coordinates");
    let n = mesh.vertex_count();
    let kind = rng.gen_range(0..4);
    let mut values: Vec<f64> = (0..n)
        .map(|_| match kind {
            0 => {
                if rng.gen_bool(0.4) {
                    0.0
                } else {
                    rng.gen_range(-1.0..1.0)
                }
            }
            1 => rng.gen_range(-2i32..=2) as f64,
            _ => {
                if rng.gen_bool(0.7) {
                    0.0
                } else {
                    rng.gen_range(-1.0..1.0)
                }
            }
        })
        .collect();
    if kind >= 2 {
        // A band |y - y0| < w on the cylinder, or a thinner annulus around
        // the left puncture, lifted by a random height.
        let y0 = rng.gen_range(-1.0..1.0);
        let w = rng.gen_range(0.2..1.2);
        let height = rng.gen_range(-2.0..2.0);
        for v in 0..n {
            let [x, y] = coords[v];
            let s = match mesh.chart() {
                Some(hofer_asym_core::surface::ChartKind::Cylinder) => y,
                _ => 3.0 * ((x + 1.4).hypot(y) - 1.5),
            };
            if (s - y0).abs() < w {
                values[v] += height;
            }
        }
    }
    for v in 0..n {
        if ring[v] {
            values[v] = 0.0;
        }
    }
    HamiltonianField::from_values(mesh, values).unwrap()
}

/// Angular centres used for winding numbers: the cylinder axis or the
/// punctures of the plane.
fn edge_windings(mesh: &SurfaceMesh, centres: &[[f64; 2]], a: usize, b: usize) -> Vec<f64> {
    let coords = mesh.coords().unwrap();
    let (pa, pb) = (coords[a], coords[b]);
    let wrap = |mut d: f64| {
        while d > PI {
            d -= 2.0 * PI;
        }
        while d <= -PI {
            d += 2.0 * PI;
        }
        d
    };
    if centres.is_empty() {
        return vec![wrap(pb[0] - pa[0])];
    }
    centres
        .iter()
        .map(|c| {
            let ta = (pa[1] - c[1]).atan2(pa[0] - c[0]);
            let tb = (pb[1] - c[1]).atan2(pb[0] - c[0]);
            wrap(tb - ta)
        })
        .collect()
}

/// Whether the graph on the selected vertices has a cycle that winds
/// around some centre. Spanning-forest potentials are compared along every
/// non-tree edge; a mismatch of about 2 pi means a winding cycle.
fn has_winding_cycle(mesh: &SurfaceMesh, centres: &[[f64; 2]], selected: &[bool]) -> bool {
    let n = mesh.vertex_count();
    let dims = centres.len().max(1);
    let mut pot: Vec<Option<Vec<f64>>> = vec![None; n];
    for s in 0..n {
        if !selected[s] || pot[s].is_some() {
            continue;
        }
        pot[s] = Some(vec![0.0; dims]);
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            let pu = pot[u].clone().unwrap();
            for &w in mesh.neighbors(u) {
                if !selected[w] {
                    continue;
                }
                let d = edge_windings(mesh, centres, u, w);
                let expected: Vec<f64> = pu.iter().zip(&d).map(|(p, d)| p + d).collect();
                match &pot[w] {
                    None => {
                        pot[w] = Some(expected);
                        stack.push(w);
                    }
                    Some(pw) => {
                        if pw.iter().zip(&expected).any(|(a, b)| (a - b).abs() > PI) {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

pub fn centres(mesh: &SurfaceMesh) -> Vec<[f64; 2]> {
    match mesh.chart() {
        Some(hofer_asym_core::surface::ChartKind::Cylinder) => Vec::new(),
        _ => {
            if mesh.name().starts_with("punctured_plane") {
                vec![[-1.4, 0.0], [1.4, 0.0]]
            } else {
                vec![[0.0, 0.0]]
            }
        }
    }
}

/// `c_plus` as the largest threshold whose superlevel graph still has a
/// winding cycle.
pub fn winding_c_plus(mesh: &SurfaceMesh, values: &[f64], centres: &[[f64; 2]]) -> f64 {
    let mut levels: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut best = 0.0;
    for t in levels {
        let selected: Vec<bool> = values.iter().map(|&v| v >= t).collect();
        if has_winding_cycle(mesh, centres, &selected) {
            best = t;
        } else {
            break;
        }
    }
    best
}

/// `(c_plus, c_minus)` from winding numbers. Only valid on planar charts
/// whose non-contractible circles are exactly the winding ones.
pub fn winding_oracle(mesh: &SurfaceMesh, field: &HamiltonianField) -> (f64, f64) {
    let c = centres(mesh);
    let neg: Vec<f64> = field.values.iter().map(|v| -v).collect();
    (winding_c_plus(mesh, &field.values, &c), -winding_c_plus(mesh, &neg, &c) + 0.0)
}
