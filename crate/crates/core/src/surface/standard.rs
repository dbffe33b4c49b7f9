//! Generators for the plane, the cylinder and punctured planes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ChartKind, SurfaceError, SurfaceMesh};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Puncture {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Parameters of a generated surface.
///
/// Resolutions count vertices: `Plane { n, .. }` is an `n x n` vertex grid over
/// `[-extent, extent]^2`; `Cylinder { n_theta, n_y, .. }` has `n_y` rings of
/// `n_theta` vertices over `y in [-half_height, half_height]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StandardSurface {
    Plane { n: usize, extent: f64 },
    Cylinder { n_theta: usize, n_y: usize, half_height: f64 },
    PuncturedPlane { n: usize, extent: f64, punctures: Vec<Puncture> },
}

fn grid(n: usize, extent: f64) -> (Vec<[f64; 2]>, Vec<Vec<usize>>, f64) {
    let h = 2.0 * extent / (n - 1) as f64;
    let mut coords = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            coords.push([-extent + i as f64 * h, -extent + j as f64 * h]);
        }
    }
    let mut faces = Vec::with_capacity((n - 1) * (n - 1));
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let v = j * n + i;
            faces.push(vec![v, v + 1, v + n + 1, v + n]);
        }
    }
    (coords, faces, h)
}

fn check_extent(extent: f64) -> Result<(), SurfaceError> {
    if !(extent.is_finite() && extent > 0.0) {
        return Err(SurfaceError::InvalidParams(format!("degenerate extent {extent}")));
    }
    Ok(())
}

fn check_resolution(name: &str, n: usize) -> Result<(), SurfaceError> {
    if n < 3 {
        return Err(SurfaceError::InvalidParams(format!("{name} must be at least 3, got {n}")));
    }
    Ok(())
}

pub fn make_standard_surface(kind: &StandardSurface) -> Result<SurfaceMesh, SurfaceError> {
    match kind {
        StandardSurface::Plane { n, extent } => {
            check_resolution("n", *n)?;
            check_extent(*extent)?;
            let (coords, faces, h) = grid(*n, *extent);
            let areas = vec![h * h; faces.len()];
            SurfaceMesh::from_faces(
                &format!("plane_{n}"),
                Some(ChartKind::Plane),
                n * n,
                faces,
                areas,
                Some(coords),
            )
        }
        StandardSurface::Cylinder { n_theta, n_y, half_height } => {
            check_resolution("n_theta", *n_theta)?;
            check_resolution("n_y", *n_y)?;
            check_extent(*half_height)?;
            let (nt, ny) = (*n_theta, *n_y);
            let dt = 2.0 * PI / nt as f64;
            let dy = 2.0 * half_height / (ny - 1) as f64;
            let mut coords = Vec::with_capacity(nt * ny);
            for j in 0..ny {
                for i in 0..nt {
                    coords.push([i as f64 * dt, -half_height + j as f64 * dy]);
                }
            }
            let mut faces = Vec::with_capacity(nt * (ny - 1));
            for j in 0..ny - 1 {
                for i in 0..nt {
                    let a = j * nt + i;
                    let b = j * nt + (i + 1) % nt;
                    faces.push(vec![a, b, b + nt, a + nt]);
                }
            }
            let areas = vec![dt * dy; faces.len()];
            SurfaceMesh::from_faces(
                &format!("cylinder_{nt}x{ny}"),
                Some(ChartKind::Cylinder),
                nt * ny,
                faces,
                areas,
                Some(coords),
            )
        }
        StandardSurface::PuncturedPlane { n, extent, punctures } => {
            check_resolution("n", *n)?;
            check_extent(*extent)?;
            let h = 2.0 * extent / (*n - 1) as f64;
            for (i, p) in punctures.iter().enumerate() {
                if !(p.radius > 0.0 && p.radius.is_finite()) {
                    return Err(SurfaceError::InvalidParams(format!("puncture {i}: bad radius")));
                }
                let reach = p.center[0].abs().max(p.center[1].abs()) + p.radius;
                if !(reach < extent - h) {
                    return Err(SurfaceError::InvalidParams(format!(
                        "puncture {i} is not inside the extent"
                    )));
                }
                for (j, q) in punctures.iter().enumerate().take(i) {
                    let d = (p.center[0] - q.center[0]).hypot(p.center[1] - q.center[1]);
                    if d < p.radius + q.radius + h {
                        return Err(SurfaceError::InvalidParams(format!(
                            "punctures {j} and {i} overlap"
                        )));
                    }
                }
            }
            let (coords, faces, _) = grid(*n, *extent);
            let mut removed = vec![0usize; punctures.len()];
            let kept: Vec<Vec<usize>> = faces
                .into_iter()
                .filter(|face| {
                    let cx = face.iter().map(|&v| coords[v][0]).sum::<f64>() / 4.0;
                    let cy = face.iter().map(|&v| coords[v][1]).sum::<f64>() / 4.0;
                    for (k, p) in punctures.iter().enumerate() {
                        if (cx - p.center[0]).hypot(cy - p.center[1]) <= p.radius {
                            removed[k] += 1;
                            return false;
                        }
                    }
                    true
                })
                .collect();
            if let Some(k) = removed.iter().position(|&r| r == 0) {
                return Err(SurfaceError::InvalidParams(format!(
                    "puncture {k} is smaller than one face"
                )));
            }
            let mut remap = vec![usize::MAX; coords.len()];
            let mut new_coords = Vec::new();
            for face in &kept {
                for &v in face {
                    if remap[v] == usize::MAX {
                        remap[v] = 0;
                    }
                }
            }
            for (v, slot) in remap.iter_mut().enumerate() {
                if *slot == 0 {
                    *slot = new_coords.len();
                    new_coords.push(coords[v]);
                }
            }
            let faces: Vec<Vec<usize>> =
                kept.iter().map(|f| f.iter().map(|&v| remap[v]).collect()).collect();
            let areas = vec![h * h; faces.len()];
            let mesh = SurfaceMesh::from_faces(
                &format!("punctured_plane_{n}_{}", punctures.len()),
                Some(ChartKind::Plane),
                new_coords.len(),
                faces,
                areas,
                Some(new_coords),
            )
            .map_err(|e| SurfaceError::InvalidParams(format!("punctures too close: {e}")))?;
            if mesh.end_count() != punctures.len() + 1 {
                return Err(SurfaceError::InvalidParams(
                    "punctures merge with each other or with the outer end".into(),
                ));
            }
            Ok(mesh)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_topology() {
        let m = make_standard_surface(&StandardSurface::Cylinder {
            n_theta: 8,
            n_y: 8,
            half_height: 3.0,
        })
        .unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.end_count(), 2);
        assert_eq!(m.first_betti(), 1);
        assert_eq!(m.genus(), 0);
    }

    #[test]
    fn plane_topology() {
        let m = make_standard_surface(&StandardSurface::Plane { n: 4, extent: 1.0 }).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.end_count(), 1);
        assert!(m.is_simply_connected());
    }

    #[test]
    fn two_punctures() {
        let m = make_standard_surface(&StandardSurface::PuncturedPlane {
            n: 8,
            extent: 3.5,
            punctures: vec![
                Puncture { center: [-1.5, 0.0], radius: 0.5 },
                Puncture { center: [1.5, 0.0], radius: 0.5 },
            ],
        })
        .unwrap();
        assert_eq!(m.end_count(), 3);
        assert_eq!(m.first_betti(), 2);
        assert_eq!(m.genus(), 0);
    }

    #[test]
    fn overlapping_punctures_rejected() {
        let r = make_standard_surface(&StandardSurface::PuncturedPlane {
            n: 8,
            extent: 3.5,
            punctures: vec![
                Puncture { center: [0.0, 0.0], radius: 1.0 },
                Puncture { center: [0.5, 0.0], radius: 1.0 },
            ],
        });
        assert!(matches!(r, Err(SurfaceError::InvalidParams(_))));
    }

    #[test]
    fn low_resolution_rejected() {
        let r = make_standard_surface(&StandardSurface::Plane { n: 2, extent: 1.0 });
        assert!(matches!(r, Err(SurfaceError::InvalidParams(_))));
        let r = make_standard_surface(&StandardSurface::Plane { n: 5, extent: 0.0 });
        assert!(matches!(r, Err(SurfaceError::InvalidParams(_))));
    }
}
