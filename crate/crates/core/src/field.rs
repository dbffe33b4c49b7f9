//! Compactly supported Hamiltonians on mesh vertices.
//!
//! Presets are closed-form functions of the chart coordinates. Sampling a
//! preset writes exact zeros outside its support and exact heights on its
//! plateaus, so level sets at plateau heights are reproduced without rounding.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surface::{ChartKind, SubComplex, SurfaceMesh};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("preset does not fit the mesh: {0}")]
    PresetOutOfBounds(String),
    #[error("mesh has no coordinates")]
    NoCoordinates,
    #[error("field has {values} values but mesh has {vertices} vertices")]
    LengthMismatch { values: usize, vertices: usize },
    #[error("field value at vertex {0} is not finite")]
    NonFinite(u64),
    #[error("field is non-zero at vertex {0}, next to an end")]
    SupportTouchesEnd(u64),
    #[error("field file: {0}")]
    Io(#[from] std::io::Error),
    #[error("field file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Closed-form Hamiltonians realising the standard examples.
///
/// On the cylinder "annular" bands are bands in `y`; on the plane they are
/// radial bands around `center` (the origin by default).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", content = "params", rename_all = "snake_case")]
pub enum FieldPreset {
    DiscBump {
        height: f64,
        center: [f64; 2],
        radius: f64,
        /// Radius of the flat top; defaults to half the radius.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inner: Option<f64>,
    },
    AnnularPlateau {
        height: f64,
        lo: f64,
        hi: f64,
        ramp: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
    },
    PlateauWithSpike {
        base: f64,
        peak: f64,
        lo: f64,
        hi: f64,
        ramp: f64,
        spike_center: [f64; 2],
        spike_radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
    },
    AnnularWell {
        depth: f64,
        lo: f64,
        hi: f64,
        ramp: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
    },
    CustomSum {
        terms: Vec<FieldPreset>,
    },
}

/// Quintic smoothstep, C2 on the real line after clamping.
fn smoothstep(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        let v = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
        let d = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        (v, d)
    }
}

const SMOOTHSTEP_SLOPE: f64 = 15.0 / 8.0;

/// 1 for `d <= a`, 0 for `d >= b`, smooth in between. Returns value and
/// derivative in `d`.
fn cap(d: f64, a: f64, b: f64) -> (f64, f64) {
    if d <= a {
        (1.0, 0.0)
    } else if d >= b {
        (0.0, 0.0)
    } else {
        let (v, s) = smoothstep((b - d) / (b - a));
        (v, -s / (b - a))
    }
}

/// 1 on `[lo, hi]`, ramping to 0 over `ramp` on both sides.
fn band(u: f64, lo: f64, hi: f64, ramp: f64) -> (f64, f64) {
    if u < lo {
        let (v, d) = cap(lo - u, 0.0, ramp);
        (v, -d)
    } else if u > hi {
        cap(u - hi, 0.0, ramp)
    } else {
        (1.0, 0.0)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Displacement from `c` to `x` in the chart (angle wrapped on the cylinder).
pub fn chart_delta(chart: ChartKind, x: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    match chart {
        ChartKind::Plane => [x[0] - c[0], x[1] - c[1]],
        ChartKind::Cylinder => [wrap_angle(x[0] - c[0]), x[1] - c[1]],
    }
}

/// Distance to `c` and its gradient.
fn dist(chart: ChartKind, x: [f64; 2], c: [f64; 2]) -> (f64, [f64; 2]) {
    let d = chart_delta(chart, x, c);
    let r = d[0].hypot(d[1]);
    if r == 0.0 {
        (0.0, [0.0, 0.0])
    } else {
        (r, [d[0] / r, d[1] / r])
    }
}

/// The coordinate the annular bands are measured in, with its gradient.
fn band_coordinate(chart: ChartKind, x: [f64; 2], center: Option<[f64; 2]>) -> (f64, [f64; 2]) {
    match chart {
        ChartKind::Cylinder => (x[1], [0.0, 1.0]),
        ChartKind::Plane => dist(chart, x, center.unwrap_or([0.0, 0.0])),
    }
}

impl FieldPreset {
    /// Value and gradient at a chart point.
    pub fn eval(&self, chart: ChartKind, x: [f64; 2]) -> (f64, [f64; 2]) {
        match self {
            FieldPreset::DiscBump { height, center, radius, inner } => {
                let (r, dr) = dist(chart, x, *center);
                let (v, dv) = cap(r, inner.unwrap_or(radius / 2.0), *radius);
                (height * v, [height * dv * dr[0], height * dv * dr[1]])
            }
            FieldPreset::AnnularPlateau { height, lo, hi, ramp, center } => {
                let (u, du) = band_coordinate(chart, x, *center);
                let (v, dv) = band(u, *lo, *hi, *ramp);
                (height * v, [height * dv * du[0], height * dv * du[1]])
            }
            FieldPreset::AnnularWell { depth, lo, hi, ramp, center } => {
                let (u, du) = band_coordinate(chart, x, *center);
                let (v, dv) = band(u, *lo, *hi, *ramp);
                (-depth * v, [-depth * dv * du[0], -depth * dv * du[1]])
            }
            FieldPreset::PlateauWithSpike {
                base,
                peak,
                lo,
                hi,
                ramp,
                spike_center,
                spike_radius,
                center,
            } => {
                let (u, du) = band_coordinate(chart, x, *center);
                let (b, db) = band(u, *lo, *hi, *ramp);
                let (r, dr) = dist(chart, x, *spike_center);
                let (s, ds) = cap(r, spike_radius / 2.0, *spike_radius);
                let rise = peak - base;
                (
                    base * b + rise * s,
                    [
                        base * db * du[0] + rise * ds * dr[0],
                        base * db * du[1] + rise * ds * dr[1],
                    ],
                )
            }
            FieldPreset::CustomSum { terms } => {
                terms.iter().fold((0.0, [0.0, 0.0]), |(v, g), t| {
                    let (tv, tg) = t.eval(chart, x);
                    (v + tv, [g[0] + tg[0], g[1] + tg[1]])
                })
            }
        }
    }

    pub fn value(&self, chart: ChartKind, x: [f64; 2]) -> f64 {
        self.eval(chart, x).0
    }

    /// Upper bound for the Lipschitz constant of the closed form.
    pub fn lipschitz(&self) -> f64 {
        match self {
            FieldPreset::DiscBump { height, radius, inner, .. } => {
                height.abs() * SMOOTHSTEP_SLOPE / (radius - inner.unwrap_or(radius / 2.0))
            }
            FieldPreset::AnnularPlateau { height, ramp, .. } => {
                height.abs() * SMOOTHSTEP_SLOPE / ramp
            }
            FieldPreset::AnnularWell { depth, ramp, .. } => depth.abs() * SMOOTHSTEP_SLOPE / ramp,
            FieldPreset::PlateauWithSpike { base, peak, ramp, spike_radius, .. } => {
                base.abs() * SMOOTHSTEP_SLOPE / ramp
                    + (peak - base).abs() * SMOOTHSTEP_SLOPE / (spike_radius / 2.0)
            }
            FieldPreset::CustomSum { terms } => terms.iter().map(FieldPreset::lipschitz).sum(),
        }
    }

    pub fn scaled(&self, factor: f64) -> FieldPreset {
        match self {
            FieldPreset::DiscBump { height, center, radius, inner } => FieldPreset::DiscBump {
                height: height * factor,
                center: *center,
                radius: *radius,
                inner: *inner,
            },
            FieldPreset::AnnularPlateau { height, lo, hi, ramp, center } => {
                FieldPreset::AnnularPlateau {
                    height: height * factor,
                    lo: *lo,
                    hi: *hi,
                    ramp: *ramp,
                    center: *center,
                }
            }
            FieldPreset::AnnularWell { depth, lo, hi, ramp, center } => FieldPreset::AnnularWell {
                depth: depth * factor,
                lo: *lo,
                hi: *hi,
                ramp: *ramp,
                center: *center,
            },
            FieldPreset::PlateauWithSpike {
                base,
                peak,
                lo,
                hi,
                ramp,
                spike_center,
                spike_radius,
                center,
            } => FieldPreset::PlateauWithSpike {
                base: base * factor,
                peak: peak * factor,
                lo: *lo,
                hi: *hi,
                ramp: *ramp,
                spike_center: *spike_center,
                spike_radius: *spike_radius,
                center: *center,
            },
            FieldPreset::CustomSum { terms } => FieldPreset::CustomSum {
                terms: terms.iter().map(|t| t.scaled(factor)).collect(),
            },
        }
    }

    fn check_params(&self, chart: ChartKind, bbox: [[f64; 2]; 2]) -> Result<(), FieldError> {
        let bad = |m: &str| Err(FieldError::PresetOutOfBounds(m.to_string()));
        let inside = |c: [f64; 2]| {
            (bbox[0][0]..=bbox[1][0]).contains(&c[0]) && (bbox[0][1]..=bbox[1][1]).contains(&c[1])
        };
        let band_ok = |lo: f64, hi: f64, ramp: f64| {
            lo.is_finite() && hi.is_finite() && lo <= hi && ramp > 0.0 && ramp.is_finite()
        };
        match self {
            FieldPreset::DiscBump { height, center, radius, inner } => {
                let inner = inner.unwrap_or(radius / 2.0);
                if !height.is_finite() || !(*radius > 0.0) || !(0.0..*radius).contains(&inner) {
                    return bad("disc_bump needs finite height and 0 <= inner < radius");
                }
                if !inside(*center) {
                    return bad("disc_bump center outside the mesh");
                }
            }
            FieldPreset::AnnularPlateau { height: h, lo, hi, ramp, center }
            | FieldPreset::AnnularWell { depth: h, lo, hi, ramp, center } => {
                if !h.is_finite() || !band_ok(*lo, *hi, *ramp) {
                    return bad("band needs finite height, lo <= hi and ramp > 0");
                }
                if chart == ChartKind::Plane && *lo - ramp < 0.0 && *lo > 0.0 {
                    return bad("radial band ramp crosses the centre");
                }
                if let Some(c) = center {
                    if !inside(*c) {
                        return bad("band center outside the mesh");
                    }
                }
            }
            FieldPreset::PlateauWithSpike {
                base,
                peak,
                lo,
                hi,
                ramp,
                spike_center,
                spike_radius,
                center,
            } => {
                if !base.is_finite() || !peak.is_finite() || !band_ok(*lo, *hi, *ramp) {
                    return bad("plateau_with_spike needs finite heights and a valid band");
                }
                if !(*spike_radius > 0.0) || !inside(*spike_center) {
                    return bad("spike must have positive radius and lie inside the mesh");
                }
                let (u, _) = band_coordinate(chart, *spike_center, *center);
                if u - spike_radius < *lo || u + spike_radius > *hi {
                    return bad("spike must sit on the flat part of the plateau");
                }
            }
            FieldPreset::CustomSum { terms } => {
                for t in terms {
                    t.check_params(chart, bbox)?;
                }
            }
        }
        Ok(())
    }
}

/// A Hamiltonian sampled on mesh vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianField {
    pub mesh: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<FieldPreset>,
}

impl HamiltonianField {
    /// Field from raw vertex values; checks length and finiteness.
    pub fn from_values(mesh: &SurfaceMesh, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != mesh.vertex_count() {
            return Err(FieldError::LengthMismatch {
                values: values.len(),
                vertices: mesh.vertex_count(),
            });
        }
        if let Some(v) = values.iter().position(|x| !x.is_finite()) {
            return Err(FieldError::NonFinite(mesh.vertex_id(v)));
        }
        // normalise -0.0 so reports and zero tests agree
        let values = values.into_iter().map(|x| x + 0.0).collect();
        Ok(Self { mesh: mesh.name().to_string(), values, closed_form: None })
    }

    pub fn zero(mesh: &SurfaceMesh) -> Self {
        Self { mesh: mesh.name().to_string(), values: vec![0.0; mesh.vertex_count()], closed_form: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Vertexwise `factor * H`; the closed form is scaled along.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| v * factor + 0.0).collect(),
            closed_form: self.closed_form.as_ref().map(|p| p.scaled(factor)),
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }
}

/// On-disk field: explicit vertex values or a preset to sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldFile {
    Values { mesh: String, values: Vec<f64> },
    Preset(FieldPreset),
}

impl FieldFile {
    pub fn load(path: &Path) -> Result<Self, FieldError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Resolves to a validated field on `mesh` (compact support not checked).
    pub fn resolve(&self, mesh: &SurfaceMesh) -> Result<HamiltonianField, FieldError> {
        match self {
            FieldFile::Values { values, .. } => HamiltonianField::from_values(mesh, values.clone()),
            FieldFile::Preset(p) => sample_preset(mesh, p),
        }
    }
}

fn bounding_box(coords: &[[f64; 2]]) -> [[f64; 2]; 2] {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for c in coords {
        for k in 0..2 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    [lo, hi]
}

/// Samples a preset at the mesh coordinates.
pub fn sample_preset(mesh: &SurfaceMesh, preset: &FieldPreset) -> Result<HamiltonianField, FieldError> {
    let coords = mesh.coords().ok_or(FieldError::NoCoordinates)?;
    let chart = mesh.chart().unwrap_or(ChartKind::Plane);
    let mut bbox = bounding_box(coords);
    if chart == ChartKind::Cylinder {
        bbox[0][0] = 0.0;
        bbox[1][0] = 2.0 * PI;
    }
    preset.check_params(chart, bbox)?;
    let values: Vec<f64> = coords.iter().map(|&x| preset.value(chart, x) + 0.0).collect();
    let mut field = HamiltonianField::from_values(mesh, values)?;
    field.closed_form = Some(preset.clone());
    check_compact_support(mesh, &field).map_err(|e| match e {
        FieldError::SupportTouchesEnd(v) => {
            FieldError::PresetOutOfBounds(format!("support reaches the end ring at vertex {v}"))
        }
        other => other,
    })?;
    Ok(field)
}

/// The field must vanish on every vertex of a face that touches an end.
pub fn check_compact_support(mesh: &SurfaceMesh, field: &HamiltonianField) -> Result<(), FieldError> {
    if field.values.len() != mesh.vertex_count() {
        return Err(FieldError::LengthMismatch {
            values: field.values.len(),
            vertices: mesh.vertex_count(),
        });
    }
    let ring = mesh.end_ring();
    match (0..mesh.vertex_count()).find(|&v| ring[v] && field.values[v] != 0.0) {
        Some(v) => Err(FieldError::SupportTouchesEnd(mesh.vertex_id(v))),
        None => Ok(()),
    }
}

/// The open set `{H != 0}`: positive and negative vertices, with edges and
/// faces only inside one sign.
pub fn support_region(mesh: &SurfaceMesh, field: &HamiltonianField) -> SubComplex {
    let class: Vec<Option<u8>> = field
        .values
        .iter()
        .map(|&v| {
            if v > 0.0 {
                Some(1)
            } else if v < 0.0 {
                Some(0)
            } else {
                None
            }
        })
        .collect();
    SubComplex::classed(mesh, &class)
}

/// Number of maximal runs of `true` in a cyclic or linear sequence. A cyclic
/// sequence that is all `true` counts as one run.
fn runs(flags: &[bool], cyclic: bool) -> usize {
    let n = flags.len();
    if n == 0 {
        return 0;
    }
    if cyclic && flags.iter().all(|&f| f) {
        return 1;
    }
    (0..n)
        .filter(|&i| {
            if !flags[i] {
                return false;
            }
            if i == 0 {
                !(cyclic && flags[n - 1])
            } else {
                !flags[i - 1]
            }
        })
        .count()
}

/// Whether `v` is a minimum, maximum or saddle of the lower-star filtration
/// with ties broken by vertex index (ascending if `ascending`, else
/// descending).
fn is_critical_vertex(mesh: &SurfaceMesh, values: &[f64], v: usize, ascending: bool) -> bool {
    let (link, closed) = mesh.link(v);
    let above = |u: usize| {
        let (a, b) = (values[u], values[v]);
        a > b || (a == b && if ascending { u > v } else { u < v })
    };
    let upper: Vec<bool> = link.iter().map(|&u| above(u)).collect();
    let lower: Vec<bool> = upper.iter().map(|&x| !x).collect();
    runs(&upper, closed) != 1 || runs(&lower, closed) != 1
}

/// Vertex values at which the level-set topology changes, sorted ascending.
/// Always contains the minimum and maximum.
pub fn discrete_critical_values(mesh: &SurfaceMesh, field: &HamiltonianField) -> Vec<f64> {
    let values = &field.values;
    let mut out: Vec<f64> = (0..mesh.vertex_count())
        .filter(|&v| {
            is_critical_vertex(mesh, values, v, true) || is_critical_vertex(mesh, values, v, false)
        })
        .map(|v| values[v])
        .collect();
    out.push(field.min());
    out.push(field.max());
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
