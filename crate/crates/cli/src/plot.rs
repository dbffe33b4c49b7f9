//! SVG plots: filled value bands on the mesh, witness loops on top.

use std::f64::consts::PI;
use std::fmt::Write as _;

use hofer_asym_core::field::HamiltonianField;
use hofer_asym_core::minimax::{GrowthReport, Verdict};
use hofer_asym_core::report::round_sig;
use hofer_asym_core::surface::{ChartKind, MeshLoop, SurfaceMesh};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("mesh has no coordinates to plot")]
    NoCoordinates,
    #[error("plot file: {0}")]
    Io(#[from] std::io::Error),
}

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;
const BANDS: f64 = 8.0;

struct Frame {
    lo: [f64; 2],
    scale: f64,
    height: f64,
    cylinder: bool,
}

impl Frame {
    fn new(mesh: &SurfaceMesh, coords: &[[f64; 2]]) -> Self {
        let cylinder = mesh.chart() == Some(ChartKind::Cylinder);
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for c in coords {
            for k in 0..2 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        if cylinder {
            lo[0] = 0.0;
            hi[0] = 2.0 * PI;
        }
        let span_x = (hi[0] - lo[0]).max(1e-12);
        let span_y = (hi[1] - lo[1]).max(1e-12);
        let scale = (WIDTH - 2.0 * MARGIN) / span_x;
        Self { lo, scale, height: span_y * scale + 2.0 * MARGIN + 40.0, cylinder }
    }

    fn point(&self, c: [f64; 2]) -> (f64, f64) {
        let x = MARGIN + (c[0] - self.lo[0]) * self.scale;
        let y = self.height - 40.0 - MARGIN - (c[1] - self.lo[1]) * self.scale;
        (round_sig(x), round_sig(y))
    }

    /// `c` with its angle shifted next to `reference` on the cylinder.
    fn unwrap(&self, reference: [f64; 2], c: [f64; 2]) -> [f64; 2] {
        if !self.cylinder {
            return c;
        }
        let mut t = c[0];
        while t - reference[0] > PI {
            t -= 2.0 * PI;
        }
        while t - reference[0] < -PI {
            t += 2.0 * PI;
        }
        [t, c[1]]
    }
}

fn band_colour(v: f64, amp: f64) -> String {
    if v == 0.0 || amp == 0.0 {
        return "#ffffff".to_string();
    }
    let level = ((v.abs() / amp) * BANDS).ceil().clamp(1.0, BANDS) / BANDS;
    let fade = (255.0 * (1.0 - 0.85 * level)).round() as u8;
    if v > 0.0 {
        format!("#ff{fade:02x}{fade:02x}")
    } else {
        format!("#{fade:02x}{fade:02x}ff")
    }
}

fn loop_path(frame: &Frame, coords: &[[f64; 2]], lp: &MeshLoop, class: &str) -> String {
    let vs = lp.vertices();
    let mut d = String::new();
    for i in 0..vs.len() {
        let a = coords[vs[i]];
        let b = frame.unwrap(a, coords[vs[(i + 1) % vs.len()]]);
        let (ax, ay) = frame.point(a);
        let (bx, by) = frame.point(b);
        let _ = write!(d, "M{ax} {ay}L{bx} {by}");
    }
    format!("<path class=\"witness {class}\" d=\"{d}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"3\"/>\n")
}

/// Renders the plot. Witness loops are drawn only for linear growth.
pub fn render_plot(
    mesh: &SurfaceMesh,
    field: &HamiltonianField,
    report: &GrowthReport,
) -> Result<String, PlotError> {
    let coords = mesh.coords().ok_or(PlotError::NoCoordinates)?;
    let frame = Frame::new(mesh, coords);
    let amp = field.max().abs().max(field.min().abs());
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{}\" viewBox=\"0 0 {WIDTH} {}\">",
        round_sig(frame.height),
        round_sig(frame.height)
    );
    svg.push_str("<g class=\"bands\" stroke=\"none\">\n");
    for face in mesh.faces() {
        let mean = face.iter().map(|&v| field.values[v]).sum::<f64>() / face.len() as f64;
        let first = coords[face[0]];
        let pts: Vec<String> = face
            .iter()
            .map(|&v| {
                let (x, y) = frame.point(frame.unwrap(first, coords[v]));
                format!("{x},{y}")
            })
            .collect();
        let _ = writeln!(svg, "<polygon points=\"{}\" fill=\"{}\"/>", pts.join(" "), band_colour(mean, amp));
    }
    svg.push_str("</g>\n");
    if report.verdict == Verdict::Linear {
        for (lp, class) in [(&report.witness_plus, "witness-plus"), (&report.witness_minus, "witness-minus")] {
            if let Some(lp) = lp {
                svg.push_str(&loop_path(&frame, coords, lp, class));
            }
        }
    }
    let _ = writeln!(
        svg,
        "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\">c+ = {}, c- = {}, mu = {}, verdict {:?}</text>",
        round_sig(frame.height - 15.0),
        round_sig(report.c_plus),
        round_sig(report.c_minus),
        round_sig(report.mu),
        report.verdict
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(
    mesh: &SurfaceMesh,
    field: &HamiltonianField,
    report: &GrowthReport,
    path: &std::path::Path,
) -> Result<(), PlotError> {
    let svg = render_plot(mesh, field, report)?;
    std::fs::write(path, svg)?;
    Ok(())
}
