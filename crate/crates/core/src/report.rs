//! Canonical JSON reports.
//!
//! Keys are sorted and every float is rounded to 12 significant digits, so a
//! report is byte-identical across runs. Loops are written as external vertex
//! ids.

use serde_json::{json, Map, Value};

use crate::decomposition::{BoundCertificate, Decomposition};
use crate::minimax::{GrowthReport, Verdict};
use crate::surface::{MeshLoop, SurfaceMesh};

/// Rounds to 12 significant digits, ties to even on the decimal digit.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x + 0.0;
    }
    format!("{x:.11e}").parse::<f64>().map(|v| v + 0.0).unwrap_or(x)
}

/// Rounds every float in a JSON tree.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

/// Pretty-printed canonical form with a trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&canonicalize(v.clone())).expect("JSON values serialize");
    s.push('\n');
    s
}

fn loop_ids(mesh: &SurfaceMesh, lp: &Option<MeshLoop>) -> Value {
    match lp {
        Some(lp) => json!(lp.vertex_ids(mesh)),
        None => json!([]),
    }
}

/// The analysis report object.
pub fn growth_report_value(mesh: &SurfaceMesh, report: &GrowthReport) -> Value {
    let verdict = match report.verdict {
        Verdict::Bounded => "bounded",
        Verdict::Linear => "linear",
    };
    let checks: Map<String, Value> =
        report.checks.iter().map(|(k, &v)| (k.clone(), Value::Bool(v))).collect();
    json!({
        "mesh": mesh.name(),
        "c_plus": report.c_plus,
        "c_minus": report.c_minus,
        "mu": report.mu,
        "verdict": verdict,
        "witness_plus": loop_ids(mesh, &report.witness_plus),
        "witness_minus": loop_ids(mesh, &report.witness_minus),
        "initial_slope": report.initial_slope,
        "simply_connected": report.simply_connected,
        "critical_values": report.critical_values,
        "checks": checks,
    })
}

/// The `upper_bound` object.
pub fn certificate_value(cert: &BoundCertificate) -> Value {
    json!({
        "C": cert.c,
        "slope": cert.slope,
        "sharp_slope": cert.sharp_slope,
        "epsilon": cert.epsilon,
        "kappa": cert.kappa,
        "bounded": cert.bounded,
        "statement": cert.statement,
        "assumptions": cert.assumptions,
    })
}

/// Summary of a decomposition: hull discs and identity checks.
pub fn decomposition_value(mesh: &SurfaceMesh, field_values: &[f64], d: &Decomposition) -> Value {
    let exact_sum = d
        .k
        .values
        .iter()
        .zip(&d.h0.values)
        .zip(field_values)
        .all(|((k, h0), h)| k + h0 == *h);
    let support_inside = d
        .h0
        .values
        .iter()
        .enumerate()
        .all(|(v, &x)| x == 0.0 || d.z_eps.vertices[v]);
    let discs: Vec<Value> = d
        .hull
        .summaries
        .iter()
        .map(|s| {
            let vertices: Vec<u64> = (0..mesh.vertex_count())
                .filter(|&v| d.hull.discs[s.component_id].vertices[v])
                .map(|v| mesh.vertex_id(v))
                .collect();
            json!({"area": s.area, "faces": s.faces.len(), "vertices": vertices})
        })
        .collect();
    json!({
        "epsilon": d.epsilon,
        "kappa": d.kappa,
        "max_k_minus_min_k": d.oscillation_k(),
        "generic": d.generic,
        "hull_discs": discs,
        "sikorav_C": d.sikorav_c,
        "checks": {
            "sum_exact": exact_sum,
            "h0_support_in_z_eps": support_inside,
        },
    })
}
