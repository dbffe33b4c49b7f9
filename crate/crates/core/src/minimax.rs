//! Minimax values `c_plus`, `c_minus` by monotone level sweeps.
//!
//! `c_plus` is the largest level `E >= 0` whose closed superlevel complex
//! `{H >= E}` still contains a non-contractible circle. Only `0` and the
//! positive vertex values need testing: between consecutive vertex values the
//! induced complex does not change. The minus side is the plus side of `-H`,
//! mirrored, which makes sign symmetry exact.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{check_compact_support, discrete_critical_values, support_region, FieldError, HamiltonianField};
use crate::surface::{
    is_region_contractible, region_contractible, Dsu, MeshLoop, SubComplex, SurfaceError, SurfaceMesh,
};

#[derive(Debug, Error)]
pub enum MinimaxError {
    #[error("surface is simply connected: there are no non-contractible circles")]
    SimplyConnectedSurface,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelSide {
    Above,
    Below,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxResult {
    pub value: f64,
    pub witness: Option<MeshLoop>,
    pub side: Side,
    /// Tested levels in sweep order (ascending for plus, descending for
    /// minus) with the contractibility of the level complex.
    pub swept_levels: Vec<(f64, bool)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub c_plus: f64,
    pub c_minus: f64,
    pub mu: f64,
    pub verdict: Verdict,
    pub witness_plus: Option<MeshLoop>,
    pub witness_minus: Option<MeshLoop>,
    /// `max H - min H`, the slope of `r_H` for small times.
    pub initial_slope: f64,
    pub simply_connected: bool,
    pub critical_values: Vec<f64>,
    pub checks: BTreeMap<String, bool>,
}

/// Closed level complex: the full subcomplex on `{H >= e}` or `{H <= e}`.
pub fn level_complex(mesh: &SurfaceMesh, field: &HamiltonianField, e: f64, side: LevelSide) -> SubComplex {
    let selected: Vec<bool> = field
        .values
        .iter()
        .map(|&h| match side {
            LevelSide::Above => h >= e,
            LevelSide::Below => h <= e,
        })
        .collect();
    SubComplex::induced(mesh, &selected)
}

fn plus_levels(values: &[f64]) -> Vec<f64> {
    let mut levels: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
}

/// Genus-0 sweep: as `E` grows, an edge leaves the level complex once
/// `E > min(H(a), H(b))` and glues its faces (or its face and an end collar)
/// in the complement. A level is contractible iff all collars share a root.
fn sweep_genus_zero(mesh: &SurfaceMesh, values: &[f64], levels: &[f64]) -> Vec<bool> {
    let nf = mesh.face_count();
    let n_ends = mesh.end_count();
    let mut order: Vec<(f64, usize)> = mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| (values[edge.verts[0]].min(values[edge.verts[1]]), e))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut dsu = Dsu::new(nf + n_ends);
    let mut next = 0;
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        while next < order.len() && order[next].0 < level {
            let e = order[next].1;
            let edge = mesh.edge(e);
            match (edge.left, edge.right) {
                (Some(a), Some(b)) => {
                    dsu.union(a, b);
                }
                (Some(a), None) | (None, Some(a)) => {
                    if let Some(end) = mesh.edge_end(e) {
                        dsu.union(a, nf + end);
                    }
                }
                (None, None) => {}
            }
            next += 1;
        }
        let first = dsu.find(nf);
        out.push((1..n_ends).all(|k| dsu.find(nf + k) == first));
    }
    out
}

fn sweep_general(mesh: &SurfaceMesh, values: &[f64], levels: &[f64]) -> Result<Vec<bool>, SurfaceError> {
    levels
        .par_iter()
        .map(|&level| {
            let selected: Vec<bool> = values.iter().map(|&h| h >= level).collect();
            region_contractible(mesh, &SubComplex::induced(mesh, &selected))
        })
        .collect()
}

/// Plus-side value of raw vertex values, with witness and sweep record.
fn plus_side(mesh: &SurfaceMesh, values: &[f64]) -> Result<(f64, Option<MeshLoop>, Vec<(f64, bool)>), MinimaxError> {
    if mesh.is_simply_connected() {
        return Err(MinimaxError::SimplyConnectedSurface);
    }
    let levels = plus_levels(values);
    let contractible = if mesh.genus() == 0 {
        sweep_genus_zero(mesh, values, &levels)
    } else {
        sweep_general(mesh, values, &levels)?
    };
    let swept: Vec<(f64, bool)> = levels.iter().copied().zip(contractible.iter().copied()).collect();
    let last = match contractible.iter().rposition(|&c| !c) {
        Some(i) => i,
        None => {
            return Err(SurfaceError::Inconsistent(
                "the whole surface tested contractible on a non-simply-connected mesh".into(),
            )
            .into())
        }
    };
    let value = levels[last];
    let selected: Vec<bool> = values.iter().map(|&h| h >= value).collect();
    let (ok, witness) = is_region_contractible(mesh, &SubComplex::induced(mesh, &selected))?;
    if ok {
        return Err(SurfaceError::Inconsistent(format!(
            "sweep and witness search disagree at level {value}"
        ))
        .into());
    }
    Ok((value, witness, swept))
}

/// `c_plus` or `c_minus` of a compactly supported field.
pub fn compute_c(mesh: &SurfaceMesh, field: &HamiltonianField, side: Side) -> Result<MinimaxResult, MinimaxError> {
    check_compact_support(mesh, field)?;
    match side {
        Side::Plus => {
            let (value, witness, swept_levels) = plus_side(mesh, &field.values)?;
            Ok(MinimaxResult { value, witness, side, swept_levels })
        }
        Side::Minus => {
            let negated: Vec<f64> = field.values.iter().map(|v| -v).collect();
            let (value, witness, swept) = plus_side(mesh, &negated)?;
            Ok(MinimaxResult {
                value: -value + 0.0,
                witness,
                side,
                swept_levels: swept.into_iter().map(|(e, c)| (-e + 0.0, c)).collect(),
            })
        }
    }
}

/// Minimum (plus side) or maximum (minus side) of the field along a loop.
pub fn loop_extremum(field: &HamiltonianField, lp: &MeshLoop, side: Side) -> f64 {
    let it = lp.vertices().iter().map(|&v| field.values[v]);
    match side {
        Side::Plus => it.fold(f64::INFINITY, f64::min),
        Side::Minus => it.fold(f64::NEG_INFINITY, f64::max),
    }
}

fn witness_valid(mesh: &SurfaceMesh, field: &HamiltonianField, r: &MinimaxResult) -> bool {
    match &r.witness {
        None => false,
        Some(lp) => {
            loop_extremum(field, lp, r.side) == r.value
                && crate::surface::is_loop_contractible(mesh, lp).map(|(c, _)| !c).unwrap_or(false)
        }
    }
}

/// Growth rate of `r_H` with the structural checks.
pub fn analyze(mesh: &SurfaceMesh, field: &HamiltonianField) -> Result<GrowthReport, MinimaxError> {
    check_compact_support(mesh, field)?;
    let critical_values = discrete_critical_values(mesh, field);
    let initial_slope = field.max() - field.min();
    let in_crit = |c: f64| c == 0.0 || critical_values.contains(&c);
    let mut checks = BTreeMap::new();

    if mesh.is_simply_connected() {
        checks.insert("sig".to_string(), true);
        checks.insert("crit".to_string(), true);
        checks.insert("cont".to_string(), true);
        checks.insert("slope".to_string(), true);
        return Ok(GrowthReport {
            c_plus: 0.0,
            c_minus: 0.0,
            mu: 0.0,
            verdict: Verdict::Bounded,
            witness_plus: None,
            witness_minus: None,
            initial_slope,
            simply_connected: true,
            critical_values,
            checks,
        });
    }

    let (plus, minus) = rayon::join(
        || compute_c(mesh, field, Side::Plus),
        || compute_c(mesh, field, Side::Minus),
    );
    let (plus, minus) = (plus?, minus?);
    let (c_plus, c_minus) = (plus.value, minus.value);
    let mu = c_plus - c_minus;
    let support_contractible = region_contractible(mesh, &support_region(mesh, field))?;

    checks.insert("sig".to_string(), c_plus >= 0.0 && c_minus <= 0.0);
    checks.insert("crit".to_string(), in_crit(c_plus) && in_crit(c_minus));
    checks.insert("cont".to_string(), (c_plus == 0.0 && c_minus == 0.0) == support_contractible);
    checks.insert(
        "witness".to_string(),
        witness_valid(mesh, field, &plus) && witness_valid(mesh, field, &minus),
    );
    checks.insert("slope".to_string(), (0.0..=initial_slope).contains(&mu));

    Ok(GrowthReport {
        c_plus,
        c_minus,
        mu,
        verdict: if mu == 0.0 { Verdict::Bounded } else { Verdict::Linear },
        witness_plus: plus.witness,
        witness_minus: minus.witness,
        initial_slope,
        simply_connected: false,
        critical_values,
        checks,
    })
}
