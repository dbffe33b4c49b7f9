//! Brute-force minimax values from explicit simple cycles.
//!
//! This path shares nothing with the level sweeps except the cut criterion
//! for single loops. It is exponential and meant for small fixtures.

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::field::{check_compact_support, FieldError, HamiltonianField};
use crate::minimax::GrowthReport;
use crate::surface::{is_loop_contractible, MeshLoop, SurfaceError, SurfaceMesh};

/// Largest mesh the oracle accepts.
pub const MAX_ORACLE_VERTICES: usize = 400;
/// Hard cap on the number of cycles visited in one call.
pub const MAX_ORACLE_CYCLES: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("exhaustive search too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleEnumeration {
    pub cycles: Vec<MeshLoop>,
    pub max_length: usize,
    /// True when `max_length` admits every simple cycle of the mesh.
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub c_plus: f64,
    pub c_minus: f64,
    pub witness_plus: Option<MeshLoop>,
    pub witness_minus: Option<MeshLoop>,
    /// No non-contractible circle exists; both values are reported as 0.
    pub simply_connected: bool,
    pub cycles_examined: usize,
}

struct Search<'a> {
    mesh: &'a SurfaceMesh,
    allowed: &'a dyn Fn(usize) -> bool,
    max_length: usize,
    counter: &'a AtomicUsize,
}

impl Search<'_> {
    /// Depth-first extension of `path`; every cycle through `path[0]` whose
    /// other vertices pass `allowed` is reported once per orientation class.
    fn extend(
        &self,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>, OracleError> {
        let s = path[0];
        let last = *path.last().expect("non-empty path");
        for &u in self.mesh.neighbors(last) {
            if u == s && path.len() >= 3 && path[1] < last {
                if self.counter.fetch_add(1, Ordering::Relaxed) >= MAX_ORACLE_CYCLES {
                    return Err(OracleError::TooLarge(format!(
                        "more than {MAX_ORACLE_CYCLES} cycles"
                    )));
                }
                if visit(path).is_break() {
                    return Ok(ControlFlow::Break(()));
                }
                continue;
            }
            if on_path[u] || u == s || !(self.allowed)(u) || path.len() >= self.max_length {
                continue;
            }
            path.push(u);
            on_path[u] = true;
            let flow = self.extend(path, on_path, visit)?;
            on_path[u] = false;
            path.pop();
            if flow.is_break() {
                return Ok(flow);
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn from(
        &self,
        s: usize,
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>, OracleError> {
        let mut path = vec![s];
        let mut on_path = vec![false; self.mesh.vertex_count()];
        on_path[s] = true;
        self.extend(&mut path, &mut on_path, visit)
    }
}

fn guard(mesh: &SurfaceMesh) -> Result<(), OracleError> {
    if mesh.vertex_count() > MAX_ORACLE_VERTICES {
        return Err(OracleError::TooLarge(format!(
            "{} vertices, limit {MAX_ORACLE_VERTICES}",
            mesh.vertex_count()
        )));
    }
    Ok(())
}

/// Every simple edge cycle of length at most `max_length`, each once up to
/// rotation and reversal. A cycle is listed from its smallest vertex.
pub fn enumerate_simple_cycles(mesh: &SurfaceMesh, max_length: usize) -> Result<CycleEnumeration, OracleError> {
    guard(mesh)?;
    let counter = AtomicUsize::new(0);
    let per_start: Result<Vec<Vec<MeshLoop>>, OracleError> = (0..mesh.vertex_count())
        .into_par_iter()
        .map(|s| {
            let allowed = move |u: usize| u > s;
            let search = Search { mesh, allowed: &allowed, max_length, counter: &counter };
            let mut found = Vec::new();
            let _ = search.from(s, &mut |p| {
                found.push(MeshLoop::new(p.to_vec()));
                ControlFlow::Continue(())
            })?;
            Ok(found)
        })
        .collect();
    Ok(CycleEnumeration {
        cycles: per_start?.into_iter().flatten().collect(),
        max_length,
        exhaustive: max_length >= mesh.vertex_count(),
    })
}

/// Largest `t > 0` such that a non-contractible simple cycle has minimum
/// exactly `t`, scanning thresholds from the top. Cycles with minimum `t` are
/// enumerated from their smallest-index vertex of value `t`.
fn plus_side(
    mesh: &SurfaceMesh,
    values: &[f64],
    max_length: usize,
    counter: &AtomicUsize,
) -> Result<Option<(f64, MeshLoop)>, OracleError> {
    let mut thresholds: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    for t in thresholds {
        let starts: Vec<usize> = (0..values.len()).filter(|&v| values[v] == t).collect();
        let hit = starts
            .par_iter()
            .map(|&s| -> Result<Option<MeshLoop>, OracleError> {
                let allowed = move |u: usize| values[u] > t || (values[u] == t && u > s);
                let search = Search { mesh, allowed: &allowed, max_length, counter };
                let mut witness = None;
                let mut failure = None;
                let _ = search.from(s, &mut |p| {
                    let lp = MeshLoop::new(p.to_vec());
                    match is_loop_contractible(mesh, &lp) {
                        Ok((false, _)) => {
                            witness = Some(lp);
                            ControlFlow::Break(())
                        }
                        Ok((true, _)) => ControlFlow::Continue(()),
                        Err(e) => {
                            failure = Some(e);
                            ControlFlow::Break(())
                        }
                    }
                })?;
                match failure {
                    Some(e) => Err(e.into()),
                    None => Ok(witness),
                }
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .next();
        if let Some(lp) = hit {
            return Ok(Some((t, lp)));
        }
    }
    Ok(None)
}

/// A non-contractible end cycle: the far-field circle where `H = 0`.
fn far_field_circle(mesh: &SurfaceMesh) -> Result<Option<MeshLoop>, OracleError> {
    for end in mesh.ends() {
        let lp = MeshLoop::new(end.clone());
        if lp.check_embedded(mesh).is_ok() && !is_loop_contractible(mesh, &lp)?.0 {
            return Ok(Some(lp));
        }
    }
    Ok(None)
}

/// `c_plus` and `c_minus` from their sup-min and inf-max definitions over
/// simple cycles of length at most `max_length`.
pub fn brute_force_minimax(
    mesh: &SurfaceMesh,
    field: &HamiltonianField,
    max_length: usize,
) -> Result<OracleResult, OracleError> {
    guard(mesh)?;
    check_compact_support(mesh, field)?;
    let far = match far_field_circle(mesh)? {
        Some(lp) => lp,
        None => {
            return Ok(OracleResult {
                c_plus: 0.0,
                c_minus: 0.0,
                witness_plus: None,
                witness_minus: None,
                simply_connected: true,
                cycles_examined: 0,
            })
        }
    };
    let counter = AtomicUsize::new(0);
    let negated: Vec<f64> = field.values.iter().map(|v| -v).collect();
    let plus = plus_side(mesh, &field.values, max_length, &counter)?;
    let minus = plus_side(mesh, &negated, max_length, &counter)?;
    let (c_plus, witness_plus) = plus.unwrap_or((0.0, far.clone()));
    let (m, witness_minus) = minus.unwrap_or((0.0, far));
    Ok(OracleResult {
        c_plus,
        c_minus: -m + 0.0,
        witness_plus: Some(witness_plus),
        witness_minus: Some(witness_minus),
        simply_connected: false,
        cycles_examined: counter.into_inner(),
    })
}

/// Exact agreement of the sweep values with the oracle.
pub fn oracle_matches(report: &GrowthReport, oracle: &OracleResult) -> bool {
    report.c_plus == oracle.c_plus
        && report.c_minus == oracle.c_minus
        && report.simply_connected == oracle.simply_connected
}
