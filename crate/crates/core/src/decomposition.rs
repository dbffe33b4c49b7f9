//! Commuting decomposition `H = K + H0` and the linear upper bound on the
//! Hofer norm growth.
//!
//! `K = rho(H)` cuts `H` off just beyond `[c_minus, c_plus]`, so its
//! oscillation is `mu + 4 eps` in the generic case. `H0 = H - K` lives on
//! `Z(eps)`, whose hull is a union of discs, and its flow stays within
//! `16 * area(hull)` of the identity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::HamiltonianField;
use crate::minimax::GrowthReport;
use crate::surface::{hull, HullResult, SubComplex, SurfaceError, SurfaceMesh};

#[derive(Debug, Error)]
pub enum DecompositionError {
    #[error("invalid cutoff band: c_minus = {c_minus}, c_plus = {c_plus}, epsilon = {epsilon}")]
    InvalidBand { c_minus: f64, c_plus: f64, epsilon: f64 },
    #[error("kappa = {kappa} must lie strictly between 0 and epsilon = {epsilon}")]
    KappaOutOfRange { kappa: f64, epsilon: f64 },
    #[error("kappa = {0} is not a regular value: c_plus + kappa or c_minus - kappa is a vertex value")]
    KappaNotRegular(f64),
    #[error("Z(kappa) has a non-contractible boundary circle: {0}")]
    NonContractibleBoundary(SurfaceError),
    #[error("decomposition and report do not come from the same field: {0}")]
    MismatchedInputs(String),
    #[error("field has {values} values but mesh has {vertices} vertices")]
    LengthMismatch { values: usize, vertices: usize },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// The cutoff `rho`: identity on `[c_minus - eps, c_plus + eps]`, constant
/// `c_plus + 2 eps` above `c_plus + 3 eps` and `c_minus - 2 eps` below
/// `c_minus - 3 eps`. In each transition band `rho'` is a cubic smoothstep
/// from 1 down to 0, so `rho` is C2 and `0 < rho' < 1` inside the bands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub c_minus: f64,
    pub c_plus: f64,
    pub epsilon: f64,
    /// `[c_minus - 3 eps, c_minus - eps, c_plus + eps, c_plus + 3 eps]`.
    pub knots: [f64; 4],
}

pub fn build_cutoff(c_minus: f64, c_plus: f64, epsilon: f64) -> Result<CutoffProfile, DecompositionError> {
    let finite = c_minus.is_finite() && c_plus.is_finite() && epsilon.is_finite();
    if !finite || !(epsilon > 0.0) || c_minus > c_plus {
        return Err(DecompositionError::InvalidBand { c_minus, c_plus, epsilon });
    }
    Ok(CutoffProfile {
        c_minus,
        c_plus,
        epsilon,
        knots: [
            c_minus - 3.0 * epsilon,
            c_minus - epsilon,
            c_plus + epsilon,
            c_plus + 3.0 * epsilon,
        ],
    })
}

impl CutoffProfile {
    pub fn eval(&self, s: f64) -> f64 {
        let e = self.epsilon;
        let [a, b, c, d] = self.knots;
        if s >= d {
            self.c_plus + 2.0 * e
        } else if s > c {
            let u = (s - c) / (2.0 * e);
            c + 2.0 * e * (u - u * u * u + 0.5 * u * u * u * u)
        } else if s >= b {
            s
        } else if s > a {
            let u = (s - a) / (2.0 * e);
            (self.c_minus - 2.0 * e) + 2.0 * e * (u * u * u - 0.5 * u * u * u * u)
        } else {
            self.c_minus - 2.0 * e
        }
    }

    pub fn deriv(&self, s: f64) -> f64 {
        let e = self.epsilon;
        let [a, b, c, d] = self.knots;
        if s >= d || s <= a {
            0.0
        } else if s > c {
            let u = (s - c) / (2.0 * e);
            1.0 - u * u * (3.0 - 2.0 * u)
        } else if s >= b {
            1.0
        } else {
            let u = (s - a) / (2.0 * e);
            u * u * (3.0 - 2.0 * u)
        }
    }
}

/// Splits `h` into `(k, h0)` with `k` close to `r` and `k + h0 == h` in
/// floating point. Deterministic in `h`, so `K` stays a function of `H`.
fn split_exact(h: f64, r: f64) -> (f64, f64) {
    let h0 = h - r;
    let k = h - h0;
    for cand in [k, k.next_up(), k.next_down()] {
        if cand + h0 == h {
            return (cand + 0.0, h0 + 0.0);
        }
    }
    // unreachable for |h0| <= |h|; keep the identity exact regardless
    (h, 0.0)
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub mesh: String,
    pub c_plus: f64,
    pub c_minus: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub cutoff: CutoffProfile,
    /// `K = rho(H)`.
    pub k: HamiltonianField,
    /// `H0 = H - K`.
    pub h0: HamiltonianField,
    /// `{H <= c_minus - eps} u {H >= c_plus + eps}`, sides kept apart.
    pub z_eps: SubComplex,
    pub z_kappa: SubComplex,
    pub hull: HullResult,
    pub sikorav_c: f64,
    /// True when `H` reaches beyond both outer knots, so that
    /// `max K - min K = mu + 4 eps` holds exactly.
    pub generic: bool,
}

impl Decomposition {
    pub fn oscillation_k(&self) -> f64 {
        self.k.max() - self.k.min()
    }
}

/// `eps = max(|c_plus|, |c_minus|, max|H| / 100) / 10`, or `0.1` for the zero
/// field.
pub fn default_epsilon(report: &GrowthReport, field: &HamiltonianField) -> f64 {
    let amp = field.max().abs().max(field.min().abs());
    let e = 0.1 * report.c_plus.abs().max(report.c_minus.abs()).max(amp * 1e-2);
    if e > 0.0 {
        e
    } else {
        0.1
    }
}

fn level_offsets(field: &HamiltonianField, c_minus: f64, c_plus: f64) -> impl Iterator<Item = f64> + '_ {
    field.values.iter().flat_map(move |&v| [v - c_plus, c_minus - v])
}

/// Half the smallest positive offset of a vertex value beyond `c_plus` or
/// below `c_minus`, capped by `epsilon`. Always a regular value in
/// `(0, epsilon)`.
pub fn default_kappa(field: &HamiltonianField, c_minus: f64, c_plus: f64, epsilon: f64) -> f64 {
    let gap = level_offsets(field, c_minus, c_plus)
        .filter(|&d| d > 0.0)
        .fold(epsilon, f64::min);
    gap / 2.0
}

fn band_complex(mesh: &SurfaceMesh, field: &HamiltonianField, lo: f64, hi: f64) -> SubComplex {
    let class: Vec<Option<u8>> = field
        .values
        .iter()
        .map(|&v| {
            if v >= hi {
                Some(1)
            } else if v <= lo {
                Some(0)
            } else {
                None
            }
        })
        .collect();
    SubComplex::classed(mesh, &class)
}

/// Builds `K`, `H0`, `Z(eps)`, `Z(kappa)`, the hull of `Z(kappa)` and the
/// disc constant. `kappa = None` picks [`default_kappa`].
pub fn decompose(
    mesh: &SurfaceMesh,
    field: &HamiltonianField,
    report: &GrowthReport,
    epsilon: f64,
    kappa: Option<f64>,
) -> Result<Decomposition, DecompositionError> {
    if field.values.len() != mesh.vertex_count() {
        return Err(DecompositionError::LengthMismatch {
            values: field.values.len(),
            vertices: mesh.vertex_count(),
        });
    }
    let (c_minus, c_plus) = (report.c_minus, report.c_plus);
    let cutoff = build_cutoff(c_minus, c_plus, epsilon)?;
    let kappa = kappa.unwrap_or_else(|| default_kappa(field, c_minus, c_plus, epsilon));
    if !(kappa > 0.0 && kappa < epsilon) {
        return Err(DecompositionError::KappaOutOfRange { kappa, epsilon });
    }
    let (lo_k, hi_k) = (c_minus - kappa, c_plus + kappa);
    if field.values.iter().any(|&v| v == lo_k || v == hi_k) {
        return Err(DecompositionError::KappaNotRegular(kappa));
    }

    let (kv, h0v): (Vec<f64>, Vec<f64>) =
        field.values.iter().map(|&h| split_exact(h, cutoff.eval(h))).unzip();
    let named = |values| HamiltonianField { mesh: field.mesh.clone(), values, closed_form: None };

    let z_eps = band_complex(mesh, field, c_minus - epsilon, c_plus + epsilon);
    let z_kappa = band_complex(mesh, field, lo_k, hi_k);
    let hull = match hull(mesh, &z_kappa) {
        Ok(h) => h,
        Err(e @ SurfaceError::NonContractibleBoundary(_)) => {
            return Err(DecompositionError::NonContractibleBoundary(e))
        }
        Err(e) => return Err(e.into()),
    };
    let sikorav_c = sikorav_constant(mesh, &hull.discs);
    let [a, _, _, d] = cutoff.knots;
    let generic = field.max() >= d && field.min() <= a;

    Ok(Decomposition {
        mesh: field.mesh.clone(),
        c_plus,
        c_minus,
        epsilon,
        kappa,
        cutoff,
        k: named(kv),
        h0: named(h0v),
        z_eps,
        z_kappa,
        hull,
        sikorav_c,
        generic,
    })
}

/// `16 * sum of disc areas`.
pub fn sikorav_constant(mesh: &SurfaceMesh, discs: &[SubComplex]) -> f64 {
    16.0 * discs.iter().map(|d| d.area(mesh)).sum::<f64>() + 0.0
}

/// `r_H(t) <= C + slope * t` for all `t >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    #[serde(rename = "C")]
    pub c: f64,
    /// `mu + 4 eps`.
    pub slope: f64,
    /// `max K - min K`; at most `slope`, equal in the generic case.
    pub sharp_slope: f64,
    pub epsilon: f64,
    pub kappa: f64,
    /// `mu = 0`: the growth is bounded by `C` alone.
    pub bounded: bool,
    pub statement: String,
    pub assumptions: Vec<String>,
}

pub fn upper_bound_certificate(
    decomposition: &Decomposition,
    report: &GrowthReport,
) -> Result<BoundCertificate, DecompositionError> {
    if decomposition.c_plus != report.c_plus || decomposition.c_minus != report.c_minus {
        return Err(DecompositionError::MismatchedInputs(format!(
            "c_plus/c_minus {}/{} vs {}/{}",
            decomposition.c_plus, decomposition.c_minus, report.c_plus, report.c_minus
        )));
    }
    let c = decomposition.sikorav_c;
    let slope = report.mu + 4.0 * decomposition.epsilon;
    let bounded = report.mu == 0.0;
    let statement = if bounded {
        format!("r_H(t) <= {c} for all t >= 0")
    } else {
        format!("r_H(t) <= {c} + {slope} t for all t >= 0")
    };
    let mut assumptions = vec![
        "H is the restriction to the mesh of a smooth compactly supported Hamiltonian".to_string(),
        "the disc constant 16 * area applies to each hull disc".to_string(),
    ];
    if report.simply_connected {
        assumptions.push("the surface is simply connected; c_plus and c_minus are set to 0".to_string());
    }
    Ok(BoundCertificate {
        c,
        slope,
        sharp_slope: decomposition.oscillation_k(),
        epsilon: decomposition.epsilon,
        kappa: decomposition.kappa,
        bounded,
        statement,
        assumptions,
    })
}
