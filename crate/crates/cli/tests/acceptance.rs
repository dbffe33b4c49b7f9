//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances are the constants below.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use hofer_asym_core::decomposition::{build_cutoff, decompose, default_epsilon};
use hofer_asym_core::field::{
    discrete_critical_values, sample_preset, support_region, FieldFile, FieldPreset, HamiltonianField,
};
use hofer_asym_core::flow::{convergence_ratio, decomposed_pair, integrate, verify_commutation, ChartFlowSpec, ClosedForm};
use hofer_asym_core::minimax::{analyze, compute_c, Side, Verdict};
use hofer_asym_core::oracle::{brute_force_minimax, MAX_ORACLE_VERTICES};
use hofer_asym_core::surface::{
    is_region_contractible, make_standard_surface, ChartKind, MeshData, StandardSurface, SurfaceMesh,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const FIXTURE_RUNTIME: Duration = Duration::from_secs(1);
const ORACLE_SUITE_RUNTIME: Duration = Duration::from_secs(60);
const FLOW_RUNTIME: Duration = Duration::from_secs(10);
const DICHOTOMY_FIELDS: usize = 20;
const RANDOM_FIELDS: usize = 1000;
const SCALING_FIELDS: usize = 100;
const SCALES: [f64; 3] = [0.5, 2.0, 10.0];
const AREA_REL_TOL: f64 = 1e-12;
const COMMUTE_TOL: f64 = 1e-6;
const ENERGY_DRIFT_TOL: f64 = 1e-8;
const RATIO_RANGE: (f64, f64) = (12.0, 20.0);
const FLOW_STEP: f64 = 1e-3;
const SEED: u64 = 20240917;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn read(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn load_mesh(name: &str) -> SurfaceMesh {
    let v = read(name);
    if v.get("kind").is_some() {
        make_standard_surface(&serde_json::from_value::<StandardSurface>(v).unwrap()).unwrap()
    } else {
        SurfaceMesh::from_data(&serde_json::from_value::<MeshData>(v).unwrap()).unwrap()
    }
}

fn load_field(mesh: &SurfaceMesh, name: &str) -> HamiltonianField {
    serde_json::from_value::<FieldFile>(read(name)).unwrap().resolve(mesh).unwrap()
}

fn manifest() -> Vec<(String, String)> {
    serde_json::from_value::<Vec<Value>>(read("manifest.json"))
        .unwrap()
        .iter()
        .map(|e| (e["mesh"].as_str().unwrap().to_string(), e["field"].as_str().unwrap().to_string()))
        .collect()
}

fn cli_analyze(mesh: &str, field: &str) -> (Vec<u8>, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_hofer-asym"))
        .arg("analyze")
        .arg("--mesh")
        .arg(fixture(mesh))
        .arg("--field")
        .arg(fixture(field))
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (out.stdout, elapsed)
}

fn cylinder16() -> SurfaceMesh {
    common::cylinder(16, 16)
}

fn random_suite() -> (SurfaceMesh, Vec<HamiltonianField>) {
    let mesh = cylinder16();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let fields = (0..RANDOM_FIELDS).map(|_| common::random_field(&mesh, &mut rng)).collect();
    (mesh, fields)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// 1. `mu = c_plus - c_minus` on every fixture, within the runtime budget.
fn formula() -> Outcome {
    let mut slowest = Duration::ZERO;
    let mut bad = Vec::new();
    for (mesh, field) in manifest() {
        let m = load_mesh(&mesh);
        let f = load_field(&m, &field);
        let r = analyze(&m, &f).unwrap();
        let (stdout, elapsed) = cli_analyze(&mesh, &field);
        let v: Value = serde_json::from_slice(&stdout).unwrap();
        let json_ok = v["mu"].as_f64() == Some(v["c_plus"].as_f64().unwrap() - v["c_minus"].as_f64().unwrap());
        if r.mu != r.c_plus - r.c_minus || !json_ok {
            bad.push(format!("{mesh}/{field}: mu"));
        }
        if elapsed >= FIXTURE_RUNTIME {
            bad.push(format!("{mesh}/{field}: {elapsed:?}"));
        }
        slowest = slowest.max(elapsed);
    }
    check(bad.is_empty(), format!("{} fixtures, slowest run {:.3} s {:?}", manifest().len(), slowest.as_secs_f64(), bad))
}

/// 2. Contractible supports give bounded growth, non-contractible plateaus
/// give linear growth.
fn dichotomy() -> Outcome {
    let mesh = cylinder16();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let (mut bounded_ok, mut linear_ok) = (0, 0);
    for _ in 0..DICHOTOMY_FIELDS {
        // One to three bumps of either sign away from the ends; a bump's
        // support is a disc, and disjoint or overlapping discs of radius
        // below 1 never wrap around the cylinder.
        let terms = (0..rng.gen_range(1..=3))
            .map(|_| FieldPreset::DiscBump {
                height: rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                center: [rng.gen_range(0.0..2.0 * PI), rng.gen_range(-1.5..1.5)],
                radius: rng.gen_range(0.3..0.9),
                inner: None,
            })
            .collect();
        let f = sample_preset(&mesh, &FieldPreset::CustomSum { terms }).unwrap();
        let (contractible, _) = is_region_contractible(&mesh, &support_region(&mesh, &f)).unwrap();
        let r = analyze(&mesh, &f).unwrap();
        if contractible && r.verdict == Verdict::Bounded && r.c_plus == 0.0 && r.c_minus == 0.0 {
            bounded_ok += 1;
        }
    }
    for _ in 0..DICHOTOMY_FIELDS {
        let lo = rng.gen_range(-1.2..0.8);
        let height = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let plateau = FieldPreset::AnnularPlateau { height, lo, hi: lo + rng.gen_range(0.0..0.4), ramp: 0.6, center: None };
        let bump = FieldPreset::DiscBump {
            height: rng.gen_range(-1.0..1.0),
            center: [rng.gen_range(0.0..2.0 * PI), rng.gen_range(-1.0..1.0)],
            radius: 0.5,
            inner: None,
        };
        let f = sample_preset(&mesh, &FieldPreset::CustomSum { terms: vec![plateau, bump] }).unwrap();
        let r = analyze(&mesh, &f).unwrap();
        if r.verdict == Verdict::Linear && r.mu > 0.0 {
            linear_ok += 1;
        }
    }
    check(
        bounded_ok == DICHOTOMY_FIELDS && linear_ok == DICHOTOMY_FIELDS,
        format!("bounded {bounded_ok}/{DICHOTOMY_FIELDS}, linear {linear_ok}/{DICHOTOMY_FIELDS}"),
    )
}

/// 3. Sweep values equal the cycle-enumeration oracle on small fixtures.
fn oracle() -> Outcome {
    let start = Instant::now();
    let (mut compared, mut bad) = (0, Vec::new());
    for (mesh, field) in manifest() {
        let m = load_mesh(&mesh);
        if m.vertex_count() > MAX_ORACLE_VERTICES {
            continue;
        }
        let f = load_field(&m, &field);
        let plus = compute_c(&m, &f, Side::Plus);
        let minus = compute_c(&m, &f, Side::Minus);
        let o = brute_force_minimax(&m, &f, m.vertex_count()).unwrap();
        let r = analyze(&m, &f).unwrap();
        let same = match (plus, minus) {
            (Ok(p), Ok(q)) => p.value == o.c_plus && q.value == o.c_minus && !o.simply_connected,
            _ => o.simply_connected && r.c_plus == o.c_plus && r.c_minus == o.c_minus,
        };
        let signs = (r.c_plus > 0.0) == (o.c_plus > 0.0) && (r.c_minus < 0.0) == (o.c_minus < 0.0);
        if !(same && signs && r.simply_connected == o.simply_connected) {
            bad.push(format!("{mesh}/{field}"));
        }
        compared += 1;
    }
    let elapsed = start.elapsed();
    check(
        bad.is_empty() && elapsed < ORACLE_SUITE_RUNTIME && compared > 0,
        format!("{compared} fixtures, {:.2} s {:?}", elapsed.as_secs_f64(), bad),
    )
}

/// 4-6 share the randomized suite.
fn signs(mesh: &SurfaceMesh, fields: &[HamiltonianField]) -> Outcome {
    let bad = fields
        .iter()
        .filter(|f| {
            let r = analyze(mesh, f).unwrap();
            !(r.c_plus >= 0.0 && r.c_minus <= 0.0)
        })
        .count();
    check(bad == 0, format!("{} fields, {bad} violations", fields.len()))
}

fn critical(mesh: &SurfaceMesh, fields: &[HamiltonianField]) -> Outcome {
    let bad = fields
        .iter()
        .filter(|f| {
            let r = analyze(mesh, f).unwrap();
            let crit = discrete_critical_values(mesh, f);
            let ok = |c: f64| c == 0.0 || crit.contains(&c);
            !(ok(r.c_plus) && ok(r.c_minus))
        })
        .count();
    check(bad == 0, format!("{} fields, {bad} violations", fields.len()))
}

fn contractible(mesh: &SurfaceMesh, fields: &[HamiltonianField]) -> Outcome {
    let (mut both_zero, mut bad) = (0, 0);
    for f in fields {
        let r = analyze(mesh, f).unwrap();
        let (c, _) = is_region_contractible(mesh, &support_region(mesh, f)).unwrap();
        let zero = r.c_plus == 0.0 && r.c_minus == 0.0;
        both_zero += usize::from(zero);
        bad += usize::from(zero != c);
    }
    check(
        bad == 0 && both_zero > 0 && both_zero < fields.len(),
        format!("{} fields ({both_zero} contractible), {bad} violations", fields.len()),
    )
}

/// 7. The spike example sits strictly between 0 and the initial slope.
fn intermediate() -> Outcome {
    let m = load_mesh("cylinder_16x17.std.json");
    let f = load_field(&m, "spike.json");
    let r = analyze(&m, &f).unwrap();
    check(
        r.mu == 1.0 && r.initial_slope == 2.0 && 0.0 < r.mu && r.mu < r.initial_slope,
        format!("mu {}, initial slope {}", r.mu, r.initial_slope),
    )
}

/// 8. `K + H0 = H`, `osc K = mu + 4 eps` (generic), `supp H0` in `Z(eps)`,
/// `C = 16 * area`, `C` independent of `eps` at fixed `kappa`.
fn decomposition() -> Outcome {
    let mut bad = Vec::new();
    let mut generic = 0;
    for (mesh, field) in manifest() {
        let m = load_mesh(&mesh);
        let f = load_field(&m, &field);
        let r = analyze(&m, &f).unwrap();
        let eps = default_epsilon(&r, &f);
        let d = decompose(&m, &f, &r, eps, None).unwrap();
        let tag = format!("{mesh}/{field}");
        if (0..m.vertex_count()).any(|v| d.k.values[v] + d.h0.values[v] != f.values[v]) {
            bad.push(format!("{tag}: sum"));
        }
        if (0..m.vertex_count()).any(|v| d.h0.values[v] != 0.0 && !d.z_eps.vertices[v]) {
            bad.push(format!("{tag}: support"));
        }
        if d.generic {
            generic += 1;
            if d.oscillation_k() != r.mu + 4.0 * eps {
                bad.push(format!("{tag}: oscillation {} vs {}", d.oscillation_k(), r.mu + 4.0 * eps));
            }
        }
        let area: f64 = d
            .hull
            .discs
            .iter()
            .flat_map(|disc| disc.faces.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| m.face_area(i)))
            .sum();
        if (d.sikorav_c - 16.0 * area).abs() > AREA_REL_TOL * (16.0 * area).max(1.0) {
            bad.push(format!("{tag}: constant"));
        }
        let half = decompose(&m, &f, &r, eps / 2.0, Some(d.kappa.min(eps / 4.0))).unwrap();
        let full = decompose(&m, &f, &r, eps, Some(half.kappa)).unwrap();
        if half.sikorav_c != full.sikorav_c {
            bad.push(format!("{tag}: C depends on eps"));
        }
    }
    check(bad.is_empty() && generic > 0, format!("{} fixtures ({generic} generic) {:?}", manifest().len(), bad))
}

/// 9. Homogeneity and the sign flip.
fn scaling(mesh: &SurfaceMesh, fields: &[HamiltonianField]) -> Outcome {
    let mut bad = 0;
    for f in &fields[..SCALING_FIELDS] {
        let r = analyze(mesh, f).unwrap();
        for l in SCALES {
            let s = analyze(mesh, &f.scaled(l)).unwrap();
            bad += usize::from(s.c_plus != l * r.c_plus || s.c_minus != l * r.c_minus);
        }
        let n = analyze(mesh, &f.negated()).unwrap();
        bad += usize::from(n.c_plus != -r.c_minus || n.c_minus != -r.c_plus);
    }
    check(bad == 0, format!("{SCALING_FIELDS} fields x {:?} and negation, {bad} violations", SCALES))
}

/// 10. Commuting flows on the cylinder spike fixture.
fn flow() -> Outcome {
    let start = Instant::now();
    let preset: FieldPreset = serde_json::from_value(read("flow_spike.json")).unwrap();
    let h = ClosedForm::Preset { preset };
    let (k, h0) = decomposed_pair(&h, &build_cutoff(0.0, 1.0, 0.1).unwrap());
    // 10 x 10 lattice over the spike, whose levels cross the cutoff band.
    let points: Vec<[f64; 2]> = (0..100)
        .map(|i| [PI - 0.7 + 1.4 * ((i % 10) as f64 + 0.5) / 10.0, -0.7 + 1.4 * ((i / 10) as f64 + 0.5) / 10.0])
        .collect();
    let comm = verify_commutation(ChartKind::Cylinder, &k, &h0, &points, 1.0, 1.0, FLOW_STEP).unwrap();
    let drift = points
        .iter()
        .map(|&x| integrate(&ChartFlowSpec::new(ChartKind::Cylinder, h.clone(), FLOW_STEP, 1.0), x).unwrap().energy_drift)
        .fold(0.0, f64::max);
    let x0 = [3.6, 0.2];
    let ratio = convergence_ratio(ChartKind::Cylinder, &h, x0, 1.0, FLOW_STEP).unwrap_or(f64::NAN);
    let drift_at = |step| integrate(&ChartFlowSpec::new(ChartKind::Cylinder, h.clone(), step, 1.0), x0).unwrap().energy_drift;
    let energy_ratio = drift_at(FLOW_STEP) / drift_at(FLOW_STEP / 2.0);
    let elapsed = start.elapsed();
    check(
        comm.max_error() < COMMUTE_TOL
            && comm.max_error() > 0.0
            && drift < ENERGY_DRIFT_TOL
            && (RATIO_RANGE.0..=RATIO_RANGE.1).contains(&ratio)
            && elapsed < FLOW_RUNTIME,
        format!(
            "commute {:.2e}, max energy drift {drift:.2e}, step-halving ratio {ratio:.2} (energy {energy_ratio:.2}), {:.2} s",
            comm.max_error(),
            elapsed.as_secs_f64()
        ),
    )
}

/// 11. `c_plus` of sampled smooth plateaus converges to the height.
fn refinement() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    // The shipped plateau and one with a narrow top that coarse grids miss.
    for (lo, hi, ramp, strict) in [(-0.5, 0.5, 0.9, false), (-0.02, 0.02, 1.0, true)] {
        let preset = FieldPreset::AnnularPlateau { height: 1.0, lo, hi, ramp, center: None };
        // Quintic smoothstep: slope at most 15/8 per unit ramp.
        let lipschitz = 1.875 / ramp;
        let mut errors = Vec::new();
        for n in [8usize, 16, 32, 64] {
            let m = make_standard_surface(&StandardSurface::Cylinder { n_theta: n, n_y: n, half_height: 3.0 }).unwrap();
            let f = sample_preset(&m, &preset).unwrap();
            let err = (analyze(&m, &f).unwrap().c_plus - 1.0).abs();
            let spacing = (2.0 * PI / n as f64).max(6.0 / (n - 1) as f64);
            ok &= err <= 2.0 * spacing * lipschitz;
            errors.push(err);
        }
        ok &= if strict {
            errors.windows(2).all(|w| w[1] < w[0])
        } else {
            errors.windows(2).all(|w| w[1] <= w[0])
        };
        lines.push(format!("top [{lo}, {hi}]: {:?}", errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()));
    }
    check(ok, lines.join("; "))
}

/// 12. Byte-identical reports from repeated runs.
fn determinism() -> Outcome {
    let bad: Vec<String> = manifest()
        .into_iter()
        .filter(|(mesh, field)| cli_analyze(mesh, field).0 != cli_analyze(mesh, field).0)
        .map(|(m, f)| format!("{m}/{f}"))
        .collect();
    check(bad.is_empty(), format!("{} fixtures {:?}", manifest().len(), bad))
}

fn main() {
    let (mesh, fields) = random_suite();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("formula mu = c_plus - c_minus", Box::new(formula)),
        ("growth dichotomy", Box::new(dichotomy)),
        ("oracle equivalence", Box::new(oracle)),
        ("c_plus >= 0 >= c_minus", Box::new(|| signs(&mesh, &fields))),
        ("values are critical", Box::new(|| critical(&mesh, &fields))),
        ("zero values iff contractible support", Box::new(|| contractible(&mesh, &fields))),
        ("strictly intermediate example", Box::new(intermediate)),
        ("decomposition identities", Box::new(decomposition)),
        ("scaling and symmetry", Box::new(|| scaling(&mesh, &fields))),
        ("commuting flows", Box::new(flow)),
        ("convergence under refinement", Box::new(refinement)),
        ("CLI determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail} [{:.2} s]", i + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
