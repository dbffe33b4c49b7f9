//! Invariants of the minimax values under randomized fields.

mod common;

use common::cylinder;
use hofer_asym_core::field::{discrete_critical_values, support_region, HamiltonianField};
use hofer_asym_core::minimax::{analyze, compute_c, level_complex, LevelSide, Side};
use hofer_asym_core::surface::{
    is_loop_contractible, is_region_contractible, region_contractible, region_contractible_by_cuts,
    MeshData, SubComplex, SurfaceMesh,
};
use proptest::prelude::*;

const N_THETA: usize = 8;
const N_Y: usize = 8;

fn mesh() -> SurfaceMesh {
    cylinder(N_THETA, N_Y)
}

/// Values on the 8x8 cylinder, integer-valued half the time so that ties
/// and plateaus are common, zeroed on the end ring.
fn values() -> impl Strategy<Value = Vec<f64>> {
    let n = N_THETA * N_Y;
    let ints = prop::collection::vec((-3i32..=3).prop_map(f64::from), n);
    let reals = prop::collection::vec(
        prop_oneof![Just(0.0), -2.0f64..2.0, Just(1.0), Just(-1.0)],
        n,
    );
    prop_oneof![ints, reals].prop_map(|mut v| {
        let ring = mesh().end_ring();
        for (x, r) in v.iter_mut().zip(ring) {
            if r {
                *x = 0.0;
            }
        }
        v
    })
}

fn field(m: &SurfaceMesh, v: Vec<f64>) -> HamiltonianField {
    HamiltonianField::from_values(m, v).unwrap()
}

fn c_pair(m: &SurfaceMesh, f: &HamiltonianField) -> (f64, f64) {
    let r = analyze(m, f).unwrap();
    (r.c_plus, r.c_minus)
}

/// The same surface with shuffled vertex order, fresh ids and every face
/// reversed. Returns the mesh and the new index of each old vertex.
fn relabelled(m: &SurfaceMesh, shift: usize) -> (SurfaceMesh, Vec<usize>) {
    let data = m.to_data();
    let n = data.vertices.len();
    let new_index: Vec<usize> = (0..n).map(|v| (v * 5 + shift) % n).collect();
    let mut order = vec![0; n];
    for v in 0..n {
        order[new_index[v]] = v;
    }
    let id = |old: u64| 7000 + new_index[m.vertex_index(old).unwrap()] as u64;
    let coords = data.coords.as_ref().map(|c| order.iter().map(|&v| c[v]).collect());
    let moved = MeshData {
        name: data.name.clone(),
        chart: data.chart,
        vertices: order.iter().map(|&v| 7000 + new_index[v] as u64).collect(),
        faces: data.faces.iter().map(|f| f.iter().rev().map(|&x| id(x)).collect()).collect(),
        face_area: data.face_area.clone(),
        ends: data.ends.iter().map(|e| e.iter().map(|&x| id(x)).collect()).collect(),
        coords,
    };
    (SurfaceMesh::from_data(&moved).unwrap(), new_index)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn signs(v in values()) {
        let m = mesh();
        let (cp, cm) = c_pair(&m, &field(&m, v));
        prop_assert!(cp >= 0.0 && cm <= 0.0);
    }

    #[test]
    fn values_are_critical(v in values()) {
        let m = mesh();
        let f = field(&m, v);
        let (cp, cm) = c_pair(&m, &f);
        let crit = discrete_critical_values(&m, &f);
        prop_assert!(cp == 0.0 || crit.contains(&cp));
        prop_assert!(cm == 0.0 || crit.contains(&cm));
    }

    #[test]
    fn vanishing_iff_contractible_support(v in values()) {
        let m = mesh();
        let f = field(&m, v);
        let (cp, cm) = c_pair(&m, &f);
        let (contractible, _) = is_region_contractible(&m, &support_region(&m, &f)).unwrap();
        prop_assert_eq!(cp == 0.0 && cm == 0.0, contractible);
    }

    #[test]
    fn scaling(v in values(), k in 0usize..3) {
        let lambda = [0.5, 2.0, 10.0][k];
        let m = mesh();
        let f = field(&m, v);
        let (cp, cm) = c_pair(&m, &f);
        let (sp, sm) = c_pair(&m, &f.scaled(lambda));
        prop_assert_eq!(sp, lambda * cp);
        prop_assert_eq!(sm, lambda * cm + 0.0);
    }

    #[test]
    fn negation_swaps_sides(v in values()) {
        let m = mesh();
        let f = field(&m, v);
        let (cp, cm) = c_pair(&m, &f);
        let (np, nm) = c_pair(&m, &f.negated());
        prop_assert_eq!(np, -cm + 0.0);
        prop_assert_eq!(nm, -cp + 0.0);
    }

    #[test]
    fn monotone_in_the_field(v in values(), w in values()) {
        let m = mesh();
        let lo: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a.min(*b)).collect();
        let hi: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a.max(*b)).collect();
        let (lp, lm) = c_pair(&m, &field(&m, lo));
        let (hp, hm) = c_pair(&m, &field(&m, hi));
        prop_assert!(lp <= hp && lm <= hm);
    }

    #[test]
    fn witnesses_realise_the_values(v in values()) {
        let m = mesh();
        let f = field(&m, v);
        for side in [Side::Plus, Side::Minus] {
            let r = compute_c(&m, &f, side).unwrap();
            let lp = r.witness.expect("the cylinder always has a witness");
            prop_assert!(!is_loop_contractible(&m, &lp).unwrap().0);
            let vals = lp.vertices().iter().map(|&x| f.values[x]);
            let ext = match side {
                Side::Plus => vals.fold(f64::INFINITY, f64::min),
                Side::Minus => vals.fold(f64::NEG_INFINITY, f64::max),
            };
            prop_assert_eq!(ext, r.value);
        }
    }

    #[test]
    fn sweep_levels_switch_once(v in values()) {
        // Superlevel complexes only shrink, so contractibility can only
        // switch from false to true along the sweep.
        let m = mesh();
        let f = field(&m, v);
        let r = compute_c(&m, &f, Side::Plus).unwrap();
        let flags: Vec<bool> = r.swept_levels.iter().map(|&(_, c)| c).collect();
        prop_assert!(flags.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(r.swept_levels.iter().all(|&(e, c)| !c || e > r.value));
    }

    #[test]
    fn orientation_and_labels_do_not_matter(v in values(), shift in 0usize..64) {
        let m = mesh();
        let (moved, new_index) = relabelled(&m, shift);
        let mut w = vec![0.0; v.len()];
        for (old, &x) in v.iter().enumerate() {
            w[new_index[old]] = x;
        }
        prop_assert_eq!(c_pair(&m, &field(&m, v)), c_pair(&moved, &field(&moved, w)));
    }

    #[test]
    fn fast_and_cut_routes_agree(v in values(), t in -2.0f64..2.0) {
        let m = mesh();
        let f = field(&m, v);
        for side in [LevelSide::Above, LevelSide::Below] {
            let region = level_complex(&m, &f, t, side);
            let fast = region_contractible(&m, &region).unwrap();
            let slow = region_contractible_by_cuts(&m, &region).unwrap().is_none();
            prop_assert_eq!(fast, slow);
        }
    }

    #[test]
    fn components_partition_the_region(v in values(), t in -2.0f64..2.0) {
        let m = mesh();
        let region = level_complex(&m, &field(&m, v), t, LevelSide::Above);
        let parts = region.components(&m);
        let chi: i64 = parts.iter().map(SubComplex::euler_characteristic).sum();
        prop_assert_eq!(chi, region.euler_characteristic());
        let area: f64 = parts.iter().map(|p| p.area(&m)).sum();
        prop_assert!((area - region.area(&m)).abs() <= 1e-12 * region.area(&m).max(1.0));
        prop_assert_eq!(
            parts.iter().map(SubComplex::vertex_count).sum::<usize>(),
            region.vertex_count()
        );
    }

    #[test]
    fn support_is_scale_invariant(v in values(), k in 0usize..3) {
        let lambda = [0.5, 2.0, 10.0][k];
        let m = mesh();
        let f = field(&m, v);
        prop_assert_eq!(support_region(&m, &f), support_region(&m, &f.scaled(lambda)));
        let report = analyze(&m, &f).unwrap();
        prop_assert!(report.checks.values().all(|&ok| ok), "{:?}", report.checks);
    }
}
