//! Property tests for the module invariants: exact lattice identities,
//! solver agreement with the independent box-scan oracle, reduction
//! unimodularity, file-format round trips, and scaling laws.

use latlab::enumerate::brute_force_box_scan;
use latlab::gaussian::{rho_lattice, smoothing_parameter, TruncationPolicy};
use latlab::json::{LatticeFile, TargetFile};
use latlab::lattice::{
    is_dual_member, lattice_part, reduce_mod_parallelepiped, same_lattice, Basis, Target,
};
use latlab::lll::{is_lll_reduced, lll_reduce};
use latlab::moments::f_w;
use latlab::rational::{self, rat, rat_int, Rat};
use latlab::solvers::{cvp_exact, svp_exact, EnumerationCaps};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn caps() -> EnumerationCaps {
    EnumerationCaps::default()
}

/// Strategy: full-rank n x n integer basis with entries in [-4, 4].
fn arb_basis(n: usize) -> impl Strategy<Value = Basis> {
    proptest::collection::vec(proptest::collection::vec(-4i64..=4, n), n).prop_filter_map(
        "nonsingular",
        |cols| {
            Basis::new(
                cols.iter()
                    .map(|c| c.iter().map(|&x| rat_int(x)).collect())
                    .collect(),
            )
            .ok()
        },
    )
}

fn arb_rational() -> impl Strategy<Value = Rat> {
    (-200i64..=200, 1i64..=64).prop_map(|(p, q)| rat(p, q))
}

fn arb_target(n: usize) -> impl Strategy<Value = Target> {
    proptest::collection::vec(arb_rational(), n).prop_map(Target::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dual_of_dual_generates_same_lattice(b in arb_basis(3)) {
        let dd = b.dual().dual();
        prop_assert!(same_lattice(&b, &dd));
    }

    #[test]
    fn dual_columns_are_dual_members(b in arb_basis(3)) {
        let d = b.dual();
        for j in 0..3 {
            prop_assert!(is_dual_member(&b, d.column(j)));
        }
    }

    #[test]
    fn mod_parallelepiped_properties(b in arb_basis(3), t in arb_target(3)) {
        let r = reduce_mod_parallelepiped(&b, &t);
        // Coefficients of the reduced point lie in [0, 1).
        for c in b.coords_of(&r.coords) {
            prop_assert!(!c.is_negative() && c < Rat::one());
        }
        // t - t' is a lattice vector, exactly.
        let diff = rational::sub(&t.coords, &r.coords);
        prop_assert!(b.lattice_coords(&diff).is_some());
        // Idempotence and consistency with the split into lattice + cell.
        let r2 = reduce_mod_parallelepiped(&b, &r);
        prop_assert_eq!(&r2.coords, &r.coords);
        let part = lattice_part(&b, &t);
        let rebuilt = rational::add(&part.embedding, &r.coords);
        prop_assert_eq!(rebuilt, t.coords);
    }

    #[test]
    fn svp_matches_independent_box_scan(b in arb_basis(3)) {
        let sv = svp_exact(&b, None, caps()).unwrap();
        let zero = vec![Rat::zero(); 3];
        let r2 = &sv.lambda1_sq + rat_int(1);
        let (_, oracle) = brute_force_box_scan(&b, &zero, &r2, true).unwrap();
        prop_assert_eq!(sv.lambda1_sq, oracle);
    }

    #[test]
    fn svp_equals_dual_of_dual_svp(b in arb_basis(3)) {
        let sv = svp_exact(&b, None, caps()).unwrap();
        let sv_dd = svp_exact(&b.dual().dual(), None, caps()).unwrap();
        prop_assert_eq!(sv.lambda1_sq, sv_dd.lambda1_sq);
    }

    #[test]
    fn cvp_matches_independent_box_scan(b in arb_basis(2), t in arb_target(2)) {
        let cv = cvp_exact(&b, &t, caps()).unwrap();
        let r2 = &cv.dist_sq + rat_int(1);
        let (_, oracle) = brute_force_box_scan(&b, &t.coords, &r2, false).unwrap();
        prop_assert_eq!(cv.dist_sq, oracle);
    }

    #[test]
    fn lll_preserves_lattice_and_conditions(b in arb_basis(3)) {
        let r = lll_reduce(&b);
        prop_assert!(same_lattice(&b, &r));
        prop_assert!(is_lll_reduced(&r));
        // Determinant preserved up to sign.
        let (db, dr) = (b.det().clone(), r.det().clone());
        prop_assert!(db == dr || db == -dr);
    }

    #[test]
    fn lattice_json_round_trip_bit_exact(b in arb_basis(3), t in arb_target(3)) {
        let lf = LatticeFile::from_basis(&b);
        let text = serde_json::to_string(&lf).unwrap();
        let back: LatticeFile = serde_json::from_str(&text).unwrap();
        let parsed = back.to_basis().unwrap();
        prop_assert_eq!(parsed.columns(), b.columns());
        let tf = TargetFile::from_target(&t);
        let text = serde_json::to_string(&tf).unwrap();
        let back: TargetFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_target().unwrap().coords, t.coords);
    }

    #[test]
    fn f_w_bounded_and_periodic(t in arb_target(2), shift in proptest::collection::vec(-50i64..=50, 2)) {
        // Integer witness vectors are dual members of Z^2.
        let w: Vec<Vec<Rat>> = vec![
            vec![rat_int(1), rat_int(-2)],
            vec![rat_int(3), rat_int(5)],
            vec![rat_int(0), rat_int(1)],
        ];
        let v = f_w(&w, &t);
        prop_assert!((-1.0..=1.0).contains(&v));
        let shifted = Target::new(vec![
            &t.coords[0] + rat_int(shift[0]),
            &t.coords[1] + rat_int(shift[1]),
        ]);
        prop_assert_eq!(f_w(&w, &shifted), v);
    }
}

proptest! {
    // Gaussian-sum properties cost more per case.
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rho_scaling_law(b in arb_basis(2), num in 1i64..=4, den in 1i64..=4) {
        let c = rat(num, den);
        let scaled = b.scale(&c).unwrap();
        let policy = TruncationPolicy::default();
        let s = 2.0;
        let lhs = rho_lattice(&scaled, &scaled.to_float(), s, None, policy).unwrap().value;
        let rhs = rho_lattice(&b, &b.to_float(), s / rational::rat_to_f64(&c), None, policy)
            .unwrap()
            .value;
        prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.max(rhs));
    }

    #[test]
    fn smoothing_upper_bound_from_dual_minimum(b in arb_basis(2)) {
        // eta_{2^-n}(L) <= sqrt(n) / lambda_1(L*).
        let n = 2usize;
        let eta = smoothing_parameter(&b, 0.25, TruncationPolicy::default()).unwrap();
        let dual_sv = svp_exact(&b.dual(), None, caps()).unwrap();
        let bound = (n as f64).sqrt() / dual_sv.lambda1();
        prop_assert!(eta <= bound * (1.0 + 1e-9), "eta {} bound {}", eta, bound);
    }
}
