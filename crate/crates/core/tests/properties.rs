use std::f64::consts::TAU;
use std::sync::OnceLock;

use proptest::prelude::*;

use reeb_fuller::gwf::displacement;
use reeb_fuller::index::{conley_zehnder, SymplecticPath};
use reeb_fuller::linalg::rotation2;
use reeb_fuller::models::{IsometryModel, TorusMetric};
use reeb_fuller::orbit::{
    find_geodesics, multiplicity, orbit_space_distance, ClassLabel, ClosedOrbit, FinderControls, OrbitString,
};

/// `t ↦ γ(k t)` for the wavy loop `γ(s) = (s, y0 + a sin 2πs)`.
fn wavy_cover(k: i64, y0: f64, a: f64, n: usize) -> ClosedOrbit {
    let samples = (0..n)
        .map(|i| {
            let s = k as f64 * i as f64 / n as f64;
            vec![s, y0 + a * (TAU * s).sin()]
        })
        .collect();
    ClosedOrbit {
        system: "wavy".into(),
        periodic: vec![true, true],
        samples,
        period: 2.0 * k as f64,
        class_label: ClassLabel::Winding { winding: vec![k, 0] },
        closure_residual: 0.0,
        flow_residual: 0.0,
    }
}

fn string(o: ClosedOrbit) -> OrbitString {
    multiplicity(&o, 1e-6)
}

fn perturbed_strings() -> &'static Vec<OrbitString> {
    static S: OnceLock<Vec<OrbitString>> = OnceLock::new();
    S.get_or_init(|| {
        let c = FinderControls { seeds: 16, ..FinderControls::default() };
        find_geodesics(&TorusMetric::conformal_cos_y(0.1), [1, 0], &c).unwrap().strings
    })
}

fn rotation_path(theta: f64) -> SymplecticPath {
    SymplecticPath::from_fn(|t| rotation2(TAU * theta * t), 4096)
}

/// Signed count of integers strictly between `a` and `b`, doubled: the
/// index of a 2×2 rotation segment from angle `a` to `b` with nondegenerate ends.
fn segment_index(a: f64, b: f64) -> i64 {
    let (lo, hi) = (a.min(b), a.max(b));
    let count = (hi.ceil() - lo.floor() - 1.0) as i64;
    if b > a {
        2 * count
    } else {
        -2 * count
    }
}

fn off_integer(x: f64) -> bool {
    (x - x.round()).abs() > 0.02
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cover_rule_recovers_multiplicity(k in 1i64..6, y0 in 0.0f64..1.0, a in 0.01f64..0.2) {
        let s = string(wavy_cover(k, y0, a, 96 * k as usize));
        prop_assert_eq!(s.multiplicity as i64, k);
        prop_assert!((s.simple_period - 2.0).abs() < 1e-12);
    }

    #[test]
    fn orbit_distance_ignores_time_shift(s in 0.0f64..1.0, y0 in 0.0f64..1.0, a in 0.0f64..0.3) {
        let o = wavy_cover(1, y0, a, 64);
        let d = orbit_space_distance(&string(o.clone()), &string(o.shifted(s))).unwrap();
        prop_assert!(d < 1e-10, "distance {}", d);
    }

    #[test]
    fn parallel_loops_sit_at_their_offset(y0 in 0.0f64..1.0, dy in 0.05f64..0.45) {
        let a = wavy_cover(1, y0, 0.1, 64);
        let b = wavy_cover(1, y0 + dy, 0.1, 64);
        let d = orbit_space_distance(&string(a), &string(b)).unwrap();
        prop_assert!((d - dy).abs() < 1e-9, "distance {} vs {}", d, dy);
    }

    #[test]
    fn fixing_shift_follows_the_translation(a in 0.0f64..1.0, s in 0.0f64..1.0) {
        let strings = perturbed_strings();
        let psi = IsometryModel::translation([a, 0.0]);
        for st in strings {
            let o = &st.representative;
            let (res, theta0) = displacement(&psi, o);
            prop_assert!(res < 1e-8, "residual {}", res);
            let gap = (theta0 - a).rem_euclid(1.0);
            prop_assert!(gap.min(1.0 - gap) < 1e-8, "theta0 {} for a {}", theta0, a);
            let (res_s, theta_s) = displacement(&psi, &o.shifted(s));
            prop_assert!(res_s < 1e-8);
            let gap = (theta_s - theta0).rem_euclid(1.0);
            prop_assert!(gap.min(1.0 - gap) < 1e-8, "reparametrized theta0 {} vs {}", theta_s, theta0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn catenation_adds_indices(t1 in -2.9f64..2.9, t2 in -2.9f64..2.9) {
        prop_assume!(off_integer(t1) && off_integer(t1 + t2));
        let p1 = rotation_path(t1);
        let p2 = rotation_path(t2);
        let cat = p1.catenate(&p2, 4096);
        let whole = conley_zehnder(&cat).unwrap().index;
        let first = conley_zehnder(&p1).unwrap().index;
        prop_assert_eq!(whole, first + segment_index(t1, t1 + t2));
        prop_assert_eq!(whole, conley_zehnder(&rotation_path(t1 + t2)).unwrap().index);
    }
}

#[test]
fn segment_index_counts_crossings() {
    assert_eq!(segment_index(0.3, 2.5), 4);
    assert_eq!(segment_index(0.3, 0.9), 0);
    assert_eq!(segment_index(1.7, -0.2), -4);
}

#[test]
fn positive_rotation_index_formula() {
    for theta in [0.05f64, 0.3, 0.95, 1.05, 1.7, 2.5, 3.3] {
        let want = 2 * theta.floor() as i64 + 1;
        assert_eq!(conley_zehnder(&rotation_path(theta)).unwrap().index, want, "theta {theta}");
    }
}
