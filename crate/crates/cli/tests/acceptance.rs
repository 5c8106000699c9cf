//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::Command;

use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;

use reeb_fuller::continuation::{
    cylinder_orbit, detect_sky_catastrophe, fuller_invariance_check, ContinuationControls, FixedModel, HomotopyFamily,
    SkyVerdict,
};
use reeb_fuller::gwf::{find_fixed_strings, gwf_invariant, verify_counterexample, GwfQuery, COUNTEREXAMPLE_CLASSES};
use reeb_fuller::index::{
    conley_zehnder, fuller_index, geodesic_index_report, index_report, sign_identity_check, IndexControls, IndexRecord,
    Rational, SymplecticPath,
};
use reeb_fuller::linalg::rotation2;
use reeb_fuller::models::{ContactModel, IsometryModel, Model, ModelChecks, ReebFlow, TorusMetric};
use reeb_fuller::orbit::{find_geodesics, find_reeb_orbits, FinderControls, OrbitString, ReebTarget, Topology};

// pinned tolerances
const TOL_ORBIT: f64 = 1e-8;
const TOL_MATCH: f64 = 1e-6;
const REEB_TOL: f64 = 1e-10;
const PERIOD_TOL: f64 = 1e-8;
const RATIO_TOL: f64 = 1e-8;
const DISPLACEMENT_TOL: f64 = 1e-6;

type Outcome = Result<String, String>;

fn criterion(n: u32, name: &str, body: impl FnOnce() -> Outcome) {
    let started = std::time::Instant::now();
    let outcome = body();
    let secs = started.elapsed().as_secs_f64();
    match &outcome {
        Ok(detail) => println!("criterion {n}: PASS {name} ({detail}; {secs:.1}s)"),
        Err(why) => println!("criterion {n}: FAIL {name} ({why}; {secs:.1}s)"),
    }
    if let Err(why) = outcome {
        panic!("criterion {n} failed: {why}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

trait Ctx<T> {
    fn ctx(self, what: &str) -> Result<T, String>;
}

impl<T, E: std::fmt::Display> Ctx<T> for Result<T, E> {
    fn ctx(self, what: &str) -> Result<T, String> {
        self.map_err(|e| format!("{what}: {e}"))
    }
}

fn finder(seeds: usize) -> FinderControls {
    FinderControls { seeds, tol_orbit: TOL_ORBIT, tol_match: TOL_MATCH, ..FinderControls::default() }
}

fn golden() -> f64 {
    0.5 * (1.0 + 5f64.sqrt())
}

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn load(name: &str) -> Result<Model, String> {
    let text = std::fs::read_to_string(models_dir().join(name)).ctx(name)?;
    Model::from_json(&text, ModelChecks::default()).ctx(name)
}

#[test]
fn c01_reeb_residuals_on_bundled_models() {
    criterion(1, "Reeb residuals", || {
        let mut contact = Vec::new();
        for name in [
            "flat_cotangent.json",
            "perturbed_cotangent.json",
            "ellipsoid_golden.json",
            "t3_standard.json",
            "perturbed_mapping_torus.json",
        ] {
            match load(name)? {
                Model::Contact(m) => contact.push((name, m)),
                Model::MappingTorus(mt) => contact.push((name, mt.fiber.clone())),
                Model::Metric(_) => return Err(format!("{name} is not a contact model")),
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let per_model = 1000usize.div_ceil(contact.len());
        let (mut worst_l, mut worst_k, mut count) = (0f64, 0f64, 0usize);
        for (name, m) in &contact {
            for _ in 0..per_model {
                let p = m.random_point(&mut rng);
                let (l, k) = m.reeb_residuals(&p).ctx(name)?;
                ensure(l < REEB_TOL && k < REEB_TOL, || format!("{name} at {p:?}: |λ(R)−1| = {l:e}, ‖dλ(R,·)‖ = {k:e}"))?;
                worst_l = worst_l.max(l);
                worst_k = worst_k.max(k);
                count += 1;
            }
        }
        Ok(format!("{count} points over {} models, max |λ(R)−1| {worst_l:.1e}, max ‖dλ(R,·)‖ {worst_k:.1e}", contact.len()))
    });
}

#[test]
fn c02_flat_torus_circle_family() {
    criterion(2, "flat torus circle family", || {
        let g = TorusMetric::flat();
        let r = find_geodesics(&g, [1, 0], &finder(32)).ctx("search")?;
        ensure(r.strings.len() >= 20, || format!("{} representatives", r.strings.len()))?;
        for s in &r.strings {
            let t = s.representative.period;
            ensure((t - 1.0).abs() < PERIOD_TOL, || format!("period {t}"))?;
        }
        ensure(r.components.len() == 1 && r.components[0].topology == Topology::Circle, || {
            format!("components {:?}", r.components.iter().map(|c| c.topology).collect::<Vec<_>>())
        })?;
        let ix = geodesic_index_report(&g, &r.strings, &r.components, &IndexControls::default(), true).ctx("index")?;
        ensure(ix.records.iter().all(|rec| rec.kernel_dimension == 1), || "kernel dimension differs from 1".into())?;
        let f = ix.fuller.ok_or("no Fuller value")?;
        ensure(f == Rational::from_integer(0), || format!("Morse–Bott Fuller {f}"))?;
        Ok(format!("{} representatives, kernel dim 1, Morse–Bott Fuller {f}", r.strings.len()))
    });
}

#[test]
fn c03_perturbed_torus_two_strings() {
    criterion(3, "perturbed torus", || {
        let g = TorusMetric::conformal_cos_y(0.1);
        let ic = IndexControls::default();
        let r = find_geodesics(&g, [1, 0], &finder(32)).ctx("search")?;
        let ix = geodesic_index_report(&g, &r.strings, &r.components, &ic, false).ctx("index")?;
        let nondeg = ix.records.iter().filter(|rec| rec.nondegenerate).count();
        ensure(r.strings.len() == 2 && nondeg == 2, || format!("{} strings, {nondeg} nondegenerate", r.strings.len()))?;
        let sum: i64 = ix.records.iter().map(|rec| rec.fixed_point_index as i64).sum();
        ensure(sum == 0, || format!("fixed-point indices sum to {sum}"))?;
        let f = ix.fuller.ok_or("no Fuller value")?;
        ensure(f == Rational::from_integer(0), || format!("Fuller {f}"))?;

        // flat end: Morse–Bott value of the circle family
        let flat = find_geodesics(&TorusMetric::flat(), [1, 0], &finder(32)).ctx("flat search")?;
        let mb = geodesic_index_report(&TorusMetric::flat(), &flat.strings, &flat.components, &ic, true)
            .ctx("flat index")?
            .fuller
            .ok_or("no flat value")?;
        // continuation needs nondegenerate start strings, so the family starts
        // just off the flat metric
        let start = TorusMetric::conformal_cos_y(1e-3);
        let fam = HomotopyFamily::MetricInterpolation { start: start.clone(), end: g, smooth: false };
        let n0 = find_geodesics(&start, [1, 0], &finder(32)).ctx("start search")?.strings;
        let inv = fuller_invariance_check(&fam, &n0, &ContinuationControls::default(), &ic).ctx("invariance")?;
        ensure(inv.equal && inv.i1 == f && inv.i0 == mb, || format!("i0 {} i1 {} flat {mb}", inv.i0, inv.i1))?;
        Ok(format!("2 nondegenerate strings, indices sum 0, Fuller {f}, invariance {} = {} = flat {mb}", inv.i0, inv.i1))
    });
}

/// Ellipsoid strings in `[0.5, 4.5]`: multiples of both simple orbits.
fn ellipsoid_records() -> Result<Vec<IndexRecord>, String> {
    let e = ContactModel::ellipsoid(1.0, golden());
    let r = find_reeb_orbits(&e, &ReebTarget::Window { min: 0.5, max: 4.5 }, &finder(32)).ctx("ellipsoid search")?;
    Ok(index_report(&ReebFlow::new(e), &r.strings, &[], &IndexControls::default(), false).ctx("ellipsoid index")?.records)
}

#[test]
fn c04_sign_identity() {
    criterion(4, "sign identity", || {
        let g = TorusMetric::conformal_cos_y(0.1);
        let ic = IndexControls::default();
        let mut checked = [0usize; 3];
        let mut failures = Vec::new();
        for k in 1..=4 {
            let r = find_geodesics(&g, [k, 0], &finder(16)).ctx("torus search")?;
            for rec in geodesic_index_report(&g, &r.strings, &r.components, &ic, false).ctx("torus index")?.records {
                let cz = rec.cz_index.ok_or("torus string without CZ")?;
                checked[0] += 1;
                if !(rec.nondegenerate && sign_identity_check(&rec.monodromy, cz, 1)) {
                    failures.push(format!("torus class ({k},0) period {}", rec.string.representative.period));
                }
            }
        }
        for rec in ellipsoid_records()? {
            let cz = rec.cz_index.ok_or("ellipsoid string without CZ")?;
            checked[1] += 1;
            if !(rec.nondegenerate && sign_identity_check(&rec.monodromy, cz, 1)) {
                failures.push(format!("ellipsoid period {}", rec.string.representative.period));
            }
        }
        for n in 1..=5 {
            let q = GwfQuery { metric: g.clone(), phi: IsometryModel::translation([0.25, 0.0]), class: [1, 0], charge: n };
            for f in find_fixed_strings(&q, &finder(16), &ic).ctx("fixed strings")?.fixed {
                let cz = f.cz_index.ok_or("mapping-torus string without CZ")?;
                checked[2] += 1;
                let parity = if (cz - 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                if !(f.nondegenerate && f.det_i_minus_p.signum() == parity) {
                    failures.push(format!("mapping torus charge {n}"));
                }
            }
        }
        let total: usize = checked.iter().sum();
        ensure(checked.iter().all(|&c| c > 0) && total >= 20, || format!("only {checked:?} orbits"))?;
        ensure(failures.is_empty(), || format!("identity fails on {failures:?}"))?;
        Ok(format!("{total} orbits (torus {}, ellipsoid {}, mapping torus {})", checked[0], checked[1], checked[2]))
    });
}

/// Brute-force crossing count on a 10⁴-point grid for a 2×2 path given in
/// closed form: half the crossing signature at 0 when the path starts at the
/// identity, plus the full signature at every interior touch of the identity.
fn brute_force_index(path: impl Fn(f64) -> DMatrix<f64>) -> i64 {
    let n = 10_000;
    let j0t = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let signature = |t: f64| -> i64 {
        let h = 1e-6;
        let dp = (path(t + h) - path(t - h)) / (2.0 * h);
        let q = &j0t * dp;
        let s = (&q + q.transpose()) * 0.5;
        s.symmetric_eigen().eigenvalues.iter().map(|e| e.signum() as i64).sum()
    };
    let gap = |t: f64| (path(t) - DMatrix::identity(2, 2)).norm();
    let mut twice = if gap(0.0) < 1e-12 { signature(0.0) } else { 0 };
    for i in 1..n {
        let (a, b, c) = (gap((i - 1) as f64 / n as f64), gap(i as f64 / n as f64), gap((i + 1) as f64 / n as f64));
        if b < a && b <= c && b < 1e-2 {
            twice += 2 * signature(i as f64 / n as f64);
        }
    }
    twice / 2
}

fn rotation_path(theta: f64) -> SymplecticPath {
    SymplecticPath::from_fn(|t| rotation2(TAU * theta * t), 4096)
}

#[test]
fn c05_conley_zehnder_oracle() {
    criterion(5, "CZ oracle", || {
        let mut got = Vec::new();
        for theta in [0.3, 1.7, 2.5] {
            let cz = conley_zehnder(&rotation_path(theta)).ctx("rotation")?.index;
            let oracle = brute_force_index(|t| rotation2(TAU * theta * t));
            ensure(cz == oracle, || format!("θ = {theta}: {cz} vs brute force {oracle}"))?;
            got.push(cz);
        }
        ensure(got == [1, 3, 5], || format!("rotation indices {got:?}"))?;
        let hyp = SymplecticPath::from_fn(|t| DMatrix::from_row_slice(2, 2, &[t.exp(), 0.0, 0.0, (-t).exp()]), 4096);
        let h = conley_zehnder(&hyp).ctx("hyperbolic")?.index;
        ensure(h == 0, || format!("hyperbolic index {h}"))?;

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pairs = 0;
        while pairs < 10 {
            let (t1, t2): (f64, f64) = (rng.random_range(-2.9..2.9), rng.random_range(-2.9..2.9));
            let off = |x: f64| (x - x.round()).abs() > 0.02;
            if !(off(t1) && off(t1 + t2)) {
                continue;
            }
            pairs += 1;
            let p1 = rotation_path(t1);
            let cat = p1.catenate(&rotation_path(t2), 4096);
            let whole = conley_zehnder(&cat).ctx("catenation")?.index;
            let first = conley_zehnder(&p1).ctx("first")?.index;
            // second leg `Φ₂(s)·Φ₁(1)` runs from angle t1 to t1 + t2
            let second = brute_force_index(|s| rotation2(TAU * (t1 + t2 * s)));
            let oracle = brute_force_index(|t| {
                if t <= 0.5 {
                    rotation2(TAU * t1 * 2.0 * t)
                } else {
                    rotation2(TAU * (t1 + t2 * (2.0 * t - 1.0)))
                }
            });
            ensure(whole == oracle, || format!("pair ({t1}, {t2}): {whole} vs brute force {oracle}"))?;
            ensure(whole == first + second, || format!("pair ({t1}, {t2}): {whole} ≠ {first} + {second}"))?;
        }
        Ok("rotations [1, 3, 5], hyperbolic 0, 10 catenation pairs additive".into())
    });
}

#[test]
fn c06_ellipsoid() {
    criterion(6, "ellipsoid", || {
        let phi = golden();
        let e = ContactModel::ellipsoid(1.0, phi);
        let r = find_reeb_orbits(&e, &ReebTarget::Window { min: 0.5, max: 2.0 }, &finder(32)).ctx("search")?;
        let simple: Vec<OrbitString> = r.strings.iter().filter(|s| s.multiplicity == 1).cloned().collect();
        ensure(simple.len() == 2, || format!("{} simple strings", simple.len()))?;
        let (a, b) = (simple[0].representative.period, simple[1].representative.period);
        let ratio = a.max(b) / a.min(b);
        ensure((ratio - phi).abs() < RATIO_TOL, || format!("period ratio {ratio}"))?;
        let short: Vec<OrbitString> =
            simple.iter().filter(|s| s.representative.period == a.min(b)).cloned().collect();
        let ic = IndexControls::default();
        let recs = index_report(&ReebFlow::new(e.clone()), &short, &[], &ic, false).ctx("index")?.records;
        let f = fuller_index(&recs).ctx("fuller")?;
        ensure(f == Rational::from_integer(1), || format!("short-orbit Fuller {f}"))?;
        let fam = HomotopyFamily::ContactInterpolation { start: e, end: ContactModel::ellipsoid(1.0, 2f64.sqrt()), smooth: false };
        let inv = fuller_invariance_check(&fam, &short, &ContinuationControls::default(), &ic).ctx("invariance")?;
        ensure(inv.i0 == f && inv.i1 == f, || format!("i0 {} i1 {}", inv.i0, inv.i1))?;
        Ok(format!("2 simple strings, ratio error {:.1e}, Fuller {f} preserved to b = √2", (ratio - phi).abs()))
    });
}

#[test]
fn c07_counterexample() {
    criterion(7, "counterexample", || {
        let shift = [2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0];
        let ic = IndexControls::default();
        let r = verify_counterexample(shift, &COUNTEREXAMPLE_CLASSES, &[1, 2, 3, 4, 5], &finder(32), &ic).ctx("scan")?;
        ensure(r.total_fixed == 0 && r.empty, || format!("{} fixed strings", r.total_fixed))?;
        let thresholds = [0.26, 0.41, 0.2];
        let mut firsts = Vec::new();
        for (class, min) in COUNTEREXAMPLE_CLASSES.iter().zip(thresholds) {
            let b = r.bound(*class, 1).ok_or_else(|| format!("no bound for {class:?}"))?;
            ensure(b.closed_form >= min, || format!("class {class:?}: bound {} < {min}", b.closed_form))?;
            firsts.push(b.closed_form);
        }
        for b in &r.bounds {
            let num = b.numerical.ok_or_else(|| format!("no candidates for {:?} charge {}", b.class, b.charge))?;
            ensure(b.closed_form > 0.0 && (num - b.closed_form).abs() < DISPLACEMENT_TOL, || {
                format!("{:?} charge {}: numerical {num} vs closed form {}", b.class, b.charge, b.closed_form)
            })?;
        }
        let control = verify_counterexample([0.25, 0.0], &[[1, 0]], &[1], &finder(32), &ic).ctx("control")?;
        ensure(control.total_fixed > 0, || "control shift fixes nothing".into())?;
        Ok(format!(
            "0 fixed strings over 3 classes × 5 charges, charge-1 bounds {:.4} {:.4} {:.4}, control fixes {}",
            firsts[0], firsts[1], firsts[2], control.total_fixed
        ))
    });
}

#[test]
fn c08_gwf_equals_fuller() {
    criterion(8, "GWF = Fuller", || {
        let ic = IndexControls::default();
        let mut seen = Vec::new();
        for (name, g) in [("flat", TorusMetric::flat()), ("perturbed", TorusMetric::conformal_cos_y(0.1))] {
            let r = find_geodesics(&g, [1, 0], &finder(32)).ctx("search")?;
            let morse_bott = r.components.iter().any(|c| c.topology == Topology::Circle);
            let fuller = geodesic_index_report(&g, &r.strings, &r.components, &ic, morse_bott)
                .ctx("index")?
                .fuller
                .ok_or("no Fuller value")?;
            for n in 1..=3 {
                let q = GwfQuery { metric: g.clone(), phi: IsometryModel::identity(), class: [1, 0], charge: n };
                let v = gwf_invariant(&q, &finder(32), &ic).ctx("gwf")?.value;
                ensure(v == fuller, || format!("{name} n = {n}: GWF {v} vs Fuller {fuller}"))?;
            }
            seen.push(format!("{name} {fuller}"));
        }
        Ok(format!("n = 1, 2, 3 agree: {}", seen.join(", ")))
    });
}

#[test]
fn c09_sky_catastrophe() {
    criterion(9, "sky catastrophe", || {
        let cc = ContinuationControls { samples: 64, ..ContinuationControls::default() };
        let o = cylinder_orbit(0.0, cc.samples).ctx("cylinder orbit")?;
        let right = detect_sky_catastrophe(&HomotopyFamily::CylinderEscape, &o, 0.0, &cc).ctx("cylinder")?;
        ensure(right.verdict == SkyVerdict::Right && !right.indeterminate, || format!("cylinder verdict {:?}", right.verdict))?;
        ensure(right.evidence.len() == 2, || "no cap-doubling rerun".into())?;
        ensure(right.evidence[1].window == 2.0 * right.evidence[0].window, || "window not doubled".into())?;
        ensure(right.evidence.iter().all(|e| e.status == "escaped-window" && e.monotone_growth), || {
            format!("evidence {:?}", right.evidence.iter().map(|e| e.status.clone()).collect::<Vec<_>>())
        })?;
        // closed form r = t/(1 − t) at the last node
        let track = right.track.as_ref().ok_or("no track")?;
        for node in &track.nodes {
            let (r, closed) = (node.orbit.samples[0][1], node.t / (1.0 - node.t));
            ensure((r - closed).abs() < 1e-8 * (1.0 + r.abs()), || format!("radius {r} vs {closed} at t = {}", node.t))?;
        }

        let constant = HomotopyFamily::constant(FixedModel::Cylinder { c: 0.0 });
        let none = detect_sky_catastrophe(&constant, &o, 0.0, &cc).ctx("constant")?;
        ensure(none.verdict == SkyVerdict::None, || format!("constant verdict {:?}", none.verdict))?;

        let start = TorusMetric::conformal_cos_y(1e-3);
        let fam = HomotopyFamily::MetricInterpolation { start: start.clone(), end: TorusMetric::conformal_cos_y(0.1), smooth: false };
        let strings = find_geodesics(&start, [1, 0], &finder(16)).ctx("torus search")?.strings;
        for s in &strings {
            let v = detect_sky_catastrophe(&fam, &s.representative, 0.0, &cc).ctx("torus")?;
            ensure(v.verdict == SkyVerdict::None, || format!("torus verdict {:?}", v.verdict))?;
        }
        Ok(format!("cylinder right at windows {} and {}, constant none, torus family none on {} tracks",
            right.evidence[0].window, right.evidence[1].window, strings.len()))
    });
}

#[test]
fn c10_selftest_is_deterministic() {
    criterion(10, "selftest determinism", || {
        let run = || -> Result<Vec<u8>, String> {
            let out = Command::new(env!("CARGO_BIN_EXE_reeb-fuller")).arg("selftest").output().ctx("spawn")?;
            ensure(out.status.code() == Some(0), || {
                format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
            })?;
            Ok(out.stdout)
        };
        let a = run()?;
        let b = run()?;
        ensure(a == b, || "reports differ".into())?;
        let v: serde_json::Value = serde_json::from_slice(&a).ctx("report")?;
        ensure(v["result"]["all_passed"] == serde_json::Value::Bool(true), || "selftest checks failed".into())?;
        Ok(format!("two runs byte-identical ({} bytes)", a.len()))
    });
}
