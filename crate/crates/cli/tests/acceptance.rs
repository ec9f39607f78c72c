//! Acceptance criteria. Each criterion prints one PASS/FAIL line; run with
//! `cargo test -p entangle-cli --test acceptance -- --nocapture`.

mod common;

use std::thread;

use common::{fixture, report_schema, run, stdout_json};
use entangle_cli::report::{analyze, AnalyzeOptions};
use entangle_cli::{InputDocument, Payload, EXIT_INPUT, EXIT_INTERNAL, EXIT_OK};
use entangle_core::entanglement::{
    ppt_verdict, separable_decomposition, verify_decomposition, x_entanglement_condition,
    DEFAULT_BOUNDARY_TOL,
};
use entangle_core::linalg::{hermitian_eigen, max_entry_distance, trace_distance};
use entangle_core::simulate::{
    expected_counts, random_density_matrix, random_hermitian, random_symmetric_x_state,
    random_x_state, sample_counts, Regime, RngSeed, SimulationPlan,
};
use entangle_core::states::x_state_to_density;
use entangle_core::tomography::{
    linear_reconstruct, linear_reconstruct_weighted, project_to_physical, standard_settings_16,
};
use entangle_core::{ComplexMatrix, DensityMatrix, Verdict, XStateParams};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bell_fixture() -> Outcome {
    let doc = InputDocument {
        id: "bell".into(),
        payload: Payload::Matrix(DensityMatrix::phi_plus().into_matrix()),
        metadata: Default::default(),
    };
    let r = analyze(&doc, &AnalyzeOptions::default()).map_err(|e| e.to_string())?;
    let want = [-0.5, 0.5, 0.5, 0.5];
    let eig_err = r
        .ppt_eigenvalues
        .iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let neg_err = (r.negativity - 0.5).abs();
    let conc_err = (r.concurrence.unwrap_or(f64::NAN) - 1.0).abs();
    check(
        r.verdict == Verdict::Entangled && eig_err <= 1e-10 && neg_err <= 1e-10 && conc_err <= 1e-10,
        format!(
            "verdict {:?}, eigenvalue err {eig_err:.1e}, negativity err {neg_err:.1e}, concurrence err {conc_err:.1e}",
            r.verdict
        ),
    )
}

fn symmetric_iff() -> Outcome {
    let (mut agree, mut band, mut bad) = (0, 0, Vec::new());
    for k in 0..10_000u64 {
        let p = random_symmetric_x_state(RngSeed(0x2000_0000 + k), Regime::Any);
        let margin = p.gamma - p.beta;
        if margin.abs() <= 1e-9 {
            band += 1;
            continue;
        }
        let rho = x_state_to_density(&p).map_err(|e| e.to_string())?;
        let v = ppt_verdict(&rho, DEFAULT_BOUNDARY_TOL).map_err(|e| e.to_string())?;
        if (v.verdict == Verdict::Entangled) == (margin > 0.0) {
            agree += 1;
        } else {
            bad.push(k);
        }
    }
    check(
        bad.is_empty(),
        format!(
            "{agree}/{} agree outside the band ({band} in band), disagreements {bad:?}",
            agree + bad.len()
        ),
    )
}

/// Symmetric states with `γ ≤ β ≤ α`.
fn ordered_separable_states(n: usize) -> Vec<XStateParams> {
    (0u64..)
        .map(|k| random_symmetric_x_state(RngSeed(0x3000_0000 + k), Regime::Separable))
        .filter(|p| p.gamma <= p.beta && p.beta <= p.alpha)
        .take(n)
        .collect()
}

fn decomposition_identity() -> Outcome {
    let mut worst_rebuild = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut failures = 0;
    for p in ordered_separable_states(1000) {
        let rho = x_state_to_density(&p).map_err(|e| e.to_string())?;
        let d = separable_decomposition(&p).map_err(|e| e.to_string())?;
        let rebuild =
            max_entry_distance(&d.reconstruct(), rho.matrix()).map_err(|e| e.to_string())?;
        let sum: f64 = d.weights().iter().sum();
        let check = verify_decomposition(&d, &rho, 1e-12).map_err(|e| e.to_string())?;
        worst_rebuild = worst_rebuild.max(rebuild);
        worst_sum = worst_sum.max((sum - 1.0).abs());
        if !check.ok
            || d.weights().iter().any(|w| *w < 0.0)
            || rebuild > 1e-12
            || (sum - 1.0).abs() > 1e-12
        {
            failures += 1;
        }
    }
    check(
        failures == 0,
        format!("1000 states, {failures} failures, max rebuild err {worst_rebuild:.1e}, max |Σw − 1| {worst_sum:.1e}"),
    )
}

fn consistency_triangle() -> Outcome {
    let mut states = ordered_separable_states(1000);
    states.extend(
        (0..1000u64).map(|k| random_symmetric_x_state(RngSeed(0x4000_0000 + k), Regime::Entangled)),
    );
    let (mut violations, mut entangled, mut decomposed) = (0, 0, 0);
    for p in &states {
        let rho = x_state_to_density(p).map_err(|e| e.to_string())?;
        let ppt_entangled = ppt_verdict(&rho, DEFAULT_BOUNDARY_TOL)
            .map_err(|e| e.to_string())?
            .verdict
            == Verdict::Entangled;
        let split = match separable_decomposition(p) {
            Ok(d) => {
                verify_decomposition(&d, &rho, 1e-12)
                    .map_err(|e| e.to_string())?
                    .ok
            }
            Err(_) => false,
        };
        let doc = InputDocument {
            id: "t".into(),
            payload: Payload::Matrix(rho.into_matrix()),
            metadata: Default::default(),
        };
        let report = analyze(&doc, &AnalyzeOptions::default()).map_err(|e| e.to_string())?;
        entangled += ppt_entangled as usize;
        decomposed += split as usize;
        if (ppt_entangled && split)
            || (report.verdict == Verdict::Entangled && report.decomposition.is_some())
        {
            violations += 1;
        }
    }
    check(
        violations == 0,
        format!("{} states ({entangled} PPT-entangled, {decomposed} decomposed), {violations} violations", states.len()),
    )
}

fn general_beta_condition() -> Outcome {
    let (mut agree, mut band, mut symmetric, mut bad) = (0, 0, 0, Vec::new());
    for k in 0..10_000u64 {
        let p = random_x_state(RngSeed(0x5000_0000 + k), Regime::Any);
        if p.beta == p.beta_prime {
            symmetric += 1;
        }
        let margin = p.gamma - (p.beta * p.beta_prime).sqrt();
        if margin.abs() <= 1e-9 {
            band += 1;
            continue;
        }
        let rho = x_state_to_density(&p).map_err(|e| e.to_string())?;
        let v = ppt_verdict(&rho, DEFAULT_BOUNDARY_TOL).map_err(|e| e.to_string())?;
        if (v.verdict == Verdict::Entangled) == (margin > 0.0)
            && x_entanglement_condition(&p).0 == (margin > 0.0)
        {
            agree += 1;
        } else {
            bad.push(k);
        }
    }
    check(
        bad.is_empty() && symmetric == 0,
        format!(
            "{agree}/{} agree outside the band ({band} in band, {symmetric} with β = β′), disagreements {bad:?}",
            agree + bad.len()
        ),
    )
}

fn noiseless_round_trip() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..500u64 {
        let rho = random_density_matrix(RngSeed(0x6000_0000 + k));
        let plan = SimulationPlan::new(rho.clone(), standard_settings_16(), 1_000_000, RngSeed(k))
            .map_err(|e| e.to_string())?;
        let raw =
            linear_reconstruct_weighted(&expected_counts(&plan)).map_err(|e| e.to_string())?;
        worst = worst.max(trace_distance(&raw, rho.matrix()).map_err(|e| e.to_string())?);
    }
    check(
        worst <= 1e-10,
        format!("500 states, max trace distance {worst:.2e}"),
    )
}

fn convergence_slope() -> Outcome {
    let bell = DensityMatrix::phi_plus();
    let ns = [1_000u64, 10_000, 100_000, 1_000_000];
    let mut points = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let mut total = 0.0;
        for trial in 0..50u64 {
            let seed = RngSeed(0x7000_0000).for_task(((i as u64) << 16) | trial);
            let plan = SimulationPlan::new(bell.clone(), standard_settings_16(), n, seed)
                .map_err(|e| e.to_string())?;
            let raw = linear_reconstruct(&sample_counts(&plan)).map_err(|e| e.to_string())?;
            let rho = project_to_physical(&raw).map_err(|e| e.to_string())?;
            total += trace_distance(rho.matrix(), bell.matrix()).map_err(|e| e.to_string())?;
        }
        points.push(((n as f64).ln(), (total / 50.0).ln()));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / 4.0;
    let my = points.iter().map(|p| p.1).sum::<f64>() / 4.0;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let means: Vec<String> = points
        .iter()
        .map(|p| format!("{:.2e}", p.1.exp()))
        .collect();
    check(
        (slope + 0.5).abs() <= 0.1,
        format!(
            "slope {slope:.3}, mean trace distances {}",
            means.join(", ")
        ),
    )
}

fn end_to_end_fidelity() -> Outcome {
    let (mut correct, mut wrong) = (0, Vec::new());
    let mut used = 0;
    for k in 0u64.. {
        if used == 100 {
            break;
        }
        let p = random_x_state(RngSeed(0x8000_0000 + k), Regime::Any);
        let margin = p.gamma - (p.beta * p.beta_prime).sqrt();
        if margin.abs() <= 0.02 {
            continue;
        }
        used += 1;
        let rho = x_state_to_density(&p).map_err(|e| e.to_string())?;
        let plan = SimulationPlan::new(rho, standard_settings_16(), 1_000_000, RngSeed(k))
            .map_err(|e| e.to_string())?;
        let doc = InputDocument {
            id: format!("x{k}"),
            payload: Payload::Counts(sample_counts(&plan)),
            metadata: Default::default(),
        };
        let report = analyze(&doc, &AnalyzeOptions::default()).map_err(|e| e.to_string())?;
        let truth = if margin > 0.0 {
            Verdict::Entangled
        } else {
            Verdict::Separable
        };
        if report.verdict == truth {
            correct += 1;
        } else {
            wrong.push(k);
        }
    }
    check(
        correct == 100,
        format!("{correct}/100 correct verdicts, wrong seeds {wrong:?}"),
    )
}

/// Characteristic polynomial `x⁴ + c₃x³ + c₂x² + c₁x + c₀` by the
/// Faddeev–LeVerrier recursion, returned lowest degree first.
fn characteristic_polynomial(a: &ComplexMatrix) -> [f64; 5] {
    let n = 4;
    let identity = ComplexMatrix::identity(n).unwrap();
    let mut c = [0.0; 5];
    c[4] = 1.0;
    let mut m = identity.clone();
    for k in 1..=n {
        let am = a * &m;
        c[n - k] = -am.trace().re / k as f64;
        m = &am + &identity.scale(c[n - k]);
    }
    c
}

fn eval(poly: &[f64], x: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(poly: &[f64]) -> Vec<f64> {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| i as f64 * c)
        .collect()
}

fn bisect(poly: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = eval(poly, lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let fm = eval(poly, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// Real roots of a polynomial with only real roots. The critical points
/// (roots of the derivative, found recursively) split the line into
/// monotone pieces with at most one root each.
fn real_roots(poly: &[f64]) -> Vec<f64> {
    let degree = poly.len() - 1;
    let lead = poly[degree];
    if degree == 1 {
        return vec![-poly[0] / lead];
    }
    let bound = 1.0
        + poly[..degree]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max);
    let mut knots = vec![-bound];
    knots.extend(real_roots(&derivative(poly)));
    knots.push(bound);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (fa, fb) = (eval(poly, w[0]), eval(poly, w[1]));
        if fa == 0.0 {
            roots.push(w[0]);
        } else if (fa < 0.0) != (fb < 0.0) && fb != 0.0 {
            roots.push(bisect(poly, w[0], w[1]));
        }
    }
    if eval(poly, bound) == 0.0 {
        roots.push(bound);
    }
    // A touching (even-multiplicity) root shows no sign change; take the
    // critical points closest to zero.
    let mut critical: Vec<f64> = knots[1..knots.len() - 1].to_vec();
    critical.sort_by(|a, b| eval(poly, *a).abs().total_cmp(&eval(poly, *b).abs()));
    for x in critical {
        if roots.len() >= degree {
            break;
        }
        roots.push(x);
        roots.push(x);
    }
    roots.truncate(degree);
    roots.sort_by(f64::total_cmp);
    roots
}

fn eigensolver_oracle() -> Outcome {
    let (mut worst_rebuild, mut worst_roots, mut failures) = (0.0f64, 0.0f64, 0);
    for k in 0..1000u64 {
        let h = random_hermitian(RngSeed(0x9000_0000 + k));
        let eig = hermitian_eigen(&h).map_err(|e| e.to_string())?;
        let rebuild = max_entry_distance(&eig.reconstruct(), &h).map_err(|e| e.to_string())?;
        let roots = real_roots(&characteristic_polynomial(&h));
        let root_err = if roots.len() == 4 {
            roots
                .iter()
                .zip(&eig.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        worst_rebuild = worst_rebuild.max(rebuild);
        worst_roots = worst_roots.max(root_err);
        if rebuild > 1e-9 || root_err > 1e-8 {
            failures += 1;
        }
    }
    check(
        failures == 0,
        format!("1000 matrices, {failures} failures, max rebuild err {worst_rebuild:.1e}, max root err {worst_roots:.1e}"),
    )
}

fn cli_contract() -> Outcome {
    let p = |name: &str| fixture(name).display().to_string();
    let mut problems = Vec::new();
    let mut runs = 0;
    let mut expect = |args: &[&str], code: i32, schema: bool| {
        runs += 1;
        let out = run(args);
        if out.status.code() != Some(code) {
            problems.push(format!(
                "{args:?}: exit {:?}, expected {code}",
                out.status.code()
            ));
        } else if schema {
            if let Err(e) = report_schema(&stdout_json(&out)) {
                problems.push(format!("{args:?}: {e}"));
            }
        }
    };
    for name in [
        "bell_phi_plus.json",
        "maximally_mixed.json",
        "x_separable.json",
        "x_entangled.json",
        "counts_mixed.csv",
    ] {
        expect(&["analyze", "--input", &p(name)], EXIT_OK, true);
        expect(&["analyze", "--input", &p(name), "--pretty"], EXIT_OK, true);
    }
    for name in [
        "counts_malformed.csv",
        "counts_unknown_label.csv",
        "counts_duplicate.csv",
        "counts_missing_rr.csv",
        "three_by_three.json",
        "nan_entry.json",
        "not_psd.json",
    ] {
        expect(&["analyze", "--input", &p(name)], EXIT_INPUT, false);
    }
    expect(
        &[
            "analyze",
            "--input",
            &p("bell_phi_plus.json"),
            "--inject-contradiction",
        ],
        EXIT_INTERNAL,
        false,
    );
    check(
        problems.is_empty(),
        format!("{runs} invocations, problems {problems:?}"),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("Bell fixture", bell_fixture),
        ("symmetric iff condition", symmetric_iff),
        ("eight-term decomposition identity", decomposition_identity),
        ("consistency triangle", consistency_triangle),
        ("general-beta condition", general_beta_condition),
        ("noiseless tomography round trip", noiseless_round_trip),
        ("tomography convergence", convergence_slope),
        ("end-to-end verdict fidelity", end_to_end_fidelity),
        ("eigensolver oracle", eigensolver_oracle),
        ("CLI contract", cli_contract),
    ];
    let outcomes: Vec<Outcome> = thread::scope(|s| {
        let handles: Vec<_> = criteria.iter().map(|(_, f)| s.spawn(f)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("panicked".into())))
            .collect()
    });
    let mut failed = Vec::new();
    for (i, ((name, _), outcome)) in criteria.iter().zip(&outcomes).enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn quartic_oracle_on_known_spectra() {
    let m = ComplexMatrix::from_diag(&[-1.5, 0.25, 0.25, 2.0]).unwrap();
    let roots = real_roots(&characteristic_polynomial(&m));
    for (r, want) in roots.iter().zip([-1.5, 0.25, 0.25, 2.0]) {
        assert!((r - want).abs() < 1e-7, "{roots:?}");
    }
}
