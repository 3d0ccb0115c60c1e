//! Acceptance run: one line per criterion, tolerances and sample counts fixed.
//!
//! Criterion 4b is known to be unattainable (the two-qubit value for
//! concurrence 0.3 is 0.0232, below the required 0.05). It is evaluated as
//! written and printed as FAIL; only other failures make this target fail.

use std::time::{Duration, Instant};

use csent::dist::DistanceKind;
use csent::ent::{bures_entanglement, pure_bures_entanglement, EntOptions};
use csent::qmat::{c, StateVector};
use csent::states::{bell_state, bell_vector, bures_entanglement_from_concurrence, concurrence_2q, random_mixed_state, werner};
use csent::verify::{run_suite, Suite, SuiteReport, VerifyConfig};

const SEED: u64 = 7;
const KNOWN_UNATTAINABLE: [&str; 1] = ["4b"];

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn suite(s: Suite) -> (SuiteReport, Duration) {
    timed(|| run_suite(s, &VerifyConfig::with_seed(SEED)).expect("suite runs"))
}

fn summary(r: &SuiteReport, names: &[&str]) -> String {
    names
        .iter()
        .map(|n| {
            let c = r.check(n).expect("named check exists");
            format!("{n}: {}/{} ok, worst {:.2e}", c.trials - c.failures, c.trials, c.worst_residual)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn all_pass(r: &SuiteReport, names: &[&str]) -> bool {
    names.iter().all(|n| r.check(n).expect("named check exists").pass())
}

/// `max_{a,b} |⟨ab|ψ⟩|` over a grid of qubit states `a`; the best `b` is `⟨a|ψ⟩` normalized.
fn product_overlap(psi: &StateVector, steps: usize) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..=steps {
        let t = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
        for j in 0..2 * steps {
            let phi = std::f64::consts::PI * j as f64 / steps as f64;
            let a = [c(t.cos(), 0.0), num_complex::Complex64::from_polar(t.sin(), phi)];
            let norm_sq: f64 = (0..2).map(|k| (a[0].conj() * psi[k] + a[1].conj() * psi[2 + k]).norm_sqr()).sum();
            best = best.max(norm_sq.sqrt());
        }
    }
    best
}

fn criterion_1() -> Outcome {
    let (r, elapsed) = suite(Suite::Theorem2);
    let names = ["three-way-agreement", "schmidt-target", "bell-anchor"];
    let oracle = 2.0 - 2.0 * product_overlap(&bell_vector(0), 400);
    let exact = pure_bures_entanglement(&bell_state(0)).unwrap().value;
    let anchor_ok = (oracle - exact).abs() < 1e-9 && (r.value("bell_cse").unwrap() - oracle).abs() <= 5e-3;
    Outcome {
        id: "1",
        title: "pure-state equivalence",
        pass: all_pass(&r, &names) && anchor_ok,
        detail: format!("{}; bell oracle {oracle:.6} vs cse {:.6}", summary(&r, &names), r.value("bell_cse").unwrap()),
        elapsed,
        limit: minutes(10),
    }
}

fn criterion_2() -> Outcome {
    let (r, elapsed) = suite(Suite::Theorem3);
    let names = ["lower-bound", "upper-bound", "gap", "concurrence-anchor"];
    // closed form cross-checked by a high-restart separable search
    let (cross, cross_elapsed) = timed(|| {
        let mut rng = csent::qmat::seeded_rng(SEED);
        let mut states = vec![werner(0.7)];
        states.push(random_mixed_state(2, 2, 3, &mut rng).unwrap());
        states
            .iter()
            .map(|s| {
                let v = bures_entanglement(s, &EntOptions::with_seed(SEED).restarts(64)).unwrap().value;
                (v - bures_entanglement_from_concurrence(concurrence_2q(s).unwrap())).abs()
            })
            .fold(0.0, f64::max)
    });
    Outcome {
        id: "2",
        title: "sandwich",
        pass: all_pass(&r, &names) && cross <= 1e-2,
        detail: format!(
            "{}; max gap {:.2e}; high-restart closed-form check {cross:.2e}",
            summary(&r, &names),
            r.value("max_sandwich_gap").unwrap()
        ),
        elapsed: elapsed + cross_elapsed,
        limit: minutes(60),
    }
}

fn criterion_3() -> Outcome {
    let (r, elapsed) = suite(Suite::Theorem1);
    let names = ["locc-bures-entanglement", "locc-cse-hs-pure-inputs"];
    let support = ["trace-preservation", "flag-correlation", "pure-ancilla-invariance", "partial-trace", "local-channels"];
    Outcome {
        id: "3",
        title: "LOCC monotonicity",
        pass: all_pass(&r, &names) && all_pass(&r, &support),
        detail: format!("{}; {}", summary(&r, &names), summary(&r, &support)),
        elapsed,
        limit: minutes(90),
    }
}

fn criterion_4(r: &SuiteReport, elapsed: Duration) -> [Outcome; 2] {
    let sep = ["separable-zero"];
    let ent = ["entangled-detected"];
    [
        Outcome {
            id: "4a",
            title: "faithfulness (separable)",
            pass: all_pass(r, &sep),
            detail: summary(r, &sep),
            elapsed,
            limit: minutes(30),
        },
        Outcome {
            id: "4b",
            title: "faithfulness (concurrence >= 0.3 gives >= 0.05)",
            pass: all_pass(r, &ent),
            detail: format!(
                "{}; min value {:.4}, min concurrence {:.4}, closed form there {:.4}, {} states below 0.05 by closed form",
                summary(r, &ent),
                r.value("min_value").unwrap(),
                r.value("min_concurrence").unwrap(),
                r.value("closed_form_at_min_concurrence").unwrap(),
                r.value("states_with_closed_form_below_floor").unwrap()
            ),
            elapsed,
            limit: minutes(30),
        },
    ]
}

fn criterion_5() -> Outcome {
    let (r, elapsed) = suite(Suite::Cse);
    let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    Outcome {
        id: "5",
        title: "CSE constructors",
        pass: r.pass(),
        detail: summary(&r, &names),
        elapsed,
        limit: minutes(5),
    }
}

fn criterion_6() -> Outcome {
    let (r, elapsed) = suite(Suite::HsNoncontractive);
    let hs = DistanceKind::HilbertSchmidt;
    Outcome {
        id: "6",
        title: "HS non-contractivity witness",
        pass: r.pass(),
        detail: format!(
            "{hs} {:.15} -> {:.15}; bures-squared {:.3} -> {:.3}",
            r.value("hs_before").unwrap(),
            r.value("hs_after").unwrap(),
            r.value("bures_sq_before").unwrap(),
            r.value("bures_sq_after").unwrap()
        ),
        elapsed,
        limit: Duration::from_secs(1),
    }
}

fn criterion_7() -> Outcome {
    let (r, elapsed) = suite(Suite::Distances);
    let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    Outcome {
        id: "7",
        title: "distance axioms",
        pass: r.pass(),
        detail: summary(&r, &names),
        elapsed,
        limit: minutes(5),
    }
}

fn criterion_8(first: &[(Suite, String)]) -> Outcome {
    let (mismatch, elapsed) = timed(|| {
        let mut bad = Vec::new();
        for (s, text) in first {
            let again = run_suite(*s, &VerifyConfig::with_seed(SEED)).unwrap().to_string();
            if &again != text {
                bad.push(s.name());
            }
        }
        // reduced configurations of the optimizer-heavy suites, run twice each
        let reduced = VerifyConfig {
            seed: SEED,
            restarts: Some(2),
            fast: true,
        };
        for s in [Suite::Theorem1, Suite::Theorem3, Suite::Faithfulness] {
            let a = run_suite(s, &reduced).unwrap().to_string();
            let b = run_suite(s, &reduced).unwrap().to_string();
            if a != b {
                bad.push(s.name());
            }
        }
        bad
    });
    Outcome {
        id: "8",
        title: "determinism",
        pass: mismatch.is_empty(),
        detail: if mismatch.is_empty() {
            "all reruns bit-identical".into()
        } else {
            format!("reports differ: {}", mismatch.join(", "))
        },
        elapsed,
        limit: minutes(60),
    }
}

fn report(o: &Outcome) {
    let within = o.elapsed <= o.limit;
    println!(
        "criterion {:<3} {:<48} {} [{:.1}s, limit {}s{}] {}",
        o.id,
        o.title,
        if o.pass && within { "PASS" } else { "FAIL" },
        o.elapsed.as_secs_f64(),
        o.limit.as_secs(),
        if within { "" } else { ", over time" },
        o.detail
    );
}

fn main() {
    // `cargo test -- --list` and filters from the default harness are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut outcomes = Vec::new();
    let mut first_texts = Vec::new();

    let o = criterion_6();
    report(&o);
    outcomes.push(o);
    let o = criterion_7();
    report(&o);
    outcomes.push(o);
    let o = criterion_5();
    report(&o);
    outcomes.push(o);
    let o = criterion_1();
    report(&o);
    outcomes.push(o);
    for s in [Suite::HsNoncontractive, Suite::Distances, Suite::Cse, Suite::Theorem2] {
        first_texts.push((s, run_suite(s, &VerifyConfig::with_seed(SEED)).unwrap().to_string()));
    }
    let o = criterion_2();
    report(&o);
    outcomes.push(o);
    let (faith, elapsed) = suite(Suite::Faithfulness);
    for o in criterion_4(&faith, elapsed) {
        report(&o);
        outcomes.push(o);
    }
    let o = criterion_3();
    report(&o);
    outcomes.push(o);
    let o = criterion_8(&first_texts);
    report(&o);
    outcomes.push(o);

    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !(o.pass && o.elapsed <= o.limit))
        .map(|o| o.id)
        .collect();
    let unexpected: Vec<&str> = failed.iter().copied().filter(|id| !KNOWN_UNATTAINABLE.contains(id)).collect();
    println!(
        "acceptance: {} of {} criteria pass; failing: [{}]; unexpected failures: [{}]",
        outcomes.len() - failed.len(),
        outcomes.len(),
        failed.join(", "),
        unexpected.join(", ")
    );
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
