//! Seeded property suites. Each suite tallies named checks over many trials
//! and reports, per check, the number of trials, the failures and the worst
//! residual against a fixed tolerance.

use rand::Rng;
use rayon::prelude::*;

use crate::cse::{
    canonical_mixed_cse, canonical_pure_cse, extension_dim, flagged_mixture_cse, separable_cse, verify_cse,
    CseCandidate,
};
use crate::dist::{
    bures_sq_matrices, hs_noncontractivity_witness, pure_ancilla_invariance_check, trace_distance_matrices,
    DistanceKind,
};
use crate::ent::{theorem2_check, theorem3_sandwich, EntOptions, SANDWICH_GAP_TOL, SANDWICH_TOL};
use crate::error::{CsentError, Result};
use crate::locc::{
    flag_offdiagonal_mass, monotonicity_trial, random_locc, run, Instrument, LoccProtocol, Quantifier, Step,
    StepLog,
};
use crate::qmat::{apply_kraus, derive_seed, haar_pure, random_density, random_kraus, seeded_rng, Party, SeededRng};
use crate::states::{
    bell_state, bures_entanglement_from_concurrence, concurrence_2q, make_separable, partially_entangled,
    random_mixed_state, random_product_ensemble, random_pure_state, schmidt, werner, MultipartiteState,
};

pub const THEOREM2_TOL: f64 = 5e-3;
pub const MONOTONICITY_TOL: f64 = 1e-2;
pub const DISTANCE_TOL: f64 = 1e-9;
pub const CSE_SWAP_TOL: f64 = 1e-9;
pub const CSE_MARGINAL_TOL: f64 = 1e-10;
pub const WITNESS_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const SEPARABLE_ZERO_TOL: f64 = 1e-3;
pub const DETECTION_FLOOR: f64 = 0.05;
pub const DETECTION_MIN_CONCURRENCE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Theorem1,
    Theorem2,
    Theorem3,
    Distances,
    Cse,
    HsNoncontractive,
    Faithfulness,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Theorem1,
        Suite::Theorem2,
        Suite::Theorem3,
        Suite::Distances,
        Suite::Cse,
        Suite::HsNoncontractive,
        Suite::Faithfulness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Theorem3 => "theorem3",
            Suite::Distances => "distances",
            Suite::Cse => "cse",
            Suite::HsNoncontractive => "hs-noncontractive",
            Suite::Faithfulness => "faithfulness",
        }
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Suite {
    type Err = CsentError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CsentError::Domain(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Overrides every optimizer's restart count.
    pub restarts: Option<usize>,
    /// Halves sample counts and default restarts; tolerances are unchanged.
    pub fast: bool,
}

impl VerifyConfig {
    pub fn with_seed(seed: u64) -> Self {
        VerifyConfig {
            seed,
            ..VerifyConfig::default()
        }
    }

    pub fn count(&self, n: usize) -> usize {
        if self.fast {
            (n / 2).max(1)
        } else {
            n
        }
    }

    /// Optimizer options for trial `t` of check `stream`.
    pub fn ent_options(&self, stream: u64, t: usize) -> EntOptions {
        let mut o = EntOptions::with_seed(derive_seed(derive_seed(self.seed, stream), t as u64)).fast(self.fast);
        o.optim.restarts = self.restarts;
        o
    }

    pub fn rng(&self, stream: u64, t: usize) -> SeededRng {
        seeded_rng(derive_seed(derive_seed(self.seed, stream ^ 0xDA7A), t as u64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub worst_residual: f64,
    pub tol: f64,
}

impl PropertyCheck {
    pub fn new(name: &str, tol: f64) -> Self {
        PropertyCheck {
            name: name.to_string(),
            trials: 0,
            failures: 0,
            worst_residual: 0.0,
            tol,
        }
    }

    /// A residual passes when it is at most `tol`; NaN always fails.
    pub fn record(&mut self, residual: f64) {
        self.trials += 1;
        if residual.is_nan() {
            self.worst_residual = f64::NAN;
        } else if !self.worst_residual.is_nan() {
            self.worst_residual = self.worst_residual.max(residual);
        }
        if !(residual <= self.tol) {
            self.failures += 1;
        }
    }

    pub fn pass(&self) -> bool {
        self.trials > 0 && self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub config: VerifyConfig,
    pub checks: Vec<PropertyCheck>,
    /// Named scalar observations (anchors, extremes) reported alongside the checks.
    pub values: Vec<(String, f64)>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(PropertyCheck::pass)
    }

    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "suite {} seed {} fast {} restarts {}",
            self.suite,
            self.config.seed,
            self.config.fast,
            self.config.restarts.map_or("default".to_string(), |r| r.to_string())
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  {} trials {} failures {} worst {:.3e} tol {:.0e} {}",
                c.name,
                c.trials,
                c.failures,
                c.worst_residual,
                c.tol,
                if c.pass() { "pass" } else { "FAIL" }
            )?;
        }
        for (n, v) in &self.values {
            writeln!(f, "  {n} = {v:.17e}")?;
        }
        write!(f, "result {}", if self.pass() { "pass" } else { "FAIL" })
    }
}

pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<SuiteReport> {
    let (checks, values) = match suite {
        Suite::Theorem1 => theorem1(config)?,
        Suite::Theorem2 => theorem2(config)?,
        Suite::Theorem3 => theorem3(config)?,
        Suite::Distances => distances(config)?,
        Suite::Cse => cse(config)?,
        Suite::HsNoncontractive => hs_noncontractive(),
        Suite::Faithfulness => faithfulness(config)?,
    };
    Ok(SuiteReport {
        suite,
        config: *config,
        checks,
        values,
    })
}

type Checks = (Vec<PropertyCheck>, Vec<(String, f64)>);

/// Runs `f` over `0..n` in parallel, keeping trial order.
fn trials<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

fn pure_target(psi: &MultipartiteState) -> Result<f64> {
    let (da, db) = psi.party_dims();
    let m = psi.grouped_matrix();
    let eig = crate::qmat::hermitian_eig(&m)?;
    let v = eig.eigenvectors.column(m.nrows() - 1).into_owned();
    Ok(2.0 - 2.0 * schmidt(&v, da, db)?.largest())
}

/// Pure two-qubit states: the three routes agree with `2 − 2 s_max`.
pub fn theorem2(config: &VerifyConfig) -> Result<Checks> {
    let n_random = config.count(50);
    let mut states: Vec<MultipartiteState> = (0..n_random)
        .map(|t| random_pure_state(2, 2, &mut config.rng(1, t)))
        .collect();
    for k in 1..=4 {
        states.push(partially_entangled(std::f64::consts::PI * k as f64 / 16.0));
    }
    states.push(bell_state(0));
    let reports = trials(states.len(), |t| {
        let rep = theorem2_check(&states[t], DistanceKind::BuresSquared, &config.ent_options(1, t), THEOREM2_TOL)?;
        Ok((rep, pure_target(&states[t])?))
    })?;
    let mut eq = PropertyCheck::new("three-way-agreement", THEOREM2_TOL);
    let mut target = PropertyCheck::new("schmidt-target", THEOREM2_TOL);
    for (rep, want) in &reports {
        eq.record(rep.max_deviation);
        let dev = [rep.cse_value, rep.direct_discord, rep.pure_entanglement]
            .iter()
            .map(|v| (v - want).abs())
            .fold(0.0, f64::max);
        target.record(dev);
    }
    let (bell, _) = reports.last().expect("bell anchor present");
    let mut anchor = PropertyCheck::new("bell-anchor", THEOREM2_TOL);
    let exact = 2.0 - std::f64::consts::SQRT_2;
    anchor.record(
        [bell.cse_value, bell.direct_discord, bell.pure_entanglement]
            .iter()
            .map(|v| (v - exact).abs())
            .fold(0.0, f64::max),
    );
    let values = vec![
        ("bell_cse".into(), bell.cse_value),
        ("bell_direct".into(), bell.direct_discord),
        ("bell_pure".into(), bell.pure_entanglement),
    ];
    Ok((vec![eq, target, anchor], values))
}

/// Sandwich `E_B ≤ min_CSE D^G_B ≤ E_B^cr` on mixed two-qubit states.
pub fn theorem3(config: &VerifyConfig) -> Result<Checks> {
    let n_random = config.count(30);
    let mut states = (0..n_random)
        .map(|t| random_mixed_state(2, 2, 2 + t % 3, &mut config.rng(3, t)))
        .collect::<Result<Vec<_>>>()?;
    for p in [0.4, 0.5, 0.7, 0.9] {
        states.push(werner(p));
    }
    let reports = trials(states.len(), |t| {
        let rep = theorem3_sandwich(&states[t], &config.ent_options(3, t), SANDWICH_TOL, SANDWICH_GAP_TOL)?;
        let closed = bures_entanglement_from_concurrence(concurrence_2q(&states[t])?);
        Ok((rep, closed))
    })?;
    let mut lower = PropertyCheck::new("lower-bound", SANDWICH_TOL);
    let mut upper = PropertyCheck::new("upper-bound", SANDWICH_TOL);
    let mut gap = PropertyCheck::new("gap", SANDWICH_GAP_TOL);
    let mut anchor = PropertyCheck::new("concurrence-anchor", SANDWICH_TOL);
    let mut max_gap: f64 = 0.0;
    for (rep, closed) in &reports {
        lower.record(rep.lower - rep.cse_value);
        upper.record(rep.cse_value - rep.upper);
        gap.record(rep.max_gap);
        anchor.record((rep.lower - closed).abs());
        max_gap = max_gap.max(rep.max_gap);
    }
    Ok((vec![lower, upper, gap, anchor], vec![("max_sandwich_gap".into(), max_gap)]))
}

fn max_trace_deviation(log: &[StepLog]) -> f64 {
    log.iter().map(StepLog::trace_deviation).fold(0.0, f64::max)
}

/// LOCC monotonicity fuzzing plus the local-operation properties.
pub fn theorem1(config: &VerifyConfig) -> Result<Checks> {
    let n_be = config.count(200);
    let be = trials(n_be, |t| {
        let mut rng = config.rng(10, t);
        let rho = random_mixed_state(2, 2, 1 + t % 4, &mut rng)?;
        let p = random_locc(derive_seed(config.seed, 10_000 + t as u64), 1 + t % 3, 3)?;
        monotonicity_trial(&rho, &p, Quantifier::BuresEntanglement, &config.ent_options(10, t), MONOTONICITY_TOL)
    })?;
    let n_hs = config.count(100);
    let hs = trials(n_hs, |t| {
        let rho = random_pure_state(2, 2, &mut config.rng(11, t));
        let p = random_locc(derive_seed(config.seed, 20_000 + t as u64), 1 + t % 3, 3)?;
        monotonicity_trial(&rho, &p, Quantifier::CseHs, &config.ent_options(11, t), MONOTONICITY_TOL)
    })?;
    let mut c_be = PropertyCheck::new("locc-bures-entanglement", MONOTONICITY_TOL);
    let mut c_hs = PropertyCheck::new("locc-cse-hs-pure-inputs", MONOTONICITY_TOL);
    let mut c_trace = PropertyCheck::new("trace-preservation", TRACE_TOL);
    for r in &be {
        c_be.record(r.after - r.before);
        c_trace.record(r.max_trace_deviation);
    }
    for r in &hs {
        c_hs.record(r.after - r.before);
        c_trace.record(r.max_trace_deviation);
    }

    let n_small = config.count(10);
    let qubits = crate::qmat::SubsystemLayout::bipartite(2, 2);

    let flags = trials(n_small, |t| {
        let mut rng = config.rng(12, t);
        let rho = random_mixed_state(2, 2, 2, &mut rng)?;
        let n = rng.random_range(2..=4);
        let p = LoccProtocol::new(
            qubits.clone(),
            vec![
                Step::FlaggedInstrument(Instrument::new(Party::A, &["a"], random_kraus(2, 2, n, &mut rng))?),
                Step::Communicate { from: Party::A },
            ],
        )?;
        let (out, log) = run(&p, &rho)?;
        let joint = out.marginal(&["m0", "c1"])?;
        let mismatch: f64 = (0..n * n)
            .filter(|k| k / n != k % n)
            .map(|k| joint.matrix()[(k, k)].re.abs())
            .sum();
        Ok(flag_offdiagonal_mass(&out, "m0")?
            .max(flag_offdiagonal_mass(&out, "c1")?)
            .max(mismatch)
            .max(max_trace_deviation(&log)))
    })?;
    let mut c_flags = PropertyCheck::new("flag-correlation", TRACE_TOL);
    flags.into_iter().for_each(|r| c_flags.record(r));

    // ancilla on B, then a partial trace of an extension, for both extension quantifiers
    let anc = trials(n_small, |t| {
        let mut rng = config.rng(13, t);
        let rho = random_mixed_state(2, 2, 1 + t % 3, &mut rng)?;
        let ext = random_mixed_state(2, 4, 2, &mut rng)?;
        let ext = MultipartiteState::from_parts(
            ext.matrix().clone(),
            crate::qmat::SubsystemLayout::new(vec![
                crate::qmat::Factor::new("a", 2, Party::A),
                crate::qmat::Factor::new("b", 2, Party::B),
                crate::qmat::Factor::new("e", 2, Party::B),
            ])?,
        );
        let reduced = ext.reduce(&["e"])?;
        let opts = config.ent_options(13, t);
        let mut out = Vec::new();
        for q in [Quantifier::CseBures, Quantifier::CseHs] {
            let plain = q.evaluate(&rho, &opts)?;
            let with = q.evaluate(&rho.with_pure_ancilla("anc", 2, Party::B)?, &opts)?;
            let whole = q.evaluate(&ext, &opts)?;
            let part = q.evaluate(&reduced, &opts)?;
            out.push(((with - plain).abs(), part - whole));
        }
        Ok(out)
    })?;
    let mut c_anc = PropertyCheck::new("pure-ancilla-invariance", MONOTONICITY_TOL);
    let mut c_pt = PropertyCheck::new("partial-trace", MONOTONICITY_TOL);
    for trial in &anc {
        for (a, p) in trial {
            c_anc.record(*a);
            c_pt.record(*p);
        }
    }

    let local = trials(n_small, |t| {
        let mut rng = config.rng(14, t);
        let rho = random_mixed_state(2, 2, 1 + t % 4, &mut rng)?;
        let p = LoccProtocol::new(
            qubits.clone(),
            vec![
                Step::LocalChannel(Instrument::new(Party::A, &["a"], random_kraus(2, 2, 2, &mut rng))?),
                Step::LocalChannel(Instrument::new(Party::B, &["b"], random_kraus(2, 2, 3, &mut rng))?),
            ],
        )?;
        monotonicity_trial(&rho, &p, Quantifier::BuresEntanglement, &config.ent_options(14, t), MONOTONICITY_TOL)
    })?;
    let mut c_local = PropertyCheck::new("local-channels", MONOTONICITY_TOL);
    for r in &local {
        c_local.record(r.after - r.before);
        c_trace.record(r.max_trace_deviation);
    }

    let worst_hs = hs.iter().map(|r| r.after - r.before).fold(f64::NEG_INFINITY, f64::max);
    let worst_be = be.iter().map(|r| r.after - r.before).fold(f64::NEG_INFINITY, f64::max);
    Ok((
        vec![c_be, c_hs, c_trace, c_flags, c_anc, c_pt, c_local],
        vec![
            ("max_increase_bures_entanglement".into(), worst_be),
            ("max_increase_cse_hs".into(), worst_hs),
        ],
    ))
}

/// Contractivity and pure-ancilla invariance of the distances.
pub fn distances(config: &VerifyConfig) -> Result<Checks> {
    let n = config.count(200);
    let contr = trials(n, |t| {
        let mut rng = config.rng(20, t);
        let d = 2 + t % 3;
        let rho = random_density(d, rng.random_range(1..=d), rng.random())?;
        let sigma = random_density(d, rng.random_range(1..=d), rng.random())?;
        let kraus = random_kraus(d, rng.random_range(2..=3), rng.random_range(1..=4), &mut rng);
        let (r, s) = (apply_kraus(&kraus, &rho), apply_kraus(&kraus, &sigma));
        Ok((
            bures_sq_matrices(&r, &s)? - bures_sq_matrices(&rho, &sigma)?,
            trace_distance_matrices(&r, &s)? - trace_distance_matrices(&rho, &sigma)?,
        ))
    })?;
    let mut c_b = PropertyCheck::new("bures-contractivity", DISTANCE_TOL);
    let mut c_t = PropertyCheck::new("trace-contractivity", DISTANCE_TOL);
    for (b, tr) in contr {
        c_b.record(b);
        c_t.record(tr);
    }
    let mut checks = vec![c_b, c_t];
    for (k, kind) in DistanceKind::ALL.into_iter().enumerate() {
        let devs = trials(n, |t| {
            let mut rng = config.rng(21 + k as u64, t);
            let d = 2 + t % 3;
            // full rank keeps the relative entropy finite
            let rank = if kind == DistanceKind::RelativeEntropy { d } else { rng.random_range(1..=d) };
            let rho = crate::qmat::haar_density(d, rank, &mut rng)?;
            let sigma = crate::qmat::haar_density(d, d, &mut rng)?;
            let layout = crate::qmat::SubsystemLayout::new(vec![crate::qmat::Factor::new("s", d, Party::A)])?;
            let r = MultipartiteState::from_parts(rho, layout.clone());
            let s = MultipartiteState::from_parts(sigma, layout);
            Ok(pure_ancilla_invariance_check(kind, &r, &s, 3)?.max_deviation)
        })?;
        let mut c = PropertyCheck::new(&format!("ancilla-invariance-{kind}"), DISTANCE_TOL);
        devs.into_iter().for_each(|v| c.record(v));
        checks.push(c);
    }
    Ok((checks, Vec::new()))
}

fn check_candidate(c: &CseCandidate, original: &MultipartiteState) -> Result<(f64, f64)> {
    let v = verify_cse(c, original, CSE_SWAP_TOL)?;
    Ok((v.max_swap_residual(), v.marginal_residual))
}

/// Every extension constructor, verified against its input.
pub fn cse(config: &VerifyConfig) -> Result<Checks> {
    let n = config.count(200);
    let dims = [(2, 2), (2, 3), (3, 2), (3, 3)];
    let pure = trials(n, |t| {
        let (da, db) = dims[t % 4];
        let psi = haar_pure(da * db, &mut config.rng(30, t));
        let rho = MultipartiteState::pure_bipartite(&psi, da, db)?;
        check_candidate(&canonical_pure_cse(&psi, da, db)?, &rho)
    })?;
    let mixed = trials(n, |t| {
        let mut rng = config.rng(31, t);
        let (da, db) = dims[t % 3];
        let max_rank = (1..=da * db).rev().find(|&r| extension_dim(da, db, r) <= crate::qmat::MAX_DIM).unwrap_or(1);
        let rho = random_mixed_state(da, db, rng.random_range(1..=max_rank), &mut rng)?;
        check_candidate(&canonical_mixed_cse(&rho)?, &rho)
    })?;
    let sep = trials(n, |t| {
        let mut rng = config.rng(32, t);
        let terms = rng.random_range(1..=4);
        let ens = random_product_ensemble(2, 2, terms, &mut rng);
        check_candidate(&separable_cse(&ens)?, &make_separable(&ens)?)
    })?;
    let mix = trials(n, |t| {
        let mut rng = config.rng(33, t);
        let psi = haar_pure(4, &mut rng);
        let psi_state = MultipartiteState::pure_bipartite(&psi, 2, 2)?;
        let rho = random_mixed_state(2, 2, 2, &mut rng)?;
        let p: f64 = rng.random_range(0.05..0.95);
        let parts = [canonical_pure_cse(&psi, 2, 2)?, canonical_mixed_cse(&rho)?];
        let cand = flagged_mixture_cse(&parts, &[p, 1.0 - p])?;
        let original =
            MultipartiteState::from_parts(psi_state.matrix().scale(p) + rho.matrix().scale(1.0 - p), rho.layout().clone());
        check_candidate(&cand, &original)
    })?;
    let mut checks = Vec::new();
    for (name, results) in [("pure", pure), ("mixed", mixed), ("separable", sep), ("flagged-mixture", mix)] {
        let mut sw = PropertyCheck::new(&format!("{name}-swap"), CSE_SWAP_TOL);
        let mut mg = PropertyCheck::new(&format!("{name}-marginal"), CSE_MARGINAL_TOL);
        for (s, m) in results {
            sw.record(s);
            mg.record(m);
        }
        checks.push(sw);
        checks.push(mg);
    }
    Ok((checks, Vec::new()))
}

/// The shipped witness: HS grows from 1 to √2 while `d_B²` does not grow.
pub fn hs_noncontractive() -> Checks {
    let w = hs_noncontractivity_witness();
    let mut before = PropertyCheck::new("hs-before", WITNESS_TOL);
    before.record((w.hs_before - 1.0).abs());
    let mut after = PropertyCheck::new("hs-after", WITNESS_TOL);
    after.record((w.hs_after - std::f64::consts::SQRT_2).abs());
    let mut bures = PropertyCheck::new("bures-non-increasing", WITNESS_TOL);
    bures.record(w.bures_after - w.bures_before);
    (
        vec![before, after, bures],
        vec![
            ("hs_before".into(), w.hs_before),
            ("hs_after".into(), w.hs_after),
            ("bures_sq_before".into(), w.bures_before),
            ("bures_sq_after".into(), w.bures_after),
        ],
    )
}

/// Separable states give zero; states with concurrence at least 0.3 are detected.
pub fn faithfulness(config: &VerifyConfig) -> Result<Checks> {
    let n = config.count(100);
    let sep = trials(n, |t| {
        let mut rng = config.rng(40, t);
        let terms = rng.random_range(1..=4);
        let rho = make_separable(&random_product_ensemble(2, 2, terms, &mut rng))?;
        Ok(crate::ent::cse_discord_min(&rho, DistanceKind::BuresSquared, &config.ent_options(40, t))?.value)
    })?;
    let ent = trials(n, |t| {
        let mut rng = config.rng(41, t);
        let rank = 1 + t % 4;
        let rho = loop {
            let r = random_mixed_state(2, 2, rank, &mut rng)?;
            if concurrence_2q(&r)? >= DETECTION_MIN_CONCURRENCE {
                break r;
            }
        };
        let v = crate::ent::cse_discord_min(&rho, DistanceKind::BuresSquared, &config.ent_options(41, t))?.value;
        Ok((v, concurrence_2q(&rho)?))
    })?;
    let mut c_sep = PropertyCheck::new("separable-zero", SEPARABLE_ZERO_TOL);
    sep.iter().for_each(|v| c_sep.record(*v));
    let mut c_ent = PropertyCheck::new("entangled-detected", 0.0);
    ent.iter().for_each(|(v, _)| c_ent.record(DETECTION_FLOOR - v));
    let min_conc = ent.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let min_val = ent.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let below = ent.iter().filter(|e| bures_entanglement_from_concurrence(e.1) < DETECTION_FLOOR).count();
    Ok((
        vec![c_sep, c_ent],
        vec![
            ("min_concurrence".into(), min_conc),
            ("min_value".into(), min_val),
            ("closed_form_at_min_concurrence".into(), bures_entanglement_from_concurrence(min_conc)),
            ("states_with_closed_form_below_floor".into(), below as f64),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("theorem4".parse::<Suite>().is_err());
    }

    #[test]
    fn property_check_counts_failures_and_nan() {
        let mut c = PropertyCheck::new("x", 1e-3);
        c.record(1e-4);
        assert!(c.pass());
        c.record(f64::NAN);
        assert!(!c.pass() && c.failures == 1 && c.worst_residual.is_nan());
        assert!(!PropertyCheck::new("empty", 1.0).pass());
    }

    #[test]
    fn witness_suite_passes() {
        let r = run_suite(Suite::HsNoncontractive, &VerifyConfig::default()).unwrap();
        assert!(r.pass(), "{r}");
        assert_eq!(r.value("hs_before"), Some(1.0));
    }

    #[test]
    fn fast_mode_halves_counts() {
        let c = VerifyConfig { fast: true, ..VerifyConfig::default() };
        assert_eq!(c.count(200), 100);
        assert_eq!(c.count(1), 1);
        assert_eq!(c.ent_options(0, 0).optim.restart_count(16), 8);
    }
}
