//! LOCC protocols on flagged registers.
//!
//! Measurement outcomes live in classical flag factors owned by the measuring
//! party. Communication copies a flag to the other party with the modular
//! addition unitary `|i, j⟩ ↦ |i, i + j mod d⟩`, so after a round both parties
//! hold perfectly correlated records. Flags leave the register only through an
//! explicit [`Step::DiscardFlag`].

use crate::dist::DistanceKind;
use crate::ent::{bures_entanglement, cse_discord_min, EntOptions};
use crate::error::{CsentError, Result};
use crate::qmat::{
    self, apply_kraus, basis_projector, completeness_deviation, derive_seed, embed_operator, haar_unitary,
    random_kraus, seeded_rng, tensor, unitarity_deviation, ComplexMatrix, Factor, Party, SubsystemLayout, MAX_DIM,
    ONE, ZERO,
};
use crate::states::MultipartiteState;
use rand::Rng;

/// Completeness tolerance enforced when an instrument is built.
pub const COMPLETENESS_TOL: f64 = 1e-8;
/// Off-diagonal flag mass above which a flag is not classical.
pub const CLASSICALITY_TOL: f64 = 1e-8;

/// Local instrument `{K_i}` acting on `targets` (in order), all owned by `party`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    pub party: Party,
    pub targets: Vec<String>,
    pub kraus: Vec<ComplexMatrix>,
}

impl Instrument {
    pub fn new(party: Party, targets: &[&str], kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() || targets.is_empty() {
            return Err(CsentError::Shape("instrument needs targets and at least one Kraus operator".into()));
        }
        let n = kraus[0].nrows();
        if kraus.iter().any(|k| k.nrows() != n || k.ncols() != n) {
            return Err(CsentError::Shape("Kraus operators must be square and of equal size".into()));
        }
        let deviation = completeness_deviation(&kraus);
        if deviation > COMPLETENESS_TOL {
            return Err(CsentError::Instrument { deviation });
        }
        Ok(Instrument {
            party,
            targets: targets.iter().map(|s| s.to_string()).collect(),
            kraus,
        })
    }

    pub fn outcomes(&self) -> usize {
        self.kraus.len()
    }

    pub fn completeness_deviation(&self) -> f64 {
        completeness_deviation(&self.kraus)
    }

    /// Single-outcome instrument for a unitary.
    pub fn unitary(party: Party, targets: &[&str], u: ComplexMatrix) -> Result<Self> {
        Instrument::new(party, targets, vec![u])
    }

    /// Projective measurement in the computational basis of a `d`-dimensional target.
    pub fn computational_measurement(party: Party, target: &str, d: usize) -> Self {
        Instrument {
            party,
            targets: vec![target.to_string()],
            kraus: (0..d).map(|k| basis_projector(d, k)).collect(),
        }
    }

    fn target_refs(&self) -> Vec<&str> {
        self.targets.iter().map(String::as_str).collect()
    }

    fn embedded(&self, layout: &SubsystemLayout) -> Result<Vec<ComplexMatrix>> {
        let targets = self.target_refs();
        self.kraus.iter().map(|k| embed_operator(k, layout, &targets)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    LocalUnitary {
        party: Party,
        targets: Vec<String>,
        unitary: ComplexMatrix,
    },
    /// Applies the instrument and forgets the outcome.
    LocalChannel(Instrument),
    /// Records the outcome in a new flag `m{step}` owned by the instrument's party.
    FlaggedInstrument(Instrument),
    /// Copies the newest flag of `from` into a new flag `c{step}` of the other party.
    Communicate { from: Party },
    /// Applies `branches[j]` when the classical flag `control` reads `j`; outcomes are forgotten.
    Conditioned { control: String, branches: Vec<Instrument> },
    DiscardFlag(String),
}

impl Step {
    pub fn name(&self) -> &'static str {
        match self {
            Step::LocalUnitary { .. } => "local-unitary",
            Step::LocalChannel(_) => "local-channel",
            Step::FlaggedInstrument(_) => "flagged-instrument",
            Step::Communicate { .. } => "communicate",
            Step::Conditioned { .. } => "conditioned",
            Step::DiscardFlag(_) => "discard-flag",
        }
    }
}

pub fn measurement_flag_label(step: usize) -> String {
    format!("m{step}")
}

pub fn copy_flag_label(step: usize) -> String {
    format!("c{step}")
}

/// Layout bookkeeping shared by validation and execution.
#[derive(Debug, Clone)]
struct Registers {
    layout: SubsystemLayout,
    /// Live flags in creation order.
    flags: Vec<(String, Party)>,
}

impl Registers {
    fn newest_flag(&self, party: Party) -> Result<&str> {
        self.flags
            .iter()
            .rev()
            .find(|(_, p)| *p == party)
            .map(|(l, _)| l.as_str())
            .ok_or_else(|| CsentError::Layout(format!("party {party} holds no flag to communicate")))
    }

    fn is_flag(&self, label: &str) -> bool {
        self.flags.iter().any(|(l, _)| l == label)
    }

    fn check_owned(&self, party: Party, targets: &[String]) -> Result<()> {
        for t in targets {
            let f = self.layout.factor(t)?;
            if f.party != party {
                return Err(CsentError::Layout(format!("factor `{t}` is not owned by party {party}")));
            }
        }
        Ok(())
    }

    fn check_dims(&self, targets: &[String], n: usize) -> Result<()> {
        let d: usize = targets.iter().map(|t| self.layout.dim_of(t)).collect::<Result<Vec<_>>>()?.iter().product();
        if d != n {
            return Err(CsentError::Shape(format!("operator of size {n} on targets of dimension {d}")));
        }
        Ok(())
    }

    fn add_flag(&mut self, label: String, dim: usize, party: Party) -> Result<()> {
        self.layout = self.layout.with_factor(Factor::new(label.clone(), dim, party))?;
        let total = self.layout.total_dim();
        if total > MAX_DIM {
            return Err(CsentError::DimensionTooLarge { dim: total, max: MAX_DIM });
        }
        self.flags.push((label, party));
        Ok(())
    }

    /// Validates `step` (index `idx`) and advances the layout.
    fn advance(&mut self, idx: usize, step: &Step) -> Result<()> {
        match step {
            Step::LocalUnitary { party, targets, unitary } => {
                self.check_owned(*party, targets)?;
                self.check_dims(targets, unitary.nrows())?;
                let dev = unitarity_deviation(unitary);
                if dev > COMPLETENESS_TOL {
                    return Err(CsentError::Instrument { deviation: dev });
                }
            }
            Step::LocalChannel(inst) => {
                self.check_owned(inst.party, &inst.targets)?;
                self.check_dims(&inst.targets, inst.kraus[0].nrows())?;
            }
            Step::FlaggedInstrument(inst) => {
                self.check_owned(inst.party, &inst.targets)?;
                self.check_dims(&inst.targets, inst.kraus[0].nrows())?;
                self.add_flag(measurement_flag_label(idx), inst.outcomes(), inst.party)?;
            }
            Step::Communicate { from } => {
                let src = self.newest_flag(*from)?.to_string();
                let d = self.layout.dim_of(&src)?;
                self.add_flag(copy_flag_label(idx), d, from.other())?;
            }
            Step::Conditioned { control, branches } => {
                if !self.is_flag(control) {
                    return Err(CsentError::Layout(format!("`{control}` is not a live flag")));
                }
                let owner = self.layout.factor(control)?.party;
                let d = self.layout.dim_of(control)?;
                if branches.len() != d {
                    return Err(CsentError::Shape(format!("{} branches for a flag of dimension {d}", branches.len())));
                }
                for b in branches {
                    if b.party != owner || b.targets != branches[0].targets {
                        return Err(CsentError::Layout(
                            "conditioned branches must share targets owned by the flag holder".into(),
                        ));
                    }
                    if b.targets.contains(control) {
                        return Err(CsentError::Layout("a branch may not act on its own control".into()));
                    }
                    self.check_owned(owner, &b.targets)?;
                    self.check_dims(&b.targets, b.kraus[0].nrows())?;
                }
            }
            Step::DiscardFlag(label) => {
                if !self.is_flag(label) {
                    return Err(CsentError::Layout(format!("`{label}` is not a live flag")));
                }
                self.layout = layout_without(&self.layout, label)?;
                self.flags.retain(|(l, _)| l != label);
            }
        }
        Ok(())
    }
}

fn layout_without(layout: &SubsystemLayout, label: &str) -> Result<SubsystemLayout> {
    layout.position(label)?;
    SubsystemLayout::new(layout.factors().iter().filter(|f| f.label != label).cloned().collect())
}

/// Ordered LOCC steps for a fixed input layout, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LoccProtocol {
    pub input: SubsystemLayout,
    pub steps: Vec<Step>,
    output: SubsystemLayout,
}

impl LoccProtocol {
    pub fn new(input: SubsystemLayout, steps: Vec<Step>) -> Result<Self> {
        let mut reg = Registers {
            layout: input.clone(),
            flags: Vec::new(),
        };
        for (i, s) in steps.iter().enumerate() {
            reg.advance(i, s)?;
        }
        Ok(LoccProtocol {
            input,
            steps,
            output: reg.layout,
        })
    }

    pub fn empty(input: SubsystemLayout) -> Self {
        LoccProtocol {
            output: input.clone(),
            input,
            steps: Vec::new(),
        }
    }

    pub fn output_layout(&self) -> &SubsystemLayout {
        &self.output
    }

    /// Every instrument in the protocol, including conditioned branches.
    pub fn instruments(&self) -> Vec<&Instrument> {
        let mut out = Vec::new();
        for s in &self.steps {
            match s {
                Step::LocalChannel(i) | Step::FlaggedInstrument(i) => out.push(i),
                Step::Conditioned { branches, .. } => out.extend(branches.iter()),
                _ => {}
            }
        }
        out
    }
}

/// `Σ_i K_i ρ K_i† ⊗ |i⟩⟨i|` with the flag appended as a new factor of the instrument's party.
pub fn apply_flagged_instrument(rho: &MultipartiteState, inst: &Instrument, flag: &str) -> Result<MultipartiteState> {
    let deviation = inst.completeness_deviation();
    if deviation > COMPLETENESS_TOL {
        return Err(CsentError::Instrument { deviation });
    }
    let n = inst.outcomes();
    let layout = rho.layout().with_factor(Factor::new(flag, n, inst.party))?;
    qmat::check_max_dim(layout.total_dim())?;
    let mut out = ComplexMatrix::zeros(layout.total_dim(), layout.total_dim());
    for (i, k) in inst.embedded(rho.layout())?.iter().enumerate() {
        out += tensor(&(k * rho.matrix() * k.adjoint()), &basis_projector(n, i));
    }
    Ok(MultipartiteState::from_parts(out, layout))
}

/// `Σ_i K_i ρ K_i†` on the instrument's targets.
pub fn apply_channel(rho: &MultipartiteState, inst: &Instrument) -> Result<MultipartiteState> {
    let deviation = inst.completeness_deviation();
    if deviation > COMPLETENESS_TOL {
        return Err(CsentError::Instrument { deviation });
    }
    let out = apply_kraus(&inst.embedded(rho.layout())?, rho.matrix());
    Ok(MultipartiteState::from_parts(out, rho.layout().clone()))
}

/// Summed modulus of the entries of `ρ` that are off-diagonal in `label`.
pub fn flag_offdiagonal_mass(rho: &MultipartiteState, label: &str) -> Result<f64> {
    let mut order = vec![label];
    order.extend(rho.layout().labels().into_iter().filter(|l| *l != label));
    let r = rho.reordered(&order)?;
    let d = rho.layout().dim_of(label)?;
    let rest = rho.dim() / d;
    let m = r.matrix();
    let mut mass = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                mass += m.view((i * rest, j * rest), (rest, rest)).iter().map(|z| z.norm()).sum::<f64>();
            }
        }
    }
    Ok(mass)
}

/// `U_C = Σ_ij |i, i + j mod d⟩⟨i, j|`.
pub fn copy_unitary(d: usize) -> ComplexMatrix {
    let mut u = ComplexMatrix::from_element(d * d, d * d, ZERO);
    for i in 0..d {
        for j in 0..d {
            u[(i * d + (i + j) % d, i * d + j)] = ONE;
        }
    }
    u
}

/// Copies the classical flag `label` into a fresh factor `copy` on the other party.
pub fn communicate(rho: &MultipartiteState, label: &str, copy: &str) -> Result<MultipartiteState> {
    let mass = flag_offdiagonal_mass(rho, label)?;
    if mass > CLASSICALITY_TOL {
        return Err(CsentError::Classicality {
            label: label.to_string(),
            mass,
        });
    }
    let f = rho.layout().factor(label)?.clone();
    let ext = rho.with_pure_ancilla(copy, f.dim, f.party.other())?;
    let u = embed_operator(&copy_unitary(f.dim), ext.layout(), &[label, copy])?;
    ext.conjugate(&u)
}

fn apply_conditioned(rho: &MultipartiteState, control: &str, branches: &[Instrument]) -> Result<MultipartiteState> {
    let d = branches.len();
    let width = branches.iter().map(Instrument::outcomes).max().unwrap_or(1);
    let mut targets: Vec<&str> = branches[0].target_refs();
    targets.push(control);
    let n = branches[0].kraus[0].nrows();
    let kraus: Vec<ComplexMatrix> = (0..width)
        .map(|i| {
            let mut k = ComplexMatrix::zeros(n * d, n * d);
            for (j, b) in branches.iter().enumerate() {
                if let Some(kj) = b.kraus.get(i) {
                    k += tensor(kj, &basis_projector(d, j));
                }
            }
            k
        })
        .collect();
    let deviation = completeness_deviation(&kraus);
    if deviation > COMPLETENESS_TOL {
        return Err(CsentError::Instrument { deviation });
    }
    let embedded: Vec<ComplexMatrix> = kraus.iter().map(|k| embed_operator(k, rho.layout(), &targets)).collect::<Result<_>>()?;
    Ok(MultipartiteState::from_parts(apply_kraus(&embedded, rho.matrix()), rho.layout().clone()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepLog {
    pub step: usize,
    pub name: &'static str,
    pub trace: f64,
    pub layout: SubsystemLayout,
}

impl StepLog {
    pub fn trace_deviation(&self) -> f64 {
        (self.trace - 1.0).abs()
    }
}

/// Runs the protocol and records the trace and layout after every step.
pub fn run(protocol: &LoccProtocol, rho: &MultipartiteState) -> Result<(MultipartiteState, Vec<StepLog>)> {
    if rho.layout() != &protocol.input {
        return Err(CsentError::Layout("state layout differs from the protocol input".into()));
    }
    let mut reg = Registers {
        layout: protocol.input.clone(),
        flags: Vec::new(),
    };
    let mut state = rho.clone();
    let mut log = Vec::with_capacity(protocol.steps.len());
    for (idx, step) in protocol.steps.iter().enumerate() {
        state = match step {
            Step::LocalUnitary { targets, unitary, .. } => {
                let t: Vec<&str> = targets.iter().map(String::as_str).collect();
                state.conjugate(&embed_operator(unitary, state.layout(), &t)?)?
            }
            Step::LocalChannel(inst) => apply_channel(&state, inst)?,
            Step::FlaggedInstrument(inst) => apply_flagged_instrument(&state, inst, &measurement_flag_label(idx))?,
            Step::Communicate { from } => communicate(&state, reg.newest_flag(*from)?, &copy_flag_label(idx))?,
            Step::Conditioned { control, branches } => apply_conditioned(&state, control, branches)?,
            Step::DiscardFlag(label) => state.reduce(&[label])?,
        };
        reg.advance(idx, step)?;
        log.push(StepLog {
            step: idx,
            name: step.name(),
            trace: qmat::real_trace(state.matrix()),
            layout: state.layout().clone(),
        });
    }
    Ok((state, log))
}

/// Seeded random protocol on two qubits labelled `a` and `b`.
pub fn random_locc(seed: u64, depth: usize, max_outcomes: usize) -> Result<LoccProtocol> {
    random_locc_on(&SubsystemLayout::bipartite(2, 2), seed, depth, max_outcomes)
}

/// Seeded random protocol with `depth` rounds alternating A, B, A, ...
///
/// Each round: a local unitary, a flagged instrument from a random Stinespring
/// dilation, communication of its flag, a channel on the receiver conditioned
/// on the copy, then both flags are discarded so the output keeps the input layout.
pub fn random_locc_on(input: &SubsystemLayout, seed: u64, depth: usize, max_outcomes: usize) -> Result<LoccProtocol> {
    if depth == 0 || max_outcomes == 0 {
        return Err(CsentError::Domain("depth and max_outcomes must be at least 1".into()));
    }
    let mut rng = seeded_rng(derive_seed(seed, 0x10CC));
    let mut steps = Vec::new();
    for round in 0..depth {
        let party = if round % 2 == 0 { Party::A } else { Party::B };
        let other = party.other();
        let work: Vec<&str> = input.party_labels(party);
        let other_work: Vec<&str> = input.party_labels(other);
        let (d, d_other) = (input.party_dim(party), input.party_dim(other));

        steps.push(Step::LocalUnitary {
            party,
            targets: work.iter().map(|s| s.to_string()).collect(),
            unitary: haar_unitary(d, &mut rng),
        });
        let n = rng.random_range(1..=max_outcomes);
        let flagged_at = steps.len();
        steps.push(Step::FlaggedInstrument(Instrument::new(party, &work, random_kraus(d, d, n, &mut rng))?));
        let copied_at = steps.len();
        steps.push(Step::Communicate { from: party });
        let branches = (0..n)
            .map(|_| {
                let k = rng.random_range(1..=2);
                Instrument::new(other, &other_work, random_kraus(d_other, d_other, k, &mut rng))
            })
            .collect::<Result<Vec<_>>>()?;
        steps.push(Step::Conditioned {
            control: copy_flag_label(copied_at),
            branches,
        });
        steps.push(Step::DiscardFlag(measurement_flag_label(flagged_at)));
        steps.push(Step::DiscardFlag(copy_flag_label(copied_at)));
    }
    LoccProtocol::new(input.clone(), steps)
}

/// Entanglement quantifiers accepted by [`monotonicity_trial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    BuresEntanglement,
    CseBures,
    CseHs,
}

impl Quantifier {
    pub fn name(self) -> &'static str {
        match self {
            Quantifier::BuresEntanglement => "bures-entanglement",
            Quantifier::CseBures => "cse-bures",
            Quantifier::CseHs => "cse-hs",
        }
    }

    /// Value on the bipartition that groups every factor with its owner.
    pub fn evaluate(self, rho: &MultipartiteState, opts: &EntOptions) -> Result<f64> {
        let bip = rho.as_bipartite();
        Ok(match self {
            Quantifier::BuresEntanglement => bures_entanglement(&bip, opts)?.value,
            Quantifier::CseBures => cse_discord_min(&bip, DistanceKind::BuresSquared, opts)?.value,
            Quantifier::CseHs => cse_discord_min(&bip, DistanceKind::HilbertSchmidt, opts)?.value,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub quantifier: Quantifier,
    pub before: f64,
    pub after: f64,
    /// `max(0, after − before − tol)`.
    pub violation: f64,
    pub tol: f64,
    pub max_trace_deviation: f64,
}

/// Evaluates `quantifier` before and after `protocol` with identical options.
pub fn monotonicity_trial(
    rho: &MultipartiteState,
    protocol: &LoccProtocol,
    quantifier: Quantifier,
    opts: &EntOptions,
    tol: f64,
) -> Result<MonotonicityReport> {
    let (out, log) = run(protocol, rho)?;
    let before = quantifier.evaluate(rho, opts)?;
    let after = quantifier.evaluate(&out, opts)?;
    Ok(MonotonicityReport {
        quantifier,
        before,
        after,
        violation: (after - before - tol).max(0.0),
        tol,
        max_trace_deviation: log.iter().map(StepLog::trace_deviation).fold(0.0, f64::max),
    })
}

/// Measures `a` in the computational basis, keeps the record, then discards it.
pub fn measure_and_discard(input: &SubsystemLayout) -> Result<LoccProtocol> {
    let d = input.dim_of("a")?;
    LoccProtocol::new(
        input.clone(),
        vec![
            Step::FlaggedInstrument(Instrument::computational_measurement(Party::A, "a", d)),
            Step::DiscardFlag(measurement_flag_label(0)),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{c, cr, max_abs, random_unitary};
    use crate::states::{bell_state, is_ppt, random_mixed_state, random_separable, werner};

    fn qubits() -> SubsystemLayout {
        SubsystemLayout::bipartite(2, 2)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    #[test]
    fn z_measurement_on_bell_state_correlates_flags() {
        let inst = Instrument::computational_measurement(Party::A, "a", 2);
        let out = apply_flagged_instrument(&bell_state(0), &inst, "f").unwrap();
        assert_eq!(out.layout().dims(), vec![2, 2, 2]);
        let mut want = ComplexMatrix::zeros(8, 8);
        want[(0, 0)] = cr(0.5); // |00⟩|0⟩
        want[(7, 7)] = cr(0.5); // |11⟩|1⟩
        assert!(max_abs(&(out.matrix() - want)) < 1e-15);
    }

    #[test]
    fn single_kraus_instrument_is_coherent() {
        let u = random_unitary(2, 3);
        let inst = Instrument::unitary(Party::B, &["b"], u.clone()).unwrap();
        let rho = bell_state(1);
        let out = apply_flagged_instrument(&rho, &inst, "f").unwrap();
        assert_eq!(out.layout().dim_of("f").unwrap(), 1);
        let direct = embed_operator(&u, rho.layout(), &["b"]).unwrap();
        assert!(max_abs(&(out.matrix() - &direct * rho.matrix() * direct.adjoint())) < 1e-14);
        assert!((out.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flagged_instruments_preserve_trace() {
        let mut rng = seeded_rng(8);
        for _ in 0..20 {
            let rho = random_mixed_state(2, 2, 3, &mut rng).unwrap();
            let n = rng.random_range(1..=4);
            let inst = Instrument::new(Party::A, &["a"], random_kraus(2, 2, n, &mut rng)).unwrap();
            assert!(inst.completeness_deviation() < 1e-10);
            let out = apply_flagged_instrument(&rho, &inst, "f").unwrap();
            assert!((qmat::real_trace(out.matrix()) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn incomplete_instrument_is_rejected() {
        let k = vec![basis_projector(2, 0)];
        assert!(matches!(Instrument::new(Party::A, &["a"], k), Err(CsentError::Instrument { .. })));
    }

    #[test]
    fn communication_copies_a_classical_flag() {
        // ½ρ₀⊗|0⟩⟨0| + ½ρ₁⊗|1⟩⟨1| with the flag on B
        let rho0 = bell_state(0);
        let rho1 = werner(0.3);
        let layout = qubits().with_factor(Factor::new("f", 2, Party::B)).unwrap();
        let m = tensor(rho0.matrix(), &basis_projector(2, 0)).scale(0.5)
            + tensor(rho1.matrix(), &basis_projector(2, 1)).scale(0.5);
        let rho = MultipartiteState::new(m, layout).unwrap();
        let out = communicate(&rho, "f", "g").unwrap();
        assert_eq!(out.layout().factor("g").unwrap().party, Party::A);
        let want = tensor(rho0.matrix(), &basis_projector(4, 0)).scale(0.5)
            + tensor(rho1.matrix(), &basis_projector(4, 3)).scale(0.5);
        assert!(max_abs(&(out.matrix() - want)) < 1e-15);
        assert!(flag_offdiagonal_mass(&out, "f").unwrap() < 1e-10);
        assert!(flag_offdiagonal_mass(&out, "g").unwrap() < 1e-10);
    }

    #[test]
    fn deterministic_flag_copies_to_zero() {
        let rho = werner(0.6).with_pure_ancilla("f", 3, Party::A).unwrap();
        let out = communicate(&rho, "f", "g").unwrap();
        let want = tensor(werner(0.6).matrix(), &basis_projector(9, 0));
        assert!(max_abs(&(out.matrix() - want)) < 1e-15);
    }

    #[test]
    fn copy_unitary_is_a_permutation() {
        for d in 1..5 {
            assert!(unitarity_deviation(&copy_unitary(d)) < 1e-15);
        }
    }

    #[test]
    fn coherent_flag_cannot_be_communicated() {
        let plus = crate::qmat::projector(&crate::qmat::StateVector::from_vec(vec![cr(0.5f64.sqrt()), c(0.0, 0.5f64.sqrt())]));
        let layout = qubits().with_factor(Factor::new("f", 2, Party::A)).unwrap();
        let rho = MultipartiteState::new(tensor(werner(0.5).matrix(), &plus), layout).unwrap();
        assert!(matches!(communicate(&rho, "f", "g"), Err(CsentError::Classicality { .. })));
    }

    #[test]
    fn local_unitary_protocol_matches_direct_product() {
        let (u, v) = (random_unitary(2, 1), random_unitary(2, 2));
        let p = LoccProtocol::new(
            qubits(),
            vec![
                Step::LocalUnitary { party: Party::A, targets: vec!["a".into()], unitary: u.clone() },
                Step::LocalUnitary { party: Party::B, targets: vec!["b".into()], unitary: v.clone() },
            ],
        )
        .unwrap();
        let rho = werner(0.8);
        let (out, log) = run(&p, &rho).unwrap();
        let uv = tensor(&u, &v);
        assert!(max_abs(&(out.matrix() - &uv * rho.matrix() * uv.adjoint())) < 1e-14);
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn empty_protocol_is_identity() {
        let rho = werner(0.4);
        let (out, log) = run(&LoccProtocol::empty(qubits()), &rho).unwrap();
        assert_eq!(out, rho);
        assert!(log.is_empty());
    }

    #[test]
    fn measure_communicate_correct_flow() {
        let x = pauli_x();
        let p = LoccProtocol::new(
            qubits(),
            vec![
                Step::FlaggedInstrument(Instrument::computational_measurement(Party::A, "a", 2)),
                Step::Communicate { from: Party::A },
                Step::Conditioned {
                    control: copy_flag_label(1),
                    branches: vec![
                        Instrument::unitary(Party::B, &["b"], ComplexMatrix::identity(2, 2)).unwrap(),
                        Instrument::unitary(Party::B, &["b"], x).unwrap(),
                    ],
                },
            ],
        )
        .unwrap();
        let (out, log) = run(&p, &bell_state(0)).unwrap();
        assert!(log.iter().all(|l| l.trace_deviation() < 1e-10));
        let b = out.marginal(&["b"]).unwrap();
        assert!(max_abs(&(b.matrix() - basis_projector(2, 0))) < 1e-14);
        assert!(flag_offdiagonal_mass(&out, "m0").unwrap() < 1e-10);
        assert!(flag_offdiagonal_mass(&out, "c1").unwrap() < 1e-10);
        assert_eq!(p.output_layout().labels(), vec!["a", "b", "m0", "c1"]);
    }

    #[test]
    fn malformed_protocols_are_rejected_at_construction() {
        let comm_without_flag = LoccProtocol::new(qubits(), vec![Step::Communicate { from: Party::A }]);
        assert!(matches!(comm_without_flag, Err(CsentError::Layout(_))));
        let wrong_owner = LoccProtocol::new(
            qubits(),
            vec![Step::LocalChannel(Instrument::computational_measurement(Party::A, "b", 2))],
        );
        assert!(wrong_owner.is_err());
        let discard_data = LoccProtocol::new(qubits(), vec![Step::DiscardFlag("a".into())]);
        assert!(discard_data.is_err());
        let wide = (0..65).map(|_| ComplexMatrix::identity(2, 2).scale(65f64.sqrt().recip())).collect();
        let too_big = LoccProtocol::new(
            qubits(),
            vec![Step::FlaggedInstrument(Instrument::new(Party::A, &["a"], wide).unwrap())],
        );
        assert!(matches!(too_big, Err(CsentError::DimensionTooLarge { dim: 260, .. })));
    }

    #[test]
    fn random_protocols_are_seeded_and_complete() {
        let p = random_locc(42, 3, 3).unwrap();
        assert_eq!(p, random_locc(42, 3, 3).unwrap());
        assert_ne!(p, random_locc(43, 3, 3).unwrap());
        assert!(p.instruments().iter().all(|i| i.completeness_deviation() < 1e-10));
        assert_eq!(p.output_layout(), &qubits());
    }

    #[test]
    fn random_protocols_keep_separable_states_ppt() {
        let mut rng = seeded_rng(6);
        for seed in 0..10 {
            let sep = random_separable(2, 2, 3, &mut rng);
            let p = random_locc(seed, 3, 4).unwrap();
            let (out, log) = run(&p, &sep).unwrap();
            assert!(log.iter().all(|l| l.trace_deviation() < 1e-10));
            assert!(is_ppt(&out, 1e-10).ppt);
        }
    }

    #[test]
    fn measure_and_discard_disentangles_bell_state() {
        let opts = EntOptions::with_seed(3).restarts(4);
        let p = measure_and_discard(&qubits()).unwrap();
        let rep = monotonicity_trial(&bell_state(0), &p, Quantifier::BuresEntanglement, &opts, 1e-2).unwrap();
        assert!(rep.after <= 1e-3 && rep.violation == 0.0, "{rep:?}");
        assert!((rep.before - (2.0 - std::f64::consts::SQRT_2)).abs() < 1e-6);
    }

    #[test]
    fn local_unitaries_leave_quantifiers_unchanged() {
        let opts = EntOptions::with_seed(3).restarts(4);
        let mut rng = seeded_rng(12);
        let rho = random_mixed_state(2, 2, 2, &mut rng).unwrap();
        let p = LoccProtocol::new(
            qubits(),
            vec![
                Step::LocalUnitary { party: Party::A, targets: vec!["a".into()], unitary: random_unitary(2, 5) },
                Step::LocalUnitary { party: Party::B, targets: vec!["b".into()], unitary: random_unitary(2, 6) },
            ],
        )
        .unwrap();
        for q in [Quantifier::BuresEntanglement, Quantifier::CseBures, Quantifier::CseHs] {
            let rep = monotonicity_trial(&rho, &p, q, &opts, 1e-2).unwrap();
            assert!((rep.after - rep.before).abs() <= 1e-2, "{rep:?}");
        }
    }
}
