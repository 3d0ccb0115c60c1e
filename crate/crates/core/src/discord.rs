//! Two-sided geometric discord and measurement-induced discord.
//!
//! Both are minimized over pairs of local orthonormal bases, each written as
//! `frame · exp(i H(x))`. At fixed bases the closest classical-correlated
//! state is found in closed form (Hilbert-Schmidt) or by a monotone
//! alternating ascent on the fidelity (Bures).

use nalgebra::DMatrix;

use crate::dist::DistanceKind;
use crate::error::{CsentError, Result};
use crate::optim::{bfgs, multistart, BoundDirection, OptimOptions, RestartOutcome};
use crate::qmat::{
    self, derive_seed, haar_unitary, hermitian_eig, hermitian_sqrt, seeded_rng, tensor, unitary_from_coords,
    ComplexMatrix, Party,
};
use crate::states::{make_cc, MultipartiteState};

/// Local bases as columns of `frame · exp(i H(params))` on each party.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasisPair {
    pub params_a: Vec<f64>,
    pub params_b: Vec<f64>,
    pub frame_a: ComplexMatrix,
    pub frame_b: ComplexMatrix,
    pub realized_a: ComplexMatrix,
    pub realized_b: ComplexMatrix,
}

impl LocalBasisPair {
    pub fn from_params(frame_a: ComplexMatrix, frame_b: ComplexMatrix, params_a: Vec<f64>, params_b: Vec<f64>) -> Self {
        let realized_a = unitary_from_coords(&frame_a, &params_a);
        let realized_b = unitary_from_coords(&frame_b, &params_b);
        LocalBasisPair {
            params_a,
            params_b,
            frame_a,
            frame_b,
            realized_a,
            realized_b,
        }
    }

    pub fn from_unitaries(ua: ComplexMatrix, ub: ComplexMatrix) -> Self {
        let (da, db) = (ua.nrows(), ub.nrows());
        LocalBasisPair::from_params(ua, ub, vec![0.0; da * da], vec![0.0; db * db])
    }

    pub fn computational(da: usize, db: usize) -> Self {
        LocalBasisPair::from_unitaries(ComplexMatrix::identity(da, da), ComplexMatrix::identity(db, db))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.realized_a.nrows(), self.realized_b.nrows())
    }

    /// `U_a ⊗ U_b`.
    pub fn product(&self) -> ComplexMatrix {
        tensor(&self.realized_a, &self.realized_b)
    }

    /// Largest deviation of either realized matrix from unitarity.
    pub fn unitarity_deviation(&self) -> f64 {
        qmat::unitarity_deviation(&self.realized_a).max(qmat::unitarity_deviation(&self.realized_b))
    }
}

/// `Σ_ij p_ij |α_i β_j⟩⟨α_i β_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcState {
    pub bases: LocalBasisPair,
    pub probs: DMatrix<f64>,
}

impl CcState {
    pub fn state(&self) -> Result<MultipartiteState> {
        make_cc(&self.bases.realized_a, &self.bases.realized_b, &self.probs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiscordArgmin {
    Cc(CcState),
    Bases(LocalBasisPair),
}

impl DiscordArgmin {
    pub fn bases(&self) -> &LocalBasisPair {
        match self {
            DiscordArgmin::Cc(cc) => &cc.bases,
            DiscordArgmin::Bases(b) => b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscordReport {
    pub kind: DistanceKind,
    pub value: f64,
    pub argmin: DiscordArgmin,
    pub restarts: usize,
    pub converged_fraction: f64,
    pub bound_direction: BoundDirection,
    /// Terminal objective of each restart, in restart order.
    pub restart_values: Vec<f64>,
}

/// Default restart counts: 16 when both parties are qubits, 48 otherwise.
pub fn default_restarts(da: usize, db: usize) -> usize {
    if da <= 2 && db <= 2 {
        16
    } else {
        48
    }
}

fn check_bases(rho: &MultipartiteState, bases: &LocalBasisPair) -> Result<()> {
    let (da, db) = rho.party_dims();
    if bases.dims() != (da, db) {
        let (ba, bb) = bases.dims();
        return Err(CsentError::Shape(format!(
            "bases are {ba}x{bb}, parties have dimensions {da}x{db}"
        )));
    }
    Ok(())
}

/// Two-sided dephasing in the given bases. The output keeps the state's
/// factors, grouped party A first.
pub fn dephase(rho: &MultipartiteState, bases: &LocalBasisPair) -> Result<MultipartiteState> {
    check_bases(rho, bases)?;
    let grouped = rho.reordered(&rho.layout().grouped_order())?;
    let m = crate::states::dephase_in_bases(grouped.matrix(), &bases.realized_a, &bases.realized_b);
    Ok(MultipartiteState::from_parts(qmat::symmetrize(&m), grouped.layout().clone()))
}

/// Fixed-bases data: `S' = W†√ρW` and `ρ' = W†ρW` with `W = U_a ⊗ U_b`.
struct Rotated {
    sqrt_rot: ComplexMatrix,
    diag: Vec<f64>,
}

fn rotate(rho: &ComplexMatrix, sqrt_rho: &ComplexMatrix, w: &ComplexMatrix) -> Rotated {
    let wa = w.adjoint();
    let rot = &wa * rho * w;
    Rotated {
        sqrt_rot: &wa * sqrt_rho * w,
        diag: rot.diagonal().iter().map(|z| z.re.max(0.0)).collect(),
    }
}

/// `‖S' diag(q)‖₁`.
fn weighted_trace_norm(s: &ComplexMatrix, q: &[f64]) -> f64 {
    let mut x = s.clone();
    for (j, &qj) in q.iter().enumerate() {
        x.column_mut(j).scale_mut(qj);
    }
    qmat::trace_norm(&x)
}

const INNER_MAX_ITER: usize = 5000;

/// Maximizes `‖S' diag(q)‖₁` over unit vectors `q`; the optimum gives the
/// closest CC state `diag(q²)` in the rotated frame. Each step sets `q` to the
/// normalized diagonal of `Re(Y S')` where `Y` is the polar factor aligning
/// `S' diag(q)`, which never decreases the objective.
fn maximize_fidelity_over_simplex(s: &ComplexMatrix, start: &[f64]) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut q = start.to_vec();
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        q = vec![1.0 / (n as f64).sqrt(); n];
    } else {
        q.iter_mut().for_each(|v| *v /= norm);
    }
    let mut best = weighted_trace_norm(s, &q);
    for _ in 0..INNER_MAX_ITER {
        let mut x = s.clone();
        for (j, &qj) in q.iter().enumerate() {
            x.column_mut(j).scale_mut(qj);
        }
        let svd = x.svd(true, true);
        let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
        // Y = V U†, and we need Re diag(Y S')
        let y = vt.adjoint() * u.adjoint();
        let ys = y * s;
        let c: Vec<f64> = (0..n).map(|k| ys[(k, k)].re).collect();
        let cn = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if cn == 0.0 {
            break;
        }
        let qn: Vec<f64> = c.iter().map(|v| v / cn).collect();
        let value = weighted_trace_norm(s, &qn);
        if value <= best + 1e-15 {
            if value > best {
                q = qn;
                best = value;
            }
            break;
        }
        q = qn;
        best = value;
    }
    (q, best.min(1.0))
}

fn probs_table(p: &[f64], da: usize, db: usize) -> DMatrix<f64> {
    let total: f64 = p.iter().sum();
    DMatrix::from_fn(da, db, |i, j| p[i * db + j] / total)
}

/// Objective at fixed bases: `d_B²` or `d_HS²`, plus the CC probabilities.
fn fixed_bases_objective(kind: DistanceKind, rho: &ComplexMatrix, rot: &Rotated) -> (f64, Vec<f64>) {
    match kind {
        DistanceKind::HilbertSchmidt => {
            let purity = qmat::frobenius_sq(rho);
            let diag_sq: f64 = rot.diag.iter().map(|v| v * v).sum();
            ((purity - diag_sq).max(0.0), rot.diag.clone())
        }
        _ => {
            let start: Vec<f64> = rot.diag.iter().map(|v| v.sqrt()).collect();
            let (q, f) = maximize_fidelity_over_simplex(&rot.sqrt_rot, &start);
            ((2.0 - 2.0 * f).max(0.0), q.iter().map(|v| v * v).collect())
        }
    }
}

/// Closest CC state with the given bases and its distance (`d_B²` or `d_HS`).
pub fn closest_cc_fixed_bases(
    rho: &MultipartiteState,
    bases: &LocalBasisPair,
    kind: DistanceKind,
) -> Result<(CcState, f64)> {
    kind.require_optimizable()?;
    check_bases(rho, bases)?;
    let m = rho.grouped_matrix();
    let sqrt_rho = hermitian_sqrt(&m)?;
    let rot = rotate(&m, &sqrt_rho, &bases.product());
    let (value, p) = fixed_bases_objective(kind, &m, &rot);
    let (da, db) = bases.dims();
    let cc = CcState {
        bases: bases.clone(),
        probs: probs_table(&p, da, db),
    };
    Ok((cc, report_value(kind, value)))
}

fn report_value(kind: DistanceKind, objective: f64) -> f64 {
    match kind {
        DistanceKind::HilbertSchmidt => objective.max(0.0).sqrt(),
        _ => objective.max(0.0),
    }
}

/// MID objective at fixed bases: `d(ρ, Π(ρ))`, squared for HS.
fn mid_objective(kind: DistanceKind, rho: &ComplexMatrix, rot: &Rotated) -> f64 {
    match kind {
        DistanceKind::HilbertSchmidt => {
            let diag_sq: f64 = rot.diag.iter().map(|v| v * v).sum();
            (qmat::frobenius_sq(rho) - diag_sq).max(0.0)
        }
        _ => {
            let q: Vec<f64> = rot.diag.iter().map(|v| v.sqrt()).collect();
            (2.0 - 2.0 * weighted_trace_norm(&rot.sqrt_rot, &q).min(1.0)).max(0.0)
        }
    }
}

/// Starting frames: restart 0 uses the marginal eigenbases, restart 1 the
/// computational bases, later restarts Haar-random frames.
pub(crate) fn starting_frames(rho: &MultipartiteState, seed: u64, k: usize) -> (ComplexMatrix, ComplexMatrix) {
    let (da, db) = rho.party_dims();
    match k {
        0 => {
            let bip = rho.as_bipartite();
            let ra = bip.reduce(&["b"]).expect("bipartite layout");
            let rb = bip.reduce(&["a"]).expect("bipartite layout");
            let ea = hermitian_eig(ra.matrix()).expect("square").eigenvectors;
            let eb = hermitian_eig(rb.matrix()).expect("square").eigenvectors;
            (ea, eb)
        }
        1 => (ComplexMatrix::identity(da, da), ComplexMatrix::identity(db, db)),
        _ => {
            let mut rng = seeded_rng(derive_seed(seed, k as u64));
            (haar_unitary(da, &mut rng), haar_unitary(db, &mut rng))
        }
    }
}

enum Problem {
    Geometric,
    Mid,
}

fn optimize_bases(
    rho: &MultipartiteState,
    kind: DistanceKind,
    problem: Problem,
    opts: &OptimOptions,
) -> Result<DiscordReport> {
    kind.require_optimizable()?;
    let (da, db) = rho.party_dims();
    let m = rho.grouped_matrix();
    let sqrt_rho = hermitian_sqrt(&m)?;
    let restarts = opts.restart_count(default_restarts(da, db));
    let bfgs_opts = opts.bfgs();
    let na = da * da;

    let ms = multistart(restarts, |k| {
        let (fa, fb) = starting_frames(rho, opts.seed, k);
        let objective = |x: &[f64]| {
            let w = tensor(&unitary_from_coords(&fa, &x[..na]), &unitary_from_coords(&fb, &x[na..]));
            let rot = rotate(&m, &sqrt_rho, &w);
            match problem {
                Problem::Geometric => fixed_bases_objective(kind, &m, &rot).0,
                Problem::Mid => mid_objective(kind, &m, &rot),
            }
        };
        let min = bfgs(&objective, vec![0.0; na + db * db], &bfgs_opts);
        RestartOutcome {
            value: min.value,
            converged: min.converged,
            payload: (fa, fb, min.x),
        }
    });

    let converged_fraction = ms.converged_fraction();
    let restart_values: Vec<f64> = ms.values().into_iter().map(|v| report_value(kind, v)).collect();
    let best = ms.into_best();
    let (fa, fb, x) = best.payload;
    let bases = LocalBasisPair::from_params(fa, fb, x[..na].to_vec(), x[na..].to_vec());
    let argmin = match problem {
        Problem::Geometric => {
            let rot = rotate(&m, &sqrt_rho, &bases.product());
            let (_, p) = fixed_bases_objective(kind, &m, &rot);
            DiscordArgmin::Cc(CcState {
                probs: probs_table(&p, da, db),
                bases,
            })
        }
        Problem::Mid => DiscordArgmin::Bases(bases),
    };
    Ok(DiscordReport {
        kind,
        value: report_value(kind, best.value),
        argmin,
        restarts,
        converged_fraction,
        bound_direction: BoundDirection::UpperBound,
        restart_values,
    })
}

/// `min_{σ ∈ CC} d(ρ, σ)` with `d = d_B²` or `d_HS`.
pub fn geometric_discord(rho: &MultipartiteState, kind: DistanceKind, opts: &OptimOptions) -> Result<DiscordReport> {
    optimize_bases(rho, kind, Problem::Geometric, opts)
}

/// `min_Π d(ρ, Π(ρ))` over local rank-one projective measurements.
pub fn mid(rho: &MultipartiteState, kind: DistanceKind, opts: &OptimOptions) -> Result<DiscordReport> {
    optimize_bases(rho, kind, Problem::Mid, opts)
}

/// Value of `d(ρ, Π(ρ))` for explicit bases (`d_B²` or `d_HS`).
pub fn mid_at(rho: &MultipartiteState, bases: &LocalBasisPair, kind: DistanceKind) -> Result<f64> {
    kind.require_optimizable()?;
    check_bases(rho, bases)?;
    let m = rho.grouped_matrix();
    let sqrt_rho = hermitian_sqrt(&m)?;
    let rot = rotate(&m, &sqrt_rho, &bases.product());
    Ok(report_value(kind, mid_objective(kind, &m, &rot)))
}

/// Appends `|0⟩⟨0|` of dimension `dim` to `party`; used by the ancilla-monotonicity checks.
pub fn with_ancilla(rho: &MultipartiteState, dim: usize, party: Party) -> Result<MultipartiteState> {
    rho.with_pure_ancilla("ancilla", dim, party)
}
