//! Distances between density matrices.

use std::fmt;

use crate::error::{CsentError, Result};
use crate::qmat::{
    self, basis_projector, hermitian_eig, hermitian_eigenvalues, hermitian_sqrt, partial_trace, tensor,
    trace_norm, ComplexMatrix, Factor, Party, SubsystemLayout,
};
use crate::states::MultipartiteState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    /// `d_B² = 2 − 2F`.
    BuresSquared,
    /// Frobenius norm of the difference.
    HilbertSchmidt,
    /// `½‖ρ − σ‖₁`.
    Trace,
    /// `tr ρ(log ρ − log σ)` in nats.
    RelativeEntropy,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 4] = [
        DistanceKind::BuresSquared,
        DistanceKind::HilbertSchmidt,
        DistanceKind::Trace,
        DistanceKind::RelativeEntropy,
    ];

    /// Kinds accepted by the optimizing quantifiers.
    pub fn is_optimizable(self) -> bool {
        matches!(self, DistanceKind::BuresSquared | DistanceKind::HilbertSchmidt)
    }

    pub fn require_optimizable(self) -> Result<()> {
        if self.is_optimizable() {
            Ok(())
        } else {
            Err(CsentError::UnsupportedKind(self.to_string()))
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DistanceKind::BuresSquared => "bures-squared",
            DistanceKind::HilbertSchmidt => "hilbert-schmidt",
            DistanceKind::Trace => "trace",
            DistanceKind::RelativeEntropy => "relative-entropy",
        };
        f.write_str(s)
    }
}

fn check_pair(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<()> {
    let n = qmat::check_square(rho)?;
    let m = qmat::check_square(sigma)?;
    if n != m {
        return Err(CsentError::Shape(format!("dimensions {n} and {m} differ")));
    }
    Ok(())
}

fn check_states(rho: &MultipartiteState, sigma: &MultipartiteState) -> Result<()> {
    if rho.layout().dims() != sigma.layout().dims() {
        return Err(CsentError::Shape(format!(
            "layouts {:?} and {:?} differ",
            rho.layout().dims(),
            sigma.layout().dims()
        )));
    }
    Ok(())
}

/// `F = ‖√ρ √σ‖₁ = tr √(√σ ρ √σ)`, clamped to `[0, 1]`.
pub fn fidelity_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    let sr = hermitian_sqrt(rho)?;
    let ss = hermitian_sqrt(sigma)?;
    Ok(trace_norm(&(sr * ss)).clamp(0.0, 1.0))
}

/// Fidelity through the spectrum of `√σ ρ √σ`; kept as an independent route.
pub fn fidelity_by_spectrum(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    let ss = hermitian_sqrt(sigma)?;
    let inner = &ss * rho * &ss;
    let spectrum = hermitian_eigenvalues(&inner)?;
    let floor = qmat::rounding_floor(&spectrum);
    let f: f64 = spectrum.iter().map(|&x| if x > floor { x.sqrt() } else { 0.0 }).sum();
    Ok(f.clamp(0.0, 1.0))
}

pub fn bures_sq_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    Ok((2.0 - 2.0 * fidelity_matrices(rho, sigma)?).max(0.0))
}

pub fn hs_distance_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    Ok((rho - sigma).norm())
}

pub fn trace_distance_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    Ok(0.5 * hermitian_eigenvalues(&(rho - sigma))?.iter().map(|x| x.abs()).sum::<f64>())
}

/// Infinite when the support of `ρ` is not contained in that of `σ`.
pub fn relative_entropy_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    const SUPPORT_TOL: f64 = 1e-12;
    let er = hermitian_eigenvalues(rho)?;
    let es = hermitian_eig(sigma)?;
    let mut cross = 0.0;
    for (k, &mu) in es.eigenvalues.iter().enumerate() {
        let v = es.eigenvectors.column(k);
        let weight = (v.adjoint() * rho * v)[(0, 0)].re;
        if mu <= SUPPORT_TOL {
            if weight > 1e-10 {
                return Ok(f64::INFINITY);
            }
        } else {
            cross += weight * mu.ln();
        }
    }
    let own: f64 = er.iter().filter(|&&x| x > SUPPORT_TOL).map(|&x| x * x.ln()).sum();
    Ok((own - cross).max(0.0))
}

pub fn distance_matrices(kind: DistanceKind, rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    match kind {
        DistanceKind::BuresSquared => bures_sq_matrices(rho, sigma),
        DistanceKind::HilbertSchmidt => hs_distance_matrices(rho, sigma),
        DistanceKind::Trace => trace_distance_matrices(rho, sigma),
        DistanceKind::RelativeEntropy => relative_entropy_matrices(rho, sigma),
    }
}

pub fn fidelity(rho: &MultipartiteState, sigma: &MultipartiteState) -> Result<f64> {
    check_states(rho, sigma)?;
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

pub fn bures_sq(rho: &MultipartiteState, sigma: &MultipartiteState) -> Result<f64> {
    check_states(rho, sigma)?;
    bures_sq_matrices(rho.matrix(), sigma.matrix())
}

/// Unsquared `d_B`, for reporting.
pub fn bures(rho: &MultipartiteState, sigma: &MultipartiteState) -> Result<f64> {
    Ok(bures_sq(rho, sigma)?.sqrt())
}

pub fn hs_distance(rho: &MultipartiteState, sigma: &MultipartiteState) -> Result<f64> {
    check_states(rho, sigma)?;
    hs_distance_matrices(rho.matrix(), sigma.matrix())
}

pub fn trace_distance(rho: &MultipartiteState, sigma: &MultipartiteState) -> Result<f64> {
    check_states(rho, sigma)?;
    trace_distance_matrices(rho.matrix(), sigma.matrix())
}

pub fn relative_entropy(rho: &MultipartiteState, sigma: &MultipartiteState) -> Result<f64> {
    check_states(rho, sigma)?;
    relative_entropy_matrices(rho.matrix(), sigma.matrix())
}

pub fn distance(kind: DistanceKind, rho: &MultipartiteState, sigma: &MultipartiteState) -> Result<f64> {
    check_states(rho, sigma)?;
    distance_matrices(kind, rho.matrix(), sigma.matrix())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AncillaInvarianceReport {
    pub kind: DistanceKind,
    /// Ancilla dimensions tried.
    pub ancilla_dims: Vec<usize>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Compares `d(ρ, σ)` with `d(ρ ⊗ |0⟩⟨0|, σ ⊗ |0⟩⟨0|)` for ancillas of dimension `2..=trials + 1`.
pub fn pure_ancilla_invariance_check(
    kind: DistanceKind,
    rho: &MultipartiteState,
    sigma: &MultipartiteState,
    trials: usize,
) -> Result<AncillaInvarianceReport> {
    let base = distance(kind, rho, sigma)?;
    let mut max_deviation: f64 = 0.0;
    let mut dims = Vec::new();
    for d in 2..=trials + 1 {
        if rho.dim() * d > qmat::MAX_DIM {
            break;
        }
        let r = rho.with_pure_ancilla("ancilla", d, Party::A)?;
        let s = sigma.with_pure_ancilla("ancilla", d, Party::A)?;
        let ext = distance(kind, &r, &s)?;
        let dev = if base.is_infinite() && ext.is_infinite() {
            0.0
        } else {
            (ext - base).abs()
        };
        max_deviation = max_deviation.max(dev);
        dims.push(d);
    }
    Ok(AncillaInvarianceReport {
        kind,
        ancilla_dims: dims,
        max_deviation,
        pass: max_deviation <= 1e-10,
    })
}

/// A state pair and a channel under which the Hilbert-Schmidt distance grows.
#[derive(Debug, Clone)]
pub struct NonContractivityWitness {
    pub channel: String,
    pub rho: MultipartiteState,
    pub sigma: MultipartiteState,
    pub hs_before: f64,
    pub hs_after: f64,
    pub bures_before: f64,
    pub bures_after: f64,
}

impl NonContractivityWitness {
    pub fn ratio(&self) -> f64 {
        self.hs_after / self.hs_before
    }
}

/// `ρ = |0⟩⟨0| ⊗ I/d`, `σ = |1⟩⟨1| ⊗ I/d`, channel = trace out the maximally mixed factor.
pub fn hs_noncontractivity_witness_with(d: usize) -> Result<NonContractivityWitness> {
    if d < 2 {
        return Err(CsentError::Domain(format!("ancilla dimension {d} must be at least 2")));
    }
    let layout = SubsystemLayout::new(vec![Factor::new("a", 2, Party::A), Factor::new("mixed", d, Party::B)])?;
    let mixed = ComplexMatrix::identity(d, d).unscale(d as f64);
    let rho = MultipartiteState::from_parts(tensor(&basis_projector(2, 0), &mixed), layout.clone());
    let sigma = MultipartiteState::from_parts(tensor(&basis_projector(2, 1), &mixed), layout.clone());
    let (r, _) = partial_trace(rho.matrix(), &layout, &["mixed"])?;
    let (s, _) = partial_trace(sigma.matrix(), &layout, &["mixed"])?;
    Ok(NonContractivityWitness {
        channel: format!("partial trace over the maximally mixed factor of dimension {d}"),
        hs_before: hs_distance(&rho, &sigma)?,
        hs_after: hs_distance_matrices(&r, &s)?,
        bures_before: bures_sq(&rho, &sigma)?,
        bures_after: bures_sq_matrices(&r, &s)?,
        rho,
        sigma,
    })
}

pub fn hs_noncontractivity_witness() -> NonContractivityWitness {
    hs_noncontractivity_witness_with(2).expect("fixed construction is valid")
}
