//! Party-labeled quantum states, Schmidt analysis, separability oracles,
//! and the named state families used throughout the tests.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{CsentError, Result};
use crate::qmat::{
    self, basis_vector, c, check_max_dim, cr, hermitian_eig, hermitian_eigenvalues, hermitian_sqrt,
    permute_factors, projector, real_trace, tensor, tensor_vec, ComplexMatrix, Factor, Party, StateVector,
    SubsystemLayout, PSD_CLIP, ZERO,
};

/// Tolerance for Hermiticity and unit trace when validating external input.
pub const STATE_TOL: f64 = 1e-10;

/// Eigenvalues at or below this are treated as zero when counting rank.
pub const RANK_TOL: f64 = 1e-12;

/// A density matrix together with the layout of its tensor factors.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipartiteState {
    matrix: ComplexMatrix,
    layout: SubsystemLayout,
}

impl MultipartiteState {
    /// Validates Hermiticity, positivity, and unit trace.
    pub fn new(matrix: ComplexMatrix, layout: SubsystemLayout) -> Result<Self> {
        let s = MultipartiteState { matrix, layout };
        s.validate()?;
        Ok(s)
    }

    /// Skips validation; used for states that are valid by construction.
    pub fn from_parts(matrix: ComplexMatrix, layout: SubsystemLayout) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        MultipartiteState { matrix, layout }
    }

    pub fn bipartite(matrix: ComplexMatrix, da: usize, db: usize) -> Result<Self> {
        MultipartiteState::new(matrix, SubsystemLayout::bipartite(da, db))
    }

    pub fn pure(psi: &StateVector, layout: SubsystemLayout) -> Result<Self> {
        layout.check_dim(psi.len())?;
        check_normalized(psi)?;
        Ok(MultipartiteState {
            matrix: projector(psi),
            layout,
        })
    }

    pub fn pure_bipartite(psi: &StateVector, da: usize, db: usize) -> Result<Self> {
        MultipartiteState::pure(psi, SubsystemLayout::bipartite(da, db))
    }

    pub fn validate(&self) -> Result<()> {
        let n = qmat::check_square(&self.matrix)?;
        self.layout.check_dim(n)?;
        check_max_dim(n)?;
        let dev = qmat::hermiticity_deviation(&self.matrix);
        if dev > STATE_TOL {
            return Err(CsentError::NotHermitian { deviation: dev });
        }
        let tr = real_trace(&self.matrix);
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(CsentError::Trace { trace: tr });
        }
        let min = hermitian_eigenvalues(&self.matrix)?[0];
        if min < -PSD_CLIP {
            return Err(CsentError::NotPsd { min_eigenvalue: min });
        }
        Ok(())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn into_parts(self) -> (ComplexMatrix, SubsystemLayout) {
        (self.matrix, self.layout)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        qmat::frobenius_sq(&self.matrix)
    }

    /// Dimensions of the A and B groups.
    pub fn party_dims(&self) -> (usize, usize) {
        (self.layout.party_dim(Party::A), self.layout.party_dim(Party::B))
    }

    /// Matrix with all party-A factors moved in front of the party-B factors.
    pub fn grouped_matrix(&self) -> ComplexMatrix {
        let order = self.layout.grouped_order();
        if order == self.layout.labels() {
            return self.matrix.clone();
        }
        permute_factors(&self.matrix, &self.layout, &order)
            .expect("grouped order is a permutation of the layout")
            .0
    }

    /// Collapses the layout to two factors `a | b` by party.
    pub fn as_bipartite(&self) -> MultipartiteState {
        let (da, db) = self.party_dims();
        MultipartiteState {
            matrix: self.grouped_matrix(),
            layout: SubsystemLayout::bipartite(da, db),
        }
    }

    pub fn reduce(&self, discard: &[&str]) -> Result<MultipartiteState> {
        let (m, l) = qmat::partial_trace(&self.matrix, &self.layout, discard)?;
        Ok(MultipartiteState { matrix: m, layout: l })
    }

    /// Keeps only the listed factors (in layout order).
    pub fn marginal(&self, keep: &[&str]) -> Result<MultipartiteState> {
        for l in keep {
            self.layout.position(l)?;
        }
        let labels = self.layout.labels();
        let discard: Vec<&str> = labels.iter().copied().filter(|l| !keep.contains(l)).collect();
        self.reduce(&discard)
    }

    pub fn reordered(&self, order: &[&str]) -> Result<MultipartiteState> {
        let (m, l) = permute_factors(&self.matrix, &self.layout, order)?;
        Ok(MultipartiteState { matrix: m, layout: l })
    }

    /// `self ⊗ other`, concatenating layouts.
    pub fn tensor(&self, other: &MultipartiteState) -> Result<MultipartiteState> {
        let mut factors = self.layout.factors().to_vec();
        factors.extend(other.layout.factors().iter().cloned());
        let layout = SubsystemLayout::new(factors)?;
        check_max_dim(layout.total_dim())?;
        Ok(MultipartiteState {
            matrix: tensor(&self.matrix, &other.matrix),
            layout,
        })
    }

    /// Appends `|0⟩⟨0|` on a new factor.
    pub fn with_pure_ancilla(&self, label: &str, dim: usize, party: Party) -> Result<MultipartiteState> {
        let layout = self.layout.with_factor(Factor::new(label, dim, party))?;
        check_max_dim(layout.total_dim())?;
        Ok(MultipartiteState {
            matrix: tensor(&self.matrix, &qmat::basis_projector(dim, 0)),
            layout,
        })
    }

    /// `U ρ U†` for a unitary on the full space.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<MultipartiteState> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(CsentError::Shape(format!(
                "unitary is {}x{}, state has dimension {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        Ok(MultipartiteState {
            matrix: u * &self.matrix * u.adjoint(),
            layout: self.layout.clone(),
        })
    }

    /// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†` with the unitaries acting on the grouped parties.
    pub fn local_unitary(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Result<MultipartiteState> {
        let bip = self.as_bipartite();
        let (da, db) = bip.party_dims();
        if ua.nrows() != da || ub.nrows() != db {
            return Err(CsentError::Shape(format!(
                "local unitaries are {}/{}, parties have dimensions {da}/{db}",
                ua.nrows(),
                ub.nrows()
            )));
        }
        bip.conjugate(&tensor(ua, ub))
    }

    pub fn rank(&self) -> usize {
        hermitian_eigenvalues(&self.matrix)
            .map(|v| v.iter().filter(|&&x| x > RANK_TOL).count())
            .unwrap_or(0)
    }
}

fn check_normalized(psi: &StateVector) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(CsentError::Normalization { norm });
    }
    Ok(())
}

/// Schmidt decomposition `ψ = Σ_j s_j |x_j⟩|y_j⟩`.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    /// Descending, nonnegative.
    pub coefficients: Vec<f64>,
    /// Columns `x_j`, `da × k`.
    pub left: ComplexMatrix,
    /// Columns `y_j`, `db × k`.
    pub right: ComplexMatrix,
}

impl SchmidtForm {
    pub fn reconstruct(&self) -> StateVector {
        let (da, db) = (self.left.nrows(), self.right.nrows());
        let mut v = StateVector::zeros(da * db);
        for (j, &s) in self.coefficients.iter().enumerate() {
            v += tensor_vec(&self.left.column(j).into_owned(), &self.right.column(j).into_owned()).scale(s);
        }
        v
    }

    pub fn largest(&self) -> f64 {
        self.coefficients[0]
    }
}

/// Reshapes a vector on `da ⊗ db` into the `da × db` coefficient matrix.
pub fn coefficient_matrix(psi: &StateVector, da: usize, db: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(da, db, |i, j| psi[i * db + j])
}

pub fn schmidt(psi: &StateVector, da: usize, db: usize) -> Result<SchmidtForm> {
    if psi.len() != da * db {
        return Err(CsentError::Shape(format!(
            "vector of length {} is not on {da}x{db}",
            psi.len()
        )));
    }
    check_normalized(psi)?;
    let svd = coefficient_matrix(psi, da, db).svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut left = ComplexMatrix::zeros(da, k);
    let mut right = ComplexMatrix::zeros(db, k);
    let mut coefficients = Vec::with_capacity(k);
    for (col, &j) in order.iter().enumerate() {
        coefficients.push(svd.singular_values[j]);
        left.set_column(col, &u.column(j));
        for b in 0..db {
            right[(b, col)] = vt[(j, b)];
        }
    }
    Ok(SchmidtForm {
        coefficients,
        left,
        right,
    })
}

/// Result of the PPT test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptCertificate {
    pub ppt: bool,
    pub min_eigenvalue: f64,
    /// True when PPT is equivalent to separability (2×2 and 2×3).
    pub exact: bool,
}

/// Partial transpose over the party-B group.
pub fn partial_transpose_b(rho: &MultipartiteState) -> ComplexMatrix {
    let (da, db) = rho.party_dims();
    let m = rho.grouped_matrix();
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    out[(a * db + b, a2 * db + b2)] = m[(a * db + b2, a2 * db + b)];
                }
            }
        }
    }
    out
}

pub fn is_ppt(rho: &MultipartiteState, tol: f64) -> PptCertificate {
    let (da, db) = rho.party_dims();
    let min = hermitian_eigenvalues(&partial_transpose_b(rho)).expect("square")[0];
    let small = da.min(db);
    let large = da.max(db);
    PptCertificate {
        ppt: min >= -tol,
        min_eigenvalue: min,
        exact: small == 1 || (small == 2 && large <= 3),
    }
}

fn sigma_y_y() -> ComplexMatrix {
    let y = ComplexMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]);
    tensor(&y, &y)
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence_2q(rho: &MultipartiteState) -> Result<f64> {
    if rho.party_dims() != (2, 2) {
        let (da, db) = rho.party_dims();
        return Err(CsentError::Shape(format!("concurrence needs 2x2, got {da}x{db}")));
    }
    let m = rho.grouped_matrix();
    let yy = sigma_y_y();
    let flipped = &yy * m.conjugate() * &yy;
    let s = hermitian_sqrt(&m)?;
    let r = &s * flipped * &s;
    let mut lambdas: Vec<f64> = hermitian_eigenvalues(&r)?.iter().map(|x| x.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Closed-form Bures entanglement of a two-qubit state with concurrence `c`:
/// `2 − 2·sqrt((1 + sqrt(1 − c²))/2)`.
pub fn bures_entanglement_from_concurrence(conc: f64) -> f64 {
    let c2 = conc.clamp(0.0, 1.0).powi(2);
    2.0 - 2.0 * ((1.0 + (1.0 - c2).sqrt()) / 2.0).sqrt()
}

fn check_unitary(u: &ComplexMatrix, what: &str) -> Result<()> {
    let dev = qmat::unitarity_deviation(u);
    if u.nrows() != u.ncols() || dev > STATE_TOL {
        return Err(CsentError::Domain(format!("{what} is not unitary (deviation {dev:e})")));
    }
    Ok(())
}

fn check_probabilities<'a>(probs: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    let mut sum = 0.0;
    for &p in probs {
        if !(p >= 0.0) {
            return Err(CsentError::Domain(format!("negative probability {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-12 {
        return Err(CsentError::Domain(format!("probabilities sum to {sum}")));
    }
    Ok(())
}

/// `Σ_ij p_ij |α_i⟩⟨α_i| ⊗ |β_j⟩⟨β_j|` with bases given as unitary columns.
pub fn make_cc(basis_a: &ComplexMatrix, basis_b: &ComplexMatrix, probs: &DMatrix<f64>) -> Result<MultipartiteState> {
    check_unitary(basis_a, "basis_a")?;
    check_unitary(basis_b, "basis_b")?;
    let (da, db) = (basis_a.nrows(), basis_b.nrows());
    if probs.nrows() != da || probs.ncols() != db {
        return Err(CsentError::Shape(format!(
            "probability table is {}x{}, expected {da}x{db}",
            probs.nrows(),
            probs.ncols()
        )));
    }
    check_probabilities(probs.iter())?;
    let w = tensor(basis_a, basis_b);
    let diag = ComplexMatrix::from_diagonal(&qmat::StateVector::from_iterator(
        da * db,
        (0..da).flat_map(|i| (0..db).map(move |j| (i, j))).map(|(i, j)| cr(probs[(i, j)])),
    ));
    let m = qmat::symmetrize(&(&w * diag * w.adjoint()));
    Ok(MultipartiteState::from_parts(m, SubsystemLayout::bipartite(da, db)))
}

/// One term `s_l |a_l⟩⟨a_l| ⊗ |b_l⟩⟨b_l|` of a product-state ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm {
    pub weight: f64,
    pub a: StateVector,
    pub b: StateVector,
}

pub fn check_product_ensemble(ensemble: &[ProductTerm]) -> Result<(usize, usize)> {
    let first = ensemble
        .first()
        .ok_or_else(|| CsentError::Domain("empty ensemble".into()))?;
    let (da, db) = (first.a.len(), first.b.len());
    for t in ensemble {
        if t.a.len() != da || t.b.len() != db {
            return Err(CsentError::Shape("ensemble members have different dimensions".into()));
        }
        check_normalized(&t.a)?;
        check_normalized(&t.b)?;
    }
    check_probabilities(ensemble.iter().map(|t| &t.weight))?;
    Ok((da, db))
}

pub fn make_separable(ensemble: &[ProductTerm]) -> Result<MultipartiteState> {
    let (da, db) = check_product_ensemble(ensemble)?;
    let mut m = ComplexMatrix::zeros(da * db, da * db);
    for t in ensemble {
        m += projector(&tensor_vec(&t.a, &t.b)).scale(t.weight);
    }
    Ok(MultipartiteState::from_parts(
        qmat::symmetrize(&m),
        SubsystemLayout::bipartite(da, db),
    ))
}

/// Pure-state decomposition `ρ = Σ p_i |ψ_i⟩⟨ψ_i|`.
#[derive(Debug, Clone)]
pub struct EnsembleDecomposition {
    pub weights: Vec<f64>,
    pub states: Vec<StateVector>,
}

impl EnsembleDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.states[0].len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (p, s) in self.weights.iter().zip(&self.states) {
            m += projector(s).scale(*p);
        }
        m
    }
}

/// Label used for the purifying factor.
pub const PURIFIER: &str = "purifier";

/// Purification on `layout ⊗ purifier`, with purifier dimension equal to `rank(ρ)`.
pub fn purify(rho: &MultipartiteState) -> Result<(StateVector, SubsystemLayout)> {
    let eig = hermitian_eig(rho.matrix())?;
    let kept: Vec<usize> = (0..eig.eigenvalues.len())
        .rev()
        .filter(|&k| eig.eigenvalues[k] > RANK_TOL)
        .collect();
    let r = kept.len().max(1);
    let layout = rho.layout().with_factor(Factor::new(PURIFIER, r, Party::B))?;
    let n = rho.dim();
    let mut psi = StateVector::zeros(n * r);
    for (slot, &k) in kept.iter().enumerate() {
        let amp = eig.eigenvalues[k].sqrt();
        for i in 0..n {
            psi[i * r + slot] = eig.eigenvectors[(i, k)] * amp;
        }
    }
    let norm = psi.norm();
    Ok((psi.unscale(norm), layout))
}

/// Bell states in the order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
pub fn bell_vector(k: usize) -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = match k {
        0 => [s, 0.0, 0.0, s],
        1 => [s, 0.0, 0.0, -s],
        2 => [0.0, s, s, 0.0],
        3 => [0.0, s, -s, 0.0],
        _ => panic!("bell index {k} out of range"),
    };
    StateVector::from_iterator(4, v.iter().map(|&x| cr(x)))
}

pub fn bell_state(k: usize) -> MultipartiteState {
    MultipartiteState::from_parts(projector(&bell_vector(k)), SubsystemLayout::bipartite(2, 2))
}

/// `cos θ|00⟩ + sin θ|11⟩`.
pub fn partially_entangled_vector(theta: f64) -> StateVector {
    StateVector::from_vec(vec![cr(theta.cos()), ZERO, ZERO, cr(theta.sin())])
}

pub fn partially_entangled(theta: f64) -> MultipartiteState {
    MultipartiteState::from_parts(
        projector(&partially_entangled_vector(theta)),
        SubsystemLayout::bipartite(2, 2),
    )
}

pub fn product_vector(da: usize, a: usize, db: usize, b: usize) -> StateVector {
    tensor_vec(&basis_vector(da, a), &basis_vector(db, b))
}

/// `p|Ψ⁻⟩⟨Ψ⁻| + (1 − p) I/4`.
pub fn werner(p: f64) -> MultipartiteState {
    let m = projector(&bell_vector(3)).scale(p) + ComplexMatrix::identity(4, 4).scale((1.0 - p) / 4.0);
    MultipartiteState::from_parts(m, SubsystemLayout::bipartite(2, 2))
}

/// Mixture of Bell states with weights for Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
pub fn bell_diagonal(weights: [f64; 4]) -> Result<MultipartiteState> {
    check_probabilities(weights.iter())?;
    let mut m = ComplexMatrix::zeros(4, 4);
    for (k, &w) in weights.iter().enumerate() {
        m += projector(&bell_vector(k)).scale(w);
    }
    Ok(MultipartiteState::from_parts(m, SubsystemLayout::bipartite(2, 2)))
}

pub fn random_pure_state<R: Rng + ?Sized>(da: usize, db: usize, rng: &mut R) -> MultipartiteState {
    let psi = qmat::haar_pure(da * db, rng);
    MultipartiteState::from_parts(projector(&psi), SubsystemLayout::bipartite(da, db))
}

pub fn random_mixed_state<R: Rng + ?Sized>(da: usize, db: usize, rank: usize, rng: &mut R) -> Result<MultipartiteState> {
    let m = qmat::haar_density(da * db, rank, rng)?;
    Ok(MultipartiteState::from_parts(m, SubsystemLayout::bipartite(da, db)))
}

/// Random product ensemble with Dirichlet(1) weights.
pub fn random_product_ensemble<R: Rng + ?Sized>(da: usize, db: usize, terms: usize, rng: &mut R) -> Vec<ProductTerm> {
    let raw: Vec<f64> = (0..terms).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut ensemble: Vec<ProductTerm> = raw
        .iter()
        .map(|w| ProductTerm {
            weight: w / total,
            a: qmat::haar_pure(da, rng),
            b: qmat::haar_pure(db, rng),
        })
        .collect();
    // exact normalization of the weights
    let sum: f64 = ensemble.iter().map(|t| t.weight).sum();
    let last = ensemble.len() - 1;
    ensemble[last].weight += 1.0 - sum;
    ensemble
}

pub fn random_separable<R: Rng + ?Sized>(da: usize, db: usize, terms: usize, rng: &mut R) -> MultipartiteState {
    make_separable(&random_product_ensemble(da, db, terms, rng)).expect("generated ensemble is valid")
}

/// CC state in Haar-random local bases with Dirichlet(1) joint probabilities.
pub fn random_cc<R: Rng + ?Sized>(da: usize, db: usize, rng: &mut R) -> MultipartiteState {
    let ua = qmat::haar_unitary(da, rng);
    let ub = qmat::haar_unitary(db, rng);
    let raw: Vec<f64> = (0..da * db).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut probs = DMatrix::from_fn(da, db, |i, j| raw[i * db + j] / total);
    let sum: f64 = probs.iter().sum();
    probs[(da - 1, db - 1)] += 1.0 - sum;
    make_cc(&ua, &ub, &probs).expect("generated CC data is valid")
}

/// Two-sided dephasing `Σ_ij ⟨α_iβ_j|ρ|α_iβ_j⟩ |α_iβ_j⟩⟨α_iβ_j|` in the given local bases.
pub fn dephase_in_bases(rho: &ComplexMatrix, basis_a: &ComplexMatrix, basis_b: &ComplexMatrix) -> ComplexMatrix {
    let w = tensor(basis_a, basis_b);
    let inner = w.adjoint() * rho * &w;
    let diag = ComplexMatrix::from_diagonal(&inner.diagonal().map(|z| cr(z.re)));
    &w * diag * w.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{haar_unitary, max_abs, seeded_rng};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn schmidt_examples() {
        let s = schmidt(&bell_vector(0), 2, 2).unwrap();
        assert!((s.coefficients[0] - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((s.coefficients[1] - FRAC_1_SQRT_2).abs() < 1e-14);
        let s = schmidt(&product_vector(2, 0, 2, 1), 2, 2).unwrap();
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14 && s.coefficients[1].abs() < 1e-14);
        let t = PI / 6.0;
        let s = schmidt(&partially_entangled_vector(t), 2, 2).unwrap();
        assert!((s.coefficients[0] - t.cos()).abs() < 1e-14);
        assert!((s.coefficients[1] - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn schmidt_reconstructs_and_rejects_unnormalized() {
        let psi = qmat::random_pure(12, 3);
        let s = schmidt(&psi, 3, 4).unwrap();
        assert!((s.reconstruct() - &psi).camax() < 1e-10);
        assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
        let sum: f64 = s.coefficients.iter().map(|x| x * x).sum();
        assert!((sum - 1.0).abs() < 1e-10);
        let bad = psi.scale(1.1);
        assert!(matches!(schmidt(&bad, 3, 4), Err(CsentError::Normalization { .. })));
    }

    #[test]
    fn schmidt_invariant_under_local_unitaries() {
        let mut rng = seeded_rng(17);
        for _ in 0..20 {
            let psi = qmat::haar_pure(6, &mut rng);
            let u = tensor(&haar_unitary(2, &mut rng), &haar_unitary(3, &mut rng));
            let a = schmidt(&psi, 2, 3).unwrap();
            let b = schmidt(&(u * &psi), 2, 3).unwrap();
            for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ppt_examples() {
        let cert = is_ppt(&bell_state(0), 1e-12);
        assert!(!cert.ppt && cert.exact);
        assert!((cert.min_eigenvalue + 0.5).abs() < 1e-12);
        let prod = MultipartiteState::pure_bipartite(&product_vector(2, 1, 3, 2), 2, 3).unwrap();
        let cert = is_ppt(&prod, 1e-12);
        assert!(cert.ppt && cert.exact);
    }

    #[test]
    fn werner_ppt_threshold() {
        for &p in &[0.0, 0.1, 0.3, 1.0 / 3.0 - 1e-9, 0.34, 0.5, 0.9, 1.0] {
            let cert = is_ppt(&werner(p), 1e-12);
            assert!((cert.min_eigenvalue - (1.0 - 3.0 * p) / 4.0).abs() < 1e-12, "p = {p}");
            assert_eq!(cert.ppt, p <= 1.0 / 3.0, "p = {p}");
        }
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence_2q(&bell_state(0)).unwrap() - 1.0).abs() < 1e-7);
        let prod = MultipartiteState::pure_bipartite(&product_vector(2, 0, 2, 1), 2, 2).unwrap();
        assert!(concurrence_2q(&prod).unwrap() < 1e-7);
        assert!((concurrence_2q(&werner(2.0 / 3.0)).unwrap() - 0.5).abs() < 1e-10);
        let bad = MultipartiteState::pure_bipartite(&qmat::random_pure(6, 1), 2, 3).unwrap();
        assert!(matches!(concurrence_2q(&bad), Err(CsentError::Shape(_))));
    }

    #[test]
    fn concurrence_of_pure_matches_schmidt() {
        let mut rng = seeded_rng(4);
        for _ in 0..20 {
            let psi = qmat::haar_pure(4, &mut rng);
            let s = schmidt(&psi, 2, 2).unwrap();
            let expected = 2.0 * s.coefficients[0] * s.coefficients[1];
            let rho = MultipartiteState::pure_bipartite(&psi, 2, 2).unwrap();
            assert!((concurrence_2q(&rho).unwrap() - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn ppt_and_concurrence_agree_on_two_qubits() {
        let mut rng = seeded_rng(2024);
        let mut entangled = 0;
        for k in 0..500 {
            let rank = 1 + k % 4;
            let rho = random_mixed_state(2, 2, rank, &mut rng).unwrap();
            let conc = concurrence_2q(&rho).unwrap();
            let cert = is_ppt(&rho, 1e-12);
            // a margin avoids sampling right at the boundary
            if conc > 1e-6 {
                assert!(!cert.ppt, "sample {k}: C = {conc}, min eig {}", cert.min_eigenvalue);
                entangled += 1;
            } else if cert.min_eigenvalue < -1e-6 {
                panic!("sample {k}: NPT but C = {conc}");
            }
        }
        assert!(entangled > 50);
    }

    #[test]
    fn make_cc_examples() {
        let i2 = ComplexMatrix::identity(2, 2);
        let probs = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let s = make_cc(&i2, &i2, &probs).unwrap();
        let expected = (projector(&product_vector(2, 0, 2, 0)) + projector(&product_vector(2, 1, 2, 1))).scale(0.5);
        assert!(max_abs(&(s.matrix() - expected)) < 1e-15);
        let neg = DMatrix::from_row_slice(2, 2, &[0.6, -0.1, 0.0, 0.5]);
        assert!(matches!(make_cc(&i2, &i2, &neg), Err(CsentError::Domain(_))));
    }

    #[test]
    fn make_cc_is_fixed_by_its_own_dephasing() {
        let mut rng = seeded_rng(77);
        for _ in 0..30 {
            let ua = haar_unitary(2, &mut rng);
            let ub = haar_unitary(3, &mut rng);
            let raw: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let t: f64 = raw.iter().sum();
            let mut probs = DMatrix::from_fn(2, 3, |i, j| raw[i * 3 + j] / t);
            let s: f64 = probs.iter().sum();
            probs[(1, 2)] += 1.0 - s;
            let cc = make_cc(&ua, &ub, &probs).unwrap();
            let back = dephase_in_bases(cc.matrix(), &ua, &ub);
            assert!(max_abs(&(back - cc.matrix())) <= 1e-12);
        }
    }

    #[test]
    fn separable_states_are_ppt() {
        let mut rng = seeded_rng(5);
        for terms in 1..8 {
            let s = random_separable(2, 2, terms, &mut rng);
            s.validate().unwrap();
            assert!(is_ppt(&s, 1e-12).ppt);
        }
    }

    #[test]
    fn purification_examples() {
        let psi = bell_vector(2);
        let rho = MultipartiteState::pure_bipartite(&psi, 2, 2).unwrap();
        let (v, l) = purify(&rho).unwrap();
        assert_eq!(l.dim_of(PURIFIER).unwrap(), 1);
        assert!((v - &psi).camax() < 1e-12 || (projector(&purify(&rho).unwrap().0) - rho.matrix()).camax() < 1e-12);

        let mixed = MultipartiteState::new(ComplexMatrix::identity(2, 2).scale(0.5), SubsystemLayout::new(vec![Factor::new("a", 2, Party::A)]).unwrap()).unwrap();
        let (v, l) = purify(&mixed).unwrap();
        let full = MultipartiteState::pure(&v, l).unwrap();
        let back = full.reduce(&[PURIFIER]).unwrap();
        assert!(max_abs(&(back.matrix() - mixed.matrix())) < 1e-12);
        // maximally entangled with the purifier
        let s = schmidt(&v, 2, 2).unwrap();
        assert!((s.coefficients[0] - FRAC_1_SQRT_2).abs() < 1e-12);

        let r3 = random_mixed_state(2, 2, 3, &mut seeded_rng(3)).unwrap();
        let (v, l) = purify(&r3).unwrap();
        assert_eq!(l.dim_of(PURIFIER).unwrap(), 3);
        let back = MultipartiteState::pure(&v, l).unwrap().reduce(&[PURIFIER]).unwrap();
        assert!(max_abs(&(back.matrix() - r3.matrix())) <= 1e-10);
    }

    #[test]
    fn validation_reports_each_invariant() {
        let l = SubsystemLayout::bipartite(1, 2);
        let non_herm = ComplexMatrix::from_row_slice(2, 2, &[cr(0.5), cr(0.1), ZERO, cr(0.5)]);
        assert!(matches!(MultipartiteState::new(non_herm, l.clone()), Err(CsentError::NotHermitian { .. })));
        let bad_trace = ComplexMatrix::identity(2, 2);
        assert!(matches!(MultipartiteState::new(bad_trace, l.clone()), Err(CsentError::Trace { .. })));
        let non_psd = ComplexMatrix::from_row_slice(2, 2, &[cr(1.1), ZERO, ZERO, cr(-0.1)]);
        assert!(matches!(MultipartiteState::new(non_psd, l), Err(CsentError::NotPsd { .. })));
    }

    #[test]
    fn bures_closed_form_anchors() {
        assert!(bures_entanglement_from_concurrence(0.0).abs() < 1e-15);
        assert!((bures_entanglement_from_concurrence(1.0) - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        let t = PI / 6.0;
        let conc = (2.0 * t).sin();
        assert!((bures_entanglement_from_concurrence(conc) - (2.0 - 2.0 * t.cos())).abs() < 1e-14);
    }
}
