//! Cross-symmetric extensions (CSEs): constructors and a residual verifier.
//!
//! Extensions use six factors. Party A holds `a1` (the original `a`), `a1p`
//! (dimension of `b`) and the flag register `a2p`; party B holds `b1` (the
//! original `b`), `b1p` (dimension of `a`) and `b2p`. A witness is a unitary on
//! `a1 ⊗ a1p ⊗ a2p` after which the state is invariant under both swaps
//! `a1 ↔ b1p` and `a1p ↔ b1`.

use crate::error::{CsentError, Result};
use crate::qmat::{
    self, apply_swap, basis_vector, check_max_dim, embed_operator, hermitian_eig, max_abs, permute_factors,
    permute_vector, projector, tensor, tensor_vec, ComplexMatrix, Factor, Party, StateVector, SubsystemLayout,
};
use crate::states::{check_product_ensemble, schmidt, MultipartiteState, ProductTerm, RANK_TOL};

pub const A1: &str = "a1";
pub const A1P: &str = "a1p";
pub const A2P: &str = "a2p";
pub const B1: &str = "b1";
pub const B1P: &str = "b1p";
pub const B2P: &str = "b2p";

/// Labels of party A's factors, in witness order.
pub const PARTY_A: [&str; 3] = [A1, A1P, A2P];

pub fn cse_layout(da: usize, db: usize, flags: usize) -> SubsystemLayout {
    SubsystemLayout::new(vec![
        Factor::new(A1, da, Party::A),
        Factor::new(A1P, db, Party::A),
        Factor::new(A2P, flags, Party::A),
        Factor::new(B1, db, Party::B),
        Factor::new(B1P, da, Party::B),
        Factor::new(B2P, flags, Party::B),
    ])
    .expect("fixed labels are distinct")
}

/// Total dimension of a six-factor extension.
pub fn extension_dim(da: usize, db: usize, flags: usize) -> usize {
    (da * db * flags).pow(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CseCandidate {
    pub state: MultipartiteState,
    /// Labels of the original bipartite factors inside `state`.
    pub original: (String, String),
    pub witness_a1_b1p: ComplexMatrix,
    pub witness_a1p_b1: ComplexMatrix,
}

impl CseCandidate {
    pub fn original_dims(&self) -> (usize, usize) {
        let l = self.state.layout();
        (
            l.dim_of(&self.original.0).expect("original label present"),
            l.dim_of(&self.original.1).expect("original label present"),
        )
    }

    pub fn flag_dim(&self) -> usize {
        self.state.layout().dim_of(A2P).unwrap_or(1)
    }

    /// Reduced state on the original factors as a bipartite `a | b` state.
    pub fn marginal(&self) -> Result<MultipartiteState> {
        let (a, b) = (self.original.0.as_str(), self.original.1.as_str());
        let m = self.state.marginal(&[a, b])?;
        let (da, db) = self.original_dims();
        let ordered = m.reordered(&[a, b])?;
        Ok(MultipartiteState::from_parts(
            ordered.matrix().clone(),
            SubsystemLayout::bipartite(da, db),
        ))
    }
}

/// Extends an orthonormal family (columns) to a unitary; new columns come
/// from Gram-Schmidt on the standard basis.
pub fn complete_orthonormal(family: &ComplexMatrix) -> ComplexMatrix {
    let n = family.nrows();
    let mut cols: Vec<StateVector> = (0..family.ncols()).map(|j| family.column(j).into_owned()).collect();
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = basis_vector(n, k);
        for _ in 0..2 {
            for c in &cols {
                let overlap = c.dotc(&v);
                v -= c * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v.unscale(norm));
        }
    }
    ComplexMatrix::from_columns(&cols)
}

/// Unitary on `a1 ⊗ a1p` (dims `da`, `db`) sending `|x_j⟩|0⟩ ↦ |0⟩|y_j⟩`
/// for the Schmidt vectors of `psi`.
pub fn pure_witness(psi: &StateVector, da: usize, db: usize) -> Result<ComplexMatrix> {
    let sf = schmidt(psi, da, db)?;
    let k = sf.coefficients.len();
    let n = da * db;
    let mut inputs = ComplexMatrix::zeros(n, k);
    let mut outputs = ComplexMatrix::zeros(n, k);
    for j in 0..k {
        let x = sf.left.column(j).into_owned();
        let y = sf.right.column(j).into_owned();
        inputs.set_column(j, &tensor_vec(&x, &basis_vector(db, 0)));
        outputs.set_column(j, &tensor_vec(&basis_vector(da, 0), &y));
    }
    let inn = complete_orthonormal(&inputs);
    let out = complete_orthonormal(&outputs);
    Ok(out * inn.adjoint())
}

/// Builds `Σ_i √w_i ψ_i ⊗ |0⟩_{a1p}|0⟩_{b1p}|i⟩_{a2p}|i⟩_{b2p}` in the six-factor layout.
fn spectral_extension_vector(weights: &[f64], vectors: &[StateVector], da: usize, db: usize) -> Result<StateVector> {
    let r = weights.len();
    let scratch = SubsystemLayout::new(vec![
        Factor::new(A1, da, Party::A),
        Factor::new(B1, db, Party::B),
        Factor::new(A1P, db, Party::A),
        Factor::new(B1P, da, Party::B),
        Factor::new(A2P, r, Party::A),
        Factor::new(B2P, r, Party::B),
    ])?;
    let zero_pair = tensor_vec(&basis_vector(db, 0), &basis_vector(da, 0));
    let mut v = StateVector::zeros(scratch.total_dim());
    for (i, (w, psi)) in weights.iter().zip(vectors).enumerate() {
        let flags = tensor_vec(&basis_vector(r, i), &basis_vector(r, i));
        v += tensor_vec(&tensor_vec(psi, &zero_pair), &flags).scale(w.sqrt());
    }
    let (out, _) = permute_vector(&v, &scratch, &[A1, A1P, A2P, B1, B1P, B2P])?;
    Ok(out)
}

/// `Σ_i U^i ⊗ |i⟩⟨i|` on `(a1 a1p) ⊗ flag`.
fn controlled(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let r = blocks.len();
    let mut u = ComplexMatrix::zeros(0, 0);
    for (i, b) in blocks.iter().enumerate() {
        let term = tensor(b, &qmat::basis_projector(r, i));
        if u.nrows() == 0 {
            u = term;
        } else {
            u += term;
        }
    }
    u
}

/// `ψ ⊗ |0,0⟩` with the Schmidt-frame witness.
pub fn canonical_pure_cse(psi: &StateVector, da: usize, db: usize) -> Result<CseCandidate> {
    let witness = pure_witness(psi, da, db)?;
    check_max_dim(extension_dim(da, db, 1))?;
    let v = spectral_extension_vector(&[1.0], std::slice::from_ref(psi), da, db)?;
    let state = MultipartiteState::from_parts(projector(&v), cse_layout(da, db, 1));
    Ok(CseCandidate {
        state,
        original: (A1.into(), B1.into()),
        witness_a1_b1p: witness.clone(),
        witness_a1p_b1: witness,
    })
}

/// Nonzero spectrum of `ρ` in ascending order with phase-fixed eigenvectors.
pub fn spectral_ensemble(rho: &MultipartiteState) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let m = rho.grouped_matrix();
    let eig = hermitian_eig(&m)?;
    let mut w = Vec::new();
    let mut v = Vec::new();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > RANK_TOL {
            w.push(lam);
            v.push(eig.eigenvectors.column(k).into_owned());
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok((w, v))
}

/// `Σ_i √λ_i |e_i⟩ ⊗ |0,0⟩ ⊗ |i,i⟩` with the controlled Schmidt-frame witness.
pub fn canonical_mixed_cse(rho: &MultipartiteState) -> Result<CseCandidate> {
    let (da, db) = rho.party_dims();
    let (weights, vectors) = spectral_ensemble(rho)?;
    let r = weights.len();
    check_max_dim(extension_dim(da, db, r))?;
    let blocks: Vec<ComplexMatrix> = vectors
        .iter()
        .map(|e| pure_witness(e, da, db))
        .collect::<Result<_>>()?;
    let v = spectral_extension_vector(&weights, &vectors, da, db)?;
    let witness = controlled(&blocks);
    Ok(CseCandidate {
        state: MultipartiteState::from_parts(projector(&v), cse_layout(da, db, r)),
        original: (A1.into(), B1.into()),
        witness_a1_b1p: witness.clone(),
        witness_a1p_b1: witness,
    })
}

/// `Σ_l s_l |a_l, b_l, l⟩⟨·| ⊗ |b_l, a_l, l⟩⟨·|`, symmetric without any rotation.
pub fn separable_cse(ensemble: &[ProductTerm]) -> Result<CseCandidate> {
    let (da, db) = check_product_ensemble(ensemble)?;
    let n = ensemble.len();
    check_max_dim(extension_dim(da, db, n))?;
    let layout = cse_layout(da, db, n);
    let mut m = ComplexMatrix::zeros(layout.total_dim(), layout.total_dim());
    for (l, t) in ensemble.iter().enumerate() {
        let flag = basis_vector(n, l);
        let side_a = tensor_vec(&tensor_vec(&t.a, &t.b), &flag);
        let side_b = tensor_vec(&tensor_vec(&t.b, &t.a), &flag);
        m += projector(&tensor_vec(&side_a, &side_b)).scale(t.weight);
    }
    let id = ComplexMatrix::identity(da * db * n, da * db * n);
    Ok(CseCandidate {
        state: MultipartiteState::from_parts(qmat::symmetrize(&m), layout),
        original: (A1.into(), B1.into()),
        witness_a1_b1p: id.clone(),
        witness_a1p_b1: id,
    })
}

/// Embeds a six-factor extension's flag registers from dimension `r` into `big`.
fn pad_flags(c: &CseCandidate, big: usize) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let (da, db) = c.original_dims();
    let r = c.flag_dim();
    if r == big {
        return Ok((
            c.state.matrix().clone(),
            c.witness_a1_b1p.clone(),
            c.witness_a1p_b1.clone(),
        ));
    }
    let side = da * db;
    // isometry from a1 a1p a2p(r) into a1 a1p a2p(big)
    let mut p = ComplexMatrix::zeros(side * big, side * r);
    for s in 0..side {
        for f in 0..r {
            p[(s * big + f, s * r + f)] = qmat::ONE;
        }
    }
    let full = tensor(&p, &p);
    let state = &full * c.state.matrix() * full.adjoint();
    let comp = ComplexMatrix::identity(side * big, side * big) - &p * p.adjoint();
    let w1 = &p * &c.witness_a1_b1p * p.adjoint() + &comp;
    let w2 = &p * &c.witness_a1p_b1 * p.adjoint() + &comp;
    Ok((state, w1, w2))
}

/// `Σ_i p_i ρ^i ⊗ |i,i⟩⟨i,i|` with witness `Σ_i U^i ⊗ |i⟩⟨i|`; flags are folded
/// into `a2p`/`b2p` (part flags padded to a common dimension first).
pub fn flagged_mixture_cse(parts: &[CseCandidate], probs: &[f64]) -> Result<CseCandidate> {
    if parts.is_empty() || parts.len() != probs.len() {
        return Err(CsentError::Layout(format!(
            "{} parts with {} probabilities",
            parts.len(),
            probs.len()
        )));
    }
    let sum: f64 = probs.iter().sum();
    if probs.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
        return Err(CsentError::Domain(format!("invalid mixture weights (sum {sum})")));
    }
    let (da, db) = parts[0].original_dims();
    for p in parts {
        if p.original_dims() != (da, db) || p.state.layout().labels() != cse_layout(1, 1, 1).labels() {
            return Err(CsentError::Layout("parts do not share the original-state layout".into()));
        }
    }
    let n = parts.len();
    let big = parts.iter().map(|p| p.flag_dim()).max().unwrap_or(1);
    let flags = big * n;
    check_max_dim(extension_dim(da, db, flags))?;

    let scratch = SubsystemLayout::new(vec![
        Factor::new(A1, da, Party::A),
        Factor::new(A1P, db, Party::A),
        Factor::new(A2P, big, Party::A),
        Factor::new(B1, db, Party::B),
        Factor::new(B1P, da, Party::B),
        Factor::new(B2P, big, Party::B),
        Factor::new("fa", n, Party::A),
        Factor::new("fb", n, Party::B),
    ])?;
    let dim = scratch.total_dim();
    let mut m = ComplexMatrix::zeros(dim, dim);
    let mut w1 = Vec::with_capacity(n);
    let mut w2 = Vec::with_capacity(n);
    for (i, (part, &p)) in parts.iter().zip(probs).enumerate() {
        let (s, u1, u2) = pad_flags(part, big)?;
        let flags_ab = tensor(&qmat::basis_projector(n, i), &qmat::basis_projector(n, i));
        m += tensor(&s, &flags_ab).scale(p);
        w1.push(u1);
        w2.push(u2);
    }
    let (m, _) = permute_factors(&m, &scratch, &[A1, A1P, A2P, "fa", B1, B1P, B2P, "fb"])?;
    Ok(CseCandidate {
        state: MultipartiteState::from_parts(qmat::symmetrize(&m), cse_layout(da, db, flags)),
        original: (A1.into(), B1.into()),
        witness_a1_b1p: controlled(&w1),
        witness_a1p_b1: controlled(&w2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CseVerification {
    pub marginal_residual: f64,
    pub swap_residual_1: f64,
    pub swap_residual_2: f64,
    pub pass: bool,
}

impl CseVerification {
    pub fn max_swap_residual(&self) -> f64 {
        self.swap_residual_1.max(self.swap_residual_2)
    }
}

fn swap_residual(c: &CseCandidate, witness: &ComplexMatrix, x: &str, y: &str) -> Result<f64> {
    let layout = c.state.layout();
    let targets: Vec<&str> = layout.party_labels(Party::A);
    let u = embed_operator(witness, layout, &targets)?;
    let rotated = &u * c.state.matrix() * u.adjoint();
    let swapped = apply_swap(&rotated, layout, x, y)?;
    Ok(max_abs(&(swapped - rotated)))
}

/// Residuals of the marginal condition and of both swap conditions.
pub fn verify_cse(candidate: &CseCandidate, original: &MultipartiteState, tol: f64) -> Result<CseVerification> {
    let layout = candidate.state.layout();
    for l in [A1, A1P, B1, B1P] {
        layout.position(l)?;
    }
    for l in [&candidate.original.0, &candidate.original.1] {
        layout.position(l)?;
    }
    let marginal = candidate.marginal()?;
    let target = original.as_bipartite();
    if marginal.dim() != target.dim() {
        return Err(CsentError::Shape(format!(
            "extension marginal has dimension {}, original {}",
            marginal.dim(),
            target.dim()
        )));
    }
    let marginal_residual = max_abs(&(marginal.matrix() - target.matrix()));
    let swap_residual_1 = swap_residual(candidate, &candidate.witness_a1_b1p, A1, B1P)?;
    let swap_residual_2 = swap_residual(candidate, &candidate.witness_a1p_b1, A1P, B1)?;
    Ok(CseVerification {
        marginal_residual,
        swap_residual_1,
        swap_residual_2,
        pass: marginal_residual <= tol && swap_residual_1 <= tol && swap_residual_2 <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{haar_unitary, random_density, seeded_rng};
    use crate::states::{bell_state, bell_vector, product_vector, random_product_ensemble, werner};

    fn check(c: &CseCandidate, original: &MultipartiteState) {
        let v = verify_cse(c, original, 1e-9).unwrap();
        assert!(v.marginal_residual <= 1e-10, "{v:?}");
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn pure_examples() {
        let psi = product_vector(2, 0, 2, 1);
        let c = canonical_pure_cse(&psi, 2, 2).unwrap();
        check(&c, &MultipartiteState::pure_bipartite(&psi, 2, 2).unwrap());
        let phi = bell_vector(0);
        let c = canonical_pure_cse(&phi, 2, 2).unwrap();
        check(&c, &bell_state(0));
        assert!((c.state.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mixed_examples() {
        let mixed = MultipartiteState::bipartite(ComplexMatrix::identity(4, 4).scale(0.25), 2, 2).unwrap();
        let c = canonical_mixed_cse(&mixed).unwrap();
        assert_eq!(c.flag_dim(), 4);
        check(&c, &mixed);
        let w = werner(0.5);
        check(&canonical_mixed_cse(&w).unwrap(), &w);
        let r = MultipartiteState::bipartite(random_density(6, 2, 3).unwrap(), 2, 3).unwrap();
        check(&canonical_mixed_cse(&r).unwrap(), &r);
    }

    #[test]
    fn mixed_of_pure_matches_pure_construction() {
        let psi = qmat::random_pure(4, 8);
        let rho = MultipartiteState::pure_bipartite(&psi, 2, 2).unwrap();
        let a = canonical_mixed_cse(&rho).unwrap();
        let b = canonical_pure_cse(&psi, 2, 2).unwrap();
        // equal up to the global phase of the eigenvector
        assert!(max_abs(&(a.state.matrix() - b.state.matrix())) < 1e-10);
    }

    #[test]
    fn separable_examples() {
        let e0 = basis_vector(2, 0);
        let e1 = basis_vector(2, 1);
        let ens = vec![
            ProductTerm { weight: 0.5, a: e0.clone(), b: e0.clone() },
            ProductTerm { weight: 0.5, a: e1.clone(), b: e1.clone() },
        ];
        let target = crate::states::make_separable(&ens).unwrap();
        check(&separable_cse(&ens).unwrap(), &target);
        let single = vec![ProductTerm { weight: 1.0, a: e0, b: e1 }];
        let c = separable_cse(&single).unwrap();
        assert_eq!(c.flag_dim(), 1);
        check(&c, &crate::states::make_separable(&single).unwrap());
        let ens = random_product_ensemble(2, 2, 3, &mut seeded_rng(1));
        check(&separable_cse(&ens).unwrap(), &crate::states::make_separable(&ens).unwrap());
    }

    #[test]
    fn separable_rejects_unnormalized_members() {
        let ens = vec![ProductTerm {
            weight: 1.0,
            a: basis_vector(2, 0).scale(2.0),
            b: basis_vector(2, 0),
        }];
        assert!(separable_cse(&ens).is_err());
    }

    #[test]
    fn flagged_mixture_examples() {
        let p0 = product_vector(2, 0, 2, 0);
        let c0 = canonical_pure_cse(&p0, 2, 2).unwrap();
        let c1 = canonical_pure_cse(&bell_vector(0), 2, 2).unwrap();
        let mix = flagged_mixture_cse(&[c0.clone(), c1], &[0.5, 0.5]).unwrap();
        let target = MultipartiteState::bipartite((projector(&p0) + bell_state(0).matrix()).scale(0.5), 2, 2).unwrap();
        check(&mix, &target);

        let single = flagged_mixture_cse(std::slice::from_ref(&c0), &[1.0]).unwrap();
        assert_eq!(single.state.matrix(), c0.state.matrix());
    }

    #[test]
    fn flagged_mixture_of_mixed_parts_pads_flags() {
        let r1 = MultipartiteState::bipartite(random_density(4, 2, 1).unwrap(), 2, 2).unwrap();
        let psi = qmat::random_pure(4, 2);
        let parts = vec![canonical_mixed_cse(&r1).unwrap(), canonical_pure_cse(&psi, 2, 2).unwrap()];
        let mix = flagged_mixture_cse(&parts, &[0.3, 0.7]).unwrap();
        assert_eq!(mix.flag_dim(), 4);
        let target = MultipartiteState::bipartite(r1.matrix().scale(0.3) + projector(&psi).scale(0.7), 2, 2).unwrap();
        check(&mix, &target);
    }

    #[test]
    fn flagged_mixture_rejects_mismatched_parts() {
        let a = canonical_pure_cse(&product_vector(2, 0, 2, 0), 2, 2).unwrap();
        let b = canonical_pure_cse(&product_vector(2, 0, 3, 0), 2, 3).unwrap();
        assert!(matches!(flagged_mixture_cse(&[a, b], &[0.5, 0.5]), Err(CsentError::Layout(_))));
    }

    #[test]
    fn negative_controls() {
        let r = MultipartiteState::bipartite(random_density(4, 2, 5).unwrap(), 2, 2).unwrap();
        let mut c = canonical_mixed_cse(&r).unwrap();
        let good = c.witness_a1_b1p.clone();
        c.witness_a1_b1p = haar_unitary(good.nrows(), &mut seeded_rng(3));
        let v = verify_cse(&c, &r, 1e-9).unwrap();
        assert!(!v.pass && v.swap_residual_1 > 1e-3, "{v:?}");

        let c = canonical_mixed_cse(&r).unwrap();
        let mut perturbed = r.matrix().clone();
        perturbed[(0, 0)] += qmat::cr(1e-3);
        perturbed[(3, 3)] -= qmat::cr(1e-3);
        let other = MultipartiteState::from_parts(perturbed, SubsystemLayout::bipartite(2, 2));
        let v = verify_cse(&c, &other, 1e-9).unwrap();
        assert!(!v.pass && (v.marginal_residual - 1e-3).abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn complete_orthonormal_gives_unitary() {
        let mut rng = seeded_rng(9);
        let v = qmat::haar_isometry(6, 2, &mut rng);
        let u = complete_orthonormal(&v);
        assert!(qmat::unitarity_deviation(&u) < 1e-12);
        assert!((u.columns(0, 2) - &v).camax() < 1e-15);
    }
}
