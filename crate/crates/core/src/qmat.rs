//! Dense complex matrix kernel.
//!
//! Everything here works on [`ComplexMatrix`] (a dense `nalgebra` matrix of
//! `Complex64`) together with a [`SubsystemLayout`] that names each tensor
//! factor. Index convention: the first factor in a layout is the most
//! significant digit of a basis index, matching `kron(a, b)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{CsentError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;
pub type SeededRng = ChaCha8Rng;

/// Largest total Hilbert-space dimension the kernel accepts.
pub const MAX_DIM: usize = 256;

/// Eigenvalues above `-PSD_CLIP` are treated as numerical noise and clipped.
pub const PSD_CLIP: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Owner of a tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Party::A => f.write_str("A"),
            Party::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
    pub party: Party,
}

impl Factor {
    pub fn new(label: impl Into<String>, dim: usize, party: Party) -> Self {
        Factor {
            label: label.into(),
            dim,
            party,
        }
    }
}

/// Ordered list of labeled tensor factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    factors: Vec<Factor>,
}

impl SubsystemLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(CsentError::Layout(format!("factor `{}` has dimension 0", f.label)));
            }
            if f.label.is_empty() {
                return Err(CsentError::Layout("empty factor label".into()));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(CsentError::Layout(format!("duplicate label `{}`", f.label)));
            }
        }
        Ok(SubsystemLayout { factors })
    }

    /// Two-factor layout `a` (party A) ⊗ `b` (party B).
    pub fn bipartite(da: usize, db: usize) -> Self {
        SubsystemLayout {
            factors: vec![Factor::new("a", da, Party::A), Factor::new("b", db, Party::B)],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| CsentError::Label(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|f| f.label == label)
    }

    pub fn factor(&self, label: &str) -> Result<&Factor> {
        Ok(&self.factors[self.position(label)?])
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.factor(label)?.dim)
    }

    /// Product of the dimensions owned by `party`.
    pub fn party_dim(&self, party: Party) -> usize {
        self.factors.iter().filter(|f| f.party == party).map(|f| f.dim).product()
    }

    pub fn party_labels(&self, party: Party) -> Vec<&str> {
        self.factors
            .iter()
            .filter(|f| f.party == party)
            .map(|f| f.label.as_str())
            .collect()
    }

    /// Appends a factor, returning the extended layout.
    pub fn with_factor(&self, factor: Factor) -> Result<Self> {
        let mut factors = self.factors.clone();
        factors.push(factor);
        SubsystemLayout::new(factors)
    }

    /// Layout with the factors in `order` (which must be a permutation of the labels).
    pub fn reordered(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.factors.len() {
            return Err(CsentError::Layout(format!(
                "reorder expects {} labels, got {}",
                self.factors.len(),
                order.len()
            )));
        }
        let mut factors = Vec::with_capacity(order.len());
        for label in order {
            factors.push(self.factor(label)?.clone());
        }
        SubsystemLayout::new(factors)
    }

    /// Party-A factors first, then party-B, each in their current relative order.
    pub fn grouped_order(&self) -> Vec<&str> {
        let mut order = self.party_labels(Party::A);
        order.extend(self.party_labels(Party::B));
        order
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        let total = self.total_dim();
        if total != n {
            return Err(CsentError::Shape(format!(
                "layout dimension {total} does not match matrix dimension {n}"
            )));
        }
        Ok(())
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for k in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factors[k + 1].dim;
        }
        strides
    }

    /// Full-space offsets for every multi-index over the factors at `positions`.
    fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &p in positions {
            let d = self.factors[p].dim;
            let mut next = Vec::with_capacity(out.len() * d);
            for &o in &out {
                for digit in 0..d {
                    next.push(o + digit * strides[p]);
                }
            }
            out = next;
        }
        out
    }
}

pub fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(CsentError::Shape(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn check_max_dim(n: usize) -> Result<()> {
    if n > MAX_DIM {
        return Err(CsentError::DimensionTooLarge { dim: n, max: MAX_DIM });
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &StateVector, b: &StateVector) -> StateVector {
    a.kronecker(b)
}

/// Traces out the factors named in `discard`.
pub fn partial_trace(
    m: &ComplexMatrix,
    layout: &SubsystemLayout,
    discard: &[&str],
) -> Result<(ComplexMatrix, SubsystemLayout)> {
    let n = check_square(m)?;
    layout.check_dim(n)?;
    let mut drop = Vec::with_capacity(discard.len());
    for label in discard {
        let p = layout.position(label)?;
        if !drop.contains(&p) {
            drop.push(p);
        }
    }
    let keep: Vec<usize> = (0..layout.len()).filter(|p| !drop.contains(p)).collect();
    drop.sort_unstable();
    let keep_off = layout.offsets(&keep);
    let drop_off = layout.offsets(&drop);
    let k = keep_off.len();
    let mut out = ComplexMatrix::zeros(k, k);
    for c in 0..k {
        for r in 0..k {
            let mut acc = ZERO;
            for &t in &drop_off {
                acc += m[(keep_off[r] + t, keep_off[c] + t)];
            }
            out[(r, c)] = acc;
        }
    }
    let factors = keep.iter().map(|&p| layout.factors[p].clone()).collect();
    Ok((out, SubsystemLayout { factors }))
}

/// Reorders tensor factors so the result is expressed in `layout.reordered(order)`.
pub fn permute_factors(
    m: &ComplexMatrix,
    layout: &SubsystemLayout,
    order: &[&str],
) -> Result<(ComplexMatrix, SubsystemLayout)> {
    let n = check_square(m)?;
    layout.check_dim(n)?;
    let new_layout = layout.reordered(order)?;
    let positions: Vec<usize> = order
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<_>>()?;
    // offsets() enumerates new-order multi-indices, returning old flat indices.
    let old_index = layout.offsets(&positions);
    let mut out = ComplexMatrix::zeros(n, n);
    for c in 0..n {
        for r in 0..n {
            out[(r, c)] = m[(old_index[r], old_index[c])];
        }
    }
    Ok((out, new_layout))
}

/// Same as [`permute_factors`] for a state vector.
pub fn permute_vector(
    v: &StateVector,
    layout: &SubsystemLayout,
    order: &[&str],
) -> Result<(StateVector, SubsystemLayout)> {
    layout.check_dim(v.len())?;
    let new_layout = layout.reordered(order)?;
    let positions: Vec<usize> = order
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<_>>()?;
    let old_index = layout.offsets(&positions);
    let out = StateVector::from_iterator(v.len(), old_index.iter().map(|&i| v[i]));
    Ok((out, new_layout))
}

/// Permutation unitary exchanging the factors `x` and `y`.
pub fn swap_unitary(layout: &SubsystemLayout, x: &str, y: &str) -> Result<ComplexMatrix> {
    let px = layout.position(x)?;
    let py = layout.position(y)?;
    let (dx, dy) = (layout.factors[px].dim, layout.factors[py].dim);
    if dx != dy {
        return Err(CsentError::Shape(format!(
            "cannot swap `{x}` (dim {dx}) with `{y}` (dim {dy})"
        )));
    }
    let n = layout.total_dim();
    let strides = layout.strides();
    let mut s = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let ix = (i / strides[px]) % dx;
        let iy = (i / strides[py]) % dy;
        let j = i - ix * strides[px] - iy * strides[py] + iy * strides[px] + ix * strides[py];
        s[(j, i)] = ONE;
    }
    Ok(s)
}

/// Conjugation by the swap of `x` and `y`, done by index relabeling.
pub fn apply_swap(m: &ComplexMatrix, layout: &SubsystemLayout, x: &str, y: &str) -> Result<ComplexMatrix> {
    let px = layout.position(x)?;
    let py = layout.position(y)?;
    let (dx, dy) = (layout.factors[px].dim, layout.factors[py].dim);
    if dx != dy {
        return Err(CsentError::Shape(format!(
            "cannot swap `{x}` (dim {dx}) with `{y}` (dim {dy})"
        )));
    }
    let n = check_square(m)?;
    layout.check_dim(n)?;
    let strides = layout.strides();
    let map: Vec<usize> = (0..n)
        .map(|i| {
            let ix = (i / strides[px]) % dx;
            let iy = (i / strides[py]) % dy;
            i - ix * strides[px] - iy * strides[py] + iy * strides[px] + ix * strides[py]
        })
        .collect();
    let mut out = ComplexMatrix::zeros(n, n);
    for c in 0..n {
        for r in 0..n {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Embeds `op`, acting on `targets` (in that order), into the full space of `layout`.
pub fn embed_operator(op: &ComplexMatrix, layout: &SubsystemLayout, targets: &[&str]) -> Result<ComplexMatrix> {
    let target_dim: usize = targets
        .iter()
        .map(|l| layout.dim_of(l))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .product();
    if op.nrows() != target_dim || op.ncols() != target_dim {
        return Err(CsentError::Shape(format!(
            "operator is {}x{}, targets span dimension {target_dim}",
            op.nrows(),
            op.ncols()
        )));
    }
    let mut order: Vec<&str> = targets.to_vec();
    for l in layout.labels() {
        if !targets.contains(&l) {
            order.push(l);
        }
    }
    let rest = layout.total_dim() / target_dim;
    let full = tensor(op, &ComplexMatrix::identity(rest, rest));
    let reordered = layout.reordered(&order)?;
    let back: Vec<&str> = layout.labels();
    Ok(permute_factors(&full, &reordered, &back)?.0)
}

/// `max_ij |m_ij|`.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn projector(v: &StateVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// `|k⟩` in dimension `d`.
pub fn basis_vector(d: usize, k: usize) -> StateVector {
    let mut v = StateVector::zeros(d);
    v[k] = ONE;
    v
}

pub fn basis_projector(d: usize, k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(k, k)] = ONE;
    m
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl EigDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&x| cr(x)),
        ));
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    /// Applies `f` to the spectrum.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }
}

/// Eigendecomposition of `(m + m†)/2`, eigenvalues ascending.
///
/// Eigenvectors get a deterministic phase: the first component with modulus
/// above 1e-12 is made real and positive.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigDecomposition> {
    let n = check_square(m)?;
    let sym = symmetrize(m);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        values.push(eig.eigenvalues[k]);
        let v = eig.eigenvectors.column(k);
        let phase = v
            .iter()
            .find(|z| z.norm() > 1e-12)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(ONE);
        for i in 0..n {
            vectors[(i, col)] = v[i] * phase;
        }
    }
    Ok(EigDecomposition {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// Spectrum of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_square(m)?;
    let mut v: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn check_psd(eig: &EigDecomposition) -> Result<()> {
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -PSD_CLIP {
            return Err(CsentError::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(())
}

/// PSD square root. Eigenvalues in `[-1e-10, 0)` are clipped to zero, and so
/// are positive eigenvalues below the rounding floor of the decomposition,
/// whose square roots would otherwise contribute noise of order 1e-8.
pub fn hermitian_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    check_psd(&eig)?;
    let floor = rounding_floor(&eig.eigenvalues);
    Ok(eig.map(|x| if x > floor { x.sqrt() } else { 0.0 }))
}

/// Magnitude below which an eigenvalue is indistinguishable from zero.
pub fn rounding_floor(eigenvalues: &[f64]) -> f64 {
    let scale = eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    64.0 * f64::EPSILON * eigenvalues.len().max(1) as f64 * scale
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    m.singular_values().iter().sum()
}

pub fn frobenius_sq(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn real_trace(m: &ComplexMatrix) -> f64 {
    m.trace().re
}

/// Applies `Σ K ρ K†`.
pub fn apply_kraus(kraus: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(kraus[0].nrows(), kraus[0].nrows());
    for k in kraus {
        out += k * rho * k.adjoint();
    }
    out
}

/// `max|Σ K†K − I|`.
pub fn completeness_deviation(kraus: &[ComplexMatrix]) -> f64 {
    let n = kraus[0].ncols();
    let mut sum = ComplexMatrix::zeros(n, n);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    max_abs(&(sum - ComplexMatrix::identity(n, n)))
}

/// Hermitian matrix from `d²` real coordinates: diagonal first, then
/// (re, im) pairs for the strict upper triangle in row order.
pub fn hermitian_from_coords(d: usize, x: &[f64]) -> ComplexMatrix {
    debug_assert_eq!(x.len(), d * d);
    let mut h = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = cr(x[i]);
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = c(x[k], x[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// `exp(iH)` for Hermitian `H`.
pub fn exp_i_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    let n = h.nrows();
    if n == 1 {
        return ComplexMatrix::from_element(1, 1, Complex64::from_polar(1.0, h[(0, 0)].re));
    }
    let eig = h.clone().symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, lam);
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    scaled * eig.eigenvectors.adjoint()
}

/// `frame · exp(i H(x))`, the unitary parametrization used by every optimizer.
pub fn unitary_from_coords(frame: &ComplexMatrix, x: &[f64]) -> ComplexMatrix {
    let d = frame.nrows();
    if x.iter().all(|&v| v == 0.0) {
        return frame.clone();
    }
    frame * exp_i_hermitian(&hermitian_from_coords(d, x))
}

pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    let n = u.ncols();
    max_abs(&(u.adjoint() * u - ComplexMatrix::identity(n, n)))
}

pub fn seeded_rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// Independent sub-seed for stream `k` of a base seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = gaussian_complex(rng);
        }
    }
    m
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R` absorbed.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// First `cols` columns of a Haar unitary on dimension `rows`.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    haar_unitary(rows, rng).columns(0, cols).into_owned()
}

/// Random density matrix `GG†/tr(GG†)` with `G` a `d × rank` Ginibre matrix.
pub fn haar_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if rank == 0 || rank > d {
        return Err(CsentError::Domain(format!("rank {rank} outside 1..={d}")));
    }
    let g = ginibre(d, rank, rng);
    let m = &g * g.adjoint();
    let t = real_trace(&m);
    Ok(symmetrize(&m.unscale(t)))
}

pub fn haar_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> StateVector {
    let v = StateVector::from_iterator(d, (0..d).map(|_| gaussian_complex(rng)));
    let n = v.norm();
    v.unscale(n)
}

pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    haar_unitary(d, &mut seeded_rng(seed))
}

pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<ComplexMatrix> {
    haar_density(d, rank, &mut seeded_rng(seed))
}

pub fn random_pure(d: usize, seed: u64) -> StateVector {
    haar_pure(d, &mut seeded_rng(seed))
}

/// Kraus operators of a random channel `d_in → d_out` with `n` operators,
/// taken from a Haar isometry `d_in → n·d_out` (Stinespring dilation).
/// `n` is raised to `⌈d_in/d_out⌉` when smaller.
pub fn random_kraus<R: Rng + ?Sized>(d_in: usize, d_out: usize, n: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let n = n.max(d_in.div_ceil(d_out));
    let v = haar_isometry(n * d_out, d_in, rng);
    (0..n).map(|k| v.rows(k * d_out, d_out).into_owned()).collect()
}
