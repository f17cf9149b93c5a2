//! Density matrices, entropies, relative entropy, negativity, operator
//! bases, the teleportation basis, and seeded state sampling.
//!
//! Entropies are in bits throughout.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    self, basis_ket, cone, creal, hermitian_eig, hermitian_eigenvalues, identity, ket_as_mat,
    ketbra, partial_trace, partial_transpose, permute_subsystems, tensor, CMat, CVec,
    SubsystemLayout,
};

/// Eigenvalues in `[-EIG_CLAMP, 0)` are treated as exact zeros; anything
/// below `-EIG_CLAMP` fails state validation.
pub const EIG_CLAMP: f64 = 1e-10;

/// Tolerance on `|Tr(rho) - 1|` and on Hermiticity of a state.
pub const STATE_TOL: f64 = 1e-10;

/// Eigenvalues of the second argument below this count as outside its
/// support when evaluating relative entropy.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Weight of the first argument outside the support of the second above
/// which relative entropy is reported as infinite.
const SUPPORT_WEIGHT_TOL: f64 = 1e-9;

/// A quantum state: Hermitian, unit-trace, positive semidefinite operator
/// over labelled subsystems.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: CMat,
    layout: SubsystemLayout,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants and wraps the operator.
    pub fn new(op: CMat, layout: SubsystemLayout) -> Result<Self> {
        let d = layout.total_dim();
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::Shape(format!(
                "operator is {}x{}, layout dimension is {d}",
                op.nrows(),
                op.ncols()
            )));
        }
        if !linalg::all_finite(&op) {
            return Err(Error::StateValidation("non-finite entries".into()));
        }
        let herm = linalg::herm_deviation(&op);
        if herm > STATE_TOL {
            return Err(Error::StateValidation(format!(
                "not Hermitian (max |m - m†| = {herm:.3e})"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::StateValidation(format!("trace is {tr}, expected 1")));
        }
        let min_eig = hermitian_eigenvalues(&op)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -EIG_CLAMP {
            return Err(Error::StateValidation(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { op, layout })
    }

    /// Pure state `|psi><psi|` from a normalized ket.
    pub fn from_ket(ket: &CVec, layout: SubsystemLayout) -> Result<Self> {
        Self::new(ketbra(ket, ket), layout)
    }

    pub fn op(&self) -> &CMat {
        &self.op
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    /// Clamped eigenvalues, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigenvalues(&self.op)?
            .into_iter()
            .map(|v| if v < 0.0 { 0.0 } else { v })
            .collect())
    }

    /// Marginal left after tracing out the listed subsystems.
    pub fn trace_out(&self, labels: &[&str]) -> Result<DensityMatrix> {
        let kept = self.layout.complement(labels);
        if kept.is_empty() {
            return Err(Error::Label("cannot trace out every subsystem".into()));
        }
        let red = partial_trace(&self.op, &self.layout, labels)?;
        let kept_refs: Vec<&str> = kept.iter().map(String::as_str).collect();
        let dims: Vec<usize> = kept_refs
            .iter()
            .map(|l| self.layout.dim_of(l))
            .collect::<Result<_>>()?;
        DensityMatrix::new(red, SubsystemLayout::new(kept_refs, dims)?)
    }

    /// Marginal on the listed subsystems.
    pub fn marginal(&self, labels: &[&str]) -> Result<DensityMatrix> {
        let traced = self.layout.complement(labels);
        let traced_refs: Vec<&str> = traced.iter().map(String::as_str).collect();
        self.trace_out(&traced_refs)
    }

    /// Same operator under fresh labels (dimensions must agree).
    pub fn relabelled<S: Into<String>>(&self, names: Vec<S>) -> Result<DensityMatrix> {
        let layout = SubsystemLayout::new(names, self.layout.dims().to_vec())?;
        Ok(DensityMatrix {
            op: self.op.clone(),
            layout,
        })
    }

    /// Reorders the subsystems into `new_order`.
    pub fn permuted(&self, new_order: &[&str]) -> Result<DensityMatrix> {
        let op = permute_subsystems(&self.op, &self.layout, new_order)?;
        Ok(DensityMatrix {
            op,
            layout: self.layout.permuted(new_order)?,
        })
    }
}

/// Maximally mixed state on the given layout.
pub fn maximally_mixed(layout: SubsystemLayout) -> DensityMatrix {
    let d = layout.total_dim();
    DensityMatrix {
        op: identity(d).scale(1.0 / d as f64),
        layout,
    }
}

/// `|phi+> = sum_i |ii> / sqrt(d)`.
pub fn max_entangled_ket(d: usize) -> CVec {
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = creal(1.0 / (d as f64).sqrt());
    }
    v
}

/// Product of two states, reordered so that all A-side labels precede all
/// B-side labels (the canonical cut used for conditional entropy on
/// extended systems).
pub fn tensor_states(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    for n in a.layout().names() {
        if b.layout().names().contains(n) {
            return Err(Error::Label(format!("label {n:?} appears in both factors")));
        }
    }
    let op = tensor(a.op(), b.op())?;
    let mut names: Vec<String> = a.layout().names().to_vec();
    names.extend(b.layout().names().iter().cloned());
    let mut dims: Vec<usize> = a.layout().dims().to_vec();
    dims.extend(b.layout().dims().iter().copied());
    let layout = SubsystemLayout::new(names, dims)?;

    let (a_side, b_side) = layout.side_split();
    let canonical: Vec<&str> = a_side
        .iter()
        .chain(b_side.iter())
        .map(String::as_str)
        .collect();
    let op = permute_subsystems(&op, &layout, &canonical)?;
    DensityMatrix::new(op, layout.permuted(&canonical)?)
}

fn entropy_of_eigenvalues(vals: &[f64]) -> f64 {
    vals.iter()
        .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
        .sum()
}

/// Von Neumann entropy `S(rho) = -Tr(rho log2 rho)` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let vals = rho
        .eigenvalues()
        .expect("validated state has an eigendecomposition");
    entropy_of_eigenvalues(&vals)
}

/// Conditional entropy `S(rho) - S(rho_B)` where B is the complement of
/// `a_labels`, in bits.
pub fn conditional_entropy(rho: &DensityMatrix, a_labels: &[&str]) -> Result<f64> {
    if a_labels.is_empty() {
        return Err(Error::Label("conditioning needs a nonempty A side".into()));
    }
    rho.layout().positions(a_labels)?;
    if a_labels.len() == rho.layout().len() {
        return Err(Error::Label("A side must leave a nonempty complement".into()));
    }
    let rho_b = rho.trace_out(a_labels)?;
    Ok(von_neumann_entropy(rho) - von_neumann_entropy(&rho_b))
}

/// Conditional entropy with the A side inferred from the label convention.
pub fn conditional_entropy_canonical(rho: &DensityMatrix) -> Result<f64> {
    let (a_side, _) = rho.layout().side_split();
    let refs: Vec<&str> = a_side.iter().map(String::as_str).collect();
    conditional_entropy(rho, &refs)
}

/// Relative entropy `D(rho || sigma)` in bits; `f64::INFINITY` when the
/// support of `rho` is not contained in the support of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.layout() != sigma.layout() {
        return Err(Error::Shape("relative entropy needs a common layout".into()));
    }
    let (p_vals, _) = hermitian_eig(rho.op())?;
    let (q_vals, q_vecs) = hermitian_eig(sigma.op())?;

    let tr_rho_log_rho: f64 = p_vals
        .iter()
        .map(|&p| if p > 0.0 { p * p.log2() } else { 0.0 })
        .sum();

    let mut tr_rho_log_sigma = 0.0;
    for (j, &q) in q_vals.iter().enumerate() {
        let v_j = q_vecs.column(j);
        // weight of rho along sigma's j-th eigenvector
        let w_j = (v_j.adjoint() * rho.op() * v_j)[(0, 0)].re.max(0.0);
        if q <= SUPPORT_TOL {
            if w_j > SUPPORT_WEIGHT_TOL {
                return Ok(f64::INFINITY);
            }
        } else {
            tr_rho_log_sigma += w_j * q.log2();
        }
    }
    Ok(tr_rho_log_rho - tr_rho_log_sigma)
}

/// Sum of the absolute values of the negative eigenvalues of the partial
/// transpose across `cut`; a positive value certifies entanglement.
pub fn negativity(rho: &DensityMatrix, cut: &[&str]) -> Result<f64> {
    if cut.is_empty() || cut.len() == rho.layout().len() {
        return Err(Error::Label(
            "cut must be a nonempty proper subset of the subsystems".into(),
        ));
    }
    let pt = partial_transpose(rho.op(), rho.layout(), cut)?;
    let vals = hermitian_eigenvalues(&pt)?;
    Ok(vals.iter().filter(|&&v| v < 0.0).map(|v| -v).sum())
}

/// A basis of `d^2` density matrices spanning the Hermitian operators on a
/// `d`-dimensional system.
#[derive(Debug, Clone)]
pub struct StateBasis {
    elements: Vec<DensityMatrix>,
}

impl StateBasis {
    /// Validates cardinality, state invariants, and linear independence
    /// (smallest singular value of the stacked vectorizations above 1e-8).
    pub fn new(elements: Vec<DensityMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::Argument("empty state basis".into()))?;
        let d = first.dim();
        if elements.len() != d * d {
            return Err(Error::Argument(format!(
                "basis for dimension {d} needs {} elements, got {}",
                d * d,
                elements.len()
            )));
        }
        for e in &elements {
            if e.layout() != first.layout() {
                return Err(Error::Shape("basis elements must share a layout".into()));
            }
        }
        let smin = smallest_singular_value_of_stack(&elements)?;
        if smin <= 1e-8 {
            return Err(Error::Argument(format!(
                "basis elements are linearly dependent (sigma_min = {smin:.3e})"
            )));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[DensityMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn smallest_singular_value_of_stack(elements: &[DensityMatrix]) -> Result<f64> {
    let d2 = elements[0].dim() * elements[0].dim();
    let mut stack = CMat::zeros(d2, elements.len());
    for (k, e) in elements.iter().enumerate() {
        for (idx, z) in e.op().iter().enumerate() {
            stack[(idx, k)] = *z;
        }
    }
    let gram = stack.adjoint() * &stack;
    let vals = hermitian_eigenvalues(&gram)?;
    let min = vals.last().copied().unwrap_or(0.0).max(0.0);
    Ok(min.sqrt())
}

/// The standard basis of `d^2` density matrices: computational projectors
/// plus the `+`- and `i`-superposition projectors for every pair.
pub fn density_basis(d: usize) -> Result<StateBasis> {
    if d == 0 {
        return Err(Error::Dimension("basis needs dimension >= 1".into()));
    }
    let layout = SubsystemLayout::single("S", d)?;
    let mut elements = Vec::with_capacity(d * d);
    for i in 0..d {
        let e = basis_ket(d, i);
        elements.push(DensityMatrix::new(ketbra(&e, &e), layout.clone())?);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let plus = (basis_ket(d, i) + basis_ket(d, j)).scale(1.0 / 2f64.sqrt());
            elements.push(DensityMatrix::new(ketbra(&plus, &plus), layout.clone())?);
        }
    }
    let im = Complex64::new(0.0, 1.0);
    for i in 0..d {
        for j in (i + 1)..d {
            let v = (basis_ket(d, i) + basis_ket(d, j).map(|x| x * im)).scale(1.0 / 2f64.sqrt());
            elements.push(DensityMatrix::new(ketbra(&v, &v), layout.clone())?);
        }
    }
    StateBasis::new(elements)
}

/// Kets of the maximally entangled basis
/// `|psi_nm> = sum_j e^{2 pi i j n / d} |j> ⊗ |(j+m) mod d> / sqrt(d)`.
pub fn teleportation_kets(d: usize) -> Result<Vec<CVec>> {
    if d < 2 {
        return Err(Error::Dimension(
            "teleportation basis needs dimension >= 2".into(),
        ));
    }
    let mut kets = Vec::with_capacity(d * d);
    let norm = 1.0 / (d as f64).sqrt();
    for n in 0..d {
        for m in 0..d {
            let mut v = CVec::zeros(d * d);
            for j in 0..d {
                let phase = 2.0 * std::f64::consts::PI * (j * n) as f64 / d as f64;
                let col = (j + m) % d;
                v[j * d + col] = Complex64::from_polar(norm, phase);
            }
            kets.push(v);
        }
    }
    Ok(kets)
}

/// The `d^2` maximally entangled pure states, each with B-marginal `I/d`.
pub fn teleportation_basis(d: usize) -> Result<Vec<DensityMatrix>> {
    let layout = SubsystemLayout::bipartite(d, d)?;
    teleportation_kets(d)?
        .iter()
        .map(|k| DensityMatrix::from_ket(k, layout.clone()))
        .collect()
}

/// Unitary mapping the eigenbasis of `rho` onto the teleportation basis,
/// so the rotated state's B-marginal is maximally mixed.
pub fn entropy_maximizing_unitary(rho: &DensityMatrix) -> Result<CMat> {
    let layout = rho.layout();
    if layout.len() != 2 || layout.dims()[0] != layout.dims()[1] {
        return Err(Error::Dimension(
            "entropy-maximizing rotation needs two equal-dimension subsystems".into(),
        ));
    }
    let d = layout.dims()[0];
    let kets = teleportation_kets(d)?;
    let (_, eigvecs) = hermitian_eig(rho.op())?;
    let mut u = CMat::zeros(d * d, d * d);
    for (k, psi) in kets.iter().enumerate() {
        let gamma = eigvecs.column(k);
        u += ket_as_mat(psi) * gamma.adjoint();
    }
    Ok(u)
}

pub(crate) fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    let scale = creal(1.0 / 2f64.sqrt());
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * scale
    })
}

pub(crate) fn haar_unitary_with_rng(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let r = qr.r();
    let q = qr.q();
    let mut phases = CMat::zeros(d, d);
    for i in 0..d {
        let rii = r[(i, i)];
        phases[(i, i)] = if rii.norm() > 0.0 {
            rii / rii.norm()
        } else {
            cone()
        };
    }
    q * phases
}

/// Haar-random unitary, deterministic in the seed.
pub fn random_unitary(d: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with_rng(d, &mut rng)
}

/// Random state of the given rank: the marginal of a Haar-random pure
/// state on a rank-sized ancilla. Rank 1 yields a Haar-random pure state.
pub fn random_state(layout: &SubsystemLayout, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state_with_rng(layout, rank, &mut rng)
}

pub(crate) fn random_state_with_rng(
    layout: &SubsystemLayout,
    rank: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DensityMatrix> {
    let d = layout.total_dim();
    if rank == 0 || rank > d {
        return Err(Error::Argument(format!(
            "rank must be in 1..={d}, got {rank}"
        )));
    }
    let g = ginibre(d, rank, rng);
    let mut rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale_mut(tr);
    // rounding can leave a stray 1e-17 imaginary part on the diagonal
    let rho = (&rho + rho.adjoint()).scale(0.5);
    DensityMatrix::new(rho, layout.clone())
}

/// Isotropic interpolation `p |phi+><phi+| + (1-p) I/d^2` on two qudits.
pub fn isotropic_family(p: f64, d: usize) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("p must lie in [0,1], got {p}")));
    }
    let layout = SubsystemLayout::bipartite(d, d)?;
    let phi = max_entangled_ket(d);
    let op = ketbra(&phi, &phi).scale(p) + identity(d * d).scale((1.0 - p) / (d * d) as f64);
    DensityMatrix::new(op, layout)
}

/// Closed-form entropy of the isotropic state: eigenvalues `p + (1-p)/d^2`
/// once and `(1-p)/d^2` with multiplicity `d^2 - 1`.
pub fn isotropic_entropy(p: f64, d: usize) -> f64 {
    let d2 = (d * d) as f64;
    let top = p + (1.0 - p) / d2;
    let rest = (1.0 - p) / d2;
    let mut vals = vec![rest; d * d - 1];
    vals.push(top);
    entropy_of_eigenvalues(&vals)
}
