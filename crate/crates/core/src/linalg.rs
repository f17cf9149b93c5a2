//! Dense complex linear algebra under every state and channel operation.
//!
//! Operators are `nalgebra` dynamic matrices over `Complex64`. Subsystem
//! structure is tracked separately by [`SubsystemLayout`]; the leftmost
//! label is the most significant tensor index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used for all operators.
pub type CMat = DMatrix<Complex64>;
/// Dense complex column vector (kets).
pub type CVec = DVector<Complex64>;

/// Total-dimension cap for any operator handled by the crate.
pub const MAX_DIM: usize = 4096;

/// Tolerance for accepting a matrix as Hermitian (max-abs of `m - m†`).
pub const HERM_TOL: f64 = 1e-10;

/// Ordered subsystem labels with their dimensions.
///
/// Labels starting with `B` belong to the B side of the bipartition; all
/// other labels belong to the A side. Canonically ordered layouts list all
/// A-side labels before all B-side labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    names: Vec<String>,
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(names: Vec<S>, dims: Vec<usize>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != dims.len() {
            return Err(Error::Label(format!(
                "{} labels for {} dimensions",
                names.len(),
                dims.len()
            )));
        }
        if names.is_empty() {
            return Err(Error::Label("layout needs at least one subsystem".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Label(format!("duplicate subsystem label {n:?}")));
            }
        }
        if dims.contains(&0) {
            return Err(Error::Dimension("subsystem dimension must be >= 1".into()));
        }
        let total: usize = dims.iter().product();
        if total > MAX_DIM {
            return Err(Error::Dimension(format!(
                "total dimension {total} exceeds cap {MAX_DIM}"
            )));
        }
        Ok(Self { names, dims })
    }

    /// Two subsystems `A`, `B` of the given dimensions.
    pub fn bipartite(d_a: usize, d_b: usize) -> Result<Self> {
        Self::new(vec!["A", "B"], vec![d_a, d_b])
    }

    /// Single subsystem.
    pub fn single<S: Into<String>>(name: S, d: usize) -> Result<Self> {
        Self::new(vec![name.into()], vec![d])
    }

    /// Extended layout `[A', A, B', B]` used for complete-freeness checks.
    pub fn extended(d_a_aux: usize, d_a: usize, d_b_aux: usize, d_b: usize) -> Result<Self> {
        Self::new(vec!["A'", "A", "B'", "B"], vec![d_a_aux, d_a, d_b_aux, d_b])
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Product of all subsystem dimensions.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == label)
            .ok_or_else(|| Error::Label(format!("unknown subsystem label {label:?}")))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    /// Positions of the given labels, erroring on unknown ones.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.position(l)).collect()
    }

    /// Product of the dimensions of the given labels.
    pub fn dim_of_set(&self, labels: &[&str]) -> Result<usize> {
        let mut d = 1usize;
        for l in labels {
            d *= self.dim_of(l)?;
        }
        Ok(d)
    }

    /// Labels not in `labels`, in layout order.
    pub fn complement(&self, labels: &[&str]) -> Vec<String> {
        self.names
            .iter()
            .filter(|n| !labels.contains(&n.as_str()))
            .cloned()
            .collect()
    }

    /// True when the label sits on the B side of the bipartition.
    pub fn is_b_side(label: &str) -> bool {
        label.starts_with('B')
    }

    /// `(a_side, b_side)` labels in layout order.
    pub fn side_split(&self) -> (Vec<String>, Vec<String>) {
        let (b, a): (Vec<String>, Vec<String>) = self
            .names
            .iter()
            .cloned()
            .partition(|n| Self::is_b_side(n));
        (a, b)
    }

    /// True when every A-side label precedes every B-side label.
    pub fn is_canonical(&self) -> bool {
        let first_b = self.names.iter().position(|n| Self::is_b_side(n));
        match first_b {
            None => true,
            Some(i) => self.names[i..].iter().all(|n| Self::is_b_side(n)),
        }
    }

    /// Layout with subsystems listed in `new_order`.
    pub fn permuted(&self, new_order: &[&str]) -> Result<Self> {
        let positions = self.permutation_positions(new_order)?;
        let names = positions.iter().map(|&p| self.names[p].clone()).collect();
        let dims = positions.iter().map(|&p| self.dims[p]).collect();
        Ok(Self { names, dims })
    }

    fn permutation_positions(&self, new_order: &[&str]) -> Result<Vec<usize>> {
        if new_order.len() != self.names.len() {
            return Err(Error::Label(format!(
                "permutation lists {} labels, layout has {}",
                new_order.len(),
                self.names.len()
            )));
        }
        let positions = self.positions(new_order)?;
        let mut seen = vec![false; self.names.len()];
        for &p in &positions {
            if seen[p] {
                return Err(Error::Label("permutation repeats a label".into()));
            }
            seen[p] = true;
        }
        Ok(positions)
    }
}

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cone() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn creal(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `d x d` identity.
pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Computational basis ket `|i>` in dimension `d`.
pub fn basis_ket(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = cone();
    v
}

/// Outer product `|u><v|`.
pub fn ketbra(u: &CVec, v: &CVec) -> CMat {
    u * v.adjoint()
}

/// Column-matrix view of a ket, for mixed ket/operator tensor products.
pub fn ket_as_mat(v: &CVec) -> CMat {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm of the difference.
pub fn fro_dist(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm()
}

pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Max-abs deviation from Hermiticity.
pub fn herm_deviation(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Kronecker product `a ⊗ b`; dimensions multiply.
pub fn tensor(a: &CMat, b: &CMat) -> Result<CMat> {
    if !all_finite(a) || !all_finite(b) {
        return Err(Error::Shape("tensor factors must be finite".into()));
    }
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= MAX_DIM && c <= MAX_DIM => Ok(a.kronecker(b)),
        _ => Err(Error::Dimension(format!(
            "tensor product of {}x{} and {}x{} exceeds cap {MAX_DIM}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        ))),
    }
}

/// Kronecker product of several factors, left to right.
pub fn tensor_all(factors: &[&CMat]) -> Result<CMat> {
    let mut it = factors.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::Argument("tensor_all needs at least one factor".into()))?;
    let mut acc = (*first).clone();
    for f in it {
        acc = tensor(&acc, f)?;
    }
    Ok(acc)
}

fn check_square_for(m: &CMat, layout: &SubsystemLayout) -> Result<()> {
    let d = layout.total_dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::Shape(format!(
            "operator is {}x{}, layout dimension is {d}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Splits a flat index into per-subsystem indices (leftmost most significant).
fn decompose_index(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for (k, &d) in dims.iter().enumerate().rev() {
        out[k] = idx % d;
        idx /= d;
    }
    out
}

fn compose_index(parts: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0usize;
    for (p, d) in parts.iter().zip(dims) {
        idx = idx * d + p;
    }
    idx
}

/// Traces out the labelled subsystems, leaving the rest in layout order.
pub fn partial_trace(m: &CMat, layout: &SubsystemLayout, traced: &[&str]) -> Result<CMat> {
    check_square_for(m, layout)?;
    let traced_pos = layout.positions(traced)?;
    let kept_pos: Vec<usize> = (0..layout.len())
        .filter(|p| !traced_pos.contains(p))
        .collect();
    let dims = layout.dims();

    let kept_dims: Vec<usize> = kept_pos.iter().map(|&p| dims[p]).collect();
    let traced_dims: Vec<usize> = traced_pos.iter().map(|&p| dims[p]).collect();
    let d_kept: usize = kept_dims.iter().product();
    let d_traced: usize = traced_dims.iter().product();

    let mut out = CMat::zeros(d_kept.max(1), d_kept.max(1));
    let mut full_row = vec![0usize; dims.len()];
    let mut full_col = vec![0usize; dims.len()];
    for r in 0..d_kept {
        let r_parts = decompose_index(r, &kept_dims);
        for c in 0..d_kept {
            let c_parts = decompose_index(c, &kept_dims);
            let mut acc = czero();
            for t in 0..d_traced {
                let t_parts = decompose_index(t, &traced_dims);
                for (k, &p) in kept_pos.iter().enumerate() {
                    full_row[p] = r_parts[k];
                    full_col[p] = c_parts[k];
                }
                for (k, &p) in traced_pos.iter().enumerate() {
                    full_row[p] = t_parts[k];
                    full_col[p] = t_parts[k];
                }
                acc += m[(compose_index(&full_row, dims), compose_index(&full_col, dims))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transposes the labelled subsystems in place of the full transpose.
pub fn partial_transpose(m: &CMat, layout: &SubsystemLayout, transposed: &[&str]) -> Result<CMat> {
    check_square_for(m, layout)?;
    let t_pos = layout.positions(transposed)?;
    let dims = layout.dims();
    let d = layout.total_dim();

    let mut out = CMat::zeros(d, d);
    for r in 0..d {
        let r_parts = decompose_index(r, dims);
        for c in 0..d {
            let c_parts = decompose_index(c, dims);
            let mut rr = r_parts.clone();
            let mut cc = c_parts;
            for &p in &t_pos {
                std::mem::swap(&mut rr[p], &mut cc[p]);
            }
            out[(compose_index(&rr, dims), compose_index(&cc, dims))] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Reorders tensor factors into `new_order`; conjugation by the permutation
/// unitary, so the spectrum is untouched.
pub fn permute_subsystems(m: &CMat, layout: &SubsystemLayout, new_order: &[&str]) -> Result<CMat> {
    check_square_for(m, layout)?;
    let new_layout = layout.permuted(new_order)?;
    let positions = layout.positions(new_order)?;
    let dims = layout.dims();
    let new_dims = new_layout.dims();
    let d = layout.total_dim();

    let mut out = CMat::zeros(d, d);
    for r in 0..d {
        let r_parts = decompose_index(r, dims);
        let r_new: Vec<usize> = positions.iter().map(|&p| r_parts[p]).collect();
        let rn = compose_index(&r_new, new_dims);
        for c in 0..d {
            let c_parts = decompose_index(c, dims);
            let c_new: Vec<usize> = positions.iter().map(|&p| c_parts[p]).collect();
            out[(rn, compose_index(&c_new, new_dims))] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Explicit permutation unitary `P` with `P m P† = permute_subsystems(m)`.
pub fn permutation_unitary(layout: &SubsystemLayout, new_order: &[&str]) -> Result<CMat> {
    let new_layout = layout.permuted(new_order)?;
    let positions = layout.positions(new_order)?;
    let dims = layout.dims();
    let new_dims = new_layout.dims();
    let d = layout.total_dim();

    let mut p = CMat::zeros(d, d);
    for r in 0..d {
        let parts = decompose_index(r, dims);
        let new_parts: Vec<usize> = positions.iter().map(|&q| parts[q]).collect();
        p[(compose_index(&new_parts, new_dims), r)] = cone();
    }
    Ok(p)
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Returns eigenvalues in descending order with matching eigenvector
/// columns. The input is symmetrized before decomposition; inputs farther
/// than [`HERM_TOL`] from Hermitian are rejected. Jacobi handles the rank-
/// deficient and highly degenerate operators this crate produces (Choi
/// matrices of structured channels) where shifted-QR iterations stall.
pub fn hermitian_eig(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !all_finite(m) {
        return Err(Error::Shape("matrix has non-finite entries".into()));
    }
    let dev = herm_deviation(m);
    if dev > HERM_TOL {
        return Err(Error::Shape(format!(
            "matrix is not Hermitian (max |m - m†| = {dev:.3e})"
        )));
    }
    let mut a = (m + m.adjoint()).scale(0.5);
    let n = a.nrows();
    let mut v = identity(n);

    let scale = a.norm().max(f64::MIN_POSITIVE);
    let off_tol = 1e-15 * scale;
    const MAX_SWEEPS: usize = 60;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= off_tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= off_tol {
                    continue;
                }
                let phase = apq / r;
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let tau = (beta - alpha) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_phase = phase * Complex64::new(s, 0.0);

                // columns p, q of A <- A * R
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s_phase.conj();
                    a[(k, q)] = akp * s_phase + akq * c;
                }
                // rows p, q of A <- R† * A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s_phase;
                    a[(q, k)] = apk * s_phase.conj() + aqk * c;
                }
                a[(p, q)] = czero();
                a[(q, p)] = czero();
                a[(p, p)] = creal(a[(p, p)].re);
                a[(q, q)] = creal(a[(q, q)].re);
                // eigenvector columns <- V * R
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s_phase.conj();
                    v[(k, q)] = vkp * s_phase + vkq * c;
                }
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off > off_tol.max(1e-12 * scale) {
            return Err(Error::Numeric(format!(
                "Jacobi eigensolver failed to converge (off-diagonal {off:.3e})"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .re
            .partial_cmp(&a[(i, i)].re)
            .expect("diagonal is finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &v.column(i));
    }
    Ok((values, vectors))
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    hermitian_eig(m).map(|(v, _)| v)
}
