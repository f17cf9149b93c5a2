//! Channel representations and arithmetic: Kraus and Choi forms, CPTP
//! validation, application to states, serial and parallel composition,
//! identity extension, convex mixtures, and Stinespring sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, basis_ket, hermitian_eig, hermitian_eigenvalues, identity, ketbra, partial_trace,
    permutation_unitary, tensor, CMat, SubsystemLayout, MAX_DIM,
};
use crate::states::{self, DensityMatrix};

/// Tolerance for the CPTP invariants (trace preservation and complete
/// positivity) of channels and Choi matrices.
pub const CPTP_TOL: f64 = 1e-9;

/// Kraus operators with Frobenius norm below this are dropped after
/// composition and mixing.
const PRUNE_TOL: f64 = 1e-12;

/// A channel in Kraus form: `N(rho) = sum_i K_i rho K_i†` with declared
/// input and output subsystem layouts.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus_ops: Vec<CMat>,
    in_layout: SubsystemLayout,
    out_layout: SubsystemLayout,
}

/// Deviations measured by [`KrausChannel::validate`].
#[derive(Debug, Clone, Serialize)]
pub struct ChannelReport {
    /// `max|sum K†K - I|` entrywise.
    pub tp_deviation: f64,
    /// Minimum eigenvalue of the Choi matrix.
    pub choi_min_eigenvalue: f64,
    pub trace_preserving: bool,
    pub completely_positive: bool,
    pub accepted: bool,
    pub tolerance_used: f64,
}

impl KrausChannel {
    /// Builds a channel and enforces the trace-preservation invariant;
    /// complete positivity holds structurally for any Kraus set.
    pub fn new(
        kraus_ops: Vec<CMat>,
        in_layout: SubsystemLayout,
        out_layout: SubsystemLayout,
    ) -> Result<Self> {
        let ch = Self::new_unvalidated(kraus_ops, in_layout, out_layout)?;
        let dev = ch.tp_deviation();
        if dev > CPTP_TOL {
            return Err(Error::ChannelValidation(format!(
                "not trace preserving: max|sum K†K - I| = {dev:.3e}"
            )));
        }
        Ok(ch)
    }

    /// Builds a channel checking only shapes, for diagnostic flows that
    /// want to inspect `validate` output on suspect operators.
    pub fn new_unvalidated(
        kraus_ops: Vec<CMat>,
        in_layout: SubsystemLayout,
        out_layout: SubsystemLayout,
    ) -> Result<Self> {
        if kraus_ops.is_empty() {
            return Err(Error::Shape("a channel needs at least one Kraus operator".into()));
        }
        let d_in = in_layout.total_dim();
        let d_out = out_layout.total_dim();
        for k in &kraus_ops {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::Shape(format!(
                    "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            if !linalg::all_finite(k) {
                return Err(Error::Shape("Kraus operator has non-finite entries".into()));
            }
        }
        Ok(Self {
            kraus_ops,
            in_layout,
            out_layout,
        })
    }

    /// Identity channel on a layout.
    pub fn identity_channel(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        Self {
            kraus_ops: vec![identity(d)],
            in_layout: layout.clone(),
            out_layout: layout,
        }
    }

    /// Single-Kraus unitary channel.
    pub fn unitary_channel(u: CMat, layout: SubsystemLayout) -> Result<Self> {
        Self::new(vec![u], layout.clone(), layout)
    }

    pub fn kraus_ops(&self) -> &[CMat] {
        &self.kraus_ops
    }

    pub fn in_layout(&self) -> &SubsystemLayout {
        &self.in_layout
    }

    pub fn out_layout(&self) -> &SubsystemLayout {
        &self.out_layout
    }

    /// Square channels keep the input space.
    pub fn is_square(&self) -> bool {
        self.in_layout == self.out_layout
    }

    /// Same operators under fresh layouts (dimensions must agree).
    pub fn relabelled(
        &self,
        in_layout: SubsystemLayout,
        out_layout: SubsystemLayout,
    ) -> Result<Self> {
        if in_layout.total_dim() != self.in_layout.total_dim()
            || out_layout.total_dim() != self.out_layout.total_dim()
        {
            return Err(Error::Shape("relabelling cannot change dimensions".into()));
        }
        Ok(Self {
            kraus_ops: self.kraus_ops.clone(),
            in_layout,
            out_layout,
        })
    }

    /// `max|sum K†K - I|` entrywise.
    pub fn tp_deviation(&self) -> f64 {
        let d_in = self.in_layout.total_dim();
        let mut sum = CMat::zeros(d_in, d_in);
        for k in &self.kraus_ops {
            sum += k.adjoint() * k;
        }
        linalg::max_abs(&(sum - identity(d_in)))
    }

    /// Reports the trace-preservation and complete-positivity deviations.
    /// The Choi eigendecomposition is subject to the dimension cap.
    pub fn validate(&self) -> Result<ChannelReport> {
        let tp_deviation = self.tp_deviation();
        let choi = self.choi_op()?;
        let choi_min_eigenvalue = hermitian_eigenvalues(&choi)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let trace_preserving = tp_deviation <= CPTP_TOL;
        let completely_positive = choi_min_eigenvalue >= -CPTP_TOL;
        Ok(ChannelReport {
            tp_deviation,
            choi_min_eigenvalue,
            trace_preserving,
            completely_positive,
            accepted: trace_preserving && completely_positive,
            tolerance_used: CPTP_TOL,
        })
    }

    /// Raw action `sum_i K_i m K_i†` on an arbitrary operator.
    pub fn apply_op(&self, m: &CMat) -> Result<CMat> {
        let d_in = self.in_layout.total_dim();
        if m.nrows() != d_in || m.ncols() != d_in {
            return Err(Error::Shape(format!(
                "operator is {}x{}, channel input dimension is {d_in}",
                m.nrows(),
                m.ncols()
            )));
        }
        let d_out = self.out_layout.total_dim();
        let mut out = CMat::zeros(d_out, d_out);
        for k in &self.kraus_ops {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }

    /// Applies the channel to a state, validating the output.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.layout() != &self.in_layout {
            return Err(Error::Shape(format!(
                "state layout {:?} does not match channel input {:?}",
                rho.layout().names(),
                self.in_layout.names()
            )));
        }
        let out = self.apply_op(rho.op())?;
        // symmetrize away accumulated rounding before validation
        let out = (&out + out.adjoint()).scale(0.5);
        DensityMatrix::new(out, self.out_layout.clone())
    }

    fn choi_op(&self) -> Result<CMat> {
        let d_in = self.in_layout.total_dim();
        let d_out = self.out_layout.total_dim();
        if d_in * d_out > MAX_DIM {
            return Err(Error::Dimension(format!(
                "Choi dimension {} exceeds cap {MAX_DIM}",
                d_in * d_out
            )));
        }
        let mut j = CMat::zeros(d_in * d_out, d_in * d_out);
        for i in 0..d_in {
            for l in 0..d_in {
                let e_il = ketbra(&basis_ket(d_in, i), &basis_ket(d_in, l));
                let block = self.apply_op(&e_il)?;
                j += tensor(&e_il, &block)?;
            }
        }
        Ok(j)
    }

    /// Choi matrix `J = sum_ij |i><j| ⊗ N(|i><j|)`, unnormalized, input
    /// factor first.
    pub fn to_choi(&self) -> Result<ChoiMatrix> {
        ChoiMatrix::new(
            self.choi_op()?,
            self.in_layout.clone(),
            self.out_layout.clone(),
        )
    }
}

/// The Choi operator of a channel, with the CPTP invariants enforced.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    op: CMat,
    in_layout: SubsystemLayout,
    out_layout: SubsystemLayout,
}

impl ChoiMatrix {
    pub fn new(op: CMat, in_layout: SubsystemLayout, out_layout: SubsystemLayout) -> Result<Self> {
        let d_in = in_layout.total_dim();
        let d_out = out_layout.total_dim();
        if op.nrows() != d_in * d_out || op.ncols() != d_in * d_out {
            return Err(Error::Shape(format!(
                "Choi matrix is {}x{}, expected {}",
                op.nrows(),
                op.ncols(),
                d_in * d_out
            )));
        }
        let min_eig = hermitian_eigenvalues(&op)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -CPTP_TOL {
            return Err(Error::ChannelValidation(format!(
                "Choi matrix is not PSD (min eigenvalue {min_eig:.3e})"
            )));
        }
        let layout = SubsystemLayout::new(vec!["in", "out"], vec![d_in, d_out])?;
        let traced = partial_trace(&op, &layout, &["out"])?;
        let tp_dev = linalg::max_abs(&(traced - identity(d_in)));
        if tp_dev > CPTP_TOL {
            return Err(Error::ChannelValidation(format!(
                "partial trace over the output deviates from identity by {tp_dev:.3e}"
            )));
        }
        Ok(Self {
            op,
            in_layout,
            out_layout,
        })
    }

    pub fn op(&self) -> &CMat {
        &self.op
    }

    pub fn in_layout(&self) -> &SubsystemLayout {
        &self.in_layout
    }

    pub fn out_layout(&self) -> &SubsystemLayout {
        &self.out_layout
    }

    /// Evaluates the channel through its Choi matrix:
    /// `N(rho) = Tr_in[(rho^T ⊗ I) J]`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.layout() != &self.in_layout {
            return Err(Error::Shape(format!(
                "state layout {:?} does not match channel input {:?}",
                rho.layout().names(),
                self.in_layout.names()
            )));
        }
        let d_in = self.in_layout.total_dim();
        let d_out = self.out_layout.total_dim();
        let lifted = tensor(&rho.op().transpose(), &identity(d_out))?;
        let layout = SubsystemLayout::new(vec!["in", "out"], vec![d_in, d_out])?;
        let out = partial_trace(&(lifted * &self.op), &layout, &["in"])?;
        let out = (&out + out.adjoint()).scale(0.5);
        DensityMatrix::new(out, self.out_layout.clone())
    }

    /// Kraus operators recovered from the eigendecomposition of the Choi
    /// matrix.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let d_in = self.in_layout.total_dim();
        let d_out = self.out_layout.total_dim();
        let (vals, vecs) = hermitian_eig(&self.op)?;
        let mut ops = Vec::new();
        for (k, &v) in vals.iter().enumerate() {
            if v <= PRUNE_TOL {
                continue;
            }
            let col = vecs.column(k);
            let mut op = CMat::zeros(d_out, d_in);
            for i in 0..d_in {
                for o in 0..d_out {
                    op[(o, i)] = col[i * d_out + o] * linalg::creal(v.sqrt());
                }
            }
            ops.push(op);
        }
        KrausChannel::new(ops, self.in_layout.clone(), self.out_layout.clone())
    }
}

/// Diagnostic CPTP report for a raw Choi operator without enforcing the
/// invariants.
pub fn validate_choi_op(op: &CMat, d_in: usize, d_out: usize) -> Result<ChannelReport> {
    if op.nrows() != d_in * d_out || op.ncols() != d_in * d_out {
        return Err(Error::Shape(format!(
            "Choi matrix is {}x{}, expected {}",
            op.nrows(),
            op.ncols(),
            d_in * d_out
        )));
    }
    let choi_min_eigenvalue = hermitian_eigenvalues(op)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let layout = SubsystemLayout::new(vec!["in", "out"], vec![d_in, d_out])?;
    let traced = partial_trace(op, &layout, &["out"])?;
    let tp_deviation = linalg::max_abs(&(traced - identity(d_in)));
    let trace_preserving = tp_deviation <= CPTP_TOL;
    let completely_positive = choi_min_eigenvalue >= -CPTP_TOL;
    Ok(ChannelReport {
        tp_deviation,
        choi_min_eigenvalue,
        trace_preserving,
        completely_positive,
        accepted: trace_preserving && completely_positive,
        tolerance_used: CPTP_TOL,
    })
}

/// Serial composition: `compose_serial(m, n)` applies `n` first, then `m`.
pub fn compose_serial(m: &KrausChannel, n: &KrausChannel) -> Result<KrausChannel> {
    if n.out_layout() != m.in_layout() {
        return Err(Error::Shape(format!(
            "inner output layout {:?} does not feed outer input {:?}",
            n.out_layout().names(),
            m.in_layout().names()
        )));
    }
    let mut ops = Vec::with_capacity(m.kraus_ops().len() * n.kraus_ops().len());
    for a in m.kraus_ops() {
        for b in n.kraus_ops() {
            let prod = a * b;
            if prod.norm() >= PRUNE_TOL {
                ops.push(prod);
            }
        }
    }
    KrausChannel::new(ops, n.in_layout().clone(), m.out_layout().clone())
}

fn merge_canonical(a: &SubsystemLayout, b: &SubsystemLayout) -> Result<(SubsystemLayout, CMat)> {
    for n in a.names() {
        if b.names().contains(n) {
            return Err(Error::Label(format!("label {n:?} appears in both factors")));
        }
    }
    let mut names: Vec<String> = a.names().to_vec();
    names.extend(b.names().iter().cloned());
    let mut dims: Vec<usize> = a.dims().to_vec();
    dims.extend(b.dims().iter().copied());
    let concat = SubsystemLayout::new(names, dims)?;
    let (a_side, b_side) = concat.side_split();
    let order: Vec<&str> = a_side
        .iter()
        .chain(b_side.iter())
        .map(String::as_str)
        .collect();
    let perm = permutation_unitary(&concat, &order)?;
    Ok((concat.permuted(&order)?, perm))
}

/// Parallel composition `m ⊗ n`, with the joint layout reordered so all
/// A-side labels precede all B-side labels.
pub fn tensor_channels(m: &KrausChannel, n: &KrausChannel) -> Result<KrausChannel> {
    let (in_layout, p_in) = merge_canonical(m.in_layout(), n.in_layout())?;
    let (out_layout, p_out) = merge_canonical(m.out_layout(), n.out_layout())?;
    let mut ops = Vec::with_capacity(m.kraus_ops().len() * n.kraus_ops().len());
    for a in m.kraus_ops() {
        for b in n.kraus_ops() {
            ops.push(&p_out * tensor(a, b)? * p_in.adjoint());
        }
    }
    KrausChannel::new(ops, in_layout, out_layout)
}

/// Extends a two-subsystem channel by identities on auxiliary systems,
/// yielding a channel on the canonical `[A', A, B', B]` layout.
pub fn extend_with_identity(
    n: &KrausChannel,
    aux_a_dim: usize,
    aux_b_dim: usize,
) -> Result<KrausChannel> {
    if aux_a_dim < 1 || aux_b_dim < 1 {
        return Err(Error::Dimension("auxiliary dimensions must be >= 1".into()));
    }
    let expect = ["A", "B"];
    if n.in_layout().names() != expect || n.out_layout().names() != expect {
        return Err(Error::Unsupported(
            "identity extension is defined for channels on [A, B]".into(),
        ));
    }
    let aux = SubsystemLayout::new(vec!["A'", "B'"], vec![aux_a_dim, aux_b_dim])?;
    let id = KrausChannel::identity_channel(aux);
    tensor_channels(&id, n)
}

/// Convex mixture of channels with the given probability weights.
pub fn convex_mix(channels: &[KrausChannel], weights: &[f64]) -> Result<KrausChannel> {
    if channels.is_empty() || channels.len() != weights.len() {
        return Err(Error::Argument(
            "need equally many channels and weights, at least one".into(),
        ));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::Argument("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Argument(format!("weights sum to {total}, expected 1")));
    }
    let first = &channels[0];
    for ch in channels {
        if ch.in_layout() != first.in_layout() || ch.out_layout() != first.out_layout() {
            return Err(Error::Shape("mixture components must share layouts".into()));
        }
    }
    let mut ops = Vec::new();
    for (ch, &w) in channels.iter().zip(weights) {
        let scale = w.sqrt();
        for k in ch.kraus_ops() {
            let scaled = k.scale(scale);
            if scaled.norm() >= PRUNE_TOL {
                ops.push(scaled);
            }
        }
    }
    KrausChannel::new(ops, first.in_layout().clone(), first.out_layout().clone())
}

/// Haar-random isometry into `env_dim` environment levels, truncated to a
/// Kraus set: a Stinespring-sampled square channel on `layout`.
pub fn random_channel(layout: &SubsystemLayout, env_dim: usize, seed: u64) -> Result<KrausChannel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_channel_with_rng(layout, env_dim, &mut rng)
}

pub(crate) fn random_channel_with_rng(
    layout: &SubsystemLayout,
    env_dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<KrausChannel> {
    if env_dim < 1 {
        return Err(Error::Dimension("environment dimension must be >= 1".into()));
    }
    let d = layout.total_dim();
    let rows = d.checked_mul(env_dim).filter(|&r| r <= MAX_DIM).ok_or_else(|| {
        Error::Dimension(format!("Stinespring dimension {d}*{env_dim} exceeds cap {MAX_DIM}"))
    })?;
    // thin QR of a tall Ginibre matrix gives a Haar isometry
    let g = states::ginibre(rows, d, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut phases = CMat::zeros(d, d);
    for i in 0..d {
        let rii = r[(i, i)];
        phases[(i, i)] = if rii.norm() > 0.0 {
            rii / rii.norm()
        } else {
            linalg::cone()
        };
    }
    let v = q * phases;
    let mut ops = Vec::with_capacity(env_dim);
    for e in 0..env_dim {
        let mut k = CMat::zeros(d, d);
        for o in 0..d {
            for i in 0..d {
                k[(o, i)] = v[(o * env_dim + e, i)];
            }
        }
        ops.push(k);
    }
    KrausChannel::new(ops, layout.clone(), layout.clone())
}

/// Random-unitary mixture `sum_k p_k U_k rho U_k†`: a seeded unital
/// channel with `components` Haar factors and Dirichlet-like weights.
pub fn random_unitary_mixture(
    layout: &SubsystemLayout,
    components: usize,
    seed: u64,
) -> Result<KrausChannel> {
    if components < 1 {
        return Err(Error::Argument("mixture needs at least one component".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = layout.total_dim();
    let mut weights: Vec<f64> = (0..components)
        .map(|_| {
            let x: f64 = rand::Rng::gen_range(&mut rng, 0.05..1.0);
            x
        })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let channels: Vec<KrausChannel> = (0..components)
        .map(|_| {
            KrausChannel::unitary_channel(states::haar_unitary_with_rng(d, &mut rng), layout.clone())
        })
        .collect::<Result<_>>()?;
    convex_mix(&channels, &weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{creal, fro_dist, max_abs};
    use crate::states::{max_entangled_ket, random_state, tensor_states};

    fn qubit_pair() -> SubsystemLayout {
        SubsystemLayout::bipartite(2, 2).unwrap()
    }

    fn swap_channel_d2() -> KrausChannel {
        let u = permutation_unitary(&qubit_pair(), &["B", "A"]).unwrap();
        KrausChannel::unitary_channel(u, qubit_pair()).unwrap()
    }

    /// Constant channel preparing `|00><00|` on a qubit pair.
    fn r0_channel_d2() -> KrausChannel {
        let mut ops = Vec::new();
        for i in 0..4 {
            ops.push(ketbra(&basis_ket(4, 0), &basis_ket(4, i)));
        }
        KrausChannel::new(ops, qubit_pair(), qubit_pair()).unwrap()
    }

    #[test]
    fn identity_channel_validates_cleanly() {
        let report = KrausChannel::identity_channel(qubit_pair())
            .validate()
            .unwrap();
        assert!(report.accepted);
        assert!(report.tp_deviation < 1e-15);
        assert!(report.choi_min_eigenvalue > -1e-15);
    }

    #[test]
    fn lone_projector_is_not_trace_preserving() {
        let p0 = ketbra(&basis_ket(2, 0), &basis_ket(2, 0));
        let layout = SubsystemLayout::single("A", 2).unwrap();
        let ch = KrausChannel::new_unvalidated(vec![p0], layout.clone(), layout).unwrap();
        let report = ch.validate().unwrap();
        assert!(!report.trace_preserving);
        assert!(!report.accepted);
        assert!((report.tp_deviation - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stinespring_samples_validate() {
        // isometry oracle: the stacked Kraus blocks form V with V†V = I
        for seed in 0..100u64 {
            let ch = random_channel(&qubit_pair(), 3, seed).unwrap();
            let report = ch.validate().unwrap();
            assert!(report.accepted, "seed {seed}: {report:?}");
            assert!(report.tp_deviation < 1e-9);
            let mut gram = CMat::zeros(4, 4);
            for k in ch.kraus_ops() {
                gram += k.adjoint() * k;
            }
            assert!(fro_dist(&gram, &identity(4)) < 1e-9);
        }
    }

    #[test]
    fn apply_identity_returns_input() {
        let ch = KrausChannel::identity_channel(qubit_pair());
        let rho = random_state(&qubit_pair(), 4, 3).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert!(fro_dist(out.op(), rho.op()) < 1e-15);
    }

    #[test]
    fn swap_channel_swaps_product_states() {
        let a = random_state(&SubsystemLayout::single("A", 2).unwrap(), 2, 5).unwrap();
        let b = random_state(&SubsystemLayout::single("B", 2).unwrap(), 2, 6).unwrap();
        let prod = tensor_states(&a, &b).unwrap();
        let swapped = swap_channel_d2().apply(&prod).unwrap();
        let want = tensor(b.op(), a.op()).unwrap();
        assert!(fro_dist(swapped.op(), &want) < 1e-12);
    }

    #[test]
    fn constant_channel_prepares_its_target() {
        let rho = random_state(&qubit_pair(), 4, 8).unwrap();
        let out = r0_channel_d2().apply(&rho).unwrap();
        let zero = ketbra(&basis_ket(4, 0), &basis_ket(4, 0));
        assert!(fro_dist(out.op(), &zero) < 1e-12);
    }

    #[test]
    fn apply_rejects_layout_mismatch() {
        let ch = KrausChannel::identity_channel(qubit_pair());
        let rho = random_state(&SubsystemLayout::bipartite(2, 3).unwrap(), 2, 1).unwrap();
        assert!(ch.apply(&rho).is_err());
    }

    #[test]
    fn choi_of_identity_is_unnormalized_bell() {
        let layout = SubsystemLayout::single("A", 2).unwrap();
        let ch = KrausChannel::identity_channel(layout);
        let choi = ch.to_choi().unwrap();
        let phi = max_entangled_ket(2);
        let want = ketbra(&phi, &phi).scale(2.0);
        assert!(fro_dist(choi.op(), &want) < 1e-12);
    }

    #[test]
    fn choi_of_depolarizing_is_product_identity() {
        let d = 2usize;
        let layout = SubsystemLayout::single("A", d).unwrap();
        let mut ops = Vec::new();
        for i in 0..d {
            for j in 0..d {
                ops.push(ketbra(&basis_ket(d, i), &basis_ket(d, j)).scale(1.0 / (d as f64).sqrt()));
            }
        }
        let ch = KrausChannel::new(ops, layout.clone(), layout).unwrap();
        let choi = ch.to_choi().unwrap();
        let want = tensor(&identity(d), &identity(d).scale(1.0 / d as f64)).unwrap();
        assert!(fro_dist(choi.op(), &want) < 1e-12);
    }

    #[test]
    fn choi_apply_agrees_with_kraus_apply() {
        // dual-evaluation oracle over random channels and states
        for seed in 0..20u64 {
            let ch = random_channel(&qubit_pair(), 2, 100 + seed).unwrap();
            let choi = ch.to_choi().unwrap();
            let rho = random_state(&qubit_pair(), 4, 200 + seed).unwrap();
            let direct = ch.apply(&rho).unwrap();
            let via_choi = choi.apply(&rho).unwrap();
            assert!(fro_dist(direct.op(), via_choi.op()) < 1e-9);
        }
    }

    #[test]
    fn choi_to_kraus_round_trip_is_behavioral_identity() {
        for seed in 0..5u64 {
            let ch = random_channel(&qubit_pair(), 3, 300 + seed).unwrap();
            let back = ch.to_choi().unwrap().to_kraus().unwrap();
            let rho = random_state(&qubit_pair(), 4, 400 + seed).unwrap();
            let a = ch.apply(&rho).unwrap();
            let b = back.apply(&rho).unwrap();
            assert!(fro_dist(a.op(), b.op()) < 1e-9);
        }
    }

    #[test]
    fn compose_with_identity_is_identity_of_behavior() {
        let ch = random_channel(&qubit_pair(), 2, 7).unwrap();
        let id = KrausChannel::identity_channel(qubit_pair());
        let comp = compose_serial(&id, &ch).unwrap();
        let rho = random_state(&qubit_pair(), 4, 9).unwrap();
        assert!(fro_dist(comp.apply(&rho).unwrap().op(), ch.apply(&rho).unwrap().op()) < 1e-12);
    }

    #[test]
    fn compose_multiplies_kraus_counts() {
        let m = random_channel(&qubit_pair(), 3, 11).unwrap();
        let n = random_channel(&qubit_pair(), 2, 12).unwrap();
        let comp = compose_serial(&m, &n).unwrap();
        assert_eq!(comp.kraus_ops().len(), 6);
        let rho = random_state(&qubit_pair(), 4, 13).unwrap();
        let direct = m.apply(&n.apply(&rho).unwrap()).unwrap();
        assert!(fro_dist(comp.apply(&rho).unwrap().op(), direct.op()) < 1e-9);
    }

    #[test]
    fn compose_is_behaviorally_associative() {
        let a = random_channel(&qubit_pair(), 2, 21).unwrap();
        let b = random_channel(&qubit_pair(), 2, 22).unwrap();
        let c = random_channel(&qubit_pair(), 2, 23).unwrap();
        let left = compose_serial(&compose_serial(&a, &b).unwrap(), &c).unwrap();
        let right = compose_serial(&a, &compose_serial(&b, &c).unwrap()).unwrap();
        for seed in 0..5u64 {
            let rho = random_state(&qubit_pair(), 4, 500 + seed).unwrap();
            assert!(
                fro_dist(left.apply(&rho).unwrap().op(), right.apply(&rho).unwrap().op()) < 1e-9
            );
        }
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let id_a = KrausChannel::identity_channel(SubsystemLayout::single("A", 2).unwrap());
        let id_b = KrausChannel::identity_channel(SubsystemLayout::single("B", 3).unwrap());
        let joint = tensor_channels(&id_a, &id_b).unwrap();
        let rho = random_state(&SubsystemLayout::bipartite(2, 3).unwrap(), 3, 31).unwrap();
        let rho = rho
            .relabelled(vec!["A", "B"])
            .unwrap();
        assert!(fro_dist(joint.apply(&rho).unwrap().op(), rho.op()) < 1e-12);
    }

    #[test]
    fn tensor_channels_factorize_on_products() {
        let lay_a = SubsystemLayout::single("A", 2).unwrap();
        let lay_b = SubsystemLayout::single("B", 2).unwrap();
        let m = random_channel(&lay_a, 2, 41).unwrap();
        let n = random_channel(&lay_b, 2, 42).unwrap();
        let joint = tensor_channels(&m, &n).unwrap();
        let a = random_state(&lay_a, 2, 43).unwrap();
        let b = random_state(&lay_b, 2, 44).unwrap();
        let prod = tensor_states(&a, &b).unwrap();
        let lhs = joint.apply(&prod).unwrap();
        let rhs = tensor(m.apply(&a).unwrap().op(), n.apply(&b).unwrap().op()).unwrap();
        assert!(fro_dist(lhs.op(), &rhs) < 1e-9);
    }

    #[test]
    fn tensor_channels_reject_label_collisions() {
        let id = KrausChannel::identity_channel(SubsystemLayout::single("A", 2).unwrap());
        assert!(matches!(tensor_channels(&id, &id), Err(Error::Label(_))));
    }

    #[test]
    fn tensor_orders_extended_labels_canonically() {
        let m = random_channel(
            &SubsystemLayout::new(vec!["A'", "B'"], vec![2, 2]).unwrap(),
            2,
            51,
        )
        .unwrap();
        let n = random_channel(&qubit_pair(), 2, 52).unwrap();
        let joint = tensor_channels(&m, &n).unwrap();
        assert_eq!(joint.in_layout().names(), &["A'", "A", "B'", "B"]);
    }

    #[test]
    fn extend_identity_channel_stays_identity() {
        let id = KrausChannel::identity_channel(qubit_pair());
        let ext = extend_with_identity(&id, 2, 2).unwrap();
        assert_eq!(ext.in_layout().names(), &["A'", "A", "B'", "B"]);
        let rho = random_state(ext.in_layout(), 4, 61).unwrap();
        assert!(fro_dist(ext.apply(&rho).unwrap().op(), rho.op()) < 1e-12);
    }

    #[test]
    fn extension_commutes_with_tensor_on_products() {
        let n = random_channel(&qubit_pair(), 2, 71).unwrap();
        let ext = extend_with_identity(&n, 2, 2).unwrap();
        let sigma = random_state(
            &SubsystemLayout::new(vec!["A'", "B'"], vec![2, 2]).unwrap(),
            4,
            72,
        )
        .unwrap();
        let rho = random_state(&qubit_pair(), 4, 73).unwrap();
        let joint = tensor_states(&sigma, &rho).unwrap();
        let lhs = ext.apply(&joint).unwrap();
        let rhs = tensor_states(&sigma, &n.apply(&rho).unwrap()).unwrap();
        assert!(fro_dist(lhs.op(), rhs.op()) < 1e-9);
    }

    #[test]
    fn extension_is_additive_for_conditional_entropy() {
        use crate::states::conditional_entropy;
        let n = random_channel(&qubit_pair(), 2, 81).unwrap();
        let ext = extend_with_identity(&n, 2, 2).unwrap();
        let sigma = random_state(
            &SubsystemLayout::new(vec!["A'", "B'"], vec![2, 2]).unwrap(),
            4,
            82,
        )
        .unwrap();
        let rho = random_state(&qubit_pair(), 4, 83).unwrap();
        let joint = tensor_states(&sigma, &rho).unwrap();
        let out = ext.apply(&joint).unwrap();
        let lhs = conditional_entropy(&out, &["A'", "A"]).unwrap();
        let rhs = conditional_entropy(&sigma, &["A'"]).unwrap()
            + conditional_entropy(&n.apply(&rho).unwrap(), &["A"]).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn extend_rejects_unexpected_layouts() {
        let id = KrausChannel::identity_channel(SubsystemLayout::single("A", 2).unwrap());
        assert!(extend_with_identity(&id, 2, 2).is_err());
        let id2 = KrausChannel::identity_channel(qubit_pair());
        assert!(extend_with_identity(&id2, 0, 2).is_err());
    }

    #[test]
    fn convex_mix_of_one_channel_is_that_channel() {
        let ch = random_channel(&qubit_pair(), 2, 91).unwrap();
        let mix = convex_mix(std::slice::from_ref(&ch), &[1.0]).unwrap();
        let rho = random_state(&qubit_pair(), 4, 92).unwrap();
        assert!(fro_dist(mix.apply(&rho).unwrap().op(), ch.apply(&rho).unwrap().op()) < 1e-12);
    }

    #[test]
    fn convex_mix_acts_as_weighted_sum() {
        let id = KrausChannel::identity_channel(qubit_pair());
        let r0 = r0_channel_d2();
        let mix = convex_mix(&[id, r0], &[0.5, 0.5]).unwrap();
        let e11 = DensityMatrix::from_ket(&basis_ket(4, 3), qubit_pair()).unwrap();
        let out = mix.apply(&e11).unwrap();
        let want = (ketbra(&basis_ket(4, 3), &basis_ket(4, 3))
            + ketbra(&basis_ket(4, 0), &basis_ket(4, 0)))
        .scale(0.5);
        assert!(fro_dist(out.op(), &want) < 1e-12);
    }

    #[test]
    fn convex_mix_rejects_bad_weights() {
        let id = KrausChannel::identity_channel(qubit_pair());
        assert!(convex_mix(std::slice::from_ref(&id), &[0.5]).is_err());
        assert!(convex_mix(&[id.clone(), id.clone()], &[1.5, -0.5]).is_err());
        assert!(convex_mix(&[id], &[]).is_err());
    }

    #[test]
    fn env_dim_one_gives_a_unitary_channel() {
        let ch = random_channel(&qubit_pair(), 1, 101).unwrap();
        assert_eq!(ch.kraus_ops().len(), 1);
        let k = &ch.kraus_ops()[0];
        assert!(fro_dist(&(k.adjoint() * k), &identity(4)) < 1e-12);
    }

    #[test]
    fn random_channel_is_deterministic() {
        let a = random_channel(&qubit_pair(), 3, 111).unwrap();
        let b = random_channel(&qubit_pair(), 3, 111).unwrap();
        for (x, y) in a.kraus_ops().iter().zip(b.kraus_ops()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn oversized_environments_still_yield_valid_channels() {
        let layout = SubsystemLayout::single("A", 2).unwrap();
        let ch = random_channel(&layout, 7, 112).unwrap();
        assert_eq!(ch.kraus_ops().len(), 7);
        assert!(ch.validate().unwrap().accepted);
        assert!(random_channel(&qubit_pair(), 2000, 113).is_err());
    }

    #[test]
    fn apply_preserves_trace_and_positivity() {
        for seed in 0..10u64 {
            let ch = random_channel(&qubit_pair(), 4, 600 + seed).unwrap();
            let rho = random_state(&qubit_pair(), 2, 700 + seed).unwrap();
            let out = ch.apply(&rho).unwrap();
            assert!((out.op().trace().re - 1.0).abs() < 1e-9);
            assert!(out.eigenvalues().unwrap().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn choi_separation_implies_behavioral_difference() {
        // channels whose Choi matrices are far apart must differ on some
        // probe basis state
        let m = random_channel(&qubit_pair(), 2, 121).unwrap();
        let n = random_channel(&qubit_pair(), 2, 122).unwrap();
        let dist = fro_dist(m.to_choi().unwrap().op(), n.to_choi().unwrap().op());
        assert!(dist > 1e-6);
        let basis = crate::states::density_basis(4).unwrap();
        let mut max_gap: f64 = 0.0;
        for probe in basis.elements() {
            let probe = DensityMatrix::new(probe.op().clone(), qubit_pair()).unwrap();
            let gap = fro_dist(m.apply(&probe).unwrap().op(), n.apply(&probe).unwrap().op());
            max_gap = max_gap.max(gap);
        }
        assert!(max_gap > 1e-8, "agreeing on all probes, Choi distance {dist}");
    }

    #[test]
    fn rejects_empty_and_mismatched_kraus_sets() {
        let layout = SubsystemLayout::single("A", 2).unwrap();
        assert!(KrausChannel::new_unvalidated(vec![], layout.clone(), layout.clone()).is_err());
        let bad = vec![identity(2), identity(3)];
        assert!(KrausChannel::new_unvalidated(bad, layout.clone(), layout).is_err());
    }

    #[test]
    fn choi_matrix_invariants_are_enforced() {
        let layout = SubsystemLayout::single("A", 2).unwrap();
        // not PSD
        let mut bad = identity(4);
        bad[(3, 3)] = creal(-0.5);
        assert!(ChoiMatrix::new(bad, layout.clone(), layout.clone()).is_err());
        // PSD but not trace preserving
        let bad2 = identity(4).scale(0.3);
        assert!(ChoiMatrix::new(bad2, layout.clone(), layout).is_err());
    }

    #[test]
    fn validate_reports_max_abs_deviation() {
        let layout = SubsystemLayout::single("A", 2).unwrap();
        let scaled = identity(2).scale(0.999_999);
        let ch = KrausChannel::new_unvalidated(vec![scaled], layout.clone(), layout).unwrap();
        let report = ch.validate().unwrap();
        let want = 1.0 - 0.999_999f64.powi(2);
        assert!((report.tp_deviation - want).abs() < 1e-12);
        assert!(!report.accepted);
        assert!(max_abs(&identity(1)) > 0.0);
    }
}
