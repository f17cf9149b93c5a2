//! Named channels and states used as fixtures: swap, swap-and-prepare,
//! replacement and classical-quantum channels, the separable A-unital
//! family, and the entangling counterexample states.
//!
//! Every [`GalleryEntry`] checks its expected detector verdicts at
//! construction time, so building the gallery is itself a test.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{compose_serial, tensor_channels, KrausChannel};
use crate::detect::{is_a_unital, is_b_unital, is_unital, DETECT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    basis_ket, fro_dist, hermitian_eig, identity, ket_as_mat, ketbra, permutation_unitary, tensor,
    CMat, SubsystemLayout,
};
use crate::states::{haar_unitary_with_rng, max_entangled_ket, DensityMatrix};

/// A named channel with its expected detector verdicts.
#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: String,
    pub channel: KrausChannel,
    /// Expected verdicts keyed by detector: `aunital`, `bunital`, `unital`.
    pub expected: Vec<(String, bool)>,
    /// Whether the Kraus operators are products by construction; `None`
    /// when the construction makes no separability claim.
    pub separable_by_construction: Option<bool>,
    /// How the entry was built.
    pub provenance: String,
}

impl GalleryEntry {
    fn checked(
        name: &str,
        channel: KrausChannel,
        expected: [(&str, bool); 3],
        separable_by_construction: Option<bool>,
        provenance: &str,
    ) -> Result<Self> {
        for (detector, want) in expected {
            let report = match detector {
                "aunital" => is_a_unital(&channel, DETECT_TOL)?,
                "bunital" => is_b_unital(&channel, DETECT_TOL)?,
                "unital" => is_unital(&channel, DETECT_TOL)?,
                other => return Err(Error::Argument(format!("unknown detector {other:?}"))),
            };
            if report.verdict != want {
                return Err(Error::Numeric(format!(
                    "gallery entry {name:?}: detector {detector} returned {}, expected {want} \
                     (max deviation {:.3e})",
                    report.verdict, report.max_deviation
                )));
            }
        }
        Ok(GalleryEntry {
            name: name.into(),
            channel,
            expected: expected
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            separable_by_construction,
            provenance: provenance.into(),
        })
    }
}

/// The unitary channel swapping the two qudits: `U_s = sum_ij |ji><ij|`.
pub fn swap_channel(d: usize) -> Result<KrausChannel> {
    if d < 1 {
        return Err(Error::Dimension("swap needs dimension >= 1".into()));
    }
    let layout = SubsystemLayout::bipartite(d, d)?;
    let u = permutation_unitary(&layout, &["B", "A"])?;
    KrausChannel::unitary_channel(u, layout)
}

/// Partial trace over the A side: `[A, B] -> [B]`, Kraus `{<i|_A ⊗ I_B}`.
pub fn partial_trace_a_channel(d_a: usize, d_b: usize) -> Result<KrausChannel> {
    let in_layout = SubsystemLayout::bipartite(d_a, d_b)?;
    let out_layout = SubsystemLayout::single("B", d_b)?;
    let mut ops = Vec::with_capacity(d_a);
    for i in 0..d_a {
        ops.push(tensor(&ket_as_mat(&basis_ket(d_a, i)).adjoint(), &identity(d_b))?);
    }
    KrausChannel::new(ops, in_layout, out_layout)
}

/// Preparation of `I_A/d`: `[B] -> [A, B]`, Kraus `{|i>_A ⊗ I_B / sqrt d}`.
pub fn prepare_mixed_a_channel(d_a: usize, d_b: usize) -> Result<KrausChannel> {
    let in_layout = SubsystemLayout::single("B", d_b)?;
    let out_layout = SubsystemLayout::bipartite(d_a, d_b)?;
    let scale = 1.0 / (d_a as f64).sqrt();
    let mut ops = Vec::with_capacity(d_a);
    for i in 0..d_a {
        ops.push(tensor(&ket_as_mat(&basis_ket(d_a, i)).scale(scale), &identity(d_b))?);
    }
    KrausChannel::new(ops, in_layout, out_layout)
}

/// Swap-and-prepare: swap the sides, trace out A, then prepare `I_A/d`.
/// A-unital yet entangling across the extended cut.
pub fn swap_and_prepare(d: usize) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::Dimension("swap-and-prepare needs dimension >= 2".into()));
    }
    let sw = swap_channel(d)?;
    let tr = partial_trace_a_channel(d, d)?;
    let pr = prepare_mixed_a_channel(d, d)?;
    compose_serial(&pr, &compose_serial(&tr, &sw)?)
}

/// Constant channel replacing every input with `rho_a ⊗ rho_b`.
pub fn replacement_channel(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
) -> Result<KrausChannel> {
    if rho_a.layout().len() != 1 || rho_b.layout().len() != 1 {
        return Err(Error::Argument(
            "replacement target must be a product of two single-system states".into(),
        ));
    }
    let d_a = rho_a.dim();
    let d_b = rho_b.dim();
    let layout = SubsystemLayout::bipartite(d_a, d_b)?;
    let d = d_a * d_b;

    let target = tensor(rho_a.op(), rho_b.op())?;
    let (vals, vecs) = hermitian_eig(&target)?;
    let mut ops = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if v <= 1e-14 {
            continue;
        }
        let col = ket_as_mat(&vecs.column(k).clone_owned()).scale(v.sqrt());
        for j in 0..d {
            ops.push(&col * ket_as_mat(&basis_ket(d, j)).adjoint());
        }
    }
    KrausChannel::new(ops, layout.clone(), layout)
}

/// `R_0`: the replacement channel preparing `|0...0><0...0|`.
pub fn r0_channel(d: usize) -> Result<KrausChannel> {
    let zero_a = DensityMatrix::from_ket(&basis_ket(d, 0), SubsystemLayout::single("A", d)?)?;
    let zero_b = DensityMatrix::from_ket(&basis_ket(d, 0), SubsystemLayout::single("B", d)?)?;
    replacement_channel(&zero_a, &zero_b)
}

/// Separable channel `sum_i (K_i ⊗ L_i) rho (K_i ⊗ L_i)†` with every
/// `K_i` unitary; A-unital by construction.
pub fn separable_aunital_family(
    unitaries: &[CMat],
    b_ops: &[CMat],
) -> Result<KrausChannel> {
    if unitaries.is_empty() || unitaries.len() != b_ops.len() {
        return Err(Error::Argument(
            "need equally many A-side unitaries and B-side operators".into(),
        ));
    }
    let d_a = unitaries[0].nrows();
    let d_b = b_ops[0].nrows();
    for k in unitaries {
        if k.nrows() != d_a || k.ncols() != d_a {
            return Err(Error::Shape("A-side operators must share dimensions".into()));
        }
        let dev = fro_dist(&(k.adjoint() * k), &identity(d_a));
        if dev > 1e-9 {
            return Err(Error::Argument(format!(
                "A-side operator is not unitary (deviation {dev:.3e})"
            )));
        }
    }
    let mut ops = Vec::with_capacity(unitaries.len());
    for (k, l) in unitaries.iter().zip(b_ops) {
        ops.push(tensor(k, l)?);
    }
    let layout = SubsystemLayout::bipartite(d_a, d_b)?;
    KrausChannel::new(ops, layout.clone(), layout)
}

/// Classical-quantum channel `M(rho) = sum_i <i|rho|i> |0><0|` on one
/// system (entanglement breaking).
pub fn classical_quantum_channel(d: usize, label: &str) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::Dimension(
            "classical-quantum channel needs dimension >= 2".into(),
        ));
    }
    let layout = SubsystemLayout::single(label, d)?;
    let mut ops = Vec::with_capacity(d);
    for i in 0..d {
        ops.push(ketbra(&basis_ket(d, 0), &basis_ket(d, i)));
    }
    KrausChannel::new(ops, layout.clone(), layout)
}

/// `chi = |phi+><phi+|_{A'A} ⊗ |00><00|_{B'B}`: separable across the
/// `A'A|B'B` cut, mapped to an entangled state by the extended
/// swap-and-prepare channel.
pub fn chi_state(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::Dimension("chi needs dimension >= 2".into()));
    }
    let phi = DensityMatrix::from_ket(
        &max_entangled_ket(d),
        SubsystemLayout::new(vec!["A'", "A"], vec![d, d])?,
    )?;
    let zero_bp = DensityMatrix::from_ket(&basis_ket(d, 0), SubsystemLayout::single("B'", d)?)?;
    let zero_b = DensityMatrix::from_ket(&basis_ket(d, 0), SubsystemLayout::single("B", d)?)?;
    crate::states::tensor_states(
        &phi,
        &crate::states::tensor_states(&zero_bp, &zero_b)?,
    )
}

/// Closed form of the extended swap-and-prepare output on [`chi_state`]:
/// `|phi+><phi+|_{A'B} ⊗ I_A/d ⊗ |0><0|_{B'}` on `[A', A, B', B]`.
pub fn chi_prime_state(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::Dimension("chi' needs dimension >= 2".into()));
    }
    // build on [A', B, A, B'] then reorder
    let phi = DensityMatrix::from_ket(
        &max_entangled_ket(d),
        SubsystemLayout::new(vec!["A'", "B"], vec![d, d])?,
    )?;
    let mixed_a = crate::states::maximally_mixed(SubsystemLayout::single("A", d)?);
    let zero_bp = DensityMatrix::from_ket(&basis_ket(d, 0), SubsystemLayout::single("B'", d)?)?;
    let joint = crate::states::tensor_states(
        &phi,
        &crate::states::tensor_states(&mixed_a, &zero_bp)?,
    )?;
    joint.permuted(&["A'", "A", "B'", "B"])
}

/// The standard gallery at dimension `d`, every entry self-checked.
pub fn standard_gallery(d: usize) -> Result<Vec<GalleryEntry>> {
    if !(2..=8).contains(&d) {
        return Err(Error::Dimension("gallery is built for 2 <= d <= 8".into()));
    }
    let bipartite = SubsystemLayout::bipartite(d, d)?;
    let mut entries = Vec::new();

    entries.push(GalleryEntry::checked(
        "identity",
        KrausChannel::identity_channel(bipartite.clone()),
        [("aunital", true), ("bunital", true), ("unital", true)],
        Some(true),
        "identity map",
    )?);

    entries.push(GalleryEntry::checked(
        "swap",
        swap_channel(d)?,
        [("aunital", false), ("bunital", false), ("unital", true)],
        None,
        "unitary that exchanges the two qudits",
    )?);

    let sp = swap_and_prepare(d)?;
    entries.push(GalleryEntry::checked(
        "swap_prepare",
        sp.clone(),
        [("aunital", true), ("bunital", false), ("unital", true)],
        None,
        "swap, trace out A, prepare I/d on A",
    )?);

    let sw = swap_channel(d)?;
    let conj = compose_serial(&sw, &compose_serial(&sp, &sw)?)?;
    entries.push(GalleryEntry::checked(
        "swap_prepare_conj",
        conj,
        [("aunital", false), ("bunital", true), ("unital", true)],
        None,
        "swap-and-prepare conjugated by the swap",
    )?);

    entries.push(GalleryEntry::checked(
        "replace_zero",
        r0_channel(d)?,
        [("aunital", false), ("bunital", false), ("unital", false)],
        Some(true),
        "constant channel preparing |0..0><0..0|",
    )?);

    let mixed_a = crate::states::maximally_mixed(SubsystemLayout::single("A", d)?);
    let zero_b = DensityMatrix::from_ket(&basis_ket(d, 0), SubsystemLayout::single("B", d)?)?;
    entries.push(GalleryEntry::checked(
        "replace_mixed_a",
        replacement_channel(&mixed_a, &zero_b)?,
        [("aunital", true), ("bunital", false), ("unital", false)],
        Some(true),
        "constant channel preparing I/d ⊗ |0><0|; A-unital without being unital",
    )?);

    let cq_a = classical_quantum_channel(d, "A")?;
    let id_b = KrausChannel::identity_channel(SubsystemLayout::single("B", d)?);
    entries.push(GalleryEntry::checked(
        "cq_a",
        tensor_channels(&cq_a, &id_b)?,
        [("aunital", false), ("bunital", true), ("unital", false)],
        Some(true),
        "classical-quantum measurement on A, identity on B",
    )?);

    let id_a = KrausChannel::identity_channel(SubsystemLayout::single("A", d)?);
    let cq_b = classical_quantum_channel(d, "B")?;
    entries.push(GalleryEntry::checked(
        "cq_b",
        tensor_channels(&id_a, &cq_b)?,
        [("aunital", true), ("bunital", false), ("unital", false)],
        Some(true),
        "identity on A, classical-quantum measurement on B",
    )?);

    // random-unitary A side paired with a classical-quantum B side
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let unitaries: Vec<CMat> = (0..d).map(|_| haar_unitary_with_rng(d, &mut rng)).collect();
    let b_ops: Vec<CMat> = (0..d)
        .map(|i| ketbra(&basis_ket(d, 0), &basis_ket(d, i)))
        .collect();
    entries.push(GalleryEntry::checked(
        "sep_aunital",
        separable_aunital_family(&unitaries, &b_ops)?,
        [("aunital", true), ("bunital", false), ("unital", false)],
        Some(true),
        "product Kraus operators with unitary A factors",
    )?);

    Ok(entries)
}

/// Builds a single gallery channel by name, skipping the verdict
/// self-check that [`standard_gallery`] performs.
pub fn gallery_channel(name: &str, d: usize) -> Result<KrausChannel> {
    if !(2..=8).contains(&d) {
        return Err(Error::Dimension("gallery is built for 2 <= d <= 8".into()));
    }
    match name {
        "identity" => Ok(KrausChannel::identity_channel(SubsystemLayout::bipartite(d, d)?)),
        "swap" => swap_channel(d),
        "swap_prepare" => swap_and_prepare(d),
        "swap_prepare_conj" => {
            let sw = swap_channel(d)?;
            compose_serial(&sw, &compose_serial(&swap_and_prepare(d)?, &sw)?)
        }
        "replace_zero" => r0_channel(d),
        "replace_mixed_a" => {
            let mixed_a = crate::states::maximally_mixed(SubsystemLayout::single("A", d)?);
            let zero_b =
                DensityMatrix::from_ket(&basis_ket(d, 0), SubsystemLayout::single("B", d)?)?;
            replacement_channel(&mixed_a, &zero_b)
        }
        "cq_a" => {
            let cq = classical_quantum_channel(d, "A")?;
            let id = KrausChannel::identity_channel(SubsystemLayout::single("B", d)?);
            tensor_channels(&cq, &id)
        }
        "cq_b" => {
            let id = KrausChannel::identity_channel(SubsystemLayout::single("A", d)?);
            let cq = classical_quantum_channel(d, "B")?;
            tensor_channels(&id, &cq)
        }
        "sep_aunital" => {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let unitaries: Vec<CMat> =
                (0..d).map(|_| haar_unitary_with_rng(d, &mut rng)).collect();
            let b_ops: Vec<CMat> = (0..d)
                .map(|i| ketbra(&basis_ket(d, 0), &basis_ket(d, i)))
                .collect();
            separable_aunital_family(&unitaries, &b_ops)
        }
        other => Err(Error::Argument(format!(
            "unknown gallery entry {other:?}; available: {}",
            gallery_names().join(", ")
        ))),
    }
}

/// Names of all gallery entries, in construction order.
pub fn gallery_names() -> Vec<&'static str> {
    vec![
        "identity",
        "swap",
        "swap_prepare",
        "swap_prepare_conj",
        "replace_zero",
        "replace_mixed_a",
        "cq_a",
        "cq_b",
        "sep_aunital",
    ]
}
