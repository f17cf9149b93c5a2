//! Decision procedures: A-/B-unitality and unitality detection, ACVENN
//! membership, conditional-entropy decrease search, and construction of
//! resource-generation witnesses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::bisect_entropy;
use crate::channels::{extend_with_identity, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{fro_dist, identity, partial_trace, tensor};
use crate::states::{
    conditional_entropy, density_basis, isotropic_family, random_state_with_rng, tensor_states,
    DensityMatrix,
};

/// Default Frobenius tolerance for the detectors.
pub const DETECT_TOL: f64 = 1e-8;

/// Tolerance below which a conditional-entropy difference counts as a
/// genuine decrease.
pub const CVE_DECREASE_TOL: f64 = 1e-8;

/// Verdict plus per-probe deviation diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub verdict: bool,
    /// Largest probe deviation, in Frobenius norm.
    pub max_deviation: f64,
    /// `(probe index, deviation)` for every probe, in probe order.
    pub per_probe: Vec<(usize, f64)>,
    pub tolerance_used: f64,
}

impl DetectionReport {
    fn from_deviations(devs: Vec<f64>, tol: f64) -> Self {
        let max_deviation = devs.iter().cloned().fold(0.0, f64::max);
        DetectionReport {
            verdict: max_deviation <= tol,
            max_deviation,
            per_probe: devs.into_iter().enumerate().collect(),
            tolerance_used: tol,
        }
    }
}

/// A state exhibiting a conditional-entropy decrease through a channel.
#[derive(Debug, Clone)]
pub struct CveDecrease {
    pub state: DensityMatrix,
    pub cve_in: f64,
    pub cve_out: f64,
}

/// An input certifying that the identity-extended channel maps a
/// nonnegative-conditional-entropy state to a negative one.
#[derive(Debug, Clone)]
pub struct ResourceWitness {
    /// Product state on the extended `[A', A, B', B]` space.
    pub input_state: DensityMatrix,
    pub input_cve: f64,
    pub output_cve: f64,
    pub channel_ref: String,
}

fn split_square_channel(ch: &KrausChannel) -> Result<(Vec<String>, Vec<String>)> {
    if !ch.is_square() {
        return Err(Error::Unsupported(
            "detectors require equal input and output layouts".into(),
        ));
    }
    let layout = ch.in_layout();
    if !layout.is_canonical() {
        return Err(Error::Unsupported(
            "detectors require all A-side labels before all B-side labels".into(),
        ));
    }
    let (a, b) = layout.side_split();
    if a.is_empty() || b.is_empty() {
        return Err(Error::Unsupported(
            "detectors need at least one subsystem on each side".into(),
        ));
    }
    Ok((a, b))
}

/// Tests `N(I_A/d_A ⊗ beta) = I_A/d_A ⊗ beta'` over a basis of density
/// matrices `beta` for the B side; a necessary and sufficient condition
/// for A-unitality.
pub fn is_a_unital(ch: &KrausChannel, tol: f64) -> Result<DetectionReport> {
    let (a_labels, _) = split_square_channel(ch)?;
    let a_refs: Vec<&str> = a_labels.iter().map(String::as_str).collect();
    let d_a = ch.in_layout().dim_of_set(&a_refs)?;
    let d_b = ch.in_layout().total_dim() / d_a;
    let mixed_a = identity(d_a).scale(1.0 / d_a as f64);

    let mut devs = Vec::with_capacity(d_b * d_b);
    for beta in density_basis(d_b)?.elements() {
        let probe = tensor(&mixed_a, beta.op())?;
        let out = ch.apply_op(&probe)?;
        let out_b = partial_trace(&out, ch.out_layout(), &a_refs)?;
        let product = tensor(&mixed_a, &out_b)?;
        devs.push(fro_dist(&out, &product));
    }
    Ok(DetectionReport::from_deviations(devs, tol))
}

/// Mirror of [`is_a_unital`] with the roles of the two sides exchanged.
pub fn is_b_unital(ch: &KrausChannel, tol: f64) -> Result<DetectionReport> {
    let (a_labels, b_labels) = split_square_channel(ch)?;
    let a_refs: Vec<&str> = a_labels.iter().map(String::as_str).collect();
    let b_refs: Vec<&str> = b_labels.iter().map(String::as_str).collect();
    let d_a = ch.in_layout().dim_of_set(&a_refs)?;
    let d_b = ch.in_layout().total_dim() / d_a;
    let mixed_b = identity(d_b).scale(1.0 / d_b as f64);

    let mut devs = Vec::with_capacity(d_a * d_a);
    for alpha in density_basis(d_a)?.elements() {
        let probe = tensor(alpha.op(), &mixed_b)?;
        let out = ch.apply_op(&probe)?;
        let out_a = partial_trace(&out, ch.out_layout(), &b_refs)?;
        let product = tensor(&out_a, &mixed_b)?;
        devs.push(fro_dist(&out, &product));
    }
    Ok(DetectionReport::from_deviations(devs, tol))
}

/// Tests `N(I/d) = I/d` on the single maximally mixed probe.
pub fn is_unital(ch: &KrausChannel, tol: f64) -> Result<DetectionReport> {
    if !ch.is_square() {
        return Err(Error::Unsupported(
            "unitality is defined for equal input and output layouts".into(),
        ));
    }
    let d = ch.in_layout().total_dim();
    let mixed = identity(d).scale(1.0 / d as f64);
    let out = ch.apply_op(&mixed)?;
    let dev = fro_dist(&out, &mixed);
    Ok(DetectionReport::from_deviations(vec![dev], tol))
}

/// True when the conditional entropy stays nonnegative under every global
/// unitary: `S(rho) >= log2 d` for equal side dimensions.
pub fn is_acvenn(rho: &DensityMatrix, tol: f64) -> Result<bool> {
    let (a, b) = rho.layout().side_split();
    if a.is_empty() || b.is_empty() {
        return Err(Error::Unsupported(
            "ACVENN needs subsystems on both sides".into(),
        ));
    }
    let a_refs: Vec<&str> = a.iter().map(String::as_str).collect();
    let d_a = rho.layout().dim_of_set(&a_refs)?;
    let d_b = rho.layout().total_dim() / d_a;
    if d_a != d_b {
        return Err(Error::Unsupported(format!(
            "ACVENN is characterized only for equal side dimensions (got {d_a} and {d_b})"
        )));
    }
    Ok(crate::states::von_neumann_entropy(rho) >= (d_a as f64).log2() - tol)
}

/// Searches for a state whose conditional entropy decreases through the
/// channel: first the `I_A/d_A ⊗ beta` probe states, then seeded random
/// states. Absence is not a proof; certified verdicts come from
/// [`is_a_unital`].
pub fn find_cve_decrease(
    ch: &KrausChannel,
    samples: usize,
    seed: u64,
) -> Result<Option<CveDecrease>> {
    let (a_labels, _) = split_square_channel(ch)?;
    let a_refs: Vec<&str> = a_labels.iter().map(String::as_str).collect();
    let d_a = ch.in_layout().dim_of_set(&a_refs)?;
    let d_b = ch.in_layout().total_dim() / d_a;
    let mixed_a = identity(d_a).scale(1.0 / d_a as f64);

    for beta in density_basis(d_b)?.elements() {
        let probe = DensityMatrix::new(tensor(&mixed_a, beta.op())?, ch.in_layout().clone())?;
        let hit = check_decrease(ch, &probe, &a_refs)?;
        if hit.is_some() {
            return Ok(hit);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = ch.in_layout().total_dim();
    for i in 0..samples {
        let rank = (i % d) + 1;
        let rho = random_state_with_rng(ch.in_layout(), rank, &mut rng)?;
        let hit = check_decrease(ch, &rho, &a_refs)?;
        if hit.is_some() {
            return Ok(hit);
        }
    }
    Ok(None)
}

fn check_decrease(
    ch: &KrausChannel,
    rho: &DensityMatrix,
    a_refs: &[&str],
) -> Result<Option<CveDecrease>> {
    let cve_in = conditional_entropy(rho, a_refs)?;
    let cve_out = conditional_entropy(&ch.apply(rho)?, a_refs)?;
    if cve_out < cve_in - CVE_DECREASE_TOL {
        Ok(Some(CveDecrease {
            state: rho.clone(),
            cve_in,
            cve_out,
        }))
    } else {
        Ok(None)
    }
}

/// Turns an exhibited conditional-entropy decrease into a witness: a
/// product input `sigma ⊗ rho` inside the nonnegative set whose image
/// under the identity-extended channel falls outside.
///
/// The companion state is drawn from the isotropic family with its
/// conditional entropy bisected to the midpoint of the admissible
/// interval `[-cve_in, -cve_out)`.
pub fn build_resource_witness(
    ch: &KrausChannel,
    rho: &DensityMatrix,
    cve_in: f64,
    cve_out: f64,
) -> Result<ResourceWitness> {
    if cve_out >= cve_in {
        return Err(Error::Argument(format!(
            "no decrease to witness: cve_in {cve_in} <= cve_out {cve_out}"
        )));
    }
    let (a_labels, _) = split_square_channel(ch)?;
    let a_refs: Vec<&str> = a_labels.iter().map(String::as_str).collect();
    let d_a = ch.in_layout().dim_of_set(&a_refs)?;
    let d_b = ch.in_layout().total_dim() / d_a;
    if d_a != d_b {
        return Err(Error::Unsupported(
            "witness construction uses equal side dimensions".into(),
        ));
    }
    let d = d_a;
    let log_d = (d as f64).log2();

    // midpoint of the admissible conditional-entropy window for sigma
    let target_cve = -(cve_in + cve_out) / 2.0;
    let target_entropy = (target_cve + log_d).clamp(0.0, 2.0 * log_d);
    let p = bisect_entropy(
        &|p| isotropic_family(p, d).expect("p stays in [0,1]"),
        target_entropy,
        1e-7,
    )?;
    let sigma = isotropic_family(p, d)?.relabelled(vec!["A'", "B'"])?;

    let input = tensor_states(&sigma, rho)?;
    let extended = extend_with_identity(ch, d, d)?;
    let output = extended.apply(&input)?;

    let (ext_a_side, _) = input.layout().side_split();
    let ext_a: Vec<&str> = ext_a_side.iter().map(String::as_str).collect();
    let input_cve = conditional_entropy(&input, &ext_a)?;
    let output_cve = conditional_entropy(&output, &ext_a)?;
    if input_cve < -1e-9 {
        return Err(Error::Numeric(format!(
            "witness input left the nonnegative set (CVE {input_cve:.3e})"
        )));
    }
    if output_cve >= -1e-9 {
        return Err(Error::Numeric(format!(
            "witness output failed to leave the nonnegative set (CVE {output_cve:.3e})"
        )));
    }
    Ok(ResourceWitness {
        input_state: input,
        input_cve,
        output_cve,
        channel_ref: String::from("channel"),
    })
}
