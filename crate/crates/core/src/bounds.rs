//! Tight bounds on conditional entropy at fixed entropy, with extremal
//! state constructors and intermediate-value bisection.
//!
//! For two qudits of dimension `d` and entropy `x`, the reachable
//! conditional entropies are bounded below by `x - log2 d` (attained on
//! the isotropic family) and above by `min(x, log2 d)` (attained by
//! product constructions).

use crate::error::{Error, Result};
use crate::linalg::{creal, CMat, CVec, SubsystemLayout};
use crate::states::{
    conditional_entropy, isotropic_family, tensor_states, von_neumann_entropy, DensityMatrix,
};

/// Bisection tolerance on the achieved entropy.
pub const BISECT_TOL: f64 = 1e-7;

/// Attainers must reproduce their bound this closely.
pub const ATTAINER_TOL: f64 = 1e-6;

const MAX_ITERS: usize = 60;
/// Fallback: stop once the parameter interval is this narrow.
const PARAM_TOL: f64 = 1e-9;

/// Conditional-entropy bounds at entropy `entropy_x`, with states
/// attaining each bound.
#[derive(Debug, Clone)]
pub struct BoundsResult {
    pub entropy_x: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_attainer: DensityMatrix,
    pub upper_attainer: DensityMatrix,
}

/// Finds `p` with `S(family(p))` within `tol` of `target` by bisection
/// over a monotone one-parameter family on `[0, 1]`.
pub fn bisect_entropy<F>(family: &F, target: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> DensityMatrix,
{
    let s0 = von_neumann_entropy(&family(0.0));
    let s1 = von_neumann_entropy(&family(1.0));
    let (lo_s, hi_s) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
    if target < lo_s - tol || target > hi_s + tol {
        return Err(Error::Range(format!(
            "target entropy {target} outside the family range [{lo_s}, {hi_s}]"
        )));
    }
    if (s0 - target).abs() <= tol {
        return Ok(0.0);
    }
    if (s1 - target).abs() <= tol {
        return Ok(1.0);
    }

    // orient so entropy decreases from `lo` to `hi`
    let decreasing = s0 >= s1;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let s_mid = von_neumann_entropy(&family(mid));
        if (s_mid - target).abs() <= tol {
            return Ok(mid);
        }
        let go_right = if decreasing {
            s_mid > target
        } else {
            s_mid < target
        };
        if go_right {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < PARAM_TOL {
            return Ok(0.5 * (lo + hi));
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Diagonal state `diag(q, (1-q)/(d-1), ...)`; sweeps every entropy in
/// `[0, log2 d]` as `q` runs from `1` down to `1/d`.
fn diag_spectrum_state(q: f64, d: usize, label: &str) -> DensityMatrix {
    let rest = if d > 1 { (1.0 - q) / (d - 1) as f64 } else { 0.0 };
    let mut diag = CVec::zeros(d);
    diag[0] = creal(q);
    for i in 1..d {
        diag[i] = creal(rest);
    }
    DensityMatrix::new(
        CMat::from_diagonal(&diag),
        SubsystemLayout::single(label, d).expect("single label"),
    )
    .expect("diagonal probability vector is a state")
}

fn single_system_with_entropy(x: f64, d: usize, label: &str) -> Result<DensityMatrix> {
    let family = |p: f64| {
        let q = 1.0 / d as f64 + p * (1.0 - 1.0 / d as f64);
        diag_spectrum_state(q, d, label)
    };
    let p = bisect_entropy(&family, x, BISECT_TOL)?;
    Ok(family(p))
}

/// State attaining the upper bound: `sigma_A ⊗ |0><0|` with `S(sigma_A) =
/// x` below `log2 d`, and `I/d ⊗ sigma_B` with `S(sigma_B) = x - log2 d`
/// above it.
pub fn upper_attainer(x: f64, d: usize) -> Result<DensityMatrix> {
    let log_d = (d as f64).log2();
    if x < 0.0 || x > 2.0 * log_d {
        return Err(Error::Argument(format!(
            "entropy {x} outside [0, {}]",
            2.0 * log_d
        )));
    }
    if x <= log_d {
        let sigma_a = single_system_with_entropy(x, d, "A")?;
        let pure_b = diag_spectrum_state(1.0, d, "B");
        tensor_states(&sigma_a, &pure_b)
    } else {
        let mixed_a = crate::states::maximally_mixed(SubsystemLayout::single("A", d)?);
        let sigma_b = single_system_with_entropy(x - log_d, d, "B")?;
        tensor_states(&mixed_a, &sigma_b)
    }
}

/// Bounds and attaining states for conditional entropy at entropy `x` on
/// two qudits of dimension `d`.
pub fn cve_bounds(x: f64, d: usize) -> Result<BoundsResult> {
    if d < 2 {
        return Err(Error::Dimension("bounds need dimension >= 2".into()));
    }
    let log_d = (d as f64).log2();
    if x < 0.0 || x > 2.0 * log_d {
        return Err(Error::Argument(format!(
            "entropy {x} outside [0, {}]",
            2.0 * log_d
        )));
    }

    let lower = x - log_d;
    let upper = x.min(log_d);

    let p = bisect_entropy(
        &|p| isotropic_family(p, d).expect("p stays in [0,1]"),
        x,
        BISECT_TOL,
    )?;
    let lower_attainer = isotropic_family(p, d)?;
    let upper_att = upper_attainer(x, d)?;

    let result = BoundsResult {
        entropy_x: x,
        lower,
        upper,
        lower_attainer,
        upper_attainer: upper_att,
    };
    result.check()?;
    Ok(result)
}

impl BoundsResult {
    fn check(&self) -> Result<()> {
        if self.lower > self.upper {
            return Err(Error::Numeric(format!(
                "lower bound {} above upper bound {}",
                self.lower, self.upper
            )));
        }
        for (attainer, bound, name) in [
            (&self.lower_attainer, self.lower, "lower"),
            (&self.upper_attainer, self.upper, "upper"),
        ] {
            let s = von_neumann_entropy(attainer);
            if (s - self.entropy_x).abs() > ATTAINER_TOL {
                return Err(Error::Numeric(format!(
                    "{name} attainer entropy {s} misses target {}",
                    self.entropy_x
                )));
            }
            let cve = conditional_entropy(attainer, &["A"])?;
            if (cve - bound).abs() > ATTAINER_TOL {
                return Err(Error::Numeric(format!(
                    "{name} attainer conditional entropy {cve} misses bound {bound}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::isotropic_entropy;

    #[test]
    fn bisect_hits_the_endpoints() {
        let family = |p: f64| isotropic_family(p, 2).unwrap();
        let p = bisect_entropy(&family, 2.0, BISECT_TOL).unwrap();
        assert!(p.abs() < 1e-9);
        let p = bisect_entropy(&family, 0.0, BISECT_TOL).unwrap();
        assert!((p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bisect_matches_closed_form_eigenvalues() {
        let family = |p: f64| isotropic_family(p, 2).unwrap();
        let p = bisect_entropy(&family, 1.5, BISECT_TOL).unwrap();
        assert!((von_neumann_entropy(&family(p)) - 1.5).abs() <= BISECT_TOL);
        // closed-form oracle for the achieved parameter
        assert!((isotropic_entropy(p, 2) - 1.5).abs() <= 2.0 * BISECT_TOL);
    }

    #[test]
    fn bisect_rejects_unreachable_targets() {
        let family = |p: f64| isotropic_family(p, 2).unwrap();
        assert!(matches!(
            bisect_entropy(&family, 2.5, BISECT_TOL),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn bounds_at_zero_entropy() {
        let r = cve_bounds(0.0, 2).unwrap();
        assert!((r.lower + 1.0).abs() < 1e-12);
        assert!(r.upper.abs() < 1e-12);
        assert!((conditional_entropy(&r.lower_attainer, &["A"]).unwrap() + 1.0) < 1e-6);
        assert!(conditional_entropy(&r.upper_attainer, &["A"]).unwrap().abs() < 1e-6);
    }

    #[test]
    fn bounds_at_maximal_entropy() {
        let r = cve_bounds(2.0, 2).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-12);
        assert!((r.upper - 1.0).abs() < 1e-12);
        let s = von_neumann_entropy(&r.lower_attainer);
        assert!((s - 2.0).abs() < 1e-6);
    }

    #[test]
    fn bounds_at_intermediate_entropy() {
        let r = cve_bounds(1.5, 2).unwrap();
        assert!((r.lower - 0.5).abs() < 1e-12);
        assert!((r.upper - 1.0).abs() < 1e-12);
        let cve_up = conditional_entropy(&r.upper_attainer, &["A"]).unwrap();
        assert!((cve_up - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bounds_reject_out_of_range_entropy() {
        assert!(cve_bounds(-0.1, 2).is_err());
        assert!(cve_bounds(2.1, 2).is_err());
    }

    #[test]
    fn upper_attainer_of_pure_product() {
        let rho = upper_attainer(0.0, 2).unwrap();
        assert!(von_neumann_entropy(&rho) < 1e-9);
        assert!(conditional_entropy(&rho, &["A"]).unwrap().abs() < 1e-6);
    }

    #[test]
    fn upper_attainer_branches_agree_at_log_d() {
        for d in [2usize, 3] {
            let log_d = (d as f64).log2();
            let low = upper_attainer(log_d - 1e-12, d).unwrap();
            let high = upper_attainer(log_d + 1e-12, d).unwrap();
            let cve_low = conditional_entropy(&low, &["A"]).unwrap();
            let cve_high = conditional_entropy(&high, &["A"]).unwrap();
            assert!((cve_low - log_d).abs() < 1e-5, "low branch {cve_low}");
            assert!((cve_high - log_d).abs() < 1e-5, "high branch {cve_high}");
        }
    }

    #[test]
    fn upper_attainer_mid_branch_value() {
        let rho = upper_attainer(0.7, 2).unwrap();
        let cve = conditional_entropy(&rho, &["A"]).unwrap();
        assert!((cve - 0.7).abs() < 1e-6);
    }

    #[test]
    fn attainers_meet_bounds_on_a_grid() {
        for d in [2usize, 3] {
            let log_d = (d as f64).log2();
            for k in 0..=20 {
                let x = 2.0 * log_d * k as f64 / 20.0;
                let r = cve_bounds(x, d).unwrap();
                let cve_lo = conditional_entropy(&r.lower_attainer, &["A"]).unwrap();
                let cve_up = conditional_entropy(&r.upper_attainer, &["A"]).unwrap();
                assert!((cve_lo - r.lower).abs() < ATTAINER_TOL);
                assert!((cve_up - r.upper).abs() < ATTAINER_TOL);
            }
        }
    }
}
