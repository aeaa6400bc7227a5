//! Non-vanishing threshold pipeline: the contraction factor M(N), the
//! integrand phi, the two concentration integrals, the threshold scan for
//! N0, and the KAK-coordinates cross-check.

use crate::autoforms::poly::MatrixPolynomial;
use crate::autoforms::{lift_closed_form, CuspSeedFunction};
use crate::error::{Error, Result};
use crate::estimate::{IntegralEstimate, McConfig, Moments};
use crate::glrep::{PolyRep, UnitaryMatrix};
use crate::symplectic::sampling::haar_unitary;
use crate::symplectic::KAKFactors;
use crate::{derive_seed, CMatrix, CVector, C64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

const STREAM_PHI: u64 = 0x21;
const STREAM_KAK: u64 = 0x22;

/// Escalation policy: sample counts grow by this factor per retry.
pub const ESCALATION_FACTOR: u64 = 4;
/// Default cap on the per-integral sample count during escalation.
pub const DEFAULT_ESCALATION_CAP: u64 = 100_000_000;
/// When the upper bound of the x-domain is this close to 1, the sampler
/// refines the face x_1 -> t with geometric strata.
const STRATIFY_THRESHOLD: f64 = 0.95;
/// Number of geometric strata toward the singular face.
const STRATA_COUNT: usize = 48;
/// Minimum samples per stratum.
const MIN_STRATUM_SAMPLES: u64 = 64;

/// M(N) = (sqrt(1 + 4n/N^2) + sqrt(4n/N^2))^{-2}; increasing in N with
/// limit 1.
pub fn m_of_n(level: u64, n: usize) -> f64 {
    let q = 4.0 * n as f64 / (level as f64 * level as f64);
    ((1.0 + q).sqrt() + q.sqrt()).powi(-2)
}

/// A fully specified non-vanishing question: integrable weight, a nonzero
/// polynomial, a nonzero vector, and the sampling policy.
#[derive(Debug, Clone)]
pub struct NonvanishingProblem {
    rep: Arc<PolyRep>,
    mu: MatrixPolynomial,
    v: CVector,
    mc: McConfig,
    escalation_cap: u64,
}

impl NonvanishingProblem {
    pub fn new(
        rep: Arc<PolyRep>,
        mu: MatrixPolynomial,
        v: CVector,
        mc: McConfig,
        escalation_cap: u64,
    ) -> Result<Self> {
        if !rep.is_integrable() {
            return Err(Error::Precondition(format!(
                "non-vanishing thresholds require omega_n > 2n; got omega_n = {} at n = {}",
                rep.det_twist(),
                rep.n()
            )));
        }
        if mu.is_zero() {
            return Err(Error::Precondition("mu must be nonzero".into()));
        }
        if mu.n() != rep.n() {
            return Err(Error::DimensionMismatch {
                expected: rep.n(),
                got: mu.n(),
                context: "nonvanishing problem".into(),
            });
        }
        if v.len() != rep.dim() {
            return Err(Error::DimensionMismatch {
                expected: rep.dim(),
                got: v.len(),
                context: "nonvanishing problem".into(),
            });
        }
        if v.norm() == 0.0 {
            return Err(Error::Precondition("v must be nonzero".into()));
        }
        Ok(NonvanishingProblem {
            rep,
            mu,
            v,
            mc,
            escalation_cap,
        })
    }

    pub fn rep(&self) -> &Arc<PolyRep> {
        &self.rep
    }

    pub fn mu(&self) -> &MatrixPolynomial {
        &self.mu
    }

    pub fn v(&self) -> &CVector {
        &self.v
    }

    pub fn mc(&self) -> &McConfig {
        &self.mc
    }

    pub fn escalation_cap(&self) -> u64 {
        self.escalation_cap
    }
}

/// The integrand
/// phi(u, x) = |mu(u d_x^{1/2} u^T)| |rho((I - d_x)^{1/2} u^T) v|
///             prod_{r<s} (x_r - x_s) / prod_r (1 - x_r)^{n+1}
/// on U(n) x A_1^+. Returns +infinity when the evaluation overflows near
/// the face x_r = 1; samplers skip such draws.
pub fn phi(problem: &NonvanishingProblem, u: &UnitaryMatrix, x: &[f64]) -> f64 {
    let n = problem.rep.n();
    debug_assert_eq!(u.n(), n);
    debug_assert_eq!(x.len(), n);
    let um = u.matrix();
    let sqrt_d = CMatrix::from_fn(n, n, |r, s| {
        if r == s {
            C64::new(x[r].max(0.0).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mu_arg = um * &sqrt_d * um.transpose();
    let mu_abs = problem.mu.eval(&mu_arg).norm();

    let sqrt_c = CMatrix::from_fn(n, n, |r, s| {
        if r == s {
            C64::new((1.0 - x[r]).max(0.0).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let rho_arg = &sqrt_c * um.transpose();
    let rho_norm = match problem.rep.apply_to_vector(&rho_arg, &problem.v) {
        Ok(moved) => moved.norm(),
        Err(_) => return f64::INFINITY,
    };

    let mut vandermonde = 1.0;
    for r in 0..n {
        for s in (r + 1)..n {
            vandermonde *= x[r] - x[s];
        }
    }
    let mut denom = 1.0;
    for &xr in x {
        denom *= (1.0 - xr).powi(n as i32 + 1);
    }
    let value = mu_abs * rho_norm * vandermonde / denom;
    if value.is_finite() {
        value
    } else {
        f64::INFINITY
    }
}

/// An x_1 stratum of the ordered region {t > x_1 > ... > x_n > 0}.
struct Stratum {
    lo: f64,
    hi: f64,
    volume: f64,
    samples: u64,
}

fn plan_strata(t: f64, n: usize, total_samples: u64) -> Vec<Stratum> {
    let full_volume = t.powi(n as i32) / factorial(n);
    if t < STRATIFY_THRESHOLD {
        return vec![Stratum {
            lo: 0.0,
            hi: t,
            volume: full_volume,
            samples: total_samples.max(2),
        }];
    }
    let mut bounds = Vec::with_capacity(STRATA_COUNT + 1);
    for j in 0..STRATA_COUNT {
        bounds.push(t * (1.0 - 0.5f64.powi(j as i32)));
    }
    bounds.push(t);
    let mut strata: Vec<Stratum> = bounds
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| Stratum {
            lo: w[0],
            hi: w[1],
            volume: (w[1].powi(n as i32) - w[0].powi(n as i32)) / factorial(n),
            samples: 0,
        })
        .collect();
    // allocation proportional to sqrt(volume), floored per stratum
    let weight_sum: f64 = strata.iter().map(|s| s.volume.sqrt()).sum();
    for stratum in &mut strata {
        let share = (total_samples as f64 * stratum.volume.sqrt() / weight_sum).round() as u64;
        stratum.samples = share.max(MIN_STRATUM_SAMPLES);
    }
    strata
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
}

/// Monte-Carlo estimate of the integral over A_t^+ x U(n) of phi(u, x).
///
/// Within each stratum the point is uniform on the ordered region (x_1 by
/// inversion of the x^n law, the remaining coordinates uniform below x_1,
/// sorted); the estimator is volume * mean phi. For t close to 1 the face
/// x_1 -> t is refined with geometric strata, which keeps the variance of
/// the (1 - x)^{omega_n/2 - n - 1} tail under control.
pub fn integral_phi_with(
    problem: &NonvanishingProblem,
    t: f64,
    samples: u64,
    stream: u64,
) -> IntegralEstimate {
    let n = problem.rep.n();
    let strata = plan_strata(t, n, samples);
    let workers = problem.mc.workers.max(1);
    let mut total_value = 0.0;
    let mut total_variance = 0.0;
    let mut total_samples = 0u64;
    for (stratum_idx, stratum) in strata.iter().enumerate() {
        let per_worker: Vec<u64> = {
            let base = stratum.samples / workers as u64;
            let rem = stratum.samples % workers as u64;
            (0..workers as u64)
                .map(|i| base + u64::from(i < rem))
                .collect()
        };
        let moments: Vec<Moments> = per_worker
            .par_iter()
            .enumerate()
            .map(|(worker, &count)| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    problem.mc.seed,
                    &[STREAM_PHI, stream, stratum_idx as u64, worker as u64],
                ));
                let mut m = Moments::default();
                let mut x = vec![0.0f64; n];
                for _ in 0..count {
                    // x_1 from the x^n law restricted to [lo, hi)
                    let u01: f64 = rng.gen();
                    let x1 = (stratum.lo.powi(n as i32)
                        + u01 * (stratum.hi.powi(n as i32) - stratum.lo.powi(n as i32)))
                    .powf(1.0 / n as f64)
                    .max(f64::MIN_POSITIVE);
                    x[0] = x1;
                    for slot in x.iter_mut().skip(1) {
                        *slot = rng.gen_range(0.0..x1);
                    }
                    x[1..].sort_by(|a, b| b.total_cmp(a));
                    let u = haar_unitary(&mut rng, n);
                    let value = phi(problem, &u, &x);
                    if value.is_finite() {
                        m.push(value * stratum.volume);
                    }
                }
                m
            })
            .collect();
        let mut merged = Moments::default();
        for m in &moments {
            merged.merge(m);
        }
        total_value += merged.mean();
        let se = merged.stderr();
        if se.is_finite() {
            total_variance += se * se;
        }
        total_samples += merged.count();
    }
    IntegralEstimate {
        value: total_value,
        stderr: total_variance.sqrt(),
        samples: total_samples,
        seed: problem.mc.seed,
    }
}

/// [`integral_phi_with`] at the problem's configured sample count.
pub fn integral_phi(problem: &NonvanishingProblem, t: f64) -> IntegralEstimate {
    integral_phi_with(problem, t, problem.mc.samples, 0)
}

/// Outcome of the concentration comparison at one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriterionOutcome {
    Holds,
    Fails,
    Undecided,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CriterionOutcome::Holds => write!(f, "HOLDS"),
            CriterionOutcome::Fails => write!(f, "FAILS"),
            CriterionOutcome::Undecided => write!(f, "UNDECIDED"),
        }
    }
}

/// Statistical comparison lhs > total/2 with a three-standard-error margin
/// on both sides. The inequality is strict, so exact equality never holds.
pub fn criterion_check(lhs: &IntegralEstimate, total: &IntegralEstimate) -> CriterionOutcome {
    let margin_lhs = 3.0 * lhs.stderr;
    let margin_total = 1.5 * total.stderr;
    if lhs.value - margin_lhs > total.value / 2.0 + margin_total {
        CriterionOutcome::Holds
    } else if lhs.value + margin_lhs < total.value / 2.0 - margin_total {
        CriterionOutcome::Fails
    } else {
        CriterionOutcome::Undecided
    }
}

/// One row of the threshold scan.
#[derive(Debug, Clone, Serialize)]
pub struct LedgerRow {
    #[serde(rename = "N")]
    pub level: u32,
    #[serde(rename = "M")]
    pub m_of_n: f64,
    pub lhs: f64,
    pub lhs_err: f64,
    pub rhs_half: f64,
    pub rhs_half_err: f64,
    pub lhs_samples: u64,
    pub decision: CriterionOutcome,
}

/// Result of the threshold scan: the first level at which the inequality is
/// certified, or None when no level up to the bound could be certified.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdResult {
    pub n0: Option<u32>,
    pub ledger: Vec<LedgerRow>,
    pub rhs: IntegralEstimate,
}

/// Scans N = 3, 4, ... comparing the truncated integral against half of the
/// full one. The full integral is shared across the scan (frozen derived
/// seed) and re-estimated only when its error blocks a decision; sample
/// counts escalate by [`ESCALATION_FACTOR`] up to the problem's cap.
pub fn find_n0(problem: &NonvanishingProblem, max_level: u32) -> Result<ThresholdResult> {
    let cap = problem.escalation_cap.max(problem.mc.samples);
    let mut rhs_samples = problem.mc.samples;
    let mut rhs_round: u64 = 0;
    let mut rhs = integral_phi_with(problem, 1.0, rhs_samples, u64::MAX - rhs_round);
    let mut ledger = Vec::new();
    let mut n0 = None;
    for level in 3..=max_level {
        let t = m_of_n(level as u64, problem.rep.n());
        let mut lhs_samples = problem.mc.samples;
        let mut lhs = integral_phi_with(problem, t, lhs_samples, level as u64);
        let mut outcome = criterion_check(&lhs, &rhs);
        while outcome == CriterionOutcome::Undecided {
            let lhs_dominates = 3.0 * lhs.stderr >= 1.5 * rhs.stderr;
            if lhs_dominates && lhs_samples < cap {
                lhs_samples = (lhs_samples * ESCALATION_FACTOR).min(cap);
                lhs = integral_phi_with(problem, t, lhs_samples, level as u64);
            } else if rhs_samples < cap {
                rhs_samples = (rhs_samples * ESCALATION_FACTOR).min(cap);
                rhs_round += 1;
                rhs = integral_phi_with(problem, 1.0, rhs_samples, u64::MAX - rhs_round);
            } else if lhs_samples < cap {
                lhs_samples = (lhs_samples * ESCALATION_FACTOR).min(cap);
                lhs = integral_phi_with(problem, t, lhs_samples, level as u64);
            } else {
                break;
            }
            outcome = criterion_check(&lhs, &rhs);
        }
        ledger.push(LedgerRow {
            level,
            m_of_n: t,
            lhs: lhs.value,
            lhs_err: lhs.stderr,
            rhs_half: rhs.value / 2.0,
            rhs_half_err: rhs.stderr / 2.0,
            lhs_samples: lhs.samples,
            decision: outcome,
        });
        if outcome == CriterionOutcome::Holds {
            n0 = Some(level);
            break;
        }
    }
    Ok(ThresholdResult { n0, ledger, rhs })
}

/// One radius of the KAK cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckRow {
    pub radius: f64,
    pub kak_value: f64,
    pub kak_err: f64,
    pub phi_value: f64,
    pub phi_err: f64,
    pub ratio: f64,
    pub ratio_err: f64,
}

/// Report of the change-of-variables cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub rows: Vec<CrosscheckRow>,
    /// True when all pairwise ratio differences fit in three combined
    /// standard errors (one unknown proportionality constant).
    pub consistent: bool,
    pub samples_per_integral: u64,
    pub seed: u64,
}

/// For each radius R, estimates the integral of |F_{f_{mu,v}}| over
/// K {h_t : t_r < R} K in KAK coordinates with the sinh-product density,
/// and the phi-integral over A_{tanh^2 R}^+; their ratio must be the same
/// constant for every R.
pub fn kak_crosscheck(problem: &NonvanishingProblem, radii: &[f64]) -> Result<CrosscheckReport> {
    if radii.is_empty() || radii.iter().any(|&r| r <= 0.0) {
        return Err(Error::Precondition("radii must be positive".into()));
    }
    let seed_fn =
        CuspSeedFunction::new(problem.rep.clone(), problem.mu.clone(), problem.v.clone())?;
    let n = problem.rep.n();
    let workers = problem.mc.workers.max(1);
    let mut rows = Vec::with_capacity(radii.len());
    for (radius_idx, &radius) in radii.iter().enumerate() {
        let volume = radius.powi(n as i32) / factorial(n);
        let per_worker: Vec<u64> = {
            let base = problem.mc.samples / workers as u64;
            let rem = problem.mc.samples % workers as u64;
            (0..workers as u64)
                .map(|i| base + u64::from(i < rem))
                .collect()
        };
        let moments: Vec<Moments> = per_worker
            .par_iter()
            .enumerate()
            .map(|(worker, &count)| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    problem.mc.seed,
                    &[STREAM_KAK, radius_idx as u64, worker as u64],
                ));
                let mut m = Moments::default();
                for _ in 0..count {
                    let u = haar_unitary(&mut rng, n);
                    let u_prime = haar_unitary(&mut rng, n);
                    let mut t: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..radius)).collect();
                    t.sort_by(|a, b| b.total_cmp(a));
                    let mut jacobian = 1.0;
                    for r in 0..n {
                        for s in (r + 1)..n {
                            jacobian *= (t[r] - t[s]).sinh();
                        }
                    }
                    for r in 0..n {
                        for s in r..n {
                            jacobian *= (t[r] + t[s]).sinh();
                        }
                    }
                    let kak = KAKFactors {
                        u: u.clone(),
                        t,
                        u_prime,
                    };
                    let value = match lift_closed_form(&seed_fn, &kak) {
                        Ok(lift) => lift.norm() * jacobian * volume,
                        Err(_) => 0.0,
                    };
                    m.push(value);
                }
                m
            })
            .collect();
        let mut merged = Moments::default();
        for m in &moments {
            merged.merge(m);
        }
        let kak_est = IntegralEstimate::from_moments(&merged, problem.mc.seed);

        let t_bound = radius.tanh().powi(2);
        let phi_est =
            integral_phi_with(problem, t_bound, problem.mc.samples, 1_000 + radius_idx as u64);

        let ratio = kak_est.value / phi_est.value;
        let rel = ((kak_est.stderr / kak_est.value).powi(2)
            + (phi_est.stderr / phi_est.value).powi(2))
        .sqrt();
        rows.push(CrosscheckRow {
            radius,
            kak_value: kak_est.value,
            kak_err: kak_est.stderr,
            phi_value: phi_est.value,
            phi_err: phi_est.stderr,
            ratio,
            ratio_err: (ratio * rel).abs(),
        });
    }
    let mut consistent = true;
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let sigma = (rows[i].ratio_err.powi(2) + rows[j].ratio_err.powi(2)).sqrt();
            if (rows[i].ratio - rows[j].ratio).abs() > 3.0 * sigma {
                consistent = false;
            }
        }
    }
    Ok(CrosscheckReport {
        rows,
        consistent,
        samples_per_integral: problem.mc.samples,
        seed: problem.mc.seed,
    })
}
