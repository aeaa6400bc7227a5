//! Measure-aware random sampling: Haar unitaries, the invariant measure on
//! the bounded domain via rejection from a box, and a Gaussian importance
//! sampler on the Siegel upper half-space.
//!
//! All samplers take explicit generators; the integrators split their budget
//! into per-worker chunks with derived seeds, so results are deterministic
//! given (seed, worker count) regardless of thread scheduling.

use super::{gram_defect_min_eig, DiskPoint, SiegelPoint, SymplecticMatrix};
use crate::estimate::{ComplexEstimate, IntegralEstimate, McConfig, Moments};
use crate::glrep::UnitaryMatrix;
use crate::{derive_seed, CMatrix, RMatrix, C64};
use nalgebra::linalg::SymmetricEigen;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Haar-distributed element of U(n): complex Ginibre matrix, QR, then phase
/// normalization of the R diagonal.
pub fn haar_unitary(rng: &mut impl Rng, n: usize) -> UnitaryMatrix {
    let scale = 1.0 / 2f64.sqrt();
    let g = CMatrix::from_fn(n, n, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal) * scale,
            rng.sample::<f64, _>(StandardNormal) * scale,
        )
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::new(q).expect("QR output is unitary")
}

/// Number of independent complex entries of a symmetric n x n matrix.
pub fn sym_entry_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Volume of the sampling box: each independent entry ranges over the
/// complex square of half-width 1.
pub fn disk_box_volume(n: usize) -> f64 {
    4f64.powi(sym_entry_count(n) as i32)
}

/// One rejection-sampling attempt for the bounded domain D_n.
///
/// Draws a symmetric complex matrix from the box, accepts iff I - w*w > 0,
/// and returns the accepted point together with its importance weight
/// 2^{n(n+1)} det(I - w*w)^{-n-1} * (box volume). Callers estimating an
/// integral divide by the total number of attempts.
pub fn sample_disk(rng: &mut impl Rng, n: usize) -> Option<(DiskPoint, f64)> {
    let mut w = CMatrix::zeros(n, n);
    for r in 0..n {
        for s in r..n {
            let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            w[(r, s)] = v;
            w[(s, r)] = v;
        }
    }
    if gram_defect_min_eig(&w) <= 0.0 {
        return None;
    }
    let point = DiskPoint::new(w).ok()?;
    let defect = point.gram_defect();
    let det = defect.determinant().re;
    let density = 2f64.powi((n * (n + 1)) as i32) * det.powi(-(n as i32) - 1);
    Some((point, density * disk_box_volume(n)))
}

/// Monte-Carlo estimate of integral_{D_n} f dv_D with the invariant measure.
pub fn integrate_disk(
    n: usize,
    cfg: &McConfig,
    stream: u64,
    f: impl Fn(&DiskPoint) -> f64 + Sync,
) -> IntegralEstimate {
    let chunks = cfg.chunks();
    let moments = chunks
        .par_iter()
        .enumerate()
        .map(|(worker, &count)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[stream, worker as u64]));
            let mut m = Moments::default();
            for _ in 0..count {
                let value = match sample_disk(&mut rng, n) {
                    Some((point, weight)) => f(&point) * weight,
                    None => 0.0,
                };
                m.push(value);
            }
            m
        })
        .collect::<Vec<_>>();
    let mut total = Moments::default();
    for m in &moments {
        total.merge(m);
    }
    IntegralEstimate::from_moments(&total, cfg.seed)
}

/// Complex-valued variant of [`integrate_disk`].
pub fn integrate_disk_complex(
    n: usize,
    cfg: &McConfig,
    stream: u64,
    f: impl Fn(&DiskPoint) -> C64 + Sync,
) -> ComplexEstimate {
    let chunks = cfg.chunks();
    let moments = chunks
        .par_iter()
        .enumerate()
        .map(|(worker, &count)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[stream, worker as u64]));
            let mut re = Moments::default();
            let mut im = Moments::default();
            for _ in 0..count {
                let value = match sample_disk(&mut rng, n) {
                    Some((point, weight)) => f(&point) * weight,
                    None => C64::new(0.0, 0.0),
                };
                re.push(value.re);
                im.push(value.im);
            }
            (re, im)
        })
        .collect::<Vec<_>>();
    let mut re = Moments::default();
    let mut im = Moments::default();
    for (a, b) in &moments {
        re.merge(a);
        im.merge(b);
    }
    ComplexEstimate::from_moments(&re, &im, cfg.seed)
}

/// Gaussian proposal width used by the Siegel-side sampler.
pub const SIEGEL_GAUSSIAN_WIDTH: f64 = 0.6;

/// One draw of a Siegel point from a Gaussian proposal centered at i I.
///
/// Independent entries x_{rs} ~ N(0, sigma^2) and y_{rs} ~ N(delta_{rs},
/// sigma^2) for r <= s; draws with y not positive definite are rejected.
/// Returns the point and the importance weight det(y)^{-n-1} / q(x, y)
/// where q is the proposal density on the free coordinates.
pub fn sample_siegel_gaussian(rng: &mut impl Rng, n: usize) -> Option<(SiegelPoint, f64)> {
    let sigma = SIEGEL_GAUSSIAN_WIDTH;
    let mut x = RMatrix::zeros(n, n);
    let mut y = RMatrix::zeros(n, n);
    let mut log_q = 0.0;
    let norm_const = -0.5 * (2.0 * std::f64::consts::PI * sigma * sigma).ln();
    for r in 0..n {
        for s in r..n {
            let gx: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
            let gy: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
            let mean_y = if r == s { 1.0 } else { 0.0 };
            x[(r, s)] = gx;
            x[(s, r)] = gx;
            y[(r, s)] = mean_y + gy;
            y[(s, r)] = mean_y + gy;
            log_q += 2.0 * norm_const
                - 0.5 * (gx / sigma).powi(2)
                - 0.5 * (gy / sigma).powi(2);
        }
    }
    let eig = SymmetricEigen::new(y.clone());
    let min_eig = eig.eigenvalues.min();
    if min_eig <= 0.0 {
        return None;
    }
    let det_y: f64 = eig.eigenvalues.iter().product();
    let point = SiegelPoint::from_parts(&x, &y).ok()?;
    let weight = det_y.powi(-(n as i32) - 1) / log_q.exp();
    Some((point, weight))
}

/// Monte-Carlo estimate of integral_{H_n} f dv with the invariant measure,
/// suitable for integrands concentrated near i I.
pub fn integrate_siegel(
    n: usize,
    cfg: &McConfig,
    stream: u64,
    f: impl Fn(&SiegelPoint) -> f64 + Sync,
) -> IntegralEstimate {
    let chunks = cfg.chunks();
    let moments = chunks
        .par_iter()
        .enumerate()
        .map(|(worker, &count)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[stream, worker as u64]));
            let mut m = Moments::default();
            for _ in 0..count {
                let value = match sample_siegel_gaussian(&mut rng, n) {
                    Some((point, weight)) => f(&point) * weight,
                    None => 0.0,
                };
                m.push(value);
            }
            m
        })
        .collect::<Vec<_>>();
    let mut total = Moments::default();
    for m in &moments {
        total.merge(m);
    }
    IntegralEstimate::from_moments(&total, cfg.seed)
}

/// A random element of Sp_2n(R) built as n_x a_y k_u with moderate spread.
/// Test and self-test utility.
pub fn random_symplectic(rng: &mut impl Rng, n: usize) -> SymplecticMatrix {
    let mut x = RMatrix::zeros(n, n);
    for r in 0..n {
        for s in r..n {
            let v = rng.gen_range(-1.0..1.0);
            x[(r, s)] = v;
            x[(s, r)] = v;
        }
    }
    let mut base = RMatrix::zeros(n, n);
    for r in 0..n {
        for s in 0..n {
            base[(r, s)] = rng.gen_range(-0.5..0.5);
        }
    }
    let y = &base * base.transpose() + RMatrix::identity(n, n) * rng.gen_range(0.3..1.5);
    let u = haar_unitary(rng, n);
    SymplecticMatrix::translation(&x)
        .unwrap()
        .mul(&SymplecticMatrix::dilation(&y).unwrap())
        .mul(&SymplecticMatrix::from_unitary(&u))
}
