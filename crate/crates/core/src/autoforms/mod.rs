//! Seed functions, the slash action, classical lifts, truncated Poincare
//! series, Fourier coefficients, Petersson products (n = 1), and numerical
//! matrix coefficients.

pub mod poly;

use crate::enumeration::GroupElementSet;
use crate::error::{Error, Result};
use crate::estimate::{ComplexEstimate, IntegralEstimate, McConfig, Moments};
use crate::glrep::PolyRep;
use crate::symplectic::sampling::{integrate_disk, integrate_disk_complex};
use crate::symplectic::{
    cayley_block_inverse, cayley_block_matrix, cocycle_complex, invert_cocycle, moebius,
    moebius_complex, DiskPoint, SiegelPoint, SymplecticMatrix,
};
use crate::{derive_seed, inner, CMatrix, CVector, RMatrix, C64};
use poly::MatrixPolynomial;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Stream tags separating the random streams of the different estimators.
const STREAM_C_RHO: u64 = 0x11;
const STREAM_MATCOEF: u64 = 0x12;
const STREAM_PETERSSON: u64 = 0x13;

/// p_{mu,v}(w) = mu(w) v.
pub fn eval_p(mu: &MatrixPolynomial, v: &CVector, w: &DiskPoint) -> CVector {
    v * mu.eval(w.matrix())
}

/// The seed data (rho, mu, v) of a cusp form candidate f_{mu,v}.
#[derive(Debug, Clone)]
pub struct CuspSeedFunction {
    rep: Arc<PolyRep>,
    mu: MatrixPolynomial,
    v: CVector,
}

impl CuspSeedFunction {
    pub fn new(rep: Arc<PolyRep>, mu: MatrixPolynomial, v: CVector) -> Result<Self> {
        if mu.n() != rep.n() {
            return Err(Error::DimensionMismatch {
                expected: rep.n(),
                got: mu.n(),
                context: "polynomial size must match the representation".into(),
            });
        }
        if v.len() != rep.dim() {
            return Err(Error::DimensionMismatch {
                expected: rep.dim(),
                got: v.len(),
                context: "seed vector must live in the representation space".into(),
            });
        }
        Ok(CuspSeedFunction { rep, mu, v })
    }

    /// The seed with mu = 1 and the given vector.
    pub fn with_unit_mu(rep: Arc<PolyRep>, v: CVector) -> Result<Self> {
        let mu = MatrixPolynomial::one(rep.n());
        Self::new(rep, mu, v)
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

    /// f_{mu,v}(z) = mu((z - iI)(z + iI)^{-1}) rho((z + iI)/(2i))^{-1} v.
    pub fn eval(&self, z: &SiegelPoint) -> Result<CVector> {
        let n = self.rep.n();
        let i_id = CMatrix::identity(n, n) * C64::new(0.0, 1.0);
        let denom = z.matrix() + &i_id;
        let inv = invert_cocycle(&denom)?;
        let w = (z.matrix() - &i_id) * inv;
        let mu_value = self.mu.eval(&w);
        let half = C64::new(0.0, -0.5); // 1/(2i)
        let rho_arg = denom * half;
        let rho = self.rep.apply(&rho_arg)?;
        let solved = rho
            .lu()
            .solve(&self.v)
            .ok_or(Error::SingularCocycle { cond: f64::INFINITY })?;
        Ok(solved * mu_value)
    }
}

/// One-shot slash action: (f |_rho g)(z) = rho(Cz + D)^{-1} f(g.z).
pub fn slash_eval(
    rep: &PolyRep,
    f: impl Fn(&SiegelPoint) -> Result<CVector>,
    g: &SymplecticMatrix,
    z: &SiegelPoint,
) -> Result<CVector> {
    let moved = moebius(g, z)?;
    let value = f(&moved)?;
    let cocycle = cocycle_complex(&g.to_complex(), z.matrix());
    let rho = rep.apply(&cocycle)?;
    rho.lu()
        .solve(&value)
        .ok_or(Error::SingularCocycle { cond: f64::INFINITY })
}

/// The slash action as a composable evaluator.
pub fn slash<'a, F>(
    rep: &'a PolyRep,
    f: F,
    g: SymplecticMatrix,
) -> impl Fn(&SiegelPoint) -> Result<CVector> + 'a
where
    F: Fn(&SiegelPoint) -> Result<CVector> + 'a,
{
    move |z| slash_eval(rep, &f, &g, z)
}

/// Classical lift F_f(g) = (f |_rho g)(i I).
pub fn classical_lift(seed: &CuspSeedFunction, g: &SymplecticMatrix) -> Result<CVector> {
    let base = SiegelPoint::i_identity(seed.rep.n());
    slash_eval(seed.rep(), |z| seed.eval(z), g, &base)
}

/// Closed form of the lift in KAK coordinates:
/// F_{f_{mu,v}}(k_u h_t k_{u'}) = mu(u tanh(d_t) u^T) rho(u'^T cosh(d_t)^{-1} u^T) v.
pub fn lift_closed_form(
    seed: &CuspSeedFunction,
    kak: &crate::symplectic::KAKFactors,
) -> Result<CVector> {
    let n = seed.rep.n();
    if kak.u.n() != n || kak.u_prime.n() != n || kak.t.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: kak.u.n().max(kak.u_prime.n()).max(kak.t.len()),
            context: "KAK factors size".into(),
        });
    }
    let u = kak.u.matrix();
    let u_prime = kak.u_prime.matrix();
    let tanh = CMatrix::from_fn(n, n, |r, s| {
        if r == s {
            C64::new(kak.t[r].tanh(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let sech = CMatrix::from_fn(n, n, |r, s| {
        if r == s {
            C64::new(1.0 / kak.t[r].cosh(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mu_arg = u * tanh * u.transpose();
    let rho_arg = u_prime.transpose() * sech * u.transpose();
    let lifted = seed.rep.apply_to_vector(&rho_arg, &seed.v)?;
    Ok(lifted * seed.mu.eval(&mu_arg))
}

/// Pairing <F_f(g^{-1}), v>, the closed side of the matrix-coefficient
/// identity up to the constant C_rho.
pub fn lift_pairing(seed: &CuspSeedFunction, v: &CVector, g: &SymplecticMatrix) -> Result<C64> {
    let lift = classical_lift(seed, &g.inverse())?;
    Ok(inner(&lift, v))
}

/// Per-shell norms of the terms of a truncated Poincare series.
#[derive(Debug, Clone, Serialize)]
pub struct ShellStat {
    pub word_length: u32,
    pub terms: u64,
    pub max_norm: f64,
    pub sum_norm: f64,
}

/// Norm statistics of a finite partial sum.
#[derive(Debug, Clone, Serialize)]
pub struct TermStats {
    pub terms: u64,
    pub max_norm: f64,
    pub sum_norm: f64,
    pub shells: Vec<ShellStat>,
}

/// Finite partial sum of the Poincare series over the elements of `set`,
/// with per-term norm statistics. Requires the integrability condition
/// omega_n > 2n; every term is evaluated exactly (no truncation).
pub fn poincare_truncated(
    seed: &CuspSeedFunction,
    set: &GroupElementSet,
    z: &SiegelPoint,
) -> Result<(CVector, TermStats)> {
    let rep = seed.rep();
    if !rep.is_integrable() {
        return Err(Error::Precondition(format!(
            "the series requires omega_n > 2n for integrability; got omega_n = {} at n = {}",
            rep.det_twist(),
            rep.n()
        )));
    }
    if set.n() != rep.n() {
        return Err(Error::DimensionMismatch {
            expected: rep.n(),
            got: set.n(),
            context: "group set size".into(),
        });
    }
    let mut total = CVector::zeros(rep.dim());
    let mut shells: std::collections::BTreeMap<u32, ShellStat> = std::collections::BTreeMap::new();
    let mut max_norm: f64 = 0.0;
    let mut sum_norm: f64 = 0.0;
    for (gamma, &length) in set.elements().iter().zip(set.word_lengths()) {
        let term = slash_eval(rep, |w| seed.eval(w), &gamma.to_real(), z)?;
        let norm = term.norm();
        total += term;
        max_norm = max_norm.max(norm);
        sum_norm += norm;
        let shell = shells.entry(length).or_insert(ShellStat {
            word_length: length,
            terms: 0,
            max_norm: 0.0,
            sum_norm: 0.0,
        });
        shell.terms += 1;
        shell.max_norm = shell.max_norm.max(norm);
        shell.sum_norm += norm;
    }
    let stats = TermStats {
        terms: set.len() as u64,
        max_norm,
        sum_norm,
        shells: shells.into_values().collect(),
    };
    Ok((total, stats))
}

/// A half-integral symmetric matrix: integer diagonal, half-integer
/// off-diagonal entries. Stored as 2T to stay exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfIntegralMatrix {
    twice: nalgebra::DMatrix<i64>,
}

impl HalfIntegralMatrix {
    /// Builds from 2T; requires symmetry and an even diagonal.
    pub fn from_twice(twice: nalgebra::DMatrix<i64>) -> Result<Self> {
        if twice != twice.transpose() {
            return Err(Error::NotSymmetric { deviation: 1.0 });
        }
        for r in 0..twice.nrows() {
            if twice[(r, r)] % 2 != 0 {
                return Err(Error::Precondition(
                    "diagonal of T must be integral".into(),
                ));
            }
        }
        Ok(HalfIntegralMatrix { twice })
    }

    /// Builds from an integer matrix T.
    pub fn from_integer(t: nalgebra::DMatrix<i64>) -> Result<Self> {
        Self::from_twice(t.map(|v| 2 * v))
    }

    pub fn n(&self) -> usize {
        self.twice.nrows()
    }

    pub fn twice(&self) -> &nalgebra::DMatrix<i64> {
        &self.twice
    }

    /// T as a real matrix.
    pub fn to_real(&self) -> RMatrix {
        self.twice.map(|v| v as f64 * 0.5)
    }

    /// tr(T z) for complex symmetric z.
    pub fn trace_pairing(&self, z: &CMatrix) -> C64 {
        let n = self.n();
        let mut total = C64::new(0.0, 0.0);
        for r in 0..n {
            for s in 0..n {
                total += C64::new(self.twice[(r, s)] as f64 * 0.5, 0.0) * z[(s, r)];
            }
        }
        total
    }
}

/// Hard cap on the number of quadrature nodes of [`fourier_coefficient`].
pub const FOURIER_GRID_CAP: u64 = 20_000_000;

/// Fourier coefficient a_T = N^{-m} integral over [0, N]^m of
/// e^{-2 pi i tr(Tz)/N} f(z) dx at fixed y = y0, by product trapezoidal
/// quadrature with `intervals` subintervals per dimension (m = n(n+1)/2).
/// Holomorphy makes the result independent of y0.
pub fn fourier_coefficient(
    rep: &PolyRep,
    f: impl Fn(&SiegelPoint) -> Result<CVector>,
    t: &HalfIntegralMatrix,
    level: u64,
    y0: &RMatrix,
    intervals: usize,
) -> Result<CVector> {
    let n = rep.n();
    if n > 2 {
        return Err(Error::Precondition(
            "Fourier quadrature is limited to n <= 2".into(),
        ));
    }
    if t.n() != n || y0.nrows() != n || y0.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.n().max(y0.nrows()),
            context: "fourier_coefficient".into(),
        });
    }
    if level == 0 || intervals == 0 {
        return Err(Error::Precondition(
            "level and intervals must be positive".into(),
        ));
    }
    let m = n * (n + 1) / 2;
    let nodes = (intervals as u64 + 1).pow(m as u32);
    if nodes > FOURIER_GRID_CAP {
        return Err(Error::ResourceCap(format!(
            "quadrature grid of {nodes} nodes exceeds the cap {FOURIER_GRID_CAP}"
        )));
    }
    // free coordinates in row-major upper-triangle order
    let coords: Vec<(usize, usize)> = (0..n)
        .flat_map(|r| (r..n).map(move |s| (r, s)))
        .collect();
    let step = level as f64 / intervals as f64;
    let mut acc = CVector::zeros(rep.dim());
    let mut index = vec![0usize; m];
    loop {
        let mut x = RMatrix::zeros(n, n);
        let mut weight = 1.0f64;
        for (c, &(r, s)) in coords.iter().enumerate() {
            let value = index[c] as f64 * step;
            x[(r, s)] = value;
            x[(s, r)] = value;
            if index[c] == 0 || index[c] == intervals {
                weight *= 0.5;
            }
        }
        let z = SiegelPoint::from_parts(&x, y0)?;
        let phase_arg = t.trace_pairing(z.matrix()) * C64::new(0.0, -2.0 * std::f64::consts::PI)
            / C64::new(level as f64, 0.0);
        let phase = phase_arg.exp();
        let value = f(&z)?;
        acc += value * (phase * C64::new(weight, 0.0));

        // advance the mixed-radix counter
        let mut c = 0;
        loop {
            if c == m {
                let scale = (step / level as f64).powi(m as i32);
                return Ok(acc * C64::new(scale, 0.0));
            }
            index[c] += 1;
            if index[c] <= intervals {
                break;
            }
            index[c] = 0;
            c += 1;
        }
    }
}

/// Petersson inner product for n = 1, estimated by importance sampling over
/// the standard fundamental domain |x| <= 1/2, x^2 + y^2 >= 1 of the modular
/// group, with the hyperbolic measure y^{-2} dx dy and the 1/|Gamma . {+-I}|
/// prefactor.
pub fn petersson_inner_mc(
    rep: &PolyRep,
    f1: impl Fn(&SiegelPoint) -> Result<CVector> + Sync,
    f2: impl Fn(&SiegelPoint) -> Result<CVector> + Sync,
    gamma_contains_minus_identity: bool,
    cfg: &McConfig,
) -> Result<ComplexEstimate> {
    if rep.n() != 1 {
        return Err(Error::Precondition(
            "the Petersson product is implemented for n = 1 only; fundamental-domain reduction \
             for n >= 2 is out of scope"
                .into(),
        ));
    }
    let prefactor = if gamma_contains_minus_identity { 0.5 } else { 1.0 };
    let chunks = cfg.chunks();
    let moments = chunks
        .par_iter()
        .enumerate()
        .map(|(worker, &count)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[STREAM_PETERSSON, worker as u64]));
            let mut re = Moments::default();
            let mut im = Moments::default();
            for _ in 0..count {
                let x: f64 = rng.gen_range(-0.5..0.5);
                let y_min = (1.0 - x * x).sqrt();
                let u: f64 = rng.gen::<f64>();
                let y = y_min / (1.0 - u);
                let value = (|| -> Result<C64> {
                    let z = SiegelPoint::new(CMatrix::from_element(1, 1, C64::new(x, y)))?;
                    let s = rep.apply_sqrt(&CMatrix::from_element(1, 1, C64::new(y, 0.0)))?;
                    let a = &s * f1(&z)?;
                    let b = &s * f2(&z)?;
                    Ok(inner(&a, &b) * C64::new(prefactor / y_min, 0.0))
                })()
                .unwrap_or(C64::new(0.0, 0.0));
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
    Ok(ComplexEstimate::from_moments(&re, &im, cfg.seed))
}

/// C_rho = integral over D_n of |rho(I - w*w)^{1/2} v_top|^2 dv_D for a unit
/// highest weight vector, estimated with the rejection sampler. Finite for
/// omega_n > n.
pub fn c_rho(rep: &PolyRep, cfg: &McConfig) -> Result<IntegralEstimate> {
    if rep.det_twist() <= rep.n() as i64 {
        return Err(Error::Precondition(format!(
            "C_rho requires omega_n > n; got omega_n = {} at n = {}",
            rep.det_twist(),
            rep.n()
        )));
    }
    let v_top = rep.highest_weight_vector();
    Ok(integrate_disk(rep.n(), cfg, STREAM_C_RHO, move |w| {
        match rep.apply_sqrt(&w.gram_defect()) {
            Ok(s) => (&s * &v_top).norm_squared(),
            // the positive-definite guard can only trip within clamp
            // distance of the boundary, a negligible sliver of the measure
            Err(_) => 0.0,
        }
    }))
}

/// One probe of the reproducing-kernel experiment: the ratio
/// <f(iI), v> / <f, f>_Petersson for the truncated kernel series f.
#[derive(Debug, Clone, Serialize)]
pub struct KernelRatioProbe {
    pub label: String,
    pub terms: u64,
    pub ratio: [f64; 2],
    pub relative_stderr: f64,
}

/// Numerical estimate (n = 1) of the constant relating evaluation at iI to
/// the Petersson pairing against the kernel series P_Gamma f_{1,v}: with
/// f = P_Gamma f_{1,v} itself, the ratio <f(iI), v> / <f, f> is that
/// constant. One probe per truncation set; deepening the truncation should
/// stabilize the ratio (reported, not certified: the truncation bias is not
/// part of the sampling error).
pub fn kernel_ratio_experiment(
    rep: &Arc<PolyRep>,
    sets: &[&GroupElementSet],
    cfg: &McConfig,
) -> Result<Vec<KernelRatioProbe>> {
    if rep.n() != 1 {
        return Err(Error::Precondition(
            "the kernel experiment is implemented for n = 1 only".into(),
        ));
    }
    let v = rep.highest_weight_vector();
    let seed = CuspSeedFunction::with_unit_mu(rep.clone(), v.clone())?;
    let base = SiegelPoint::i_identity(1);
    let mut probes = Vec::new();
    for set in sets {
        let series = |z: &SiegelPoint| Ok(poincare_truncated(&seed, set, z)?.0);
        let numerator = inner(&series(&base)?, &v);
        let (s1, s2) = (&series, &series);
        let denominator = petersson_inner_mc(rep, s1, s2, true, cfg)?;
        let ratio = numerator / denominator.value();
        let relative_stderr = (denominator.re_stderr.hypot(denominator.im_stderr))
            / denominator.value().norm();
        probes.push(KernelRatioProbe {
            label: format!("ball L = {}", set.word_length_bound()),
            terms: set.len() as u64,
            ratio: [ratio.re, ratio.im],
            relative_stderr,
        });
    }
    Ok(probes)
}

/// Monte-Carlo estimate of the matrix coefficient
/// <pi_rho(g) f, f_{1,v}> over D_n after the Cayley change of variables.
///
/// Uses the same disk sampler and importance weights as [`c_rho`]. The
/// closed-form side of the identity is C_rho <F_f(g^{-1}), v>, available via
/// [`lift_pairing`].
pub fn matrix_coefficient_mc(
    seed: &CuspSeedFunction,
    v: &CVector,
    g: &SymplecticMatrix,
    cfg: &McConfig,
) -> Result<ComplexEstimate> {
    let rep = seed.rep();
    if rep.det_twist() <= rep.n() as i64 {
        return Err(Error::Precondition(format!(
            "matrix coefficients require omega_n > n; got omega_n = {} at n = {}",
            rep.det_twist(),
            rep.n()
        )));
    }
    if v.len() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            got: v.len(),
            context: "matrix_coefficient_mc".into(),
        });
    }
    let n = rep.n();
    // pi_rho(g) f = f |_rho g^{-1}; transported to the disk model the slash
    // factor is the Cayley conjugate of g^{-1}
    let h = cayley_block_matrix(n) * g.inverse().to_complex() * cayley_block_inverse(n);
    let seed = seed.clone();
    let v = v.clone();
    Ok(integrate_disk_complex(n, cfg, STREAM_MATCOEF, move |w| {
        let value = (|| -> Result<C64> {
            let moved = moebius_complex(&h, w.matrix())?;
            let cocycle = cocycle_complex(&h, w.matrix());
            let rho = seed.rep.apply(&cocycle)?;
            let transported = rho
                .lu()
                .solve(&seed.v)
                .ok_or(Error::SingularCocycle { cond: f64::INFINITY })?;
            let f_value = transported * seed.mu.eval(&moved);
            // both square-root weights moved to one slot via the adjoint
            // identity: <rho(d)^{1/2} a, rho(d)^{1/2} b> = <rho(d) a, b>
            let weighted = seed.rep.apply_to_vector(&w.gram_defect(), &f_value)?;
            Ok(inner(&weighted, &v))
        })()
        .unwrap_or(C64::new(0.0, 0.0));
        value
    }))
}
