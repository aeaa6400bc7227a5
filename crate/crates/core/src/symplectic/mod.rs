//! The real symplectic group Sp_2n(R), the Siegel upper half-space H_n and
//! bounded domain D_n, their actions, and the NAK / KAK factorizations.

pub mod sampling;

use crate::error::{Error, Result};
use crate::glrep::UnitaryMatrix;
use crate::{CMatrix, RMatrix, C64};
use nalgebra::linalg::{SymmetricEigen, SVD};

const SYMPLECTIC_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-10;
const COCYCLE_COND_MAX: f64 = 1e12;
/// Reciprocal-eigenvalue pairing tolerance for the KAK factorization.
const KAK_PAIR_TOL: f64 = 1e-8;

/// J_n = [[0, I], [-I, 0]].
pub fn j_matrix(n: usize) -> RMatrix {
    let mut j = RMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        j[(r, n + r)] = 1.0;
        j[(n + r, r)] = -1.0;
    }
    j
}

/// An element of Sp_2n(R), validated on construction.
#[derive(Debug, Clone)]
pub struct SymplecticMatrix {
    n: usize,
    m: RMatrix,
}

impl SymplecticMatrix {
    pub fn new(m: RMatrix) -> Result<Self> {
        let rows = m.nrows();
        if !rows.is_multiple_of(2) || m.ncols() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: m.ncols(),
                context: "symplectic matrix must be square of even size".into(),
            });
        }
        let n = rows / 2;
        let j = j_matrix(n);
        let deviation = (m.transpose() * &j * &m - &j).norm();
        if deviation > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic { deviation });
        }
        Ok(SymplecticMatrix { n, m })
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMatrix {
            n,
            m: RMatrix::identity(2 * n, 2 * n),
        }
    }

    pub fn j(n: usize) -> Self {
        SymplecticMatrix { n, m: j_matrix(n) }
    }

    /// n_x = [[I, x], [0, I]] for symmetric x.
    pub fn translation(x: &RMatrix) -> Result<Self> {
        let n = x.nrows();
        let dev = (x - x.transpose()).norm();
        if dev > SYMMETRY_TOL * x.norm().max(1.0) {
            return Err(Error::NotSymmetric { deviation: dev });
        }
        let mut m = RMatrix::identity(2 * n, 2 * n);
        for r in 0..n {
            for s in 0..n {
                m[(r, n + s)] = x[(r, s)];
            }
        }
        Ok(SymplecticMatrix { n, m })
    }

    /// a_y = [[y^{1/2}, 0], [0, y^{-1/2}]] for symmetric positive definite y.
    pub fn dilation(y: &RMatrix) -> Result<Self> {
        let n = y.nrows();
        let dev = (y - y.transpose()).norm();
        if dev > SYMMETRY_TOL * y.norm().max(1.0) {
            return Err(Error::NotSymmetric { deviation: dev });
        }
        let eig = SymmetricEigen::new(y.clone());
        let min_eig = eig.eigenvalues.min();
        if min_eig <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        let mut m = RMatrix::zeros(2 * n, 2 * n);
        let sqrt = sym_from_eigen(&eig, |l| l.sqrt());
        let inv_sqrt = sym_from_eigen(&eig, |l| 1.0 / l.sqrt());
        for r in 0..n {
            for s in 0..n {
                m[(r, s)] = sqrt[(r, s)];
                m[(n + r, n + s)] = inv_sqrt[(r, s)];
            }
        }
        Ok(SymplecticMatrix { n, m })
    }

    /// k_u = [[Re u, Im u], [-Im u, Re u]].
    pub fn from_unitary(u: &UnitaryMatrix) -> Self {
        let n = u.n();
        let mu = u.matrix();
        let mut m = RMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for s in 0..n {
                let z = mu[(r, s)];
                m[(r, s)] = z.re;
                m[(r, n + s)] = z.im;
                m[(n + r, s)] = -z.im;
                m[(n + r, n + s)] = z.re;
            }
        }
        SymplecticMatrix { n, m }
    }

    /// h_t = diag(e^{t_1}, ..., e^{t_n}, e^{-t_1}, ..., e^{-t_n}).
    pub fn hyperbolic(t: &[f64]) -> Self {
        let n = t.len();
        let mut m = RMatrix::zeros(2 * n, 2 * n);
        for (r, &tr) in t.iter().enumerate() {
            m[(r, r)] = tr.exp();
            m[(n + r, n + r)] = (-tr).exp();
        }
        SymplecticMatrix { n, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.m
    }

    pub fn block_a(&self) -> RMatrix {
        self.m.view((0, 0), (self.n, self.n)).into_owned()
    }

    pub fn block_b(&self) -> RMatrix {
        self.m.view((0, self.n), (self.n, self.n)).into_owned()
    }

    pub fn block_c(&self) -> RMatrix {
        self.m.view((self.n, 0), (self.n, self.n)).into_owned()
    }

    pub fn block_d(&self) -> RMatrix {
        self.m.view((self.n, self.n), (self.n, self.n)).into_owned()
    }

    pub fn mul(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix {
            n: self.n,
            m: &self.m * &other.m,
        }
    }

    /// Blockwise symplectic inverse [[D^T, -B^T], [-C^T, A^T]].
    pub fn inverse(&self) -> SymplecticMatrix {
        let n = self.n;
        let (a, b, c, d) = (self.block_a(), self.block_b(), self.block_c(), self.block_d());
        let mut m = RMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for s in 0..n {
                m[(r, s)] = d[(s, r)];
                m[(r, n + s)] = -b[(s, r)];
                m[(n + r, s)] = -c[(s, r)];
                m[(n + r, n + s)] = a[(s, r)];
            }
        }
        SymplecticMatrix { n, m }
    }

    /// Negation, again symplectic.
    pub fn negate(&self) -> SymplecticMatrix {
        SymplecticMatrix {
            n: self.n,
            m: -&self.m,
        }
    }

    /// Extracts u from a matrix of the form k_u = [[A, B], [-B, A]],
    /// cleaning roundoff with a polar projection onto U(n). The form gate
    /// must admit KAK cluster residue up to the pairing tolerance; accuracy
    /// is governed by the reconstruction invariants, not by this check.
    pub fn unitary_part(&self) -> Result<UnitaryMatrix> {
        let (a, b, c, d) = (self.block_a(), self.block_b(), self.block_c(), self.block_d());
        let form_dev = ((&a - &d).norm().powi(2) + (&b + &c).norm().powi(2)).sqrt();
        if form_dev > 10.0 * KAK_PAIR_TOL * self.m.norm().max(1.0) {
            return Err(Error::NotUnitary {
                deviation: form_dev,
            });
        }
        let n = self.n;
        let raw = CMatrix::from_fn(n, n, |r, s| C64::new(a[(r, s)], b[(r, s)]));
        UnitaryMatrix::new(polar_unitary(&raw))
    }

    /// Complexification of the block matrix, for slashing by group elements.
    pub fn to_complex(&self) -> CMatrix {
        self.m.map(|x| C64::new(x, 0.0))
    }
}

fn sym_from_eigen(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> RMatrix {
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..scaled.ncols() {
        let v = f(eig.eigenvalues[j]);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= v;
        }
    }
    &scaled * eig.eigenvectors.transpose()
}

/// Nearest unitary (polar factor) of an approximately unitary matrix.
fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    u * vt
}

/// A point of the Siegel upper half-space H_n.
#[derive(Debug, Clone)]
pub struct SiegelPoint {
    z: CMatrix,
}

impl SiegelPoint {
    pub fn new(z: CMatrix) -> Result<Self> {
        let n = z.nrows();
        if z.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.ncols(),
                context: "Siegel point must be square".into(),
            });
        }
        let dev = (&z - z.transpose()).norm();
        if dev > SYMMETRY_TOL * z.norm().max(1.0) {
            return Err(Error::NotSymmetric { deviation: dev });
        }
        let y = z.map(|v| v.im);
        let min_eig = SymmetricEigen::new(y).eigenvalues.min();
        if min_eig <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        Ok(SiegelPoint { z })
    }

    /// The base point i I_n.
    pub fn i_identity(n: usize) -> Self {
        SiegelPoint {
            z: CMatrix::identity(n, n) * C64::new(0.0, 1.0),
        }
    }

    pub fn from_parts(x: &RMatrix, y: &RMatrix) -> Result<Self> {
        let z = CMatrix::from_fn(x.nrows(), x.ncols(), |r, s| C64::new(x[(r, s)], y[(r, s)]));
        SiegelPoint::new(z)
    }

    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.z
    }

    pub fn x(&self) -> RMatrix {
        self.z.map(|v| v.re)
    }

    pub fn y(&self) -> RMatrix {
        self.z.map(|v| v.im)
    }
}

/// A point of the bounded domain D_n (symmetric, I - w*w > 0).
#[derive(Debug, Clone)]
pub struct DiskPoint {
    w: CMatrix,
}

impl DiskPoint {
    pub fn new(w: CMatrix) -> Result<Self> {
        let n = w.nrows();
        if w.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.ncols(),
                context: "disk point must be square".into(),
            });
        }
        let dev = (&w - w.transpose()).norm();
        if dev > SYMMETRY_TOL * w.norm().max(1.0) {
            return Err(Error::NotSymmetric { deviation: dev });
        }
        let min_eig = gram_defect_min_eig(&w);
        if min_eig <= 0.0 {
            return Err(Error::NotInDisk { min_eig });
        }
        Ok(DiskPoint { w })
    }

    pub fn center(n: usize) -> Self {
        DiskPoint {
            w: CMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.w
    }

    /// I - w*w, Hermitian positive definite.
    pub fn gram_defect(&self) -> CMatrix {
        let n = self.n();
        let m = CMatrix::identity(n, n) - self.w.adjoint() * &self.w;
        hermitianize(&m)
    }
}

/// Minimum eigenvalue of I - w*w.
pub fn gram_defect_min_eig(w: &CMatrix) -> f64 {
    let n = w.nrows();
    let m = CMatrix::identity(n, n) - w.adjoint() * w;
    SymmetricEigen::new(hermitianize(&m)).eigenvalues.min()
}

fn hermitianize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn symmetrize_c(m: &CMatrix) -> CMatrix {
    (m + m.transpose()) * C64::new(0.5, 0.0)
}

/// Inverts a cocycle matrix, rejecting numerically singular input.
pub(crate) fn invert_cocycle(m: &CMatrix) -> Result<CMatrix> {
    let svd = SVD::new(m.clone(), false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > COCYCLE_COND_MAX {
        return Err(Error::SingularCocycle {
            cond: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        });
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::SingularCocycle { cond: f64::INFINITY })
}

/// Generalized Moebius action (Az + B)(Cz + D)^{-1} of a complex block
/// matrix on a complex symmetric matrix. Used both for Sp_2n(R) on H_n and
/// for Cayley-conjugated elements acting on D_n.
pub fn moebius_complex(m: &CMatrix, z: &CMatrix) -> Result<CMatrix> {
    let n = z.nrows();
    let a = m.view((0, 0), (n, n)).into_owned();
    let b = m.view((0, n), (n, n)).into_owned();
    let denom = cocycle_complex(m, z);
    let inv = invert_cocycle(&denom)?;
    let num = a * z + b;
    Ok(symmetrize_c(&(num * inv)))
}

/// The cocycle Cz + D of a complex block matrix at z.
pub fn cocycle_complex(m: &CMatrix, z: &CMatrix) -> CMatrix {
    let n = z.nrows();
    let c = m.view((n, 0), (n, n)).into_owned();
    let d = m.view((n, n), (n, n)).into_owned();
    c * z + d
}

/// g.z = (Az + B)(Cz + D)^{-1}.
pub fn moebius(g: &SymplecticMatrix, z: &SiegelPoint) -> Result<SiegelPoint> {
    let moved = moebius_complex(&g.to_complex(), z.matrix())?;
    SiegelPoint::new(moved)
}

/// Im(g.z) = (Cz + D)^{-*} y (Cz + D)^{-1}, returned as a Hermitian matrix.
pub fn imag_transform(g: &SymplecticMatrix, z: &SiegelPoint) -> Result<CMatrix> {
    let denom = cocycle_complex(&g.to_complex(), z.matrix());
    let inv = invert_cocycle(&denom)?;
    let y = z.y().map(|v| C64::new(v, 0.0));
    Ok(hermitianize(&(inv.adjoint() * y * &inv)))
}

/// Factors of g = n_x a_y k.
#[derive(Debug, Clone)]
pub struct NAKFactors {
    pub x: RMatrix,
    pub y: RMatrix,
    pub k: UnitaryMatrix,
}

impl NAKFactors {
    pub fn reconstruct(&self) -> Result<SymplecticMatrix> {
        let nx = SymplecticMatrix::translation(&self.x)?;
        let ay = SymplecticMatrix::dilation(&self.y)?;
        let ku = SymplecticMatrix::from_unitary(&self.k);
        Ok(nx.mul(&ay).mul(&ku))
    }
}

/// g = n_x a_y k with x + i y = g.(i I).
pub fn nak_factorize(g: &SymplecticMatrix) -> Result<NAKFactors> {
    let base = SiegelPoint::i_identity(g.n());
    let z = moebius(g, &base)?;
    let x = symmetrize_r(&z.x());
    let y = symmetrize_r(&z.y());
    let nx = SymplecticMatrix::translation(&x)?;
    let ay = SymplecticMatrix::dilation(&y)?;
    let k_mat = ay.inverse().mul(&nx.inverse()).mul(g);
    let k = k_mat.unitary_part()?;
    Ok(NAKFactors { x, y, k })
}

fn symmetrize_r(m: &RMatrix) -> RMatrix {
    (m + m.transpose()) * 0.5
}

/// Cayley transform z -> (z - iI)(z + iI)^{-1}, a biholomorphism H_n -> D_n.
pub fn cayley(z: &SiegelPoint) -> Result<DiskPoint> {
    let n = z.n();
    let i_id = CMatrix::identity(n, n) * C64::new(0.0, 1.0);
    let denom = z.matrix() + &i_id;
    let inv = invert_cocycle(&denom)?;
    let num = z.matrix() - &i_id;
    DiskPoint::new(symmetrize_c(&(num * inv)))
}

/// Inverse Cayley transform w -> i(I + w)(I - w)^{-1}.
pub fn inverse_cayley(w: &DiskPoint) -> Result<SiegelPoint> {
    let n = w.n();
    let id = CMatrix::identity(n, n);
    let denom = &id - w.matrix();
    let inv = invert_cocycle(&denom)?;
    let num = (&id + w.matrix()) * C64::new(0.0, 1.0);
    SiegelPoint::new(symmetrize_c(&(num * inv)))
}

/// The block matrix of the Cayley transform as an element of GL_2n(C):
/// l = (1/2i) [[I, -iI], [I, iI]].
pub fn cayley_block_matrix(n: usize) -> CMatrix {
    let half = C64::new(0.0, -0.5); // 1/(2i)
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        m[(r, r)] = half;
        m[(r, n + r)] = half * C64::new(0.0, -1.0);
        m[(n + r, r)] = half;
        m[(n + r, n + r)] = half * C64::new(0.0, 1.0);
    }
    m
}

/// Exact inverse of the Cayley block matrix: [[iI, iI], [-I, I]].
pub fn cayley_block_inverse(n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        m[(r, r)] = C64::new(0.0, 1.0);
        m[(r, n + r)] = C64::new(0.0, 1.0);
        m[(n + r, r)] = C64::new(-1.0, 0.0);
        m[(n + r, n + r)] = C64::new(1.0, 0.0);
    }
    m
}

/// Factors of g = k_u h_t k_{u'} with t_1 >= ... >= t_n >= 0.
#[derive(Debug, Clone)]
pub struct KAKFactors {
    pub u: UnitaryMatrix,
    pub t: Vec<f64>,
    pub u_prime: UnitaryMatrix,
}

impl KAKFactors {
    pub fn reconstruct(&self) -> SymplecticMatrix {
        SymplecticMatrix::from_unitary(&self.u)
            .mul(&SymplecticMatrix::hyperbolic(&self.t))
            .mul(&SymplecticMatrix::from_unitary(&self.u_prime))
    }
}

/// Cartan decomposition g = k_u h_t k_{u'}.
///
/// Route: polar decomposition g = k p with p = (g^T g)^{1/2}, then a
/// symplectic-orthogonal diagonalization of p. Eigenvectors for reciprocal
/// eigenvalue pairs are generated exactly as -J v; the factorization is
/// non-unique on degenerate clusters, where any orthonormal choice is valid
/// and only the reconstruction invariant is contractual.
pub fn kak_factorize(g: &SymplecticMatrix) -> Result<KAKFactors> {
    let n = g.n();
    let s = g.matrix().transpose() * g.matrix();
    let eig = SymmetricEigen::new(symmetrize_r(&s));
    let log_halves: Vec<f64> = eig.eigenvalues.iter().map(|&l| 0.5 * l.ln()).collect();

    // fully degenerate case: g is in K up to the roundtrip tolerance, and
    // the convention is (u, 0, I); the polar factor absorbs the residue
    if log_halves.iter().all(|&t| t.abs() <= 1e-9) {
        let p_inv = sym_from_eigen(&eig, |l| 1.0 / l.sqrt());
        let u = SymplecticMatrix::new(g.matrix() * p_inv)?.unitary_part()?;
        return Ok(KAKFactors {
            u,
            t: vec![0.0; n],
            u_prime: UnitaryMatrix::identity(n),
        });
    }

    // expanding eigenvectors (t > tol), then a symplectic basis of the
    // neutral space (|t| <= tol); exponents straddling the tolerance can
    // split a reciprocal pair, so borderline members are demoted until the
    // expanding and contracting counts match
    let mut expanding: Vec<(f64, usize)> = Vec::new();
    let mut contracting: Vec<(f64, usize)> = Vec::new();
    let mut neutral: Vec<usize> = Vec::new();
    for (idx, &t) in log_halves.iter().enumerate() {
        if t > KAK_PAIR_TOL {
            expanding.push((t, idx));
        } else if t < -KAK_PAIR_TOL {
            contracting.push((t, idx));
        } else {
            neutral.push(idx);
        }
    }
    expanding.sort_by(|a, b| b.0.total_cmp(&a.0));
    contracting.sort_by(|a, b| a.0.total_cmp(&b.0));
    while expanding.len() > contracting.len() {
        let (_, idx) = expanding.pop().expect("nonempty by the loop condition");
        neutral.push(idx);
    }
    while contracting.len() > expanding.len() {
        let (_, idx) = contracting.pop().expect("nonempty by the loop condition");
        neutral.push(idx);
    }
    if 2 * expanding.len() + neutral.len() != 2 * n || !neutral.len().is_multiple_of(2) {
        return Err(Error::Internal(format!(
            "unbalanced reciprocal spectrum: {} expanding, {} neutral",
            expanding.len(),
            neutral.len()
        )));
    }

    let j = j_matrix(n);
    let mut v_columns: Vec<nalgebra::DVector<f64>> = Vec::new();
    let mut t_values: Vec<f64> = Vec::new();
    for &(t, idx) in &expanding {
        v_columns.push(sign_normalize(eig.eigenvectors.column(idx).into_owned()));
        t_values.push(t);
    }
    // greedy split of the neutral space into pairs (v, Jv)
    let mut pool: Vec<nalgebra::DVector<f64>> = neutral
        .iter()
        .map(|&idx| eig.eigenvectors.column(idx).into_owned())
        .collect();
    let mut chosen: Vec<nalgebra::DVector<f64>> = Vec::new();
    while chosen.len() < neutral.len() / 2 {
        // project the pool off span(chosen, J chosen) and take the largest residual
        let mut best: Option<(f64, nalgebra::DVector<f64>)> = None;
        for w in &pool {
            let mut r = w.clone();
            for v in &chosen {
                let jv = &j * v;
                r -= v * v.dot(&r);
                r -= &jv * jv.dot(&r);
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.ok_or_else(|| Error::Internal("neutral pool exhausted".into()))?;
        if norm < 1e-10 {
            return Err(Error::Internal(
                "could not complete a symplectic basis of the neutral space".into(),
            ));
        }
        chosen.push(sign_normalize(r / norm));
        pool.retain(|w| {
            let mut r = w.clone();
            for v in &chosen {
                let jv = &j * v;
                r -= v * v.dot(&r);
                r -= &jv * jv.dot(&r);
            }
            r.norm() > 1e-12
        });
    }
    for v in chosen {
        v_columns.push(v);
        t_values.push(0.0);
    }

    let mut big_k = RMatrix::zeros(2 * n, 2 * n);
    for (col, v) in v_columns.iter().enumerate() {
        let jv = -(&j * v);
        for row in 0..2 * n {
            big_k[(row, col)] = v[row];
            big_k[(row, n + col)] = jv[row];
        }
    }

    // g = k p with p = K h_t K^T, so k_u = g K h_t^{-1} and k_{u'} = K^T
    let neg_t: Vec<f64> = t_values.iter().map(|&t| -t).collect();
    let h_inv = SymplecticMatrix::hyperbolic(&neg_t);
    let ku_mat = g.matrix() * &big_k * h_inv.matrix();
    let u = SymplecticMatrix::new(ku_mat)?.unitary_part()?;
    let u_prime = SymplecticMatrix::new(big_k.transpose())?.unitary_part()?;

    let factors = KAKFactors {
        u,
        t: t_values,
        u_prime,
    };
    let dev = (factors.reconstruct().matrix() - g.matrix()).norm();
    if dev > 1e-7 * g.matrix().norm().max(1.0) {
        return Err(Error::Internal(format!(
            "KAK reconstruction defect {dev:.3e}"
        )));
    }
    Ok(factors)
}

/// Flips the sign so that the entry of largest magnitude is positive.
fn sign_normalize(v: nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
    let mut best = 0usize;
    for i in 0..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests;
