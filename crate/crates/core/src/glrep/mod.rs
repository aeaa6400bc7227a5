//! Irreducible polynomial representations of GL_n(C).
//!
//! A representation is built from its highest weight omega
//! (omega_1 >= ... >= omega_n >= 0) by realizing the Schur module of shape
//! lambda = omega - omega_n (1,...,1) inside the k-fold tensor power of C^n
//! (k = |lambda|) as the image of a Young symmetrizer, orthonormalized block
//! by block, with the leftover determinant power carried symbolically. The
//! tensor power carries the standard inner product, so the restriction to
//! U(n) is unitary on the nose.

pub mod tensor;
pub mod young;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};
use nalgebra::linalg::{SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative cutoff for the orthonormalization rank decision.
const SVD_RANK_CUTOFF: f64 = 1e-9;
/// Eigenvalue clamp used when taking operator square roots.
const SQRT_EIG_CLAMP: f64 = 1e-14;
/// Tolerance for the unitarity membership test.
const UNITARY_TOL: f64 = 1e-10;

/// A dominant polynomial weight for GL_n(C).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighestWeight {
    n: usize,
    omega: Vec<i64>,
}

impl HighestWeight {
    /// Requires omega_1 >= omega_2 >= ... >= omega_n >= 0.
    pub fn new(omega: Vec<i64>) -> Result<Self> {
        if omega.is_empty()
            || omega.windows(2).any(|w| w[0] < w[1])
            || *omega.last().unwrap() < 0
        {
            return Err(Error::InvalidWeight { omega });
        }
        Ok(HighestWeight {
            n: omega.len(),
            omega,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> &[i64] {
        &self.omega
    }

    /// The partition lambda = omega - omega_n (1,...,1).
    pub fn partition(&self) -> Vec<usize> {
        let last = self.omega[self.n - 1];
        self.omega.iter().map(|&w| (w - last) as usize).collect()
    }

    /// Tensor degree k = sum_r (omega_r - omega_n).
    pub fn tensor_degree(&self) -> usize {
        self.partition().iter().sum()
    }

    /// Determinant twist omega_n.
    pub fn det_twist(&self) -> i64 {
        self.omega[self.n - 1]
    }
}

/// Exact Weyl dimension: prod_{r<s} (omega_r - omega_s + s - r) / (s - r).
///
/// Integer arithmetic throughout; serves as an independent oracle for the
/// constructed dimension.
pub fn weyl_dimension(weight: &HighestWeight) -> u64 {
    let n = weight.n;
    let omega = &weight.omega;
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for r in 0..n {
        for s in (r + 1)..n {
            num *= (omega[r] - omega[s]) as i128 + (s as i128 - r as i128);
            den *= s as i128 - r as i128;
        }
    }
    debug_assert_eq!(num % den, 0);
    (num / den) as u64
}

/// An element of U(n), validated on construction.
#[derive(Debug, Clone)]
pub struct UnitaryMatrix {
    n: usize,
    m: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.ncols(),
                context: "unitary matrix must be square".into(),
            });
        }
        let deviation = (m.adjoint() * &m - CMatrix::identity(n, n)).norm();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix { n, m })
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix {
            n,
            m: CMatrix::identity(n, n),
        }
    }

    /// Diagonal unitary diag(e^{i theta_1}, ..., e^{i theta_n}).
    pub fn from_phases(thetas: &[f64]) -> Self {
        let n = thetas.len();
        let mut m = CMatrix::zeros(n, n);
        for (r, &t) in thetas.iter().enumerate() {
            m[(r, r)] = C64::new(t.cos(), t.sin());
        }
        UnitaryMatrix { n, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Entrywise conjugate, again unitary.
    pub fn conjugate(&self) -> UnitaryMatrix {
        UnitaryMatrix {
            n: self.n,
            m: self.m.map(|z| z.conj()),
        }
    }

    /// Inverse = conjugate transpose.
    pub fn inverse(&self) -> UnitaryMatrix {
        UnitaryMatrix {
            n: self.n,
            m: self.m.adjoint(),
        }
    }
}

/// Build-time limits for the tensor-power realization.
#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Maximum allowed n^k (flat tensor dimension). The default covers
    /// n <= 3 with k <= 8.
    pub max_tensor_dim: u128,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_tensor_dim: 6561,
        }
    }
}

/// A constructed irreducible polynomial representation of GL_n(C).
///
/// Immutable after construction; evaluation is pure.
#[derive(Debug, Clone)]
pub struct PolyRep {
    weight: HighestWeight,
    dim: usize,
    tensor_degree: usize,
    det_twist: i64,
    /// n^k x dim matrix with orthonormal columns spanning the Schur module.
    basis_embedding: CMatrix,
    /// Weight of each basis vector (determinant twist included).
    weight_labels: Vec<Vec<i64>>,
    hwv_index: usize,
}

/// Builds the representation of the given highest weight with default limits.
pub fn build_rep(weight: &HighestWeight) -> Result<PolyRep> {
    build_rep_with(weight, &BuildOptions::default())
}

/// Builds the representation of the given highest weight.
pub fn build_rep_with(weight: &HighestWeight, opts: &BuildOptions) -> Result<PolyRep> {
    let n = weight.n();
    let k = weight.tensor_degree();
    let required = (n as u128).pow(k as u32);
    if required > opts.max_tensor_dim {
        return Err(Error::TensorBudget {
            n,
            k,
            required,
            budget: opts.max_tensor_dim,
        });
    }
    let tensor_dim = required as usize;
    let twist = weight.det_twist();
    let expected_dim = weyl_dimension(weight) as usize;

    if k == 0 {
        // pure determinant power
        return Ok(PolyRep {
            weight: weight.clone(),
            dim: 1,
            tensor_degree: 0,
            det_twist: twist,
            basis_embedding: CMatrix::identity(1, 1),
            weight_labels: vec![vec![twist; n]],
            hwv_index: 0,
        });
    }

    let shape = young::Shape::new(weight.partition());
    let symmetrizer = young::Symmetrizer::new(&shape);

    // One block per content; each block is already a single weight space, so
    // the blocks are mutually orthogonal (disjoint tensor support).
    struct Block {
        content: Vec<usize>,
        support: Vec<usize>,
        u: CMatrix,
        singular_values: Vec<f64>,
    }

    let mut blocks: Vec<Block> = Vec::new();
    let mut sigma_max: f64 = 0.0;

    for content in young::all_contents(n, k) {
        let fillings = young::row_sorted_fillings(&shape, n, &content);
        if fillings.is_empty() {
            continue;
        }
        let mut columns: Vec<BTreeMap<usize, i64>> = Vec::new();
        for filling in &fillings {
            let image = symmetrizer.apply_to_filling(n, filling);
            if !image.is_empty() {
                columns.push(image.into_iter().collect());
            }
        }
        if columns.is_empty() {
            continue;
        }
        let mut support: Vec<usize> = columns
            .iter()
            .flat_map(|c| c.keys().copied())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        support.sort_unstable();
        let local_of: BTreeMap<usize, usize> = support
            .iter()
            .enumerate()
            .map(|(local, &flat)| (flat, local))
            .collect();
        let mut local = CMatrix::zeros(support.len(), columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (&flat, &coeff) in col {
                local[(local_of[&flat], j)] = C64::new(coeff as f64, 0.0);
            }
        }
        let svd = SVD::new(local, true, false);
        let u = svd.u.expect("left singular vectors requested");
        let singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
        for &s in &singular_values {
            sigma_max = sigma_max.max(s);
        }
        blocks.push(Block {
            content,
            support,
            u,
            singular_values,
        });
    }

    // Global rank cutoff relative to the largest singular value overall.
    let cutoff = SVD_RANK_CUTOFF * sigma_max;
    let mut embedding_columns: Vec<CVector> = Vec::new();
    let mut weight_labels: Vec<Vec<i64>> = Vec::new();
    for block in &blocks {
        let label: Vec<i64> = block.content.iter().map(|&c| c as i64 + twist).collect();
        for (j, &s) in block.singular_values.iter().enumerate() {
            if s <= cutoff {
                continue;
            }
            let mut col = CVector::zeros(tensor_dim);
            for (local, &flat) in block.support.iter().enumerate() {
                col[flat] = block.u[(local, j)];
            }
            embedding_columns.push(col);
            weight_labels.push(label.clone());
        }
    }

    let dim = embedding_columns.len();
    if dim != expected_dim {
        return Err(Error::Internal(format!(
            "constructed dimension {dim} does not match the Weyl dimension {expected_dim} for {:?}",
            weight.omega()
        )));
    }
    let basis_embedding = CMatrix::from_columns(&embedding_columns);

    // Blocks were produced in descending lexicographic content order, so the
    // labels are already sorted; the top block is the highest weight.
    let hwv_index = weight_labels
        .iter()
        .position(|l| l == weight.omega())
        .ok_or_else(|| Error::Internal("highest weight label missing".into()))?;

    Ok(PolyRep {
        weight: weight.clone(),
        dim,
        tensor_degree: k,
        det_twist: twist,
        basis_embedding,
        weight_labels,
        hwv_index,
    })
}

impl PolyRep {
    pub fn n(&self) -> usize {
        self.weight.n()
    }

    pub fn weight(&self) -> &HighestWeight {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tensor_degree(&self) -> usize {
        self.tensor_degree
    }

    pub fn det_twist(&self) -> i64 {
        self.det_twist
    }

    pub fn basis_embedding(&self) -> &CMatrix {
        &self.basis_embedding
    }

    pub fn weight_labels(&self) -> &[Vec<i64>] {
        &self.weight_labels
    }

    pub fn hwv_index(&self) -> usize {
        self.hwv_index
    }

    /// True when the integrability condition omega_n > 2n holds.
    pub fn is_integrable(&self) -> bool {
        self.det_twist > 2 * self.n() as i64
    }

    fn check_square(&self, g: &CMatrix, context: &str) -> Result<()> {
        let n = self.n();
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.nrows().max(g.ncols()),
                context: context.into(),
            });
        }
        Ok(())
    }

    /// Evaluates rho(g) = det(g)^{omega_n} B^* g^{tensor k} B.
    pub fn apply(&self, g: &CMatrix) -> Result<CMatrix> {
        self.check_square(g, "apply")?;
        let moved =
            tensor::tensor_power_apply_matrix(self.n(), self.tensor_degree, g, &self.basis_embedding);
        let mut out = self.basis_embedding.adjoint() * moved;
        out *= det_power(g, self.det_twist);
        Ok(out)
    }

    /// Evaluates rho(g) v without forming the full matrix.
    pub fn apply_to_vector(&self, g: &CMatrix, v: &CVector) -> Result<CVector> {
        self.check_square(g, "apply_to_vector")?;
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
                context: "apply_to_vector".into(),
            });
        }
        let embedded = &self.basis_embedding * v;
        let moved = tensor::tensor_power_apply(self.n(), self.tensor_degree, g, &embedded);
        let mut out = self.basis_embedding.adjoint() * moved;
        out *= det_power(g, self.det_twist);
        Ok(out)
    }

    /// Positive square root rho(y)^{1/2} for Hermitian positive definite y,
    /// computed by eigendecomposition of rho(y) with eigenvalue clamping.
    /// Equals rho(y^{1/2}) for any positive definite y.
    pub fn apply_sqrt(&self, y: &CMatrix) -> Result<CMatrix> {
        self.check_square(y, "apply_sqrt")?;
        let herm_dev = (y - y.adjoint()).norm();
        if herm_dev > 1e-9 * y.norm().max(1.0) {
            return Err(Error::NotSymmetric {
                deviation: herm_dev,
            });
        }
        let eig_y = SymmetricEigen::new(y.clone());
        let min_eig = eig_y.eigenvalues.min();
        let max_eig = eig_y.eigenvalues.max();
        if min_eig <= 1e-12 * max_eig.max(1.0) {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        let rho_y = self.apply(y)?;
        Ok(hermitian_sqrt(&rho_y))
    }

    /// sigma_K(k_u) = rho(conj(u)); unitary since rho restricted to U(n) is.
    pub fn eval_sigma(&self, u: &UnitaryMatrix) -> Result<CMatrix> {
        self.apply(u.conjugate().matrix())
    }

    /// The highest weight basis vector as coordinates in the representation
    /// space: the standard basis vector at `hwv_index`.
    pub fn highest_weight_vector(&self) -> CVector {
        let mut v = CVector::zeros(self.dim);
        v[self.hwv_index] = C64::new(1.0, 0.0);
        v
    }
}

/// det(g)^p for a nonnegative integer power.
fn det_power(g: &CMatrix, p: i64) -> C64 {
    debug_assert!(p >= 0);
    if p == 0 {
        return C64::new(1.0, 0.0);
    }
    g.determinant().powi(p as i32)
}

/// Positive square root of a Hermitian positive semidefinite matrix, with
/// eigenvalues clamped from below for robustness near singular input. The
/// clamp is relative to the spectral radius so that boundary-weighted
/// integrals of the result stay bounded.
pub fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    let eig = SymmetricEigen::new(m.clone());
    let radius = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let floor = SQRT_EIG_CLAMP * radius.max(f64::MIN_POSITIVE);
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..scaled.ncols() {
        let f = C64::new(eig.eigenvalues[j].max(floor).sqrt(), 0.0);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= f;
        }
    }
    let q_adj = eig.eigenvectors.adjoint();
    scaled * q_adj
}

// ---------------------------------------------------------------------------
// Serialization: versioned textual container with exact f64 round-trip.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PolyRepContainer {
    format: String,
    version: u32,
    n: usize,
    omega: Vec<i64>,
    dim: usize,
    tensor_degree: usize,
    det_twist: i64,
    /// column-major [re, im] pairs, dim columns of length n^k
    basis_embedding: Vec<[f64; 2]>,
    weight_labels: Vec<Vec<i64>>,
    hwv_index: usize,
}

impl PolyRep {
    /// Serializes to the versioned JSON container. Round-trips exactly.
    pub fn to_json(&self) -> String {
        let container = PolyRepContainer {
            format: "polyrep".into(),
            version: 1,
            n: self.n(),
            omega: self.weight.omega().to_vec(),
            dim: self.dim,
            tensor_degree: self.tensor_degree,
            det_twist: self.det_twist,
            basis_embedding: self
                .basis_embedding
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
            weight_labels: self.weight_labels.clone(),
            hwv_index: self.hwv_index,
        };
        serde_json::to_string(&container).expect("polyrep serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<PolyRep> {
        let container: PolyRepContainer =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if container.format != "polyrep" || container.version != 1 {
            return Err(Error::Serialization(format!(
                "unsupported container {}/{}",
                container.format, container.version
            )));
        }
        let weight = HighestWeight::new(container.omega)?;
        let rows = (container.n as u128).pow(container.tensor_degree as u32) as usize;
        if container.basis_embedding.len() != rows * container.dim {
            return Err(Error::Serialization(
                "basis embedding length mismatch".into(),
            ));
        }
        let data: Vec<C64> = container
            .basis_embedding
            .iter()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        Ok(PolyRep {
            weight,
            dim: container.dim,
            tensor_degree: container.tensor_degree,
            det_twist: container.det_twist,
            basis_embedding: CMatrix::from_vec(rows, container.dim, data),
            weight_labels: container.weight_labels,
            hwv_index: container.hwv_index,
        })
    }
}

#[cfg(test)]
mod tests;
