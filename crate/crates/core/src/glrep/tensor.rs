//! Mode-wise operator application on k-fold tensor powers of C^n.
//!
//! A vector in (C^n)^{tensor k} is stored flat with row-major multi-index
//! order: the multi-index (i_1, ..., i_k) with i_j in {0, ..., n-1} maps to
//! i_1 n^{k-1} + i_2 n^{k-2} + ... + i_k.

use crate::{CMatrix, CVector, C64};

/// Flat index of a multi-index.
pub fn flat_index(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Applies g (n x n) to tensor mode `mode` of a flat tensor of shape [n; k].
fn apply_mode(n: usize, k: usize, g: &CMatrix, v: &[C64], mode: usize, out: &mut [C64]) {
    // stride of the mode axis and size of the trailing block
    let inner: usize = n.pow((k - 1 - mode) as u32);
    let outer: usize = n.pow(mode as u32);
    for slot in out.iter_mut() {
        *slot = C64::new(0.0, 0.0);
    }
    for o in 0..outer {
        let base = o * n * inner;
        for new_i in 0..n {
            let out_base = base + new_i * inner;
            for old_i in 0..n {
                let coeff = g[(new_i, old_i)];
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                let in_base = base + old_i * inner;
                for t in 0..inner {
                    out[out_base + t] += coeff * v[in_base + t];
                }
            }
        }
    }
}

/// Applies the k-fold tensor power of g to a flat tensor vector.
pub fn tensor_power_apply(n: usize, k: usize, g: &CMatrix, v: &CVector) -> CVector {
    assert_eq!(v.len(), n.pow(k as u32), "tensor length mismatch");
    if k == 0 {
        return v.clone();
    }
    let mut cur: Vec<C64> = v.iter().copied().collect();
    let mut next = vec![C64::new(0.0, 0.0); cur.len()];
    for mode in 0..k {
        apply_mode(n, k, g, &cur, mode, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    CVector::from_vec(cur)
}

/// Applies the k-fold tensor power of g to every column of a flat matrix.
pub fn tensor_power_apply_matrix(n: usize, k: usize, g: &CMatrix, m: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        let col: CVector = m.column(j).clone_owned();
        out.set_column(j, &tensor_power_apply(n, k, g, &col));
    }
    out
}
