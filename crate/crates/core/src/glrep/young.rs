//! Young-symmetrizer machinery on the k-fold tensor power of C^n.
//!
//! A shape is a partition lambda = (lambda_1 >= lambda_2 >= ... >= 0) with
//! |lambda| = k cells. Cells are numbered in reading order, row by row. The
//! symmetrizer applied here is the column-antisymmetrization of the
//! row-symmetrization: c = b a with a the sum over the row group and b the
//! signed sum over the column group. Its image in (C^n)^{tensor k} is the
//! irreducible GL_n(C)-module with highest weight lambda.

use std::collections::HashMap;

/// Partition with trailing zeros stripped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    pub rows: Vec<usize>,
}

impl Shape {
    pub fn new(rows: Vec<usize>) -> Self {
        let mut rows = rows;
        while rows.last() == Some(&0) {
            rows.pop();
        }
        debug_assert!(rows.windows(2).all(|w| w[0] >= w[1]));
        Shape { rows }
    }

    pub fn size(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Cell positions of row r, in reading order.
    fn row_positions(&self) -> Vec<Vec<usize>> {
        let mut pos = 0;
        self.rows
            .iter()
            .map(|&len| {
                let v: Vec<usize> = (pos..pos + len).collect();
                pos += len;
                v
            })
            .collect()
    }

    /// Cell positions of column c, top to bottom.
    fn column_positions(&self) -> Vec<Vec<usize>> {
        if self.rows.is_empty() {
            return Vec::new();
        }
        let ncols = self.rows[0];
        let row_starts: Vec<usize> = self
            .rows
            .iter()
            .scan(0, |acc, &len| {
                let s = *acc;
                *acc += len;
                Some(s)
            })
            .collect();
        (0..ncols)
            .map(|c| {
                self.rows
                    .iter()
                    .enumerate()
                    .filter(|&(_, &len)| c < len)
                    .map(|(r, _)| row_starts[r] + c)
                    .collect()
            })
            .collect()
    }
}

/// All permutations of `positions` as maps on 0..k fixing everything else,
/// together with their signs. Generated by insertion so that the sign is the
/// parity of the insertion transpositions.
fn block_permutations(k: usize, positions: &[usize]) -> Vec<(Vec<usize>, i64)> {
    let mut arrangements: Vec<(Vec<usize>, i64)> = vec![(Vec::new(), 1)];
    for &p in positions {
        let mut next = Vec::with_capacity(arrangements.len() * (arrangements[0].0.len() + 1));
        for (prefix, sign) in &arrangements {
            for slot in 0..=prefix.len() {
                let mut arr = prefix.clone();
                arr.insert(slot, p);
                // inserting at distance d from the end costs d transpositions
                let d = (prefix.len() - slot) as i64;
                let s = if d % 2 == 0 { *sign } else { -sign };
                next.push((arr, s));
            }
        }
        arrangements = next;
    }
    arrangements
        .into_iter()
        .map(|(arrangement, sign)| {
            let mut perm: Vec<usize> = (0..k).collect();
            for (slot, &src) in positions.iter().zip(arrangement.iter()) {
                perm[*slot] = src;
            }
            (perm, sign)
        })
        .collect()
}

/// Cartesian product of per-block permutations; signs multiply. Blocks are
/// disjoint position sets, so merging is plain overwriting.
fn product_group(k: usize, blocks: &[Vec<usize>]) -> Vec<(Vec<usize>, i64)> {
    let mut acc: Vec<(Vec<usize>, i64)> = vec![((0..k).collect(), 1)];
    for block in blocks {
        let perms = block_permutations(k, block);
        let mut next = Vec::with_capacity(acc.len() * perms.len());
        for (base, base_sign) in &acc {
            for (perm, sign) in &perms {
                let mut merged = base.clone();
                for &p in block.iter() {
                    merged[p] = perm[p];
                }
                next.push((merged, base_sign * sign));
            }
        }
        acc = next;
    }
    acc
}

/// The symmetrizer attached to a shape: row group (unsigned) and column
/// group (signed) as explicit permutation lists.
pub struct Symmetrizer {
    pub k: usize,
    pub row_perms: Vec<Vec<usize>>,
    pub col_perms: Vec<(Vec<usize>, i64)>,
}

impl Symmetrizer {
    pub fn new(shape: &Shape) -> Self {
        let k = shape.size();
        let row_perms = product_group(k, &shape.row_positions())
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        let col_perms = product_group(k, &shape.column_positions());
        Symmetrizer {
            k,
            row_perms,
            col_perms,
        }
    }

    /// Applies the symmetrizer to the basis tensor labelled by `filling`
    /// (value in 0..n per cell). Returns the image as a sparse map from
    /// flat tensor indices to integer coefficients.
    pub fn apply_to_filling(&self, n: usize, filling: &[usize]) -> HashMap<usize, i64> {
        let mut out: HashMap<usize, i64> = HashMap::new();
        let mut permuted = vec![0usize; self.k];
        for (q, sign) in &self.col_perms {
            for p in &self.row_perms {
                // T'(pos) = T(p(q(pos))) realizes the signed double sum
                for pos in 0..self.k {
                    permuted[pos] = filling[p[q[pos]]];
                }
                let idx = super::tensor::flat_index(n, &permuted);
                *out.entry(idx).or_insert(0) += sign;
            }
        }
        out.retain(|_, c| *c != 0);
        out
    }
}

/// All fillings of `shape` with entries in 0..n, weakly increasing along
/// each row, with prescribed content (content[v] = multiplicity of value v).
/// Row-equivalent fillings have equal symmetrizer images, so these span the
/// content block of the image.
pub fn row_sorted_fillings(shape: &Shape, n: usize, content: &[usize]) -> Vec<Vec<usize>> {
    let mut results = Vec::new();
    let mut remaining = content.to_vec();
    let mut current: Vec<Vec<usize>> = Vec::new();

    fn fill_row(
        row_len: usize,
        n: usize,
        min_value: usize,
        remaining: &mut Vec<usize>,
        row: &mut Vec<usize>,
        rows_done: &mut dyn FnMut(&mut Vec<usize>, &mut Vec<usize>),
    ) {
        if row.len() == row_len {
            rows_done(remaining, row);
            return;
        }
        for v in min_value..n {
            if remaining[v] == 0 {
                continue;
            }
            remaining[v] -= 1;
            row.push(v);
            fill_row(row_len, n, v, remaining, row, rows_done);
            row.pop();
            remaining[v] += 1;
        }
    }

    fn recurse(
        shape: &Shape,
        n: usize,
        row_idx: usize,
        remaining: &mut Vec<usize>,
        current: &mut Vec<Vec<usize>>,
        results: &mut Vec<Vec<usize>>,
    ) {
        if row_idx == shape.rows.len() {
            let flat: Vec<usize> = current.iter().flatten().copied().collect();
            results.push(flat);
            return;
        }
        let row_len = shape.rows[row_idx];
        let mut row = Vec::with_capacity(row_len);
        fill_row(row_len, n, 0, remaining, &mut row, &mut |rem, row| {
            current.push(row.clone());
            recurse(shape, n, row_idx + 1, rem, current, results);
            current.pop();
        });
    }

    recurse(shape, n, 0, &mut remaining, &mut current, &mut results);
    results
}

/// All contents (c_0, ..., c_{n-1}) with sum k, in descending lexicographic
/// order.
pub fn all_contents(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(n: usize, pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == n - 1 {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for c in (0..=left).rev() {
            cur[pos] = c;
            rec(n, pos + 1, left - c, cur, out);
        }
    }
    if n > 0 {
        rec(n, 0, k, &mut cur, &mut out);
    }
    out
}

/// Brute-force enumeration of semistandard tableaux of the given shape with
/// entries in 1..=n, returning the content of each (count of value r at
/// index r-1). Used only as an independent oracle; the representation
/// builder never calls this.
pub fn ssyt_contents(shape: &Shape, n: usize) -> Vec<Vec<usize>> {
    let nrows = shape.rows.len();
    let mut tableau: Vec<Vec<usize>> = shape.rows.iter().map(|&l| vec![0; l]).collect();
    let mut out = Vec::new();

    fn rec(
        shape: &Shape,
        n: usize,
        r: usize,
        c: usize,
        tableau: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let nrows = shape.rows.len();
        if r == nrows {
            let mut content = vec![0usize; n];
            for row in tableau.iter() {
                for &v in row {
                    content[v] += 1;
                }
            }
            out.push(content);
            return;
        }
        let (nr, nc) = if c + 1 < shape.rows[r] {
            (r, c + 1)
        } else {
            (r + 1, 0)
        };
        let min_left = if c > 0 { tableau[r][c - 1] } else { 0 };
        let min_above = if r > 0 && c < shape.rows[r - 1] {
            tableau[r - 1][c] + 1
        } else {
            0
        };
        for v in min_left.max(min_above)..n {
            tableau[r][c] = v;
            rec(shape, n, nr, nc, tableau, out);
        }
    }

    if nrows == 0 {
        out.push(vec![0usize; n]);
        return out;
    }
    rec(shape, n, 0, 0, &mut tableau, &mut out);
    out
}
