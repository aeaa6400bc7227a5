//! Finite truncations of congruence subgroups of Sp_2n(Z).
//!
//! Elements are held in exact integer arithmetic: symplecticity and the
//! mod-N congruence are checked without tolerances. Balls are breadth-first
//! products of a fixed generator list, deduplicated on raw entry tuples
//! (+gamma and -gamma are distinct elements on purpose: the series handles
//! the group {+-I} explicitly, so the set must not conflate them).

use crate::error::{Error, Result};
use crate::symplectic::SymplecticMatrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Maximum absolute entry before enumeration aborts.
pub const ENTRY_CAP: i64 = 1_000_000;
/// Maximum number of elements before enumeration aborts.
pub const ELEMENT_CAP: usize = 1_000_000;
/// Iteration bound for the finite-order check in [`symmetrize`].
pub const ORDER_BOUND: usize = 64;

type IMatrix = DMatrix<i64>;

/// An integer symplectic matrix, exactly validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSymplectic {
    n: usize,
    m: IMatrix,
}

fn int_j(n: usize) -> IMatrix {
    let mut j = IMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        j[(r, n + r)] = 1;
        j[(n + r, r)] = -1;
    }
    j
}

impl IntSymplectic {
    pub fn new(m: IMatrix) -> Result<Self> {
        let rows = m.nrows();
        if !rows.is_multiple_of(2) || m.ncols() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: m.ncols(),
                context: "integer symplectic matrix must be square of even size".into(),
            });
        }
        let n = rows / 2;
        let j = int_j(n);
        if m.transpose() * &j * &m != j {
            return Err(Error::NotSymplectic { deviation: 1.0 });
        }
        Ok(IntSymplectic { n, m })
    }

    pub fn identity(n: usize) -> Self {
        IntSymplectic {
            n,
            m: IMatrix::identity(2 * n, 2 * n),
        }
    }

    pub fn j(n: usize) -> Self {
        IntSymplectic { n, m: int_j(n) }
    }

    /// n_S = [[I, S], [0, I]] for symmetric integer S.
    pub fn translation(s: &IMatrix) -> Result<Self> {
        if s != &s.transpose() {
            return Err(Error::NotSymmetric { deviation: 1.0 });
        }
        let n = s.nrows();
        let mut m = IMatrix::identity(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                m[(r, n + c)] = s[(r, c)];
            }
        }
        Ok(IntSymplectic { n, m })
    }

    /// [[U, 0], [0, U^{-T}]] given U and its exact inverse.
    pub fn gl_embed(u: &IMatrix, u_inv: &IMatrix) -> Result<Self> {
        let n = u.nrows();
        if u * u_inv != IMatrix::identity(n, n) {
            return Err(Error::Internal("gl_embed: u_inv is not the inverse".into()));
        }
        let mut m = IMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = u[(r, c)];
                m[(n + r, n + c)] = u_inv[(c, r)];
            }
        }
        Ok(IntSymplectic { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &IMatrix {
        &self.m
    }

    pub fn mul(&self, other: &IntSymplectic) -> IntSymplectic {
        IntSymplectic {
            n: self.n,
            m: &self.m * &other.m,
        }
    }

    pub fn negate(&self) -> IntSymplectic {
        IntSymplectic {
            n: self.n,
            m: -self.m.clone(),
        }
    }

    /// Exact blockwise symplectic inverse [[D^T, -B^T], [-C^T, A^T]].
    pub fn inverse(&self) -> IntSymplectic {
        let n = self.n;
        let mut out = IMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for s in 0..n {
                out[(r, s)] = self.m[(n + s, n + r)];
                out[(r, n + s)] = -self.m[(s, n + r)];
                out[(n + r, s)] = -self.m[(n + s, r)];
                out[(n + r, n + s)] = self.m[(s, r)];
            }
        }
        IntSymplectic { n, m: out }
    }

    /// Canonical key: the raw entry tuple in row-major order.
    pub fn key(&self) -> Vec<i64> {
        let rows = self.m.nrows();
        let mut out = Vec::with_capacity(rows * rows);
        for r in 0..rows {
            for c in 0..rows {
                out.push(self.m[(r, c)]);
            }
        }
        out
    }

    pub fn key_string(&self) -> String {
        let parts: Vec<String> = self.key().iter().map(|v| v.to_string()).collect();
        parts.join(",")
    }

    pub fn max_abs_entry(&self) -> i64 {
        self.m.iter().map(|&v| v.abs()).max().unwrap_or(0)
    }

    /// True when the matrix is congruent to the identity mod N.
    pub fn is_congruent_to_identity(&self, modulus: u64) -> bool {
        let n2 = self.m.nrows();
        let modulus = modulus as i64;
        for r in 0..n2 {
            for c in 0..n2 {
                let target = i64::from(r == c);
                if (self.m[(r, c)] - target).rem_euclid(modulus) != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Embedding into the real symplectic group.
    pub fn to_real(&self) -> SymplecticMatrix {
        let m = self.m.map(|v| v as f64);
        SymplecticMatrix::new(m).expect("integer symplectic embeds exactly")
    }
}

/// Standard generator list for Sp_2n(Z), closed under inverse: J and its
/// inverse, the symmetric translations over the basis of integer symmetric
/// matrices, and (for n >= 2) the GL_n(Z) transvection embeddings.
pub fn generators(n: usize) -> Vec<IntSymplectic> {
    let mut out = Vec::new();
    let j = IntSymplectic::j(n);
    out.push(j.clone());
    out.push(j.inverse());
    for r in 0..n {
        for s in r..n {
            let mut basis = IMatrix::zeros(n, n);
            basis[(r, s)] = 1;
            basis[(s, r)] = 1;
            let t = IntSymplectic::translation(&basis).expect("basis matrix is symmetric");
            out.push(t.inverse());
            out.push(t);
        }
    }
    for r in 0..n {
        for s in 0..n {
            if r == s {
                continue;
            }
            let mut u = IMatrix::identity(n, n);
            u[(r, s)] = 1;
            let mut u_inv = IMatrix::identity(n, n);
            u_inv[(r, s)] = -1;
            let e = IntSymplectic::gl_embed(&u, &u_inv).expect("transvection inverse is exact");
            out.push(e.inverse());
            out.push(e);
        }
    }
    out
}

/// A finite, deduplicated set of integer symplectic matrices congruent to
/// the identity mod `level`, with generation metadata. Immutable once built.
#[derive(Debug, Clone)]
pub struct GroupElementSet {
    n: usize,
    level: u64,
    elements: Vec<IntSymplectic>,
    word_lengths: Vec<u32>,
    index: HashMap<Vec<i64>, usize>,
    generator_set_id: String,
    word_length_bound: u32,
    closure_flags: Vec<(String, bool)>,
}

impl GroupElementSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[IntSymplectic] {
        &self.elements
    }

    pub fn word_lengths(&self) -> &[u32] {
        &self.word_lengths
    }

    pub fn generator_set_id(&self) -> &str {
        &self.generator_set_id
    }

    pub fn word_length_bound(&self) -> u32 {
        self.word_length_bound
    }

    pub fn closure_flags(&self) -> &[(String, bool)] {
        &self.closure_flags
    }

    pub fn contains(&self, g: &IntSymplectic) -> bool {
        self.index.contains_key(&g.key())
    }

    fn from_parts(
        n: usize,
        level: u64,
        pairs: Vec<(IntSymplectic, u32)>,
        generator_set_id: String,
        word_length_bound: u32,
        closure_flags: Vec<(String, bool)>,
    ) -> Result<Self> {
        let mut elements = Vec::with_capacity(pairs.len());
        let mut word_lengths = Vec::with_capacity(pairs.len());
        let mut index = HashMap::with_capacity(pairs.len());
        for (g, w) in pairs {
            let key = g.key();
            if index.insert(key, elements.len()).is_some() {
                return Err(Error::Internal("duplicate element in set".into()));
            }
            elements.push(g);
            word_lengths.push(w);
        }
        Ok(GroupElementSet {
            n,
            level,
            elements,
            word_lengths,
            index,
            generator_set_id,
            word_length_bound,
            closure_flags,
        })
    }
}

/// Breadth-first ball of word length at most `max_length` over `gens`,
/// deduplicated, then filtered by the mod-N congruence. Deterministic
/// output order (discovery order).
pub fn enumerate_ball(
    n: usize,
    gens: &[IntSymplectic],
    max_length: u32,
    level: u64,
) -> Result<GroupElementSet> {
    if level == 0 {
        return Err(Error::Precondition("level must be at least 1".into()));
    }
    let mut discovered: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut ball: Vec<(IntSymplectic, u32)> = Vec::new();
    let identity = IntSymplectic::identity(n);
    discovered.insert(identity.key(), 0);
    ball.push((identity, 0));
    let mut frontier: Vec<usize> = vec![0];
    for length in 1..=max_length {
        let mut next_frontier = Vec::new();
        for &idx in &frontier {
            let base = ball[idx].0.clone();
            for g in gens {
                let product = base.mul(g);
                if product.max_abs_entry() > ENTRY_CAP {
                    return Err(Error::ResourceCap(format!(
                        "entry size exceeded {ENTRY_CAP} at word length {length}"
                    )));
                }
                let key = product.key();
                if discovered.contains_key(&key) {
                    continue;
                }
                if ball.len() >= ELEMENT_CAP {
                    return Err(Error::ResourceCap(format!(
                        "element count exceeded {ELEMENT_CAP} at word length {length}"
                    )));
                }
                discovered.insert(key, ball.len());
                next_frontier.push(ball.len());
                ball.push((product, length));
            }
        }
        frontier = next_frontier;
    }
    let filtered: Vec<(IntSymplectic, u32)> = ball
        .into_iter()
        .filter(|(g, _)| g.is_congruent_to_identity(level))
        .collect();
    GroupElementSet::from_parts(
        n,
        level,
        filtered,
        format!("sp{}z-standard", 2 * n),
        max_length,
        Vec::new(),
    )
}

/// Right-closure of the set under the cyclic group generated by `gamma`.
///
/// `gamma` must have finite order modulo +-I (checked by iterating powers);
/// the closure uses the full matrix cyclic group, so the result satisfies
/// S' gamma = S' exactly. Elements added by closure need not satisfy the
/// original congruence, so the level of the result drops to 1 unless gamma
/// is itself congruent to the identity.
pub fn symmetrize(set: &GroupElementSet, gamma: &IntSymplectic) -> Result<GroupElementSet> {
    if gamma.n() != set.n() {
        return Err(Error::DimensionMismatch {
            expected: set.n(),
            got: gamma.n(),
            context: "symmetrize".into(),
        });
    }
    // powers of gamma until the identity; the order mod +-I must show up
    // within ORDER_BOUND, so the matrix order is at most 2 * ORDER_BOUND
    let identity = IntSymplectic::identity(set.n());
    let mut powers = vec![identity.clone()];
    let mut current = gamma.clone();
    for _ in 0..2 * ORDER_BOUND {
        if current == identity {
            break;
        }
        powers.push(current.clone());
        current = current.mul(gamma);
    }
    if current != identity {
        return Err(Error::OrderBoundExceeded { bound: ORDER_BOUND });
    }

    let mut pairs: Vec<(IntSymplectic, u32)> = Vec::new();
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    for (element, &length) in set.elements().iter().zip(set.word_lengths()) {
        for power in &powers {
            let product = element.mul(power);
            if product.max_abs_entry() > ENTRY_CAP {
                return Err(Error::ResourceCap("entry size exceeded in closure".into()));
            }
            let key = product.key();
            if seen.contains_key(&key) {
                continue;
            }
            if pairs.len() >= ELEMENT_CAP {
                return Err(Error::ResourceCap("element count exceeded in closure".into()));
            }
            seen.insert(key, ());
            // translates inherit the shell of their source element
            pairs.push((product, length));
        }
    }

    let level = if gamma.is_congruent_to_identity(set.level()) {
        set.level()
    } else {
        1
    };
    let mut closure_flags = set.closure_flags().to_vec();
    closure_flags.push((gamma.key_string(), true));
    let result = GroupElementSet::from_parts(
        set.n(),
        level,
        pairs,
        set.generator_set_id().to_string(),
        set.word_length_bound(),
        closure_flags,
    )?;
    // contractual: right translation by gamma permutes the result
    for element in result.elements() {
        if !result.contains(&element.mul(gamma)) {
            return Err(Error::Internal("closure failed to stabilize".into()));
        }
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// JSON import/export
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GroupSetContainer {
    format: String,
    version: u32,
    n: usize,
    level: u64,
    word_length_bound: u32,
    generator_set_id: String,
    closure_flags: Vec<(String, bool)>,
    elements: Vec<GroupSetElement>,
}

#[derive(Serialize, Deserialize)]
struct GroupSetElement {
    word_length: u32,
    rows: Vec<Vec<i64>>,
}

impl GroupElementSet {
    pub fn to_json(&self) -> String {
        let elements = self
            .elements
            .iter()
            .zip(&self.word_lengths)
            .map(|(g, &w)| {
                let size = 2 * self.n;
                let rows = (0..size)
                    .map(|r| (0..size).map(|c| g.matrix()[(r, c)]).collect())
                    .collect();
                GroupSetElement {
                    word_length: w,
                    rows,
                }
            })
            .collect();
        let container = GroupSetContainer {
            format: "groupset".into(),
            version: 1,
            n: self.n,
            level: self.level,
            word_length_bound: self.word_length_bound,
            generator_set_id: self.generator_set_id.clone(),
            closure_flags: self.closure_flags.clone(),
            elements,
        };
        serde_json::to_string(&container).expect("group set serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<GroupElementSet> {
        let container: GroupSetContainer =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if container.format != "groupset" || container.version != 1 {
            return Err(Error::Serialization(format!(
                "unsupported container {}/{}",
                container.format, container.version
            )));
        }
        let size = 2 * container.n;
        let mut pairs = Vec::with_capacity(container.elements.len());
        for element in &container.elements {
            if element.rows.len() != size || element.rows.iter().any(|r| r.len() != size) {
                return Err(Error::Serialization("element has wrong shape".into()));
            }
            let m = IMatrix::from_fn(size, size, |r, c| element.rows[r][c]);
            let g = IntSymplectic::new(m)?;
            if !g.is_congruent_to_identity(container.level) {
                return Err(Error::Serialization(
                    "element violates the congruence".into(),
                ));
            }
            pairs.push((g, element.word_length));
        }
        GroupElementSet::from_parts(
            container.n,
            container.level,
            pairs,
            container.generator_set_id,
            container.word_length_bound,
            container.closure_flags,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_exactly_symplectic_and_inverse_closed() {
        for n in 1..=3 {
            let gens = generators(n);
            assert!(gens.iter().any(|g| g == &IntSymplectic::j(n)));
            for g in &gens {
                // constructor re-validation is the exact symplectic check
                IntSymplectic::new(g.matrix().clone()).unwrap();
                assert!(
                    gens.contains(&g.inverse()),
                    "generator list not closed under inverse at n = {n}"
                );
            }
        }
    }

    #[test]
    fn sl2_ball_of_length_one() {
        let gens = generators(1);
        let ball = enumerate_ball(1, &gens, 1, 1).unwrap();
        assert_eq!(ball.len(), 5, "expected identity, S, S^-1, T, T^-1");
        assert!(ball.contains(&IntSymplectic::identity(1)));
        assert!(ball.contains(&IntSymplectic::j(1)));
        assert!(ball.contains(&IntSymplectic::j(1).inverse()));
        let t = IntSymplectic::translation(&IMatrix::from_element(1, 1, 1)).unwrap();
        assert!(ball.contains(&t));
        assert!(ball.contains(&t.inverse()));
    }

    #[test]
    fn empty_word_gives_identity() {
        let gens = generators(2);
        let ball = enumerate_ball(2, &gens, 0, 1).unwrap();
        assert_eq!(ball.len(), 1);
        assert!(ball.contains(&IntSymplectic::identity(2)));
    }

    #[test]
    fn congruence_filter_holds() {
        let gens = generators(1);
        let ball = enumerate_ball(1, &gens, 6, 2).unwrap();
        assert!(ball.len() > 1, "level-2 ball should be nontrivial at L = 6");
        for g in ball.elements() {
            assert!(g.is_congruent_to_identity(2));
        }
    }

    #[test]
    fn ball_monotone_in_word_length() {
        let gens = generators(1);
        let small = enumerate_ball(1, &gens, 3, 1).unwrap();
        let large = enumerate_ball(1, &gens, 4, 1).unwrap();
        assert!(small.len() <= large.len());
        for g in small.elements() {
            assert!(large.contains(g));
        }
    }

    #[test]
    fn keys_distinguish_signs() {
        let j = IntSymplectic::j(1);
        assert_ne!(j.key(), j.negate().key());
        let gens = generators(1);
        let ball = enumerate_ball(1, &gens, 2, 1).unwrap();
        // S^2 = -I is present and distinct from I
        assert!(ball.contains(&IntSymplectic::identity(1).negate()));
    }

    #[test]
    fn dedup_soundness() {
        let gens = generators(2);
        let ball = enumerate_ball(2, &gens, 2, 1).unwrap();
        for (i, a) in ball.elements().iter().enumerate() {
            for b in ball.elements().iter().skip(i + 1) {
                assert_ne!(a.key(), b.key());
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn symmetrize_identity_and_idempotence() {
        let gens = generators(1);
        let ball = enumerate_ball(1, &gens, 2, 1).unwrap();
        let same = symmetrize(&ball, &IntSymplectic::identity(1)).unwrap();
        assert_eq!(same.len(), ball.len());

        let j = IntSymplectic::j(1);
        let once = symmetrize(&ball, &j).unwrap();
        let twice = symmetrize(&once, &j).unwrap();
        assert_eq!(once.len(), twice.len());
        for g in once.elements() {
            assert!(twice.contains(g));
        }
    }

    #[test]
    fn symmetrize_coset_closure_bound() {
        let gens = generators(1);
        let ball = enumerate_ball(1, &gens, 2, 1).unwrap();
        // first close under -I so that the J-closure is a two-coset union
        let minus = IntSymplectic::identity(1).negate();
        let pm_closed = symmetrize(&ball, &minus).unwrap();
        let j = IntSymplectic::j(1);
        let closed = symmetrize(&pm_closed, &j).unwrap();
        assert!(closed.len() <= 2 * pm_closed.len());
        // exact right-invariance
        for g in closed.elements() {
            assert!(closed.contains(&g.mul(&j)));
        }
    }

    #[test]
    fn symmetrize_rejects_infinite_order() {
        let gens = generators(1);
        let ball = enumerate_ball(1, &gens, 1, 1).unwrap();
        let t = IntSymplectic::translation(&IMatrix::from_element(1, 1, 1)).unwrap();
        assert!(matches!(
            symmetrize(&ball, &t),
            Err(Error::OrderBoundExceeded { .. })
        ));
    }

    #[test]
    fn json_roundtrip() {
        let gens = generators(1);
        let ball = enumerate_ball(1, &gens, 4, 2).unwrap();
        let text = ball.to_json();
        let back = GroupElementSet::from_json(&text).unwrap();
        assert_eq!(back.len(), ball.len());
        assert_eq!(back.level(), ball.level());
        for (a, b) in ball.elements().iter().zip(back.elements()) {
            assert_eq!(a, b);
        }
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn level_one_after_noncongruent_closure() {
        let gens = generators(1);
        let ball = enumerate_ball(1, &gens, 4, 2).unwrap();
        let j = IntSymplectic::j(1);
        let closed = symmetrize(&ball, &j).unwrap();
        assert_eq!(closed.level(), 1);
    }
}
