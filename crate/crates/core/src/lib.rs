//! Numerical core for vector-valued Siegel cusp forms.
//!
//! The crate is organized around five subsystems:
//!
//! * [`glrep`]: irreducible polynomial representations of GL_n(C) built from
//!   a highest weight, with evaluation, unitary restriction, weights, and
//!   positive square roots.
//! * [`symplectic`]: Sp_2n(R), the Siegel upper half-space H_n and the
//!   bounded domain D_n, Moebius actions, NAK/KAK factorizations, and
//!   measure-aware random sampling.
//! * [`autoforms`]: the seed functions p_{mu,v} and f_{mu,v}, the slash
//!   action, classical lifts, truncated Poincare series, Fourier
//!   coefficients, Petersson products (n = 1), and matrix coefficients.
//! * [`enumeration`]: finite truncations of congruence subgroups of
//!   Sp_2n(Z) for partial sums and exact invariance tests.
//! * [`nonvanishing`]: the concentration inequality pipeline: M(N),
//!   phi integrands, threshold search N0, and the KAK cross-check.

pub mod autoforms;
pub mod enumeration;
pub mod error;
pub mod estimate;
pub mod glrep;
pub mod nonvanishing;
pub mod selftest;
pub mod symplectic;

pub use error::{Error, Result};
pub use estimate::{ComplexEstimate, IntegralEstimate, McConfig};

// re-exported so that downstream crates share the same matrix types
pub use nalgebra;

/// Scalar type used throughout the numerical core.
pub type Real = f64;
/// Complex scalar type used throughout the numerical core.
pub type C64 = num_complex::Complex64;

/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dynamically sized complex vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dynamically sized real matrix.
pub type RMatrix = nalgebra::DMatrix<Real>;
/// Dynamically sized real vector.
pub type RVector = nalgebra::DVector<Real>;

/// Hermitian inner product, linear in the first slot: sum_i a_i conj(b_i).
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    b.dotc(a)
}

/// Deterministic stream splitter for per-worker / per-context generators.
///
/// Mixes a base seed with arbitrary context words (worker index, level N,
/// escalation round, ...) so that parallel samplers draw from disjoint,
/// reproducible streams.
pub fn derive_seed(base: u64, context: &[u64]) -> u64 {
    // splitmix64 over the concatenated words
    let mut state = base ^ 0x9e37_79b9_7f4a_7c15;
    for &w in context {
        state = state.wrapping_add(w).wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        state = z ^ (z >> 31);
    }
    state
}
