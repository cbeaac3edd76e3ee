//! Metric Kwapień–Schütt inequalities on hypercube matrix spaces.
//!
//! The crate verifies and certifies the metric KS inequality on
//! `M_n(F_2)` together with the sharp `L_1`-distortion bounds it yields
//! for Pythagorean powers of hypercubes:
//!
//! - [`space`]: bit-packed points of `M_n(F_2)`, row/selector flips, and the
//!   `l_q^n(l_p^n)` distance kernel.
//! - [`fourier`]: Walsh–Hadamard transform and the two spectral energies
//!   behind the inequality.
//! - [`ks`]: both sides of every inequality variant, sharp constants,
//!   extremal witnesses, counterexamples, and the exhaustive isoperimetric
//!   verifier.
//! - [`cutcone`]: exact/float cut-cone linear programming deciding
//!   `l_1`-embeddability and computing exact minimal `L_1` distortion with
//!   primal and dual certificates.
//! - [`bounds`]: the Poincaré lower-bound engine, Hölder sandwich, coarse
//!   and uniform obstruction arithmetic, and the `p > 2` counterexample.
//! - [`embed`]: Schoenberg snowflake embeddings (classical scaling) and the
//!   finite-scale `F_p` map into `l_p`.
//! - [`repro`]: the verification driver that runs the full acceptance
//!   checklist and emits the distortion table.

pub mod bounds;
pub mod cutcone;
pub mod embed;
pub mod error;
pub mod fourier;
pub mod ks;
pub mod metric;
pub mod repro;
pub mod space;

pub use error::{Error, Result};

/// The seeded RNG used by every randomized suite in this crate.
pub fn seeded_rng(seed: u64) -> impl rand::Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
