//! Simulator for power-validated software attestation.
//!
//! * [`gf2`]: polynomials over GF(2) and irreducible generation.
//! * [`icgen`]: randomized integrity-checking programs and their interpreter.
//! * [`power`]: current-trace synthesis, power-state extraction and the
//!   protocol language check.
//! * [`timing`]: execution and network time models, detection rules and the
//!   parameter search.
//! * [`protocol`]: verifier and prover over a simulated machine.
//! * [`game`]: Monte Carlo attacker-verifier game.

pub mod game;
pub mod gf2;
pub mod icgen;
pub mod power;
pub mod protocol;
pub mod timing;

/// SplitMix64 finalizer; used wherever a cheap keyed hash of an integer is
/// needed (seed derivation, tree node randomness).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
