//! Ben-Or against trial division, and the necklace count against
//! enumeration.

use poweralert::gf2::{count_irreducible, is_irreducible, Gf2Poly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn deg(p: u64) -> u32 {
    63 - p.leading_zeros()
}

fn rem(mut a: u64, b: u64) -> u64 {
    let db = deg(b);
    while a != 0 && deg(a) >= db {
        a ^= b << (deg(a) - db);
    }
    a
}

/// Irreducible iff no polynomial of degree `1..=deg/2` divides it.
fn trial_division(p: u64) -> bool {
    let d = deg(p);
    for q_deg in 1..=d / 2 {
        for q in (1u64 << q_deg)..(1u64 << (q_deg + 1)) {
            if rem(p, q) == 0 {
                return false;
            }
        }
    }
    true
}

#[test]
fn exhaustive_up_to_degree_12() {
    for d in 1..=12u32 {
        let mut count = 0u64;
        for p in (1u64 << d)..(1u64 << (d + 1)) {
            let oracle = trial_division(p);
            assert_eq!(is_irreducible(&Gf2Poly::from_u64(p)).unwrap(), oracle, "{p:#x}");
            count += u64::from(oracle);
        }
        assert_eq!(count_irreducible(u64::from(d)).unwrap(), count.into(), "degree {d}");
    }
}

#[test]
fn random_up_to_degree_16() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..10_000 {
        let d = rng.gen_range(1..=16u32);
        let p = (1u64 << d) | (rng.gen::<u64>() & ((1u64 << d) - 1));
        assert_eq!(is_irreducible(&Gf2Poly::from_u64(p)).unwrap(), trial_division(p), "{p:#x}");
    }
}

#[test]
fn small_counts() {
    let want = [2u32, 1, 2, 3, 6];
    for (d, w) in (1..=5).zip(want) {
        assert_eq!(count_irreducible(d).unwrap(), w.into());
    }
}
