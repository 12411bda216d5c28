//! Size of the program space: irreducible polynomial count times the number
//! of binary tree shapes with a bounded node count.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::IcError;
use crate::gf2::count_irreducible;

/// Largest node cap summed exactly. `C_m` has about `0.6 m` decimal digits,
/// so the sum up to this cap is already a ~160 kB integer.
pub const MAX_EXACT_CAP: u64 = 1 << 18;

/// Reported program-space size for depth 40 and degree 5.
pub const HEADLINE_COUNT: f64 = 1.9721e26;

/// `sum_{i=0..=cap} C_i` with Catalan numbers `C_i`.
pub fn catalan_prefix_sum(cap: u64) -> Result<BigUint, IcError> {
    if cap > MAX_EXACT_CAP {
        return Err(IcError::TooLarge(cap));
    }
    let mut c = BigUint::one();
    let mut sum = BigUint::one();
    for i in 0..cap {
        // C_{i+1} = C_i * (4i + 2) / (i + 2), exact at every step.
        c = c * (4 * i + 2) / (i + 2);
        sum += &c;
    }
    Ok(sum)
}

/// `M_d * sum_{i=0..=min(2^n, cap)} C_i`; `cap` defaults to `2^n`.
pub fn count_programs(d: u64, n: u32, cap: Option<u64>) -> Result<BigUint, IcError> {
    if n == 0 {
        return Err(IcError::InvalidParameter("depth must be >= 1"));
    }
    let full = if n >= 64 { u64::MAX } else { 1u64 << n };
    let m = cap.map_or(full, |c| c.min(full));
    Ok(count_irreducible(d)? * catalan_prefix_sum(m)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub degree: u64,
    pub depth: u32,
    pub irreducible_count: u64,
    /// Lower bound on `log10 D` with the full `2^n` node cap, from the last
    /// Catalan term alone.
    pub log10_lower_bound: f64,
    pub headline: f64,
    /// Node cap whose exact count is closest to the headline in log scale.
    pub nearest_cap: u64,
    pub nearest_count: f64,
    /// The unsummed necklace exponent `2^d` gives zero for prime `d`.
    pub uncorrected_necklace_count: i64,
}

/// Compares the reported headline with what the counting formula gives.
pub fn discrepancy_report(d: u64, n: u32) -> Result<DiscrepancyReport, IcError> {
    let m_d = count_irreducible(d)?;
    let m_d_f = m_d.to_f64().unwrap_or(f64::INFINITY);
    let terms = 2f64.powi(n as i32);
    // log10 C_m >= m log10 4 - 1.5 log10 m - log10 sqrt(pi) - small, for m >= 1.
    let log_c = terms * 4f64.log10() - 1.5 * terms.log10() - 0.5 * std::f64::consts::PI.log10() - 0.1;
    let log10_lower_bound = m_d_f.log10() + log_c;

    let target = HEADLINE_COUNT.log10();
    let mut c = BigUint::one();
    let mut sum = BigUint::one();
    let mut best = (0u64, (m_d_f * 1.0).log10());
    for i in 0..=400u64 {
        let v = (&m_d * &sum).to_f64().unwrap_or(f64::INFINITY).log10();
        if (v - target).abs() < (best.1 - target).abs() {
            best = (i, v);
        }
        if v > target + 2.0 {
            break;
        }
        c = c * (4 * i + 2) / (i + 2);
        sum += &c;
    }

    let uncorrected = uncorrected_necklace(d);
    Ok(DiscrepancyReport {
        degree: d,
        depth: n,
        irreducible_count: m_d.to_u64().unwrap_or(u64::MAX),
        log10_lower_bound,
        headline: HEADLINE_COUNT,
        nearest_cap: best.0,
        nearest_count: 10f64.powf(best.1),
        uncorrected_necklace_count: uncorrected,
    })
}

/// `(1/d) sum_{k|d} mu(k) 2^d`, i.e. `2^d/d * sum_{k|d} mu(k)`, which is zero
/// for every `d > 1`.
fn uncorrected_necklace(d: u64) -> i64 {
    let s: i64 = (1..=d).filter(|k| d % k == 0).map(|k| i64::from(crate::gf2::mobius(k))).sum();
    if s.is_zero() || d >= 62 {
        return 0;
    }
    s * (1i64 << d) / d as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalan_convolution(n: usize) -> Vec<BigUint> {
        let mut c = vec![BigUint::one()];
        for m in 0..n {
            let next = (0..=m).map(|i| &c[i] * &c[m - i]).sum();
            c.push(next);
        }
        c
    }

    #[test]
    fn prefix_sums_match_convolution() {
        let c = catalan_convolution(60);
        let mut acc = BigUint::zero();
        for (m, cm) in c.iter().enumerate() {
            acc += cm;
            assert_eq!(catalan_prefix_sum(m as u64).unwrap(), acc);
        }
        assert_eq!(catalan_prefix_sum(3).unwrap(), BigUint::from(9u32));
    }

    #[test]
    fn quadratic_count_is_tree_count() {
        for n in 1..=8 {
            assert_eq!(count_programs(2, n, None).unwrap(), catalan_prefix_sum(1 << n).unwrap());
            assert_eq!(
                count_programs(1, n, None).unwrap(),
                catalan_prefix_sum(1 << n).unwrap() * 2u32
            );
        }
    }

    #[test]
    fn cap_limits() {
        assert_eq!(count_programs(5, 10, Some(3)).unwrap(), BigUint::from(54u32));
        assert!(matches!(count_programs(5, 40, None), Err(IcError::TooLarge(_))));
    }

    #[test]
    fn headline_not_reproduced() {
        let r = discrepancy_report(5, 40).unwrap();
        assert_eq!(r.irreducible_count, 6);
        assert!(r.log10_lower_bound > 1e11);
        let rel = (r.nearest_count - HEADLINE_COUNT).abs() / HEADLINE_COUNT;
        assert!(rel > 1e-3, "nearest cap {} reproduces the headline", r.nearest_cap);
        assert_eq!(r.uncorrected_necklace_count, 0);
    }
}
