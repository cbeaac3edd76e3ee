//! Distortion lower bounds via a generic Poincaré-inequality engine, the
//! Hölder/snowflake upper bounds, the uniform/coarse obstruction
//! arithmetic, and the `p > 2` counterexample.

use serde::{Deserialize, Serialize};

use crate::cutcone::DualWitness;
use crate::error::{Error, Result};
use crate::ks::{ks_constant, ratio_to_f64};
use crate::metric::FiniteMetricSpace;
use crate::space::{pq_norm_of_profile, PqParams};

/// A Poincaré-type pair: weighted distance atoms for the "must expand"
/// measure `mu` and the "contract" measure `nu`, a target-space constant
/// `C` and exponent `theta`. Valid input means every map `f` into the
/// target class satisfies `int ||df||^theta dmu <= C int ||df||^theta dnu`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoincarePair {
    /// `(distance, weight)` atoms of the mu measure.
    pub mu: Vec<(f64, f64)>,
    /// `(distance, weight)` atoms of the nu measure.
    pub nu: Vec<(f64, f64)>,
    pub constant: f64,
    pub theta: f64,
}

/// `(1/C) (int d^theta dmu / int d^theta dnu)^(1/theta)`: a lower bound on
/// the distortion into the target class whenever the pair is valid.
pub fn poincare_lower_bound(pair: &PoincarePair) -> Result<f64> {
    if !(pair.theta > 0.0) {
        return Err(Error::invalid_param("theta", "exponent must be positive"));
    }
    if pair.constant <= 0.0 {
        return Err(Error::invalid_param("constant", "C must be positive"));
    }
    if pair.mu.iter().chain(pair.nu.iter()).any(|&(d, w)| d < 0.0 || w < 0.0) {
        return Err(Error::invalid_param("pair", "negative distance or weight"));
    }
    let moment = |atoms: &[(f64, f64)]| -> f64 {
        atoms.iter().map(|&(d, w)| w * d.powf(pair.theta)).sum()
    };
    let mu = moment(&pair.mu);
    let nu = moment(&pair.nu);
    if nu <= 0.0 {
        return Err(Error::ZeroDenominator("nu-expectation of the Poincaré pair"));
    }
    Ok((mu / nu).powf(1.0 / pair.theta) / pair.constant)
}

/// The KS inequality as a Poincaré pair on `l_q^n(F_2^n, ||.||_p)`: `mu`
/// uniform over row-flip pairs (all at distance `n^(1/p)`), `nu` uniform
/// over selector pairs (all at distance `n^(1/q)`), with the normalized
/// sharp constant. Translation invariance collapses each measure to one
/// scalar atom, so this also serves `n` beyond the enumeration caps.
pub fn ks_pair(n: usize, params: &PqParams, theta: f64) -> Result<PoincarePair> {
    if !(theta > 0.0 && theta <= 2.0) {
        return Err(Error::invalid_param(
            "theta",
            "the KS pair is only valid for theta in (0, 2]",
        ));
    }
    let constant = ratio_to_f64(&ks_constant(n)?.normalized);
    // one row differs in all n entries
    let mut row_profile = vec![0u32; n];
    row_profile[0] = n as u32;
    let mu_d = pq_norm_of_profile(&row_profile, params);
    // every row differs in exactly one entry
    let nu_d = pq_norm_of_profile(&vec![1u32; n], params);
    Ok(PoincarePair {
        mu: vec![(mu_d, 1.0)],
        nu: vec![(nu_d, 1.0)],
        constant,
        theta,
    })
}

/// Re-imports an LP dual witness as a Poincaré pair over a space's own
/// distances (`C = 1`, `theta = 1`), so LP lower bounds re-verify through
/// the same engine as the KS bounds.
pub fn dual_witness_pair(space: &FiniteMetricSpace, witness: &DualWitness) -> PoincarePair {
    let to_atoms = |side: &[(usize, usize, f64)]| -> Vec<(f64, f64)> {
        side.iter()
            .map(|&(a, b, w)| (space.distance(a, b), w))
            .collect()
    };
    PoincarePair {
        mu: to_atoms(&witness.mu),
        nu: to_atoms(&witness.nu),
        constant: 1.0,
        theta: 1.0,
    }
}

/// Explicit constant behind the asymptotic lower bound:
/// `(1 - (1 - 2/n)^n)/2 * n^(1/p - 1/q)` for even `n`, routed through the
/// isometric `n-1` subspace for odd `n`. The coefficient is this
/// implementation's explicit rendering of an asymptotic statement.
pub fn asymptotic_lower_bound(n: usize, params: &PqParams) -> Result<f64> {
    if !(params.p < params.q) || params.p < 1.0 {
        return Err(Error::invalid_param("p,q", "need 1 <= p < q"));
    }
    let even = if n % 2 == 0 { n } else { n - 1 };
    if even < 2 {
        return Err(Error::invalid_param("n", "need n >= 2"));
    }
    let nf = even as f64;
    let coeff = (1.0 - (1.0 - 2.0 / nf).powi(even as i32)) / 2.0;
    Ok(coeff * nf.powf(1.0 / params.p - 1.0 / params.q))
}

/// Hölder/snowflake sandwich factors for `l_q^m(F_2^n, ||.||_p)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichBounds {
    /// `m^-(1/p - 1/q)`: the pointwise lower factor against the
    /// `1/p`-snowflake of the Hamming metric.
    pub lower_factor: f64,
    /// The pointwise upper factor (the snowflake dominates directly).
    pub upper_factor: f64,
    /// `min(m, n)^(1/p - 1/q)`.
    pub c1_upper_bound: f64,
}

pub fn holder_sandwich(n: usize, m: usize, params: &PqParams) -> Result<SandwichBounds> {
    if !(params.p < params.q) || params.p < 1.0 {
        return Err(Error::invalid_param("p,q", "need 1 <= p < q"));
    }
    if n == 0 || m == 0 {
        return Err(Error::invalid_param("n,m", "need positive dimensions"));
    }
    let gap = 1.0 / params.p - 1.0 / params.q;
    Ok(SandwichBounds {
        lower_factor: (m as f64).powf(-gap),
        upper_factor: 1.0,
        c1_upper_bound: (m.min(n) as f64).powf(gap),
    })
}

/// Largest violation of the pointwise sandwich
/// `H^(1/p) / m^(1/p-1/q) <= d <= H^(1/p)` over all pairs of the
/// `m`-row, `n`-column product space (`H` = total Hamming distance).
pub fn holder_sandwich_max_violation(m: usize, n: usize, params: &PqParams) -> Result<f64> {
    let bits = m * n;
    if bits > 20 {
        return Err(Error::SizeLimit {
            what: "pointwise sandwich sweep",
            requested: 1u128 << bits,
            cap: 1 << 20,
        });
    }
    let bounds = holder_sandwich(n, m, params)?;
    let count = 1usize << bits;
    let row_bits = (1u64 << n) - 1;
    let mut profile = vec![0u32; m];
    let mut worst = 0.0f64;
    for x in 0..count {
        for y in (x + 1)..count {
            let diff = (x ^ y) as u64;
            let mut h = 0u32;
            for (j, slot) in profile.iter_mut().enumerate() {
                *slot = ((diff >> (j * n)) & row_bits).count_ones();
                h += *slot;
            }
            let d = pq_norm_of_profile(&profile, params);
            let snow = (h as f64).powf(1.0 / params.p);
            worst = worst.max(d - snow * bounds.upper_factor);
            worst = worst.max(snow * bounds.lower_factor - d);
        }
    }
    Ok(worst)
}

/// The certified implication `alpha(s n) <= C beta(s sqrt(n))` between
/// uniform/coarse embedding moduli, at `p = 1`, `q = 2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulusObstruction {
    pub n: usize,
    pub scale: f64,
    /// `s * n`, the argument of the lower modulus `alpha`.
    pub lower_arg: f64,
    /// `s * sqrt(n)`, the argument of the upper modulus `beta`.
    pub upper_arg: f64,
    /// The normalized sharp constant at this `n`.
    pub constant: f64,
}

/// Scaling the KS inequality by `s` yields `alpha(s n) <= C beta(s sqrt n)`
/// for any moduli `alpha <= ||f(x)-f(y)||_1 <= beta` sandwich. Presets:
/// `s = 1/sqrt(n)` refutes coarse embeddings, `s = 1/n` uniform ones.
pub fn coarse_obstruction(n: usize, scale: f64) -> Result<ModulusObstruction> {
    if !(scale > 0.0) {
        return Err(Error::invalid_param("scale", "must be positive"));
    }
    let constant = ratio_to_f64(&ks_constant(n)?.normalized);
    let nf = n as f64;
    Ok(ModulusObstruction {
        n,
        scale,
        lower_arg: scale * nf,
        upper_arg: scale * nf.sqrt(),
        constant,
    })
}

/// Direct norm computation demonstrating that no exponent rescues the
/// inequality for `l_p`-valued maps with `p > 2`: the linear map
/// `x -> sum x_jk e_jk` into `l_p^n(l_2^n)` has row-flip differences of
/// norm `sqrt(n)` but selector differences of norm `n^(1/p)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PGrowthReport {
    pub n: usize,
    pub p: f64,
    pub theta: f64,
    /// `n^(theta/2)` from the computed row-flip norms.
    pub lhs_per_point: f64,
    /// `n^(theta/p)` from the computed selector norms.
    pub rhs_per_point: f64,
    /// `n^(theta (1/2 - 1/p))`, unbounded in `n` for `p > 2`.
    pub ratio: f64,
}

fn lp_l2_norm(rows: &[Vec<f64>], p: f64) -> f64 {
    let sum: f64 = rows
        .iter()
        .map(|row| {
            let sq: f64 = row.iter().map(|v| v * v).sum();
            sq.sqrt().powf(p)
        })
        .sum();
    sum.powf(1.0 / p)
}

pub fn p_gt_2_counterexample(n: usize, p: f64, theta: f64) -> Result<PGrowthReport> {
    if !(p > 2.0) {
        return Err(Error::invalid_param("p", "the counterexample needs p > 2"));
    }
    if n == 0 || n % 2 != 0 {
        return Err(Error::RequiresEvenSide {
            n,
            hint: "the inequality under attack is stated for even n",
        });
    }
    if !(theta > 0.0) {
        return Err(Error::invalid_param("theta", "exponent must be positive"));
    }
    // row-flip difference images: the j-th has row j all ones
    let mut lhs_acc = 0.0;
    for j in 0..n {
        let mut rows = vec![vec![0.0; n]; n];
        rows[j] = vec![1.0; n];
        lhs_acc += lp_l2_norm(&rows, p).powf(theta);
    }
    let lhs_per_point = lhs_acc / n as f64;
    // selector difference images have one unit entry per row; the norm is
    // the same for every selector, checked here on two of them
    let mut diag = vec![vec![0.0; n]; n];
    let mut first_col = vec![vec![0.0; n]; n];
    for j in 0..n {
        diag[j][j] = 1.0;
        first_col[j][0] = 1.0;
    }
    let sel_norm = lp_l2_norm(&diag, p);
    debug_assert!((sel_norm - lp_l2_norm(&first_col, p)).abs() < 1e-12);
    let rhs_per_point = sel_norm.powf(theta);
    Ok(PGrowthReport {
        n,
        p,
        theta,
        lhs_per_point,
        rhs_per_point,
        ratio: lhs_per_point / rhs_per_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutcone::c1_distortion;
    use crate::metric::materialize_space;

    fn pq(p: f64, q: f64) -> PqParams {
        PqParams::new(p, q).unwrap()
    }

    #[test]
    fn ks_pair_small_cases() {
        // n=2, p=1, q=2, theta=1: (1/2)(2/sqrt 2) = 1/sqrt 2
        let pair = ks_pair(2, &pq(1.0, 2.0), 1.0).unwrap();
        assert_eq!(pair.mu[0].0, 2.0);
        assert!((pair.nu[0].0 - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(pair.constant, 2.0);
        let bound = poincare_lower_bound(&pair).unwrap();
        assert!((bound - 1.0 / 2f64.sqrt()).abs() < 1e-12);

        // n=4: mu at distance 4, nu at 2, C = 32/15
        let pair = ks_pair(4, &pq(1.0, 2.0), 1.0).unwrap();
        assert_eq!(pair.mu[0].0, 4.0);
        assert_eq!(pair.nu[0].0, 2.0);
        assert!((pair.constant - 32.0 / 15.0).abs() < 1e-15);

        // p = q: no separation, bound 1/C < 1
        let pair = ks_pair(2, &pq(2.0, 2.0), 1.0).unwrap();
        let bound = poincare_lower_bound(&pair).unwrap();
        assert!((bound - 0.5).abs() < 1e-12);

        assert!(ks_pair(3, &pq(1.0, 2.0), 1.0).is_err());
        assert!(ks_pair(2, &pq(1.0, 2.0), 2.5).is_err());
    }

    #[test]
    fn ks_pair_n16_closed_form() {
        let pair = ks_pair(16, &pq(1.0, 2.0), 1.0).unwrap();
        let bound = poincare_lower_bound(&pair).unwrap();
        let coeff = (1.0 - (7.0f64 / 8.0).powi(16)) / 2.0;
        assert!((bound - coeff * 4.0).abs() < 1e-12);
        assert!((bound - 1.7638).abs() < 1e-3);
    }

    #[test]
    fn degenerate_pair_returns_inverse_constant() {
        let pair = PoincarePair {
            mu: vec![(1.5, 1.0)],
            nu: vec![(1.5, 1.0)],
            constant: 2.0,
            theta: 1.0,
        };
        assert!((poincare_lower_bound(&pair).unwrap() - 0.5).abs() < 1e-15);
        let bad = PoincarePair {
            mu: vec![(1.0, 1.0)],
            nu: vec![],
            constant: 1.0,
            theta: 1.0,
        };
        assert!(poincare_lower_bound(&bad).is_err());
    }

    #[test]
    fn asymptotic_bound_examples() {
        assert!((asymptotic_lower_bound(4, &pq(1.0, 2.0)).unwrap() - 15.0 / 16.0).abs() < 1e-15);
        assert!(
            (asymptotic_lower_bound(2, &pq(1.0, 2.0)).unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-15
        );
        let b16 = asymptotic_lower_bound(16, &pq(1.0, 2.0)).unwrap();
        assert!((b16 - 1.7638853) < 1e-6);
        // odd n routes through n-1
        assert_eq!(
            asymptotic_lower_bound(5, &pq(1.0, 2.0)).unwrap(),
            asymptotic_lower_bound(4, &pq(1.0, 2.0)).unwrap()
        );
        assert!(asymptotic_lower_bound(4, &pq(2.0, 2.0)).is_err());
    }

    #[test]
    fn normalized_coefficient_monotone_to_limit() {
        // (1-(1-2/n)^n)/2 decreases from 1/2 toward (1-e^-2)/2; its
        // reciprocal, the normalized constant, is the increasing quantity
        let limit = (1.0 - (-2.0f64).exp()) / 2.0;
        let mut prev = 0.5 + 1e-15;
        for n in (2..=64).step_by(2) {
            let coeff =
                asymptotic_lower_bound(n, &pq(1.0, 2.0)).unwrap() / (n as f64).sqrt();
            assert!(coeff < prev && coeff > limit, "n={n}: {coeff}");
            prev = coeff;
        }
        assert!(prev - limit < 5e-3);
    }

    #[test]
    fn lower_bounds_never_exceed_lp_value() {
        // the KS pair bound at n=2 must stay below the exact LP distortion
        let pair = ks_pair(2, &pq(1.0, 2.0), 1.0).unwrap();
        let bound = poincare_lower_bound(&pair).unwrap();
        let space = materialize_space(2, &pq(1.0, 2.0), 16).unwrap();
        let cert = c1_distortion(&space).unwrap();
        assert!(bound <= cert.lower + 1e-9, "{bound} vs {}", cert.lower);
    }

    #[test]
    fn dual_witness_reverifies_through_poincare_engine() {
        let space = materialize_space(2, &pq(1.0, 2.0), 16).unwrap();
        let cert = c1_distortion(&space).unwrap();
        let pair = dual_witness_pair(&space, &cert.dual_witness);
        let bound = poincare_lower_bound(&pair).unwrap();
        assert!((bound - cert.lower).abs() <= 1e-6 * cert.lower);
    }

    #[test]
    fn sandwich_bounds_and_pointwise_validation() {
        let b = holder_sandwich(4, 4, &pq(1.0, 2.0)).unwrap();
        assert!((b.c1_upper_bound - 2.0).abs() < 1e-15);
        let b = holder_sandwich(2, 2, &pq(1.0, 2.0)).unwrap();
        assert!((b.c1_upper_bound - 2f64.sqrt()).abs() < 1e-15);
        let b = holder_sandwich(5, 1, &pq(1.0, 2.0)).unwrap();
        assert_eq!(b.c1_upper_bound, 1.0);

        for (p, q) in [(1.0, 2.0), (1.0, 4.0), (2.0, 4.0)] {
            for (m, n) in [(2, 2), (3, 3), (2, 3)] {
                let v = holder_sandwich_max_violation(m, n, &pq(p, q)).unwrap();
                assert!(v <= 1e-12, "violation {v} at p={p} q={q} m={m} n={n}");
            }
        }
    }

    #[test]
    fn obstruction_arithmetic() {
        let o = coarse_obstruction(4, 1.0).unwrap();
        assert_eq!(o.lower_arg, 4.0);
        assert_eq!(o.upper_arg, 2.0);
        assert!((o.constant - 32.0 / 15.0).abs() < 1e-15);

        let o = coarse_obstruction(4, 0.5).unwrap();
        assert_eq!(o.lower_arg, 2.0);
        assert_eq!(o.upper_arg, 1.0);

        // the constant stays below the n -> infinity limit
        for n in (2..=64).step_by(2) {
            let o = coarse_obstruction(n, 1.0).unwrap();
            assert!(o.constant < crate::ks::ks_sup_limit());
        }
        assert!(coarse_obstruction(3, 1.0).is_err());
    }

    #[test]
    fn p_gt_2_ratios() {
        let r = p_gt_2_counterexample(4, 4.0, 1.0).unwrap();
        assert!((r.lhs_per_point - 2.0).abs() < 1e-12); // n^(1/2)
        assert!((r.rhs_per_point - 4f64.powf(0.25)).abs() < 1e-12);
        assert!((r.ratio - 2f64.sqrt()).abs() < 1e-12);

        let r = p_gt_2_counterexample(16, 4.0, 1.0).unwrap();
        assert!((r.ratio - 2.0).abs() < 1e-12);

        // exponent vanishes as p -> 2
        let r = p_gt_2_counterexample(4, 2.0 + 1e-9, 1.0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-6);
        assert!(p_gt_2_counterexample(4, 2.0, 1.0).is_err());
        assert!(p_gt_2_counterexample(3, 4.0, 1.0).is_err());
    }
}
