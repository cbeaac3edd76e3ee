//! Both sides of every variant of the metric Kwapień–Schütt inequality on
//! `M_n(F_2)`, the sharp constants, the extremal witnesses, and the
//! exhaustive isoperimetric verifier.
//!
//! Conventions: the standard variant compares the raw double sums
//! `sum_j sum_x ||f(x + row_j) - f(x)||^theta` and
//! `sum_k sum_x ||f(x + sel_k) - f(x)||^theta`, whose sharp factor is the
//! unnormalized constant `2n / (n^n - (n-2)^n)`. The expectation form uses
//! the normalized constant `2 / (1 - (1 - 2/n)^n)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{mask_profile, table_len, BlockSum, FunctionTable};
use crate::space::{
    point_count, row_mask, selector_count, selector_mask, MatrixPoint, SelectorIter,
    DEFAULT_TABLE_SIDE_CAP, MAX_SIDE,
};

/// Sharp constants of the standard variant at even `n`.
#[derive(Clone, Debug)]
pub struct KsConstant {
    /// `2n / (n^n - (n-2)^n)`, pairing with raw double sums.
    pub unnormalized: BigRational,
    /// `2 / (1 - (1 - 2/n)^n)`, pairing with the expectation form.
    pub normalized: BigRational,
}

/// `sup_n 2 / (1 - (1 - 2/n)^n) = 2e^2 / (e^2 - 1)`, the best-possible
/// uniform constant over all even `n`.
pub fn ks_sup_limit() -> f64 {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    2.0 * e2 / (e2 - 1.0)
}

/// Upper bound `2e / (e - 1)` for the y-averaged constant family.
pub fn y_sup_limit() -> f64 {
    2.0 * std::f64::consts::E / (std::f64::consts::E - 1.0)
}

fn bigpow(base: i64, exp: usize) -> BigInt {
    BigInt::from(base).pow(exp as u32)
}

/// Exact sharp constants for even `n >= 2`.
pub fn ks_constant(n: usize) -> Result<KsConstant> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::RequiresEvenSide {
            n,
            hint: "the standard variant degenerates at odd n; see the y-averaged variant",
        });
    }
    let denom = bigpow(n as i64, n) - bigpow(n as i64 - 2, n);
    let unnormalized = BigRational::new(BigInt::from(2 * n as i64), denom.clone());
    let normalized = BigRational::new(BigInt::from(2) * bigpow(n as i64, n), denom);
    Ok(KsConstant {
        unnormalized,
        normalized,
    })
}

/// Constant `2 / (1 - (1 - 1/n)^n)` of the y-averaged variant, any `n >= 1`.
pub fn y_variant_constant(n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::invalid_param("n", "side must be positive"));
    }
    let denom = bigpow(n as i64, n) - bigpow(n as i64 - 1, n);
    Ok(BigRational::new(BigInt::from(2) * bigpow(n as i64, n), denom))
}

/// Robust `BigRational -> f64` (handles magnitudes beyond `f64` component
/// range by binary rescaling).
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    let bits = r.numer().bits().max(r.denom().bits());
    let shift = bits.saturating_sub(900) as usize;
    let num = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let den = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    num / den
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KsVariant {
    Standard,
    YAveraged,
    Permutation,
    Isoperimetric,
}

/// Evaluation of one inequality variant on one function or subset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KsReport {
    pub variant: KsVariant,
    pub n: usize,
    /// Exponent applied to distances.
    pub theta: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Constant of the variant as an exact rational string.
    pub constant: String,
    pub constant_value: f64,
    pub constant_provenance: String,
    /// `lhs <= constant * rhs` (exact comparison when `exact`).
    pub holds: bool,
    /// `constant * rhs - lhs`.
    pub slack: f64,
    /// Both sides are exact integers compared in rational arithmetic.
    pub exact: bool,
    /// Implied minimal `K = lhs / rhs` (permutation variant only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_k: Option<f64>,
}

const REL_TOL: f64 = 1e-9;

fn representable_integer(v: f64) -> bool {
    v.fract() == 0.0 && v.abs() < 9_007_199_254_740_992.0
}

/// Compares `lhs <= c * rhs`: exactly when both sides are integers, with a
/// `1e-9` relative tolerance otherwise.
fn compare_sides(lhs: f64, rhs: f64, c: &BigRational) -> (bool, f64, bool) {
    let cv = ratio_to_f64(c);
    let slack = cv * rhs - lhs;
    if representable_integer(lhs) && representable_integer(rhs) {
        let l = BigRational::from_float(lhs).expect("finite");
        let r = BigRational::from_float(rhs).expect("finite") * c;
        (l <= r, slack, true)
    } else {
        let scale = lhs.abs().max((cv * rhs).abs()).max(1e-300);
        (lhs <= cv * rhs + REL_TOL * scale, slack, false)
    }
}

#[inline]
fn norm_diff_pow(a: &[f64], b: &[f64], theta: f64) -> f64 {
    let sq: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum();
    if theta == 2.0 {
        sq
    } else if theta == 1.0 {
        sq.sqrt()
    } else {
        sq.sqrt().powf(theta)
    }
}

fn sum_over_masks(f: &FunctionTable, masks: impl Iterator<Item = u128>, theta: f64) -> f64 {
    let len = f.len();
    let mut acc = BlockSum::new();
    for mask in masks {
        let mask = mask as usize;
        debug_assert!(mask < len);
        for x in 0..len {
            acc.add(norm_diff_pow(f.value(x ^ mask), f.value(x), theta));
        }
    }
    acc.total()
}

/// Standard variant: raw sums over row flips (lhs) and the full `n^n`
/// selector family (rhs), compared at the sharp unnormalized factor.
pub fn ks_sides(f: &FunctionTable, theta: f64) -> Result<KsReport> {
    if !(theta > 0.0) {
        return Err(Error::invalid_param("theta", "exponent must be positive"));
    }
    let n = f.n();
    let constants = ks_constant(n)?;
    let lhs = sum_over_masks(f, (0..n).map(|j| row_mask(n, j)), theta);
    let rhs = sum_over_masks(f, SelectorIter::new(n).map(|(_, m)| m), theta);
    let (holds, slack, exact) = compare_sides(lhs, rhs, &constants.unnormalized);
    Ok(KsReport {
        variant: KsVariant::Standard,
        n,
        theta,
        lhs,
        rhs,
        constant: constants.unnormalized.to_string(),
        constant_value: ratio_to_f64(&constants.unnormalized),
        constant_provenance: format!("2n/(n^n-(n-2)^n) at n={n}"),
        holds,
        slack,
        exact,
        min_k: None,
    })
}

/// Y-averaged variant, valid at every `n >= 1`: both sides are expectations
/// over `x` and `y in F_2^n` (and `j` resp. `k`), compared at
/// `2 / (1 - (1 - 1/n)^n)`.
pub fn ks_y_variant_sides(f: &FunctionTable, theta: f64) -> Result<KsReport> {
    if !(theta > 0.0) {
        return Err(Error::invalid_param("theta", "exponent must be positive"));
    }
    let n = f.n();
    let len = f.len();
    let constant = y_variant_constant(n)?;

    let mut lhs_acc = BlockSum::new();
    for j in 0..n {
        let row = row_mask(n, j);
        for y in 0..(1usize << n) {
            let mask = if (y >> j) & 1 == 1 { row } else { 0 } as usize;
            for x in 0..len {
                lhs_acc.add(norm_diff_pow(f.value(x ^ mask), f.value(x), theta));
            }
        }
    }
    let lhs_raw = lhs_acc.total();

    let mut rhs_acc = BlockSum::new();
    for (k, _) in SelectorIter::new(n) {
        for y in 0..(1usize << n) {
            let mut mask = 0u128;
            for (j, &kj) in k.iter().enumerate() {
                if (y >> j) & 1 == 1 {
                    mask |= 1u128 << (j * n + kj);
                }
            }
            let mask = mask as usize;
            for x in 0..len {
                rhs_acc.add(norm_diff_pow(f.value(x ^ mask), f.value(x), theta));
            }
        }
    }
    let rhs_raw = rhs_acc.total();

    let xy_measure = (len as f64) * (1u64 << n) as f64;
    let lhs = lhs_raw / (n as f64 * xy_measure);
    let rhs = rhs_raw / (selector_count(n) as f64 * xy_measure);

    // exact comparison on raw integer sums: lhs <= C rhs is equivalent to
    // n^n * lhs_raw <= C * n * rhs_raw
    let (holds, slack, exact) = if representable_integer(lhs_raw) && representable_integer(rhs_raw)
    {
        let l = BigRational::from_float(lhs_raw).expect("finite")
            * BigRational::from_integer(bigpow(n as i64, n));
        let r = BigRational::from_float(rhs_raw).expect("finite")
            * &constant
            * BigRational::from_integer(BigInt::from(n as i64));
        let cv = ratio_to_f64(&constant);
        (l <= r, cv * rhs - lhs, true)
    } else {
        let cv = ratio_to_f64(&constant);
        let scale = lhs.abs().max((cv * rhs).abs()).max(1e-300);
        (lhs <= cv * rhs + REL_TOL * scale, cv * rhs - lhs, false)
    };

    Ok(KsReport {
        variant: KsVariant::YAveraged,
        n,
        theta,
        lhs,
        rhs,
        constant: constant.to_string(),
        constant_value: ratio_to_f64(&constant),
        constant_provenance: format!("2/(1-(1-1/n)^n) at n={n}"),
        holds,
        slack,
        exact,
        min_k: None,
    })
}

fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    // Heap's algorithm, iterative
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            visit(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product::<u128>().max(1)
}

/// Permutation ("failed attempt") variant: `lhs = (1/n) sum_j sum_x d` and
/// `rhs = (1/n!) sum_pi sum_x d` with plain distances. No finite constant
/// works for all `n`; the report carries the implied minimal
/// `K = lhs / rhs`.
pub fn permutation_variant_sides(f: &FunctionTable) -> Result<KsReport> {
    let n = f.n();
    let lhs_raw = sum_over_masks(f, (0..n).map(|j| row_mask(n, j)), 1.0);
    let mut rhs_acc = BlockSum::new();
    let len = f.len();
    for_each_permutation(n, |pi| {
        let mask = selector_mask(n, pi) as usize;
        for x in 0..len {
            rhs_acc.add(norm_diff_pow(f.value(x ^ mask), f.value(x), 1.0));
        }
    });
    let rhs_raw = rhs_acc.total();
    let lhs = lhs_raw / n as f64;
    let rhs = rhs_raw / factorial(n) as f64;
    let exact = representable_integer(lhs_raw) && representable_integer(rhs_raw);
    let min_k = if rhs_raw > 0.0 {
        (lhs_raw * factorial(n) as f64) / (rhs_raw * n as f64)
    } else {
        f64::INFINITY
    };
    Ok(KsReport {
        variant: KsVariant::Permutation,
        n,
        theta: 1.0,
        lhs,
        rhs,
        constant: "n/a".into(),
        constant_value: f64::NAN,
        constant_provenance: "no finite constant exists for all n; min_k is the implied bound"
            .into(),
        holds: true,
        slack: 0.0,
        exact,
        min_k: Some(min_k),
    })
}

/// A `{-1, 1}`-valued character `x -> (-1)^<mask, x>`. All the extremal
/// witnesses are characters, so their inequality sides have exact
/// closed-form integer values that avoid table materialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CharacterFn {
    n: usize,
    mask: u128,
}

impl CharacterFn {
    pub fn new(n: usize, mask: u128) -> Result<Self> {
        if n == 0 || n > MAX_SIDE {
            return Err(Error::invalid_param("n", format!("side {n} not in 1..={MAX_SIDE}")));
        }
        let cells = (n * n) as u32;
        if cells < 128 && mask >> cells != 0 {
            return Err(Error::invalid_param("mask", "mask exceeds n^2 bits"));
        }
        Ok(CharacterFn { n, mask })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u128 {
        self.mask
    }

    pub fn eval(&self, x: &MatrixPoint) -> f64 {
        if (self.mask & x.index()).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Whether the character changes sign when `v` is XORed in.
    pub fn flips_under(&self, v: u128) -> bool {
        (self.mask & v).count_ones() % 2 == 1
    }

    pub fn to_table(&self) -> Result<FunctionTable> {
        FunctionTable::from_fn(self.n, 1, |p| vec![self.eval(&p)])
    }
}

/// `phi(x) = (-1)^(x_00 + ... + x_(n-1)(n-1))`, the diagonal-parity witness
/// attaining equality in the standard variant at even `n`.
pub fn witness_phi(n: usize) -> Result<CharacterFn> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::RequiresEvenSide {
            n,
            hint: "the equality witness needs even n",
        });
    }
    let mask = (0..n).fold(0u128, |m, j| m | (1u128 << (j * n + j)));
    CharacterFn::new(n, mask)
}

/// `psi(x) = (-1)^(x_00 + sum_(j>=1) sum_(k>=3) x_jk)`, forcing `K >= n/2`
/// in the permutation variant at even `n >= 4`.
pub fn witness_psi(n: usize) -> Result<CharacterFn> {
    if n % 2 != 0 || n < 4 {
        return Err(Error::invalid_param("n", "psi witness needs even n >= 4"));
    }
    let mut mask = 1u128;
    for j in 1..n {
        for k in 3..n {
            mask |= 1u128 << (j * n + k);
        }
    }
    CharacterFn::new(n, mask)
}

/// `sigma(x) = parity of the first n-1 rows`, which zeroes the standard
/// right-hand side at odd `n` while the left-hand side stays positive.
pub fn witness_odd(n: usize) -> Result<CharacterFn> {
    if n % 2 == 0 || n < 3 {
        return Err(Error::RequiresOddSide { n });
    }
    let mut mask = 0u128;
    for j in 0..(n - 1) {
        mask |= row_mask(n, j);
    }
    CharacterFn::new(n, mask)
}

/// Exact standard-variant sides of a character at integer exponent
/// `theta in {1, 2}`, computed in closed form (no table, no x-loop):
/// every difference has norm 0 or 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSides {
    pub lhs: i128,
    pub rhs: i128,
    /// `lhs / rhs` when `rhs > 0`.
    pub ratio: Option<BigRational>,
}

pub fn character_ks_sides(c: &CharacterFn, theta: u32) -> Result<ExactSides> {
    if !(theta == 1 || theta == 2) {
        return Err(Error::invalid_param("theta", "exact sides need theta in {1, 2}"));
    }
    let n = c.n();
    if n > 8 {
        return Err(Error::SizeLimit {
            what: "exact character sides",
            requested: n as u128,
            cap: 8,
        });
    }
    let points = point_count(n) as i128;
    let step = 1i128 << theta; // |±1 - ∓1|^theta = 2^theta
    let flipping_rows = (0..n).filter(|&j| c.flips_under(row_mask(n, j))).count() as i128;
    // sum_k (1 - chi(sel_k)) = selector_multiplier, each flip contributing 2
    let flipping_selectors = mask_profile(n, c.mask()).selector_multiplier / 2;
    let lhs = points * step * flipping_rows;
    let rhs = points * step * flipping_selectors;
    let ratio = if rhs > 0 {
        Some(BigRational::new(BigInt::from(lhs), BigInt::from(rhs)))
    } else {
        None
    };
    Ok(ExactSides { lhs, rhs, ratio })
}

/// Exact permutation-variant totals of a character: classifies each of the
/// `n!` shift vectors by the parity of its overlap with the mask instead of
/// enumerating `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPermutationSides {
    /// `sum_j sum_x |...|` (raw, before the `1/n`).
    pub lhs_total: i128,
    /// `sum_pi sum_x |...|` (raw, before the `1/n!`).
    pub rhs_total: i128,
    pub flipping_permutations: u128,
    /// `n! * lhs_total / (n * rhs_total)`.
    pub min_k: Option<BigRational>,
}

pub fn character_permutation_sides(c: &CharacterFn) -> Result<ExactPermutationSides> {
    let n = c.n();
    if n > 8 {
        return Err(Error::SizeLimit {
            what: "exact permutation classification",
            requested: factorial(n),
            cap: factorial(8),
        });
    }
    let points = point_count(n) as i128;
    let flipping_rows = (0..n).filter(|&j| c.flips_under(row_mask(n, j))).count() as i128;
    let mut flipping_permutations: u128 = 0;
    for_each_permutation(n, |pi| {
        if c.flips_under(selector_mask(n, pi)) {
            flipping_permutations += 1;
        }
    });
    let lhs_total = points * 2 * flipping_rows;
    let rhs_total = points * 2 * flipping_permutations as i128;
    let min_k = if rhs_total > 0 {
        Some(BigRational::new(
            BigInt::from(lhs_total) * BigInt::from(factorial(n)),
            BigInt::from(rhs_total) * BigInt::from(n as i128),
        ))
    } else {
        None
    };
    Ok(ExactPermutationSides {
        lhs_total,
        rhs_total,
        flipping_permutations,
        min_k,
    })
}

/// A subset `S` of `M_n(F_2)` as a membership bitmask over point indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetWitness {
    n: usize,
    words: Vec<u64>,
}

impl SubsetWitness {
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 || n > DEFAULT_TABLE_SIDE_CAP {
            return Err(Error::SizeLimit {
                what: "subset witness",
                requested: if n <= MAX_SIDE { point_count(n) } else { u128::MAX },
                cap: point_count(DEFAULT_TABLE_SIDE_CAP),
            });
        }
        let bits = table_len(n);
        Ok(SubsetWitness {
            n,
            words: vec![0; bits.div_ceil(64)],
        })
    }

    pub fn from_predicate(n: usize, mut pred: impl FnMut(&MatrixPoint) -> bool) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for i in 0..table_len(n) {
            if pred(&MatrixPoint::with_bits(n, i as u128)) {
                s.insert(i);
            }
        }
        Ok(s)
    }

    /// Membership mask interpreted little-endian over the 16 point indices
    /// of `M_2(F_2)`.
    pub fn from_mask16(mask: u16) -> Self {
        SubsetWitness {
            n: 2,
            words: vec![mask as u64],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, index: usize) {
        self.words[index / 64] |= 1 << (index % 64);
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.words[index / 64] >> (index % 64)) & 1 == 1
    }

    pub fn cardinality(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

fn one_directional_crossings(s: &SubsetWitness, mask: usize) -> i128 {
    let len = table_len(s.n);
    let mut count = 0i128;
    for x in 0..len {
        if s.contains(x) && !s.contains(x ^ mask) {
            count += 1;
        }
    }
    count
}

/// Isoperimetric form: `lhs = sum_j |{x in S : x + row_j not in S}|` versus
/// `rhs = sum_k |{x in S : x + sel_k not in S}|` at the sharp factor.
pub fn isoperimetric_check(s: &SubsetWitness) -> Result<KsReport> {
    let n = s.n();
    let constants = ks_constant(n)?;
    let lhs: i128 = (0..n)
        .map(|j| one_directional_crossings(s, row_mask(n, j) as usize))
        .sum();
    let rhs: i128 = SelectorIter::new(n)
        .map(|(_, m)| one_directional_crossings(s, m as usize))
        .sum();
    let (lhs, rhs) = (lhs as f64, rhs as f64);
    let (holds, slack, exact) = compare_sides(lhs, rhs, &constants.unnormalized);
    Ok(KsReport {
        variant: KsVariant::Isoperimetric,
        n,
        theta: 1.0,
        lhs,
        rhs,
        constant: constants.unnormalized.to_string(),
        constant_value: ratio_to_f64(&constants.unnormalized),
        constant_provenance: format!("2n/(n^n-(n-2)^n) at n={n}"),
        holds,
        slack,
        exact,
        min_k: None,
    })
}

/// Two-directional crossing counts of the `{0,1}` indicator of `S`: equals
/// the standard `ks_sides` of the indicator table for any `theta` (all
/// jumps have size one) and is exactly twice the one-directional
/// isoperimetric count.
pub fn indicator_ks_sides(s: &SubsetWitness) -> (i128, i128) {
    let n = s.n();
    let len = table_len(n);
    let two_dir = |mask: usize| -> i128 {
        let mut c = 0i128;
        for x in 0..len {
            if s.contains(x) != s.contains(x ^ mask) {
                c += 1;
            }
        }
        c
    };
    let lhs = (0..n).map(|j| two_dir(row_mask(n, j) as usize)).sum();
    let rhs = SelectorIter::new(n).map(|(_, m)| two_dir(m as usize)).sum();
    (lhs, rhs)
}

/// Outcome of sweeping every subset of `M_2(F_2)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsoperimetricSweep {
    pub subsets_checked: u64,
    pub violations: u64,
    /// Subsets with `lhs == rhs` (the factor is 1 at n = 2).
    pub equality_count: u64,
    pub phi_level_set_is_equality: bool,
    /// Largest `lhs - rhs` observed (nonpositive iff no violation).
    pub max_excess: i64,
}

/// Exhaustively verifies the isoperimetric inequality over all `2^16`
/// subsets of `M_2(F_2)`. The sharp factor is exactly 1 there, so a
/// violation is just `lhs > rhs`.
pub fn isoperimetric_exhaustive_n2() -> IsoperimetricSweep {
    let n = 2usize;
    let row_masks: Vec<u16> = (0..n).map(|j| row_mask(n, j) as u16).collect();
    let sel_masks: Vec<u16> = SelectorIter::new(n).map(|(_, m)| m as u16).collect();

    let phi_mask: u16 = {
        let mut m = 0u16;
        for x in 0..16u16 {
            // diagonal bits of the point index are 0 and 3
            if ((x & 1) ^ ((x >> 3) & 1)) == 0 {
                m |= 1 << x;
            }
        }
        m
    };

    let one_dir = |s: u16, v: u16| -> i64 {
        let mut c = 0i64;
        for x in 0..16u16 {
            if (s >> x) & 1 == 1 && (s >> (x ^ v)) & 1 == 0 {
                c += 1;
            }
        }
        c
    };

    let mut violations = 0u64;
    let mut equality_count = 0u64;
    let mut phi_equality = false;
    let mut max_excess = i64::MIN;
    for s in 0..=u16::MAX {
        let lhs: i64 = row_masks.iter().map(|&v| one_dir(s, v)).sum();
        let rhs: i64 = sel_masks.iter().map(|&v| one_dir(s, v)).sum();
        let excess = lhs - rhs;
        max_excess = max_excess.max(excess);
        if excess > 0 {
            violations += 1;
        } else if excess == 0 {
            equality_count += 1;
            if s == phi_mask {
                phi_equality = true;
            }
        }
    }
    IsoperimetricSweep {
        subsets_checked: 1 << 16,
        violations,
        equality_count,
        phi_level_set_is_equality: phi_equality,
        max_excess,
    }
}

/// Monte-Carlo estimate of the normalized standard-variant sides for an
/// oracle-valued function, with standard errors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledKsReport {
    pub n: usize,
    pub theta: f64,
    pub samples: u64,
    pub seed: u64,
    /// Mean of `||f(x + row_j) - f(x)||^theta` over uniform `(j, x)`.
    pub lhs_mean: f64,
    pub lhs_se: f64,
    /// Mean of `||f(x + sel_k) - f(x)||^theta` over uniform `(k, x)`.
    pub rhs_mean: f64,
    pub rhs_se: f64,
    /// Normalized constant `2 / (1 - (1 - 2/n)^n)`.
    pub constant_value: f64,
    pub violation: f64,
    pub violation_sigmas: f64,
    /// A violation is only asserted beyond three combined standard errors.
    pub holds: bool,
}

struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn new() -> Self {
        Welford {
            count: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn se(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.count as f64 - 1.0) / self.count as f64).sqrt()
    }
}

fn random_point(n: usize, rng: &mut ChaCha8Rng) -> MatrixPoint {
    let cells = (n * n) as u32;
    let hi = rng.gen::<u64>() as u128;
    let lo = rng.gen::<u64>() as u128;
    let raw = (hi << 64) | lo;
    let bits = if cells >= 128 { raw } else { raw & ((1u128 << cells) - 1) };
    MatrixPoint::with_bits(n, bits)
}

const SAMPLE_CHUNK: u64 = 4096;

/// Seeded sampled estimator for sides beyond the enumeration caps. The RNG
/// is re-streamed per 4096-sample chunk, so the estimate is reproducible
/// independently of how chunks are scheduled.
pub fn ks_sides_sampled<F>(
    oracle: F,
    n: usize,
    theta: f64,
    samples: u64,
    seed: u64,
) -> Result<SampledKsReport>
where
    F: Fn(&MatrixPoint) -> Vec<f64>,
{
    if samples == 0 {
        return Err(Error::invalid_param("samples", "need at least one sample"));
    }
    if !(theta > 0.0) {
        return Err(Error::invalid_param("theta", "exponent must be positive"));
    }
    let constants = ks_constant(n)?;
    let constant_value = ratio_to_f64(&constants.normalized);

    let mut lhs = Welford::new();
    let mut rhs = Welford::new();
    let mut sel = vec![0usize; n];
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    for chunk in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let in_chunk = SAMPLE_CHUNK.min(samples - chunk * SAMPLE_CHUNK);
        for _ in 0..in_chunk {
            let x = random_point(n, &mut rng);
            let j = rng.gen_range(0..n);
            let xj = MatrixPoint::with_bits(n, x.index() ^ row_mask(n, j));
            lhs.push(norm_diff_pow(&oracle(&xj), &oracle(&x), theta));

            let x2 = random_point(n, &mut rng);
            for s in sel.iter_mut() {
                *s = rng.gen_range(0..n);
            }
            let x2k = MatrixPoint::with_bits(n, x2.index() ^ selector_mask(n, &sel));
            rhs.push(norm_diff_pow(&oracle(&x2k), &oracle(&x2), theta));
        }
    }

    let violation = lhs.mean - constant_value * rhs.mean;
    let combined_se = (lhs.se().powi(2) + (constant_value * rhs.se()).powi(2)).sqrt();
    let sigmas = if combined_se > 0.0 {
        violation / combined_se
    } else if violation > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(SampledKsReport {
        n,
        theta,
        samples,
        seed,
        lhs_mean: lhs.mean,
        lhs_se: lhs.se(),
        rhs_mean: rhs.mean,
        rhs_se: rhs.se(),
        constant_value,
        violation,
        violation_sigmas: sigmas,
        holds: sigmas <= 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn constants_at_small_n() {
        let c2 = ks_constant(2).unwrap();
        assert_eq!(c2.unnormalized, rational(1, 1));
        assert_eq!(c2.normalized, rational(2, 1));
        let c4 = ks_constant(4).unwrap();
        assert_eq!(c4.unnormalized, rational(1, 30));
        assert_eq!(c4.normalized, rational(32, 15));
        assert!(ks_constant(3).is_err());

        // normalized constants increase toward 2e^2/(e^2-1)
        let sup = ks_sup_limit();
        assert!((sup - 2.3130352854993312).abs() < 1e-12);
        let mut prev = 0.0;
        for n in (2..=64).step_by(2) {
            let c = ratio_to_f64(&ks_constant(n).unwrap().normalized);
            assert!(c > prev && c < sup);
            prev = c;
        }
        assert!(sup - prev < 0.02);
    }

    #[test]
    fn y_constants() {
        assert_eq!(y_variant_constant(2).unwrap(), rational(8, 3));
        // 2/(1-(2/3)^3) = 2*27/(27-8) = 54/19
        assert_eq!(y_variant_constant(3).unwrap(), rational(54, 19));
        let sup = y_sup_limit();
        for n in 1..=32 {
            assert!(ratio_to_f64(&y_variant_constant(n).unwrap()) <= sup + 1e-12);
        }
    }

    #[test]
    fn phi_equality_n2() {
        let phi = witness_phi(2).unwrap();
        let exact = character_ks_sides(&phi, 1).unwrap();
        assert_eq!(exact.lhs, 64); // n 2^(n^2+1)
        assert_eq!(exact.rhs, 64); // 2^(n^2) (n^n - (n-2)^n)
        assert_eq!(exact.ratio, Some(rational(1, 1)));

        // table path agrees and is exact for ±1 values
        let table = phi.to_table().unwrap();
        for theta in [1.0, 2.0] {
            let report = ks_sides(&table, theta).unwrap();
            assert!(report.exact);
            assert_eq!(report.lhs, report.rhs);
            assert!(report.holds);
            assert_eq!(report.slack, 0.0);
        }
        let r1 = ks_sides(&table, 1.0).unwrap();
        assert_eq!(r1.lhs, 64.0);
        assert_eq!(r1.rhs, 64.0);
    }

    #[test]
    fn phi_equality_n4_exact() {
        let phi = witness_phi(4).unwrap();
        let exact = character_ks_sides(&phi, 1).unwrap();
        assert_eq!(exact.lhs, 4 * (1 << 17)); // 524288
        assert_eq!(exact.rhs, (1 << 16) * 240); // 15728640
        assert_eq!(exact.ratio.clone(), Some(rational(1, 30)));
        assert_eq!(exact.ratio.unwrap(), ks_constant(4).unwrap().unnormalized);
    }

    #[test]
    fn phi_table_equality_n4_matches_closed_form() {
        let phi = witness_phi(4).unwrap();
        let table = phi.to_table().unwrap();
        let report = ks_sides(&table, 1.0).unwrap();
        assert!(report.exact);
        assert_eq!(report.lhs, 524288.0);
        assert_eq!(report.rhs, 15728640.0);
        assert!(report.holds);
        assert_eq!(report.slack, 0.0);
    }

    #[test]
    fn constant_function_is_degenerate() {
        let f = FunctionTable::constant(2, &[1.25]).unwrap();
        let report = ks_sides(&f, 2.0).unwrap();
        assert_eq!(report.lhs, 0.0);
        assert_eq!(report.rhs, 0.0);
        assert!(report.holds);
        let y = ks_y_variant_sides(&f, 2.0).unwrap();
        assert_eq!(y.lhs, 0.0);
        assert_eq!(y.rhs, 0.0);
        assert!(y.holds);
        let p = permutation_variant_sides(&f).unwrap();
        assert_eq!(p.lhs, 0.0);
        assert_eq!(p.rhs, 0.0);
    }

    #[test]
    fn psi_forces_k_at_least_n_over_2() {
        let psi = witness_psi(4).unwrap();
        for j in 0..4 {
            assert!(psi.flips_under(row_mask(4, j)));
        }
        let sides = character_permutation_sides(&psi).unwrap();
        assert_eq!(sides.lhs_total, 4 * (1i128 << 17)); // n 2^(n^2+1)
        assert_eq!(sides.rhs_total, (1i128 << 18) * 6); // 2^(n^2+2) (n-1)!
        assert_eq!(sides.flipping_permutations, 12); // 2 (n-1)!
        assert_eq!(sides.min_k.unwrap(), rational(2, 1));

        // table path cross-checks the closed form at n = 4
        let table = psi.to_table().unwrap();
        let report = permutation_variant_sides(&table).unwrap();
        assert!(report.exact);
        assert_eq!(report.lhs, sides.lhs_total as f64 / 4.0);
        assert_eq!(report.rhs, sides.rhs_total as f64 / 24.0);
        assert_eq!(report.min_k, Some(2.0));
    }

    #[test]
    fn psi_n6_closed_form() {
        let psi = witness_psi(6).unwrap();
        let sides = character_permutation_sides(&psi).unwrap();
        assert_eq!(sides.lhs_total, 6 * (1i128 << 37));
        assert_eq!(sides.rhs_total, (1i128 << 38) * 120);
        assert_eq!(sides.min_k.unwrap(), rational(3, 1));
    }

    #[test]
    fn odd_witness_degenerates_standard_variant() {
        let sigma = witness_odd(3).unwrap();
        let exact = character_ks_sides(&sigma, 1).unwrap();
        assert_eq!(exact.rhs, 0);
        assert_eq!(exact.lhs, 2 * (1 << 10)); // (n-1) 2^(n^2+1)
        assert!(exact.ratio.is_none());
        assert!(witness_odd(4).is_err());

        // sampled spot check at n = 5: all sampled selector terms vanish
        let sigma5 = witness_odd(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let x = random_point(5, &mut rng);
            let sel: Vec<usize> = (0..5).map(|_| rng.gen_range(0..5)).collect();
            let shifted = MatrixPoint::with_bits(5, x.index() ^ selector_mask(5, &sel));
            assert_eq!(sigma5.eval(&x), sigma5.eval(&shifted));
        }
    }

    #[test]
    fn y_variant_rescues_odd_n() {
        let sigma = witness_odd(3).unwrap();
        let table = sigma.to_table().unwrap();
        assert!(ks_sides(&table, 2.0).is_err()); // odd n rejected outright
        let y = ks_y_variant_sides(&table, 2.0).unwrap();
        assert!(y.rhs > 0.0, "y-averaged rhs must not vanish");
        assert!(y.lhs > 0.0);
        assert!(y.holds);
        assert_eq!(y.constant, "54/19");
    }

    #[test]
    fn y_variant_random_tables_hold_n2() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let f = FunctionTable::random(2, 1, &mut rng).unwrap();
            let report = ks_y_variant_sides(&f, 2.0).unwrap();
            assert!(report.holds, "violation: {report:?}");
            assert_eq!(report.constant, "8/3");
        }
    }

    #[test]
    fn standard_variant_random_tables_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let f = FunctionTable::random(2, 1, &mut rng).unwrap();
            for theta in [1.0, 2.0] {
                let report = ks_sides(&f, theta).unwrap();
                assert!(report.holds, "violation: {report:?}");
            }
        }
        // vector-valued targets too
        for _ in 0..10 {
            let f = FunctionTable::random(2, 3, &mut rng).unwrap();
            let report = ks_sides(&f, 2.0).unwrap();
            assert!(report.holds);
        }
    }

    #[test]
    fn isoperimetric_small_cases() {
        let empty = SubsetWitness::empty(2).unwrap();
        let rep = isoperimetric_check(&empty).unwrap();
        assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));
        assert!(rep.holds);

        let full = SubsetWitness::from_predicate(2, |_| true).unwrap();
        let rep = isoperimetric_check(&full).unwrap();
        assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));

        // phi level set: equality with both sides 16
        let phi_set =
            SubsetWitness::from_predicate(2, |p| !(p.entry(0, 0) ^ p.entry(1, 1))).unwrap();
        assert_eq!(phi_set.cardinality(), 8);
        let rep = isoperimetric_check(&phi_set).unwrap();
        assert_eq!(rep.lhs, 16.0);
        assert_eq!(rep.rhs, 16.0);
        assert!(rep.holds && rep.exact);

        // indicator sides are exactly twice the one-directional counts
        let (l2, r2) = indicator_ks_sides(&phi_set);
        assert_eq!(l2, 32);
        assert_eq!(r2, 32);
    }

    #[test]
    fn indicator_sides_are_twice_isoperimetric_everywhere() {
        // exhaustive cross-validation at n = 2: the two-directional
        // indicator counts equal exactly twice the one-directional
        // isoperimetric counts for every subset
        for mask in 0..=u16::MAX {
            let s = SubsetWitness::from_mask16(mask);
            let iso_lhs: i128 = (0..2)
                .map(|j| one_directional_crossings(&s, row_mask(2, j) as usize))
                .sum();
            let iso_rhs: i128 = SelectorIter::new(2)
                .map(|(_, m)| one_directional_crossings(&s, m as usize))
                .sum();
            let (ind_lhs, ind_rhs) = indicator_ks_sides(&s);
            assert_eq!(ind_lhs, 2 * iso_lhs, "subset {mask}");
            assert_eq!(ind_rhs, 2 * iso_rhs, "subset {mask}");
        }
    }

    #[test]
    fn y_variant_random_tables_hold_n3() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let f = FunctionTable::random(3, 1, &mut rng).unwrap();
            for theta in [1.0, 2.0] {
                let report = ks_y_variant_sides(&f, theta).unwrap();
                assert!(report.holds, "violation: {report:?}");
                assert_eq!(report.constant, "54/19");
            }
        }
    }

    #[test]
    fn y_constant_at_least_half_the_standard_constant() {
        for n in (2..=32).step_by(2) {
            let y = y_variant_constant(n).unwrap();
            let std = ks_constant(n).unwrap().normalized;
            assert!(
                y * BigRational::from_integer(BigInt::from(2)) >= std,
                "n = {n}"
            );
        }
    }

    #[test]
    fn exhaustive_sweep_smoke() {
        let sweep = isoperimetric_exhaustive_n2();
        assert_eq!(sweep.subsets_checked, 65536);
        assert_eq!(sweep.violations, 0);
        assert!(sweep.phi_level_set_is_equality);
        assert!(sweep.equality_count >= 2);
        assert!(sweep.max_excess <= 0);
    }

    #[test]
    fn sampled_estimator_matches_phi_closed_form_n6() {
        let phi = witness_phi(6).unwrap();
        let report = ks_sides_sampled(|x| vec![phi.eval(x)], 6, 1.0, 20_000, 12345).unwrap();
        // closed forms: lhs mean = 2, constant * rhs mean = 2
        assert!((report.lhs_mean - 2.0).abs() <= 3.0 * report.lhs_se + 1e-12);
        let rhs_scaled = report.constant_value * report.rhs_mean;
        assert!((rhs_scaled - 2.0).abs() <= 3.0 * report.constant_value * report.rhs_se + 0.05);
        assert!(report.holds);

        // determinism
        let again = ks_sides_sampled(|x| vec![phi.eval(x)], 6, 1.0, 20_000, 12345).unwrap();
        assert_eq!(report.lhs_mean, again.lhs_mean);
        assert_eq!(report.rhs_mean, again.rhs_mean);

        // constant oracle degenerates to zero
        let zero = ks_sides_sampled(|_| vec![1.0], 6, 1.0, 1000, 1).unwrap();
        assert_eq!(zero.lhs_mean, 0.0);
        assert_eq!(zero.rhs_mean, 0.0);
        assert!(zero.holds);
    }

    #[test]
    fn report_serializes_with_rational_constant() {
        let phi = witness_phi(2).unwrap();
        let report = ks_sides(&phi.to_table().unwrap(), 2.0).unwrap();
        let js = serde_json::to_value(&report).unwrap();
        assert_eq!(js["variant"], "standard");
        assert_eq!(js["constant"], "1");
        assert_eq!(js["exact"], true);
    }
}
