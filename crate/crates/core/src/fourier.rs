//! Walsh–Hadamard analysis on `M_n(F_2)`, viewed as `F_2^(n^2)`.
//!
//! The spectrum is indexed by character masks `m`: row block `j` of `m` is
//! the indicator bitmask of the subset `A_j` of columns, and the character
//! is `x -> (-1)^<m, x>` with `<m, x>` the parity of the bitwise AND.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{row_mask, MatrixPoint, SelectorIter, DEFAULT_TABLE_SIDE_CAP, MAX_SIDE};

/// Dense table of a function `M_n(F_2) -> R^d`, indexed by point index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionTable {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

/// Fourier coefficients of a [`FunctionTable`], same dense layout.
#[derive(Clone, Debug, PartialEq)]
pub struct WalshSpectrum {
    n: usize,
    d: usize,
    coeffs: Vec<f64>,
}

pub(crate) fn table_len(n: usize) -> usize {
    1usize << (n * n)
}

fn check_side(n: usize, side_cap: usize) -> Result<()> {
    if n == 0 || n > MAX_SIDE {
        return Err(Error::invalid_param("n", format!("side {n} not in 1..={MAX_SIDE}")));
    }
    if n > side_cap {
        return Err(Error::SizeLimit {
            what: "dense function table",
            requested: 1u128 << (n * n),
            cap: 1u128 << (side_cap * side_cap),
        });
    }
    Ok(())
}

impl FunctionTable {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_side_cap(n, d, values, DEFAULT_TABLE_SIDE_CAP)
    }

    pub fn with_side_cap(n: usize, d: usize, values: Vec<f64>, side_cap: usize) -> Result<Self> {
        check_side(n, side_cap)?;
        if d == 0 {
            return Err(Error::invalid_param("d", "value dimension must be positive"));
        }
        let expect = table_len(n) * d;
        if values.len() != expect {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: expect,
            });
        }
        Ok(FunctionTable { n, d, values })
    }

    pub fn constant(n: usize, value: &[f64]) -> Result<Self> {
        check_side(n, DEFAULT_TABLE_SIDE_CAP)?;
        let len = table_len(n);
        let mut values = Vec::with_capacity(len * value.len());
        for _ in 0..len {
            values.extend_from_slice(value);
        }
        Self::new(n, value.len(), values)
    }

    pub fn from_fn(n: usize, d: usize, mut f: impl FnMut(MatrixPoint) -> Vec<f64>) -> Result<Self> {
        check_side(n, DEFAULT_TABLE_SIDE_CAP)?;
        let len = table_len(n);
        let mut values = Vec::with_capacity(len * d);
        for i in 0..len {
            let v = f(MatrixPoint::with_bits(n, i as u128));
            if v.len() != d {
                return Err(Error::DimensionMismatch { left: v.len(), right: d });
            }
            values.extend_from_slice(&v);
        }
        Self::new(n, d, values)
    }

    /// I.i.d. entries uniform on `[-1, 1]`.
    pub fn random(n: usize, d: usize, rng: &mut impl rand::Rng) -> Result<Self> {
        check_side(n, DEFAULT_TABLE_SIDE_CAP)?;
        let len = table_len(n) * d;
        let values = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Self::new(n, d, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        table_len(self.n)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, index: usize) -> &[f64] {
        &self.values[index * self.d..(index + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Binary stream format: magic `KSFT`, version u16, dtype u8 (0 = f64),
    /// n u32, d u32, then the row-major values little-endian.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(b"KSFT")?;
        w.write_all(&1u16.to_le_bytes())?;
        w.write_all(&[0u8])?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.d as u32).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self> {
        let mut head = [0u8; 15];
        r.read_exact(&mut head)?;
        if &head[0..4] != b"KSFT" {
            return Err(Error::TableFormat("bad magic".into()));
        }
        let version = u16::from_le_bytes([head[4], head[5]]);
        if version != 1 {
            return Err(Error::TableFormat(format!("unsupported version {version}")));
        }
        if head[6] != 0 {
            return Err(Error::TableFormat(format!("unsupported dtype {}", head[6])));
        }
        let n = u32::from_le_bytes([head[7], head[8], head[9], head[10]]) as usize;
        let d = u32::from_le_bytes([head[11], head[12], head[13], head[14]]) as usize;
        check_side(n, DEFAULT_TABLE_SIDE_CAP)?;
        let len = table_len(n) * d;
        let mut values = vec![0.0; len];
        let mut buf = [0u8; 8];
        for v in values.iter_mut() {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        Ok(FunctionTable { n, d, values })
    }
}

impl WalshSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeff(&self, mask: usize) -> &[f64] {
        &self.coeffs[mask * self.d..(mask + 1) * self.d]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

fn butterfly(data: &mut [f64], len: usize, d: usize) {
    let mut h = 1;
    while h < len {
        let step = h * 2;
        let mut base = 0;
        while base < len {
            for i in base..base + h {
                let (lo, hi) = (i * d, (i + h) * d);
                for c in 0..d {
                    let a = data[lo + c];
                    let b = data[hi + c];
                    data[lo + c] = a + b;
                    data[hi + c] = a - b;
                }
            }
            base += step;
        }
        h = step;
    }
}

/// Forward transform: `coeff(m) = 2^(-n^2) * sum_x (-1)^<m,x> f(x)`.
pub fn wht_forward(f: &FunctionTable) -> WalshSpectrum {
    let len = f.len();
    let mut coeffs = f.values.clone();
    butterfly(&mut coeffs, len, f.d);
    let scale = 1.0 / len as f64;
    for v in coeffs.iter_mut() {
        *v *= scale;
    }
    WalshSpectrum {
        n: f.n,
        d: f.d,
        coeffs,
    }
}

/// Inverse transform, exact up to roundoff: `f(x) = sum_m coeff(m) (-1)^<m,x>`.
pub fn wht_inverse(s: &WalshSpectrum) -> FunctionTable {
    let len = table_len(s.n);
    let mut values = s.coeffs.clone();
    butterfly(&mut values, len, s.d);
    FunctionTable {
        n: s.n,
        d: s.d,
        values,
    }
}

/// Deterministic blocked summation: sequential within 4096-element blocks,
/// pairwise across blocks. Keeps the 1e-9-relative identities honest on
/// 10^7-term sums without carrying full Kahan state.
pub(crate) struct BlockSum {
    blocks: Vec<f64>,
    current: f64,
    count: usize,
}

const BLOCK: usize = 4096;

impl BlockSum {
    pub fn new() -> Self {
        BlockSum {
            blocks: Vec::new(),
            current: 0.0,
            count: 0,
        }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        self.current += v;
        self.count += 1;
        if self.count == BLOCK {
            self.blocks.push(self.current);
            self.current = 0.0;
            self.count = 0;
        }
    }

    pub fn total(mut self) -> f64 {
        if self.count > 0 {
            self.blocks.push(self.current);
        }
        pairwise_sum(&self.blocks)
    }
}

pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

fn sq_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let t = x - y;
        s += t * t;
    }
    s
}

/// Direct row-flip energy `sum_j sum_x ||f(x + row_j) - f(x)||_2^2`.
pub fn row_flip_energy(f: &FunctionTable) -> f64 {
    let len = f.len();
    let mut acc = BlockSum::new();
    for j in 0..f.n {
        let mask = row_mask(f.n, j) as usize;
        for x in 0..len {
            acc.add(sq_norm_diff(f.value(x ^ mask), f.value(x)));
        }
    }
    acc.total()
}

/// Spectral form of [`row_flip_energy`]: `2^(n^2+2) * sum_m odd(m) ||coeff(m)||^2`.
pub fn row_flip_energy_spectral(s: &WalshSpectrum) -> f64 {
    let len = table_len(s.n);
    let mut acc = BlockSum::new();
    for m in 0..len {
        let odd = mask_profile(s.n, m as u128).odd_count;
        if odd > 0 {
            let c = s.coeff(m);
            acc.add(odd as f64 * c.iter().map(|v| v * v).sum::<f64>());
        }
    }
    acc.total() * (len as f64) * 4.0
}

/// Direct selector energy `sum_k sum_x ||f(x + sel_k) - f(x)||_2^2` over all
/// `n^n` selectors.
pub fn selector_energy(f: &FunctionTable) -> f64 {
    let len = f.len();
    let mut acc = BlockSum::new();
    for (_, mask) in SelectorIter::new(f.n) {
        let mask = mask as usize;
        for x in 0..len {
            acc.add(sq_norm_diff(f.value(x ^ mask), f.value(x)));
        }
    }
    acc.total()
}

/// Spectral form of [`selector_energy`]:
/// `2^(n^2+1) * sum_m (n^n - prod_j (n - 2|A_j|)) ||coeff(m)||^2`.
pub fn selector_energy_spectral(s: &WalshSpectrum) -> f64 {
    let len = table_len(s.n);
    let mut acc = BlockSum::new();
    for m in 0..len {
        let mult = mask_profile(s.n, m as u128).selector_multiplier;
        if mult != 0 {
            let c = s.coeff(m);
            acc.add(mult as f64 * c.iter().map(|v| v * v).sum::<f64>());
        }
    }
    acc.total() * (len as f64) * 2.0
}

/// Direct y-averaged selector energy
/// `sum_k sum_x sum_{y in F_2^n} ||f(x + sum_j y_j e_{j k_j}) - f(x)||_2^2`.
pub fn y_selector_energy(f: &FunctionTable) -> f64 {
    let len = f.len();
    let n = f.n;
    let mut acc = BlockSum::new();
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
                acc.add(sq_norm_diff(f.value(x ^ mask), f.value(x)));
            }
        }
    }
    acc.total()
}

/// Spectral form of [`y_selector_energy`]:
/// `2^(n^2+1) * sum_m 2^n (n^n - prod_j (n - |A_j|)) ||coeff(m)||^2`.
pub fn y_selector_energy_spectral(s: &WalshSpectrum) -> f64 {
    let len = table_len(s.n);
    let mut acc = BlockSum::new();
    for m in 0..len {
        let mult = mask_profile(s.n, m as u128).y_multiplier;
        if mult != 0 {
            let c = s.coeff(m);
            acc.add(mult as f64 * c.iter().map(|v| v * v).sum::<f64>());
        }
    }
    acc.total() * (len as f64) * 2.0
}

/// Relative Parseval gap between `sum_m ||coeff(m)||^2` and
/// `2^(-n^2) sum_x ||f(x)||^2`.
pub fn parseval_gap(f: &FunctionTable, s: &WalshSpectrum) -> f64 {
    let mut lhs = BlockSum::new();
    for c in s.coeffs.iter() {
        lhs.add(c * c);
    }
    let mut rhs = BlockSum::new();
    for v in f.values.iter() {
        rhs.add(v * v);
    }
    let lhs = lhs.total();
    let rhs = rhs.total() / f.len() as f64;
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}

/// Per-mask counting data for the spectral inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaskProfile {
    /// `|{j : |A_j| odd}|`.
    pub odd_count: u32,
    /// `n^n - prod_j (n - 2|A_j|)`, the selector character count
    /// `sum_k (1 - (-1)^(sum_j 1_{A_j}(k_j)))`.
    pub selector_multiplier: i128,
    /// `2^n (n^n - prod_j (n - |A_j|))`, the y-averaged analogue
    /// `sum_{k,y} (1 - (-1)^(sum_j y_j 1_{A_j}(k_j)))`.
    pub y_multiplier: i128,
}

/// Row-subset sizes and multipliers of the character mask `m`.
pub fn mask_profile(n: usize, m: u128) -> MaskProfile {
    let row = (1u128 << n) - 1;
    let mut odd_count = 0u32;
    let mut prod_sel: i128 = 1;
    let mut prod_y: i128 = 1;
    for j in 0..n {
        let a = ((m >> (j * n)) & row).count_ones() as i128;
        if a % 2 == 1 {
            odd_count += 1;
        }
        prod_sel *= n as i128 - 2 * a;
        prod_y *= n as i128 - a;
    }
    let n_pow = (n as i128).pow(n as u32);
    MaskProfile {
        odd_count,
        selector_multiplier: n_pow - prod_sel,
        y_multiplier: (1i128 << n) * (n_pow - prod_y),
    }
}

/// Result of checking, for every mask, the even-n counting bound
/// `selector_multiplier(m) >= (n^n - (n-2)^n) / n * odd_count(m)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountingBoundReport {
    pub n: usize,
    /// All masks satisfy the bound.
    pub holds: bool,
    /// Minimum of `n * selector_multiplier - (n^n - (n-2)^n) * odd_count`
    /// (the bound cross-multiplied by `n`, an exact integer).
    pub min_scaled_slack: i128,
    /// A mask attaining the minimum; ties broken toward masks with at
    /// least one odd row, then by smallest mask.
    pub argmin_mask: u128,
    pub masks_checked: u64,
    /// Masks with scaled slack exactly zero.
    pub equality_count: u64,
}

/// Streams all `2^(n^2)` masks and verifies the even-n counting bound.
pub fn even_n_counting_bound(n: usize) -> Result<CountingBoundReport> {
    even_n_counting_bound_with_cap(n, DEFAULT_TABLE_SIDE_CAP.max(4))
}

pub fn even_n_counting_bound_with_cap(n: usize, side_cap: usize) -> Result<CountingBoundReport> {
    if n % 2 != 0 || n == 0 {
        return Err(Error::RequiresEvenSide {
            n,
            hint: "the counting bound needs |n - 2|A_j|| <= n - 2 on odd rows",
        });
    }
    if n > side_cap || n > MAX_SIDE {
        return Err(Error::SizeLimit {
            what: "mask streaming",
            requested: 1u128 << (n * n),
            cap: 1u128 << (side_cap.min(MAX_SIDE) * side_cap.min(MAX_SIDE)),
        });
    }
    let len: u128 = 1u128 << (n * n);
    let factor = (n as i128).pow(n as u32) - (n as i128 - 2).pow(n as u32);
    let mut min_slack = i128::MAX;
    let mut argmin: u128 = 0;
    let mut argmin_has_odd = false;
    let mut equality_count = 0u64;
    let mut m: u128 = 0;
    while m < len {
        let prof = mask_profile(n, m);
        let slack = n as i128 * prof.selector_multiplier - factor * prof.odd_count as i128;
        if slack == 0 {
            equality_count += 1;
        }
        let has_odd = prof.odd_count > 0;
        if slack < min_slack || (slack == min_slack && has_odd && !argmin_has_odd) {
            min_slack = slack;
            argmin = m;
            argmin_has_odd = has_odd;
        }
        m += 1;
    }
    Ok(CountingBoundReport {
        n,
        holds: min_slack >= 0,
        min_scaled_slack: min_slack,
        argmin_mask: argmin,
        masks_checked: len as u64,
        equality_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Slow reference transform straight from the definition.
    fn naive_forward(f: &FunctionTable) -> Vec<f64> {
        let len = f.len();
        let mut out = vec![0.0; len * f.d];
        for m in 0..len {
            for x in 0..len {
                let sign = if ((m & x).count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                for c in 0..f.d {
                    out[m * f.d + c] += sign * f.value(x)[c];
                }
            }
        }
        for v in out.iter_mut() {
            *v /= len as f64;
        }
        out
    }

    #[test]
    fn forward_matches_naive_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = FunctionTable::random(2, 3, &mut rng).unwrap();
        let s = wht_forward(&f);
        let expect = naive_forward(&f);
        for (a, b) in s.coeffs().iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_function_spectrum() {
        let f = FunctionTable::constant(2, &[3.5]).unwrap();
        let s = wht_forward(&f);
        assert!((s.coeff(0)[0] - 3.5).abs() < 1e-15);
        for m in 1..16 {
            assert!(s.coeff(m)[0].abs() < 1e-15);
        }
        assert_eq!(row_flip_energy(&f), 0.0);
        assert_eq!(selector_energy(&f), 0.0);
    }

    #[test]
    fn single_character_spectrum() {
        // f(x) = (-1)^{x_00} at n=2: coeff at mask 1 is 1, others 0
        let f = FunctionTable::from_fn(2, 1, |p| {
            vec![if p.entry(0, 0) { -1.0 } else { 1.0 }]
        })
        .unwrap();
        let s = wht_forward(&f);
        for m in 0..16 {
            let want = if m == 1 { 1.0 } else { 0.0 };
            assert!((s.coeff(m)[0] - want).abs() < 1e-15, "mask {m}");
        }
    }

    #[test]
    fn zero_and_delta_spectra_invert() {
        let zero = WalshSpectrum {
            n: 2,
            d: 1,
            coeffs: vec![0.0; 16],
        };
        assert!(wht_inverse(&zero).values().iter().all(|&v| v == 0.0));

        let mut coeffs = vec![0.0; 16];
        coeffs[0] = 1.0;
        let delta = WalshSpectrum { n: 2, d: 1, coeffs };
        assert!(wht_inverse(&delta).values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn energies_match_spectral_forms_n3() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let f = FunctionTable::random(3, 2, &mut rng).unwrap();
            let s = wht_forward(&f);
            let (a, b) = (row_flip_energy(&f), row_flip_energy_spectral(&s));
            assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()));
            let (a, b) = (selector_energy(&f), selector_energy_spectral(&s));
            assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()));
        }
    }

    #[test]
    fn y_energy_matches_spectral_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in [2usize, 3] {
            let f = FunctionTable::random(n, 1, &mut rng).unwrap();
            let s = wht_forward(&f);
            let (a, b) = (y_selector_energy(&f), y_selector_energy_spectral(&s));
            assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()), "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn selector_multiplier_matches_brute_force() {
        // settles the multiplier formulas against direct enumeration over k
        // (and y for the averaged form) at n = 2, 3
        for n in [2usize, 3] {
            let len = 1u128 << (n * n);
            let mut m = 0u128;
            while m < len {
                let prof = mask_profile(n, m);
                let mut direct_sel: i128 = 0;
                let mut direct_y: i128 = 0;
                for (k, _) in SelectorIter::new(n) {
                    let hits: u32 = k
                        .iter()
                        .enumerate()
                        .map(|(j, &kj)| ((m >> (j * n + kj)) & 1) as u32)
                        .sum();
                    direct_sel += if hits % 2 == 1 { 2 } else { 0 };
                    for y in 0..(1u32 << n) {
                        let yhits: u32 = k
                            .iter()
                            .enumerate()
                            .map(|(j, &kj)| ((y >> j) & 1) * ((m >> (j * n + kj)) & 1) as u32)
                            .sum();
                        direct_y += if yhits % 2 == 1 { 2 } else { 0 };
                    }
                }
                assert_eq!(direct_sel, prof.selector_multiplier, "n={n} mask={m}");
                assert_eq!(direct_y, prof.y_multiplier, "n={n} mask={m}");
                m += 1;
            }
        }
    }

    #[test]
    fn counting_bound_examples_n2() {
        // A_1 = {1}, A_2 = {} -> multiplier 4, bound (4/2)*1 = 2
        let prof = mask_profile(2, 0b01);
        assert_eq!(prof.selector_multiplier, 4);
        assert_eq!(prof.odd_count, 1);
        // mask 0: 0 >= 0
        let prof0 = mask_profile(2, 0);
        assert_eq!(prof0.selector_multiplier, 0);
        assert_eq!(prof0.odd_count, 0);
        // diagonal mask: equality 4 >= (4/2)*2
        let diag = mask_profile(2, 0b1001);
        assert_eq!(diag.selector_multiplier, 4);
        assert_eq!(diag.odd_count, 2);

        let report = even_n_counting_bound(2).unwrap();
        assert!(report.holds);
        assert_eq!(report.min_scaled_slack, 0);
        assert_eq!(report.masks_checked, 16);
        assert!(matches!(even_n_counting_bound(3), Err(Error::RequiresEvenSide { .. })));
    }

    #[test]
    fn binary_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = FunctionTable::random(2, 2, &mut rng).unwrap();
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        let g = FunctionTable::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(f, g);
        assert!(FunctionTable::read_binary(&mut &b"XXXX"[..]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip_is_identity(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = FunctionTable::random(2, 1, &mut rng).unwrap();
            let back = wht_inverse(&wht_forward(&f));
            for (a, b) in f.values().iter().zip(back.values().iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn parseval_holds(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = FunctionTable::random(2, 2, &mut rng).unwrap();
            let s = wht_forward(&f);
            prop_assert!(parseval_gap(&f, &s) < 1e-10);
        }

        #[test]
        fn energies_match_spectral_n2(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = FunctionTable::random(2, 1, &mut rng).unwrap();
            let s = wht_forward(&f);
            let (a, b) = (row_flip_energy(&f), row_flip_energy_spectral(&s));
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300));
            let (a, b) = (selector_energy(&f), selector_energy_spectral(&s));
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300));
        }

        #[test]
        fn energy_parallelogram(seed in 0u64..1000) {
            // E(f+g) + E(f-g) = 2E(f) + 2E(g) for the quadratic forms
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = FunctionTable::random(2, 1, &mut rng).unwrap();
            let g = FunctionTable::random(2, 1, &mut rng).unwrap();
            let plus: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect();
            let minus: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| a - b).collect();
            let fp = FunctionTable::new(2, 1, plus).unwrap();
            let fm = FunctionTable::new(2, 1, minus).unwrap();
            for energy in [row_flip_energy, selector_energy] {
                let lhs = energy(&fp) + energy(&fm);
                let rhs = 2.0 * (energy(&f) + energy(&g));
                prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()).max(1e-300));
            }
        }
    }
}
