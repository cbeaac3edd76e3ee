//! Hypercube matrix spaces `M_n(F_2)` and the `l_q^n(l_p^n)` metrics on them.
//!
//! A point is an `n x n` bit matrix packed row-major into a `u128`: bit
//! `j*n + k` holds entry `(j, k)`, zero-based. Addition is bitwise XOR, so
//! every point is its own inverse and flips are mask XORs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard representation limit: `n^2` bits must fit a `u128`.
pub const MAX_SIDE: usize = 11;

/// Largest side for which full point enumeration is allowed by default.
pub const DEFAULT_ENUM_SIDE_CAP: usize = 5;

/// Largest side for which dense function tables are allocated by default.
pub const DEFAULT_TABLE_SIDE_CAP: usize = 4;

/// A point of `M_n(F_2)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct MatrixPoint {
    n: usize,
    bits: u128,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    n: usize,
    index: u128,
}

impl TryFrom<PointRepr> for MatrixPoint {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        MatrixPoint::new(r.n, r.index)
    }
}

impl From<MatrixPoint> for PointRepr {
    fn from(p: MatrixPoint) -> Self {
        PointRepr {
            n: p.n,
            index: p.bits,
        }
    }
}

impl std::fmt::Debug for MatrixPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MatrixPoint(n={}, index={})", self.n, self.bits)
    }
}

impl MatrixPoint {
    pub fn new(n: usize, index: u128) -> Result<Self> {
        if n == 0 || n > MAX_SIDE {
            return Err(Error::invalid_param("n", format!("side {n} not in 1..={MAX_SIDE}")));
        }
        let cells = (n * n) as u32;
        if cells < 128 && index >> cells != 0 {
            return Err(Error::invalid_param(
                "index",
                format!("index {index} not below 2^{cells}"),
            ));
        }
        Ok(MatrixPoint { n, bits: index })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The packed row-major index in `[0, 2^(n^2))`.
    pub fn index(&self) -> u128 {
        self.bits
    }

    /// Entry `(j, k)` as a bit.
    pub fn entry(&self, j: usize, k: usize) -> bool {
        debug_assert!(j < self.n && k < self.n);
        (self.bits >> (j * self.n + k)) & 1 == 1
    }

    /// Group addition (bitwise XOR). Panics on side mismatch.
    pub fn add(self, rhs: MatrixPoint) -> MatrixPoint {
        assert_eq!(self.n, rhs.n, "cannot add points of different sides");
        MatrixPoint {
            n: self.n,
            bits: self.bits ^ rhs.bits,
        }
    }

    pub(crate) fn with_bits(n: usize, bits: u128) -> MatrixPoint {
        MatrixPoint { n, bits }
    }

    /// Toggle all `n` entries of row `j`.
    pub fn row_flip(self, j: usize) -> Result<MatrixPoint> {
        if j >= self.n {
            return Err(Error::RowIndexOutOfRange { index: j, n: self.n });
        }
        Ok(MatrixPoint {
            n: self.n,
            bits: self.bits ^ row_mask(self.n, j),
        })
    }

    /// Toggle entry `(j, k[j])` in every row `j`.
    pub fn selector_flip(self, k: &[usize]) -> Result<MatrixPoint> {
        if k.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: k.len(),
                right: self.n,
            });
        }
        let mut bits = self.bits;
        for (j, &kj) in k.iter().enumerate() {
            if kj >= self.n {
                return Err(Error::ColumnIndexOutOfRange { index: kj, n: self.n });
            }
            bits ^= 1u128 << (j * self.n + kj);
        }
        Ok(MatrixPoint { n: self.n, bits })
    }

    /// Hamming weights of the rows of `self + other`.
    pub fn row_hamming_profile(&self, other: &MatrixPoint) -> Result<Vec<u32>> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let diff = self.bits ^ other.bits;
        Ok((0..self.n)
            .map(|j| ((diff >> (j * self.n)) & low_bits(self.n)).count_ones())
            .collect())
    }

    /// Row `j` as a 0/1 coordinate vector in `R^n`.
    pub fn row_vector(&self, j: usize) -> Vec<f64> {
        (0..self.n)
            .map(|k| if self.entry(j, k) { 1.0 } else { 0.0 })
            .collect()
    }
}

#[inline]
fn low_bits(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// XOR mask that toggles all of row `j`.
#[inline]
pub fn row_mask(n: usize, j: usize) -> u128 {
    low_bits(n) << (j * n)
}

/// XOR mask of the selector `k`: one toggled entry per row.
pub fn selector_mask(n: usize, k: &[usize]) -> u128 {
    debug_assert_eq!(k.len(), n);
    k.iter()
        .enumerate()
        .fold(0u128, |m, (j, &kj)| m | (1u128 << (j * n + kj)))
}

/// Number of points of `M_n(F_2)`.
pub fn point_count(n: usize) -> u128 {
    1u128 << (n * n)
}

/// All points of `M_n(F_2)` in increasing index order.
pub fn enumerate_points(n: usize) -> Result<impl Iterator<Item = MatrixPoint>> {
    enumerate_points_with_cap(n, DEFAULT_ENUM_SIDE_CAP)
}

pub fn enumerate_points_with_cap(
    n: usize,
    side_cap: usize,
) -> Result<impl Iterator<Item = MatrixPoint>> {
    if n == 0 || n > MAX_SIDE {
        return Err(Error::invalid_param("n", format!("side {n} not in 1..={MAX_SIDE}")));
    }
    if n > side_cap {
        return Err(Error::SizeLimit {
            what: "point enumeration",
            requested: point_count(n),
            cap: point_count(side_cap.min(MAX_SIDE)),
        });
    }
    let total = point_count(n);
    Ok((0..total).map(move |i| MatrixPoint { n, bits: i }))
}

/// Iterates all `n^n` selectors `k` in mixed-radix (odometer) order,
/// yielding the selector vector together with its XOR mask.
pub struct SelectorIter {
    n: usize,
    k: Vec<usize>,
    done: bool,
}

impl SelectorIter {
    pub fn new(n: usize) -> Self {
        SelectorIter {
            n,
            k: vec![0; n],
            done: n == 0,
        }
    }
}

impl Iterator for SelectorIter {
    type Item = (Vec<usize>, u128);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = (self.k.clone(), selector_mask(self.n, &self.k));
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == self.n {
                self.done = true;
                break;
            }
            self.k[pos] += 1;
            if self.k[pos] < self.n {
                break;
            }
            self.k[pos] = 0;
            pos += 1;
        }
        Some(item)
    }
}

/// Count of selectors, `n^n`.
pub fn selector_count(n: usize) -> u128 {
    (n as u128).pow(n as u32)
}

/// Exponent pair for the `l_q^n(F_2^n, ||.||_p)` metric. Infinity encodes the
/// max norm on the corresponding layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PqParams {
    pub p: f64,
    pub q: f64,
}

impl PqParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(v > 0.0) {
                return Err(Error::invalid_param(name, format!("{v} not in (0, inf]")));
            }
        }
        Ok(PqParams { p, q })
    }

    pub fn is_p_max(&self) -> bool {
        self.p.is_infinite()
    }

    pub fn is_q_max(&self) -> bool {
        self.q.is_infinite()
    }
}

/// `(sum_j h_j^(q/p))^(1/q)` over a row-Hamming profile. On 0/1 rows the
/// row p-norm is `h^(1/p)`, so this is the full `l_q^n(l_p^n)` distance.
pub fn pq_norm_of_profile(profile: &[u32], params: &PqParams) -> f64 {
    let row_norm = |h: u32| -> f64 {
        if h == 0 {
            0.0
        } else if params.is_p_max() {
            1.0
        } else {
            (h as f64).powf(1.0 / params.p)
        }
    };
    if params.is_q_max() {
        profile.iter().map(|&h| row_norm(h)).fold(0.0, f64::max)
    } else {
        let sum: f64 = profile.iter().map(|&h| row_norm(h).powf(params.q)).sum();
        sum.powf(1.0 / params.q)
    }
}

/// Distance between two points of `M_n(F_2)` under `l_q^n(l_p^n)`.
pub fn pq_distance(x: &MatrixPoint, y: &MatrixPoint, params: &PqParams) -> Result<f64> {
    let profile = x.row_hamming_profile(y)?;
    Ok(pq_norm_of_profile(&profile, params))
}

/// Total Hamming distance (all `n^2` cells).
pub fn hamming_distance(x: &MatrixPoint, y: &MatrixPoint) -> Result<u32> {
    if x.n != y.n {
        return Err(Error::DimensionMismatch { left: x.n, right: y.n });
    }
    Ok((x.bits ^ y.bits).count_ones())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_points(1).unwrap().count(), 2);
        assert_eq!(enumerate_points(2).unwrap().count(), 16);
        assert_eq!(enumerate_points(3).unwrap().count(), 512);
    }

    #[test]
    fn enumeration_in_index_order() {
        let idx: Vec<u128> = enumerate_points(2).unwrap().map(|p| p.index()).collect();
        assert_eq!(idx, (0..16).collect::<Vec<u128>>());
    }

    #[test]
    fn enumeration_cap_enforced() {
        assert!(matches!(
            enumerate_points(6),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn row_flip_examples() {
        let zero = MatrixPoint::zero(2).unwrap();
        assert_eq!(zero.row_flip(0).unwrap().index(), 3);
        assert_eq!(zero.row_flip(1).unwrap().index(), 12);
        let x = MatrixPoint::new(2, 3).unwrap();
        assert_eq!(x.row_flip(0).unwrap().index(), 0);
        assert!(zero.row_flip(2).is_err());
    }

    #[test]
    fn selector_flip_examples() {
        let zero = MatrixPoint::zero(2).unwrap();
        let x = zero.selector_flip(&[0, 0]).unwrap();
        assert_eq!(x.index(), 5);
        assert_eq!(x.selector_flip(&[0, 0]).unwrap().index(), 0);
        assert!(zero.selector_flip(&[0, 2]).is_err());
        assert!(zero.selector_flip(&[0]).is_err());
    }

    #[test]
    fn pq_distance_examples() {
        let pq12 = PqParams::new(1.0, 2.0).unwrap();
        let zero = MatrixPoint::zero(2).unwrap();
        let row = zero.row_flip(0).unwrap();
        assert_eq!(pq_distance(&zero, &row, &pq12).unwrap(), 2.0);
        let sel = zero.selector_flip(&[0, 0]).unwrap();
        assert!((pq_distance(&zero, &sel, &pq12).unwrap() - 2f64.sqrt()).abs() < 1e-15);

        // n=4, p=2, q=4, one full row differs: (4^2)^(1/4) = 2 = n^(1/p)
        let pq24 = PqParams::new(2.0, 4.0).unwrap();
        let z4 = MatrixPoint::zero(4).unwrap();
        let r4 = z4.row_flip(2).unwrap();
        assert!((pq_distance(&z4, &r4, &pq24).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn max_norm_parameters() {
        let zero = MatrixPoint::zero(2).unwrap();
        let row = zero.row_flip(0).unwrap();
        let pinf = PqParams::new(f64::INFINITY, 2.0).unwrap();
        // row of weight 2 has max-norm 1, other row 0
        assert!((pq_distance(&zero, &row, &pinf).unwrap() - 1.0).abs() < 1e-15);
        let qinf = PqParams::new(1.0, f64::INFINITY).unwrap();
        assert!((pq_distance(&zero, &row, &qinf).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn selector_iter_covers_all() {
        let sels: Vec<_> = SelectorIter::new(2).collect();
        assert_eq!(sels.len(), 4);
        let masks: std::collections::HashSet<u128> = sels.iter().map(|(_, m)| *m).collect();
        assert_eq!(masks.len(), 4);
        assert_eq!(SelectorIter::new(3).count(), 27);
    }

    #[test]
    fn point_serde_round_trip() {
        let p = MatrixPoint::new(3, 273).unwrap();
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(js, r#"{"n":3,"index":273}"#);
        let q: MatrixPoint = serde_json::from_str(&js).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<MatrixPoint>(r#"{"n":1,"index":7}"#).is_err());
    }

    proptest! {
        #[test]
        fn xor_group_laws(a in 0u128..16, b in 0u128..16, c in 0u128..16) {
            let pa = MatrixPoint::new(2, a).unwrap();
            let pb = MatrixPoint::new(2, b).unwrap();
            let pc = MatrixPoint::new(2, c).unwrap();
            prop_assert_eq!(pa.add(pb).add(pc), pa.add(pb.add(pc)));
            prop_assert_eq!(pa.add(MatrixPoint::zero(2).unwrap()), pa);
            prop_assert_eq!(pa.add(pa).index(), 0);
        }

        #[test]
        fn flips_are_involutions(a in 0u128..512, j in 0usize..3) {
            let p = MatrixPoint::new(3, a).unwrap();
            prop_assert_eq!(p.row_flip(j).unwrap().row_flip(j).unwrap(), p);
            let k = [j, (j + 1) % 3, (j + 2) % 3];
            prop_assert_eq!(p.selector_flip(&k).unwrap().selector_flip(&k).unwrap(), p);
        }

        #[test]
        fn distance_translation_invariant(
            a in 0u128..512, b in 0u128..512, z in 0u128..512,
            pi in 0usize..3, qi in 0usize..3,
        ) {
            let ps = [1.0, 2.0, 4.0];
            let params = PqParams::new(ps[pi], ps[qi]).unwrap();
            let (pa, pb, pz) = (
                MatrixPoint::new(3, a).unwrap(),
                MatrixPoint::new(3, b).unwrap(),
                MatrixPoint::new(3, z).unwrap(),
            );
            let d1 = pq_distance(&pa, &pb, &params).unwrap();
            let d2 = pq_distance(&pa.add(pz), &pb.add(pz), &params).unwrap();
            prop_assert!((d1 - d2).abs() <= 1e-12 * d1.max(1.0));
        }

        #[test]
        fn triangle_inequality_n2(
            a in 0u128..16, b in 0u128..16, c in 0u128..16,
            pi in 0usize..2, qi in 0usize..3,
        ) {
            let ps = [1.0, 2.0];
            let qs = [1.0, 2.0, 4.0];
            let params = PqParams::new(ps[pi], qs[qi]).unwrap();
            let (pa, pb, pc) = (
                MatrixPoint::new(2, a).unwrap(),
                MatrixPoint::new(2, b).unwrap(),
                MatrixPoint::new(2, c).unwrap(),
            );
            let dab = pq_distance(&pa, &pb, &params).unwrap();
            let dac = pq_distance(&pa, &pc, &params).unwrap();
            let dcb = pq_distance(&pc, &pb, &params).unwrap();
            prop_assert!(dab <= dac + dcb + 1e-12);
        }

        #[test]
        fn holder_sandwich_pointwise(
            a in 0u128..512, b in 0u128..512, which in 0usize..3,
        ) {
            // l1-snowflake sandwich: H^(1/p) / n^(1/p-1/q) <= d <= H^(1/p)
            let (p, q) = [(1.0, 2.0), (1.0, 4.0), (2.0, 4.0)][which];
            let n = 3.0f64;
            let params = PqParams::new(p, q).unwrap();
            let pa = MatrixPoint::new(3, a).unwrap();
            let pb = MatrixPoint::new(3, b).unwrap();
            let d = pq_distance(&pa, &pb, &params).unwrap();
            let h = hamming_distance(&pa, &pb).unwrap() as f64;
            let upper = h.powf(1.0 / p);
            let lower = upper / n.powf(1.0 / p - 1.0 / q);
            prop_assert!(d <= upper + 1e-12);
            prop_assert!(d >= lower - 1e-12);
        }
    }
}
