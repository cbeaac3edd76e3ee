//! Exact linear programming over the cut cone: isometric `l_1`-embeddability
//! and exact minimal `L_1` distortion of small finite metric spaces, with
//! primal witnesses and independently re-checkable dual certificates.
//!
//! A nonnegative combination of cut semimetrics is exactly an
//! `l_1`-embeddable semimetric, so membership of `d` in the cut cone is a
//! feasibility LP and the minimal distortion is the LP
//! `min D : d <= sum_S w_S delta_S <= D d, w >= 0`. Instances up to 8
//! points run an exact rational simplex; up to 16 points a revised float
//! simplex with iterative refinement and a certified duality gap.

mod simplex;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ks::ratio_to_f64;
use crate::metric::FiniteMetricSpace;
pub use crate::metric::snowflake_space;
use simplex::{solve_exact, solve_float, CutLp, ExactOutcome, FloatOutcome, LpKind};

/// Largest instance accepted: `2^(N-1) - 1` cut variables.
pub const MAX_LP_POINTS: usize = 16;

/// Largest instance solved in exact rational arithmetic.
pub const MAX_EXACT_POINTS: usize = 8;

/// Feasibility tolerance for float verdicts.
pub const FLOAT_EPS: f64 = 1e-7;

/// A cut semimetric on `n_points` labeled points: `delta_S(x, y) = 1` iff
/// exactly one of `x, y` lies in the subset. Canonical form excludes
/// point 0 (a set and its complement induce the same semimetric).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CutMetric {
    /// Bit `t` holds point `t + 1`; point 0 is never a member.
    pub subset: u32,
}

impl CutMetric {
    /// Canonicalizes an arbitrary member bitmask over points `0..n_points`
    /// (bit `i` = point `i`): complements it if it contains point 0.
    pub fn canonical(members: u32, n_points: usize) -> Result<Self> {
        if n_points < 2 || n_points > MAX_LP_POINTS {
            return Err(Error::invalid_param(
                "n_points",
                format!("{n_points} not in 2..={MAX_LP_POINTS}"),
            ));
        }
        let all = (1u32 << n_points) - 1;
        if members & !all != 0 {
            return Err(Error::invalid_param("members", "bit beyond point count"));
        }
        let members = if members & 1 == 1 { !members & all } else { members };
        if members == 0 {
            return Err(Error::invalid_param(
                "members",
                "cut must separate something (empty or full set given)",
            ));
        }
        Ok(CutMetric {
            subset: members >> 1,
        })
    }

    pub fn evaluate(&self, a: usize, b: usize) -> f64 {
        if CutLp::delta(self.subset, a, b) {
            1.0
        } else {
            0.0
        }
    }
}

/// One weighted cut of a primal witness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutWeight {
    /// Canonical subset mask (bit `t` = point `t + 1`).
    pub subset: u32,
    pub weight: f64,
    /// Exact rational weight when solved in exact mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

/// Nonnegative combination of cuts witnessing `l_1`-embeddability (or the
/// expansion side of a distortion bound).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutCombination {
    pub n_points: usize,
    pub exact: bool,
    pub weights: Vec<CutWeight>,
    /// `max_pairs |sum_S w_S delta_S - d|` when re-expanded against the
    /// target metric (0 in exact mode).
    pub max_residual: f64,
}

impl CutCombination {
    /// Re-expands the combination into its induced semimetric, pair by pair.
    pub fn expand(&self) -> Vec<Vec<f64>> {
        let n = self.n_points;
        let mut out = vec![vec![0.0; n]; n];
        for w in &self.weights {
            for a in 0..n {
                for b in (a + 1)..n {
                    if CutLp::delta(w.subset, a, b) {
                        out[a][b] += w.weight;
                        out[b][a] += w.weight;
                    }
                }
            }
        }
        out
    }
}

/// Dual ray proving non-membership in the cut cone: `y . delta_S <= 0`
/// for every cut while `y . d > 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparatingFunctional {
    pub n_points: usize,
    pub pairs: Vec<(usize, usize)>,
    pub coefficients: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<String>>,
    /// `y . d` (positive).
    pub separation: f64,
    /// `max_S y . delta_S` re-checked over every cut (<= tolerance).
    pub max_cut_value: f64,
}

pub enum EmbeddabilityOutcome {
    Embeddable(CutCombination),
    NotEmbeddable(SeparatingFunctional),
}

/// Weighted pair family `(mu, nu)` exported from the distortion LP dual:
/// `sum mu delta_S <= sum nu delta_S` for every cut, hence
/// `E_mu ||f(x)-f(y)|| <= E_nu ||f(x)-f(y)||` for every `f` into `L_1`,
/// and the ratio of the same expectations in the source metric is a lower
/// bound on `c_1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualWitness {
    pub n_points: usize,
    /// `(a, b, weight)` triples; the "must expand" side.
    pub mu: Vec<(usize, usize, f64)>,
    /// The "contract" side.
    pub nu: Vec<(usize, usize, f64)>,
    /// `sum mu d / sum nu d`.
    pub value: f64,
}

/// Result of independently re-checking a [`DualWitness`] against every cut.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifiedDual {
    /// Certified lower bound `sum mu d / sum nu d`.
    pub value: f64,
    /// `max_S (sum mu delta_S - sum nu delta_S)`; must be <= tolerance.
    pub max_cut_violation: f64,
    pub min_weight: f64,
}

/// Lower/upper distortion bounds with their witnesses.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistortionCertificate {
    pub space: String,
    pub n_points: usize,
    pub exact: bool,
    pub lower: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_exact: Option<String>,
    pub lower_provenance: String,
    pub upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_exact: Option<String>,
    pub upper_provenance: String,
    /// `|primal - dual|` plus residuals in float mode; exactly 0 in exact
    /// mode.
    pub duality_gap: f64,
    pub dual_witness: DualWitness,
    pub cut_witness: CutCombination,
    pub iterations: usize,
}

fn check_size(space: &FiniteMetricSpace) -> Result<()> {
    if space.is_empty() {
        return Err(Error::invalid_param("space", "empty space"));
    }
    if space.len() > MAX_LP_POINTS {
        return Err(Error::SizeLimit {
            what: "cut-cone LP",
            requested: space.len() as u128,
            cap: MAX_LP_POINTS as u128,
        });
    }
    Ok(())
}

fn pair_distances(space: &FiniteMetricSpace) -> (Vec<(usize, usize)>, Vec<f64>) {
    let n = space.len();
    let mut pairs = Vec::new();
    let mut d = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push((a, b));
            d.push(space.distance(a, b));
        }
    }
    (pairs, d)
}

fn rational_pair_distances(space: &FiniteMetricSpace) -> Vec<BigRational> {
    let n = space.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            out.push(space.rational_distance(a, b));
        }
    }
    out
}

fn use_exact(space: &FiniteMetricSpace) -> bool {
    space.is_exact() && space.len() <= MAX_EXACT_POINTS
}

fn collect_cut_weights_exact(
    lp: &CutLp,
    basis: &[usize],
    x: &[BigRational],
) -> Vec<(u32, BigRational)> {
    let mut weights: Vec<(u32, BigRational)> = basis
        .iter()
        .zip(x.iter())
        .filter(|(&col, v)| col < lp.n_cuts() && v.is_positive())
        .map(|(&col, v)| (CutLp::cut_mask(col), v.clone()))
        .collect();
    weights.sort_unstable_by_key(|(m, _)| *m);
    weights
}

fn collect_cut_weights_float(lp: &CutLp, basis: &[usize], x: &[f64]) -> Vec<(u32, f64)> {
    let mut weights: Vec<(u32, f64)> = basis
        .iter()
        .zip(x.iter())
        .filter(|(&col, &v)| col < lp.n_cuts() && v > 1e-12)
        .map(|(&col, &v)| (CutLp::cut_mask(col), v))
        .collect();
    weights.sort_unstable_by_key(|(m, _)| *m);
    weights
}

fn expansion_residual(lp: &CutLp, weights: &[(u32, f64)], d: &[f64]) -> f64 {
    let mut achieved = vec![0.0; lp.n_pairs()];
    for &(mask, w) in weights {
        for (i, &(a, b)) in lp.pairs.iter().enumerate() {
            if CutLp::delta(mask, a, b) {
                achieved[i] += w;
            }
        }
    }
    achieved
        .iter()
        .zip(d.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Decides isometric `l_1`-embeddability: a nonnegative cut combination
/// reproducing `d` exactly (rational input, <= 8 points) or within
/// [`FLOAT_EPS`] (float mode), else a separating functional.
pub fn l1_embeddable(space: &FiniteMetricSpace) -> Result<EmbeddabilityOutcome> {
    check_size(space)?;
    if space.len() == 1 {
        return Ok(EmbeddabilityOutcome::Embeddable(CutCombination {
            n_points: 1,
            exact: true,
            weights: vec![],
            max_residual: 0.0,
        }));
    }
    let (pairs, d) = pair_distances(space);
    let lp = CutLp::new(space.len(), d.clone(), LpKind::Feasibility);

    if use_exact(space) {
        let dr = rational_pair_distances(space);
        match solve_exact(&lp, &dr)? {
            ExactOutcome::Optimal(sol) => {
                let exact_weights = collect_cut_weights_exact(&lp, &sol.basis, &sol.x);
                // exactness check: the expansion must reproduce d
                let mut achieved = vec![BigRational::zero(); lp.n_pairs()];
                for (mask, w) in &exact_weights {
                    for (i, &(a, b)) in lp.pairs.iter().enumerate() {
                        if CutLp::delta(*mask, a, b) {
                            achieved[i] += w;
                        }
                    }
                }
                for (i, want) in dr.iter().enumerate() {
                    if &achieved[i] != want {
                        return Err(Error::Lp(format!(
                            "exact expansion mismatch on pair {i}"
                        )));
                    }
                }
                let weights = exact_weights
                    .into_iter()
                    .map(|(subset, w)| CutWeight {
                        subset,
                        weight: ratio_to_f64(&w),
                        exact: Some(w.to_string()),
                    })
                    .collect();
                Ok(EmbeddabilityOutcome::Embeddable(CutCombination {
                    n_points: space.len(),
                    exact: true,
                    weights,
                    max_residual: 0.0,
                }))
            }
            ExactOutcome::Infeasible { y, objective, .. } => {
                if !objective.is_positive() {
                    return Err(Error::Lp("phase-1 reported infeasible at zero objective".into()));
                }
                // re-check the Farkas certificate over every cut
                let mut max_cut = BigRational::zero();
                for col in 0..lp.n_cuts() {
                    let mask = CutLp::cut_mask(col);
                    let mut dot = BigRational::zero();
                    for (i, &(a, b)) in lp.pairs.iter().enumerate() {
                        if CutLp::delta(mask, a, b) {
                            dot += &y[i];
                        }
                    }
                    if dot > max_cut {
                        max_cut = dot;
                    }
                }
                if max_cut.is_positive() {
                    return Err(Error::Lp("separating functional failed re-check".into()));
                }
                let mut separation = BigRational::zero();
                for (yi, di) in y.iter().zip(dr.iter()) {
                    separation += yi * di;
                }
                if !separation.is_positive() {
                    return Err(Error::Lp("separating functional does not separate".into()));
                }
                Ok(EmbeddabilityOutcome::NotEmbeddable(SeparatingFunctional {
                    n_points: space.len(),
                    pairs,
                    coefficients: y.iter().map(ratio_to_f64).collect(),
                    exact: Some(y.iter().map(|v| v.to_string()).collect()),
                    separation: ratio_to_f64(&separation),
                    max_cut_value: 0.0,
                }))
            }
        }
    } else {
        match solve_float(&lp)? {
            FloatOutcome::Optimal(sol) => {
                let weights = collect_cut_weights_float(&lp, &sol.basis, &sol.x);
                let max_residual = expansion_residual(&lp, &weights, &d);
                if max_residual > FLOAT_EPS {
                    return Err(Error::Lp(format!(
                        "feasible basis fails epsilon check: residual {max_residual}"
                    )));
                }
                Ok(EmbeddabilityOutcome::Embeddable(CutCombination {
                    n_points: space.len(),
                    exact: false,
                    weights: weights
                        .into_iter()
                        .map(|(subset, weight)| CutWeight {
                            subset,
                            weight,
                            exact: None,
                        })
                        .collect(),
                    max_residual,
                }))
            }
            FloatOutcome::Infeasible { y, objective, .. } => {
                // normalize to y . d = 1 and re-check over every cut
                let yd: f64 = y.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
                if yd <= 0.0 {
                    return Err(Error::Lp(format!(
                        "phase-1 ray does not separate (objective {objective})"
                    )));
                }
                let y: Vec<f64> = y.iter().map(|v| v / yd).collect();
                let mut max_cut = f64::NEG_INFINITY;
                for col in 0..lp.n_cuts() {
                    let mask = CutLp::cut_mask(col);
                    let mut dot = 0.0;
                    for (i, &(a, b)) in lp.pairs.iter().enumerate() {
                        if CutLp::delta(mask, a, b) {
                            dot += y[i];
                        }
                    }
                    max_cut = max_cut.max(dot);
                }
                if max_cut > FLOAT_EPS {
                    return Err(Error::Lp(format!(
                        "separating functional failed re-check: max cut value {max_cut}"
                    )));
                }
                Ok(EmbeddabilityOutcome::NotEmbeddable(SeparatingFunctional {
                    n_points: space.len(),
                    pairs,
                    coefficients: y,
                    exact: None,
                    separation: 1.0,
                    max_cut_value: max_cut.max(0.0),
                }))
            }
        }
    }
}

/// Independently re-checks a dual witness: nonnegative weights, the cut
/// inequality `sum mu delta_S <= sum nu delta_S` for every canonical cut,
/// and recomputes the certified ratio from the space's own distances.
pub fn verify_dual_witness(
    space: &FiniteMetricSpace,
    witness: &DualWitness,
    tol: f64,
) -> Result<VerifiedDual> {
    check_size(space)?;
    let n = space.len();
    if witness.n_points != n {
        return Err(Error::DimensionMismatch {
            left: witness.n_points,
            right: n,
        });
    }
    let mut min_weight = f64::INFINITY;
    for &(_, _, w) in witness.mu.iter().chain(witness.nu.iter()) {
        min_weight = min_weight.min(w);
        if w < -tol {
            return Err(Error::Lp(format!("negative dual weight {w}")));
        }
    }
    let scale: f64 = witness
        .nu
        .iter()
        .map(|&(_, _, w)| w.abs())
        .sum::<f64>()
        .max(1.0);
    let mut max_violation = f64::NEG_INFINITY;
    let total = 1u32 << (n - 1);
    for mask in 1..total {
        let mut lhs = 0.0;
        for &(a, b, w) in &witness.mu {
            if CutLp::delta(mask, a, b) {
                lhs += w;
            }
        }
        let mut rhs = 0.0;
        for &(a, b, w) in &witness.nu {
            if CutLp::delta(mask, a, b) {
                rhs += w;
            }
        }
        let violation = lhs - rhs;
        max_violation = max_violation.max(violation);
        if violation > tol * scale {
            return Err(Error::Lp(format!(
                "dual witness violates cut {mask}: {lhs} > {rhs}"
            )));
        }
    }
    let mu_d: f64 = witness
        .mu
        .iter()
        .map(|&(a, b, w)| w * space.distance(a, b))
        .sum();
    let nu_d: f64 = witness
        .nu
        .iter()
        .map(|&(a, b, w)| w * space.distance(a, b))
        .sum();
    if nu_d <= 0.0 {
        return Err(Error::ZeroDenominator("dual witness nu-expectation"));
    }
    Ok(VerifiedDual {
        value: mu_d / nu_d,
        max_cut_violation: max_violation,
        min_weight,
    })
}

fn trivial_certificate(space: &FiniteMetricSpace) -> DistortionCertificate {
    DistortionCertificate {
        space: space.provenance().to_string(),
        n_points: space.len(),
        exact: true,
        lower: 1.0,
        lower_exact: Some("1".into()),
        lower_provenance: "trivial (distortion is at least 1)".into(),
        upper: 1.0,
        upper_exact: Some("1".into()),
        upper_provenance: "degenerate space".into(),
        duality_gap: 0.0,
        dual_witness: DualWitness {
            n_points: space.len(),
            mu: vec![],
            nu: vec![],
            value: 1.0,
        },
        cut_witness: CutCombination {
            n_points: space.len(),
            exact: true,
            weights: vec![],
            max_residual: 0.0,
        },
        iterations: 0,
    }
}

/// Largest violation of the normalized sandwich
/// `d <= sum w_S delta_S <= upper * d`, pair by pair.
fn sandwich_violation(lp: &CutLp, weights: &[(u32, f64)], d: &[f64], upper: f64) -> f64 {
    let mut achieved = vec![0.0; lp.n_pairs()];
    for &(mask, w) in weights {
        for (i, &(a, b)) in lp.pairs.iter().enumerate() {
            if CutLp::delta(mask, a, b) {
                achieved[i] += w;
            }
        }
    }
    achieved
        .iter()
        .zip(d.iter())
        .map(|(&got, &want)| (want - got).max(got - upper * want).max(0.0))
        .fold(0.0, f64::max)
}

/// Exact minimal `L_1` distortion `c_1(space)` via the cut-cone LP
/// `max t : t d <= sum w_S delta_S <= d, w >= 0` (so `c_1 = 1/t`), with
/// the rescaled primal cut combination as the upper witness and the
/// verified LP dual as a Poincaré-type lower witness.
pub fn c1_distortion(space: &FiniteMetricSpace) -> Result<DistortionCertificate> {
    check_size(space)?;
    let n = space.len();
    let (pairs, d) = pair_distances(space);
    if n == 1 || d.iter().all(|&v| v == 0.0) {
        return Ok(trivial_certificate(space));
    }
    let lp = CutLp::new(n, d.clone(), LpKind::Distortion);
    let p = lp.n_pairs();

    if use_exact(space) {
        let dr = rational_pair_distances(space);
        let sol = match solve_exact(&lp, &dr)? {
            ExactOutcome::Optimal(sol) => sol,
            ExactOutcome::Infeasible { .. } => {
                return Err(Error::Lp("distortion LP cannot be infeasible".into()))
            }
        };
        let t_star = -sol.objective.clone();
        if !t_star.is_positive() {
            return Err(Error::Lp("distortion LP closed at t = 0".into()));
        }
        let distortion = t_star.recip();
        // rescale weights so the witness satisfies d <= sum w delta <= D d
        let exact_weights: Vec<(u32, BigRational)> =
            collect_cut_weights_exact(&lp, &sol.basis, &sol.x)
                .into_iter()
                .map(|(mask, w)| (mask, w / &t_star))
                .collect();
        let weights: Vec<CutWeight> = exact_weights
            .iter()
            .map(|(subset, w)| CutWeight {
                subset: *subset,
                weight: ratio_to_f64(w),
                exact: Some(w.to_string()),
            })
            .collect();
        let float_weights: Vec<(u32, f64)> =
            weights.iter().map(|w| (w.subset, w.weight)).collect();
        let dual_witness = DualWitness {
            n_points: n,
            mu: pairs
                .iter()
                .zip(sol.y[..p].iter())
                .map(|(&(a, b), w)| (a, b, -ratio_to_f64(w)))
                .collect(),
            nu: pairs
                .iter()
                .zip(sol.y[p..].iter())
                .map(|(&(a, b), w)| (a, b, -ratio_to_f64(w)))
                .collect(),
            value: ratio_to_f64(&distortion),
        };
        let verified = verify_dual_witness(space, &dual_witness, 1e-9)?;
        let value = ratio_to_f64(&distortion);
        Ok(DistortionCertificate {
            space: space.provenance().to_string(),
            n_points: n,
            exact: true,
            lower: value.max(1.0),
            lower_exact: Some(distortion.to_string()),
            lower_provenance: "exact LP dual (verified Poincaré functional)".into(),
            upper: value,
            upper_exact: Some(distortion.to_string()),
            upper_provenance: "exact LP primal cut combination".into(),
            duality_gap: 0.0,
            dual_witness: DualWitness {
                value: verified.value,
                ..dual_witness
            },
            cut_witness: CutCombination {
                n_points: n,
                exact: true,
                max_residual: sandwich_violation(&lp, &float_weights, &d, value),
                weights,
            },
            iterations: sol.iterations,
        })
    } else {
        let sol = match solve_float(&lp)? {
            FloatOutcome::Optimal(sol) => sol,
            FloatOutcome::Infeasible { .. } => {
                return Err(Error::Lp("distortion LP cannot be infeasible".into()))
            }
        };
        let t_star = -sol.objective;
        if t_star <= 0.0 {
            return Err(Error::Lp("distortion LP closed at t = 0".into()));
        }
        let upper = 1.0 / t_star;
        let weights: Vec<(u32, f64)> = collect_cut_weights_float(&lp, &sol.basis, &sol.x)
            .into_iter()
            .map(|(mask, w)| (mask, w / t_star))
            .collect();
        let dual_witness = DualWitness {
            n_points: n,
            mu: pairs
                .iter()
                .zip(sol.y[..p].iter())
                .map(|(&(a, b), &w)| (a, b, (-w).max(0.0)))
                .collect(),
            nu: pairs
                .iter()
                .zip(sol.y[p..].iter())
                .map(|(&(a, b), &w)| (a, b, (-w).max(0.0)))
                .collect(),
            value: upper,
        };
        let verified = verify_dual_witness(space, &dual_witness, 1e-6)?;
        // the LP-level gap lives in t units; dD = dt / t^2
        let gap = (upper - verified.value)
            .abs()
            .max(sol.duality_gap / (t_star * t_star))
            + sol.primal_residual
            + sol.dual_residual;
        Ok(DistortionCertificate {
            space: space.provenance().to_string(),
            n_points: n,
            exact: false,
            lower: verified.value.max(1.0),
            lower_exact: None,
            lower_provenance: "float LP dual (verified Poincaré functional)".into(),
            upper,
            upper_exact: None,
            upper_provenance: "float LP primal cut combination".into(),
            duality_gap: gap,
            dual_witness: DualWitness {
                value: verified.value,
                ..dual_witness
            },
            cut_witness: CutCombination {
                n_points: n,
                exact: false,
                max_residual: sandwich_violation(&lp, &weights, &d, upper),
                weights: weights
                    .into_iter()
                    .map(|(subset, weight)| CutWeight {
                        subset,
                        weight,
                        exact: None,
                    })
                    .collect(),
            },
            iterations: sol.iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{hamming_cube, materialize_space, product_space};
    use crate::space::PqParams;

    #[test]
    fn cut_metric_canonicalization() {
        // {0, 2} over 4 points complements to {1, 3} -> bits 0 and 2
        let c = CutMetric::canonical(0b0101, 4).unwrap();
        assert_eq!(c.subset, 0b101);
        assert_eq!(c.evaluate(0, 1), 1.0);
        assert_eq!(c.evaluate(1, 3), 0.0);
        assert!(CutMetric::canonical(0, 4).is_err());
        assert!(CutMetric::canonical(0b1111, 4).is_err());
    }

    #[test]
    fn hamming_cube_is_exactly_embeddable() {
        let cube = hamming_cube(3, 16).unwrap();
        match l1_embeddable(&cube).unwrap() {
            EmbeddabilityOutcome::Embeddable(comb) => {
                assert!(comb.exact);
                assert_eq!(comb.max_residual, 0.0);
                // re-expansion reproduces Hamming distances exactly
                let achieved = comb.expand();
                for a in 0..8usize {
                    for b in 0..8usize {
                        assert_eq!(achieved[a][b], ((a ^ b).count_ones()) as f64);
                    }
                }
            }
            EmbeddabilityOutcome::NotEmbeddable(_) => panic!("hypercube is an l_1 metric"),
        }
    }

    #[test]
    fn snowflaked_cube_is_embeddable_in_float_mode() {
        let cube = hamming_cube(3, 16).unwrap().snowflake(0.5).unwrap();
        match l1_embeddable(&cube).unwrap() {
            EmbeddabilityOutcome::Embeddable(comb) => {
                assert!(!comb.exact);
                assert!(comb.max_residual <= FLOAT_EPS, "residual {}", comb.max_residual);
            }
            EmbeddabilityOutcome::NotEmbeddable(_) => {
                panic!("sqrt-snowflake of an l_1 metric embeds in l_1")
            }
        }
    }

    #[test]
    fn four_point_square_embeds_within_eps() {
        // l_2^2(F_2^1): unit square with diagonal sqrt(2), float mode
        let square = product_space(2, 1, &PqParams::new(1.0, 2.0).unwrap(), 16).unwrap();
        assert_eq!(square.len(), 4);
        match l1_embeddable(&square).unwrap() {
            EmbeddabilityOutcome::Embeddable(comb) => {
                assert!(comb.max_residual <= FLOAT_EPS);
            }
            EmbeddabilityOutcome::NotEmbeddable(_) => {
                panic!("every 4-point metric embeds isometrically in l_1")
            }
        }
    }

    #[test]
    fn k23_is_not_embeddable_with_exact_certificate() {
        let mut dist = vec![vec![0.0; 5]; 5];
        let same = |a: usize, b: usize| (a < 2) == (b < 2);
        for a in 0..5 {
            for b in 0..5 {
                if a != b {
                    dist[a][b] = if same(a, b) { 2.0 } else { 1.0 };
                }
            }
        }
        let labels = (0..5).map(|i| i.to_string()).collect();
        let space = FiniteMetricSpace::from_matrix(labels, &dist, true, "K_23").unwrap();
        match l1_embeddable(&space).unwrap() {
            EmbeddabilityOutcome::Embeddable(_) => panic!("K_23 is not l_1-embeddable"),
            EmbeddabilityOutcome::NotEmbeddable(sep) => {
                assert!(sep.exact.is_some());
                assert!(sep.separation > 0.0);
                assert_eq!(sep.max_cut_value, 0.0);
            }
        }
    }

    #[test]
    fn distortion_one_iff_embeddable_exact() {
        let cube = hamming_cube(2, 16).unwrap();
        let cert = c1_distortion(&cube).unwrap();
        assert!(cert.exact);
        assert_eq!(cert.upper, 1.0);
        assert_eq!(cert.upper_exact.as_deref(), Some("1"));
        assert_eq!(cert.duality_gap, 0.0);
        assert!(matches!(
            l1_embeddable(&cube).unwrap(),
            EmbeddabilityOutcome::Embeddable(_)
        ));
    }

    #[test]
    fn k23_distortion_strictly_above_one() {
        let mut dist = vec![vec![0.0; 5]; 5];
        let same = |a: usize, b: usize| (a < 2) == (b < 2);
        for a in 0..5 {
            for b in 0..5 {
                if a != b {
                    dist[a][b] = if same(a, b) { 2.0 } else { 1.0 };
                }
            }
        }
        let labels = (0..5).map(|i| i.to_string()).collect();
        let space = FiniteMetricSpace::from_matrix(labels, &dist, true, "K_23").unwrap();
        let cert = c1_distortion(&space).unwrap();
        assert!(cert.exact);
        // c_1(K_23) is known to be 4/3 on the 5-point shortest-path metric
        assert_eq!(cert.upper_exact.as_deref(), Some("4/3"));
        assert!((cert.lower - 4.0 / 3.0).abs() < 1e-12);
        // the dual witness re-verifies through the independent checker
        let verified = verify_dual_witness(&space, &cert.dual_witness, 1e-9).unwrap();
        assert!((verified.value - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_point_space_is_trivial() {
        let space = FiniteMetricSpace::from_matrix(
            vec!["a".into(), "b".into()],
            &[vec![0.0, 3.0], vec![3.0, 0.0]],
            true,
            "pair",
        )
        .unwrap();
        let cert = c1_distortion(&space).unwrap();
        assert_eq!(cert.upper, 1.0);
        assert_eq!(cert.lower, 1.0);
    }

    #[test]
    fn subspace_distortion_is_monotone() {
        // c_1 of a subspace never exceeds c_1 of the space
        let space = materialize_space(2, &PqParams::new(1.0, 2.0).unwrap(), 16).unwrap();
        let sub = space.restrict(&[0, 1, 2, 3, 5, 7, 11, 13]).unwrap();
        let sub_cert = c1_distortion(&sub).unwrap();
        // full-space value is the frozen anchor (1 + sqrt 2)/2
        let full = (1.0 + 2f64.sqrt()) / 2.0;
        assert!(
            sub_cert.upper <= full + 1e-6,
            "subspace distortion {} exceeds full-space {full}",
            sub_cert.upper
        );
        assert!(sub_cert.lower >= 1.0 - 1e-9);
    }

    #[test]
    fn pythagorean_square_distortion_float() {
        // the 16-point flagship instance: value must land in [1, sqrt(2)]
        let space = materialize_space(2, &PqParams::new(1.0, 2.0).unwrap(), 16).unwrap();
        let cert = c1_distortion(&space).unwrap();
        assert!(!cert.exact);
        assert!(cert.duality_gap <= FLOAT_EPS, "gap {}", cert.duality_gap);
        assert!(cert.lower >= 1.0 - 1e-9);
        assert!(cert.upper <= 2f64.sqrt() + 1e-9);
        assert!(cert.lower <= cert.upper + 1e-9);
        // primal witness satisfies the sandwich d <= expansion <= D d
        assert!(cert.cut_witness.max_residual <= 1e-7);
    }
}
