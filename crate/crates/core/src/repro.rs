//! The verification driver: every acceptance check as a self-contained
//! criterion with a claim string, computed values, a verdict, and its
//! runtime; plus the distortion summary table.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds::{asymptotic_lower_bound, holder_sandwich};
use crate::cutcone::{c1_distortion, l1_embeddable, EmbeddabilityOutcome, FLOAT_EPS};
use crate::embed::{fp_embed, schoenberg_embed};
use crate::error::Result;
use crate::fourier::{
    even_n_counting_bound, mask_profile, parseval_gap, row_flip_energy, row_flip_energy_spectral,
    selector_energy, selector_energy_spectral, wht_forward, FunctionTable,
};
use crate::ks::{
    character_ks_sides, character_permutation_sides, isoperimetric_exhaustive_n2, ks_sides,
    ks_y_variant_sides, permutation_variant_sides, ratio_to_f64, witness_odd, witness_phi,
    witness_psi,
};
use crate::metric::{hamming_cube, materialize_space, product_space, FiniteMetricSpace};
use crate::space::{enumerate_points, PqParams, SelectorIter};

/// Driver configuration. The seed feeds every randomized criterion; exact
/// criteria ignore it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 2016, threads: 1 }
    }
}

/// One verified claim.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionRow {
    pub id: String,
    /// The mathematical statement being checked, as a formula.
    pub claim: String,
    pub values: serde_json::Value,
    pub pass: bool,
    pub runtime_ms: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReproReport {
    pub seed: u64,
    pub threads: usize,
    pub rows: Vec<CriterionRow>,
    pub all_pass: bool,
}

fn row(
    id: &str,
    claim: &str,
    start: Instant,
    pass: bool,
    values: serde_json::Value,
) -> CriterionRow {
    CriterionRow {
        id: id.to_string(),
        claim: claim.to_string(),
        values,
        pass,
        runtime_ms: start.elapsed().as_millis(),
    }
}

fn fail_row(id: &str, claim: &str, start: Instant, err: &crate::Error) -> CriterionRow {
    row(id, claim, start, false, json!({ "error": err.to_string() }))
}

macro_rules! try_row {
    ($id:expr, $claim:expr, $start:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return fail_row($id, $claim, $start, &err),
        }
    };
}

/// Criterion 1: exhaustive isoperimetric verification over all subsets of
/// `M_2(F_2)`.
pub fn criterion_isoperimetric(_config: &RunConfig) -> CriterionRow {
    let id = "1-isoperimetric-exhaustive";
    let claim = "sum_j |{x in S: x+row_j not in S}| <= [2n/(n^n-(n-2)^n)] sum_k |{x in S: x+sel_k not in S}| for all 2^16 subsets S of M_2(F_2); equality cases include the diagonal-parity half-space";
    let start = Instant::now();
    let sweep = isoperimetric_exhaustive_n2();
    let pass = sweep.violations == 0
        && sweep.subsets_checked == 65536
        && sweep.phi_level_set_is_equality
        && sweep.max_excess <= 0
        && start.elapsed().as_secs() < 30;
    row(
        id,
        claim,
        start,
        pass,
        serde_json::to_value(&sweep).unwrap_or_default(),
    )
}

/// Criterion 2: the diagonal-parity witness attains the sharp factor with
/// exact integer arithmetic at n in {2, 4}.
pub fn criterion_sharpness_witness(_config: &RunConfig) -> CriterionRow {
    let id = "2-sharpness-witness";
    let claim = "phi(x) = (-1)^(sum_j x_jj): LHS = n 2^(n^2+1), RHS = 2^(n^2)(n^n-(n-2)^n), ratio exactly 2n/(n^n-(n-2)^n) at n in {2, 4}";
    let start = Instant::now();
    let mut pass = true;
    let mut values = serde_json::Map::new();
    for n in [2usize, 4] {
        let phi = try_row!(id, claim, start, witness_phi(n));
        let closed = try_row!(id, claim, start, character_ks_sides(&phi, 1));
        let want_lhs = (n as i128) * (1i128 << (n * n + 1));
        let want_rhs = (1i128 << (n * n))
            * ((n as i128).pow(n as u32) - (n as i128 - 2).pow(n as u32));
        let constants = try_row!(id, claim, start, crate::ks::ks_constant(n));
        let ratio_ok = closed.ratio.as_ref() == Some(&constants.unnormalized);
        // direct streamed evaluation over all selector terms
        let table = try_row!(id, claim, start, phi.to_table());
        let report = try_row!(id, claim, start, ks_sides(&table, 1.0));
        let direct_ok = report.exact
            && report.lhs == want_lhs as f64
            && report.rhs == want_rhs as f64
            && report.slack == 0.0
            && report.holds;
        pass &= closed.lhs == want_lhs && closed.rhs == want_rhs && ratio_ok && direct_ok;
        values.insert(
            format!("n{n}"),
            json!({
                "lhs": closed.lhs.to_string(),
                "rhs": closed.rhs.to_string(),
                "ratio": constants.unnormalized.to_string(),
                "direct_streamed_equal": direct_ok,
            }),
        );
    }
    pass &= start.elapsed().as_secs() < 60;
    row(id, claim, start, pass, serde_json::Value::Object(values))
}

/// Criterion 3: the randomized property suite for the standard variant.
pub fn criterion_random_tables(config: &RunConfig) -> CriterionRow {
    let id = "3-random-table-suite";
    let claim = "for random f: M_n(F_2) -> R (entries iid uniform on [-1,1]), sum_j sum_x |df|^theta <= [2n/(n^n-(n-2)^n)] sum_k sum_x |df|^theta at n in {2, 4}, theta in {1, 2}";
    let start = Instant::now();
    let mut violations = 0u64;
    let mut worst_slack = f64::INFINITY;
    let mut checked = 0u64;
    for (n, tables) in [(2usize, 1000usize), (4usize, 100usize)] {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (n as u64));
        for _ in 0..tables {
            let f = match FunctionTable::random(n, 1, &mut rng) {
                Ok(f) => f,
                Err(err) => return fail_row(id, claim, start, &err),
            };
            for theta in [1.0, 2.0] {
                match ks_sides(&f, theta) {
                    Ok(report) => {
                        checked += 1;
                        worst_slack = worst_slack.min(report.slack);
                        if !report.holds {
                            violations += 1;
                        }
                    }
                    Err(err) => return fail_row(id, claim, start, &err),
                }
            }
        }
    }
    let pass = violations == 0 && start.elapsed().as_secs() < 600;
    row(
        id,
        claim,
        start,
        pass,
        json!({
            "checked": checked,
            "violations": violations,
            "min_slack": worst_slack,
        }),
    )
}

/// Criterion 4: spectral identities and Parseval.
pub fn criterion_spectral_identities(config: &RunConfig) -> CriterionRow {
    let id = "4-spectral-identities";
    let claim = "sum_j sum_x (df_row)^2 = 2^(n^2+2) sum_m odd(m) fhat(m)^2 and sum_k sum_x (df_sel)^2 = 2^(n^2+1) sum_m (n^n - prod_j (n-2|A_j|)) fhat(m)^2 within 1e-9 relative; Parseval within 1e-10";
    let start = Instant::now();
    let mut max_energy_gap = 0.0f64;
    let mut max_parseval = 0.0f64;
    for (n, tables) in [(2usize, 100usize), (3usize, 20usize)] {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(n as u64));
        for _ in 0..tables {
            let f = match FunctionTable::random(n, 1, &mut rng) {
                Ok(f) => f,
                Err(err) => return fail_row(id, claim, start, &err),
            };
            let s = wht_forward(&f);
            max_parseval = max_parseval.max(parseval_gap(&f, &s));
            let (a, b) = (row_flip_energy(&f), row_flip_energy_spectral(&s));
            max_energy_gap = max_energy_gap.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
            let (a, b) = (selector_energy(&f), selector_energy_spectral(&s));
            max_energy_gap = max_energy_gap.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
        }
    }
    let pass = max_energy_gap <= 1e-9 && max_parseval <= 1e-10 && start.elapsed().as_secs() < 120;
    row(
        id,
        claim,
        start,
        pass,
        json!({
            "max_energy_rel_gap": max_energy_gap,
            "max_parseval_rel_gap": max_parseval,
        }),
    )
}

/// Criterion 5: the even-n counting bound over every mask.
pub fn criterion_counting_bound(_config: &RunConfig) -> CriterionRow {
    let id = "5-even-n-counting-bound";
    let claim = "n^n - prod_j (n-2|A_j|) >= [(n^n-(n-2)^n)/n] |{j: |A_j| odd}| for every mask at n in {2, 4}; slack exactly 0 at every all-singleton mask";
    let start = Instant::now();
    let mut pass = true;
    let mut values = serde_json::Map::new();
    for n in [2usize, 4] {
        let report = try_row!(id, claim, start, even_n_counting_bound(n));
        // all-singleton masks are exactly the selector masks
        let factor = (n as i128).pow(n as u32) - (n as i128 - 2).pow(n as u32);
        let mut singleton_equalities = true;
        for (_, mask) in SelectorIter::new(n) {
            let prof = mask_profile(n, mask);
            let slack = n as i128 * prof.selector_multiplier - factor * prof.odd_count as i128;
            singleton_equalities &= slack == 0;
        }
        pass &= report.holds && report.min_scaled_slack == 0 && singleton_equalities;
        values.insert(
            format!("n{n}"),
            json!({
                "masks_checked": report.masks_checked,
                "min_scaled_slack": report.min_scaled_slack.to_string(),
                "equality_count": report.equality_count,
                "all_singleton_masks_tight": singleton_equalities,
            }),
        );
    }
    pass &= start.elapsed().as_secs() < 300;
    row(id, claim, start, pass, serde_json::Value::Object(values))
}

/// Criterion 6: the permutation variant fails with K >= n/2, by the
/// closed-form parity classification at n in {4, 6} and cross-checked
/// against full enumeration at n = 4.
pub fn criterion_permutation_failure(_config: &RunConfig) -> CriterionRow {
    let id = "6-permutation-variant-failure";
    let claim = "psi(x) = (-1)^(x_00 + sum_(j>=1,k>=3) x_jk): LHS total = n 2^(n^2+1), permutation RHS total = 2^(n^2+2)(n-1)!, forcing K >= n/2 at n in {4, 6}";
    let start = Instant::now();
    let mut pass = true;
    let mut values = serde_json::Map::new();
    for n in [4usize, 6] {
        let psi = try_row!(id, claim, start, witness_psi(n));
        let sides = try_row!(id, claim, start, character_permutation_sides(&psi));
        let want_lhs = (n as i128) * (1i128 << (n * n + 1));
        let fact: i128 = (1..=(n as i128 - 1)).product();
        let want_rhs = (1i128 << (n * n + 2)) * fact;
        let want_k = BigRational::new(BigInt::from(n as i64), BigInt::from(2));
        pass &= sides.lhs_total == want_lhs
            && sides.rhs_total == want_rhs
            && sides.min_k.as_ref() == Some(&want_k);
        values.insert(
            format!("n{n}"),
            json!({
                "lhs_total": sides.lhs_total.to_string(),
                "rhs_total": sides.rhs_total.to_string(),
                "min_k": sides.min_k.as_ref().map(|k| k.to_string()),
            }),
        );
    }
    // cross-check both paths at n = 4 by full enumeration over x and pi
    let psi4 = try_row!(id, claim, start, witness_psi(4));
    let table = try_row!(id, claim, start, psi4.to_table());
    let report = try_row!(id, claim, start, permutation_variant_sides(&table));
    let closed = try_row!(id, claim, start, character_permutation_sides(&psi4));
    let cross = report.exact
        && report.lhs == closed.lhs_total as f64 / 4.0
        && report.rhs == closed.rhs_total as f64 / 24.0
        && report.min_k == Some(2.0);
    pass &= cross && start.elapsed().as_secs() < 120;
    values.insert("n4_enumeration_cross_check".into(), json!(cross));
    row(id, claim, start, pass, serde_json::Value::Object(values))
}

/// Criterion 7: odd-n degeneracy of the standard variant and the
/// y-averaged rescue.
pub fn criterion_odd_degeneracy(_config: &RunConfig) -> CriterionRow {
    let id = "7-odd-n-degeneracy";
    let claim = "sigma = parity of the first n-1 rows at n = 3: standard selector side vanishes exactly while the row side is positive; the y-averaged variant holds with constant 2/(1-(2/3)^3) = 54/19";
    let start = Instant::now();
    let sigma = try_row!(id, claim, start, witness_odd(3));
    let closed = try_row!(id, claim, start, character_ks_sides(&sigma, 1));
    let table = try_row!(id, claim, start, sigma.to_table());

    // direct selector enumeration: 27 selectors x 512 points
    let mut direct_rhs = 0.0f64;
    let mut direct_lhs = 0.0f64;
    for (_, mask) in SelectorIter::new(3) {
        for x in 0..512usize {
            direct_rhs += (table.value(x ^ mask as usize)[0] - table.value(x)[0]).abs();
        }
    }
    for j in 0..3usize {
        let mask = crate::space::row_mask(3, j) as usize;
        for x in 0..512usize {
            direct_lhs += (table.value(x ^ mask)[0] - table.value(x)[0]).abs();
        }
    }
    let y_report = try_row!(id, claim, start, ks_y_variant_sides(&table, 2.0));
    let pass = closed.rhs == 0
        && closed.lhs == 2 * (1 << 10)
        && direct_rhs == 0.0
        && direct_lhs == 2048.0
        && y_report.holds
        && y_report.rhs > 0.0
        && y_report.constant == "54/19"
        && start.elapsed().as_secs() < 60;
    row(
        id,
        claim,
        start,
        pass,
        json!({
            "standard_lhs": direct_lhs,
            "standard_rhs": direct_rhs,
            "y_variant_constant": y_report.constant,
            "y_variant_holds": y_report.holds,
            "y_lhs": y_report.lhs,
            "y_rhs": y_report.rhs,
        }),
    )
}

fn four_point_metric_from_seed(seed: u64) -> Result<FiniteMetricSpace> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 4usize;
    let mut d = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(1..=9) as f64;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    // shortest-path closure keeps entries integral and restores the
    // triangle inequality
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let labels = (0..n).map(|i| i.to_string()).collect();
    FiniteMetricSpace::from_matrix(labels, &d, true, format!("random 4-point metric (seed {seed})"))
}

/// Criterion 8: the LP suite.
pub fn criterion_lp_suite(_config: &RunConfig) -> CriterionRow {
    let id = "8-cut-cone-lp-suite";
    let claim = "F_2^3 Hamming lies in the cut cone exactly; its sqrt-snowflake is epsilon-feasible (1e-7); c_1(l_2^2(F_2^2)) solves with duality gap <= 1e-7 and value in [1, sqrt 2]; every 4-point metric has D = 1";
    let start = Instant::now();
    let mut values = serde_json::Map::new();
    let mut pass = true;

    let cube = try_row!(id, claim, start, hamming_cube(3, 16));
    match try_row!(id, claim, start, l1_embeddable(&cube)) {
        EmbeddabilityOutcome::Embeddable(comb) => {
            let ok = comb.exact && comb.max_residual == 0.0;
            pass &= ok;
            values.insert("hamming_cube_exact_feasible".into(), json!(ok));
        }
        EmbeddabilityOutcome::NotEmbeddable(_) => {
            pass = false;
            values.insert("hamming_cube_exact_feasible".into(), json!(false));
        }
    }

    let snow = try_row!(id, claim, start, cube.snowflake(0.5));
    match try_row!(id, claim, start, l1_embeddable(&snow)) {
        EmbeddabilityOutcome::Embeddable(comb) => {
            let ok = comb.max_residual <= FLOAT_EPS;
            pass &= ok;
            values.insert(
                "snowflaked_cube_residual".into(),
                json!(comb.max_residual),
            );
        }
        EmbeddabilityOutcome::NotEmbeddable(_) => {
            pass = false;
            values.insert("snowflaked_cube_residual".into(), json!("infeasible"));
        }
    }

    let params = match PqParams::new(1.0, 2.0) {
        Ok(p) => p,
        Err(err) => return fail_row(id, claim, start, &err),
    };
    let pyth = try_row!(id, claim, start, materialize_space(2, &params, 16));
    let cert = try_row!(id, claim, start, c1_distortion(&pyth));
    let pyth_ok = cert.duality_gap <= 1e-7
        && cert.lower >= 1.0 - 1e-9
        && cert.upper <= 2f64.sqrt() + 1e-9
        && cert.lower <= cert.upper + 1e-9;
    pass &= pyth_ok;
    values.insert(
        "pythagorean_square".into(),
        json!({
            "lower": cert.lower,
            "upper": cert.upper,
            "duality_gap": cert.duality_gap,
            "iterations": cert.iterations,
        }),
    );

    // the 4-point square with diagonal sqrt(2), in float mode
    let square = try_row!(id, claim, start, product_space(2, 1, &params, 16));
    let sq_cert = try_row!(id, claim, start, c1_distortion(&square));
    pass &= (sq_cert.upper - 1.0).abs() <= 1e-6;
    values.insert("l2_square_distortion".into(), json!(sq_cert.upper));

    let mut four_point_all_one = true;
    for seed in 0..8u64 {
        let space = try_row!(id, claim, start, four_point_metric_from_seed(seed));
        let cert = try_row!(id, claim, start, c1_distortion(&space));
        four_point_all_one &= cert.exact && cert.upper == 1.0;
    }
    pass &= four_point_all_one;
    values.insert("four_point_metrics_distortion_one".into(), json!(four_point_all_one));

    pass &= start.elapsed().as_secs() < 300;
    row(id, claim, start, pass, serde_json::Value::Object(values))
}

/// Criterion 9: lower/upper sandwich and the limit of the normalized
/// lower-bound coefficient.
pub fn criterion_sandwich(_config: &RunConfig) -> CriterionRow {
    let id = "9-lower-upper-sandwich";
    // the coefficient (1-(1-2/n)^n)/2 starts at 1/2 (n = 2) and decreases
    // monotonically toward its limit (1-e^-2)/2: the reciprocal is the
    // normalized constant, which is the increasing quantity
    let claim = "for p=1, q=2 and n in {2,4,8,16}: lower bound (1-(1-2/n)^n)/2 sqrt(n) <= upper bound sqrt(n); the coefficient is bounded by 1/2, decreases monotonically toward (1-e^-2)/2, and matches its rational closed form within 1e-12";
    let start = Instant::now();
    let params = match PqParams::new(1.0, 2.0) {
        Ok(p) => p,
        Err(err) => return fail_row(id, claim, start, &err),
    };
    let mut pass = true;
    let limit = (1.0 - (-2.0f64).exp()) / 2.0;
    let mut prev_ratio = 0.5f64 + 1e-15;
    let mut rows = Vec::new();
    for n in [2usize, 4, 8, 16] {
        let lower = try_row!(id, claim, start, asymptotic_lower_bound(n, &params));
        let upper = try_row!(id, claim, start, holder_sandwich(n, n, &params)).c1_upper_bound;
        // independent exact evaluation of the coefficient
        let nf = BigInt::from(n as i64);
        let exact = BigRational::new(
            nf.pow(n as u32) - BigInt::from(n as i64 - 2).pow(n as u32),
            BigInt::from(2) * nf.pow(n as u32),
        );
        let coeff = lower / (n as f64).sqrt();
        let exact_f = ratio_to_f64(&exact);
        pass &= lower <= upper + 1e-12;
        pass &= (coeff - exact_f).abs() <= 1e-12;
        pass &= coeff < prev_ratio && coeff <= 0.5 && coeff > limit;
        prev_ratio = coeff;
        rows.push(json!({ "n": n, "lower": lower, "upper": upper, "coefficient": coeff }));
    }
    pass &= prev_ratio - limit < 0.02;
    pass &= start.elapsed().as_millis() < 1000;
    row(id, claim, start, pass, json!({ "rows": rows, "limit": limit }))
}

/// Criterion 10: Schoenberg snowflake embedding and the finite-scale map
/// into `l_4`.
pub fn criterion_embeddings(config: &RunConfig) -> CriterionRow {
    let id = "10-embeddings";
    let claim = "classical scaling realizes d^beta on {0,1}^3 within 1e-8 for beta in {1, 1/2} with Gram spectrum >= -1e-10 trace; the l_2(l_1) -> l_4 map with m = 50000 Gaussian functionals achieves d^(2/p) within 2%";
    let start = Instant::now();
    let cube: Vec<Vec<f64>> = (0..8u32)
        .map(|i| (0..3).map(|b| ((i >> b) & 1) as f64).collect())
        .collect();
    let mut pass = true;
    let mut values = serde_json::Map::new();
    for beta in [1.0, 0.5] {
        let res = try_row!(id, claim, start, schoenberg_embed(&cube, beta));
        let ok = res.max_rel_error <= 1e-8
            && res.gram_min_eigenvalue >= -1e-10 * res.gram_trace;
        pass &= ok;
        values.insert(
            format!("schoenberg_beta_{beta}"),
            json!({
                "max_rel_error": res.max_rel_error,
                "gram_min_eigenvalue": res.gram_min_eigenvalue,
                "gram_trace": res.gram_trace,
            }),
        );
    }
    let points: Vec<_> = match enumerate_points(2) {
        Ok(it) => it.collect(),
        Err(err) => return fail_row(id, claim, start, &err),
    };
    let res = try_row!(id, claim, start, fp_embed(&points, 4.0, 50_000, config.seed));
    pass &= res.max_rel_error <= 0.02;
    values.insert("fp_max_rel_error".into(), json!(res.max_rel_error));
    pass &= start.elapsed().as_secs() < 120;
    row(id, claim, start, pass, serde_json::Value::Object(values))
}

/// Criterion 11: the p > 2 counterexample ratios.
pub fn criterion_p_gt_2(_config: &RunConfig) -> CriterionRow {
    let id = "11-p-gt-2-counterexample";
    let claim = "the linear map into l_p^n(l_2^n) gives per-point sides n^(theta/2) vs n^(theta/p); at p = 4, theta = 1 the ratio is sqrt(2) for n = 4 and 2 for n = 16";
    let start = Instant::now();
    let r4 = try_row!(id, claim, start, crate::bounds::p_gt_2_counterexample(4, 4.0, 1.0));
    let r16 = try_row!(id, claim, start, crate::bounds::p_gt_2_counterexample(16, 4.0, 1.0));
    let pass = (r4.ratio - 2f64.sqrt()).abs() <= 1e-12
        && (r16.ratio - 2.0).abs() <= 1e-12
        && start.elapsed().as_millis() < 1000;
    row(
        id,
        claim,
        start,
        pass,
        json!({ "ratio_n4": r4.ratio, "ratio_n16": r16.ratio }),
    )
}

type Criterion = fn(&RunConfig) -> CriterionRow;

pub const CRITERIA: [(&str, Criterion); 11] = [
    ("1", criterion_isoperimetric),
    ("2", criterion_sharpness_witness),
    ("3", criterion_random_tables),
    ("4", criterion_spectral_identities),
    ("5", criterion_counting_bound),
    ("6", criterion_permutation_failure),
    ("7", criterion_odd_degeneracy),
    ("8", criterion_lp_suite),
    ("9", criterion_sandwich),
    ("10", criterion_embeddings),
    ("11", criterion_p_gt_2),
];

/// Runs the full checklist. Rows are computed independently (optionally on
/// `config.threads` workers) and reported in fixed order; verdicts do not
/// depend on the thread count.
pub fn run_all(config: &RunConfig) -> ReproReport {
    let slots: Mutex<Vec<Option<CriterionRow>>> = Mutex::new(vec![None; CRITERIA.len()]);
    let next = AtomicUsize::new(0);
    let workers = config.threads.max(1).min(CRITERIA.len());
    if workers == 1 {
        let mut rows = Vec::with_capacity(CRITERIA.len());
        for (_, f) in CRITERIA {
            rows.push(f(config));
        }
        let all_pass = rows.iter().all(|r| r.pass);
        return ReproReport {
            seed: config.seed,
            threads: 1,
            rows,
            all_pass,
        };
    }
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= CRITERIA.len() {
                    break;
                }
                let row = CRITERIA[idx].1(config);
                slots.lock().expect("poisoned").get_mut(idx).map(|s| *s = Some(row));
            });
        }
    });
    let rows: Vec<CriterionRow> = slots
        .into_inner()
        .expect("poisoned")
        .into_iter()
        .map(|r| r.expect("all criteria ran"))
        .collect();
    let all_pass = rows.iter().all(|r| r.pass);
    ReproReport {
        seed: config.seed,
        threads: workers,
        rows,
        all_pass,
    }
}

/// One row of the distortion summary table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistortionTableRow {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    /// `(1-(1-2/n)^n)/2 n^(1/p-1/q)`; `None` when `p >= q` (vacuous).
    pub lower: Option<f64>,
    /// `min(n, n)^(1/p-1/q)` from the snowflake sandwich.
    pub upper: Option<f64>,
    /// Exact LP value where the space fits the LP cap (n <= 2).
    pub lp_value: Option<f64>,
    /// `(n^2 log 2)^(1/4)`, the fourth root of the log-cardinality.
    pub log_card_fourth_root: f64,
    pub vacuous: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistortionTable {
    pub rows: Vec<DistortionTableRow>,
}

/// Builds the lower/upper (and small-case exact LP) distortion table for
/// `l_q^n(F_2^n, ||.||_p)`.
pub fn emit_distortion_table(n_list: &[usize], pq_list: &[(f64, f64)]) -> Result<DistortionTable> {
    let mut rows = Vec::new();
    for &n in n_list {
        for &(p, q) in pq_list {
            let params = PqParams::new(p, q)?;
            let vacuous = !(p < q);
            let lower = if vacuous {
                None
            } else {
                Some(asymptotic_lower_bound(n, &params)?)
            };
            let upper = if vacuous {
                None
            } else {
                Some(holder_sandwich(n, n, &params)?.c1_upper_bound)
            };
            let lp_value = if n <= 2 {
                let space = materialize_space(n, &params, 16)?;
                Some(c1_distortion(&space)?.upper)
            } else {
                None
            };
            rows.push(DistortionTableRow {
                n,
                p,
                q,
                lower,
                upper,
                lp_value,
                log_card_fourth_root: ((n * n) as f64 * 2f64.ln()).powf(0.25),
                vacuous,
            });
        }
    }
    Ok(DistortionTable { rows })
}
