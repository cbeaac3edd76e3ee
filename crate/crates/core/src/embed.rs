//! Explicit embedding constructions: snowflake embeddings into Hilbert
//! space by classical scaling, and the finite-scale map of
//! `l_2(l_1)`-points into `l_p` for `p >= 4`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{pq_distance, MatrixPoint, PqParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetNorm {
    L2,
    Lp(f64),
}

/// An explicit embedding with its full achieved-versus-intended distance
/// accounting. The error is reported, never hidden.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub target_norm: TargetNorm,
    pub coordinates: Vec<Vec<f64>>,
    pub achieved: Vec<Vec<f64>>,
    pub intended: Vec<Vec<f64>>,
    pub max_rel_error: f64,
    /// Smallest eigenvalue of the centered Gram matrix (of the Schoenberg
    /// leg, for the composed map).
    pub gram_min_eigenvalue: f64,
    pub gram_trace: f64,
}

fn max_rel_error(achieved: &[Vec<f64>], intended: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (ar, ir) in achieved.iter().zip(intended.iter()) {
        for (&a, &i) in ar.iter().zip(ir.iter()) {
            let denom = i.abs().max(1e-12);
            worst = worst.max((a - i).abs() / denom);
        }
    }
    worst
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Classical-scaling (double centering) embedding of the beta-snowflake of
/// a Euclidean point set: the returned coordinates realize `d^beta` in
/// `l_2`. For `beta <= 1` the centered Gram matrix of `d^(2 beta)` is
/// positive semidefinite; a genuinely negative spectrum means the input
/// distances were not of negative type and is a hard error, not something
/// to clip away.
pub fn schoenberg_embed(points: &[Vec<f64>], beta: f64) -> Result<EmbeddingResult> {
    if points.is_empty() {
        return Err(Error::invalid_param("points", "need at least one point"));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid_param("points", "inconsistent dimensions"));
    }
    let n = points.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(&points[i], &points[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    schoenberg_embed_from_distances(&dist, beta)
}

/// Same construction from an explicit distance matrix. Fails with
/// [`Error::NotPositiveSemidefinite`] when `d^beta` is not Euclidean,
/// e.g. for a non-negative-type metric at `beta = 1`.
pub fn schoenberg_embed_from_distances(dist: &[Vec<f64>], beta: f64) -> Result<EmbeddingResult> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::invalid_param("beta", format!("{beta} not in (0, 1]")));
    }
    let n = dist.len();
    if n == 0 || dist.iter().any(|row| row.len() != n) {
        return Err(Error::invalid_param("dist", "matrix must be square and nonempty"));
    }
    let intended: Vec<Vec<f64>> = dist
        .iter()
        .map(|row| row.iter().map(|&d| d.powf(beta)).collect())
        .collect();

    // G = -1/2 J D2 J with J the centering projection
    let d2 = DMatrix::from_fn(n, n, |i, j| intended[i][j] * intended[i][j]);
    let ones = DMatrix::from_element(n, n, 1.0 / n as f64);
    let j = DMatrix::identity(n, n) - ones;
    let gram = -0.5 * (&j * d2 * &j);
    let trace = gram.trace();

    if trace.abs() < 1e-14 {
        // all points coincide
        let coordinates = vec![vec![0.0]; n];
        let achieved = vec![vec![0.0; n]; n];
        return Ok(EmbeddingResult {
            target_norm: TargetNorm::L2,
            coordinates,
            achieved,
            intended,
            max_rel_error: 0.0,
            gram_min_eigenvalue: 0.0,
            gram_trace: 0.0,
        });
    }

    let eig = gram.symmetric_eigen();
    let psd_tol = 1e-9 * trace.max(0.0) + 1e-14 * trace.abs();
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig < -psd_tol {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min_eig,
            threshold: -psd_tol,
        });
    }

    let kept: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 0.0).collect();
    let coordinates: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            kept.iter()
                .map(|&k| eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt())
                .collect()
        })
        .collect();

    let mut achieved = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(&coordinates[i], &coordinates[j]);
            achieved[i][j] = d;
            achieved[j][i] = d;
        }
    }
    let err = max_rel_error(&achieved, &intended);
    Ok(EmbeddingResult {
        target_norm: TargetNorm::L2,
        coordinates,
        achieved,
        intended,
        max_rel_error: err,
        gram_min_eigenvalue: min_eig,
        gram_trace: trace,
    })
}

/// `E |g|^p` for a standard Gaussian: `2^(p/2) Gamma((p+1)/2) / sqrt(pi)`.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    2f64.powf(p / 2.0) * statrs::function::gamma::gamma((p + 1.0) / 2.0)
        / std::f64::consts::PI.sqrt()
}

/// Finite-scale rendering of the `l_2(l_1) -> l_p` embedding for
/// `p >= 4`, composing three maps per row: the identity on 0/1 rows
/// (realizing `sqrt(Hamming)` in `l_2`), the Schoenberg snowflake with
/// exponent `4/p`, and a Monte-Carlo `l_2 -> l_p^m` isometry from `m`
/// i.i.d. standard Gaussian functionals scaled by
/// `(E|g|^p)^(-1/p) m^(-1/p)`. Target distances are
/// `d_{l_2(l_1)}(x, y)^(2/p)`; the reported error comes from the sampling
/// leg only and shrinks as `m` grows.
pub fn fp_embed(
    points: &[MatrixPoint],
    p: f64,
    m: usize,
    seed: u64,
) -> Result<EmbeddingResult> {
    if !(p >= 4.0) {
        return Err(Error::invalid_param(
            "p",
            "the snowflake exponent 4/p must lie in (0, 1], so p >= 4",
        ));
    }
    if m == 0 {
        return Err(Error::invalid_param("m", "need at least one sample functional"));
    }
    let Some(first) = points.first() else {
        return Err(Error::invalid_param("points", "need at least one point"));
    };
    let n = first.n();
    if points.iter().any(|pt| pt.n() != n) {
        return Err(Error::DimensionMismatch {
            left: n,
            right: points.iter().map(|pt| pt.n()).find(|&m| m != n).unwrap_or(n),
        });
    }

    // distinct rows across all points and row positions
    let mut row_masks: Vec<u32> = Vec::new();
    let mut row_of = vec![vec![0usize; n]; points.len()];
    for (pi, pt) in points.iter().enumerate() {
        for j in 0..n {
            let mask = ((pt.index() >> (j * n)) & ((1u128 << n) - 1)) as u32;
            let idx = match row_masks.iter().position(|&r| r == mask) {
                Some(idx) => idx,
                None => {
                    row_masks.push(mask);
                    row_masks.len() - 1
                }
            };
            row_of[pi][j] = idx;
        }
    }
    let row_vectors: Vec<Vec<f64>> = row_masks
        .iter()
        .map(|&mask| (0..n).map(|k| ((mask >> k) & 1) as f64).collect())
        .collect();

    // rows under sqrt(Hamming) are Euclidean as 0/1 vectors; snowflake to
    // exponent 4/p in l_2
    let sigma = schoenberg_embed(&row_vectors, 4.0 / p)?;
    let sdim = sigma.coordinates[0].len();

    // Monte-Carlo l_2 -> l_p^m leg (Box-Muller Gaussians)
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussians = vec![0.0f64; m * sdim];
    let mut iter = gaussians.iter_mut();
    loop {
        let Some(slot) = iter.next() else { break };
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        *slot = r * angle.cos();
        if let Some(slot2) = iter.next() {
            *slot2 = r * angle.sin();
        } else {
            break;
        }
    }
    let scale = gaussian_abs_moment(p).powf(1.0 / p) * (m as f64).powf(1.0 / p);
    let embedded_rows: Vec<Vec<f64>> = sigma
        .coordinates
        .iter()
        .map(|u| {
            (0..m)
                .map(|i| {
                    let dot: f64 = (0..sdim).map(|c| gaussians[i * sdim + c] * u[c]).sum();
                    dot / scale
                })
                .collect()
        })
        .collect();

    let coordinates: Vec<Vec<f64>> = row_of
        .iter()
        .map(|rows| {
            let mut v = Vec::with_capacity(n * m);
            for &r in rows {
                v.extend_from_slice(&embedded_rows[r]);
            }
            v
        })
        .collect();

    let params = PqParams::new(1.0, 2.0)?;
    let np = points.len();
    let mut intended = vec![vec![0.0; np]; np];
    let mut achieved = vec![vec![0.0; np]; np];
    for i in 0..np {
        for j in (i + 1)..np {
            let d = pq_distance(&points[i], &points[j], &params)?;
            intended[i][j] = d.powf(2.0 / p);
            intended[j][i] = intended[i][j];
            let a: f64 = coordinates[i]
                .iter()
                .zip(coordinates[j].iter())
                .map(|(x, y)| (x - y).abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p);
            achieved[i][j] = a;
            achieved[j][i] = a;
        }
    }
    let err = max_rel_error(&achieved, &intended);
    Ok(EmbeddingResult {
        target_norm: TargetNorm::Lp(p),
        coordinates,
        achieved,
        intended,
        max_rel_error: err,
        gram_min_eigenvalue: sigma.gram_min_eigenvalue,
        gram_trace: sigma.gram_trace,
    })
}
