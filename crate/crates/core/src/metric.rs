//! Finite metric spaces with an exactness flag, and constructors for the
//! hypercube product spaces fed to the cut-cone LP.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{pq_norm_of_profile, PqParams};

/// Default cap on the number of points accepted by the LP-facing
/// constructors (`2^(N-1) - 1` cut variables must stay manageable).
pub const DEFAULT_LP_POINT_CAP: usize = 16;

/// A labeled finite metric space. Distances are stored as `f64`; when
/// `exact` is set every entry is an exactly representable rational (in
/// practice an integer) and exact arithmetic paths may convert it back
/// via `BigRational::from_float` without loss.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
    exact: bool,
    provenance: String,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
    exact: bool,
    provenance: String,
}

impl TryFrom<SpaceRepr> for FiniteMetricSpace {
    type Error = Error;
    fn try_from(r: SpaceRepr) -> Result<Self> {
        FiniteMetricSpace::from_matrix(r.labels, &r.dist, r.exact, r.provenance)
    }
}

impl From<FiniteMetricSpace> for SpaceRepr {
    fn from(s: FiniteMetricSpace) -> Self {
        let n = s.len();
        SpaceRepr {
            dist: (0..n)
                .map(|i| (0..n).map(|j| s.distance(i, j)).collect())
                .collect(),
            labels: s.labels,
            exact: s.exact,
            provenance: s.provenance,
        }
    }
}

const FLOAT_METRIC_TOL: f64 = 1e-12;

impl FiniteMetricSpace {
    /// Validates and stores a full distance matrix. Exact spaces are checked
    /// with zero tolerance (via rational arithmetic), float spaces with a
    /// `1e-12` relative tolerance.
    pub fn from_matrix(
        labels: Vec<String>,
        dist: &[Vec<f64>],
        exact: bool,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMetric(format!(
                "distance matrix must be {n}x{n} to match labels"
            )));
        }
        let mut flat = vec![0.0; n * n];
        for (i, row) in dist.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "entry ({i},{j}) = {v} is not a finite nonnegative distance"
                    )));
                }
                flat[i * n + j] = v;
            }
        }
        let space = FiniteMetricSpace {
            labels,
            dist: flat,
            exact,
            provenance: provenance.into(),
        };
        space.validate()?;
        Ok(space)
    }

    fn validate(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            if self.distance(i, i) != 0.0 {
                return Err(Error::InvalidMetric(format!("nonzero diagonal at {i}")));
            }
        }
        if self.exact {
            let r: Vec<BigRational> = self
                .dist
                .iter()
                .map(|&v| BigRational::from_float(v).expect("finite"))
                .collect();
            for i in 0..n {
                for j in (i + 1)..n {
                    if r[i * n + j] != r[j * n + i] {
                        return Err(Error::InvalidMetric(format!("asymmetry at ({i},{j})")));
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if r[i * n + j] > &r[i * n + k] + &r[k * n + j] {
                            return Err(Error::InvalidMetric(format!(
                                "triangle violation d({i},{j}) > d({i},{k}) + d({k},{j})"
                            )));
                        }
                    }
                }
            }
        } else {
            for i in 0..n {
                for j in (i + 1)..n {
                    let (a, b) = (self.distance(i, j), self.distance(j, i));
                    if (a - b).abs() > FLOAT_METRIC_TOL * a.abs().max(b.abs()).max(1.0) {
                        return Err(Error::InvalidMetric(format!("asymmetry at ({i},{j})")));
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let slack = self.distance(i, k) + self.distance(k, j) - self.distance(i, j);
                        let scale = self.distance(i, j).max(1.0);
                        if slack < -FLOAT_METRIC_TOL * scale {
                            return Err(Error::InvalidMetric(format!(
                                "triangle violation d({i},{j}) > d({i},{k}) + d({k},{j})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    /// Exact rational value of `d(i, j)`; faithful when `is_exact()`.
    pub fn rational_distance(&self, i: usize, j: usize) -> BigRational {
        BigRational::from_float(self.distance(i, j)).expect("finite distance")
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// The subspace induced on the given point indices.
    pub fn restrict(&self, indices: &[usize]) -> Result<FiniteMetricSpace> {
        if indices.iter().any(|&i| i >= self.len()) {
            return Err(Error::invalid_param("indices", "point index out of range"));
        }
        let matrix: Vec<Vec<f64>> = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.distance(i, j)).collect())
            .collect();
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        FiniteMetricSpace::from_matrix(
            labels,
            &matrix,
            self.exact,
            format!("subspace of {}", self.provenance),
        )
    }

    /// The alpha-snowflake: every distance raised to `alpha` in `(0, 1]`.
    /// Stays a metric by subadditivity of `t^alpha`.
    pub fn snowflake(&self, alpha: f64) -> Result<FiniteMetricSpace> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid_param(
                "alpha",
                format!("{alpha} not in (0, 1]"),
            ));
        }
        if alpha == 1.0 {
            return Ok(self.clone());
        }
        let n = self.len();
        let matrix: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.distance(i, j).powf(alpha)).collect())
            .collect();
        FiniteMetricSpace::from_matrix(
            self.labels.clone(),
            &matrix,
            false,
            format!("snowflake(alpha={alpha}) of {}", self.provenance),
        )
    }
}

/// Snowflake as a free operation, mirroring the LP module surface.
pub fn snowflake_space(space: &FiniteMetricSpace, alpha: f64) -> Result<FiniteMetricSpace> {
    space.snowflake(alpha)
}

fn product_distance_is_exact(rows: usize, cols: usize, params: &PqParams) -> bool {
    // Rational for all pairs exactly in these degenerate shapes: row Hamming
    // weights are integers, so irrationality can only enter through the
    // 1/p and 1/q roots.
    (params.p == 1.0 && params.q == 1.0)
        || (rows == 1 && (params.p == 1.0 || cols == 1))
        || (cols == 1 && params.q == 1.0)
        || rows * cols == 1
}

/// The `l_q^rows(F_2^cols, ||.||_p)` product space as an explicit metric
/// space: all `2^(rows*cols)` bit matrices with the row-then-q metric.
pub fn product_space(
    rows: usize,
    cols: usize,
    params: &PqParams,
    point_cap: usize,
) -> Result<FiniteMetricSpace> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid_param("rows/cols", "must be positive"));
    }
    let bits = rows * cols;
    if bits > 63 {
        return Err(Error::invalid_param("rows/cols", "more than 63 cells"));
    }
    let count = 1usize << bits;
    if count > point_cap {
        return Err(Error::SizeLimit {
            what: "product space materialization",
            requested: count as u128,
            cap: point_cap as u128,
        });
    }
    let exact = product_distance_is_exact(rows, cols, params);
    let labels: Vec<String> = (0..count).map(|i| format!("{i:0width$b}", width = bits)).collect();
    let row_bits = (1u64 << cols) - 1;
    let mut matrix = vec![vec![0.0; count]; count];
    let mut profile = vec![0u32; rows];
    for x in 0..count {
        for y in (x + 1)..count {
            let diff = (x ^ y) as u64;
            for (j, slot) in profile.iter_mut().enumerate() {
                *slot = ((diff >> (j * cols)) & row_bits).count_ones();
            }
            let d = if exact {
                // all exact shapes reduce to integer-valued sums
                exact_product_distance(&profile, params)
            } else {
                pq_norm_of_profile(&profile, params)
            };
            matrix[x][y] = d;
            matrix[y][x] = d;
        }
    }
    FiniteMetricSpace::from_matrix(
        labels,
        &matrix,
        exact,
        format!("l_q^{rows}(F_2^{cols}) p={} q={}", params.p, params.q),
    )
}

fn exact_product_distance(profile: &[u32], params: &PqParams) -> f64 {
    if profile.len() == 1 {
        let h = profile[0];
        // single row: h^(1/p); exact shapes have p = 1 or h <= 1
        if params.p == 1.0 || h <= 1 {
            h as f64
        } else {
            unreachable!("non-exact shape routed to exact kernel")
        }
    } else {
        // q = 1 with 0/1-valued row norms, or p = q = 1: plain sums
        profile
            .iter()
            .map(|&h| if params.p == 1.0 { h as f64 } else { (h > 0) as u32 as f64 })
            .sum()
    }
}

/// Square case `l_q^n(F_2^n, ||.||_p)` on `M_n(F_2)`.
pub fn materialize_space(n: usize, params: &PqParams, point_cap: usize) -> Result<FiniteMetricSpace> {
    product_space(n, n, params, point_cap)
}

/// The Hamming cube `F_2^m` (an `l_1` metric on `2^m` points).
pub fn hamming_cube(m: usize, point_cap: usize) -> Result<FiniteMetricSpace> {
    let mut space = product_space(1, m, &PqParams::new(1.0, 1.0)?, point_cap)?;
    space.provenance = format!("hamming_cube({m})");
    Ok(space)
}
