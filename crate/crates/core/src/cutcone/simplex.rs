//! Two-phase simplex solvers specialized to cut-cone instances.
//!
//! Columns are never stored: a cut column is regenerated from its subset
//! bitmask, and pricing over all `2^(N-1) - 1` cuts walks a Gray code so
//! each step updates the cut value in `O(N)`.
//!
//! Two solvers share the instance encoding: a dense-tableau rational
//! simplex under Bland's rule (exact verdicts, small instances) and a
//! revised float simplex with an explicit basis inverse, periodic
//! refactorization, and iterative refinement of the final primal/dual
//! systems.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpKind {
    /// Find `w >= 0` with `sum_S w_S delta_S = d` (phase 1 only).
    Feasibility,
    /// Maximize `t` subject to `t d <= sum_S w_S delta_S <= d`, `w >= 0`.
    /// The minimal distortion is `1/t`: fixing the upper Lipschitz side
    /// keeps the slack basis feasible from the start, so no artificial
    /// variables (and no phase 1) are needed.
    Distortion,
}

/// A cut-cone LP instance over `n_points` labeled points.
pub(crate) struct CutLp {
    pub n_points: usize,
    /// All unordered pairs `(a, b)`, `a < b`, in lexicographic order.
    pub pairs: Vec<(usize, usize)>,
    pub d: Vec<f64>,
    pub kind: LpKind,
    pair_index: Vec<usize>,
}

pub(crate) const NO_PAIR: usize = usize::MAX;

impl CutLp {
    pub fn new(n_points: usize, d: Vec<f64>, kind: LpKind) -> Self {
        let mut pairs = Vec::new();
        let mut pair_index = vec![NO_PAIR; n_points * n_points];
        for a in 0..n_points {
            for b in (a + 1)..n_points {
                pair_index[a * n_points + b] = pairs.len();
                pair_index[b * n_points + a] = pairs.len();
                pairs.push((a, b));
            }
        }
        debug_assert_eq!(d.len(), pairs.len());
        CutLp {
            n_points,
            pairs,
            d,
            kind,
            pair_index,
        }
    }

    #[inline]
    pub fn pair_index(&self, a: usize, b: usize) -> usize {
        self.pair_index[a * self.n_points + b]
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Cut subsets are canonicalized to exclude point 0, killing the
    /// `delta_S = delta_complement` duplication: masks over points
    /// `1..n_points`, bit `t` holding point `t + 1`.
    pub fn n_cuts(&self) -> usize {
        (1usize << (self.n_points - 1)) - 1
    }

    #[inline]
    pub fn cut_mask(col: usize) -> u32 {
        (col + 1) as u32
    }

    #[inline]
    pub fn side(mask: u32, point: usize) -> bool {
        point > 0 && (mask >> (point - 1)) & 1 == 1
    }

    #[inline]
    pub fn delta(mask: u32, a: usize, b: usize) -> bool {
        Self::side(mask, a) != Self::side(mask, b)
    }

    pub fn nrows(&self) -> usize {
        match self.kind {
            LpKind::Feasibility => self.n_pairs(),
            LpKind::Distortion => 2 * self.n_pairs(),
        }
    }

    pub fn ncols(&self) -> usize {
        let p = self.n_pairs();
        match self.kind {
            // cuts | artificials
            LpKind::Feasibility => self.n_cuts() + p,
            // cuts | t | s1 | s2
            LpKind::Distortion => self.n_cuts() + 1 + 2 * p,
        }
    }

    pub fn t_col(&self) -> usize {
        debug_assert_eq!(self.kind, LpKind::Distortion);
        self.n_cuts()
    }

    pub fn artificial_start(&self) -> usize {
        match self.kind {
            LpKind::Feasibility => self.n_cuts(),
            LpKind::Distortion => self.ncols(),
        }
    }

    pub fn is_artificial(&self, col: usize) -> bool {
        col >= self.artificial_start()
    }

    /// Row layout. Feasibility: `sum_S w_S delta_S = d` per pair.
    /// Distortion: rows `[0, P)` are the (negated) expansion constraints
    /// `t d_i + s1_i - sum_S w_S delta_S = 0`, rows `[P, 2P)` the
    /// contraction constraints `sum_S w_S delta_S + s2_i = d_i`.
    pub fn b(&self, row: usize) -> f64 {
        let p = self.n_pairs();
        match self.kind {
            LpKind::Feasibility => self.d[row],
            LpKind::Distortion => {
                if row < p {
                    0.0
                } else {
                    self.d[row - p]
                }
            }
        }
    }

    /// Sparse column `(row, coefficient)` entries.
    pub fn column(&self, col: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let p = self.n_pairs();
        let cuts = self.n_cuts();
        if col < cuts {
            let mask = Self::cut_mask(col);
            for (i, &(a, b)) in self.pairs.iter().enumerate() {
                if Self::delta(mask, a, b) {
                    match self.kind {
                        LpKind::Feasibility => out.push((i, 1.0)),
                        LpKind::Distortion => {
                            out.push((i, -1.0));
                            out.push((p + i, 1.0));
                        }
                    }
                }
            }
            out.sort_unstable_by_key(|e| e.0);
            return;
        }
        match self.kind {
            LpKind::Feasibility => {
                // artificial on row col - cuts
                out.push((col - cuts, 1.0));
            }
            LpKind::Distortion => {
                if col == cuts {
                    // t: +d on expansion rows
                    for i in 0..p {
                        if self.d[i] != 0.0 {
                            out.push((i, self.d[i]));
                        }
                    }
                } else if col < cuts + 1 + p {
                    // s1 on expansion rows
                    out.push((col - cuts - 1, 1.0));
                } else {
                    // s2 on contraction rows
                    out.push((p + (col - cuts - 1 - p), 1.0));
                }
            }
        }
    }

    /// Objective coefficient in the given phase (`min c . x`).
    pub fn cost(&self, col: usize, phase: Phase) -> f64 {
        match phase {
            Phase::One => {
                if self.is_artificial(col) {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if self.kind == LpKind::Distortion && col == self.t_col() {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Initial identity basis: artificials for feasibility; `s1`/`s2`
    /// slacks for distortion (feasible at `w = 0`, `t = 0`).
    pub fn initial_basis(&self) -> Vec<usize> {
        let p = self.n_pairs();
        match self.kind {
            LpKind::Feasibility => (0..p).map(|i| self.n_cuts() + i).collect(),
            LpKind::Distortion => {
                let s1 = self.n_cuts() + 1;
                (0..2 * p).map(|i| s1 + i).collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Phase {
    One,
    Two,
}

// ---------------------------------------------------------------------------
// Float revised simplex
// ---------------------------------------------------------------------------

pub(crate) struct FloatSolution {
    pub objective: f64,
    pub basis: Vec<usize>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub duality_gap: f64,
}

pub(crate) enum FloatOutcome {
    Optimal(FloatSolution),
    Infeasible {
        /// Refined phase-1 duals: `y . a_j <= 0` for all structural columns
        /// while `y . b > 0`.
        y: Vec<f64>,
        objective: f64,
    },
}

const PIV_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 5e-8;
const REFACTOR_EVERY: usize = 100;
const STALL_LIMIT: usize = 400;
const POOL_SIZE: usize = 32;
const RESCAN_EVERY: usize = 8;
const IMPROVE_CANDIDATES: usize = 4;
const MAX_ITER: usize = 200_000;

struct FloatState<'a> {
    lp: &'a CutLp,
    m: usize,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    /// Deterministically perturbed right-hand side used while pivoting;
    /// breaks the degenerate plateaus of these highly symmetric instances.
    /// Final solutions are re-extracted against the true `b`.
    pb: Vec<f64>,
    iterations: usize,
}

impl<'a> FloatState<'a> {
    fn new(lp: &'a CutLp) -> Self {
        let m = lp.nrows();
        let basis = lp.initial_basis();
        let mut in_basis = vec![false; lp.ncols()];
        for &j in &basis {
            in_basis[j] = true;
        }
        // initial basis is the identity
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let scale = (0..m).map(|i| lp.b(i).abs()).fold(1.0, f64::max);
        let pb: Vec<f64> = (0..m)
            .map(|i| {
                let golden = 0.618_033_988_749_894_9_f64;
                let u = ((i + 1) as f64 * golden).fract() + 1.0;
                lp.b(i) + 1e-9 * scale * u
            })
            .collect();
        let xb = pb.clone();
        FloatState {
            lp,
            m,
            basis,
            in_basis,
            binv,
            xb,
            pb,
            iterations: 0,
        }
    }

    fn duals(&self, phase: Phase) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &bj) in self.basis.iter().enumerate() {
            let c = self.lp.cost(bj, phase);
            if c != 0.0 {
                for i in 0..m {
                    y[i] += c * self.binv[r * m + i];
                }
            }
        }
        y
    }

    fn objective(&self, phase: Phase) -> f64 {
        self.basis
            .iter()
            .zip(self.xb.iter())
            .map(|(&j, &x)| self.lp.cost(j, phase) * x)
            .sum()
    }

    /// Exact reduced cost of one column from its sparse entries.
    fn reduced_cost(&self, j: usize, y: &[f64], phase: Phase, scratch: &mut Vec<(usize, f64)>) -> f64 {
        self.lp.column(j, scratch);
        let mut r = self.lp.cost(j, phase);
        for &(row, val) in scratch.iter() {
            r -= y[row] * val;
        }
        r
    }

    /// Most negative reduced cost over eligible columns, or the smallest
    /// eligible index in Bland mode. Cut columns are priced with a
    /// Gray-code walk. When `topk` is given, it is filled with up to
    /// [`POOL_SIZE`] good candidates for subsequent minor iterations.
    fn price(
        &self,
        y: &[f64],
        phase: Phase,
        bland: bool,
        mut topk: Option<&mut Vec<(usize, f64)>>,
    ) -> Option<(usize, f64)> {
        let lp = self.lp;
        let p = lp.n_pairs();
        let np = lp.n_points;
        let distortion = lp.kind == LpKind::Distortion;
        // per-pair weight as seen by a cut column (reduced cost of a cut
        // is the negated weighted cut value)
        let mut pair_w = vec![0.0; p];
        for (i, w) in pair_w.iter_mut().enumerate() {
            *w = if distortion { y[p + i] - y[i] } else { y[i] };
        }

        let mut best: Option<(usize, f64)> = None;
        let mut consider = |j: usize, r: f64| {
            if self.in_basis[j] || r >= -OPT_TOL {
                return;
            }
            if phase == Phase::Two && self.lp.is_artificial(j) {
                return;
            }
            if let Some(pool) = topk.as_deref_mut() {
                if pool.len() < POOL_SIZE {
                    pool.push((j, r));
                } else if let Some(worst) = pool
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                    .map(|(i, _)| i)
                {
                    if r < pool[worst].1 {
                        pool[worst] = (j, r);
                    }
                }
            }
            match best {
                None => best = Some((j, r)),
                Some((bj, br)) => {
                    let better = if bland { j < bj } else { r < br || (r == br && j < bj) };
                    if better {
                        best = Some((j, r));
                    }
                }
            }
        };

        // cuts: Gray-code scan, O(N) per mask
        let total = 1u32 << (np - 1);
        let mut side: u32 = 0;
        let mut cutval = 0.0f64;
        for t in 1..total {
            let bit = t.trailing_zeros() as usize;
            let v = bit + 1;
            let v_old_side = (side >> bit) & 1 == 1;
            let mut delta = 0.0;
            for u in 0..np {
                if u == v {
                    continue;
                }
                let w = pair_w[lp.pair_index(u.min(v), u.max(v))];
                if CutLp::side(side, u) == v_old_side {
                    delta += w; // edge becomes separated
                } else {
                    delta -= w;
                }
            }
            side ^= 1 << bit;
            cutval += delta;
            let mask = t ^ (t >> 1);
            debug_assert_eq!(side, mask);
            let j = (mask - 1) as usize;
            consider(j, lp.cost(j, phase) - cutval);
        }

        match lp.kind {
            LpKind::Feasibility => {
                let cuts = lp.n_cuts();
                if phase == Phase::One {
                    for i in 0..p {
                        consider(cuts + i, 1.0 - y[i]);
                    }
                }
            }
            LpKind::Distortion => {
                let cuts = lp.n_cuts();
                // t column: cost - sum_i y[i] d_i on the expansion rows
                let mut yd = 0.0;
                for i in 0..p {
                    yd += y[i] * lp.d[i];
                }
                consider(cuts, lp.cost(cuts, phase) - yd);
                for i in 0..p {
                    consider(cuts + 1 + i, -y[i]); // s1
                    consider(cuts + 1 + p + i, -y[p + i]); // s2
                }
            }
        }
        best
    }

    fn direction(&self, col: usize, scratch: &mut Vec<(usize, f64)>) -> Vec<f64> {
        self.lp.column(col, scratch);
        let m = self.m;
        let mut w = vec![0.0; m];
        for r in 0..m {
            let mut acc = 0.0;
            for &(row, val) in scratch.iter() {
                acc += self.binv[r * m + row] * val;
            }
            w[r] = acc;
        }
        w
    }

    /// Ratio test with a guard that never lets a zero-valued basic
    /// artificial grow in phase 2; degenerate ties are broken
    /// lexicographically on the basis-inverse rows, which prevents cycling
    /// and keeps stalls short on these heavily degenerate instances.
    fn choose_leaving(&self, w: &[f64], phase: Phase) -> Option<usize> {
        if phase == Phase::Two {
            for (i, &wi) in w.iter().enumerate() {
                if self.lp.is_artificial(self.basis[i]) && wi < -PIV_TOL && self.xb[i] <= FEAS_TOL {
                    return Some(i);
                }
            }
        }
        let mut best_ratio = f64::INFINITY;
        for (i, &wi) in w.iter().enumerate() {
            if wi > PIV_TOL {
                best_ratio = best_ratio.min((self.xb[i] / wi).max(0.0));
            }
        }
        if best_ratio.is_infinite() {
            return None;
        }
        let tol = 1e-10 * (1.0 + best_ratio);
        let mut winner: Option<usize> = None;
        for (i, &wi) in w.iter().enumerate() {
            if wi > PIV_TOL && (self.xb[i] / wi).max(0.0) <= best_ratio + tol {
                winner = Some(match winner {
                    None => i,
                    Some(cur) => self.lex_smaller(i, cur, w),
                });
            }
        }
        winner
    }

    /// Whichever of rows `a`, `b` has the lexicographically smaller
    /// `binv_row / w` vector.
    fn lex_smaller(&self, a: usize, b: usize, w: &[f64]) -> usize {
        let m = self.m;
        for c in 0..m {
            let va = self.binv[a * m + c] / w[a];
            let vb = self.binv[b * m + c] / w[b];
            if (va - vb).abs() > 1e-12 * va.abs().max(vb.abs()).max(1.0) {
                return if va < vb { a } else { b };
            }
        }
        a.min(b)
    }

    fn pivot(&mut self, entering: usize, leave_row: usize, w: &[f64]) {
        let m = self.m;
        let theta = (self.xb[leave_row] / w[leave_row]).max(0.0);
        for i in 0..m {
            self.xb[i] -= theta * w[i];
        }
        self.xb[leave_row] = theta;
        // eta update of the inverse
        let pivot = w[leave_row];
        for c in 0..m {
            self.binv[leave_row * m + c] /= pivot;
        }
        for i in 0..m {
            if i == leave_row {
                continue;
            }
            let factor = w[i];
            if factor != 0.0 {
                for c in 0..m {
                    self.binv[i * m + c] -= factor * self.binv[leave_row * m + c];
                }
            }
        }
        let old = self.basis[leave_row];
        self.in_basis[old] = false;
        self.in_basis[entering] = true;
        self.basis[leave_row] = entering;
    }

    /// Dense basis matrix of the current basis columns.
    fn basis_matrix(&self, scratch: &mut Vec<(usize, f64)>) -> Vec<f64> {
        let m = self.m;
        let mut mat = vec![0.0; m * m];
        for (c, &j) in self.basis.iter().enumerate() {
            self.lp.column(j, scratch);
            for &(row, val) in scratch.iter() {
                mat[row * m + c] = val;
            }
        }
        mat
    }

    fn refactor(&mut self, scratch: &mut Vec<(usize, f64)>) -> Result<()> {
        let m = self.m;
        let mat = self.basis_matrix(scratch);
        self.binv = invert(&mat, m).ok_or_else(|| Error::Lp("singular basis".into()))?;
        let pb = self.pb.clone();
        self.xb = mat_vec(&self.binv, &pb, m);
        for x in self.xb.iter_mut() {
            if *x < 0.0 && *x > -FEAS_TOL {
                *x = 0.0;
            }
        }
        Ok(())
    }

    fn run_phase(&mut self, phase: Phase) -> Result<()> {
        let mut scratch = Vec::new();
        let mut stall = 0usize;
        let mut bland_burst = 0usize;
        let mut last_obj = f64::INFINITY;
        let mut pool: Vec<(usize, f64)> = Vec::with_capacity(POOL_SIZE);
        let mut since_scan = 0usize;
        loop {
            if self.iterations >= MAX_ITER {
                return Err(Error::Lp(format!(
                    "iteration limit {MAX_ITER} exceeded"
                )));
            }
            let y = self.duals(phase);
            // minor iterations reprice only the candidate pool; a full
            // Gray scan runs when the pool runs dry and at least every
            // RESCAN_EVERY pivots so pool members cannot shadow a much
            // better global candidate on a degenerate plateau
            let mut candidates: Vec<(usize, f64)> = Vec::new();
            if bland_burst > 0 {
                pool.clear();
                if let Some(c) = self.price(&y, phase, true, None) {
                    candidates.push(c);
                }
            } else {
                let mut pool_ok = false;
                if since_scan < RESCAN_EVERY {
                    pool.retain(|&(j, _)| !self.in_basis[j]);
                    for &mut (j, ref mut r) in pool.iter_mut() {
                        *r = self.reduced_cost(j, &y, phase, &mut scratch);
                        if *r < -OPT_TOL {
                            pool_ok = true;
                        }
                    }
                }
                if !pool_ok {
                    since_scan = 0;
                    pool.clear();
                    self.price(&y, phase, false, Some(&mut pool));
                }
                candidates.extend(pool.iter().copied().filter(|&(_, r)| r < -OPT_TOL));
                candidates.sort_unstable_by(|a, b| a.1.total_cmp(&b.1));
                candidates.truncate(IMPROVE_CANDIDATES);
            }
            if candidates.is_empty() {
                return Ok(());
            }
            // greatest improvement among the shortlist (the directions are
            // needed for the ratio test anyway): actual progress theta |r|
            // beats raw reduced cost on degenerate plateaus; candidates are
            // sorted by reduced cost, so ties fall back to most-negative r
            let mut chosen: Option<(usize, Vec<f64>, usize, f64)> = None;
            for &(j, r) in &candidates {
                let w = self.direction(j, &mut scratch);
                let Some(row) = self.choose_leaving(&w, phase) else {
                    return Err(Error::Lp("unbounded cut-cone program".into()));
                };
                let theta = (self.xb[row] / w[row]).max(0.0);
                let progress = theta * (-r);
                let better = match &chosen {
                    None => true,
                    Some((_, _, _, bp)) => progress > *bp,
                };
                if better {
                    chosen = Some((j, w, row, progress));
                }
            }
            let (entering, w, leave_row, _) = chosen.expect("nonempty candidates");
            self.pivot(entering, leave_row, &w);
            self.iterations += 1;
            since_scan += 1;
            if self.iterations % REFACTOR_EVERY == 0 {
                self.refactor(&mut scratch)?;
            }
            let obj = self.objective(phase);
            bland_burst = bland_burst.saturating_sub(1);
            if obj < last_obj - 1e-13 {
                last_obj = obj;
                stall = 0;
            } else {
                stall += 1;
                // short Bland burst to escape a degenerate plateau, then
                // back to steepest-descent pricing
                if stall > STALL_LIMIT {
                    bland_burst = 50;
                    stall = 0;
                }
            }
        }
    }

    /// Drive zero-valued basic artificials out of the basis where a
    /// structural pivot exists. Candidates are screened by the single
    /// needed component of `binv . a_j` before a full direction solve.
    fn push_out_artificials(&mut self) {
        let mut scratch = Vec::new();
        for row in 0..self.m {
            if !self.lp.is_artificial(self.basis[row]) || self.xb[row] > FEAS_TOL {
                continue;
            }
            let m = self.m;
            let binv_row = &self.binv[row * m..(row + 1) * m].to_vec();
            let found = (0..self.lp.artificial_start()).find(|&j| {
                if self.in_basis[j] {
                    return false;
                }
                self.lp.column(j, &mut scratch);
                let wr: f64 = scratch.iter().map(|&(r, v)| binv_row[r] * v).sum();
                wr.abs() > 1e-7
            });
            if let Some(j) = found {
                let w = self.direction(j, &mut scratch);
                // degenerate swap at theta = 0
                let pivot = w[row];
                for c in 0..m {
                    self.binv[row * m + c] /= pivot;
                }
                for i in 0..m {
                    if i != row && w[i] != 0.0 {
                        for c in 0..m {
                            self.binv[i * m + c] -= w[i] * self.binv[row * m + c];
                        }
                    }
                }
                let old = self.basis[row];
                self.in_basis[old] = false;
                self.in_basis[j] = true;
                self.basis[row] = j;
                self.xb[row] = 0.0;
            }
        }
    }
}

fn mat_vec(a: &[f64], x: &[f64], m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| (0..m).map(|j| a[i * m + j] * x[j]).sum())
        .collect()
}

fn mat_t_vec(a: &[f64], x: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for i in 0..m {
        let xi = x[i];
        if xi != 0.0 {
            for j in 0..m {
                out[j] += a[i * m + j] * xi;
            }
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(mat: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut a = mat.to_vec();
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for col in 0..m {
        let mut piv = col;
        let mut best = a[col * m + col].abs();
        for r in (col + 1)..m {
            let v = a[r * m + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-12 {
            return None;
        }
        if piv != col {
            for c in 0..m {
                a.swap(piv * m + c, col * m + c);
                inv.swap(piv * m + c, col * m + c);
            }
        }
        let pivot = a[col * m + col];
        for c in 0..m {
            a[col * m + c] /= pivot;
            inv[col * m + c] /= pivot;
        }
        for r in 0..m {
            if r != col {
                let f = a[r * m + col];
                if f != 0.0 {
                    for c in 0..m {
                        a[r * m + c] -= f * a[col * m + c];
                        inv[r * m + c] -= f * inv[col * m + c];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Two refinement sweeps on `B x = rhs` (or `B^T x = rhs`).
fn refine_solve(bmat: &[f64], binv: &[f64], rhs: &[f64], m: usize, transpose: bool) -> Vec<f64> {
    let apply = |v: &[f64]| -> Vec<f64> {
        if transpose {
            mat_t_vec(bmat, v, m)
        } else {
            mat_vec(bmat, v, m)
        }
    };
    let solve = |v: &[f64]| -> Vec<f64> {
        if transpose {
            mat_t_vec(binv, v, m)
        } else {
            mat_vec(binv, v, m)
        }
    };
    let mut x = solve(rhs);
    for _ in 0..2 {
        let ax = apply(&x);
        let r: Vec<f64> = rhs.iter().zip(ax.iter()).map(|(b, v)| b - v).collect();
        let dx = solve(&r);
        for (xi, di) in x.iter_mut().zip(dx.iter()) {
            *xi += di;
        }
    }
    x
}

pub(crate) fn solve_float(lp: &CutLp) -> Result<FloatOutcome> {
    let mut st = FloatState::new(lp);
    let mut scratch = Vec::new();
    match lp.kind {
        LpKind::Feasibility => {
            st.run_phase(Phase::One)?;
            st.refactor(&mut scratch)?;
            // judge feasibility on the true (unperturbed) right-hand side
            let bmat = st.basis_matrix(&mut scratch);
            let b: Vec<f64> = (0..st.m).map(|i| lp.b(i)).collect();
            let x_true = refine_solve(&bmat, &st.binv, &b, st.m, false);
            let phase1_obj: f64 = st
                .basis
                .iter()
                .zip(x_true.iter())
                .map(|(&j, &x)| lp.cost(j, Phase::One) * x.max(0.0))
                .sum();
            if phase1_obj > FEAS_TOL {
                let cb: Vec<f64> = st.basis.iter().map(|&j| lp.cost(j, Phase::One)).collect();
                let y = refine_solve(&bmat, &st.binv, &cb, st.m, true);
                return Ok(FloatOutcome::Infeasible {
                    y,
                    objective: phase1_obj,
                });
            }
            st.push_out_artificials();
        }
        LpKind::Distortion => {
            // the slack basis is already feasible; single phase
            st.run_phase(Phase::Two)?;
            st.refactor(&mut scratch)?;
        }
    }

    // refined extraction
    let m = st.m;
    let bmat = st.basis_matrix(&mut scratch);
    let b: Vec<f64> = (0..m).map(|i| lp.b(i)).collect();
    let x = refine_solve(&bmat, &st.binv, &b, m, false);
    let final_phase = match lp.kind {
        LpKind::Feasibility => Phase::One,
        LpKind::Distortion => Phase::Two,
    };
    let cb: Vec<f64> = st.basis.iter().map(|&j| lp.cost(j, final_phase)).collect();
    let y = refine_solve(&bmat, &st.binv, &cb, m, true);

    let objective: f64 = cb.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
    let ax = mat_vec(&bmat, &x, m);
    let primal_residual = ax
        .iter()
        .zip(b.iter())
        .map(|(l, r)| (l - r).abs())
        .fold(0.0, f64::max);
    let yb: f64 = y.iter().zip(b.iter()).map(|(a, c)| a * c).sum();
    let duality_gap = (objective - yb).abs();
    st.xb = x.clone();
    let dual_residual = st
        .price(&y, final_phase, false, None)
        .map(|(_, r)| -r)
        .unwrap_or(0.0);

    Ok(FloatOutcome::Optimal(FloatSolution {
        objective,
        basis: st.basis,
        x,
        y,
        iterations: st.iterations,
        primal_residual,
        dual_residual,
        duality_gap,
    }))
}

// ---------------------------------------------------------------------------
// Exact rational tableau simplex (Bland's rule)
// ---------------------------------------------------------------------------

pub(crate) struct ExactSolution {
    pub objective: BigRational,
    pub basis: Vec<usize>,
    pub x: Vec<BigRational>,
    pub y: Vec<BigRational>,
    pub iterations: usize,
}

pub(crate) enum ExactOutcome {
    Optimal(ExactSolution),
    Infeasible {
        y: Vec<BigRational>,
        objective: BigRational,
    },
}

const EXACT_MAX_ITER: usize = 50_000;

struct ExactState<'a> {
    lp: &'a CutLp,
    m: usize,
    ncols: usize,
    /// `m x (ncols + 1)` tableau, rhs in the last column.
    tab: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    /// Column of the variable that started basic in each row (tracks the
    /// basis inverse for dual extraction).
    unit_cols: Vec<usize>,
    reduced: Vec<BigRational>,
    iterations: usize,
}

impl<'a> ExactState<'a> {
    fn new(lp: &'a CutLp, d_rational: &'a [BigRational]) -> Self {
        let m = lp.nrows();
        let ncols = lp.ncols();
        let p = lp.n_pairs();
        let zero = BigRational::zero();
        let mut tab = vec![vec![zero.clone(); ncols + 1]; m];
        let mut scratch = Vec::new();
        for col in 0..ncols {
            lp.column(col, &mut scratch);
            let cuts = lp.n_cuts();
            for &(row, val) in scratch.iter() {
                // the only non-unit fractional coefficients are the +d
                // entries of the t column
                tab[row][col] = if lp.kind == LpKind::Distortion && col == cuts {
                    d_rational[row].clone()
                } else {
                    BigRational::from_float(val).expect("unit coefficient")
                };
            }
        }
        for (row, entry) in tab.iter_mut().enumerate() {
            entry[ncols] = match lp.kind {
                LpKind::Feasibility => d_rational[row].clone(),
                LpKind::Distortion => {
                    if row < p {
                        zero.clone()
                    } else {
                        d_rational[row - p].clone()
                    }
                }
            };
        }
        let basis = lp.initial_basis();
        let unit_cols = basis.clone();
        ExactState {
            lp,
            m,
            ncols,
            tab,
            basis,
            unit_cols,
            reduced: vec![zero; ncols],
            iterations: 0,
        }
    }

    fn cost(&self, col: usize, phase: Phase) -> BigRational {
        let c = self.lp.cost(col, phase);
        if c == 1.0 {
            BigRational::one()
        } else if c == -1.0 {
            -BigRational::one()
        } else {
            BigRational::zero()
        }
    }

    fn recompute_reduced(&mut self, phase: Phase) {
        for j in 0..self.ncols {
            let mut r = self.cost(j, phase);
            for (row, &bj) in self.basis.iter().enumerate() {
                let cb = self.cost(bj, phase);
                if !cb.is_zero() && !self.tab[row][j].is_zero() {
                    r -= cb * &self.tab[row][j];
                }
            }
            self.reduced[j] = r;
        }
    }

    fn pivot(&mut self, entering: usize, leave_row: usize) {
        let pivot = self.tab[leave_row][entering].clone();
        for v in self.tab[leave_row].iter_mut() {
            *v /= &pivot;
        }
        let pivot_row = self.tab[leave_row].clone();
        for (row, tr) in self.tab.iter_mut().enumerate() {
            if row == leave_row {
                continue;
            }
            let factor = tr[entering].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, pv) in tr.iter_mut().zip(pivot_row.iter()) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        let factor = self.reduced[entering].clone();
        if !factor.is_zero() {
            for (v, pv) in self.reduced.iter_mut().zip(pivot_row.iter()) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[leave_row] = entering;
    }

    /// Bland's rule: smallest eligible entering index; leaving row by
    /// minimum ratio with smallest basis index on ties.
    fn run_phase(&mut self, phase: Phase) -> Result<()> {
        self.recompute_reduced(phase);
        loop {
            if self.iterations >= EXACT_MAX_ITER {
                return Err(Error::Lp(format!(
                    "exact iteration limit {EXACT_MAX_ITER} exceeded"
                )));
            }
            let mut entering = None;
            for j in 0..self.ncols {
                if self.reduced[j].is_negative()
                    && !(phase == Phase::Two && self.lp.is_artificial(j))
                {
                    entering = Some(j);
                    break;
                }
            }
            let Some(entering) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, BigRational)> = None;
            // never let a zero-valued basic artificial grow
            if phase == Phase::Two {
                for row in 0..self.m {
                    if self.lp.is_artificial(self.basis[row])
                        && self.tab[row][entering].is_negative()
                        && self.tab[row][self.ncols].is_zero()
                    {
                        leave = Some((row, BigRational::zero()));
                        break;
                    }
                }
            }
            if leave.is_none() {
                for row in 0..self.m {
                    if self.tab[row][entering].is_positive() {
                        let ratio = &self.tab[row][self.ncols] / &self.tab[row][entering];
                        match &leave {
                            None => leave = Some((row, ratio)),
                            Some((lr, lratio)) => {
                                if ratio < *lratio
                                    || (ratio == *lratio && self.basis[row] < self.basis[*lr])
                                {
                                    leave = Some((row, ratio));
                                }
                            }
                        }
                    }
                }
            }
            let Some((leave_row, _)) = leave else {
                return Err(Error::Lp("unbounded cut-cone program".into()));
            };
            self.pivot(entering, leave_row);
            self.iterations += 1;
        }
    }

    fn objective(&self, phase: Phase) -> BigRational {
        let mut obj = BigRational::zero();
        for (row, &bj) in self.basis.iter().enumerate() {
            let cb = self.cost(bj, phase);
            if !cb.is_zero() {
                obj += cb * &self.tab[row][self.ncols];
            }
        }
        obj
    }

    fn duals(&self, phase: Phase) -> Vec<BigRational> {
        (0..self.m)
            .map(|i| {
                let mut yi = BigRational::zero();
                for (row, &bj) in self.basis.iter().enumerate() {
                    let cb = self.cost(bj, phase);
                    if !cb.is_zero() {
                        yi += cb * &self.tab[row][self.unit_cols[i]];
                    }
                }
                yi
            })
            .collect()
    }
}

pub(crate) fn solve_exact(lp: &CutLp, d_rational: &[BigRational]) -> Result<ExactOutcome> {
    let mut st = ExactState::new(lp, d_rational);
    match lp.kind {
        LpKind::Feasibility => {
            st.run_phase(Phase::One)?;
            let phase1_obj = st.objective(Phase::One);
            if phase1_obj.is_positive() {
                let y = st.duals(Phase::One);
                return Ok(ExactOutcome::Infeasible {
                    y,
                    objective: phase1_obj,
                });
            }
        }
        LpKind::Distortion => {
            st.run_phase(Phase::Two)?;
        }
    }
    let final_phase = match lp.kind {
        LpKind::Feasibility => Phase::One,
        LpKind::Distortion => Phase::Two,
    };
    let x: Vec<BigRational> = (0..st.m).map(|row| st.tab[row][st.ncols].clone()).collect();
    let y = st.duals(final_phase);
    let objective = st.objective(final_phase);
    debug_assert!(x.iter().all(|v| !v.is_negative()));
    Ok(ExactOutcome::Optimal(ExactSolution {
        objective,
        basis: st.basis,
        x,
        y,
        iterations: st.iterations,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rationals(d: &[f64]) -> Vec<BigRational> {
        d.iter().map(|&v| BigRational::from_f64(v).unwrap()).collect()
    }

    /// 4-cycle metric (C_4): l_1-embeddable with two "opposite pair" cuts.
    fn cycle4() -> Vec<f64> {
        // points 0-1-2-3 in a cycle, d = shortest path
        let d = [
            [0.0, 1.0, 2.0, 1.0],
            [1.0, 0.0, 1.0, 2.0],
            [2.0, 1.0, 0.0, 1.0],
            [1.0, 2.0, 1.0, 0.0],
        ];
        let mut out = Vec::new();
        for a in 0..4 {
            for b in (a + 1)..4 {
                out.push(d[a][b]);
            }
        }
        out
    }

    #[test]
    fn feasibility_exact_on_cycle() {
        let d = cycle4();
        let lp = CutLp::new(4, d.clone(), LpKind::Feasibility);
        match solve_exact(&lp, &rationals(&d)).unwrap() {
            ExactOutcome::Optimal(sol) => {
                assert!(sol.objective.is_zero());
                // expand and compare
                let mut achieved = vec![BigRational::zero(); lp.n_pairs()];
                for (row, &col) in sol.basis.iter().enumerate() {
                    if col < lp.n_cuts() && sol.x[row].is_positive() {
                        let mask = CutLp::cut_mask(col);
                        for (i, &(a, b)) in lp.pairs.iter().enumerate() {
                            if CutLp::delta(mask, a, b) {
                                achieved[i] += &sol.x[row];
                            }
                        }
                    }
                }
                for (i, want) in rationals(&d).iter().enumerate() {
                    assert_eq!(&achieved[i], want, "pair {i}");
                }
            }
            ExactOutcome::Infeasible { .. } => panic!("C_4 is l_1-embeddable"),
        }
    }

    #[test]
    fn infeasible_exact_gives_farkas() {
        // K_{2,3} shortest-path metric is the classic non-l_1-embeddable
        // 5-point metric
        let parts = [
            vec![0usize, 1],    // side A
            vec![2usize, 3, 4], // side B
        ];
        let mut d = vec![vec![0.0; 5]; 5];
        for a in 0..5 {
            for b in 0..5 {
                if a != b {
                    let same = (parts[0].contains(&a) && parts[0].contains(&b))
                        || (parts[1].contains(&a) && parts[1].contains(&b));
                    d[a][b] = if same { 2.0 } else { 1.0 };
                }
            }
        }
        let mut flat = Vec::new();
        for a in 0..5 {
            for b in (a + 1)..5 {
                flat.push(d[a][b]);
            }
        }
        let lp = CutLp::new(5, flat.clone(), LpKind::Feasibility);
        match solve_exact(&lp, &rationals(&flat)).unwrap() {
            ExactOutcome::Optimal(_) => panic!("K_23 must not embed isometrically in l_1"),
            ExactOutcome::Infeasible { y, objective, .. } => {
                assert!(objective.is_positive());
                // Farkas: y . delta_S <= 0 for every cut, y . d > 0
                for col in 0..lp.n_cuts() {
                    let mask = CutLp::cut_mask(col);
                    let mut dot = BigRational::zero();
                    for (i, &(a, b)) in lp.pairs.iter().enumerate() {
                        if CutLp::delta(mask, a, b) {
                            dot += &y[i];
                        }
                    }
                    assert!(!dot.is_positive(), "cut {mask} violated");
                }
                let mut yd = BigRational::zero();
                for (i, v) in rationals(&flat).iter().enumerate() {
                    yd += &y[i] * v;
                }
                assert!(yd.is_positive());
            }
        }
    }

    #[test]
    fn distortion_exact_on_embeddable_space_is_one() {
        // objective is -t with distortion 1/t; C_4 embeds isometrically
        let d = cycle4();
        let lp = CutLp::new(4, d.clone(), LpKind::Distortion);
        match solve_exact(&lp, &rationals(&d)).unwrap() {
            ExactOutcome::Optimal(sol) => {
                assert_eq!(sol.objective, -BigRational::one());
            }
            ExactOutcome::Infeasible { .. } => panic!("distortion LP is always feasible"),
        }
    }

    #[test]
    fn float_matches_exact_on_small_distortion() {
        let d = cycle4();
        let lp = CutLp::new(4, d.clone(), LpKind::Distortion);
        match solve_float(&lp).unwrap() {
            FloatOutcome::Optimal(sol) => {
                assert!((sol.objective + 1.0).abs() < 1e-8, "t = {}", -sol.objective);
                assert!(sol.primal_residual < 1e-8);
                assert!(sol.duality_gap < 1e-8);
                assert!(sol.dual_residual < 1e-8);
            }
            FloatOutcome::Infeasible { .. } => panic!("distortion LP is always feasible"),
        }
    }

    #[test]
    fn float_feasibility_detects_k23() {
        let mut flat = Vec::new();
        let same = |a: usize, b: usize| (a < 2) == (b < 2);
        for a in 0..5 {
            for b in (a + 1)..5 {
                flat.push(if same(a, b) { 2.0 } else { 1.0 });
            }
        }
        let lp = CutLp::new(5, flat.clone(), LpKind::Feasibility);
        match solve_float(&lp).unwrap() {
            FloatOutcome::Optimal(sol) => {
                panic!("K_23 accepted with objective {}", sol.objective)
            }
            FloatOutcome::Infeasible { y, objective, .. } => {
                assert!(objective > 1e-4);
                let mut yd = 0.0;
                for (i, v) in flat.iter().enumerate() {
                    yd += y[i] * v;
                }
                assert!(yd > 1e-6);
                for col in 0..lp.n_cuts() {
                    let mask = CutLp::cut_mask(col);
                    let mut dot = 0.0;
                    for (i, &(a, b)) in lp.pairs.iter().enumerate() {
                        if CutLp::delta(mask, a, b) {
                            dot += y[i];
                        }
                    }
                    assert!(dot <= 1e-7, "cut {mask}: {dot}");
                }
            }
        }
    }
}
