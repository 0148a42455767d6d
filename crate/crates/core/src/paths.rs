//! Regulated paths, nested partition sequences, and crash times.
//!
//! A path is a continuous piecewise-linear base on a strictly increasing grid
//! `0 = t_0 < ... < t_n = T` plus a finite list of jumps. A jump at time `u`
//! carries a left part `f(u) - f(u-)` and a right part `f(u+) - f(u)`, so the
//! path value, its left limit, and its right limit are all recoverable at
//! every point. Times are compared exactly (tolerance zero); callers are
//! expected to construct grids and partitions from consistent formulas, and
//! the dyadic constructors here guarantee bit-identical shared points.

use serde::Serialize;

use crate::error::Error;
use crate::Result;

/// A two-sided jump record: `left = f(u) - f(u-)`, `right = f(u+) - f(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub time: f64,
    pub left: f64,
    pub right: f64,
}

impl Jump {
    pub fn new(time: f64, left: f64, right: f64) -> Self {
        Jump { time, left, right }
    }

    fn is_noop(&self) -> bool {
        self.left == 0.0 && self.right == 0.0
    }
}

/// Which one-sided value of the path to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    At,
    Right,
}

/// A regulated function on `[0, T]`: piecewise-linear base plus finitely many
/// jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulatedPath {
    grid: Vec<f64>,
    base: Vec<f64>,
    jumps: Vec<Jump>,
    /// cum[i] = sum of (left + right) over jumps[..i].
    cum: Vec<f64>,
}

impl RegulatedPath {
    /// Builds a path from its base values at the grid points and a jump list.
    ///
    /// The base is the continuous part: the full value at `t` is the base
    /// interpolant plus every jump accumulated up to `t`. Jumps with both
    /// parts zero are dropped. Errors: non-increasing or non-zero-starting
    /// grid, length mismatch, non-finite entries, duplicate jump times, jump
    /// times outside `[0, T]`, a left part at 0 or a right part at `T`.
    pub fn new(grid: Vec<f64>, base: Vec<f64>, jumps: Vec<Jump>) -> Result<Self> {
        validate_grid(&grid)?;
        if base.len() != grid.len() {
            return Err(Error::domain(format!(
                "base has {} values for {} grid points",
                base.len(),
                grid.len()
            )));
        }
        if base.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("base values must be finite"));
        }
        let jumps = normalize_jumps(jumps, *grid.last().unwrap())?;
        let cum = cumulative(&jumps);
        Ok(RegulatedPath { grid, base, jumps, cum })
    }

    /// Builds a path from the full values `f(t_i)` at the grid points.
    ///
    /// The base is derived by subtracting the accumulated jumps, so `eval`
    /// reproduces `values` at the grid points exactly.
    pub fn from_values(grid: Vec<f64>, values: Vec<f64>, jumps: Vec<Jump>) -> Result<Self> {
        validate_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        let jumps = normalize_jumps(jumps, *grid.last().unwrap())?;
        let cum = cumulative(&jumps);
        let scratch = RegulatedPath {
            grid: grid.clone(),
            base: vec![0.0; grid.len()],
            jumps: jumps.clone(),
            cum: cum.clone(),
        };
        let base: Vec<f64> = grid
            .iter()
            .zip(values.iter())
            .map(|(&t, &v)| v - scratch.jump_accum(t, Side::At))
            .collect();
        if base.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("values must be finite"));
        }
        Ok(RegulatedPath { grid, base, jumps, cum })
    }

    /// Constant path on `[0, t_end]`.
    pub fn constant(t_end: f64, value: f64) -> Self {
        RegulatedPath {
            grid: vec![0.0, t_end],
            base: vec![value, value],
            jumps: Vec::new(),
            cum: vec![0.0],
        }
    }

    /// Continuous path sampling `f` on the uniform grid with `n` intervals.
    pub fn sampled(t_end: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("need at least one interval"));
        }
        let grid = uniform_grid(t_end, n);
        let base: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
        RegulatedPath::new(grid, base, Vec::new())
    }

    pub fn t_end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn base_values(&self) -> &[f64] {
        &self.base
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Grid points and jump times merged: everywhere else the path is linear.
    pub fn event_times(&self) -> Vec<f64> {
        let jt: Vec<f64> = self.jumps.iter().map(|j| j.time).collect();
        merge_sorted(&self.grid, &jt)
    }

    /// True when every jump is one-sided (left or right part zero).
    ///
    /// Endpoint jumps are one-sided by validation, so this is a statement
    /// about interior times.
    pub fn is_one_sided(&self) -> bool {
        self.jumps.iter().all(|j| j.left == 0.0 || j.right == 0.0)
    }

    /// Interior times carrying jumps on both sides.
    pub fn two_sided_jump_times(&self) -> Vec<f64> {
        self.jumps
            .iter()
            .filter(|j| j.left != 0.0 && j.right != 0.0)
            .map(|j| j.time)
            .collect()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 || t > self.t_end() {
            return Err(Error::domain(format!(
                "time {t} outside [0, {}]",
                self.t_end()
            )));
        }
        Ok(())
    }

    /// `f(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.value(t, Side::At))
    }

    /// Left limit `f(t-)`, with the convention `f(0-) = f(0)`.
    pub fn eval_left(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.value(t, Side::Left))
    }

    /// Right limit `f(t+)`, with the convention `f(T+) = f(T)`.
    pub fn eval_right(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.value(t, Side::Right))
    }

    pub(crate) fn value(&self, t: f64, side: Side) -> f64 {
        self.base_at(t) + self.jump_accum(t, side)
    }

    fn base_at(&self, t: f64) -> f64 {
        let idx = self.grid.partition_point(|&g| g <= t);
        // idx is the first grid index with grid[idx] > t; idx >= 1 because
        // grid[0] = 0 <= t for every valid t.
        let i = idx - 1;
        if self.grid[i] == t || idx == self.grid.len() {
            return self.base[i];
        }
        let (g0, g1) = (self.grid[i], self.grid[i + 1]);
        let w = (t - g0) / (g1 - g0);
        self.base[i] + (self.base[i + 1] - self.base[i]) * w
    }

    fn jump_accum(&self, t: f64, side: Side) -> f64 {
        let k = self.jumps.partition_point(|j| j.time < t);
        let mut acc = self.cum[k];
        if k < self.jumps.len() && self.jumps[k].time == t {
            match side {
                Side::Left => {}
                Side::At => acc += self.jumps[k].left,
                Side::Right => acc += self.jumps[k].left + self.jumps[k].right,
            }
        }
        acc
    }

    /// Evaluates the path at a non-decreasing slice of times in one sweep.
    ///
    /// Equivalent to calling `eval*` per time but O(times + grid + jumps)
    /// instead of a binary search per point; this is the workhorse behind
    /// every partition-sum evaluator.
    pub(crate) fn eval_sorted(&self, times: &[f64], side: Side) -> Vec<f64> {
        debug_assert!(times.windows(2).all(|w| w[0] <= w[1]));
        let mut out = Vec::with_capacity(times.len());
        let mut gi = 0usize; // last grid index with grid[gi] <= t
        let mut ji = 0usize; // first jump index with time >= t
        for &t in times {
            while gi + 1 < self.grid.len() && self.grid[gi + 1] <= t {
                gi += 1;
            }
            while ji < self.jumps.len() && self.jumps[ji].time < t {
                ji += 1;
            }
            let base = if self.grid[gi] == t || gi + 1 == self.grid.len() {
                self.base[gi]
            } else {
                let (g0, g1) = (self.grid[gi], self.grid[gi + 1]);
                self.base[gi] + (self.base[gi + 1] - self.base[gi]) * ((t - g0) / (g1 - g0))
            };
            let mut acc = self.cum[ji];
            if ji < self.jumps.len() && self.jumps[ji].time == t {
                match side {
                    Side::Left => {}
                    Side::At => acc += self.jumps[ji].left,
                    Side::Right => acc += self.jumps[ji].left + self.jumps[ji].right,
                }
            }
            out.push(base + acc);
        }
        out
    }

    /// Pointwise transform `g(f(t))`.
    ///
    /// Grid values and jump parts are mapped through `g`; between grid points
    /// the result is the linear interpolant of the mapped values.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        // Jump times join the grid so the mapped one-sided limits are pinned
        // exactly; elsewhere the result interpolates g of the grid values.
        let jump_times: Vec<f64> = self.jumps.iter().map(|j| j.time).collect();
        let grid = merge_sorted(&self.grid, &jump_times);
        let values: Vec<f64> = grid.iter().map(|&t| g(self.value(t, Side::At))).collect();
        let jumps: Vec<Jump> = self
            .jumps
            .iter()
            .map(|j| {
                let vl = g(self.value(j.time, Side::Left));
                let va = g(self.value(j.time, Side::At));
                let vr = g(self.value(j.time, Side::Right));
                Jump::new(j.time, va - vl, vr - va)
            })
            .collect();
        RegulatedPath::from_values(grid, values, jumps)
    }

    /// Pointwise combination of several paths on the union of their grids.
    ///
    /// All paths must share the same `[0, T]`. The combined jump parts are
    /// differences of `g` across the one-sided limits, so the result carries
    /// a jump wherever any input does (unless `g` cancels it).
    pub fn combine_many(paths: &[&RegulatedPath], g: impl Fn(&[f64]) -> f64) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::domain("need at least one path to combine"));
        }
        let t_end = paths[0].t_end();
        if paths.iter().any(|p| p.t_end() != t_end) {
            return Err(Error::domain("paths live on different intervals"));
        }
        let mut grid: Vec<f64> = paths[0].grid.clone();
        for p in &paths[1..] {
            grid = merge_sorted(&grid, &p.grid);
        }
        let mut jump_times: Vec<f64> = Vec::new();
        for p in paths {
            let jt: Vec<f64> = p.jumps.iter().map(|j| j.time).collect();
            jump_times = merge_sorted(&jump_times, &jt);
        }
        grid = merge_sorted(&grid, &jump_times);
        let per_path_at: Vec<Vec<f64>> =
            paths.iter().map(|p| p.eval_sorted(&grid, Side::At)).collect();
        let mut buf = vec![0.0; paths.len()];
        let values: Vec<f64> = (0..grid.len())
            .map(|i| {
                for (k, vals) in per_path_at.iter().enumerate() {
                    buf[k] = vals[i];
                }
                g(&buf)
            })
            .collect();
        let jumps: Vec<Jump> = jump_times
            .iter()
            .map(|&u| {
                let lefts: Vec<f64> = paths.iter().map(|p| p.value(u, Side::Left)).collect();
                let ats: Vec<f64> = paths.iter().map(|p| p.value(u, Side::At)).collect();
                let rights: Vec<f64> = paths.iter().map(|p| p.value(u, Side::Right)).collect();
                Jump::new(u, g(&ats) - g(&lefts), g(&rights) - g(&ats))
            })
            .collect();
        RegulatedPath::from_values(grid, values, jumps)
    }

    /// Two-path pointwise combination.
    pub fn combine(&self, other: &RegulatedPath, g: impl Fn(f64, f64) -> f64) -> Result<Self> {
        RegulatedPath::combine_many(&[self, other], |v| g(v[0], v[1]))
    }

    /// Same function, finer representation: inserts `times` into the grid,
    /// sampling the base there. Jumps are unchanged.
    pub fn with_grid_refined(&self, times: &[f64]) -> Result<Self> {
        let mut extra: Vec<f64> = times
            .iter()
            .copied()
            .filter(|&t| t.is_finite() && t > 0.0 && t < self.t_end())
            .collect();
        extra.sort_by(f64::total_cmp);
        extra.dedup();
        let grid = merge_sorted(&self.grid, &extra);
        let base: Vec<f64> = grid.iter().map(|&t| self.base_at(t)).collect();
        RegulatedPath::new(grid, base, self.jumps.clone())
    }

    /// Exact infimum of the path over `[0, T]`.
    ///
    /// The path is linear between consecutive events with a constant jump
    /// accumulator, so the infimum is attained among grid values and the
    /// one-sided limits at jump times.
    pub fn min_value(&self) -> f64 {
        let mut m = f64::INFINITY;
        for &t in &self.grid {
            m = m.min(self.value(t, Side::At));
        }
        for j in &self.jumps {
            m = m.min(self.value(j.time, Side::Left));
            m = m.min(self.value(j.time, Side::At));
            m = m.min(self.value(j.time, Side::Right));
        }
        m
    }

    /// Exact supremum of `|f|` over `[0, T]`.
    pub fn max_abs_value(&self) -> f64 {
        let mut m: f64 = 0.0;
        for &t in &self.grid {
            m = m.max(self.value(t, Side::At).abs());
        }
        for j in &self.jumps {
            m = m.max(self.value(j.time, Side::Left).abs());
            m = m.max(self.value(j.time, Side::At).abs());
            m = m.max(self.value(j.time, Side::Right).abs());
        }
        m
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::domain("grid needs at least two points"));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("grid times must be finite"));
    }
    if grid[0] != 0.0 {
        return Err(Error::domain("grid must start at 0"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("grid times must be strictly increasing"));
    }
    Ok(())
}

fn normalize_jumps(mut jumps: Vec<Jump>, t_end: f64) -> Result<Vec<Jump>> {
    jumps.retain(|j| !j.is_noop());
    for j in &jumps {
        if !j.time.is_finite() || !j.left.is_finite() || !j.right.is_finite() {
            return Err(Error::domain("jump entries must be finite"));
        }
        if j.time < 0.0 || j.time > t_end {
            return Err(Error::domain(format!("jump time {} outside [0, {t_end}]", j.time)));
        }
    }
    jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
    if jumps.windows(2).any(|w| w[0].time == w[1].time) {
        return Err(Error::domain("duplicate jump times"));
    }
    if let Some(first) = jumps.first() {
        if first.time == 0.0 && first.left != 0.0 {
            return Err(Error::domain("no left limit exists at 0; left jump part must be 0"));
        }
    }
    if let Some(last) = jumps.last() {
        if last.time == t_end && last.right != 0.0 {
            return Err(Error::domain(format!(
                "no right limit exists at {t_end}; right jump part must be 0"
            )));
        }
    }
    Ok(jumps)
}

fn cumulative(jumps: &[Jump]) -> Vec<f64> {
    let mut cum = Vec::with_capacity(jumps.len() + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    for j in jumps {
        acc += j.left + j.right;
        cum.push(acc);
    }
    cum
}

/// Uniform grid `k * t_end / n`, `k = 0..=n`.
///
/// For `n` a power of two these values are bit-identical to the matching
/// dyadic partition level, because scaling by powers of two commutes with
/// f64 rounding.
pub fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut g: Vec<f64> = (0..=n).map(|k| (k as f64) * t_end / nf).collect();
    g[0] = 0.0;
    g[n] = t_end;
    g
}

/// Merges two sorted slices, dropping exact duplicates.
pub(crate) fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x <= y,
            (Some(_), None) => true,
            _ => false,
        };
        let v = if take_a {
            let v = a[i];
            i += 1;
            v
        } else {
            let v = b[j];
            j += 1;
            v
        };
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Nested partition sequences
// ---------------------------------------------------------------------------

/// Density threshold for treating the finest level as a stand-in for a dense
/// refinement of `[0, t_end]`.
pub fn default_density_eps(t_end: f64) -> f64 {
    t_end * 2.0f64.powi(-16)
}

/// A finite chain of partitions of `[0, T]`, each refining the previous.
///
/// Every level contains both endpoints and every point of the level before
/// it (bit-exact set inclusion); the mesh is non-increasing. This is the
/// finite proxy for a nested sequence whose union is dense.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedPartitionSequence {
    levels: Vec<Vec<f64>>,
}

impl NestedPartitionSequence {
    /// Validates and wraps explicit levels, coarsest first.
    pub fn from_levels(levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::domain("need at least one partition level"));
        }
        let t_end = *levels[0].last().ok_or_else(|| Error::domain("empty level"))?;
        for level in &levels {
            if level.len() < 2 {
                return Err(Error::domain("each level needs at least two points"));
            }
            if level[0] != 0.0 || *level.last().unwrap() != t_end {
                return Err(Error::domain("every level must run from 0 to the same horizon"));
            }
            if level.iter().any(|t| !t.is_finite()) {
                return Err(Error::domain("partition times must be finite"));
            }
            if level.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::domain("partition times must be strictly increasing"));
            }
        }
        for pair in levels.windows(2) {
            if !is_subset(&pair[0], &pair[1]) {
                return Err(Error::domain("levels must be nested (each a subset of the next)"));
            }
            if mesh_of(&pair[1]) > mesh_of(&pair[0]) {
                return Err(Error::domain("mesh must be non-increasing across levels"));
            }
        }
        Ok(NestedPartitionSequence { levels })
    }

    /// Dyadic levels `k * t_end / 2^m` for `m = 0..=max_level`.
    pub fn dyadic(t_end: f64, max_level: u32) -> Self {
        assert!(max_level <= 30, "dyadic level {max_level} too deep");
        assert!(t_end > 0.0 && t_end.is_finite());
        let levels = (0..=max_level)
            .map(|m| uniform_grid(t_end, 1usize << m))
            .collect();
        NestedPartitionSequence { levels }
    }

    /// Triadic levels, built by thinning the finest `3^max_level` grid so
    /// nesting is exact.
    pub fn triadic(t_end: f64, max_level: u32) -> Self {
        assert!(max_level <= 12, "triadic level {max_level} too deep");
        assert!(t_end > 0.0 && t_end.is_finite());
        let n = 3usize.pow(max_level);
        let finest = uniform_grid(t_end, n);
        let mut levels = vec![finest];
        for _ in 0..max_level {
            let prev = levels.last().unwrap();
            let thin: Vec<f64> = prev.iter().copied().step_by(3).collect();
            levels.push(thin);
        }
        levels.reverse();
        NestedPartitionSequence { levels }
    }

    /// Randomized nested levels: the finest level is `2^max_level - 1` sorted
    /// uniform draws plus the endpoints; coarser levels keep every other
    /// point. Deterministic in the seed.
    pub fn randomized(t_end: f64, max_level: u32, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        assert!(max_level >= 1 && max_level <= 24);
        assert!(t_end > 0.0 && t_end.is_finite());
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let count = (1usize << max_level) - 1;
        let mut pts: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * t_end).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.retain(|&t| t > 0.0 && t < t_end);
        let mut finest = Vec::with_capacity(pts.len() + 2);
        finest.push(0.0);
        finest.extend_from_slice(&pts);
        finest.push(t_end);
        let mut levels = vec![finest];
        while levels.last().unwrap().len() > 2 {
            let prev = levels.last().unwrap();
            let mut thin: Vec<f64> = prev.iter().copied().step_by(2).collect();
            if *thin.last().unwrap() != t_end {
                thin.push(t_end);
            }
            levels.push(thin);
            if levels.len() > max_level as usize + 1 {
                break;
            }
        }
        levels.reverse();
        NestedPartitionSequence { levels }
    }

    /// Levels obtained by repeatedly halving an existing grid (keeping the
    /// endpoints), finest level equal to the grid itself.
    pub fn thinned_from_grid(grid: &[f64]) -> Result<Self> {
        validate_grid(grid)?;
        let mut levels = vec![grid.to_vec()];
        while levels.last().unwrap().len() > 2 && levels.len() <= 30 {
            let prev = levels.last().unwrap();
            let mut thin: Vec<f64> = prev.iter().copied().step_by(2).collect();
            if thin.last() != prev.last() {
                thin.push(*prev.last().unwrap());
            }
            if thin.len() == prev.len() {
                break;
            }
            levels.push(thin);
        }
        levels.reverse();
        Ok(NestedPartitionSequence { levels })
    }

    pub fn t_end(&self) -> f64 {
        *self.levels[0].last().unwrap()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, m: usize) -> &[f64] {
        &self.levels[m]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn finest(&self) -> &[f64] {
        self.levels.last().unwrap()
    }

    pub fn mesh_at(&self, m: usize) -> f64 {
        mesh_of(&self.levels[m])
    }

    /// Mesh of the finest level.
    pub fn finest_mesh(&self) -> f64 {
        mesh_of(self.finest())
    }

    /// Checks the finest mesh against a density threshold.
    pub fn check_density(&self, eps: f64) -> Result<()> {
        let mesh = self.finest_mesh();
        if mesh > eps {
            return Err(Error::domain(format!(
                "finest mesh {mesh:e} exceeds density threshold {eps:e}"
            )));
        }
        Ok(())
    }

    /// Inserts the given interior times into every level, preserving nesting.
    pub fn refine_with(&self, times: &[f64]) -> Self {
        let t_end = self.t_end();
        let mut extra: Vec<f64> = times
            .iter()
            .copied()
            .filter(|&t| t.is_finite() && t > 0.0 && t < t_end)
            .collect();
        extra.sort_by(f64::total_cmp);
        extra.dedup();
        let levels = self
            .levels
            .iter()
            .map(|level| merge_sorted(level, &extra))
            .collect();
        NestedPartitionSequence { levels }
    }
}

fn mesh_of(level: &[f64]) -> f64 {
    level.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn is_subset(small: &[f64], big: &[f64]) -> bool {
    let mut j = 0;
    for &x in small {
        while j < big.len() && big[j] < x {
            j += 1;
        }
        if j == big.len() || big[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// Makes a partition sequence admissible for the path.
///
/// One-sided paths admit every nested sequence, so the base is returned
/// unchanged. A path with two-sided jumps needs its discontinuity times
/// covered by the levels; all interior jump times are inserted into every
/// level (a superset of the minimal requirement, still nested).
pub fn admissible_sequence(
    path: &RegulatedPath,
    base: &NestedPartitionSequence,
) -> NestedPartitionSequence {
    if path.is_one_sided() {
        return base.clone();
    }
    let t_end = path.t_end();
    let times: Vec<f64> = path
        .jumps()
        .iter()
        .map(|j| j.time)
        .filter(|&u| u > 0.0 && u < t_end)
        .collect();
    base.refine_with(&times)
}

// ---------------------------------------------------------------------------
// Crash times
// ---------------------------------------------------------------------------

/// When a price (or return) path stops admitting an evolution: at a time, just
/// after a time, or never within the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrashTime {
    At { time: f64 },
    JustAfter { time: f64 },
    /// No crash on `[0, T]`; `time` carries the horizon `T`.
    Never { time: f64 },
}

impl CrashTime {
    pub fn time(&self) -> f64 {
        match self {
            CrashTime::At { time } | CrashTime::JustAfter { time } | CrashTime::Never { time } => {
                *time
            }
        }
    }

    pub fn is_never(&self) -> bool {
        matches!(self, CrashTime::Never { .. })
    }

    /// Whether the time `t` lies strictly before the crash.
    pub fn admits(&self, t: f64) -> bool {
        match self {
            CrashTime::At { time } => t < *time,
            CrashTime::JustAfter { time } => t <= *time,
            CrashTime::Never { .. } => true,
        }
    }

    /// The earlier of two crash descriptions.
    pub fn earlier(self, other: CrashTime) -> CrashTime {
        if other.is_never() {
            return self;
        }
        if self.is_never() {
            return other;
        }
        if self.time() < other.time() {
            return self;
        }
        if other.time() < self.time() {
            return other;
        }
        // Same time: "at" precedes "just after".
        if matches!(self, CrashTime::At { .. }) {
            self
        } else {
            other
        }
    }
}

/// First time a price path reaches zero or below, classified.
///
/// Returns "at t" when the infimum before `t` is positive and `f(t) <= 0`
/// (including a zero crossing inside a linear segment), "just after t" when
/// `f` is positive through `t` but its right limit drops to zero or below,
/// and "never" when the path stays positive on all of `[0, T]`.
///
/// Requires `f(0) > 0` and `f(0+) > 0`: a crash at or immediately after the
/// origin has no admissible classification.
pub fn crash_time_price(path: &RegulatedPath) -> Result<CrashTime> {
    let t_end = path.t_end();
    if path.value(0.0, Side::At) <= 0.0 {
        return Err(Error::precondition("price path must start positive"));
    }
    if path.value(0.0, Side::Right) <= 0.0 {
        return Err(Error::precondition(
            "price drops to zero immediately after 0; crash at the origin is not classifiable",
        ));
    }
    let events = path.event_times();
    let mut prev = 0.0f64;
    let mut entering = path.value(0.0, Side::Right); // f(prev+), positive here
    for &e in &events[1..] {
        let v_left = path.value(e, Side::Left);
        if v_left < 0.0 {
            // The linear segment from (prev, entering) down to (e, v_left)
            // crosses zero strictly inside.
            let s = prev + (e - prev) * (entering / (entering - v_left));
            return Ok(CrashTime::At { time: s.min(e) });
        }
        if v_left == 0.0 {
            return Ok(CrashTime::At { time: e });
        }
        if path.value(e, Side::At) <= 0.0 {
            return Ok(CrashTime::At { time: e });
        }
        let v_right = path.value(e, Side::Right);
        if e < t_end && v_right <= 0.0 {
            return Ok(CrashTime::JustAfter { time: e });
        }
        prev = e;
        entering = v_right;
    }
    Ok(CrashTime::Never { time: t_end })
}

/// First return jump of -1 or below, classified by its side.
///
/// A left jump `<= -1` at `u` is a crash at `u`; a right jump `<= -1` at `u`
/// is a crash just after `u`. Requires a one-sided path (two-sided jumps have
/// no well-defined single return increment), and rejects a crash immediately
/// after the origin.
pub fn crash_time_return(path: &RegulatedPath) -> Result<CrashTime> {
    if !path.is_one_sided() {
        return Err(Error::precondition(
            "return path carries two-sided jumps; one-sided jumps are required",
        ));
    }
    for j in path.jumps() {
        if j.left <= -1.0 {
            return Ok(CrashTime::At { time: j.time });
        }
        if j.right <= -1.0 {
            if j.time == 0.0 {
                return Err(Error::precondition(
                    "return crashes immediately after 0; crash at the origin is not classifiable",
                ));
            }
            return Ok(CrashTime::JustAfter { time: j.time });
        }
    }
    Ok(CrashTime::Never { time: path.t_end() })
}
