//! Greedy sparse 0-norm factorization `A = Â + U V^T`.
//!
//! The outer loop repeatedly looks for a rank-one term `u v^T` whose removal
//! cancels more residual nonzeros than `u` and `v` cost to store. Each
//! candidate comes from alternating minimization of `‖R - u v^T‖_0`, started
//! from a random basis vector `u = e_i`, where each half-step solves the
//! column-separable mode problem exactly.

use std::io::{BufRead, Write};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{
    parse_field, parse_triplet_line, ExplicitResidual, ResidualOracle, ResidualView, SparseMatrix, SparseVec,
    Workspace, ZERO_TOL,
};

/// Quotients within this relative distance share a mode bucket.
pub const MODE_REL_TOL: f64 = 1e-9;

/// Reconstruction tolerance relative to `‖A‖_∞`.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorMode {
    /// Works on a mutable copy of `A`.
    #[default]
    Explicit,
    /// Queries `A - U V^T` on demand; `A` is never copied.
    Implicit,
}

#[derive(Debug, Clone, Copy)]
pub struct FactorConfig {
    pub seed: u64,
    pub mode: FactorMode,
}

impl Default for FactorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mode: FactorMode::Explicit,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorStats {
    pub outer_iterations: u64,
    pub successful: u64,
    pub unsuccessful: u64,
    /// Alternations (v-step plus u-step) per outer iteration.
    pub inner_iterations: Vec<u64>,
    /// Half-steps whose objective went up; the mode rule makes this 0 in
    /// exact arithmetic.
    pub half_step_increases: u64,
    pub elapsed: Duration,
}

/// `A = residual + U V^T`; column `k` of `u` and of `v` is the `k`-th term.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub u: SparseMatrix,
    pub v: SparseMatrix,
    pub residual: SparseMatrix,
    pub stats: FactorStats,
}

impl PartialEq for Factorization {
    /// Compares the matrices only.
    fn eq(&self, other: &Self) -> bool {
        self.u == other.u && self.v == other.v && self.residual == other.residual
    }
}

impl Factorization {
    /// The trivial factorization: no terms, residual `A`.
    pub fn empty(a: &SparseMatrix) -> Self {
        Self {
            u: SparseMatrix::zeros(a.nrows(), 0),
            v: SparseMatrix::zeros(a.ncols(), 0),
            residual: a.clone(),
            stats: FactorStats::default(),
        }
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    /// `nnz(U) + nnz(V) + nnz(Â)`.
    pub fn fnnz(&self) -> usize {
        self.u.nnz() + self.v.nnz() + self.residual.nnz()
    }

    /// `Â^T x + V (U^T x)`.
    pub fn tmul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::sparse::matvec_factored(&self.residual, &self.u, &self.v, x)
    }

    /// `Â y + U (V^T y)`.
    pub fn mul_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.residual.mul_vec(y)?;
        let w = self.v.tmul_vec(y)?;
        let uw = self.u.mul_vec(&w)?;
        out.iter_mut().zip(uw).for_each(|(o, p)| *o += p);
        Ok(out)
    }

    /// Largest entrywise deviation of `Â + U V^T` from `a`.
    pub fn max_deviation(&self, a: &SparseMatrix) -> Result<f64> {
        if a.shape() != self.residual.shape() {
            return Err(Error::Shape(format!(
                "factorization of a {}x{} matrix checked against {}x{}",
                self.residual.nrows(),
                self.residual.ncols(),
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.ncols();
        let mut acc = vec![0.0; n];
        let mut touched = Vec::new();
        let mut worst: f64 = 0.0;
        for i in 0..a.nrows() {
            for (j, x) in self.residual.row_at(i).iter() {
                acc[j] += x;
                touched.push(j);
            }
            for (k, uik) in self.u.row_at(i).iter() {
                for (j, vjk) in self.v.col_at(k).iter() {
                    acc[j] += uik * vjk;
                    touched.push(j);
                }
            }
            for (j, x) in a.row_at(i).iter() {
                acc[j] -= x;
                touched.push(j);
            }
            for &j in &touched {
                worst = worst.max(acc[j].abs());
                acc[j] = 0.0;
            }
            touched.clear();
        }
        Ok(worst)
    }

    /// Errors unless `Â + U V^T = A` within `RECONSTRUCTION_TOL ‖A‖_∞`.
    pub fn check_reconstruction(&self, a: &SparseMatrix) -> Result<f64> {
        let deviation = self.max_deviation(a)?;
        let tolerance = RECONSTRUCTION_TOL * a.max_abs().max(f64::MIN_POSITIVE);
        if deviation > tolerance {
            return Err(Error::Reconstruction { deviation, tolerance });
        }
        Ok(deviation)
    }

    /// Writes `m n r nnzU nnzV nnzR`, then sections `U`, `V` and `R` of
    /// `i j value` lines.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{} {} {} {} {} {}",
            self.residual.nrows(),
            self.residual.ncols(),
            self.rank(),
            self.u.nnz(),
            self.v.nnz(),
            self.residual.nnz()
        )?;
        for (name, m) in [("U", &self.u), ("V", &self.v), ("R", &self.residual)] {
            writeln!(w, "{name}")?;
            for (i, j, x) in m.triplets() {
                writeln!(w, "{i} {j} {x:?}")?;
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r
            .lines()
            .enumerate()
            .map(|(no, l)| l.map(|l| (no + 1, l)))
            .filter(|l| !matches!(l, Ok((_, s)) if s.trim().is_empty() || s.trim_start().starts_with('#')));
        let (no, header) = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(1, "missing header `m n r nnzU nnzV nnzR`"))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 6 {
            return Err(Error::parse(no, "header must be `m n r nnzU nnzV nnzR`"));
        }
        let h: Vec<usize> = f.iter().map(|s| parse_field(s, no)).collect::<Result<_>>()?;
        let (m, n, r) = (h[0], h[1], h[2]);
        let sections = [("U", m, r, h[3]), ("V", n, r, h[4]), ("R", m, n, h[5])];
        let mut mats = Vec::with_capacity(3);
        let mut last = no;
        for (name, rows, cols, count) in sections {
            let (no, tag) = lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::parse(last + 1, format!("missing section `{name}`")))?;
            if tag.trim() != name {
                return Err(Error::parse(no, format!("expected section `{name}`")));
            }
            last = no;
            let mut trip = Vec::with_capacity(count);
            for _ in 0..count {
                let (no, line) = lines
                    .next()
                    .transpose()?
                    .ok_or_else(|| Error::parse(last + 1, format!("section `{name}` ends early")))?;
                trip.push(parse_triplet_line(&line, no, rows, cols)?);
                last = no;
            }
            mats.push(SparseMatrix::from_triplets(rows, cols, trip)?);
        }
        if let Some((no, _)) = lines.next().transpose()? {
            return Err(Error::parse(no, "trailing data after section `R`"));
        }
        let residual = mats.pop().expect("three sections");
        let v = mats.pop().expect("three sections");
        let u = mats.pop().expect("three sections");
        Ok(Self {
            u,
            v,
            residual,
            stats: FactorStats::default(),
        })
    }
}

/// Mode problem for one side: given `u`, the `v` minimizing
/// `‖R - u v^T‖_0` column by column. `lines[t]` holds the residual line of
/// `u.indices[t]` (a row of `R` for the v-step, a column for the u-step).
///
/// `v_j` is the most frequent quotient `R_ij / u_i` if its count exceeds
/// `‖u‖_0 - len(q[j])`, and 0 otherwise. Ties go to the smallest value.
pub fn factor_subproblem(u: &SparseVec, lines: &[Vec<(usize, f64)>], out_dim: usize) -> Result<SparseVec> {
    if u.is_zero() {
        return Err(Error::Parameter("mode subproblem needs a nonzero u".into()));
    }
    if lines.len() != u.nnz() {
        return Err(Error::Shape(format!(
            "{} residual lines for a vector with {} nonzeros",
            lines.len(),
            u.nnz()
        )));
    }
    let mut q: Vec<(usize, f64)> = Vec::with_capacity(lines.iter().map(Vec::len).sum());
    for (line, &ui) in lines.iter().zip(&u.values) {
        for &(j, a) in line {
            if j >= out_dim {
                return Err(Error::OutOfRange { index: j, len: out_dim });
            }
            q.push((j, a / ui));
        }
    }
    q.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let support = u.nnz();
    let mut indices = Vec::new();
    let mut values = Vec::new();
    let mut s = 0;
    while s < q.len() {
        let j = q[s].0;
        let mut e = s;
        while e < q.len() && q[e].0 == j {
            e += 1;
        }
        let (mode, count) = mode_of(&q[s..e]);
        if count > support - (e - s) {
            indices.push(j);
            values.push(mode);
        }
        s = e;
    }
    Ok(SparseVec {
        dim: out_dim,
        indices,
        values,
    })
}

/// Most frequent value in a sorted run, grouping within `MODE_REL_TOL`.
/// Returns the smallest member of the first largest group.
fn mode_of(run: &[(usize, f64)]) -> (f64, usize) {
    let mut best = (run[0].1, 0usize);
    let mut g = 0;
    while g < run.len() {
        let start = run[g].1;
        let mut h = g + 1;
        while h < run.len() && same_bucket(start, run[h].1) {
            h += 1;
        }
        if h - g > best.1 {
            best = (start, h - g);
        }
        g = h;
    }
    best
}

fn same_bucket(a: f64, b: f64) -> bool {
    (a - b).abs() <= MODE_REL_TOL * a.abs().max(b.abs())
}

/// Change in nnz of `line` after subtracting `w f`, with the same arithmetic
/// and snapping as the residual oracles.
fn line_delta(line: &[(usize, f64)], w: f64, f: &SparseVec, tol: f64) -> i64 {
    let before = line.len() as i64;
    let mut after = 0i64;
    let (mut a, mut b) = (0, 0);
    while a < line.len() || b < f.nnz() {
        let ka = line.get(a).map_or(usize::MAX, |e| e.0);
        let kb = f.indices.get(b).copied().unwrap_or(usize::MAX);
        let r = if ka < kb {
            a += 1;
            line[a - 1].1
        } else if kb < ka {
            b += 1;
            0.0 - w * f.values[b - 1]
        } else {
            a += 1;
            b += 1;
            line[a - 1].1 - w * f.values[b - 1]
        };
        if r.abs() > tol {
            after += 1;
        }
    }
    after - before
}

/// Outcome of one alternating minimization.
#[derive(Debug, Clone)]
pub struct RankOne {
    pub u: SparseVec,
    pub v: SparseVec,
    /// `‖R‖_0 - ‖R - u v^T‖_0`.
    pub reduction: i64,
    pub alternations: u64,
    pub half_step_increases: u64,
}

/// Alternating minimization of `‖R - u v^T‖_0` from `u = e_start`.
pub fn factor_rank1<O: ResidualOracle>(oracle: &O, start: usize, ws: &mut Workspace) -> Result<RankOne> {
    let (m, n) = oracle.shape();
    if start >= m {
        return Err(Error::OutOfRange { index: start, len: m });
    }
    let tol = oracle.tolerance();
    // each alternation that continues lowers an integral objective
    let cap = 2 + (m as u64).saturating_mul(n as u64);
    let mut u = SparseVec::unit(m, start);
    let mut v = SparseVec::new(n);
    let mut delta = 0i64;
    let mut alternations = 0u64;
    let mut increases = 0u64;
    let mut row_lines: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut col_lines: Vec<Vec<(usize, f64)>> = Vec::new();
    loop {
        alternations += 1;
        if alternations > cap {
            return Err(Error::IterationCap {
                stage: "rank-one alternation",
                cap,
            });
        }
        let before = delta;

        // v-step
        fetch(oracle, &u.indices, true, ws, &mut row_lines);
        let v_new = factor_subproblem(&u, &row_lines, n)?;
        let d_v: i64 = row_lines
            .iter()
            .zip(&u.values)
            .map(|(line, &ui)| line_delta(line, ui, &v_new, tol))
            .sum();
        if v_new.is_zero() || d_v > delta {
            if d_v > delta {
                increases += 1;
            }
            break;
        }
        v = v_new;
        delta = d_v;

        // u-step
        fetch(oracle, &v.indices, false, ws, &mut col_lines);
        let u_new = factor_subproblem(&v, &col_lines, m)?;
        let d_u: i64 = col_lines
            .iter()
            .zip(&v.values)
            .map(|(line, &vj)| line_delta(line, vj, &u_new, tol))
            .sum();
        if u_new.is_zero() || d_u > delta {
            if d_u > delta {
                increases += 1;
            }
            break;
        }
        u = u_new;
        delta = d_u;

        if delta >= before {
            break;
        }
    }
    Ok(RankOne {
        u,
        v,
        reduction: -delta,
        alternations,
        half_step_increases: increases,
    })
}

fn fetch<O: ResidualOracle>(
    oracle: &O,
    which: &[usize],
    rows: bool,
    ws: &mut Workspace,
    out: &mut Vec<Vec<(usize, f64)>>,
) {
    out.resize_with(which.len(), Vec::new);
    out.truncate(which.len());
    for (line, &k) in out.iter_mut().zip(which) {
        if rows {
            oracle.residual_row_into(k, ws, line);
        } else {
            oracle.residual_col_into(k, ws, line);
        }
    }
}

/// Rows with at least one residual nonzero, with O(1) removal and uniform
/// sampling.
struct ActiveRows {
    rows: Vec<usize>,
    pos: Vec<usize>,
    nnz: Vec<usize>,
}

impl ActiveRows {
    const ABSENT: usize = usize::MAX;

    fn new(nnz: Vec<usize>) -> Self {
        let mut rows = Vec::new();
        let mut pos = vec![Self::ABSENT; nnz.len()];
        for (i, &c) in nnz.iter().enumerate() {
            if c > 0 {
                pos[i] = rows.len();
                rows.push(i);
            }
        }
        Self { rows, pos, nnz }
    }

    fn set(&mut self, i: usize, count: usize) {
        self.nnz[i] = count;
        match (count > 0, self.pos[i] != Self::ABSENT) {
            (true, false) => {
                self.pos[i] = self.rows.len();
                self.rows.push(i);
            }
            (false, true) => {
                let p = self.pos[i];
                let last = *self.rows.last().expect("row is present");
                self.rows.swap_remove(p);
                if last != i {
                    self.pos[last] = p;
                }
                self.pos[i] = Self::ABSENT;
            }
            _ => {}
        }
    }

    fn total(&self) -> usize {
        self.nnz.iter().sum()
    }
}

/// Greedy factorization of `a`. The zero tolerance is `1e-12 ‖A‖_∞`.
pub fn factor(a: &SparseMatrix, config: &FactorConfig) -> Result<Factorization> {
    let tol = ZERO_TOL * a.max_abs();
    match config.mode {
        FactorMode::Explicit => {
            let mut oracle = ExplicitResidual::new(a, tol);
            let (u, v, stats) = factor_with(&mut oracle, config.seed)?;
            finish(a, u, v, oracle.to_matrix(), stats)
        }
        FactorMode::Implicit => {
            let mut oracle = ResidualView::new(a, tol);
            let (u, v, stats) = factor_with(&mut oracle, config.seed)?;
            let mut ws = Workspace::new(a.ncols());
            let mut line = Vec::new();
            let mut rows = Vec::with_capacity(a.nrows());
            for i in 0..a.nrows() {
                oracle.residual_row_into(i, &mut ws, &mut line);
                rows.push(line.clone());
            }
            finish(a, u, v, SparseMatrix::from_rows(a.ncols(), &rows), stats)
        }
    }
}

fn finish(
    a: &SparseMatrix,
    u: Vec<SparseVec>,
    v: Vec<SparseVec>,
    residual: SparseMatrix,
    stats: FactorStats,
) -> Result<Factorization> {
    let stack = |cols: &[SparseVec], dim: usize| {
        let trip = cols
            .iter()
            .enumerate()
            .flat_map(|(k, c)| c.iter().map(move |(i, x)| (i, k, x)));
        SparseMatrix::from_triplets(dim, cols.len(), trip)
    };
    let f = Factorization {
        u: stack(&u, a.nrows())?,
        v: stack(&v, a.ncols())?,
        residual,
        stats,
    };
    f.check_reconstruction(a)?;
    Ok(f)
}

/// Runs the greedy outer loop against any residual oracle and returns the
/// accepted factor columns. Stops once unsuccessful iterations outnumber
/// successful ones or the residual is empty.
pub fn factor_with<O: ResidualOracle>(
    oracle: &mut O,
    seed: u64,
) -> Result<(Vec<SparseVec>, Vec<SparseVec>, FactorStats)> {
    let started = Instant::now();
    let (m, n) = oracle.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ws = Workspace::new(m.max(n));
    let mut line = Vec::new();
    let counts = (0..m)
        .map(|i| {
            oracle.residual_row_into(i, &mut ws, &mut line);
            line.len()
        })
        .collect();
    let mut active = ActiveRows::new(counts);
    // every success removes at least one nonzero; failures trail successes
    let cap = 2 * active.total() as u64 + 2;
    let mut stats = FactorStats::default();
    let (mut us, mut vs) = (Vec::new(), Vec::new());
    while !active.rows.is_empty() && stats.unsuccessful <= stats.successful {
        stats.outer_iterations += 1;
        if stats.outer_iterations > cap {
            return Err(Error::IterationCap {
                stage: "factorization outer loop",
                cap,
            });
        }
        let start = active.rows[rng.gen_range(0..active.rows.len())];
        let r1 = factor_rank1(oracle, start, &mut ws)?;
        stats.inner_iterations.push(r1.alternations);
        stats.half_step_increases += r1.half_step_increases;
        let cost = (r1.u.nnz() + r1.v.nnz()) as i64;
        if r1.u.nnz() > 1 && r1.v.nnz() > 1 && r1.reduction > cost {
            oracle.install(&r1.u, &r1.v);
            for &i in &r1.u.indices {
                oracle.residual_row_into(i, &mut ws, &mut line);
                active.set(i, line.len());
            }
            us.push(r1.u);
            vs.push(r1.v);
            stats.successful += 1;
        } else {
            stats.unsuccessful += 1;
        }
    }
    stats.elapsed = started.elapsed();
    Ok((us, vs, stats))
}

/// Confirms every factor column of `f` stays inside one diagonal block.
/// `row_block[i]` and `col_block[j]` give the block of each row and column.
/// Returns the number of columns checked.
pub fn check_block_locality(f: &Factorization, row_block: &[usize], col_block: &[usize]) -> Result<usize> {
    if row_block.len() != f.u.nrows() || col_block.len() != f.v.nrows() {
        return Err(Error::Shape("block labels do not match the factorization".into()));
    }
    for k in 0..f.rank() {
        let blocks: Vec<usize> =
            f.u.col_at(k)
                .indices
                .iter()
                .map(|&i| row_block[i])
                .chain(f.v.col_at(k).indices.iter().map(|&j| col_block[j]))
                .collect();
        if let Some(&b0) = blocks.first() {
            if let Some(&other) = blocks.iter().find(|&&b| b != b0) {
                return Err(Error::Locality {
                    column: k,
                    blocks: (b0, other),
                });
            }
        }
    }
    Ok(f.rank())
}

/// The rank-one matrix `u v^T` with `u_i = i + 1`, `v_j = j + 1`, restricted
/// to its upper triangle (diagonal included).
pub fn upper_triangular_example(n: usize) -> SparseMatrix {
    let trip = (0..n).flat_map(|i| (i..n).map(move |j| (i, j, ((i + 1) * (j + 1)) as f64)));
    SparseMatrix::from_triplets(n, n, trip).expect("indices in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col_lines(a: &SparseMatrix, u: &SparseVec) -> Vec<Vec<(usize, f64)>> {
        u.indices.iter().map(|&i| a.row(i).unwrap().to_vec()).collect()
    }

    #[test]
    fn exact_rank_one() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 4.0], vec![3.0, 6.0]]);
        let u = SparseVec::from_pairs(2, vec![(0, 2.0), (1, 3.0)]);
        let v = factor_subproblem(&u, &col_lines(&a, &u), 2).unwrap();
        assert_eq!(v.to_dense(), vec![1.0, 2.0]);
    }

    #[test]
    fn basis_vector_copies_row() {
        let a = SparseMatrix::from_dense(&[vec![0.0, 5.0, -1.0], vec![7.0, 0.0, 2.0]]);
        let u = SparseVec::unit(2, 1);
        let v = factor_subproblem(&u, &col_lines(&a, &u), 3).unwrap();
        assert_eq!(v.to_dense(), vec![7.0, 0.0, 2.0]);
    }

    #[test]
    fn rejected_mode_leaves_zero() {
        // column j = (1, 0): choosing v_j = 1 turns one nonzero into another
        let a = SparseMatrix::from_dense(&[vec![1.0], vec![0.0]]);
        let u = SparseVec::from_pairs(2, vec![(0, 1.0), (1, 1.0)]);
        let v = factor_subproblem(&u, &col_lines(&a, &u), 1).unwrap();
        assert!(v.is_zero());
        // enumerate both choices: v_j = 0 keeps 1 nonzero, v_j = 1 keeps 1
        let keep = |vj: f64| {
            let r = [1.0 - vj, 0.0 - vj];
            r.iter().filter(|x| **x != 0.0).count()
        };
        assert_eq!(keep(0.0), keep(1.0));
    }

    #[test]
    fn mode_ties_pick_smallest() {
        let a = SparseMatrix::from_dense(&[vec![3.0], vec![1.0], vec![3.0], vec![1.0]]);
        let u = SparseVec::from_dense(&[1.0, 1.0, 1.0, 1.0]);
        // counts 2 and 2; 2 > 4 - 4 accepts, smallest wins
        let v = factor_subproblem(&u, &col_lines(&a, &u), 1).unwrap();
        assert_eq!(v.to_dense(), vec![1.0]);
    }

    #[test]
    fn zero_u_is_an_error() {
        assert!(factor_subproblem(&SparseVec::new(3), &[], 2).is_err());
    }

    #[test]
    fn dense_rank_one_is_cancelled() {
        let u = [1.0, -2.0, 3.0, 0.5];
        let v = [2.0, 1.0, -1.0, 4.0];
        let a = SparseMatrix::from_dense(&u.map(|ui| v.map(|vj| ui * vj).to_vec()));
        for seed in 0..5 {
            let f = factor(
                &a,
                &FactorConfig {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(f.residual.nnz(), 0);
            assert_eq!(f.rank(), 1);
        }
    }

    #[test]
    fn identity_has_no_useful_term() {
        let a = SparseMatrix::identity(4);
        let tol = ZERO_TOL;
        let oracle = ExplicitResidual::new(&a, tol);
        let mut ws = Workspace::new(4);
        for i in 0..4 {
            let r = factor_rank1(&oracle, i, &mut ws).unwrap();
            assert_eq!(r.v.nnz(), 1);
        }
        let f = factor(&a, &FactorConfig::default()).unwrap();
        assert_eq!(f.rank(), 0);
        assert_eq!(f.fnnz(), 4);
    }

    #[test]
    fn file_round_trip() {
        let a = upper_triangular_example(16);
        let f = factor(
            &a,
            &FactorConfig {
                seed: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        f.write(&mut buf).unwrap();
        let g = Factorization::read(&buf[..]).unwrap();
        assert_eq!(f, g);
        let cut = &buf[..buf.len() / 2];
        assert!(matches!(Factorization::read(cut), Err(Error::Parse { .. })));
    }

    #[test]
    fn locality_violation_is_named() {
        let mut f = Factorization::empty(&SparseMatrix::zeros(4, 4));
        f.u = SparseMatrix::from_triplets(4, 1, [(0, 0, 1.0), (3, 0, 1.0)]).unwrap();
        f.v = SparseMatrix::from_triplets(4, 1, [(0, 0, 1.0)]).unwrap();
        let err = check_block_locality(&f, &[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap_err();
        assert!(matches!(err, Error::Locality { column: 0, .. }));
    }
}
