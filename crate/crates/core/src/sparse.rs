//! Sparse matrices with both row and column access, sparse vectors, and the
//! implicit residual view `A - U V^T` used by the factorizer.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Absolute magnitude below which a (normalized) residual entry counts as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Borrowed list of `(index, value)` pairs sorted by index.
#[derive(Debug, Clone, Copy)]
pub struct SparseSlice<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl<'a> SparseSlice<'a> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_vec(&self) -> Vec<(usize, f64)> {
        self.iter().collect()
    }
}

/// Immutable sparse matrix stored in both compressed-row and compressed-column
/// form. No explicit zeros and no duplicate coordinates are ever stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            row_cols: Vec::new(),
            row_vals: Vec::new(),
            col_ptr: vec![0; ncols + 1],
            col_rows: Vec::new(),
            col_vals: Vec::new(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Contributions to the
    /// same coordinate are summed; coordinates whose sum is exactly zero are
    /// dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in triplets {
            if i >= nrows {
                return Err(Error::OutOfRange { index: i, len: nrows });
            }
            if j >= ncols {
                return Err(Error::OutOfRange { index: j, len: ncols });
            }
            if !v.is_finite() {
                return Err(Error::Numerical(format!("non-finite entry at ({i}, {j})")));
            }
            entries.push((i, j, v));
        }
        // stable sort keeps the summation order of duplicates deterministic
        entries.sort_by_key(|e| (e.0, e.1));

        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        Ok(Self::from_sorted_unique(nrows, ncols, &merged))
    }

    /// `entries` must be sorted row-major, unique, and free of zeros.
    fn from_sorted_unique(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let nnz = entries.len();
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_ptr = vec![0usize; ncols + 1];
        for &(i, j, _) in entries {
            row_ptr[i + 1] += 1;
            col_ptr[j + 1] += 1;
        }
        for k in 0..nrows {
            row_ptr[k + 1] += row_ptr[k];
        }
        for k in 0..ncols {
            col_ptr[k + 1] += col_ptr[k];
        }
        let row_cols: Vec<usize> = entries.iter().map(|e| e.1).collect();
        let row_vals: Vec<f64> = entries.iter().map(|e| e.2).collect();
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![0f64; nnz];
        let mut next = col_ptr.clone();
        // row-major traversal fills each column in increasing row order
        for &(i, j, v) in entries {
            let slot = next[j];
            col_rows[slot] = i;
            col_vals[slot] = v;
            next[j] += 1;
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            row_cols,
            row_vals,
            col_ptr,
            col_rows,
            col_vals,
        }
    }

    /// Builds a matrix from per-row sorted entry lists (zeros are skipped).
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self::from_sorted_unique(rows.len(), ncols, &entries)
    }

    pub fn identity(n: usize) -> Self {
        let entries: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_sorted_unique(n, n, &entries)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self::from_sorted_unique(rows.len(), ncols, &entries)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.row_vals.len()
    }

    /// Nonzeros of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> Result<SparseSlice<'_>> {
        if i >= self.nrows {
            return Err(Error::OutOfRange {
                index: i,
                len: self.nrows,
            });
        }
        Ok(self.row_at(i))
    }

    /// Nonzeros of column `j`, sorted by row.
    pub fn col(&self, j: usize) -> Result<SparseSlice<'_>> {
        if j >= self.ncols {
            return Err(Error::OutOfRange {
                index: j,
                len: self.ncols,
            });
        }
        Ok(self.col_at(j))
    }

    pub(crate) fn row_at(&self, i: usize) -> SparseSlice<'_> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        SparseSlice {
            indices: &self.row_cols[r.clone()],
            values: &self.row_vals[r],
        }
    }

    pub(crate) fn col_at(&self, j: usize) -> SparseSlice<'_> {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        SparseSlice {
            indices: &self.col_rows[r.clone()],
            values: &self.col_vals[r],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = self.row_at(i);
        match row.indices.binary_search(&j) {
            Ok(k) => row.values[k],
            Err(_) => 0.0,
        }
    }

    /// Row-major triplets.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row_at(i).iter().map(move |(j, v)| (i, j, v)))
    }

    /// Column-major triplets.
    pub fn col_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| self.col_at(j).iter().map(move |(i, v)| (i, j, v)))
    }

    pub fn transpose(&self) -> Self {
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: self.col_ptr.clone(),
            row_cols: self.col_rows.clone(),
            row_vals: self.col_vals.clone(),
            col_ptr: self.row_ptr.clone(),
            col_rows: self.row_cols.clone(),
            col_vals: self.row_vals.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.row_vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.row_vals.iter_mut().for_each(|v| *v *= factor);
        out.col_vals.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::Shape(format!(
                "A x with A {}x{} and x of length {}",
                self.nrows,
                self.ncols,
                x.len()
            )));
        }
        Ok((0..self.nrows)
            .map(|i| self.row_at(i).iter().map(|(j, v)| v * x[j]).sum())
            .collect())
    }

    /// `A^T x`.
    pub fn tmul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows {
            return Err(Error::Shape(format!(
                "A^T x with A {}x{} and x of length {}",
                self.nrows,
                self.ncols,
                x.len()
            )));
        }
        Ok((0..self.ncols)
            .map(|j| self.col_at(j).iter().map(|(i, v)| v * x[i]).sum())
            .collect())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }

    /// Writes the triplet text format: `m n nnz` then one `i j value` line per
    /// nonzero, row-major, 0-indexed.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i} {j} {v:?}")?;
        }
        Ok(())
    }

    pub fn read_triplets<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (m, n, nnz) = loop {
            let Some((no, line)) = lines.next() else {
                return Err(Error::parse(1, "missing header `m n nnz`"));
            };
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(no + 1, "header must be `m n nnz`"));
            }
            break (
                parse_field::<usize>(f[0], no + 1)?,
                parse_field::<usize>(f[1], no + 1)?,
                parse_field::<usize>(f[2], no + 1)?,
            );
        };
        let mut triplets = Vec::with_capacity(nnz);
        let mut last_line = 1;
        for (no, line) in lines {
            let line = line?;
            last_line = no + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if triplets.len() == nnz {
                return Err(Error::parse(no + 1, "more entries than declared in header"));
            }
            triplets.push(parse_triplet_line(line, no + 1, m, n)?);
        }
        if triplets.len() != nnz {
            return Err(Error::parse(
                last_line + 1,
                format!("expected {nnz} entries, found {}", triplets.len()),
            ));
        }
        Self::from_triplets(m, n, triplets)
    }
}

pub(crate) fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::parse(line, format!("cannot parse `{s}`")))
}

pub(crate) fn parse_triplet_line(line: &str, no: usize, m: usize, n: usize) -> Result<(usize, usize, f64)> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 3 {
        return Err(Error::parse(no, "entry must be `i j value`"));
    }
    let i: usize = parse_field(f[0], no)?;
    let j: usize = parse_field(f[1], no)?;
    let v: f64 = parse_field(f[2], no)?;
    if i >= m || j >= n {
        return Err(Error::parse(no, format!("entry ({i}, {j}) outside {m}x{n}")));
    }
    Ok((i, j, v))
}

/// Sparse vector with sorted, unique indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    pub dim: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        Self {
            dim,
            indices: vec![i],
            values: vec![1.0],
        }
    }

    /// Pairs are sorted by index; zeros are dropped.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        pairs.retain(|p| p.1 != 0.0);
        let (indices, values) = pairs.into_iter().unzip();
        Self { dim, indices, values }
    }

    pub fn from_dense(x: &[f64]) -> Self {
        let pairs = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        Self::from_pairs(x.len(), pairs)
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

/// Dense scratch accumulator indexed by position, reset in time proportional
/// to the number of touched slots.
#[derive(Debug, Clone)]
pub struct Workspace {
    acc: Vec<f64>,
    live: Vec<bool>,
    touched: Vec<usize>,
}

impl Workspace {
    pub fn new(len: usize) -> Self {
        Self {
            acc: vec![0.0; len],
            live: vec![false; len],
            touched: Vec::new(),
        }
    }

    fn ensure(&mut self, len: usize) {
        if self.acc.len() < len {
            self.acc.resize(len, 0.0);
            self.live.resize(len, false);
        }
    }

    #[inline]
    fn set(&mut self, k: usize, v: f64) {
        if !self.live[k] {
            self.live[k] = true;
            self.touched.push(k);
        }
        self.acc[k] = v;
    }

    /// Subtracts `p` at slot `k`, snapping results within `tol` of zero to 0.
    #[inline]
    fn sub_snap(&mut self, k: usize, p: f64, tol: f64) {
        if !self.live[k] {
            self.live[k] = true;
            self.touched.push(k);
            self.acc[k] = 0.0;
        }
        let r = self.acc[k] - p;
        self.acc[k] = if r.abs() <= tol { 0.0 } else { r };
    }

    /// Moves the nonzero slots into `out` (sorted) and resets the workspace.
    fn drain_into(&mut self, out: &mut Vec<(usize, f64)>) {
        out.clear();
        self.touched.sort_unstable();
        for &k in &self.touched {
            let v = self.acc[k];
            if v != 0.0 {
                out.push((k, v));
            }
            self.live[k] = false;
            self.acc[k] = 0.0;
        }
        self.touched.clear();
    }
}

/// Source of residual rows and columns for the factorizer. Implementations
/// must return identical values for identical installed factor sequences.
pub trait ResidualOracle {
    fn shape(&self) -> (usize, usize);

    /// Nonzeros of residual row `i`, sorted by column.
    fn residual_row_into(&self, i: usize, ws: &mut Workspace, out: &mut Vec<(usize, f64)>);

    /// Nonzeros of residual column `j`, sorted by row.
    fn residual_col_into(&self, j: usize, ws: &mut Workspace, out: &mut Vec<(usize, f64)>);

    /// Subtracts `u v^T` from the residual.
    fn install(&mut self, u: &SparseVec, v: &SparseVec);

    /// Number of rank-one terms installed so far.
    fn rank(&self) -> usize;

    fn tolerance(&self) -> f64;
}

/// Implicit residual `A - U V^T` over an immutable base matrix. Rows of the
/// residual are computed on demand; the base is never modified.
#[derive(Debug, Clone)]
pub struct ResidualView<'a> {
    base: &'a SparseMatrix,
    tol: f64,
    u_cols: Vec<SparseVec>,
    v_cols: Vec<SparseVec>,
    // row i of U as (k, U_ik) in increasing k
    u_rows: Vec<Vec<(usize, f64)>>,
    v_rows: Vec<Vec<(usize, f64)>>,
}

impl<'a> ResidualView<'a> {
    pub fn new(base: &'a SparseMatrix, tol: f64) -> Self {
        Self {
            base,
            tol,
            u_cols: Vec::new(),
            v_cols: Vec::new(),
            u_rows: vec![Vec::new(); base.nrows()],
            v_rows: vec![Vec::new(); base.ncols()],
        }
    }

    pub fn base(&self) -> &SparseMatrix {
        self.base
    }

    pub fn u_columns(&self) -> &[SparseVec] {
        &self.u_cols
    }

    pub fn v_columns(&self) -> &[SparseVec] {
        &self.v_cols
    }

    /// Residual row `i` computed as `A_i - U_i V^T`.
    pub fn residual_row(&self, i: usize) -> Result<Vec<(usize, f64)>> {
        if i >= self.base.nrows() {
            return Err(Error::OutOfRange {
                index: i,
                len: self.base.nrows(),
            });
        }
        let mut ws = Workspace::new(self.base.ncols());
        let mut out = Vec::new();
        self.residual_row_into(i, &mut ws, &mut out);
        Ok(out)
    }

    pub fn residual_col(&self, j: usize) -> Result<Vec<(usize, f64)>> {
        if j >= self.base.ncols() {
            return Err(Error::OutOfRange {
                index: j,
                len: self.base.ncols(),
            });
        }
        let mut ws = Workspace::new(self.base.nrows());
        let mut out = Vec::new();
        self.residual_col_into(j, &mut ws, &mut out);
        Ok(out)
    }
}

fn accumulate(
    base: SparseSlice<'_>,
    weights: &[(usize, f64)],
    factors: &[SparseVec],
    tol: f64,
    ws: &mut Workspace,
    out: &mut Vec<(usize, f64)>,
) {
    for (j, a) in base.iter() {
        ws.set(j, if a.abs() <= tol { 0.0 } else { a });
    }
    // increasing k reproduces the subtraction order of the explicit residual
    for &(k, w) in weights {
        for (j, f) in factors[k].iter() {
            ws.sub_snap(j, w * f, tol);
        }
    }
    ws.drain_into(out);
}

impl ResidualOracle for ResidualView<'_> {
    fn shape(&self) -> (usize, usize) {
        self.base.shape()
    }

    fn residual_row_into(&self, i: usize, ws: &mut Workspace, out: &mut Vec<(usize, f64)>) {
        ws.ensure(self.base.ncols());
        accumulate(self.base.row_at(i), &self.u_rows[i], &self.v_cols, self.tol, ws, out);
    }

    fn residual_col_into(&self, j: usize, ws: &mut Workspace, out: &mut Vec<(usize, f64)>) {
        ws.ensure(self.base.nrows());
        accumulate(self.base.col_at(j), &self.v_rows[j], &self.u_cols, self.tol, ws, out);
    }

    fn install(&mut self, u: &SparseVec, v: &SparseVec) {
        let k = self.u_cols.len();
        for (i, x) in u.iter() {
            self.u_rows[i].push((k, x));
        }
        for (j, x) in v.iter() {
            self.v_rows[j].push((k, x));
        }
        self.u_cols.push(u.clone());
        self.v_cols.push(v.clone());
    }

    fn rank(&self) -> usize {
        self.u_cols.len()
    }

    fn tolerance(&self) -> f64 {
        self.tol
    }
}

/// Mutable working copy of a matrix, kept in both row and column form, for the
/// explicit factorization mode.
#[derive(Debug, Clone)]
pub struct ExplicitResidual {
    ncols: usize,
    tol: f64,
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
    rank: usize,
}

impl ExplicitResidual {
    pub fn new(base: &SparseMatrix, tol: f64) -> Self {
        let keep = |(_, v): &(usize, f64)| v.abs() > tol;
        let rows = (0..base.nrows())
            .map(|i| base.row_at(i).iter().filter(keep).collect())
            .collect();
        let cols = (0..base.ncols())
            .map(|j| base.col_at(j).iter().filter(keep).collect())
            .collect();
        Self {
            ncols: base.ncols(),
            tol,
            rows,
            cols,
            rank: 0,
        }
    }

    pub fn to_matrix(&self) -> SparseMatrix {
        SparseMatrix::from_rows(self.ncols, &self.rows)
    }
}

/// `line - w * f` over sorted entry lists, snapping near-zeros.
fn merge_subtract(line: &[(usize, f64)], w: f64, f: &SparseVec, tol: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(line.len() + f.nnz());
    let (mut a, mut b) = (0, 0);
    while a < line.len() || b < f.nnz() {
        let ka = line.get(a).map_or(usize::MAX, |e| e.0);
        let kb = f.indices.get(b).copied().unwrap_or(usize::MAX);
        let (k, r) = if ka < kb {
            a += 1;
            (ka, line[a - 1].1)
        } else if kb < ka {
            b += 1;
            (kb, 0.0 - w * f.values[b - 1])
        } else {
            a += 1;
            b += 1;
            (ka, line[a - 1].1 - w * f.values[b - 1])
        };
        let r = if r.abs() <= tol { 0.0 } else { r };
        if r != 0.0 {
            out.push((k, r));
        }
    }
    out
}

impl ResidualOracle for ExplicitResidual {
    fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.ncols)
    }

    fn residual_row_into(&self, i: usize, _ws: &mut Workspace, out: &mut Vec<(usize, f64)>) {
        out.clear();
        out.extend_from_slice(&self.rows[i]);
    }

    fn residual_col_into(&self, j: usize, _ws: &mut Workspace, out: &mut Vec<(usize, f64)>) {
        out.clear();
        out.extend_from_slice(&self.cols[j]);
    }

    fn install(&mut self, u: &SparseVec, v: &SparseVec) {
        for (i, ui) in u.iter() {
            self.rows[i] = merge_subtract(&self.rows[i], ui, v, self.tol);
        }
        for (j, vj) in v.iter() {
            // product is formed as u_i * v_j in both orientations
            let scaled = SparseVec {
                dim: u.dim,
                indices: u.indices.clone(),
                values: u.values.iter().map(|ui| ui * vj).collect(),
            };
            self.cols[j] = merge_subtract(&self.cols[j], 1.0, &scaled, self.tol);
        }
        self.rank += 1;
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn tolerance(&self) -> f64 {
        self.tol
    }
}

/// `Â^T x + V (U^T x)`: the transposed product with a factored matrix
/// `Â + U V^T`, without forming it.
pub fn matvec_factored(residual: &SparseMatrix, u: &SparseMatrix, v: &SparseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if u.nrows() != residual.nrows() || v.nrows() != residual.ncols() || u.ncols() != v.ncols() {
        return Err(Error::Shape(format!(
            "factored matvec with Â {}x{}, U {}x{}, V {}x{}",
            residual.nrows(),
            residual.ncols(),
            u.nrows(),
            u.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    let mut out = residual.tmul_vec(x)?;
    let w = u.tmul_vec(x)?;
    let vw = v.mul_vec(&w)?;
    out.iter_mut().zip(vw).for_each(|(o, p)| *o += p);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_row() {
        let a = SparseMatrix::identity(3);
        assert_eq!(a.row(1).unwrap().to_vec(), vec![(1, 1.0)]);
        assert!(a.row(3).is_err());
        assert!(a.col(7).is_err());
    }

    #[test]
    fn cancelling_duplicates_are_dropped() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 0, -1.0), (0, 1, 2.0), (0, 1, 3.0)]).unwrap();
        assert_eq!(a.row(0).unwrap().to_vec(), vec![(1, 5.0)]);
        assert_eq!(a.nnz(), 1);
    }

    #[test]
    fn rows_and_columns_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trip: Vec<_> = (0..200)
            .map(|_| {
                (
                    rng.gen_range(0..17),
                    rng.gen_range(0..11),
                    rng.gen_range(-3i32..4) as f64,
                )
            })
            .collect();
        let a = SparseMatrix::from_triplets(17, 11, trip).unwrap();
        let mut by_row: Vec<_> = a.triplets().collect();
        let mut by_col: Vec<_> = a.col_triplets().collect();
        by_row.sort_by_key(|x| (x.0, x.1));
        by_col.sort_by_key(|x| (x.0, x.1));
        assert_eq!(by_row, by_col);
        assert!(by_row.iter().all(|t| t.2 != 0.0));
    }

    #[test]
    fn triplet_text_round_trip() {
        let a = SparseMatrix::from_triplets(3, 4, [(0, 1, 0.1), (2, 3, -1.0 / 3.0), (1, 0, 7.0)]).unwrap();
        let mut buf = Vec::new();
        a.write_triplets(&mut buf).unwrap();
        let b = SparseMatrix::read_triplets(&buf[..]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_triplet_file_reports_line() {
        let text = "2 2 3\n0 0 1.0\n1 1 2.0\n";
        match SparseMatrix::read_triplets(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_view_is_base() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 0.0]]);
        let view = ResidualView::new(&a, ZERO_TOL);
        for i in 0..2 {
            assert_eq!(view.residual_row(i).unwrap(), a.row(i).unwrap().to_vec());
        }
        assert!(view.residual_row(2).is_err());
    }

    #[test]
    fn installed_outer_product_cancels() {
        let u = SparseVec::from_dense(&[2.0, 3.0, 0.0, 1.5]);
        let v = SparseVec::from_dense(&[1.0, 0.0, -4.0]);
        let dense: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..3).map(|j| u.to_dense()[i] * v.to_dense()[j]).collect())
            .collect();
        let a = SparseMatrix::from_dense(&dense);
        let mut view = ResidualView::new(&a, ZERO_TOL);
        view.install(&u, &v);
        for i in 0..4 {
            assert!(view.residual_row(i).unwrap().is_empty());
        }
        for j in 0..3 {
            assert!(view.residual_col(j).unwrap().is_empty());
        }
    }

    #[test]
    fn residual_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (m, n, r) = (20, 20, 3);
        let dense_a: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.4) {
                            rng.gen_range(-1.0..1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let a = SparseMatrix::from_dense(&dense_a);
        let rand_vec = |rng: &mut ChaCha8Rng, len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        rng.gen_range(-1.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let us: Vec<Vec<f64>> = (0..r).map(|_| rand_vec(&mut rng, m)).collect();
        let vs: Vec<Vec<f64>> = (0..r).map(|_| rand_vec(&mut rng, n)).collect();
        let mut view = ResidualView::new(&a, ZERO_TOL);
        for k in 0..r {
            view.install(&SparseVec::from_dense(&us[k]), &SparseVec::from_dense(&vs[k]));
        }
        for i in 0..m {
            let row = view.residual_row(i).unwrap();
            let mut got = vec![0.0; n];
            for (j, x) in row {
                got[j] = x;
            }
            for j in 0..n {
                let want = dense_a[i][j] - (0..r).map(|k| us[k][i] * vs[k][j]).sum::<f64>();
                assert!((got[j] - want).abs() <= 1e-12, "({i},{j}) {} vs {want}", got[j]);
            }
        }
    }

    #[test]
    fn explicit_and_implicit_residuals_agree_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trip: Vec<_> = (0..150)
            .map(|_| (rng.gen_range(0..15), rng.gen_range(0..12), rng.gen_range(1..5) as f64))
            .collect();
        let a = SparseMatrix::from_triplets(15, 12, trip).unwrap();
        let mut implicit = ResidualView::new(&a, ZERO_TOL);
        let mut explicit = ExplicitResidual::new(&a, ZERO_TOL);
        for _ in 0..4 {
            let u = SparseVec::from_dense(
                &(0..15)
                    .map(|_| {
                        if rng.gen_bool(0.3) {
                            rng.gen_range(1..4) as f64
                        } else {
                            0.0
                        }
                    })
                    .collect::<Vec<_>>(),
            );
            let v = SparseVec::from_dense(
                &(0..12)
                    .map(|_| {
                        if rng.gen_bool(0.3) {
                            rng.gen_range(1..4) as f64 / 2.0
                        } else {
                            0.0
                        }
                    })
                    .collect::<Vec<_>>(),
            );
            implicit.install(&u, &v);
            explicit.install(&u, &v);
        }
        let mut ws = Workspace::new(16);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for i in 0..15 {
            implicit.residual_row_into(i, &mut ws, &mut x);
            explicit.residual_row_into(i, &mut ws, &mut y);
            assert_eq!(x, y);
        }
        for j in 0..12 {
            implicit.residual_col_into(j, &mut ws, &mut x);
            explicit.residual_col_into(j, &mut ws, &mut y);
            assert_eq!(x, y);
        }
    }

    #[test]
    fn factored_matvec_special_cases() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, -1.0], vec![3.0, 0.0]]);
        let empty_u = SparseMatrix::zeros(3, 0);
        let empty_v = SparseMatrix::zeros(2, 0);
        let x = [0.5, -1.0, 2.0];
        assert_eq!(
            matvec_factored(&a, &empty_u, &empty_v, &x).unwrap(),
            a.tmul_vec(&x).unwrap()
        );

        let u = SparseMatrix::from_dense(&[vec![1.0], vec![2.0], vec![0.0]]);
        let v = SparseMatrix::from_dense(&[vec![0.0], vec![4.0]]);
        // row 1 of Â + U V^T is (0, -1 + 8)
        let got = matvec_factored(&a, &u, &v, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(got, vec![0.0, 7.0]);
        assert!(matvec_factored(&a, &u, &empty_v, &x).is_err());
    }
}
