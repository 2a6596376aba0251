//! The sequence-form LP, its factored variant and the inequality standard
//! form consumed by the ALM solver.
//!
//! ```text
//! max  c^T z
//! s.t. B x = b,  x >= 0
//!      C^T z <= Â^T x + V w
//!      U^T x = w,  z and w free
//! ```
//!
//! With no factor columns this is the plain LP `C^T z <= A^T x`. Here `x` is
//! player one's realization plan, `B x = b` its treeplex constraints and
//! `C y = c` player two's. The optimum is player one's game value.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::factor::Factorization;
use crate::payoff::SequenceForm;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct GameLP {
    /// `c`, indexed by `z`.
    pub objective: Vec<f64>,
    pub b_mat: SparseMatrix,
    pub b_rhs: Vec<f64>,
    pub c_mat: SparseMatrix,
    /// `Â` (or `A` when unfactored), `|S_1| x |S_2|`.
    pub residual: SparseMatrix,
    pub u: SparseMatrix,
    pub v: SparseMatrix,
}

impl GameLP {
    pub fn num_x(&self) -> usize {
        self.b_mat.ncols()
    }

    pub fn num_z(&self) -> usize {
        self.c_mat.nrows()
    }

    pub fn num_w(&self) -> usize {
        self.u.ncols()
    }

    pub fn is_factored(&self) -> bool {
        self.num_w() > 0
    }

    /// Nonzeros over all constraint blocks, counting `w` in `U^T x = w`.
    pub fn constraint_nnz(&self) -> usize {
        self.b_mat.nnz() + self.c_mat.nnz() + self.residual.nnz() + self.v.nnz() + self.u.nnz() + self.num_w()
    }
}

/// `max c^T z` s.t. `B x = b`, `C^T z <= A^T x`, `x >= 0`.
pub fn build_lp(a: &SparseMatrix, b_mat: &SparseMatrix, b: &[f64], c_mat: &SparseMatrix, c: &[f64]) -> Result<GameLP> {
    build_factored_lp(&Factorization::empty(a), b_mat, b, c_mat, c)
}

/// The factored LP. The factorization must reconstruct exactly.
pub fn build_factored_lp(
    f: &Factorization,
    b_mat: &SparseMatrix,
    b: &[f64],
    c_mat: &SparseMatrix,
    c: &[f64],
) -> Result<GameLP> {
    let (m, n) = f.residual.shape();
    let shape_err = |what: &str| Err(Error::Shape(what.to_string()));
    if b_mat.ncols() != m || b.len() != b_mat.nrows() {
        return shape_err("B and b must match the rows of A");
    }
    if c_mat.ncols() != n || c.len() != c_mat.nrows() {
        return shape_err("C and c must match the columns of A");
    }
    if f.u.nrows() != m || f.v.nrows() != n || f.u.ncols() != f.v.ncols() {
        return shape_err("factor matrices do not match A");
    }
    Ok(GameLP {
        objective: c.to_vec(),
        b_mat: b_mat.clone(),
        b_rhs: b.to_vec(),
        c_mat: c_mat.clone(),
        residual: f.residual.clone(),
        u: f.u.clone(),
        v: f.v.clone(),
    })
}

impl SequenceForm {
    pub fn lp(&self) -> Result<GameLP> {
        build_lp(
            self.matrix(),
            &self.tp1.constraint_matrix(),
            &self.tp1.constraint_rhs(),
            &self.tp2.constraint_matrix(),
            &self.tp2.constraint_rhs(),
        )
    }

    /// Refuses to build unless `f` reconstructs this game's payoff matrix.
    pub fn factored_lp(&self, f: &Factorization) -> Result<GameLP> {
        f.check_reconstruction(self.matrix())?;
        build_factored_lp(
            f,
            &self.tp1.constraint_matrix(),
            &self.tp1.constraint_rhs(),
            &self.tp2.constraint_matrix(),
            &self.tp2.constraint_rhs(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Variables are `x`, `z`, `w`; player one's plan is read from the
    /// primal iterate.
    #[default]
    Primal,
    /// The LP dual of the primal orientation; player two's plan is read from
    /// the primal iterate.
    Dual,
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primal" => Ok(Orientation::Primal),
            "dual" => Ok(Orientation::Dual),
            _ => Err(Error::Parameter(format!(
                "orientation must be primal or dual, got `{s}`"
            ))),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Primal => "primal",
            Orientation::Dual => "dual",
        })
    }
}

/// What a standard-form row or column stands for. `Pos`/`Neg` halves come
/// from splitting free variables and equality rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    /// Player one sequence.
    X(usize),
    ZPos(usize),
    ZNeg(usize),
    WPos(usize),
    WNeg(usize),
    /// `B x <= b` row.
    BUpper(usize),
    /// `-B x <= -b` row.
    BLower(usize),
    /// Row of `C^T z <= Â^T x + V w` for player two sequence `j`.
    Y(usize),
    UUpper(usize),
    ULower(usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::X(i) => write!(f, "x{i}"),
            Label::ZPos(k) => write!(f, "z{k}+"),
            Label::ZNeg(k) => write!(f, "z{k}-"),
            Label::WPos(k) => write!(f, "w{k}+"),
            Label::WNeg(k) => write!(f, "w{k}-"),
            Label::BUpper(r) => write!(f, "B{r}<="),
            Label::BLower(r) => write!(f, "B{r}>="),
            Label::Y(j) => write!(f, "y{j}"),
            Label::UUpper(k) => write!(f, "U{k}<="),
            Label::ULower(k) => write!(f, "U{k}>="),
        }
    }
}

/// `min c^T x` s.t. `A x <= b`, `x >= 0`.
#[derive(Debug, Clone)]
pub struct StandardFormLP {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub var_labels: Vec<Label>,
    pub con_labels: Vec<Label>,
    pub orientation: Orientation,
    pub num_seq1: usize,
    pub num_seq2: usize,
    /// Row `i` of `a` and `b` has been divided by `row_scale[i]`, so the
    /// multiplier of the original row is `y_i / row_scale[i]`.
    pub row_scale: Vec<f64>,
}

impl StandardFormLP {
    /// Divides every row of `a` and `b` by its Euclidean norm. The feasible
    /// set and the optimum are unchanged.
    pub fn equilibrate_rows(&mut self) {
        let norms: Vec<f64> = (0..self.a.nrows())
            .map(|i| {
                let n = self.a.row_at(i).iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
                if n > 0.0 {
                    n
                } else {
                    1.0
                }
            })
            .collect();
        let t = self.a.triplets().map(|(i, j, v)| (i, j, v / norms[i]));
        self.a = SparseMatrix::from_triplets(self.a.nrows(), self.a.ncols(), t).expect("same shape");
        for ((b, s), n) in self.b.iter_mut().zip(self.row_scale.iter_mut()).zip(norms) {
            *b /= n;
            *s *= n;
        }
    }

    /// Player one's game value for a standard-form objective value. The
    /// primal orientation minimizes `-c^T z`, the dual its negation.
    pub fn game_value(&self, objective: f64) -> f64 {
        match self.orientation {
            Orientation::Primal => -objective,
            Orientation::Dual => objective,
        }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Writes the constraint matrix as triplets and a JSON sidecar holding
    /// `b`, `c` and the labels.
    pub fn export<W1: Write, W2: Write>(&self, matrix: W1, mut sidecar: W2) -> Result<()> {
        self.a.write_triplets(matrix)?;
        let doc = serde_json::json!({
            "orientation": self.orientation.to_string(),
            "rows": self.a.nrows(),
            "cols": self.a.ncols(),
            "b": self.b,
            "c": self.c,
            "row_scale": self.row_scale,
            "variables": self.var_labels.iter().map(Label::to_string).collect::<Vec<_>>(),
            "constraints": self.con_labels.iter().map(Label::to_string).collect::<Vec<_>>(),
        });
        serde_json::to_writer_pretty(&mut sidecar, &doc).map_err(std::io::Error::from)?;
        writeln!(sidecar)?;
        Ok(())
    }
}

/// Splits equalities into `<=` pairs and free variables into differences of
/// nonnegatives. The dual orientation is `min b^T y` s.t. `-A^T y <= c`.
pub fn to_standard_form(lp: &GameLP, orientation: Orientation) -> Result<StandardFormLP> {
    let (nx, nz, nw) = (lp.num_x(), lp.num_z(), lp.num_w());
    let n2 = lp.c_mat.ncols();
    let kb = lp.b_mat.nrows();

    // columns: x | z+ | z- | w+ | w-
    let (zp, zn, wp, wn) = (nx, nx + nz, nx + 2 * nz, nx + 2 * nz + nw);
    let ncols = nx + 2 * nz + 2 * nw;
    // rows: B<= | B>= | y | U<= | U>=
    let (bl, yr, uu, ul) = (kb, 2 * kb, 2 * kb + n2, 2 * kb + n2 + nw);
    let nrows = 2 * kb + n2 + 2 * nw;

    let mut t: Vec<(usize, usize, f64)> = Vec::new();
    for (r, i, x) in lp.b_mat.triplets() {
        t.push((r, i, x));
        t.push((bl + r, i, -x));
    }
    // C^T z - Â^T x - V w <= 0
    for (k, j, x) in lp.c_mat.triplets() {
        t.push((yr + j, zp + k, x));
        t.push((yr + j, zn + k, -x));
    }
    for (i, j, x) in lp.residual.triplets() {
        t.push((yr + j, i, -x));
    }
    for (j, k, x) in lp.v.triplets() {
        t.push((yr + j, wp + k, -x));
        t.push((yr + j, wn + k, x));
    }
    // U^T x - w <= 0 and -U^T x + w <= 0
    for (i, k, x) in lp.u.triplets() {
        t.push((uu + k, i, x));
        t.push((ul + k, i, -x));
    }
    for k in 0..nw {
        t.push((uu + k, wp + k, -1.0));
        t.push((uu + k, wn + k, 1.0));
        t.push((ul + k, wp + k, 1.0));
        t.push((ul + k, wn + k, -1.0));
    }
    let a = SparseMatrix::from_triplets(nrows, ncols, t)?;

    let mut b = vec![0.0; nrows];
    for (r, &x) in lp.b_rhs.iter().enumerate() {
        b[r] = x;
        b[bl + r] = -x;
    }
    let mut c = vec![0.0; ncols];
    for (k, &x) in lp.objective.iter().enumerate() {
        c[zp + k] = -x;
        c[zn + k] = x;
    }

    let var_labels: Vec<Label> = (0..nx)
        .map(Label::X)
        .chain((0..nz).map(Label::ZPos))
        .chain((0..nz).map(Label::ZNeg))
        .chain((0..nw).map(Label::WPos))
        .chain((0..nw).map(Label::WNeg))
        .collect();
    let con_labels: Vec<Label> = (0..kb)
        .map(Label::BUpper)
        .chain((0..kb).map(Label::BLower))
        .chain((0..n2).map(Label::Y))
        .chain((0..nw).map(Label::UUpper))
        .chain((0..nw).map(Label::ULower))
        .collect();

    let primal = StandardFormLP {
        row_scale: vec![1.0; nrows],
        a,
        b,
        c,
        var_labels,
        con_labels,
        orientation: Orientation::Primal,
        num_seq1: nx,
        num_seq2: n2,
    };
    Ok(match orientation {
        Orientation::Primal => primal,
        Orientation::Dual => StandardFormLP {
            row_scale: vec![1.0; ncols],
            a: primal.a.transpose().scaled(-1.0),
            b: primal.c,
            c: primal.b,
            var_labels: primal.con_labels,
            con_labels: primal.var_labels,
            orientation: Orientation::Dual,
            num_seq1: nx,
            num_seq2: n2,
        },
    })
}

/// The orientation whose primal iterate holds the smaller player's plan.
pub fn default_orientation(sf: &SequenceForm) -> Orientation {
    if sf.tp1.num_sequences() <= sf.tp2.num_sequences() {
        Orientation::Primal
    } else {
        Orientation::Dual
    }
}
