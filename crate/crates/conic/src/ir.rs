//! Program representation: variables, sparse affine expressions, and the
//! three constraint classes (linear, second-order cone, PSD).

/// Opaque variable identifier, unique within one program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarShape {
    Scalar,
    Matrix { rows: usize, cols: usize },
    /// Symmetric matrix stored as the packed lower triangle, row by row:
    /// entry `(i, j)` with `i >= j` lives at index `i (i + 1) / 2 + j`.
    Symmetric { dim: usize },
}

impl VarShape {
    pub fn len(&self) -> usize {
        match *self {
            VarShape::Scalar => 1,
            VarShape::Matrix { rows, cols } => rows * cols,
            VarShape::Symmetric { dim } => dim * (dim + 1) / 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariableHandle {
    pub id: VarId,
    pub shape: VarShape,
}

impl VariableHandle {
    pub fn len(&self) -> usize {
        self.shape.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shape.is_empty()
    }

    /// Scalar entry of a scalar variable.
    pub fn scalar(&self) -> Entry {
        debug_assert!(matches!(self.shape, VarShape::Scalar));
        Entry { var: self.id, index: 0 }
    }

    /// Entry `(i, j)` of a matrix or symmetric variable.
    pub fn entry(&self, i: usize, j: usize) -> Entry {
        let index = match self.shape {
            VarShape::Scalar => {
                debug_assert!(i == 0 && j == 0);
                0
            }
            VarShape::Matrix { rows, cols } => {
                debug_assert!(i < rows && j < cols);
                i * cols + j
            }
            VarShape::Symmetric { dim } => {
                debug_assert!(i < dim && j < dim);
                let (r, c) = if i >= j { (i, j) } else { (j, i) };
                r * (r + 1) / 2 + c
            }
        };
        Entry { var: self.id, index }
    }

    /// Flat entry by storage index.
    pub fn at(&self, index: usize) -> Entry {
        debug_assert!(index < self.len());
        Entry { var: self.id, index }
    }
}

/// One scalar component of a declared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Entry {
    pub var: VarId,
    pub index: usize,
}

/// Sparse affine expression `constant + sum coef * entry`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinExpr {
    pub terms: Vec<(Entry, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn term(e: Entry) -> Self {
        LinExpr { terms: vec![(e, 1.0)], constant: 0.0 }
    }

    pub fn scaled(e: Entry, coef: f64) -> Self {
        LinExpr { terms: vec![(e, coef)], constant: 0.0 }
    }

    /// `a - b` for two entries.
    pub fn diff(a: Entry, b: Entry) -> Self {
        LinExpr { terms: vec![(a, 1.0), (b, -1.0)], constant: 0.0 }
    }

    pub fn push(&mut self, coef: f64, e: Entry) -> &mut Self {
        self.terms.push((e, coef));
        self
    }

    pub fn add_const(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        for &(e, c) in &other.terms {
            self.terms.push((e, c * scale));
        }
        self.constant += other.constant * scale;
        self
    }

    pub fn scale(mut self, s: f64) -> Self {
        for (_, c) in self.terms.iter_mut() {
            *c *= s;
        }
        self.constant *= s;
        self
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub expr: LinExpr,
    pub rel: Relation,
    pub rhs: f64,
}

/// `|| vector ||_2 <= bound`, all components affine.
#[derive(Debug, Clone, PartialEq)]
pub struct SocConstraint {
    pub bound: LinExpr,
    pub vector: Vec<LinExpr>,
}

/// Affine symmetric matrix required positive semidefinite. Entries are the
/// packed lower triangle, row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdConstraint {
    pub dim: usize,
    pub entries: Vec<LinExpr>,
}

impl PsdConstraint {
    /// A symmetric matrix variable itself required PSD.
    pub fn from_variable(h: VariableHandle) -> Self {
        let VarShape::Symmetric { dim } = h.shape else {
            panic!("PsdConstraint::from_variable needs a symmetric variable");
        };
        PsdConstraint {
            dim,
            entries: (0..h.len()).map(|k| LinExpr::term(h.at(k))).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Affine objective plus an optional convex-quadratic part represented as a
/// weighted sum of squares of affine expressions: `affine + sum w_i sq_i^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: Sense,
    pub affine: LinExpr,
    pub squares: Vec<(f64, LinExpr)>,
}

impl Objective {
    pub fn minimize(affine: LinExpr) -> Self {
        Objective { sense: Sense::Minimize, affine, squares: Vec::new() }
    }

    pub fn maximize(affine: LinExpr) -> Self {
        Objective { sense: Sense::Maximize, affine, squares: Vec::new() }
    }

    pub fn is_linear(&self) -> bool {
        self.squares.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub variables: Vec<VariableHandle>,
    pub linear: Vec<LinearConstraint>,
    pub soc: Vec<SocConstraint>,
    pub psd: Vec<PsdConstraint>,
    pub objective: Objective,
}

impl Default for ConicProgram {
    fn default() -> Self {
        Self::new()
    }
}

impl ConicProgram {
    pub fn new() -> Self {
        ConicProgram {
            variables: Vec::new(),
            linear: Vec::new(),
            soc: Vec::new(),
            psd: Vec::new(),
            objective: Objective::minimize(LinExpr::zero()),
        }
    }

    fn add_var(&mut self, shape: VarShape) -> VariableHandle {
        let h = VariableHandle { id: VarId(self.variables.len()), shape };
        self.variables.push(h);
        h
    }

    pub fn add_scalar(&mut self) -> VariableHandle {
        self.add_var(VarShape::Scalar)
    }

    pub fn add_matrix(&mut self, rows: usize, cols: usize) -> VariableHandle {
        self.add_var(VarShape::Matrix { rows, cols })
    }

    pub fn add_symmetric(&mut self, dim: usize) -> VariableHandle {
        self.add_var(VarShape::Symmetric { dim })
    }

    pub fn add_linear(&mut self, expr: LinExpr, rel: Relation, rhs: f64) {
        self.linear.push(LinearConstraint { expr, rel, rhs });
    }

    pub fn add_eq(&mut self, expr: LinExpr, rhs: f64) {
        self.add_linear(expr, Relation::Eq, rhs);
    }

    pub fn add_le(&mut self, expr: LinExpr, rhs: f64) {
        self.add_linear(expr, Relation::Le, rhs);
    }

    pub fn add_ge(&mut self, expr: LinExpr, rhs: f64) {
        self.add_linear(expr, Relation::Ge, rhs);
    }

    pub fn add_soc(&mut self, bound: LinExpr, vector: Vec<LinExpr>) {
        self.soc.push(SocConstraint { bound, vector });
    }

    pub fn add_psd(&mut self, c: PsdConstraint) {
        self.psd.push(c);
    }

    pub fn set_objective(&mut self, obj: Objective) {
        self.objective = obj;
    }

    /// Total scalar entries over all variables.
    pub fn num_entries(&self) -> usize {
        self.variables.iter().map(|v| v.len()).sum()
    }

    /// Flat offset of each variable in the stacked scalar vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.variables.len());
        let mut acc = 0;
        for v in &self.variables {
            offsets.push(acc);
            acc += v.len();
        }
        offsets
    }
}
