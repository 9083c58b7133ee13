//! Dense two-phase simplex.
//!
//! The capacity programs in this crate have at most a few hundred variables,
//! so a dense tableau is plenty. Pivoting follows Bland's rule (lowest index
//! enters, lowest basic index leaves on ratio ties), which rules out cycling
//! on the highly degenerate flow programs and makes every solve reproducible.

use thiserror::Error;

/// Pivot, feasibility and optimality tolerance.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    InvalidInput(String),
    #[error("simplex iteration limit of {0} reached")]
    IterationLimit(usize),
    #[error("numerical breakdown: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarBound {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl Default for VarBound {
    fn default() -> Self {
        VarBound {
            lower: 0.0,
            upper: None,
        }
    }
}

/// `optimize c.x  s.t.  A x (<=|=|>=) b,  lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLp {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub row_kinds: Vec<RowKind>,
    pub bounds: Vec<VarBound>,
}

impl StandardFormLp {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        StandardFormLp {
            sense,
            objective,
            matrix: Vec::new(),
            rhs: Vec::new(),
            row_kinds: Vec::new(),
            bounds: vec![VarBound::default(); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, kind: RowKind, rhs: f64) {
        self.matrix.push(coeffs);
        self.row_kinds.push(kind);
        self.rhs.push(rhs);
    }

    /// Rows of kind `<=` or `>=`, each of which needs one slack variable.
    pub fn inequality_rows(&self) -> usize {
        self.row_kinds.iter().filter(|k| **k != RowKind::Eq).count()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        let m = self.rhs.len();
        if self.matrix.len() != m || self.row_kinds.len() != m {
            return Err(LpError::InvalidInput(format!(
                "{} matrix rows, {} kinds, {} right-hand sides",
                self.matrix.len(),
                self.row_kinds.len(),
                m
            )));
        }
        if self.bounds.len() != n {
            return Err(LpError::InvalidInput(format!("{} bounds for {n} variables", self.bounds.len())));
        }
        if let Some(i) = self.matrix.iter().position(|r| r.len() != n) {
            return Err(LpError::InvalidInput(format!("row {i} has {} entries, expected {n}", self.matrix[i].len())));
        }
        let finite = self.objective.iter().chain(&self.rhs).chain(self.matrix.iter().flatten()).all(|x| x.is_finite());
        if !finite {
            return Err(LpError::InvalidInput("non-finite coefficient".into()));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if !b.lower.is_finite() || b.upper.is_some_and(|u| !u.is_finite()) {
                return Err(LpError::InvalidInput(format!("non-finite bound on variable {j}")));
            }
        }
        Ok(())
    }
}

/// Sparse row-by-row construction of a [`StandardFormLp`].
#[derive(Debug, Clone)]
pub struct LpBuilder {
    sense: Sense,
    objective: Vec<f64>,
    bounds: Vec<VarBound>,
    rows: Vec<(Vec<(usize, f64)>, RowKind, f64)>,
}

impl LpBuilder {
    pub fn new(sense: Sense) -> Self {
        LpBuilder {
            sense,
            objective: Vec::new(),
            bounds: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: Option<f64>) -> usize {
        self.objective.push(cost);
        self.bounds.push(VarBound { lower, upper });
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, kind: RowKind, rhs: f64) {
        self.rows.push((terms, kind, rhs));
    }

    /// Adds `coeff` to the objective coefficient of `var`.
    pub fn add_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] += coeff;
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn build(self) -> StandardFormLp {
        let n = self.objective.len();
        let mut lp = StandardFormLp::new(self.sense, self.objective);
        lp.bounds = self.bounds;
        for (terms, kind, rhs) in self.rows {
            let mut dense = vec![0.0; n];
            for (j, a) in terms {
                dense[j] += a;
            }
            lp.add_row(dense, kind, rhs);
        }
        lp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: Option<f64>,
    pub x: Option<Vec<f64>>,
}

impl LpSolution {
    fn without(status: LpStatus) -> Self {
        LpSolution {
            status,
            objective: None,
            x: None,
        }
    }
}

struct Tableau {
    m: usize,
    width: usize,
    // (m + 1) rows of `width + 1` entries, last column is the rhs, last row the
    // reduced costs (negated objective value in its rhs cell)
    data: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
    limit: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.width + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * (self.width + 1) + self.width]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.width + 1;
        &mut self.data[i * w..(i + 1) * w]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width + 1;
        let p = self.at(r, c);
        for x in self.row_mut(r) {
            *x /= p;
        }
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                *x -= f * pv;
            }
            row[c] = 0.0;
            if row[w - 1].abs() < EPS * 1e-3 && i < self.m {
                row[w - 1] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Loads reduced costs `d = cost - c_B^T T` into the objective row.
    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.width + 1;
        let mut obj = vec![0.0; w];
        obj[..self.width].copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (x, &t) in obj.iter_mut().zip(&self.data[i * w..(i + 1) * w]) {
                    *x -= cb * t;
                }
            }
        }
        // rhs cell currently holds -c_B.b
        let m = self.m;
        self.row_mut(m).copy_from_slice(&obj);
    }

    fn run(&mut self, allowed: usize) -> Result<Outcome, LpError> {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.at(self.m, j) > EPS) else {
                return Ok(Outcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a <= EPS {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(LpError::IterationLimit(self.limit));
            }
            self.pivot(r, c);
        }
    }
}

/// Solves `lp`. Infeasible and unbounded programs are reported through
/// [`LpStatus`]; errors are reserved for malformed input and solver failure.
pub fn solve(lp: &StandardFormLp) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let limit = 50 * (lp.num_rows() + n).max(1) * lp.num_rows().max(n).max(1);

    // Shift to y = x - lower >= 0 and turn finite upper bounds into rows.
    let mut rows: Vec<(Vec<f64>, RowKind, f64)> = Vec::with_capacity(lp.num_rows() + n);
    for ((a, &kind), &b) in lp.matrix.iter().zip(&lp.row_kinds).zip(&lp.rhs) {
        let shift: f64 = a.iter().zip(&lp.bounds).map(|(aj, bd)| aj * bd.lower).sum();
        rows.push((a.clone(), kind, b - shift));
    }
    for (j, bd) in lp.bounds.iter().enumerate() {
        if let Some(u) = bd.upper {
            if u < bd.lower - EPS {
                return Ok(LpSolution::without(LpStatus::Infeasible));
            }
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, RowKind::Le, (u - bd.lower).max(0.0)));
        }
    }
    for (a, kind, b) in rows.iter_mut() {
        if *b < 0.0 {
            a.iter_mut().for_each(|x| *x = -*x);
            *b = -*b;
            *kind = match *kind {
                RowKind::Le => RowKind::Ge,
                RowKind::Ge => RowKind::Le,
                RowKind::Eq => RowKind::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != RowKind::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != RowKind::Le).count();
    let first_art = n + n_slack;
    let width = n + n_slack + n_art;
    let mut t = Tableau {
        m,
        width,
        data: vec![0.0; (m + 1) * (width + 1)],
        basis: vec![0; m],
        iterations: 0,
        limit,
    };
    let (mut s, mut art) = (n, first_art);
    for (i, (a, kind, b)) in rows.iter().enumerate() {
        let row = t.row_mut(i);
        row[..n].copy_from_slice(a);
        row[width] = *b;
        match kind {
            RowKind::Le => {
                row[s] = 1.0;
                t.basis[i] = s;
                s += 1;
            }
            RowKind::Ge => {
                row[s] = -1.0;
                row[art] = 1.0;
                t.basis[i] = art;
                s += 1;
                art += 1;
            }
            RowKind::Eq => {
                row[art] = 1.0;
                t.basis[i] = art;
                art += 1;
            }
        }
    }

    let scale = rows.iter().map(|r| r.2.abs()).fold(1.0, f64::max);
    if n_art > 0 {
        let mut cost = vec![0.0; width];
        cost[first_art..].iter_mut().for_each(|c| *c = -1.0);
        t.set_objective(&cost);
        let rhs: f64 = (0..m).filter(|&i| t.basis[i] >= first_art).map(|i| t.rhs(i)).sum();
        t.row_mut(m)[width] = rhs;
        t.run(width)?;
        if t.rhs(m) > EPS * scale {
            return Ok(LpSolution::without(LpStatus::Infeasible));
        }
        // Drive zero-level artificials out of the basis where possible; rows
        // with no usable pivot are redundant and stay put.
        for i in 0..m {
            if t.basis[i] >= first_art {
                if let Some(j) = (0..first_art).find(|&j| t.at(i, j).abs() > EPS) {
                    t.pivot(i, j);
                }
            }
        }
    }

    let sign = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut cost = vec![0.0; width];
    for j in 0..n {
        cost[j] = sign * lp.objective[j];
    }
    t.set_objective(&cost);
    let value: f64 = (0..m).map(|i| cost[t.basis[i]] * t.rhs(i)).sum();
    t.row_mut(m)[width] = -value;
    if let Outcome::Unbounded = t.run(first_art)? {
        return Ok(LpSolution::without(LpStatus::Unbounded));
    }

    let mut x: Vec<f64> = lp.bounds.iter().map(|b| b.lower).collect();
    for i in 0..m {
        let j = t.basis[i];
        if j < n {
            x[j] += t.rhs(i).max(0.0);
        }
    }
    check_feasible(lp, &x, scale)?;
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: Some(objective),
        x: Some(x),
    })
}

fn check_feasible(lp: &StandardFormLp, x: &[f64], scale: f64) -> Result<(), LpError> {
    let tol = 1e-6 * scale;
    for (i, ((a, kind), b)) in lp.matrix.iter().zip(&lp.row_kinds).zip(&lp.rhs).enumerate() {
        let lhs: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
        let ok = match kind {
            RowKind::Le => lhs <= b + tol,
            RowKind::Ge => lhs >= b - tol,
            RowKind::Eq => (lhs - b).abs() <= tol,
        };
        if !ok {
            return Err(LpError::Numerical(format!("row {i} violated: {lhs} vs {b}")));
        }
    }
    for (j, (v, bd)) in x.iter().zip(&lp.bounds).enumerate() {
        if *v < bd.lower - tol || bd.upper.is_some_and(|u| *v > u + tol) {
            return Err(LpError::Numerical(format!("bound on variable {j} violated: {v}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_lp(c: &[f64], rows: &[(&[f64], RowKind, f64)]) -> StandardFormLp {
        let mut lp = StandardFormLp::new(Sense::Maximize, c.to_vec());
        for (a, k, b) in rows {
            lp.add_row(a.to_vec(), *k, *b);
        }
        lp
    }

    #[test]
    fn single_bounded_variable() {
        let sol = solve(&max_lp(&[1.0], &[(&[1.0], RowKind::Le, 3.0)])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_face() {
        let sol = solve(&max_lp(&[1.0, 1.0], &[(&[1.0, 1.0], RowKind::Le, 1.0)])).unwrap();
        assert!((sol.objective.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_and_infeasible() {
        let sol = solve(&max_lp(&[1.0], &[])).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
        assert!(sol.objective.is_none());
        let sol = solve(&max_lp(&[1.0], &[(&[1.0], RowKind::Ge, 2.0), (&[1.0], RowKind::Le, 1.0)])).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_and_minimize() {
        // min x + 2y  s.t. x + y = 3, x <= 1
        let mut lp = StandardFormLp::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.add_row(vec![1.0, 1.0], RowKind::Eq, 3.0);
        lp.add_row(vec![1.0, 0.0], RowKind::Le, 1.0);
        let sol = solve(&lp).unwrap();
        assert!((sol.objective.unwrap() - 5.0).abs() < 1e-9);
        let x = sol.x.unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn variable_bounds() {
        let mut lp = StandardFormLp::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.bounds[0] = VarBound { lower: 1.0, upper: Some(2.5) };
        lp.bounds[1] = VarBound { lower: -1.0, upper: Some(0.5) };
        let sol = solve(&lp).unwrap();
        assert!((sol.objective.unwrap() - 3.0).abs() < 1e-9);
        lp.bounds[1] = VarBound { lower: 1.0, upper: Some(0.5) };
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = StandardFormLp::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.add_row(vec![1.0, 1.0], RowKind::Eq, 1.0);
        lp.add_row(vec![2.0, 2.0], RowKind::Eq, 2.0);
        let sol = solve(&lp).unwrap();
        assert!((sol.objective.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        let lp = max_lp(&[f64::NAN], &[]);
        assert!(matches!(solve(&lp), Err(LpError::InvalidInput(_))));
        let mut lp = max_lp(&[1.0, 1.0], &[]);
        lp.add_row(vec![1.0], RowKind::Le, 1.0);
        assert!(matches!(solve(&lp), Err(LpError::InvalidInput(_))));
        let lp = max_lp(&[1.0], &[(&[f64::INFINITY], RowKind::Le, 1.0)]);
        assert!(matches!(solve(&lp), Err(LpError::InvalidInput(_))));
    }

    #[test]
    fn deterministic() {
        let lp = max_lp(
            &[3.0, 2.0, 4.0],
            &[
                (&[1.0, 1.0, 2.0], RowKind::Le, 4.0),
                (&[2.0, 0.0, 3.0], RowKind::Le, 5.0),
                (&[2.0, 1.0, 3.0], RowKind::Le, 7.0),
            ],
        );
        assert_eq!(solve(&lp).unwrap(), solve(&lp).unwrap());
    }
}
