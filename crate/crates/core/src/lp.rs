//! Dense two-phase simplex over [`Scalar`] with Bland's anti-cycling rule.
//!
//! Solves `max c·x  s.t.  A x <= b, x >= 0`. With exact-rational data every
//! pivot is exact, so feasibility and optimality decisions are certificates
//! rather than estimates; float data falls back to a small tolerance.

use crate::scalar::Scalar;

const FLOAT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<Scalar>, value: Scalar },
}

fn is_pos(x: &Scalar) -> bool {
    match x {
        Scalar::Exact(_) => x.sign() == crate::scalar::Sign::Pos,
        Scalar::Real(v) => *v > FLOAT_TOL,
    }
}

fn is_neg(x: &Scalar) -> bool {
    match x {
        Scalar::Exact(_) => x.sign() == crate::scalar::Sign::Neg,
        Scalar::Real(v) => *v < -FLOAT_TOL,
    }
}

struct Tableau {
    /// m rows of length ncols; last entry of each row is the RHS.
    rows: Vec<Vec<Scalar>>,
    /// Reduced-cost row of length ncols (last entry = objective value).
    obj: Vec<Scalar>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for j in 0..self.ncols {
            self.rows[r][j] = &self.rows[r][j] * &inv;
        }
        for i in 0..self.rows.len() {
            if i != r && !self.rows[i][c].is_zero() {
                let f = self.rows[i][c].clone();
                for j in 0..self.ncols {
                    self.rows[i][j] = &self.rows[i][j] - &(&f * &self.rows[r][j]);
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for j in 0..self.ncols {
                self.obj[j] = &self.obj[j] - &(&f * &self.rows[r][j]);
            }
        }
        self.basis[r] = c;
    }

    /// Run simplex to optimality with Bland's rule over the columns in
    /// `0..nvars`. Returns false on unboundedness.
    fn solve(&mut self, nvars: usize, banned: &[bool]) -> bool {
        loop {
            // Bland: entering column = lowest index with negative reduced cost.
            let mut enter = None;
            for j in 0..nvars {
                if !banned[j] && is_neg(&self.obj[j]) {
                    enter = Some(j);
                    break;
                }
            }
            let Some(c) = enter else { return true };
            // Ratio test; Bland tie-break on lowest basis variable index.
            let rhs = self.ncols - 1;
            let mut leave: Option<(usize, Scalar)> = None;
            for i in 0..self.rows.len() {
                if is_pos(&self.rows[i][c]) {
                    let ratio = &self.rows[i][rhs] / &self.rows[i][c];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, c);
        }
    }
}

/// Maximize `obj . x` subject to `rows[i].0 . x <= rows[i].1` and `x >= 0`.
pub fn maximize(obj: &[Scalar], rows: &[(Vec<Scalar>, Scalar)]) -> LpOutcome {
    let n = obj.len();
    let m = rows.len();
    // Columns: n structural, m slacks, then artificials for rows whose RHS
    // is negative after slack insertion, then RHS.
    let neg_rows: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, (_, b))| is_neg(b) || (b.sign() == crate::scalar::Sign::Neg))
        .map(|(i, _)| i)
        .collect();
    let na = neg_rows.len();
    let ncols = n + m + na + 1;
    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        obj: vec![Scalar::zero(); ncols],
        basis: vec![0; m],
        ncols,
    };
    let mut art_of_row = vec![None; m];
    for (k, &i) in neg_rows.iter().enumerate() {
        art_of_row[i] = Some(n + m + k);
    }
    for (i, (a, b)) in rows.iter().enumerate() {
        let mut row = vec![Scalar::zero(); ncols];
        let negate = art_of_row[i].is_some();
        for (j, v) in a.iter().enumerate() {
            row[j] = if negate { -v } else { v.clone() };
        }
        row[n + i] = if negate { Scalar::int(-1) } else { Scalar::one() };
        if let Some(ac) = art_of_row[i] {
            row[ac] = Scalar::one();
            t.basis[i] = ac;
        } else {
            t.basis[i] = n + i;
        }
        row[ncols - 1] = if negate { -b } else { b.clone() };
        t.rows.push(row);
    }

    let banned = vec![false; ncols - 1];
    if na > 0 {
        // Phase 1: maximize -(sum of artificials).
        for k in 0..na {
            t.obj[n + m + k] = Scalar::one();
        }
        // Zero out reduced costs of the (artificial) basic columns.
        for i in 0..m {
            if art_of_row[i].is_some() {
                let f = t.obj[t.basis[i]].clone();
                if !f.is_zero() {
                    for j in 0..ncols {
                        t.obj[j] = &t.obj[j] - &(&f * &t.rows[i][j]);
                    }
                }
            }
        }
        if !t.solve(ncols - 1, &banned) {
            // Phase 1 objective is bounded by 0; cannot be unbounded.
            return LpOutcome::Infeasible;
        }
        let value = -&t.obj[ncols - 1];
        if is_pos(&value) {
            return LpOutcome::Infeasible;
        }
        // Drive leftover artificials out of the basis where possible.
        for i in 0..m {
            if t.basis[i] >= n + m {
                let mut pivoted = false;
                for j in 0..n + m {
                    if !t.rows[i][j].is_zero() {
                        t.pivot(i, j);
                        pivoted = true;
                        break;
                    }
                }
                // A fully zero row is redundant; leaving the (zero-valued)
                // artificial basic is safe as long as it never re-enters.
                let _ = pivoted;
            }
        }
    }

    // Phase 2.
    let mut banned = vec![false; ncols - 1];
    for j in n + m..ncols - 1 {
        banned[j] = true;
    }
    t.obj = vec![Scalar::zero(); ncols];
    for j in 0..n {
        t.obj[j] = -&obj[j];
    }
    for i in 0..m {
        let b = t.basis[i];
        if b < n {
            let f = t.obj[b].clone();
            if !f.is_zero() {
                for j in 0..ncols {
                    t.obj[j] = &t.obj[j] - &(&f * &t.rows[i][j]);
                }
            }
        }
    }
    if !t.solve(ncols - 1, &banned) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Scalar::zero(); n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rows[i][ncols - 1].clone();
        }
    }
    let value = t.obj[ncols - 1].clone();
    LpOutcome::Optimal { x, value }
}

/// Maximize `obj . y` over free variables subject to `A y <= b`, by the
/// standard split `y = u - w` with `u, w >= 0`.
pub fn maximize_free(obj: &[Scalar], rows: &[(Vec<Scalar>, Scalar)]) -> LpOutcomeFree {
    let d = obj.len();
    let mut obj2 = Vec::with_capacity(2 * d);
    for c in obj {
        obj2.push(c.clone());
    }
    for c in obj {
        obj2.push(-c);
    }
    let rows2: Vec<(Vec<Scalar>, Scalar)> = rows
        .iter()
        .map(|(a, b)| {
            let mut r = Vec::with_capacity(2 * d);
            for c in a {
                r.push(c.clone());
            }
            for c in a {
                r.push(-c);
            }
            (r, b.clone())
        })
        .collect();
    match maximize(&obj2, &rows2) {
        LpOutcome::Infeasible => LpOutcomeFree::Infeasible,
        LpOutcome::Unbounded => LpOutcomeFree::Unbounded,
        LpOutcome::Optimal { x, value } => {
            let y = (0..d).map(|i| &x[i] - &x[d + i]).collect();
            LpOutcomeFree::Optimal { y, value }
        }
    }
}

#[derive(Debug, Clone)]
pub enum LpOutcomeFree {
    Infeasible,
    Unbounded,
    Optimal { y: Vec<Scalar>, value: Scalar },
}
