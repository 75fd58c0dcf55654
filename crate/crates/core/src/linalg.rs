//! Dense linear algebra over [`Scalar`]: Gaussian elimination with partial
//! pivoting, affine solution spaces (particular solution + nullspace basis),
//! and small matrix inversion. Exact inputs give exact output.

use crate::scalar::Scalar;

/// Pivot threshold for float entries; exact entries pivot on any nonzero.
const PIVOT_TOL: f64 = 1e-12;

fn pivotable(x: &Scalar) -> bool {
    match x {
        Scalar::Exact(_) => !x.is_zero(),
        Scalar::Real(v) => v.abs() > PIVOT_TOL,
    }
}

/// Solution set of `A x = b` described by one particular solution and a
/// basis of the nullspace of `A`. `free_cols` lists the columns that were
/// not used as pivots, in ascending order; basis vector `i` has a 1 in
/// `free_cols[i]`.
#[derive(Debug, Clone)]
pub struct AffineSolution {
    pub particular: Vec<Scalar>,
    pub nullspace: Vec<Vec<Scalar>>,
    pub free_cols: Vec<usize>,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct Inconsistent {
    /// Largest absolute residual of an unsatisfiable row.
    pub residual: Scalar,
}

/// Reduce `[A | b]` to reduced row echelon form in place. Returns the pivot
/// columns in pivot order.
fn rref(a: &mut [Vec<Scalar>], b: &mut [Scalar]) -> Vec<usize> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        // Partial pivoting keeps the float path stable and is harmless for
        // exact entries.
        let mut best: Option<(usize, f64)> = None;
        for i in r..rows {
            if pivotable(&a[i][c]) {
                let mag = a[i][c].to_f64().abs();
                if best.map_or(true, |(_, m)| mag > m) {
                    best = Some((i, mag));
                }
            }
        }
        let Some((p, _)) = best else { continue };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][c].recip();
        for j in c..cols {
            a[r][j] = &a[r][j] * &inv;
        }
        b[r] = &b[r] * &inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                for j in c..cols {
                    a[i][j] = &a[i][j] - &(&factor * &a[r][j]);
                }
                b[i] = &b[i] - &(&factor * &b[r]);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Solve `A x = b`, returning the full affine solution set or an
/// inconsistency certificate. `residual_tol` bounds the acceptable residual
/// of a zero row for float data; exact data is checked exactly.
pub fn solve_affine(
    a: &[Vec<Scalar>],
    b: &[Scalar],
    residual_tol: f64,
) -> Result<AffineSolution, Inconsistent> {
    let mut m: Vec<Vec<Scalar>> = a.to_vec();
    let mut rhs: Vec<Scalar> = b.to_vec();
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    let pivots = rref(&mut m, &mut rhs);
    let rank = pivots.len();

    // Zero rows must have (near-)zero right-hand sides.
    let mut worst = Scalar::zero();
    for i in rank..m.len() {
        let r = rhs[i].abs();
        if r > worst {
            worst = r;
        }
    }
    let bad = match &worst {
        Scalar::Exact(_) => !worst.is_zero(),
        Scalar::Real(v) => v.abs() > residual_tol,
    };
    if bad {
        return Err(Inconsistent { residual: worst });
    }

    let pivot_set: Vec<Option<usize>> = {
        let mut v = vec![None; cols];
        for (row, &col) in pivots.iter().enumerate() {
            v[col] = Some(row);
        }
        v
    };
    let free_cols: Vec<usize> = (0..cols).filter(|c| pivot_set[*c].is_none()).collect();

    let mut particular = vec![Scalar::zero(); cols];
    for (row, &col) in pivots.iter().enumerate() {
        particular[col] = rhs[row].clone();
    }

    let mut nullspace = Vec::with_capacity(free_cols.len());
    for &f in &free_cols {
        let mut v = vec![Scalar::zero(); cols];
        v[f] = Scalar::one();
        for (row, &col) in pivots.iter().enumerate() {
            v[col] = -&m[row][f];
        }
        nullspace.push(v);
    }

    Ok(AffineSolution {
        particular,
        nullspace,
        free_cols,
        rank,
    })
}

/// Unique solution of a square system, if the matrix is invertible.
pub fn solve_square(a: &[Vec<Scalar>], b: &[Scalar]) -> Option<Vec<Scalar>> {
    let sol = solve_affine(a, b, 0.0).ok()?;
    if sol.rank == a.len() && sol.free_cols.is_empty() {
        Some(sol.particular)
    } else {
        None
    }
}

pub fn rank(a: &[Vec<Scalar>]) -> usize {
    let mut m = a.to_vec();
    let mut rhs = vec![Scalar::zero(); a.len()];
    rref(&mut m, &mut rhs).len()
}

/// Inverse of a square matrix, or `None` if singular.
pub fn invert(a: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![Scalar::zero(); n];
        e[j] = Scalar::one();
        cols.push(solve_square(a, &e)?);
    }
    // cols[j] is the j-th column of the inverse.
    let mut inv = vec![vec![Scalar::zero(); n]; n];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            inv[i][j] = col[i].clone();
        }
    }
    Some(inv)
}

pub fn mat_vec(a: &[Vec<Scalar>], x: &[Scalar]) -> Vec<Scalar> {
    a.iter().map(|row| crate::scalar::dot(row, x)).collect()
}
