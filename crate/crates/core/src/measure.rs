//! Edge measures: densities with respect to the height coordinate.
//!
//! A `PolyLog` measure has density
//! `poly(f) + sum_t coef_t * ln|f - f0_t| + sum_b bump_b(f) * 1_[lo,hi](f)`
//! where each `f0_t` is the height of the edge's tail or head. Logarithmic
//! terms give the cumulative measure the `psi(f) ln|f|`-type behaviour that
//! area measures of saddle levels exhibit. A `Table` measure is a sampled
//! cumulative function, interpreted as piecewise-linear (piecewise-constant
//! density); this is what mesh extraction produces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    Tail,
    Head,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogTerm {
    pub anchor: Anchor,
    pub coef: Scalar,
}

/// Extra density supported on a closed height window inside the edge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bump {
    pub poly: Poly,
    pub lo: Scalar,
    pub hi: Scalar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeMeasure {
    PolyLog {
        poly: Poly,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        log_terms: Vec<LogTerm>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        bumps: Vec<Bump>,
    },
    Table {
        f: Vec<Scalar>,
        cumulative: Vec<Scalar>,
    },
}

/// Closed form of `int_x^y f^i ln|f - f0| df` (real arithmetic).
fn log_moment(i: u32, f0: f64, x: f64, y: f64) -> f64 {
    // Substitute u = f - f0 and expand (u + f0)^i binomially; each term
    // integrates to u^{j+1} (ln|u| - 1/(j+1)) / (j+1).
    fn term(j: u32, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let k = (j + 1) as f64;
        u.powi(j as i32 + 1) * (u.abs().ln() - 1.0 / k) / k
    }
    let mut total = 0.0;
    let mut binom = 1.0f64;
    for j in 0..=i {
        if j > 0 {
            binom *= (i - j + 1) as f64 / j as f64;
        }
        let c = binom * f0.powi((i - j) as i32);
        total += c * (term(j, y - f0) - term(j, x - f0));
    }
    total
}

impl EdgeMeasure {
    pub fn uniform(c: Scalar) -> EdgeMeasure {
        EdgeMeasure::PolyLog {
            poly: Poly(vec![c]),
            log_terms: vec![],
            bumps: vec![],
        }
    }

    pub fn linear(c0: Scalar, c1: Scalar) -> EdgeMeasure {
        EdgeMeasure::PolyLog {
            poly: Poly(vec![c0, c1]),
            log_terms: vec![],
            bumps: vec![],
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            EdgeMeasure::PolyLog {
                poly,
                log_terms,
                bumps,
            } => {
                // Log moments are evaluated in floats regardless of the
                // coefficient's representation.
                log_terms.is_empty()
                    && poly.is_exact()
                    && bumps
                        .iter()
                        .all(|b| b.poly.is_exact() && b.lo.is_exact() && b.hi.is_exact())
            }
            EdgeMeasure::Table { f, cumulative } => {
                f.iter().all(Scalar::is_exact) && cumulative.iter().all(Scalar::is_exact)
            }
        }
    }

    /// `int_x^y f^i dmu` where the edge spans heights `[a, b]` and
    /// `[x, y]` is a sub-interval of it.
    pub fn moment_over(
        &self,
        i: u32,
        a: &Scalar,
        b: &Scalar,
        x: &Scalar,
        y: &Scalar,
    ) -> Result<Scalar> {
        match self {
            EdgeMeasure::PolyLog {
                poly,
                log_terms,
                bumps,
            } => {
                let mut total = poly.shift_up(i as usize).definite_integral(x, y);
                for bump in bumps {
                    let lo = if &bump.lo > x { bump.lo.clone() } else { x.clone() };
                    let hi = if &bump.hi < y { bump.hi.clone() } else { y.clone() };
                    if lo < hi {
                        total = total + bump.poly.shift_up(i as usize).definite_integral(&lo, &hi);
                    }
                }
                for t in log_terms {
                    let f0 = match t.anchor {
                        Anchor::Tail => a.to_f64(),
                        Anchor::Head => b.to_f64(),
                    };
                    let v = log_moment(i, f0, x.to_f64(), y.to_f64());
                    total = total + Scalar::real(t.coef.to_f64() * v);
                }
                Ok(total)
            }
            EdgeMeasure::Table { f, cumulative } => {
                if f.len() != cumulative.len() || f.len() < 2 {
                    return Err(Error::InvalidInput(
                        "table measure needs equal-length f/cumulative with >= 2 samples".into(),
                    ));
                }
                let mut total = Scalar::zero();
                for j in 0..f.len() - 1 {
                    let (flo, fhi) = (&f[j], &f[j + 1]);
                    if fhi <= flo {
                        return Err(Error::InvalidInput(
                            "table measure heights must be strictly increasing".into(),
                        ));
                    }
                    let lo = if flo > x { flo.clone() } else { x.clone() };
                    let hi = if fhi < y { fhi.clone() } else { y.clone() };
                    if lo >= hi {
                        continue;
                    }
                    let density = (&cumulative[j + 1] - &cumulative[j]) / (fhi - flo);
                    let mono = Poly::constant(density).shift_up(i as usize);
                    total = total + mono.definite_integral(&lo, &hi);
                }
                Ok(total)
            }
        }
    }

    /// Total `int f^i dmu` over the edge spanning `[a, b]`.
    pub fn moment(&self, i: u32, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        self.moment_over(i, a, b, a, b)
    }

    /// Mass of the sub-interval `[x, y]`.
    pub fn mass_over(&self, a: &Scalar, b: &Scalar, x: &Scalar, y: &Scalar) -> Result<Scalar> {
        self.moment_over(0, a, b, x, y)
    }

    /// Weight `rho = int f dmu` of the sub-interval `[x, y]`.
    pub fn weight_over(&self, a: &Scalar, b: &Scalar, x: &Scalar, y: &Scalar) -> Result<Scalar> {
        self.moment_over(1, a, b, x, y)
    }

    /// Density evaluated at height `f` (float).
    pub fn density_at(&self, fval: f64, a: &Scalar, b: &Scalar) -> f64 {
        match self {
            EdgeMeasure::PolyLog {
                poly,
                log_terms,
                bumps,
            } => {
                let mut d = poly.eval_f64(fval);
                for t in log_terms {
                    let f0 = match t.anchor {
                        Anchor::Tail => a.to_f64(),
                        Anchor::Head => b.to_f64(),
                    };
                    let u: f64 = fval - f0;
                    if u != 0.0 {
                        d += t.coef.to_f64() * u.abs().ln();
                    }
                }
                for bump in bumps {
                    if fval >= bump.lo.to_f64() && fval <= bump.hi.to_f64() {
                        d += bump.poly.eval_f64(fval);
                    }
                }
                d
            }
            EdgeMeasure::Table { f, cumulative } => {
                for j in 0..f.len() - 1 {
                    let (flo, fhi) = (f[j].to_f64(), f[j + 1].to_f64());
                    if fval >= flo && fval <= fhi && fhi > flo {
                        return (cumulative[j + 1].to_f64() - cumulative[j].to_f64())
                            / (fhi - flo);
                    }
                }
                0.0
            }
        }
    }

    /// Sample the density on `n` interior points; returns `(f, density)` at
    /// the minimum.
    pub fn min_density(&self, a: &Scalar, b: &Scalar, n: usize) -> (f64, f64) {
        let (af, bf) = (a.to_f64(), b.to_f64());
        let mut best = (af, f64::INFINITY);
        for k in 1..=n {
            let t = k as f64 / (n + 1) as f64;
            let fv = af + t * (bf - af);
            let d = self.density_at(fv, a, b);
            if d < best.1 {
                best = (fv, d);
            }
        }
        best
    }

    /// Sum of logarithmic coefficients anchored at the given endpoint.
    pub fn log_coef_at(&self, anchor: Anchor) -> Scalar {
        match self {
            EdgeMeasure::PolyLog { log_terms, .. } => log_terms
                .iter()
                .filter(|t| t.anchor == anchor)
                .fold(Scalar::zero(), |acc, t| acc + &t.coef),
            EdgeMeasure::Table { .. } => Scalar::zero(),
        }
    }
}

/// Adaptive Simpson quadrature. Returns `(value, error_estimate)`.
///
/// Endpoint evaluations that come out non-finite (integrable logarithmic
/// endpoint singularities) are nudged inward.
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> (f64, f64) {
    fn eval(f: &dyn Fn(f64) -> f64, x: f64, a: f64, b: f64) -> f64 {
        let v = f(x);
        if v.is_finite() {
            return v;
        }
        let nudge = 1e-13 * (b - a).abs().max(1.0);
        let x2 = if (x - a).abs() < (b - x).abs() {
            x + nudge
        } else {
            x - nudge
        };
        let v2 = f(x2);
        if v2.is_finite() {
            v2
        } else {
            0.0
        }
    }

    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        lo: f64,
        hi: f64,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = eval(f, lm, lo, hi);
        let frm = eval(f, rm, lo, hi);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let err = (left + right - whole) / 15.0;
        if depth == 0 || err.abs() <= tol {
            (left + right + err, err.abs())
        } else {
            let (lv, le) = recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, lo, hi);
            let (rv, re) = recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, lo, hi);
            (lv + rv, le + re)
        }
    }

    if a == b {
        return (0.0, 0.0);
    }
    let fa = eval(f, a, a, b);
    let fb = eval(f, b, a, b);
    let m = 0.5 * (a + b);
    let fm = eval(f, m, a, b);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth, a, b)
}

/// Least-squares fit of a cumulative-measure window near a vertex to
/// `c1 * t ln|t| + c2 * t + c3 * t^2` where `t` is the height relative to
/// the vertex. Returns `(c1, c2, c3)`; `c1` estimates the logarithmic
/// coefficient of the measure along that edge.
pub fn fit_log_coefficients(samples: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if samples.len() < 8 {
        return Err(Error::InvalidInput(format!(
            "insufficient samples for log fit: got {}, need at least 8",
            samples.len()
        )));
    }
    let basis = |t: f64| -> [f64; 3] {
        let l = if t == 0.0 { 0.0 } else { t * t.abs().ln() };
        [l, t, t * t]
    };
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(t, v) in samples {
        let phi = basis(t);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += phi[i] * phi[j];
            }
            atb[i] += phi[i] * v;
        }
    }
    let a: Vec<Vec<Scalar>> = ata
        .iter()
        .map(|row| row.iter().map(|&x| Scalar::real(x)).collect())
        .collect();
    let b: Vec<Scalar> = atb.iter().map(|&x| Scalar::real(x)).collect();
    let sol = crate::linalg::solve_square(&a, &b)
        .ok_or_else(|| Error::InvalidInput("degenerate log-fit system".into()))?;
    Ok((sol[0].to_f64(), sol[1].to_f64(), sol[2].to_f64()))
}
