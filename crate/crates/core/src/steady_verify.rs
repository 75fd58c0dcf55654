//! Numerical verification of steady triples and boundary-data interpolation
//! on cylinder charts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::steady::{ChartKind, SteadyTriple};

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Residual bound for identities evaluated from the analytic formulas.
    pub analytic: f64,
    /// Residual bound for finite-difference cross-checks.
    pub fd: f64,
    /// Central-difference step.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            analytic: 1e-10,
            fd: 1e-6,
            fd_step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub grid: usize,
    pub max_curl_residual_analytic: f64,
    pub max_curl_residual_fd: f64,
    pub max_j_squared_residual: f64,
    pub metric_positive: bool,
    pub max_duality_residual: f64,
    pub sign_rule_samples: usize,
    pub sign_rule_ok: bool,
    pub max_level_circulation_mismatch: f64,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Check `d alpha = F omega`, `J^2 = -Id`, positive-definiteness of
/// `omega(., J .)`, `J* alpha = -dH` and the orientation rule
/// `sign(dH/dF) = -sign(oriented level circulation)` on an `n x n` grid.
pub fn verify_triple(t: &SteadyTriple, n: usize, tol: Tolerances) -> VerificationReport {
    let n = n.max(8);
    let mut rep = VerificationReport {
        grid: n,
        max_curl_residual_analytic: 0.0,
        max_curl_residual_fd: 0.0,
        max_j_squared_residual: 0.0,
        metric_positive: true,
        max_duality_residual: 0.0,
        sign_rule_samples: 0,
        sign_rule_ok: true,
        max_level_circulation_mismatch: 0.0,
        failures: vec![],
        pass: true,
    };
    let h = tol.fd_step;

    let points: Vec<(f64, f64)> = match t.kind {
        ChartKind::Cylinder | ChartKind::Elliptic => {
            let (s0, s1) = t.s_range;
            let mut pts = Vec::with_capacity(n * n);
            for i in 0..n {
                // Keep FD stencils inside the chart; skip the elliptic tip.
                let frac = (i as f64 + 0.5) / n as f64;
                let s = s0 + frac * (s1 - s0);
                for j in 0..n {
                    let th = 2.0 * PI * j as f64 / n as f64;
                    pts.push((s, th));
                }
            }
            pts
        }
        ChartKind::Hyperbolic => {
            let half = t.s_range.1.sqrt();
            let mut pts = Vec::with_capacity(n * n);
            for i in 0..n {
                let p = -half + 2.0 * half * (i as f64 + 0.5) / n as f64;
                for j in 0..n {
                    let q = -half + 2.0 * half * (j as f64 + 0.5) / n as f64;
                    pts.push((p, q));
                }
            }
            pts
        }
    };

    for &(x, y) in &points {
        // d alpha - F omega, analytic.
        let curl_analytic = match t.kind {
            ChartKind::Cylinder | ChartKind::Elliptic => {
                t.eta.derivative().eval_f64(x) - t.zeta.eval_f64(x)
            }
            ChartKind::Hyperbolic => {
                let s = x * y;
                -2.0 * (s * t.eta.derivative().eval_f64(s) + t.eta.eval_f64(s))
                    - t.zeta.eval_f64(s)
            }
        };
        rep.max_curl_residual_analytic = rep.max_curl_residual_analytic.max(curl_analytic.abs());

        // d alpha - F omega by central differences of the components.
        let d_second_dx = (t.alpha(x + h, y).1 - t.alpha(x - h, y).1) / (2.0 * h);
        let d_first_dy = (t.alpha(x, y + h).0 - t.alpha(x, y - h).0) / (2.0 * h);
        let f = match t.kind {
            ChartKind::Cylinder | ChartKind::Elliptic => t.zeta.eval_f64(x),
            ChartKind::Hyperbolic => t.zeta.eval_f64(x * y),
        };
        rep.max_curl_residual_fd = rep
            .max_curl_residual_fd
            .max((d_second_dx - d_first_dy - f).abs());

        // J^2 + Id.
        let j = t.j_matrix(x, y);
        for r in 0..2 {
            for c in 0..2 {
                let v = j[r][0] * j[0][c] + j[r][1] * j[1][c] + if r == c { 1.0 } else { 0.0 };
                rep.max_j_squared_residual = rep.max_j_squared_residual.max(v.abs());
            }
        }

        // Metric g_ij = omega(e_i, J e_j); omega(e1, v) = v_2, omega(e2, v) = -v_1.
        let g11 = j[1][0];
        let g12 = j[1][1];
        let g21 = -j[0][0];
        let g22 = -j[0][1];
        let sym = (g12 - g21).abs();
        let det = g11 * g22 - g12 * g21;
        if g11 <= 1e-12 || det <= 1e-12 || sym > tol.analytic {
            rep.metric_positive = false;
        }

        // J* alpha + dH.
        let a = t.alpha(x, y);
        let ja = (
            a.0 * j[0][0] + a.1 * j[1][0],
            a.0 * j[0][1] + a.1 * j[1][1],
        );
        let dh = t.dh(x, y);
        rep.max_duality_residual = rep
            .max_duality_residual
            .max((ja.0 + dh.0).abs().max((ja.1 + dh.1).abs()));
    }

    // Orientation rule on sampled levels.
    let zeta_d = t.zeta.derivative();
    match t.kind {
        ChartKind::Cylinder | ChartKind::Elliptic => {
            let (s0, s1) = t.s_range;
            for i in 0..100 {
                let s = s0 + (i as f64 + 0.5) / 100.0 * (s1 - s0);
                let zp = zeta_d.eval_f64(s);
                // Quadrature of alpha over the level circle (+Theta).
                let m = 256;
                let mut quad = 0.0;
                for j in 0..m {
                    let th = 2.0 * PI * j as f64 / m as f64;
                    quad += t.alpha(s, th).1;
                }
                quad *= 2.0 * PI / m as f64;
                let expected = 2.0 * PI * t.eta.eval_f64(s);
                rep.max_level_circulation_mismatch = rep
                    .max_level_circulation_mismatch
                    .max((quad - expected).abs());
                if zp.abs() <= 1e-6 || quad.abs() <= 1e-9 {
                    continue;
                }
                // Oriented as the boundary of the smaller-value side.
                let oriented = quad * zp.signum();
                let dh_df = t.h_prime(s) / zp;
                if dh_df.abs() <= 1e-12 {
                    continue;
                }
                rep.sign_rule_samples += 1;
                if dh_df.signum() != -oriented.signum() {
                    rep.sign_rule_ok = false;
                }
            }
        }
        ChartKind::Hyperbolic => {
            // Levels are open arcs; the rule reduces to
            // sign(dH/dF) = eps * sign(zeta').
            let (s0, s1) = t.s_range;
            for i in 0..100 {
                let s = s0 + (i as f64 + 0.5) / 100.0 * (s1 - s0);
                let zp = zeta_d.eval_f64(s);
                if zp.abs() <= 1e-6 {
                    continue;
                }
                let dh_df = t.h_prime(s) / zp;
                rep.sign_rule_samples += 1;
                if dh_df.signum() != (t.eps as f64 * zp.signum()).signum() {
                    rep.sign_rule_ok = false;
                }
            }
        }
    }

    if rep.max_curl_residual_analytic > tol.analytic {
        rep.failures
            .push(format!("curl residual {} (analytic)", rep.max_curl_residual_analytic));
    }
    if rep.max_curl_residual_fd > tol.fd {
        rep.failures
            .push(format!("curl residual {} (finite differences)", rep.max_curl_residual_fd));
    }
    if rep.max_j_squared_residual > tol.analytic {
        rep.failures
            .push(format!("J^2 residual {}", rep.max_j_squared_residual));
    }
    if !rep.metric_positive {
        rep.failures.push("metric not positive definite".into());
    }
    if rep.max_duality_residual > tol.analytic {
        rep.failures
            .push(format!("duality residual {}", rep.max_duality_residual));
    }
    if !rep.sign_rule_ok {
        rep.failures.push("orientation sign rule violated".into());
    }
    rep.pass = rep.failures.is_empty();
    rep
}

// ---------------------------------------------------------------------------

/// Discretized 1-form on a cylinder chart.
#[derive(Debug, Clone)]
pub struct AlphaGrid {
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    /// `a[i][j]`, `b[i][j]`: dS- and dTheta-components at `(s[i], theta[j])`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    /// Largest periodicity defect absorbed while integrating the
    /// dS-component; bounds the deviation of `d alpha` from `F omega`.
    pub max_exactness_residual: f64,
}

fn smoothstep5(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

/// Blend two boundary-collar dTheta-components `b1` (near `s_range.0`) and
/// `b2` (near `s_range.1`) into a global 1-form with `d alpha = zeta(S) omega`
/// and level circulation `2 pi eta_target(S)`.
///
/// Preconditions (checked): `eta_target' = zeta` within 1e-6; `eta_target`
/// keeps one sign on the chart; on their collars the inputs have the right
/// mean and the right pointwise sign.
#[allow(clippy::too_many_arguments)]
pub fn interpolate_on_cylinder(
    b1: &dyn Fn(f64, f64) -> f64,
    b2: &dyn Fn(f64, f64) -> f64,
    zeta: &dyn Fn(f64) -> f64,
    eta_target: &dyn Fn(f64) -> f64,
    s_range: (f64, f64),
    collar_frac: f64,
    n_s: usize,
    n_theta: usize,
) -> Result<AlphaGrid> {
    let (s0, s1) = s_range;
    if !(s0 < s1) || !(0.0 < collar_frac && collar_frac < 0.5) {
        return Err(Error::InvalidInput(
            "need s0 < s1 and collar fraction in (0, 1/2)".into(),
        ));
    }
    let n_s = n_s.max(16);
    let n_theta = n_theta.max(16);
    let len = s1 - s0;
    let collar = collar_frac * len;

    let scale = {
        let mut m = 1e-30f64;
        for k in 0..=64 {
            m = m.max(eta_target(s0 + len * k as f64 / 64.0).abs());
        }
        m
    };

    // Profile consistency and constant sign.
    let sign0 = eta_target(s0).signum();
    for k in 0..=256 {
        let s = s0 + len * k as f64 / 256.0;
        let e = eta_target(s);
        if e == 0.0 || e.signum() != sign0 {
            return Err(Error::InvalidInput(format!(
                "level-circulation profile changes sign at S = {s}"
            )));
        }
        let h = 1e-5 * len;
        let d = (eta_target(s + h) - eta_target(s - h)) / (2.0 * h);
        if (d - zeta(s)).abs() > 1e-6 * scale.max(1.0) {
            return Err(Error::ToleranceFailure(format!(
                "profile derivative {} differs from vorticity {} at S = {s}",
                d,
                zeta(s)
            )));
        }
    }

    // Collar compatibility: theta-mean and pointwise sign.
    let check_collar = |b: &dyn Fn(f64, f64) -> f64, lo: f64, hi: f64, name: &str| -> Result<()> {
        for k in 0..=16 {
            let s = lo + (hi - lo) * k as f64 / 16.0;
            let m = 512;
            let mut mean = 0.0;
            for j in 0..m {
                let th = 2.0 * PI * j as f64 / m as f64;
                let v = b(s, th);
                if v != 0.0 && v.signum() != sign0 {
                    return Err(Error::InvalidInput(format!(
                        "{name} boundary data has the wrong sign at (S, Theta) = ({s}, {th})"
                    )));
                }
                mean += v;
            }
            mean /= m as f64;
            if (mean - eta_target(s)).abs() > 1e-8 * scale.max(1.0) {
                return Err(Error::ToleranceFailure(format!(
                    "{name} collar mean {} differs from target {} at S = {s}",
                    mean,
                    eta_target(s)
                )));
            }
        }
        Ok(())
    };
    check_collar(b1, s0, s0 + collar, "lower")?;
    check_collar(b2, s1 - collar, s1, "upper")?;

    let s: Vec<f64> = (0..n_s).map(|i| s0 + len * i as f64 / (n_s - 1) as f64).collect();
    let theta: Vec<f64> = (0..n_theta)
        .map(|j| 2.0 * PI * j as f64 / n_theta as f64)
        .collect();

    // Quintic blend weights: 1 on the chart boundary, 0 past the collar.
    let w1 = |sv: f64| smoothstep5(1.0 - (sv - s0) / collar);
    let w2 = |sv: f64| smoothstep5(1.0 - (s1 - sv) / collar);

    let mut b = vec![vec![0.0; n_theta]; n_s];
    for (i, &sv) in s.iter().enumerate() {
        let (a1, a2) = (w1(sv), w2(sv));
        for (j, &th) in theta.iter().enumerate() {
            let v1 = if a1 > 0.0 { b1(sv, th) } else { 0.0 };
            let v2 = if a2 > 0.0 { b2(sv, th) } else { 0.0 };
            b[i][j] = a1 * v1 + a2 * v2 + (1.0 - a1 - a2) * eta_target(sv);
        }
    }

    // Recover the dS-component from d alpha = zeta omega:
    // dA/dTheta = dB/dS - zeta(S), integrated with its theta-mean removed.
    let ds = len / (n_s - 1) as f64;
    let dth = 2.0 * PI / n_theta as f64;
    let mut a = vec![vec![0.0; n_theta]; n_s];
    let mut max_resid = 0.0f64;
    for i in 0..n_s {
        let mut gs = vec![0.0; n_theta];
        for j in 0..n_theta {
            let db_ds = if i == 0 {
                (-3.0 * b[0][j] + 4.0 * b[1][j] - b[2][j]) / (2.0 * ds)
            } else if i == n_s - 1 {
                (3.0 * b[n_s - 1][j] - 4.0 * b[n_s - 2][j] + b[n_s - 3][j]) / (2.0 * ds)
            } else {
                (b[i + 1][j] - b[i - 1][j]) / (2.0 * ds)
            };
            gs[j] = db_ds - zeta(s[i]);
        }
        let mean = gs.iter().sum::<f64>() / n_theta as f64;
        max_resid = max_resid.max(mean.abs());
        let mut acc = 0.0;
        for j in 0..n_theta {
            a[i][j] = acc;
            acc += (gs[j] - mean) * dth;
        }
    }

    Ok(AlphaGrid {
        s,
        theta,
        a,
        b,
        max_exactness_residual: max_resid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::{cylinder_triple, elliptic_triple, hyperbolic_triple};

    #[test]
    fn cylinder_identities_hold() {
        let t = cylinder_triple(&[1.0, 0.5, -0.25], -3.0, (-1.0, 1.0)).unwrap();
        let rep = verify_triple(&t, 40, Tolerances::default());
        assert!(rep.pass, "{:?}", rep.failures);
        assert!(rep.sign_rule_samples > 0);
        assert!(rep.max_level_circulation_mismatch < 1e-9);
    }

    #[test]
    fn elliptic_identities_hold() {
        let t = elliptic_triple(&[2.0, -1.0], 0.8).unwrap();
        let rep = verify_triple(&t, 40, Tolerances::default());
        assert!(rep.pass, "{:?}", rep.failures);
    }

    #[test]
    fn hyperbolic_identities_hold_both_branches() {
        for (eps, c) in [(1i8, 2.5), (-1i8, -2.5)] {
            let t = hyperbolic_triple(&[1.0, 0.3], eps, c, 0.7).unwrap();
            let rep = verify_triple(&t, 40, Tolerances::default());
            assert!(rep.pass, "eps {eps}: {:?}", rep.failures);
        }
    }

    #[test]
    fn corrupted_alpha_is_flagged_by_duality_not_curl() {
        let mut t = cylinder_triple(&[1.0], 1.0, (-1.0, 1.0)).unwrap();
        t.extra_a = crate::poly::Poly::from_f64(&[0.0, 1e-3]);
        let rep = verify_triple(&t, 30, Tolerances::default());
        assert!(rep.max_curl_residual_analytic < 1e-12);
        assert!(rep.max_curl_residual_fd < 1e-6);
        assert!(rep.max_duality_residual > 5e-4, "{}", rep.max_duality_residual);
        assert!(!rep.pass);
    }

    #[test]
    fn interpolation_blends_collar_data() {
        // Target: the cylinder profile eta = c/2pi + int zeta for
        // zeta = 1 + S, c = -20 (eta stays negative on [-1, 1]).
        let zeta = |s: f64| 1.0 + s;
        let eta = |s: f64| -20.0 / (2.0 * PI) + s + 0.5 * s * s;
        // Boundary data with zero-mean angular wiggle.
        let b1 = |s: f64, th: f64| eta(s) * (1.0 + 0.05 * (th.sin()));
        let b2 = |s: f64, th: f64| eta(s) * (1.0 + 0.05 * ((2.0 * th).cos()));
        let g = interpolate_on_cylinder(&b1, &b2, &zeta, &eta, (-1.0, 1.0), 0.1, 80, 64)
            .unwrap();
        assert!(g.max_exactness_residual < 1e-3, "{}", g.max_exactness_residual);
        // The collar data survives at the chart boundary.
        assert!((g.b[0][16] - b1(-1.0, g.theta[16])).abs() < 1e-12);
        let last = g.s.len() - 1;
        assert!((g.b[last][8] - b2(1.0, g.theta[8])).abs() < 1e-12);
        // Level circulation preserved at every grid line.
        for i in 0..g.s.len() {
            let mean = g.b[i].iter().sum::<f64>() / g.b[i].len() as f64;
            assert!((mean - eta(g.s[i])).abs() < 1e-10, "line {i}");
        }
        // Discrete curl check with the same stencils the construction uses
        // (central in s, forward in theta).
        let ds = g.s[1] - g.s[0];
        let dth = g.theta[1] - g.theta[0];
        let mut worst = 0.0f64;
        for i in 1..g.s.len() - 1 {
            for j in 0..g.theta.len() {
                let jn = (j + 1) % g.theta.len();
                let db_ds = (g.b[i + 1][j] - g.b[i - 1][j]) / (2.0 * ds);
                let da_dth = (g.a[i][jn] - g.a[i][j]) / dth;
                worst = worst.max((db_ds - da_dth - zeta(g.s[i])).abs());
            }
        }
        assert!(worst < 1e-9, "discrete curl residual {worst}");
    }

    #[test]
    fn interpolation_rejects_sign_defect() {
        let zeta = |_: f64| 0.0;
        let eta = |_: f64| -1.0;
        let bad = |_: f64, th: f64| -1.0 + 1.5 * th.sin().max(0.0); // goes positive
        let good = |_: f64, _: f64| -1.0;
        let r = interpolate_on_cylinder(&bad, &good, &zeta, &eta, (0.0, 1.0), 0.1, 32, 32);
        assert!(r.is_err());
        // Mean defect detected too.
        let off = |_: f64, _: f64| -1.1;
        let r = interpolate_on_cylinder(&off, &good, &zeta, &eta, (0.0, 1.0), 0.1, 32, 32);
        assert!(matches!(r, Err(Error::ToleranceFailure(_))));
    }
}
