//! Local models of steady flows: a 1-form `alpha`, a complex structure `J`
//! and a stream-like function `H` on a chart, satisfying
//! `d alpha = F omega`, `J* alpha = -dH`, `J^2 = -Id` with
//! `g(u, v) = omega(u, J v)` positive definite, where `F = zeta(S)` is the
//! vorticity profile on the chart.
//!
//! Charts:
//! * cylinder: coordinates `(S, Theta)`, `omega = dS ^ dTheta`,
//!   `alpha = eta(S) dTheta` with `eta = c / 2 pi + int_0^S zeta`;
//! * elliptic (disk around a definite critical point): same formulas in
//!   action-angle form with `eta(0) = 0`, `S = (P^2 + Q^2) / 2 >= 0`;
//! * hyperbolic (neighbourhood of a simple saddle): coordinates `(P, Q)`,
//!   `S = P Q`, `alpha = (eta Q + c P) dP - (eta P + c Q) dQ` with the
//!   polynomial `eta(S) = -(1/2) sum_k zeta_k S^k / (k + 1)`, requiring
//!   `|c| > max |eta|` on the chart and `sign(c) = eps`.

use crate::error::{Error, Result};
use crate::poly::Poly;

pub use crate::steady_verify::*;

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Cylinder,
    Elliptic,
    Hyperbolic,
}

#[derive(Debug, Clone)]
pub struct SteadyTriple {
    pub kind: ChartKind,
    /// Vorticity profile `F = zeta(S)`, polynomial coefficients.
    pub zeta: Poly,
    /// Profile of the `dTheta`-component (cylinder/elliptic) or the saddle
    /// profile (hyperbolic).
    pub eta: Poly,
    /// Level-circulation constant `c`; 0 on elliptic charts.
    pub circ: f64,
    /// Branch sign of the hyperbolic chart (`sign(circ)`); +1 elsewhere.
    pub eps: i8,
    pub s_range: (f64, f64),
    /// Test hook: extra `dS`-component (polynomial in `S`) added to alpha
    /// on cylinder/elliptic charts. Leaves `d alpha` unchanged but breaks
    /// the duality `J* alpha = -dH`.
    pub extra_a: Poly,
}

fn poly_from(zeta: &[f64]) -> Poly {
    Poly::from_f64(zeta)
}

/// Cylinder chart around a family of circular levels.
pub fn cylinder_triple(zeta: &[f64], c: f64, s_range: (f64, f64)) -> Result<SteadyTriple> {
    if s_range.0 >= s_range.1 {
        return Err(Error::InvalidInput("empty chart range".into()));
    }
    let zeta = poly_from(zeta);
    let mut eta = zeta.antiderivative();
    eta.0[0] = crate::scalar::Scalar::real(c / (2.0 * PI));
    Ok(SteadyTriple {
        kind: ChartKind::Cylinder,
        zeta,
        eta,
        circ: c,
        eps: 1,
        s_range,
        extra_a: Poly::zero(),
    })
}

/// Elliptic chart around a definite critical point of the stream function;
/// `S = (P^2 + Q^2)/2 in [0, s_max]` and the level circulation vanishes at
/// the point itself.
pub fn elliptic_triple(zeta: &[f64], s_max: f64) -> Result<SteadyTriple> {
    if s_max <= 0.0 {
        return Err(Error::InvalidInput("elliptic chart needs s_max > 0".into()));
    }
    let zeta = poly_from(zeta);
    let eta = zeta.antiderivative();
    Ok(SteadyTriple {
        kind: ChartKind::Elliptic,
        zeta,
        eta,
        circ: 0.0,
        eps: 1,
        s_range: (0.0, s_max),
        extra_a: Poly::zero(),
    })
}

/// Hyperbolic (saddle) chart. The chart half-width shrinks automatically
/// until `|c| > max |eta|`; if even the saddle value `|eta(0)| = |zeta(0)|/2`
/// defeats `|c|`, the data admits no such chart.
pub fn hyperbolic_triple(zeta: &[f64], eps: i8, c: f64, s_half_width: f64) -> Result<SteadyTriple> {
    if eps != 1 && eps != -1 {
        return Err(Error::InvalidInput("eps must be +1 or -1".into()));
    }
    if c == 0.0 || (c > 0.0) != (eps > 0) {
        return Err(Error::InvalidInput(format!(
            "need sign(c) = eps, got c = {c}, eps = {eps}"
        )));
    }
    if s_half_width <= 0.0 {
        return Err(Error::InvalidInput("chart half-width must be positive".into()));
    }
    let zeta = poly_from(zeta);
    // eta(S) = -(1/2) sum zeta_k S^k / (k+1): the antiderivative divided by S.
    let anti = zeta.antiderivative();
    let eta = Poly(
        anti.0[1..]
            .iter()
            .map(|x| crate::scalar::Scalar::real(-0.5 * x.to_f64()))
            .collect(),
    );
    let mut w = s_half_width;
    for _ in 0..48 {
        let mut max_eta = 0.0f64;
        for k in 0..=512 {
            let s = -w + 2.0 * w * k as f64 / 512.0;
            max_eta = max_eta.max(eta.eval_f64(s).abs());
        }
        if c.abs() > max_eta {
            return Ok(SteadyTriple {
                kind: ChartKind::Hyperbolic,
                zeta,
                eta,
                circ: c,
                eps,
                s_range: (-w, w),
                extra_a: Poly::zero(),
            });
        }
        w *= 0.5;
    }
    Err(Error::InvalidInput(format!(
        "|c| = {} does not dominate the saddle profile |eta(0)| = {}",
        c.abs(),
        eta.eval_f64(0.0).abs()
    )))
}

impl SteadyTriple {
    /// Components of alpha in chart coordinates at a point.
    /// Cylinder/elliptic: point = (S, Theta), returns (A, B) with
    /// `alpha = A dS + B dTheta`. Hyperbolic: point = (P, Q), returns
    /// `(alpha_P, alpha_Q)`.
    pub fn alpha(&self, x: f64, y: f64) -> (f64, f64) {
        match self.kind {
            ChartKind::Cylinder | ChartKind::Elliptic => {
                (self.extra_a.eval_f64(x), self.eta.eval_f64(x))
            }
            ChartKind::Hyperbolic => {
                let s = x * y;
                let eta = self.eta.eval_f64(s);
                (eta * y + self.circ * x, -(eta * x + self.circ * y))
            }
        }
    }

    /// Matrix of `J` (columns = images of the coordinate basis).
    pub fn j_matrix(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        match self.kind {
            ChartKind::Cylinder | ChartKind::Elliptic => {
                // J dS = dTheta-direction, J dTheta-direction = -dS.
                let _ = (x, y);
                [[0.0, -1.0], [1.0, 0.0]]
            }
            ChartKind::Hyperbolic => {
                let s = x * y;
                let eta = self.eta.eval_f64(s);
                let c = self.circ;
                let k = self.eps as f64 / (c * c - eta * eta).sqrt();
                [[k * eta, -k * c], [k * c, -k * eta]]
            }
        }
    }

    /// Components of `dH` in chart coordinates.
    pub fn dh(&self, x: f64, y: f64) -> (f64, f64) {
        match self.kind {
            ChartKind::Cylinder | ChartKind::Elliptic => (-self.eta.eval_f64(x), 0.0),
            ChartKind::Hyperbolic => {
                let s = x * y;
                let eta = self.eta.eval_f64(s);
                let h = self.eps as f64 * (self.circ * self.circ - eta * eta).sqrt();
                (h * y, h * x)
            }
        }
    }

    /// Derivative of `H` along the level parameter `S`.
    pub fn h_prime(&self, s: f64) -> f64 {
        match self.kind {
            ChartKind::Cylinder | ChartKind::Elliptic => -self.eta.eval_f64(s),
            ChartKind::Hyperbolic => {
                let eta = self.eta.eval_f64(s);
                self.eps as f64 * (self.circ * self.circ - eta * eta).sqrt()
            }
        }
    }

    /// Vorticity value at level `s`.
    pub fn f_value(&self, s: f64) -> f64 {
        self.zeta.eval_f64(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_profile_is_half_average() {
        // zeta(S) = 2 - 4 S: eta(S) = -(1/2)(2 - 2 S) = -1 + S.
        let t = hyperbolic_triple(&[2.0, -4.0], 1, 5.0, 0.5).unwrap();
        assert!((t.eta.eval_f64(0.0) + 1.0).abs() < 1e-12);
        assert!((t.eta.eval_f64(0.25) + 0.75).abs() < 1e-12);
        // d alpha identity: -2 (S eta' + eta) = zeta.
        for s in [-0.3, 0.0, 0.4] {
            let d = -2.0 * (s * 1.0 + t.eta.eval_f64(s));
            assert!((d - (2.0 - 4.0 * s)).abs() < 1e-12);
        }
    }

    #[test]
    fn hyperbolic_requires_dominating_circulation() {
        // eta(0) = -zeta(0)/2 = -2; |c| = 1 can never dominate.
        assert!(hyperbolic_triple(&[4.0], 1, 1.0, 1.0).is_err());
        // Sign mismatch rejected.
        assert!(hyperbolic_triple(&[1.0], -1, 2.0, 1.0).is_err());
        // Large slope: chart shrinks but succeeds.
        let t = hyperbolic_triple(&[1.0, 100.0], -1, -0.6, 1.0).unwrap();
        assert!(t.s_range.1 < 1.0);
    }
}
