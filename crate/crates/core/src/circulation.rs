//! Circulation functions: graph antiderivatives of the weight density.
//!
//! A circulation function on a measured Reeb graph assigns a value to every
//! inner point of every edge so that (i) along each edge the increment
//! equals the weight `rho = int f dmu` of the traversed piece, (ii) at every
//! non-boundary vertex the incoming limits sum to the outgoing limits, and
//! (iii) at 1-valent non-boundary vertices the single limit is 0. The
//! solution set is an affine space, encoded here by the head limit of each
//! edge.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MeasuredReebGraph, VertexRole};
use crate::linalg;
use crate::scalar::{Scalar, Sign};

/// A single circulation function, stored as the limit of the function at
/// the head of each edge (indexed like `graph.edges`), together with the
/// edge weights it integrates.
#[derive(Debug, Clone)]
pub struct CirculationFunction {
    pub head_limits: Vec<Scalar>,
    pub weights: Vec<Scalar>,
}

#[derive(Serialize, Deserialize)]
struct CirculationJson {
    head_limits: BTreeMap<String, Scalar>,
}

impl CirculationFunction {
    pub fn tail_limit(&self, e: usize) -> Scalar {
        &self.head_limits[e] - &self.weights[e]
    }

    /// Value at the inner point of edge `e` with height `f`:
    /// `head_limit - rho([f, head])`.
    pub fn evaluate(&self, g: &MeasuredReebGraph, e: usize, f: &Scalar) -> Result<Scalar> {
        let (a, b) = g.edge_span(e);
        let rest = g.edge_measure(e)?.weight_over(a, b, f, b)?;
        Ok(&self.head_limits[e] - &rest)
    }

    /// Limits at vertex `v` along each incident edge, as
    /// `(edge index, limit)` pairs sorted by edge id.
    pub fn vertex_limits(&self, g: &MeasuredReebGraph, v: usize) -> Vec<(usize, Scalar)> {
        let mut out = Vec::new();
        for e in g.in_edges(v) {
            out.push((e, self.head_limits[e].clone()));
        }
        for e in g.out_edges(v) {
            out.push((e, self.tail_limit(e)));
        }
        out.sort_by(|a, b| g.edges[a.0].id.cmp(&g.edges[b.0].id));
        out
    }

    /// Limits at a saddle in trunk-first order.
    pub fn saddle_limits(&self, g: &MeasuredReebGraph, v: usize) -> Result<[Scalar; 3]> {
        let (trunk, branches) = g.trunk_and_branches(v)?;
        let lim = |e: usize| {
            if g.edges[e].head == v {
                self.head_limits[e].clone()
            } else {
                self.tail_limit(e)
            }
        };
        Ok([lim(trunk), lim(branches[0]), lim(branches[1])])
    }

    pub fn to_json(&self, g: &MeasuredReebGraph) -> serde_json::Value {
        let map: BTreeMap<String, Scalar> = self
            .head_limits
            .iter()
            .enumerate()
            .map(|(e, v)| (g.edges[e].id.clone(), v.clone()))
            .collect();
        serde_json::to_value(CirculationJson { head_limits: map }).unwrap()
    }

    pub fn from_json(
        value: &serde_json::Value,
        g: &MeasuredReebGraph,
        weights: Vec<Scalar>,
    ) -> Result<CirculationFunction> {
        let raw: CirculationJson = serde_json::from_value(value.clone())?;
        let mut head_limits = Vec::with_capacity(g.edges.len());
        for e in &g.edges {
            let v = raw.head_limits.get(&e.id).ok_or_else(|| {
                Error::InvalidInput(format!("missing head limit for edge {}", e.id))
            })?;
            head_limits.push(v.clone());
        }
        Ok(CirculationFunction {
            head_limits,
            weights,
        })
    }
}

/// The affine space of all circulation functions of a graph:
/// `particular + sum_i t_i basis[i]` in head-limit coordinates.
#[derive(Debug, Clone)]
pub struct AffineCirculationSpace {
    pub particular: Vec<Scalar>,
    pub basis: Vec<Vec<Scalar>>,
    /// For the solver's native parametrization: basis vector `i` has head
    /// limit 1 on edge `free_edges[i]`. Empty after reparametrization.
    pub free_edges: Vec<usize>,
    pub weights: Vec<Scalar>,
}

impl AffineCirculationSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn at(&self, t: &[Scalar]) -> CirculationFunction {
        assert_eq!(t.len(), self.basis.len());
        let mut head_limits = self.particular.clone();
        for (ti, b) in t.iter().zip(&self.basis) {
            for (h, bv) in head_limits.iter_mut().zip(b) {
                *h = &*h + &(ti * bv);
            }
        }
        CirculationFunction {
            head_limits,
            weights: self.weights.clone(),
        }
    }

    pub fn to_json(&self, g: &MeasuredReebGraph) -> serde_json::Value {
        let limits_map = |v: &Vec<Scalar>| -> BTreeMap<String, Scalar> {
            v.iter()
                .enumerate()
                .map(|(e, x)| (g.edges[e].id.clone(), x.clone()))
                .collect()
        };
        serde_json::json!({
            "dim": self.dim(),
            "particular": { "head_limits": limits_map(&self.particular) },
            "basis": self.basis.iter().map(|b| serde_json::json!({"head_limits": limits_map(b)})).collect::<Vec<_>>(),
        })
    }
}

/// Outcome of solving for circulation functions.
#[derive(Debug, Clone)]
pub enum CirculationSolution {
    Space(AffineCirculationSpace),
    /// Closed graph with nonzero total weight: no antiderivative exists.
    None { residual: Scalar },
}

/// Solve the Newton-Leibniz + Kirchhoff system for the given edge weights.
pub fn solve_circulation_space(
    g: &MeasuredReebGraph,
    weights: &[Scalar],
) -> Result<CirculationSolution> {
    g.require_valid()?;
    if weights.len() != g.edges.len() {
        return Err(Error::InvalidInput("one weight per edge required".into()));
    }
    let inner: Vec<usize> = (0..g.vertices.len())
        .filter(|&v| g.vertices[v].role != VertexRole::Boundary)
        .collect();
    let n = g.edges.len();
    let mut a = Vec::with_capacity(inner.len());
    let mut b = Vec::with_capacity(inner.len());
    for &v in &inner {
        // sum_in head_limit - sum_out head_limit = -sum_out rho
        let mut row = vec![Scalar::zero(); n];
        let mut rhs = Scalar::zero();
        for e in g.in_edges(v) {
            row[e] = &row[e] + &Scalar::one();
        }
        for e in g.out_edges(v) {
            row[e] = &row[e] - &Scalar::one();
            rhs = rhs - &weights[e];
        }
        a.push(row);
        b.push(rhs);
    }
    if a.is_empty() {
        // Every vertex is a boundary vertex: no constraints at all.
        a.push(vec![Scalar::zero(); n]);
        b.push(Scalar::zero());
    }
    match linalg::solve_affine(&a, &b, 1e-6) {
        Ok(sol) => {
            let space = AffineCirculationSpace {
                particular: sol.particular,
                basis: sol.nullspace,
                free_edges: sol.free_cols,
                weights: weights.to_vec(),
            };
            let expected = g.homology_dimensions()?.circulation_dim;
            if space.dim() != expected {
                return Err(Error::InternalFault(format!(
                    "circulation space dimension {} differs from homological dimension {}",
                    space.dim(),
                    expected
                )));
            }
            Ok(CirculationSolution::Space(space))
        }
        Err(inc) => Ok(CirculationSolution::None {
            residual: inc.residual,
        }),
    }
}

/// Convenience: solve using the weights of the graph's own measures.
pub fn circulation_space_of(g: &MeasuredReebGraph) -> Result<CirculationSolution> {
    let w = g.edge_weights()?;
    solve_circulation_space(g, &w)
}

// ---------------------------------------------------------------------------
// Verdicts on a single circulation function.

#[derive(Debug, Clone)]
pub enum BalanceVerdict {
    /// Every saddle's three limits are nonzero and share a sign.
    Balanced,
    Unbalanced { saddle: usize, limits: [Scalar; 3] },
    /// Some float limit is within tolerance of zero.
    Indeterminate { saddle: usize },
}

pub fn is_balanced(
    g: &MeasuredReebGraph,
    c: &CirculationFunction,
    tol: f64,
) -> Result<BalanceVerdict> {
    for v in g.saddles() {
        let limits = c.saddle_limits(g, v)?;
        let mut signs = Vec::new();
        for l in &limits {
            match l.sign_with_tol(tol) {
                None => return Ok(BalanceVerdict::Indeterminate { saddle: v }),
                Some(s) => signs.push(s),
            }
        }
        if signs.contains(&Sign::Zero) || signs.iter().any(|&s| s != signs[0]) {
            return Ok(BalanceVerdict::Unbalanced { saddle: v, limits });
        }
    }
    Ok(BalanceVerdict::Balanced)
}

#[derive(Debug, Clone)]
pub enum NegativityVerdict {
    /// Every saddle limit is strictly negative.
    TotallyNegative,
    Violation {
        saddle: usize,
        edge: usize,
        limit: Scalar,
    },
    Indeterminate {
        saddle: usize,
    },
}

pub fn is_totally_negative(
    g: &MeasuredReebGraph,
    c: &CirculationFunction,
    tol: f64,
) -> Result<NegativityVerdict> {
    for v in g.saddles() {
        let (trunk, branches) = g.trunk_and_branches(v)?;
        let limits = c.saddle_limits(g, v)?;
        for (e, l) in [trunk, branches[0], branches[1]].iter().zip(limits.iter()) {
            match l.sign_with_tol(tol) {
                None => return Ok(NegativityVerdict::Indeterminate { saddle: v }),
                Some(Sign::Neg) => {}
                Some(_) => {
                    return Ok(NegativityVerdict::Violation {
                        saddle: v,
                        edge: *e,
                        limit: l.clone(),
                    })
                }
            }
        }
    }
    Ok(NegativityVerdict::TotallyNegative)
}

/// Sampled shape check along one edge: the circulation decreases while the
/// height is negative and increases while it is positive, so the profile
/// may not rise and then fall; its interior stays below the larger endpoint
/// limit. Returns `true` when the sampled profile is consistent with that.
pub fn edge_concavity_check(
    g: &MeasuredReebGraph,
    c: &CirculationFunction,
    e: usize,
    samples: usize,
) -> Result<bool> {
    let (a, b) = g.edge_span(e);
    let (af, bf) = (a.to_f64(), b.to_f64());
    let n = samples.max(3);
    let mut vals = Vec::with_capacity(n + 2);
    vals.push(c.tail_limit(e).to_f64());
    for k in 1..=n {
        let f = af + (bf - af) * k as f64 / (n + 1) as f64;
        vals.push(c.evaluate(g, e, &Scalar::real(f))?.to_f64());
    }
    vals.push(c.head_limits[e].to_f64());

    let scale: f64 = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    // No rise followed by a fall.
    let mut rose = false;
    for w in vals.windows(2) {
        let d = w[1] - w[0];
        if d > tol {
            rose = true;
        } else if d < -tol && rose {
            return Ok(false);
        }
    }
    // Interior below the larger endpoint limit.
    let cap = vals[0].max(*vals.last().unwrap()) + tol;
    Ok(vals.iter().all(|&v| v <= cap))
}

pub fn weights_or_zero(space: &AffineCirculationSpace) -> Vec<Scalar> {
    space.weights.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Vertex};
    use crate::measure::EdgeMeasure;

    fn vertex(id: &str, role: VertexRole, h: i64) -> Vertex {
        Vertex {
            id: id.into(),
            role,
            height: Scalar::int(h),
        }
    }

    /// Min(-1) -> Max(1) with uniform density 1: rho = 0, c is forced.
    fn segment() -> MeasuredReebGraph {
        MeasuredReebGraph {
            vertices: vec![
                vertex("lo", VertexRole::Min, -1),
                vertex("hi", VertexRole::Max, 1),
            ],
            edges: vec![Edge {
                id: "e".into(),
                tail: 0,
                head: 1,
                measure: Some(EdgeMeasure::uniform(Scalar::one())),
            }],
            surface: None,
            coordinates: None,
        }
    }

    #[test]
    fn segment_space_is_a_point() {
        let g = segment();
        let sol = circulation_space_of(&g).unwrap();
        let CirculationSolution::Space(space) = sol else {
            panic!("expected a space");
        };
        assert_eq!(space.dim(), 0);
        let c = space.at(&[]);
        // rho(e) = int_{-1}^{1} f df = 0, so both limits vanish.
        assert!(c.head_limits[0].is_zero());
        assert!(c.tail_limit(0).is_zero());
        // Interior value at f: -rho([f,1]) = -(1-f^2)/2; at f=0 that is -1/2.
        let mid = c.evaluate(&g, 0, &Scalar::int(0)).unwrap();
        assert_eq!(mid, Scalar::ratio(-1, 2));
        // The profile dips and recovers: no rise-then-fall.
        assert!(edge_concavity_check(&g, &c, 0, 100).unwrap());
    }

    #[test]
    fn nonzero_total_weight_has_no_circulation() {
        let mut g = segment();
        // Shift heights so the total weight is positive.
        g.vertices[0].height = Scalar::int(1);
        g.vertices[1].height = Scalar::int(2);
        match circulation_space_of(&g).unwrap() {
            CirculationSolution::None { residual } => {
                assert!(!residual.is_zero());
            }
            _ => panic!("expected inconsistency"),
        }
    }

    #[test]
    fn circulation_json_round_trip() {
        let g = segment();
        let CirculationSolution::Space(space) = circulation_space_of(&g).unwrap() else {
            panic!()
        };
        let c = space.at(&[]);
        let v = c.to_json(&g);
        let back = CirculationFunction::from_json(&v, &g, c.weights.clone()).unwrap();
        assert_eq!(back.head_limits[0], c.head_limits[0]);
    }
}
