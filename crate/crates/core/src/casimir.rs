//! Moment invariants (generalized enstrophies) and orbit equivalence.
//!
//! Per-edge moments `m_i(e) = int_e f^i dmu` together with circulations
//! separate coadjoint orbits; totals over the whole graph do not, because
//! density can be moved between the two branches of a saddle without
//! changing any total.

use serde::Serialize;

use crate::circulation::CirculationFunction;
use crate::error::{Error, Result};
use crate::graph::MeasuredReebGraph;
use crate::measure::{Bump, EdgeMeasure};
use crate::poly::Poly;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize)]
pub struct MomentTable {
    pub orders: Vec<u32>,
    /// Edge ids in id order.
    pub edges: Vec<String>,
    /// `rows[k][i]` = moment of order `orders[i]` on edge `edges[k]`.
    pub rows: Vec<Vec<Scalar>>,
    /// Totals over all edges, per order.
    pub totals: Vec<Scalar>,
}

impl MomentTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge");
        for o in &self.orders {
            out.push_str(&format!(",m{o}"));
        }
        out.push('\n');
        for (e, row) in self.edges.iter().zip(&self.rows) {
            out.push_str(e);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out.push_str("total");
        for v in &self.totals {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
        out
    }
}

/// Moments of order `0..=max_order` for every edge.
pub fn moment_table(g: &MeasuredReebGraph, max_order: u32) -> Result<MomentTable> {
    g.require_valid()?;
    let mut order_ids: Vec<usize> = (0..g.edges.len()).collect();
    order_ids.sort_by(|&a, &b| g.edges[a].id.cmp(&g.edges[b].id));
    let orders: Vec<u32> = (0..=max_order).collect();
    let mut rows = Vec::new();
    let mut totals = vec![Scalar::zero(); orders.len()];
    let mut edges = Vec::new();
    for &e in &order_ids {
        let (a, b) = g.edge_span(e);
        let m = g.edge_measure(e)?;
        let mut row = Vec::with_capacity(orders.len());
        for (k, &i) in orders.iter().enumerate() {
            let v = m.moment(i, a, b)?;
            totals[k] = &totals[k] + &v;
            row.push(v);
        }
        edges.push(g.edges[e].id.clone());
        rows.push(row);
    }
    Ok(MomentTable {
        orders,
        edges,
        rows,
        totals,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentWitness {
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<(Scalar, Scalar)>,
}

#[derive(Debug, Clone)]
pub enum OrbitVerdict {
    Equivalent {
        vertex_map: Vec<(String, String)>,
        edge_map: Vec<(String, String)>,
    },
    Distinct {
        witness: MomentWitness,
    },
}

struct OrbitSearch<'a> {
    g1: &'a MeasuredReebGraph,
    g2: &'a MeasuredReebGraph,
    /// Per edge: moment vector then head limit, as floats for comparison.
    inv1: Vec<Vec<f64>>,
    inv2: Vec<Vec<f64>>,
    max_order: u32,
    tol: f64,
    witness: Option<MomentWitness>,
}

impl<'a> OrbitSearch<'a> {
    fn vertex_compatible(&self, v1: usize, v2: usize) -> bool {
        let (a, b) = (&self.g1.vertices[v1], &self.g2.vertices[v2]);
        a.role == b.role
            && (a.height.to_f64() - b.height.to_f64()).abs() <= self.tol
            && self.g1.in_edges(v1).len() == self.g2.in_edges(v2).len()
            && self.g1.out_edges(v1).len() == self.g2.out_edges(v2).len()
    }

    /// Match the parallel edge bundle between two mapped vertex pairs by
    /// sorted invariant vectors. Returns the paired edge indices or records
    /// a witness.
    fn match_bundle(
        &mut self,
        e1s: &mut Vec<usize>,
        e2s: &mut Vec<usize>,
    ) -> Option<Vec<(usize, usize)>> {
        if e1s.len() != e2s.len() {
            self.witness.get_or_insert(MomentWitness {
                reason: "edge multiplicity differs between mapped vertex pairs".into(),
                order: None,
                edges: None,
                values: None,
            });
            return None;
        }
        let key = |inv: &Vec<f64>| inv.clone();
        e1s.sort_by(|&a, &b| {
            key(&self.inv1[a])
                .partial_cmp(&key(&self.inv1[b]))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        e2s.sort_by(|&a, &b| {
            key(&self.inv2[a])
                .partial_cmp(&key(&self.inv2[b]))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut pairs = Vec::new();
        for (&a, &b) in e1s.iter().zip(e2s.iter()) {
            for (k, (x, y)) in self.inv1[a].iter().zip(&self.inv2[b]).enumerate() {
                if (x - y).abs() > self.tol {
                    let order = if k <= self.max_order as usize {
                        Some(k as u32)
                    } else {
                        None // head-limit entry
                    };
                    self.witness = Some(MomentWitness {
                        reason: if order.is_some() {
                            format!("moment of order {k} differs beyond tolerance")
                        } else {
                            "circulation head limit differs beyond tolerance".into()
                        },
                        order,
                        edges: Some((self.g1.edges[a].id.clone(), self.g2.edges[b].id.clone())),
                        values: Some((Scalar::real(*x), Scalar::real(*y))),
                    });
                    return None;
                }
            }
            pairs.push((a, b));
        }
        Some(pairs)
    }

    fn search(
        &mut self,
        assignment: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        depth: usize,
    ) -> Option<Vec<(usize, usize)>> {
        let n = self.g1.vertices.len();
        if depth == n {
            // Vertex map complete; match all edge bundles.
            let mut edge_map = Vec::new();
            let mut done: Vec<(usize, usize)> = Vec::new();
            for v1 in 0..n {
                let w1 = assignment[v1].unwrap();
                for u1 in 0..n {
                    if done.contains(&(v1, u1)) {
                        continue;
                    }
                    done.push((v1, u1));
                    let u2 = assignment[u1].unwrap();
                    let mut e1s: Vec<usize> = (0..self.g1.edges.len())
                        .filter(|&e| self.g1.edges[e].tail == v1 && self.g1.edges[e].head == u1)
                        .collect();
                    if e1s.is_empty() {
                        continue;
                    }
                    let mut e2s: Vec<usize> = (0..self.g2.edges.len())
                        .filter(|&e| self.g2.edges[e].tail == w1 && self.g2.edges[e].head == u2)
                        .collect();
                    match self.match_bundle(&mut e1s, &mut e2s) {
                        Some(pairs) => edge_map.extend(pairs),
                        None => return None,
                    }
                }
            }
            return Some(edge_map);
        }
        for v2 in 0..n {
            if used[v2] || !self.vertex_compatible(depth, v2) {
                continue;
            }
            // Structural pruning: edges between already-assigned vertices
            // must exist in matching multiplicity.
            let ok = (0..depth).all(|u| {
                let u2 = assignment[u].unwrap();
                let c1f = self
                    .g1
                    .edges
                    .iter()
                    .filter(|e| e.tail == depth && e.head == u)
                    .count();
                let c2f = self
                    .g2
                    .edges
                    .iter()
                    .filter(|e| e.tail == v2 && e.head == u2)
                    .count();
                let c1b = self
                    .g1
                    .edges
                    .iter()
                    .filter(|e| e.tail == u && e.head == depth)
                    .count();
                let c2b = self
                    .g2
                    .edges
                    .iter()
                    .filter(|e| e.tail == u2 && e.head == v2)
                    .count();
                c1f == c2f && c1b == c2b
            });
            if !ok {
                continue;
            }
            assignment[depth] = Some(v2);
            used[v2] = true;
            if let Some(edge_map) = self.search(assignment, used, depth + 1) {
                return Some(edge_map);
            }
            assignment[depth] = None;
            used[v2] = false;
        }
        None
    }
}

/// Decide whether two measured Reeb graphs with circulation functions are
/// equivalent: an isomorphism preserving roles, heights, all per-edge
/// moments up to `max_order`, and circulation head limits, within `tol`.
pub fn orbit_equivalent(
    g1: &MeasuredReebGraph,
    c1: &CirculationFunction,
    g2: &MeasuredReebGraph,
    c2: &CirculationFunction,
    max_order: u32,
    tol: f64,
) -> Result<OrbitVerdict> {
    g1.require_valid()?;
    g2.require_valid()?;
    if g1.edges.len() > 64 || g2.edges.len() > 64 {
        return Err(Error::Unsupported(
            "orbit equivalence capped at 64 edges".into(),
        ));
    }
    if g1.vertices.len() != g2.vertices.len() || g1.edges.len() != g2.edges.len() {
        return Ok(OrbitVerdict::Distinct {
            witness: MomentWitness {
                reason: "vertex or edge counts differ".into(),
                order: None,
                edges: None,
                values: None,
            },
        });
    }
    let invariants = |g: &MeasuredReebGraph, c: &CirculationFunction| -> Result<Vec<Vec<f64>>> {
        (0..g.edges.len())
            .map(|e| {
                let (a, b) = g.edge_span(e);
                let m = g.edge_measure(e)?;
                let mut v = Vec::with_capacity(max_order as usize + 2);
                for i in 0..=max_order {
                    v.push(m.moment(i, a, b)?.to_f64());
                }
                v.push(c.head_limits[e].to_f64());
                Ok(v)
            })
            .collect()
    };
    let mut s = OrbitSearch {
        g1,
        g2,
        inv1: invariants(g1, c1)?,
        inv2: invariants(g2, c2)?,
        max_order,
        tol,
        witness: None,
    };
    let mut assignment = vec![None; g1.vertices.len()];
    let mut used = vec![false; g2.vertices.len()];
    match s.search(&mut assignment, &mut used, 0) {
        Some(edge_map) => Ok(OrbitVerdict::Equivalent {
            vertex_map: (0..g1.vertices.len())
                .map(|v| {
                    (
                        g1.vertices[v].id.clone(),
                        g2.vertices[assignment[v].unwrap()].id.clone(),
                    )
                })
                .collect(),
            edge_map: edge_map
                .into_iter()
                .map(|(a, b)| (g1.edges[a].id.clone(), g2.edges[b].id.clone()))
                .collect(),
        }),
        None => Ok(OrbitVerdict::Distinct {
            witness: s.witness.unwrap_or(MomentWitness {
                reason: "no role/height/degree-preserving isomorphism exists".into(),
                order: None,
                edges: None,
                values: None,
            }),
        }),
    }
}

/// Transfer density described by `poly` on the height window `[lo, hi]`
/// from one branch of the saddle to the other. Totals of every moment are
/// preserved; per-edge moments change.
pub fn move_density_between_branches(
    g: &MeasuredReebGraph,
    saddle: usize,
    poly: &Poly,
    lo: &Scalar,
    hi: &Scalar,
) -> Result<MeasuredReebGraph> {
    g.require_valid()?;
    let (_, branches) = g.trunk_and_branches(saddle)?;
    let mut out = g.clone();
    for (k, &e) in branches.iter().enumerate() {
        let (a, b) = g.edge_span(e);
        if lo < a || hi > b || lo >= hi {
            return Err(Error::InvalidInput(format!(
                "window [{lo}, {hi}] not inside branch {} span [{a}, {b}]",
                g.edges[e].id
            )));
        }
        let bump = Bump {
            poly: if k == 0 { poly.clone() } else { poly.neg() },
            lo: lo.clone(),
            hi: hi.clone(),
        };
        match &mut out.edges[e].measure {
            Some(EdgeMeasure::PolyLog { bumps, .. }) => bumps.push(bump),
            Some(EdgeMeasure::Table { .. }) => {
                return Err(Error::Unsupported(
                    "density transfer needs analytic (poly_log) branch measures".into(),
                ))
            }
            None => {
                return Err(Error::InvalidInput(format!(
                    "branch {} carries no measure",
                    g.edges[e].id
                )))
            }
        }
    }
    // The receiving branch gains +poly, the donating branch loses it; make
    // sure the donor's density stays positive.
    for &e in &branches {
        let (a, b) = g.edge_span(e);
        let m = out.edge_measure(e)?;
        let (fmin, dmin) = m.min_density(a, b, 1000);
        if dmin <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "transfer drives density of edge {} to {dmin} at height {fmin}",
                g.edges[e].id
            )));
        }
    }
    Ok(out)
}
