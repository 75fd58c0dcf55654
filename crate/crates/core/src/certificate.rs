//! Combinatorial steadiness certificates.
//!
//! Given a balanced circulation function, subdivide the graph at the zeros
//! of the height `f` and of the circulation `c`, set `eps = -sign(f c)` on
//! each piece, and look for an integer potential whose coboundary realizes
//! those signs. From the coboundary `xi` a 1-form `beta = g df` per piece is
//! chosen with `int f beta = xi` and `sign(beta/df) = -sign(c)`; exactness
//! of `f beta` is certified by vanishing integrals over a cycle basis.

use serde::Serialize;

use crate::circulation::{is_balanced, BalanceVerdict, CirculationFunction};
use crate::error::{Error, Result};
use crate::graph::{refine_at_zeros, MeasuredReebGraph, RefinedGraph};
use crate::scalar::{Scalar, Sign};
use crate::SIGN_TOL;

#[derive(Debug, Clone)]
pub enum CoboundaryResult {
    /// Integer potential on vertices with `xi(e) = pot(head) - pot(tail)`
    /// matching the requested signs.
    Coboundary { potential: Vec<i64>, xi: Vec<i64> },
    /// Edge indices of a directed cycle in the sign-reoriented graph.
    MonochromaticCycle { edges: Vec<usize> },
}

/// Decide whether a sign function on the edges of a directed graph is the
/// sign pattern of a coboundary. Reorient each edge to point towards its
/// larger potential value; a coboundary exists iff the reoriented graph is
/// acyclic, and then longest-path levels provide the potential.
pub fn sign_coboundary(
    n_vertices: usize,
    edges: &[(usize, usize)],
    eps: &[i8],
) -> Result<CoboundaryResult> {
    if eps.len() != edges.len() {
        return Err(Error::InvalidInput("one sign per edge required".into()));
    }
    for (i, &(t, h)) in edges.iter().enumerate() {
        if t >= n_vertices || h >= n_vertices {
            return Err(Error::InvalidInput(format!("edge {i} endpoint out of range")));
        }
        if eps[i] != 1 && eps[i] != -1 {
            return Err(Error::InvalidInput(format!("edge {i} sign must be +1 or -1")));
        }
    }

    // Reoriented edge list: (from, to, original index).
    let reoriented: Vec<(usize, usize, usize)> = edges
        .iter()
        .enumerate()
        .map(|(i, &(t, h))| if eps[i] == 1 { (t, h, i) } else { (h, t, i) })
        .collect();

    // Kahn peeling; surviving vertices lie on directed cycles.
    let mut outs: Vec<Vec<(usize, usize)>> = vec![vec![]; n_vertices];
    let mut indeg = vec![0usize; n_vertices];
    for &(a, b, i) in &reoriented {
        outs[a].push((b, i));
        indeg[b] += 1;
    }
    let mut queue: Vec<usize> = (0..n_vertices).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n_vertices);
    while let Some(v) = queue.pop() {
        order.push(v);
        for &(w, _) in &outs[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push(w);
            }
        }
    }

    if order.len() < n_vertices {
        // A vertex that was never peeled retains positive in-degree, i.e.
        // an incoming edge from another unpeeled vertex (edges from peeled
        // vertices were already discounted). Walking backwards inside the
        // unpeeled part must therefore revisit a vertex: a directed cycle.
        let cyclic: Vec<bool> = indeg.iter().map(|&d| d > 0).collect();
        let mut ins: Vec<Vec<(usize, usize)>> = vec![vec![]; n_vertices];
        for &(a, b, i) in &reoriented {
            ins[b].push((a, i));
        }
        let start = (0..n_vertices).find(|&v| cyclic[v]).unwrap();
        let mut pos = vec![usize::MAX; n_vertices];
        let mut path: Vec<usize> = Vec::new(); // edges walked backwards
        let mut v = start;
        loop {
            if pos[v] != usize::MAX {
                let mut cycle_edges: Vec<usize> = path[pos[v]..].to_vec();
                cycle_edges.reverse();
                return Ok(CoboundaryResult::MonochromaticCycle { edges: cycle_edges });
            }
            pos[v] = path.len();
            let &(u, i) = ins[v]
                .iter()
                .find(|&&(u, _)| cyclic[u])
                .expect("unpeeled vertex must keep an unpeeled predecessor");
            path.push(i);
            v = u;
        }
    }

    // Longest-path levels along the topological order.
    let mut pot = vec![0i64; n_vertices];
    for &v in &order {
        for &(w, _) in &outs[v] {
            pot[w] = pot[w].max(pot[v] + 1);
        }
    }
    let xi = edges
        .iter()
        .map(|&(t, h)| pot[h] - pot[t])
        .collect();
    Ok(CoboundaryResult::Coboundary { potential: pot, xi })
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CertificateEdge {
    /// Id of the original edge this piece subdivides.
    pub edge_id: String,
    pub lo: Scalar,
    pub hi: Scalar,
    pub f_sign: i8,
    pub c_sign: i8,
    pub eps: i8,
    /// Target integral of `f beta` over the piece.
    pub xi: i64,
    /// `beta = g_coef df` on the piece.
    pub g_coef: Scalar,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub edges: Vec<CertificateEdge>,
    /// Integer potential on the refined vertices.
    pub potential: Vec<i64>,
    /// Integrals of `f beta` over a cycle basis of the refined graph;
    /// each telescopes to exactly zero.
    pub cycle_residuals: Vec<i64>,
}

#[derive(Debug, Clone)]
pub enum CertificateOutcome {
    Certificate(Certificate),
    /// Ids (with piece ranges) of a reoriented directed cycle.
    MonochromaticCycle { edges: Vec<String> },
}

fn piece_signs(r: &RefinedGraph, g: &MeasuredReebGraph) -> Result<Vec<(i8, i8, i8)>> {
    r.edges
        .iter()
        .map(|e| {
            let fs = match e.f_sign {
                Sign::Neg => -1i8,
                Sign::Pos => 1,
                Sign::Zero => {
                    return Err(Error::DegenerateZeroSet {
                        edge: g.edges[e.orig].id.clone(),
                        detail: "height sign indeterminate on a piece".into(),
                    })
                }
            };
            let cs = match e.c_sign {
                Some(Sign::Neg) => -1i8,
                Some(Sign::Pos) => 1,
                _ => {
                    return Err(Error::ToleranceFailure(format!(
                        "circulation sign indeterminate on edge {} over [{}, {}]",
                        g.edges[e.orig].id,
                        e.lo.to_f64(),
                        e.hi.to_f64()
                    )))
                }
            };
            Ok((fs, cs, -(fs * cs)))
        })
        .collect()
}

/// Run the certificate pipeline without checking balance first; unbalanced
/// inputs may legitimately end in a monochromatic cycle.
pub fn build_certificate(
    g: &MeasuredReebGraph,
    c: &CirculationFunction,
) -> Result<CertificateOutcome> {
    let r = refine_at_zeros(g, Some(c))?;
    let signs = piece_signs(&r, g)?;
    let eps: Vec<i8> = signs.iter().map(|s| s.2).collect();
    let edge_list: Vec<(usize, usize)> = r.edges.iter().map(|e| (e.tail, e.head)).collect();
    let (potential, xi) = match sign_coboundary(r.vertices.len(), &edge_list, &eps)? {
        CoboundaryResult::MonochromaticCycle { edges } => {
            return Ok(CertificateOutcome::MonochromaticCycle {
                edges: edges
                    .iter()
                    .map(|&i| {
                        let e = &r.edges[i];
                        format!(
                            "{}[{}, {}]",
                            g.edges[e.orig].id,
                            e.lo.to_f64(),
                            e.hi.to_f64()
                        )
                    })
                    .collect(),
            })
        }
        CoboundaryResult::Coboundary { potential, xi } => (potential, xi),
    };

    let mut edges = Vec::with_capacity(r.edges.len());
    for (i, e) in r.edges.iter().enumerate() {
        // int_lo^hi f g df = xi with constant g: g = xi / ((hi^2 - lo^2)/2).
        let half_sq = (&e.hi * &e.hi - &e.lo * &e.lo) / Scalar::int(2);
        if half_sq.is_zero() {
            return Err(Error::DegenerateZeroSet {
                edge: g.edges[e.orig].id.clone(),
                detail: "piece is symmetric around height zero".into(),
            });
        }
        let g_coef = Scalar::int(xi[i]) / half_sq;
        edges.push(CertificateEdge {
            edge_id: g.edges[e.orig].id.clone(),
            lo: e.lo.clone(),
            hi: e.hi.clone(),
            f_sign: signs[i].0,
            c_sign: signs[i].1,
            eps: signs[i].2,
            xi: xi[i],
            g_coef,
        });
    }

    // Cycle basis from a spanning tree of the refined graph (undirected).
    let nv = r.vertices.len();
    let mut parent: Vec<Option<(usize, usize, bool)>> = vec![None; nv]; // (vertex, edge, edge points towards v)
    let mut seen = vec![false; nv];
    let mut tree_edge = vec![false; r.edges.len()];
    seen[0] = true;
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        for (i, e) in r.edges.iter().enumerate() {
            for (a, b, fwd) in [(e.tail, e.head, true), (e.head, e.tail, false)] {
                if a == v && !seen[b] {
                    seen[b] = true;
                    tree_edge[i] = true;
                    parent[b] = Some((v, i, fwd));
                    stack.push(b);
                }
            }
        }
    }
    let depth_sum = |mut v: usize| -> i64 {
        // Signed xi-sum along the tree path from the root to v.
        let mut s = 0i64;
        while let Some((p, i, fwd)) = parent[v] {
            s += if fwd { xi[i] } else { -xi[i] };
            v = p;
        }
        s
    };
    let mut cycle_residuals = Vec::new();
    for (i, e) in r.edges.iter().enumerate() {
        if !tree_edge[i] {
            cycle_residuals.push(xi[i] + depth_sum(e.tail) - depth_sum(e.head));
        }
    }

    Ok(CertificateOutcome::Certificate(Certificate {
        edges,
        potential,
        cycle_residuals,
    }))
}

/// Balance-checked certificate: the combinatorial witness that a balanced
/// circulation extends to a steady flow. A monochromatic cycle on balanced
/// input indicates an internal fault.
pub fn graph_certificate(g: &MeasuredReebGraph, c: &CirculationFunction) -> Result<Certificate> {
    match is_balanced(g, c, SIGN_TOL)? {
        BalanceVerdict::Balanced => {}
        BalanceVerdict::Unbalanced { saddle, .. } => {
            return Err(Error::InvalidInput(format!(
                "circulation is unbalanced at saddle {}",
                g.vertices[saddle].id
            )))
        }
        BalanceVerdict::Indeterminate { saddle } => {
            return Err(Error::ToleranceFailure(format!(
                "saddle {} limit too close to zero",
                g.vertices[saddle].id
            )))
        }
    }
    match build_certificate(g, c)? {
        CertificateOutcome::Certificate(cert) => Ok(cert),
        CertificateOutcome::MonochromaticCycle { edges } => Err(Error::InternalFault(format!(
            "balanced circulation produced a monochromatic cycle through {edges:?}"
        ))),
    }
}

impl Certificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "edges": self.edges,
            "potential": self.potential,
            "cycle_residuals": self.cycle_residuals,
            "max_cycle_residual": self.cycle_residuals.iter().map(|x| x.abs()).max().unwrap_or(0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulation::{circulation_space_of, CirculationSolution};
    use crate::graph::{Edge, Vertex, VertexRole};
    use crate::measure::EdgeMeasure;

    #[test]
    fn directed_three_cycle_is_monochromatic() {
        let edges = [(0, 1), (1, 2), (2, 0)];
        match sign_coboundary(3, &edges, &[1, 1, 1]).unwrap() {
            CoboundaryResult::MonochromaticCycle { edges } => {
                assert_eq!(edges.len(), 3);
            }
            _ => panic!("expected a cycle"),
        }
        // Flipping one sign breaks the cycle.
        match sign_coboundary(3, &edges, &[1, 1, -1]).unwrap() {
            CoboundaryResult::Coboundary { potential, xi } => {
                for (i, &(t, h)) in edges.iter().enumerate() {
                    assert_eq!(xi[i], potential[h] - potential[t]);
                    assert_eq!(xi[i].signum(), [1, 1, -1][i] as i64);
                }
            }
            _ => panic!("expected a coboundary"),
        }
    }

    #[test]
    fn path_always_has_coboundary() {
        let edges = [(0, 1), (1, 2), (2, 3)];
        for mask in 0..8u8 {
            let eps: Vec<i8> = (0..3).map(|k| if mask >> k & 1 == 1 { 1 } else { -1 }).collect();
            match sign_coboundary(4, &edges, &eps).unwrap() {
                CoboundaryResult::Coboundary { xi, .. } => {
                    for (x, s) in xi.iter().zip(&eps) {
                        assert_eq!(x.signum(), *s as i64);
                    }
                }
                _ => panic!("trees never force a cycle"),
            }
        }
    }

    #[test]
    fn segment_certificate_exact_values() {
        // Min(-1) -> Max(1), uniform density: c < 0 inside, pieces split at
        // f = 0 with eps = (-1, +1) and g = 2 on both pieces.
        let g = MeasuredReebGraph {
            vertices: vec![
                Vertex {
                    id: "lo".into(),
                    role: VertexRole::Min,
                    height: Scalar::int(-1),
                },
                Vertex {
                    id: "hi".into(),
                    role: VertexRole::Max,
                    height: Scalar::int(1),
                },
            ],
            edges: vec![Edge {
                id: "e".into(),
                tail: 0,
                head: 1,
                measure: Some(EdgeMeasure::uniform(Scalar::one())),
            }],
            surface: None,
            coordinates: None,
        };
        let CirculationSolution::Space(space) = circulation_space_of(&g).unwrap() else {
            panic!()
        };
        let c = space.at(&[]);
        let CertificateOutcome::Certificate(cert) = build_certificate(&g, &c).unwrap() else {
            panic!("expected a certificate")
        };
        assert_eq!(cert.edges.len(), 2);
        assert_eq!(cert.edges[0].eps, -1);
        assert_eq!(cert.edges[1].eps, 1);
        assert_eq!(cert.edges[0].xi, -1);
        assert_eq!(cert.edges[1].xi, 1);
        assert_eq!(cert.edges[0].g_coef, Scalar::int(2));
        assert_eq!(cert.edges[1].g_coef, Scalar::int(2));
        assert!(cert.cycle_residuals.is_empty());
    }
}
