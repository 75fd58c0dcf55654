//! Measured Reeb graphs: oriented graphs with a strictly increasing height
//! along each edge, 1-valent extremes / boundary attachments and 3-valent
//! saddles, plus a positive measure on every edge.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::circulation::CirculationFunction;
use crate::error::{Error, Result};
use crate::measure::EdgeMeasure;
use crate::scalar::{Scalar, Sign};
use crate::SIGN_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexRole {
    Min,
    Max,
    Saddle,
    Boundary,
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub id: String,
    pub role: VertexRole,
    pub height: Scalar,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub measure: Option<EdgeMeasure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceInfo {
    pub genus: usize,
    pub boundary_components: usize,
}

#[derive(Debug, Clone)]
pub struct MeasuredReebGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub surface: Option<SurfaceInfo>,
    /// Optional preferred coordinates on the circulation space: saddle-edge
    /// pairs whose limits serve as parameters.
    pub coordinates: Option<Vec<(String, String)>>,
}

// ---------------------------------------------------------------------------
// JSON form (ids as strings, edges referencing vertex ids)

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: String,
    role: VertexRole,
    f: Scalar,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    id: String,
    tail: String,
    head: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    measure: Option<EdgeMeasure>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<VertexJson>,
    edges: Vec<EdgeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    surface: Option<SurfaceInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coordinates: Option<Vec<(String, String)>>,
}

impl Serialize for MeasuredReebGraph {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut vertices: Vec<VertexJson> = self
            .vertices
            .iter()
            .map(|v| VertexJson {
                id: v.id.clone(),
                role: v.role,
                f: v.height.clone(),
            })
            .collect();
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        let mut edges: Vec<EdgeJson> = self
            .edges
            .iter()
            .map(|e| EdgeJson {
                id: e.id.clone(),
                tail: self.vertices[e.tail].id.clone(),
                head: self.vertices[e.head].id.clone(),
                measure: e.measure.clone(),
            })
            .collect();
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        GraphJson {
            vertices,
            edges,
            surface: self.surface,
            coordinates: self.coordinates.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MeasuredReebGraph {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphJson::deserialize(de)?;
        let mut index = BTreeMap::new();
        for (i, v) in raw.vertices.iter().enumerate() {
            index.insert(v.id.clone(), i);
        }
        let mut edges = Vec::with_capacity(raw.edges.len());
        for e in raw.edges {
            let tail = *index
                .get(&e.tail)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown vertex id {:?}", e.tail)))?;
            let head = *index
                .get(&e.head)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown vertex id {:?}", e.head)))?;
            edges.push(Edge {
                id: e.id,
                tail,
                head,
                measure: e.measure,
            });
        }
        Ok(MeasuredReebGraph {
            vertices: raw
                .vertices
                .into_iter()
                .map(|v| Vertex {
                    id: v.id,
                    role: v.role,
                    height: v.f,
                })
                .collect(),
            edges,
            surface: raw.surface,
            coordinates: raw.coordinates,
        })
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub kind: String,
    pub element: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: &str, element: &str, detail: String) {
        self.violations.push(Violation {
            kind: kind.into(),
            element: element.into(),
            detail,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HomologyDims {
    /// First Betti number of the graph.
    pub b1: usize,
    /// Number of boundary vertices.
    pub boundary_count: usize,
    /// Dimension of the affine space of circulation functions.
    pub circulation_dim: usize,
}

impl MeasuredReebGraph {
    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn in_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].head == v)
            .collect()
    }

    pub fn out_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].tail == v)
            .collect()
    }

    /// Height span `(tail, head)` of an edge.
    pub fn edge_span(&self, e: usize) -> (&Scalar, &Scalar) {
        (
            &self.vertices[self.edges[e].tail].height,
            &self.vertices[self.edges[e].head].height,
        )
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.iter().all(|v| v.role != VertexRole::Boundary)
    }

    pub fn saddles(&self) -> Vec<usize> {
        let mut s: Vec<usize> = (0..self.vertices.len())
            .filter(|&v| self.vertices[v].role == VertexRole::Saddle)
            .collect();
        s.sort_by(|&a, &b| self.vertices[a].id.cmp(&self.vertices[b].id));
        s
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.vertices.is_empty() {
            report.push("empty", "graph", "graph has no vertices".into());
            return report;
        }

        let mut seen = HashSet::new();
        for v in &self.vertices {
            if !seen.insert(&v.id) {
                report.push("duplicate-id", &v.id, "duplicate vertex id".into());
            }
        }
        let mut seen = HashSet::new();
        for e in &self.edges {
            if !seen.insert(&e.id) {
                report.push("duplicate-id", &e.id, "duplicate edge id".into());
            }
        }

        for e in &self.edges {
            if e.tail >= self.vertices.len() || e.head >= self.vertices.len() {
                report.push("bad-endpoint", &e.id, "edge endpoint out of range".into());
                continue;
            }
            if e.tail == e.head {
                report.push("self-loop", &e.id, "edge is a self-loop".into());
                continue;
            }
            let (lo, hi) = (&self.vertices[e.tail].height, &self.vertices[e.head].height);
            if !(lo < hi) {
                report.push(
                    "non-monotone",
                    &e.id,
                    format!("height does not increase tail {} -> head {}", lo, hi),
                );
            }
        }

        // Valence / role pattern.
        for (vi, v) in self.vertices.iter().enumerate() {
            let indeg = self.in_edges(vi).len();
            let outdeg = self.out_edges(vi).len();
            let ok = match v.role {
                VertexRole::Min => indeg == 0 && outdeg == 1,
                VertexRole::Max => indeg == 1 && outdeg == 0,
                VertexRole::Boundary => indeg + outdeg == 1,
                VertexRole::Saddle => {
                    (indeg == 1 && outdeg == 2) || (indeg == 2 && outdeg == 1)
                }
            };
            if !ok {
                report.push(
                    "bad-valence",
                    &v.id,
                    format!("role {:?} with in-degree {indeg}, out-degree {outdeg}", v.role),
                );
            }
        }

        // Connectivity (undirected).
        let mut visited = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.tail, e.head), (e.head, e.tail)] {
                    if a == v && b < visited.len() && !visited[b] {
                        visited[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        if visited.iter().any(|&x| !x) {
            report.push("disconnected", "graph", "graph is not connected".into());
        }

        // Measure sanity: positive density, and for tables monotone data.
        for e in &self.edges {
            if e.tail >= self.vertices.len() || e.head >= self.vertices.len() {
                continue;
            }
            let (a, b) = (&self.vertices[e.tail].height, &self.vertices[e.head].height);
            if let Some(m) = &e.measure {
                if a < b {
                    let (fmin, dmin) = m.min_density(a, b, 50);
                    if dmin < -1e-12 {
                        report.push(
                            "nonpositive-density",
                            &e.id,
                            format!("density {dmin} at height {fmin}"),
                        );
                    }
                }
                if let EdgeMeasure::Table { cumulative, .. } = m {
                    if cumulative.windows(2).any(|w| w[1] < w[0]) {
                        report.push(
                            "decreasing-cumulative",
                            &e.id,
                            "table cumulative measure decreases".into(),
                        );
                    }
                }
            }
        }

        // Surface metadata consistency.
        if let Some(s) = self.surface {
            if report.is_valid() {
                let dims = self.homology_dimensions_unchecked();
                if dims.b1 > s.genus {
                    report.push(
                        "surface-mismatch",
                        "graph",
                        format!("graph has {} independent cycles, surface genus {}", dims.b1, s.genus),
                    );
                }
                if dims.boundary_count != s.boundary_components {
                    report.push(
                        "surface-mismatch",
                        "graph",
                        format!(
                            "graph has {} boundary vertices, surface {} boundary components",
                            dims.boundary_count, s.boundary_components
                        ),
                    );
                }
            }
        }

        report
    }

    pub fn require_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            let first = &report.violations[0];
            Err(Error::InvalidGraph(format!(
                "{} violation(s); first: {} on {}: {}",
                report.violations.len(),
                first.kind,
                first.element,
                first.detail
            )))
        }
    }

    fn homology_dimensions_unchecked(&self) -> HomologyDims {
        let b1 = self.edges.len() + 1 - self.vertices.len();
        let boundary_count = self
            .vertices
            .iter()
            .filter(|v| v.role == VertexRole::Boundary)
            .count();
        let circulation_dim = if boundary_count == 0 {
            b1
        } else {
            b1 + boundary_count - 1
        };
        HomologyDims {
            b1,
            boundary_count,
            circulation_dim,
        }
    }

    /// Betti number, boundary count and the dimension of the circulation
    /// space (`b1` for closed graphs, `b1 + k - 1` with `k > 0` boundary
    /// vertices).
    pub fn homology_dimensions(&self) -> Result<HomologyDims> {
        self.require_valid()?;
        Ok(self.homology_dimensions_unchecked())
    }

    /// For a saddle: the lone edge on the minority side (trunk) and the two
    /// parallel-side edges (branches).
    pub fn trunk_and_branches(&self, v: usize) -> Result<(usize, [usize; 2])> {
        if self.vertices[v].role != VertexRole::Saddle {
            return Err(Error::InvalidInput(format!(
                "vertex {} is not a saddle",
                self.vertices[v].id
            )));
        }
        let ins = self.in_edges(v);
        let outs = self.out_edges(v);
        match (ins.len(), outs.len()) {
            (1, 2) => Ok((ins[0], [outs[0], outs[1]])),
            (2, 1) => Ok((outs[0], [ins[0], ins[1]])),
            _ => Err(Error::InvalidGraph(format!(
                "saddle {} is not 3-valent",
                self.vertices[v].id
            ))),
        }
    }

    pub fn edge_measure(&self, e: usize) -> Result<&EdgeMeasure> {
        self.edges[e].measure.as_ref().ok_or_else(|| {
            Error::InvalidInput(format!("edge {} carries no measure", self.edges[e].id))
        })
    }

    /// Weight `rho(e) = int_e f dmu` for every edge.
    pub fn edge_weights(&self) -> Result<Vec<Scalar>> {
        (0..self.edges.len())
            .map(|e| {
                let (a, b) = self.edge_span(e);
                self.edge_measure(e)?.moment(1, a, b)
            })
            .collect()
    }

    /// Total measure and total weight of the graph.
    pub fn total_mass_and_weight(&self) -> Result<(Scalar, Scalar)> {
        let mut mass = Scalar::zero();
        let mut weight = Scalar::zero();
        for e in 0..self.edges.len() {
            let (a, b) = self.edge_span(e);
            let m = self.edge_measure(e)?;
            mass = mass + m.moment(0, a, b)?;
            weight = weight + m.moment(1, a, b)?;
        }
        Ok((mass, weight))
    }
}

// ---------------------------------------------------------------------------
// Refinement at height zeros and circulation zeros.

#[derive(Debug, Clone)]
pub struct RefinedVertex {
    pub height: Scalar,
    /// Index into the original graph's vertices, or `None` for an inserted
    /// marker.
    pub origin: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RefinedEdge {
    pub orig: usize,
    pub tail: usize,
    pub head: usize,
    pub lo: Scalar,
    pub hi: Scalar,
    /// Sign of the height on the open piece.
    pub f_sign: Sign,
    /// Sign of the circulation function on the open piece, when one was
    /// supplied to the refinement.
    pub c_sign: Option<Sign>,
}

#[derive(Debug, Clone)]
pub struct RefinedGraph {
    pub vertices: Vec<RefinedVertex>,
    pub edges: Vec<RefinedEdge>,
}

/// Subdivide every edge at interior zeros of the height and (optionally) of
/// a circulation function, so that both have constant sign on each piece.
/// Marker heights for circulation zeros are found by root bracketing.
pub fn refine_at_zeros(
    g: &MeasuredReebGraph,
    c: Option<&CirculationFunction>,
) -> Result<RefinedGraph> {
    g.require_valid()?;
    let mut vertices: Vec<RefinedVertex> = g
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| RefinedVertex {
            height: v.height.clone(),
            origin: Some(i),
        })
        .collect();
    let mut edges = Vec::new();

    for e in 0..g.edges.len() {
        let (a, b) = g.edge_span(e);
        let span = (b.to_f64() - a.to_f64()).abs();
        let merge_tol = 1e-12 * span.max(1.0);
        let mut cuts: Vec<Scalar> = Vec::new();

        let zero = Scalar::zero();
        if a < &zero && &zero < b {
            cuts.push(zero.clone());
        }

        if let Some(c) = c {
            // On each constant-f-sign piece the circulation is strictly
            // monotone, so a sign change brackets exactly one root.
            let mut stops: Vec<Scalar> = vec![a.clone()];
            stops.extend(cuts.iter().cloned());
            stops.push(b.clone());
            for w in 0..stops.len() - 1 {
                let (x, y) = (&stops[w], &stops[w + 1]);
                let cx = c.evaluate(g, e, x)?;
                let cy = c.evaluate(g, e, y)?;
                let zx = cx.abs().to_f64() <= SIGN_TOL;
                let zy = cy.abs().to_f64() <= SIGN_TOL;
                if zx && zy {
                    // Strict monotonicity makes this impossible for genuine
                    // positive measures; treat it as degenerate data.
                    let mid = Scalar::real(0.5 * (x.to_f64() + y.to_f64()));
                    if c.evaluate(g, e, &mid)?.abs().to_f64() <= SIGN_TOL {
                        return Err(Error::DegenerateZeroSet {
                            edge: g.edges[e].id.clone(),
                            detail: format!(
                                "circulation vanishes on [{}, {}]",
                                x.to_f64(),
                                y.to_f64()
                            ),
                        });
                    }
                }
                if cx.sign() != Sign::Zero && cy.sign() != Sign::Zero && cx.sign() != cy.sign() {
                    let mut lo = x.to_f64();
                    let mut hi = y.to_f64();
                    let mut flo = cx.to_f64();
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let fm = c.evaluate(g, e, &Scalar::real(mid))?.to_f64();
                        if fm == 0.0 {
                            lo = mid;
                            hi = mid;
                            break;
                        }
                        if (fm > 0.0) == (flo > 0.0) {
                            lo = mid;
                            flo = fm;
                        } else {
                            hi = mid;
                        }
                        if hi - lo <= merge_tol {
                            break;
                        }
                    }
                    cuts.push(Scalar::real(0.5 * (lo + hi)));
                }
            }
        }

        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let mut points: Vec<Scalar> = Vec::new();
        for cut in cuts {
            let cf = cut.to_f64();
            let near_end = (cf - a.to_f64()).abs() <= merge_tol || (b.to_f64() - cf).abs() <= merge_tol;
            let near_prev = points
                .last()
                .map_or(false, |p| (cf - p.to_f64()).abs() <= merge_tol);
            if !near_end && !near_prev {
                points.push(cut);
            }
        }

        let mut stops = vec![(g.edges[e].tail, a.clone())];
        for p in points {
            let idx = vertices.len();
            vertices.push(RefinedVertex {
                height: p.clone(),
                origin: None,
            });
            stops.push((idx, p));
        }
        stops.push((g.edges[e].head, b.clone()));

        for w in 0..stops.len() - 1 {
            let (tail, lo) = stops[w].clone();
            let (head, hi) = stops[w + 1].clone();
            let zero = Scalar::zero();
            let f_sign = if hi <= zero {
                Sign::Neg
            } else if lo >= zero {
                Sign::Pos
            } else {
                // Only possible when no zero cut was inserted (span tiny).
                Sign::Zero
            };
            let c_sign = match c {
                Some(c) => {
                    let mid = Scalar::real(0.5 * (lo.to_f64() + hi.to_f64()));
                    c.evaluate(g, e, &mid)?.sign_with_tol(SIGN_TOL)
                }
                None => None,
            };
            edges.push(RefinedEdge {
                orig: e,
                tail,
                head,
                lo,
                hi,
                f_sign,
                c_sign,
            });
        }
    }

    Ok(RefinedGraph { vertices, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::EdgeMeasure;

    pub(crate) fn segment_graph() -> MeasuredReebGraph {
        MeasuredReebGraph {
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
        }
    }

    #[test]
    fn segment_is_valid_with_trivial_homology() {
        let g = segment_graph();
        assert!(g.validate().is_valid());
        let dims = g.homology_dimensions().unwrap();
        assert_eq!(dims.b1, 0);
        assert_eq!(dims.boundary_count, 0);
        assert_eq!(dims.circulation_dim, 0);
    }

    #[test]
    fn monotonicity_violation_detected() {
        let mut g = segment_graph();
        g.vertices[1].height = Scalar::int(-2);
        let report = g.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == "non-monotone" && v.element == "e"));
    }

    #[test]
    fn self_loop_and_valence_detected() {
        let mut g = segment_graph();
        g.edges[0].head = 0;
        let report = g.validate();
        assert!(report.violations.iter().any(|v| v.kind == "self-loop"));
        assert!(report.violations.iter().any(|v| v.kind == "bad-valence"));
    }

    #[test]
    fn json_round_trip() {
        let g = segment_graph();
        let s = serde_json::to_string(&g).unwrap();
        let back: MeasuredReebGraph = serde_json::from_str(&s).unwrap();
        assert!(back.validate().is_valid());
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn refine_cuts_at_height_zero() {
        let g = segment_graph();
        let r = refine_at_zeros(&g, None).unwrap();
        assert_eq!(r.vertices.len(), 3);
        assert_eq!(r.edges.len(), 2);
        assert_eq!(r.edges[0].f_sign, Sign::Neg);
        assert_eq!(r.edges[1].f_sign, Sign::Pos);
        assert!(r.vertices[2].origin.is_none());
        assert!(r.vertices[2].height.is_zero());
    }
}
