//! Fixture graphs and seeded random families of measured Reeb graphs, used
//! by tests, benchmarks and documentation examples.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, MeasuredReebGraph, SurfaceInfo, Vertex, VertexRole};
use crate::measure::{Bump, EdgeMeasure};
use crate::poly::Poly;
use crate::scalar::Scalar;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn vx(id: &str, role: VertexRole, h: Scalar) -> Vertex {
    Vertex {
        id: id.into(),
        role,
        height: h,
    }
}

fn uniform_edge(id: &str, tail: usize, head: usize, density: Scalar) -> Edge {
    Edge {
        id: id.into(),
        tail,
        head,
        measure: Some(EdgeMeasure::uniform(density)),
    }
}

/// Uniform density realizing total weight `w` on `[a, b]`; requires the
/// sign of `w` to match the sign of `a + b`.
fn uniform_for_weight(w: &Scalar, a: &Scalar, b: &Scalar) -> Scalar {
    // w = d * (b^2 - a^2) / 2
    let denom = (b * b - a * a) / Scalar::int(2);
    assert!(
        !denom.is_zero() && (w / &denom).sign() != crate::scalar::Sign::Neg,
        "weight {w} not realizable by a uniform density on [{a}, {b}]"
    );
    w / &denom
}

/// Linear density `u + v f` realizing weight `w` on the symmetric span
/// `[-h, h]`.
fn linear_for_weight_symmetric(w: &Scalar, h: &Scalar) -> EdgeMeasure {
    // int f (u + v f) df over [-h, h] = v * 2 h^3 / 3.
    let v = w * Scalar::int(3) / (Scalar::int(2) * h * h * h);
    let u = &v.abs() * h + Scalar::one();
    EdgeMeasure::linear(u, v)
}

/// Sphere graph with one saddle and two top branches sharing the window
/// `[3/2, 7/4]`: Min(-2) -> Saddle(1), then Saddle -> Max(2) and
/// Saddle -> Max(5/2). Total weight is 0.
pub fn sphere_branch_graph() -> MeasuredReebGraph {
    MeasuredReebGraph {
        vertices: vec![
            vx("m", VertexRole::Min, Scalar::int(-2)),
            vx("s", VertexRole::Saddle, Scalar::int(1)),
            vx("xa", VertexRole::Max, Scalar::int(2)),
            vx("xb", VertexRole::Max, Scalar::ratio(5, 2)),
        ],
        edges: vec![
            uniform_edge("trunk", 0, 1, Scalar::int(2)),
            uniform_edge("ba", 1, 2, Scalar::int(1)),
            uniform_edge("bb", 1, 3, Scalar::ratio(4, 7)),
        ],
        surface: Some(SurfaceInfo {
            genus: 0,
            boundary_components: 0,
        }),
        coordinates: None,
    }
}

/// Genus-2 closed graph (double-cycle "pretzel" shape) with edge weights
/// (-1, -1, 0, 0, 0, 1, 1) and preferred coordinates `(c1, c2)` given by
/// the limits at saddle `G` along its two branches.
pub fn pretzel_graph() -> MeasuredReebGraph {
    MeasuredReebGraph {
        vertices: vec![
            vx("C", VertexRole::Min, Scalar::int(-3)),
            vx("D", VertexRole::Saddle, Scalar::int(-2)),
            vx("G", VertexRole::Saddle, Scalar::int(-1)),
            vx("H", VertexRole::Saddle, Scalar::int(1)),
            vx("E", VertexRole::Saddle, Scalar::int(2)),
            vx("F", VertexRole::Max, Scalar::int(3)),
        ],
        edges: vec![
            // weight -1 on [-3,-2]
            uniform_edge("cd", 0, 1, Scalar::ratio(2, 5)),
            // weight -1 on [-2,-1]
            uniform_edge("dg", 1, 2, Scalar::ratio(2, 3)),
            // weights 0 on the symmetric cycle pair [-1,1]
            uniform_edge("g1", 2, 3, Scalar::one()),
            uniform_edge("g2", 2, 3, Scalar::ratio(1, 2)),
            // weight 0 on [-2,2]
            uniform_edge("de", 1, 4, Scalar::ratio(1, 3)),
            // weight 1 on [1,2]
            uniform_edge("he", 3, 4, Scalar::ratio(2, 3)),
            // weight 1 on [2,3]
            uniform_edge("ef", 4, 5, Scalar::ratio(2, 5)),
        ],
        surface: Some(SurfaceInfo {
            genus: 2,
            boundary_components: 0,
        }),
        coordinates: Some(vec![("G".into(), "g1".into()), ("G".into(), "g2".into())]),
    }
}

/// Height-function torus graph: Min -> Saddle -> (double edge) -> Saddle ->
/// Max, with prescribed edge weights `a = (a1, a2, a3, a4)` summing to 0,
/// `a1 < 0 < a4`. The preferred coordinate is the lower limit `z` at the
/// bottom saddle along the first cycle edge.
pub fn torus_graph(a: &[Scalar; 4]) -> MeasuredReebGraph {
    let sum = &(&a[0] + &a[1]) + &(&a[2] + &a[3]);
    assert!(sum.is_zero(), "weights must sum to zero, got {sum}");
    MeasuredReebGraph {
        vertices: vec![
            vx("C", VertexRole::Min, Scalar::int(-2)),
            vx("D", VertexRole::Saddle, Scalar::int(-1)),
            vx("E", VertexRole::Saddle, Scalar::int(1)),
            vx("F", VertexRole::Max, Scalar::int(2)),
        ],
        edges: vec![
            uniform_edge(
                "e1",
                0,
                1,
                uniform_for_weight(&a[0], &Scalar::int(-2), &Scalar::int(-1)),
            ),
            Edge {
                id: "e2".into(),
                tail: 1,
                head: 2,
                measure: Some(linear_for_weight_symmetric(&a[1], &Scalar::one())),
            },
            Edge {
                id: "e3".into(),
                tail: 1,
                head: 2,
                measure: Some(linear_for_weight_symmetric(&a[2], &Scalar::one())),
            },
            uniform_edge(
                "e4",
                2,
                3,
                uniform_for_weight(&a[3], &Scalar::int(1), &Scalar::int(2)),
            ),
        ],
        surface: Some(SurfaceInfo {
            genus: 1,
            boundary_components: 0,
        }),
        coordinates: Some(vec![("D".into(), "e2".into())]),
    }
}

/// Disk graph with positive height everywhere: one minimum, one saddle,
/// one maximum and one boundary attachment, edge weights (2, 3, 1). Its
/// unique circulation has saddle limits (2, -3, 5), so no sign pattern is
/// balanced.
pub fn disk_graph() -> MeasuredReebGraph {
    MeasuredReebGraph {
        vertices: vec![
            vx("m", VertexRole::Min, Scalar::int(1)),
            vx("s", VertexRole::Saddle, Scalar::int(2)),
            vx("x", VertexRole::Max, Scalar::int(4)),
            vx("b", VertexRole::Boundary, Scalar::int(3)),
        ],
        edges: vec![
            uniform_edge(
                "em",
                0,
                1,
                uniform_for_weight(&Scalar::int(2), &Scalar::int(1), &Scalar::int(2)),
            ),
            uniform_edge(
                "ex",
                1,
                2,
                uniform_for_weight(&Scalar::int(3), &Scalar::int(2), &Scalar::int(4)),
            ),
            uniform_edge(
                "eb",
                1,
                3,
                uniform_for_weight(&Scalar::int(1), &Scalar::int(2), &Scalar::int(3)),
            ),
        ],
        surface: Some(SurfaceInfo {
            genus: 0,
            boundary_components: 1,
        }),
        coordinates: None,
    }
}

// ---------------------------------------------------------------------------
// Random families

struct Builder {
    vertices: Vec<Vertex>,
    edges: Vec<(usize, usize)>, // structure only; measures assigned later
    used_heights: Vec<Scalar>,
    counter: usize,
}

impl Builder {
    fn new() -> Builder {
        let mut b = Builder {
            vertices: vec![],
            edges: vec![],
            used_heights: vec![],
            counter: 0,
        };
        let lo = b.add_vertex(VertexRole::Min, Scalar::int(-1));
        let hi = b.add_vertex(VertexRole::Max, Scalar::int(1));
        b.edges.push((lo, hi));
        b
    }

    fn fresh_height(&mut self, mut h: Scalar, lo: &Scalar, hi: &Scalar) -> Scalar {
        let step = if lo < hi {
            (hi - lo) / Scalar::int(4096)
        } else {
            Scalar::ratio(1, 1 << 14)
        };
        let mut k = 1i64;
        while self.used_heights.iter().any(|u| u == &h) || &h <= lo || &h >= hi {
            h = &h + &(&step * &Scalar::int(k));
            k = if k > 0 { -k } else { -k + 1 };
            if k.abs() > 1000 {
                panic!("could not find a fresh height in ({lo}, {hi})");
            }
        }
        self.used_heights.push(h.clone());
        h
    }

    fn add_vertex(&mut self, role: VertexRole, h: Scalar) -> usize {
        self.counter += 1;
        self.used_heights.push(h.clone());
        self.vertices.push(Vertex {
            id: format!("v{:03}", self.counter),
            role,
            height: h,
        });
        self.vertices.len() - 1
    }

    fn interior_point(&mut self, rng: &mut impl Rng, e: usize) -> Scalar {
        let (t, h) = self.edges[e];
        let lo = self.vertices[t].height.clone();
        let hi = self.vertices[h].height.clone();
        let r = Scalar::ratio(rng.gen_range(1..16), 16);
        let cand = &lo + &(&r * &(&hi - &lo));
        self.fresh_height(cand, &lo, &hi)
    }

    /// Replace edge `e` by a handle: tail -> s1, double edge s1 -> s2,
    /// s2 -> head. Adds one independent cycle.
    fn insert_cycle(&mut self, rng: &mut impl Rng, e: usize) {
        let p1 = self.interior_point(rng, e);
        let p2 = self.interior_point(rng, e);
        let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
        let (t, h) = self.edges[e];
        let s1 = self.add_vertex(VertexRole::Saddle, lo);
        let s2 = self.add_vertex(VertexRole::Saddle, hi);
        self.edges[e] = (t, s1);
        self.edges.push((s1, s2));
        self.edges.push((s1, s2));
        self.edges.push((s2, h));
    }

    /// Split edge `e` at an interior saddle with a new pendant extreme.
    fn insert_branch(&mut self, rng: &mut impl Rng, e: usize) {
        let p = self.interior_point(rng, e);
        let (t, h) = self.edges[e];
        let s = self.add_vertex(VertexRole::Saddle, p.clone());
        self.edges[e] = (t, s);
        self.edges.push((s, h));
        if rng.gen_bool(0.5) {
            let top = &p + &Scalar::ratio(rng.gen_range(1..16), 8);
            let hi_bound = &top + &Scalar::one();
            let top = self.fresh_height(top, &p, &hi_bound);
            let m = self.add_vertex(VertexRole::Max, top);
            self.edges.push((s, m));
        } else {
            let bot = &p - &Scalar::ratio(rng.gen_range(1..16), 8);
            let lo_bound = &bot - &Scalar::one();
            let bot = self.fresh_height(bot, &lo_bound, &p);
            let m = self.add_vertex(VertexRole::Min, bot);
            self.edges.push((m, s));
        }
    }

    fn finish(self, rng: &mut impl Rng, balance: bool) -> MeasuredReebGraph {
        let mut g = MeasuredReebGraph {
            vertices: self.vertices,
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(i, &(t, h))| Edge {
                    id: format!("e{i:03}"),
                    tail: t,
                    head: h,
                    measure: None,
                })
                .collect(),
            surface: None,
            coordinates: None,
        };
        for e in &mut g.edges {
            let d = Scalar::ratio(rng.gen_range(1..=8), 4);
            e.measure = Some(EdgeMeasure::uniform(d));
        }
        if balance {
            balance_total_weight(&mut g);
        }
        g
    }
}

/// Add a positive bump on a constant-height-sign window so the total weight
/// becomes exactly zero. Requires the height range to cross zero.
pub fn balance_total_weight(g: &mut MeasuredReebGraph) {
    let total = g
        .edge_weights()
        .expect("measures assigned")
        .into_iter()
        .fold(Scalar::zero(), |a, w| a + w);
    if total.is_zero() {
        return;
    }
    let want_neg_window = total.sign() == crate::scalar::Sign::Pos;
    // Pick the edge at the extreme end and carve a window where the height
    // sign is right.
    let edge = if want_neg_window {
        (0..g.edges.len())
            .min_by(|&a, &b| {
                let ha = &g.vertices[g.edges[a].tail].height;
                let hb = &g.vertices[g.edges[b].tail].height;
                ha.partial_cmp(hb).unwrap()
            })
            .unwrap()
    } else {
        (0..g.edges.len())
            .max_by(|&a, &b| {
                let ha = &g.vertices[g.edges[a].head].height;
                let hb = &g.vertices[g.edges[b].head].height;
                ha.partial_cmp(hb).unwrap()
            })
            .unwrap()
    };
    let (a, b) = {
        let (x, y) = g.edge_span(edge);
        (x.clone(), y.clone())
    };
    let zero = Scalar::zero();
    let (wlo, whi) = if want_neg_window {
        let end = if b < zero { b.clone() } else { zero };
        assert!(a < end, "graph heights do not reach below zero");
        let q = (&end - &a) / Scalar::int(4);
        (&a + &q, &end - &q)
    } else {
        let start = if a > zero { a.clone() } else { zero };
        assert!(start < b, "graph heights do not reach above zero");
        let q = (&b - &start) / Scalar::int(4);
        (&start + &q, &b - &q)
    };
    // Quadratic bump (f - wlo)(whi - f), scaled so its weight cancels the
    // imbalance; it is positive on the open window either way.
    let base = Poly(vec![
        -&(&wlo * &whi),
        &wlo + &whi,
        Scalar::int(-1),
    ]);
    let i = base.shift_up(1).definite_integral(&wlo, &whi);
    let c = -&total / &i;
    assert!(
        c.sign() == crate::scalar::Sign::Pos,
        "balancing bump came out nonpositive"
    );
    match g.edges[edge].measure.as_mut().unwrap() {
        EdgeMeasure::PolyLog { bumps, .. } => bumps.push(Bump {
            poly: base.scale(&c),
            lo: wlo,
            hi: whi,
        }),
        _ => unreachable!("generator measures are analytic"),
    }
}

/// Random closed measured Reeb graph with the given number of independent
/// cycles and extra pendant branches. Total weight is exactly zero, so a
/// circulation space exists.
pub fn random_closed_graph(
    rng: &mut impl Rng,
    genus: usize,
    extra_branches: usize,
) -> MeasuredReebGraph {
    let mut b = Builder::new();
    let mut ops: Vec<bool> = std::iter::repeat(true)
        .take(genus)
        .chain(std::iter::repeat(false).take(extra_branches))
        .collect();
    // Deterministic shuffle via the seeded rng.
    for i in (1..ops.len()).rev() {
        ops.swap(i, rng.gen_range(0..=i));
    }
    for op in ops {
        let e = rng.gen_range(0..b.edges.len());
        if op {
            b.insert_cycle(rng, e);
        } else {
            b.insert_branch(rng, e);
        }
    }
    b.finish(rng, true)
}

/// Random graph with `boundary` 1-valent boundary attachments obtained by
/// relabeling extremes of a closed graph. Not weight-balanced.
pub fn random_bordered_graph(
    rng: &mut impl Rng,
    genus: usize,
    boundary: usize,
    extra_branches: usize,
) -> MeasuredReebGraph {
    let extra = extra_branches.max(boundary.saturating_sub(2));
    let mut g = random_closed_graph(rng, genus, extra);
    let mut extremes: Vec<usize> = (0..g.vertices.len())
        .filter(|&v| matches!(g.vertices[v].role, VertexRole::Min | VertexRole::Max))
        .collect();
    assert!(extremes.len() >= boundary);
    for _ in 0..boundary {
        let k = rng.gen_range(0..extremes.len());
        let v = extremes.swap_remove(k);
        g.vertices[v].role = VertexRole::Boundary;
    }
    g
}

/// Random parameter point with coordinates `num/16`, `num` uniform in
/// `[-16 * scale, 16 * scale]`.
pub fn random_parameters(rng: &mut impl Rng, dim: usize, scale: i64) -> Vec<Scalar> {
    (0..dim)
        .map(|_| Scalar::ratio(rng.gen_range(-16 * scale..=16 * scale), 16))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulation::{circulation_space_of, CirculationSolution};

    #[test]
    fn fixtures_are_valid() {
        for g in [
            sphere_branch_graph(),
            pretzel_graph(),
            torus_graph(&[
                Scalar::int(-3),
                Scalar::int(-1),
                Scalar::int(2),
                Scalar::int(2),
            ]),
            disk_graph(),
        ] {
            let report = g.validate();
            assert!(report.is_valid(), "{:?}", report.violations);
        }
    }

    #[test]
    fn fixture_weights_match_construction() {
        let g = pretzel_graph();
        let w = g.edge_weights().unwrap();
        let expect = [-1i64, -1, 0, 0, 0, 1, 1];
        for (got, want) in w.iter().zip(expect) {
            assert_eq!(got, &Scalar::int(want));
        }
        let a = [
            Scalar::int(-1),
            Scalar::int(-4),
            Scalar::int(2),
            Scalar::int(3),
        ];
        let t = torus_graph(&a);
        for (got, want) in t.edge_weights().unwrap().iter().zip(&a) {
            assert_eq!(got, want);
        }
        assert_eq!(
            disk_graph().edge_weights().unwrap(),
            vec![Scalar::int(2), Scalar::int(3), Scalar::int(1)]
        );
    }

    #[test]
    fn random_closed_graphs_are_valid_and_balanced() {
        let mut r = rng(7);
        for k in 0..30 {
            let g = random_closed_graph(&mut r, k % 4, k % 5);
            let report = g.validate();
            assert!(report.is_valid(), "{:?}", report.violations);
            assert!(g.is_closed());
            let total = g
                .edge_weights()
                .unwrap()
                .into_iter()
                .fold(Scalar::zero(), |a, w| a + w);
            assert!(total.is_zero(), "total weight {total}");
            assert!(matches!(
                circulation_space_of(&g).unwrap(),
                CirculationSolution::Space(_)
            ));
        }
    }

    #[test]
    fn random_bordered_graphs_have_requested_boundary() {
        let mut r = rng(11);
        for k in 0..20 {
            let want = 1 + k % 3;
            let g = random_bordered_graph(&mut r, k % 3, want, k % 4);
            assert!(g.validate().is_valid());
            let dims = g.homology_dimensions().unwrap();
            assert_eq!(dims.boundary_count, want);
        }
    }
}
