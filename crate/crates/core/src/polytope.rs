//! The region of admissible circulations, as a system of strict linear
//! inequalities in the parameters of the circulation space, plus exact
//! feasibility, vertex enumeration and boundedness.
//!
//! Inequality convention: `normal . t + offset < 0` (or `<= 0` when
//! `strict` is false).

use serde::{Deserialize, Serialize};

use crate::circulation::AffineCirculationSpace;
use crate::error::{Error, Result};
use crate::graph::MeasuredReebGraph;
use crate::linalg;
use crate::lp::{self, LpOutcomeFree};
use crate::scalar::{self, Scalar, Sign};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ineq {
    pub normal: Vec<Scalar>,
    pub offset: Scalar,
    pub strict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<IneqLabel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IneqLabel {
    pub saddle: String,
    pub edge: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HRep {
    pub dim: usize,
    pub ineqs: Vec<Ineq>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct VRep {
    pub vertices: Vec<Vec<Scalar>>,
    pub rays: Vec<Vec<Scalar>>,
}

#[derive(Debug, Clone)]
pub enum Feasibility {
    Empty,
    Feasible {
        point: Vec<Scalar>,
        /// Largest margin by which all strict inequalities can be cleared
        /// simultaneously; `None` means the margin is unbounded.
        slack: Option<Scalar>,
    },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

#[derive(Debug, Clone)]
pub enum Boundedness {
    Bounded,
    Unbounded { direction: Vec<Scalar> },
}

/// An affine function `constant + coeffs . t` of the space parameters.
#[derive(Debug, Clone)]
pub struct AffineForm {
    pub coeffs: Vec<Scalar>,
    pub constant: Scalar,
}

impl AffineForm {
    pub fn eval(&self, t: &[Scalar]) -> Scalar {
        &self.constant + &scalar::dot(&self.coeffs, t)
    }
}

/// Limit of the circulation at vertex `v` along edge `e`, as an affine
/// function of the space parameters.
pub fn limit_form(
    g: &MeasuredReebGraph,
    space: &AffineCirculationSpace,
    v: usize,
    e: usize,
) -> AffineForm {
    let at_head = g.edges[e].head == v;
    let pick = |limits: &Vec<Scalar>, with_weight: bool| -> Scalar {
        if at_head {
            limits[e].clone()
        } else if with_weight {
            &limits[e] - &space.weights[e]
        } else {
            limits[e].clone()
        }
    };
    AffineForm {
        constant: pick(&space.particular, true),
        coeffs: space.basis.iter().map(|b| pick(b, false)).collect(),
    }
}

/// Saddle-incident limits in deterministic (saddle id, edge id) order.
pub fn saddle_limit_forms(
    g: &MeasuredReebGraph,
    space: &AffineCirculationSpace,
) -> Result<Vec<(usize, usize, AffineForm)>> {
    let mut out = Vec::new();
    for v in g.saddles() {
        let (trunk, branches) = g.trunk_and_branches(v)?;
        let mut edges = vec![trunk, branches[0], branches[1]];
        edges.sort_by(|&a, &b| g.edges[a].id.cmp(&g.edges[b].id));
        for e in edges {
            out.push((v, e, limit_form(g, space, v, e)));
        }
    }
    Ok(out)
}

/// Strict system expressing that every saddle limit is negative.
pub fn negative_system(
    g: &MeasuredReebGraph,
    space: &AffineCirculationSpace,
) -> Result<HRep> {
    let mut ineqs = Vec::new();
    for (v, e, form) in saddle_limit_forms(g, space)? {
        ineqs.push(Ineq {
            normal: form.coeffs,
            offset: form.constant,
            strict: true,
            label: Some(IneqLabel {
                saddle: g.vertices[v].id.clone(),
                edge: g.edges[e].id.clone(),
            }),
        });
    }
    Ok(HRep {
        dim: space.dim(),
        ineqs,
    })
}

/// Decide strict feasibility by maximizing a common slack `s` with
/// `normal . t + s <= -offset` for strict rows.
pub fn feasibility(h: &HRep) -> Feasibility {
    let d = h.dim;
    let any_strict = h.ineqs.iter().any(|i| i.strict);
    // Variables: t (free, d entries) then s (free with s >= 0 row).
    let mut rows: Vec<(Vec<Scalar>, Scalar)> = Vec::new();
    for i in &h.ineqs {
        let mut row = i.normal.clone();
        row.push(if i.strict { Scalar::one() } else { Scalar::zero() });
        rows.push((row, -&i.offset));
    }
    let mut srow = vec![Scalar::zero(); d];
    srow.push(Scalar::int(-1));
    rows.push((srow, Scalar::zero()));
    let mut obj = vec![Scalar::zero(); d];
    obj.push(Scalar::one());

    match lp::maximize_free(&obj, &rows) {
        LpOutcomeFree::Infeasible => Feasibility::Empty,
        LpOutcomeFree::Unbounded => {
            // Margin unbounded: recover a point by capping s at 1.
            let mut rows2 = rows.clone();
            let mut cap = vec![Scalar::zero(); d];
            cap.push(Scalar::one());
            rows2.push((cap, Scalar::one()));
            match lp::maximize_free(&obj, &rows2) {
                LpOutcomeFree::Optimal { y, .. } => Feasibility::Feasible {
                    point: y[..d].to_vec(),
                    slack: None,
                },
                _ => Feasibility::Feasible {
                    point: vec![Scalar::zero(); d],
                    slack: None,
                },
            }
        }
        LpOutcomeFree::Optimal { y, value } => {
            let ok = if any_strict {
                matches!(value.sign_with_tol(crate::SIGN_TOL), Some(Sign::Pos))
            } else {
                true
            };
            if ok {
                Feasibility::Feasible {
                    point: y[..d].to_vec(),
                    slack: Some(value),
                }
            } else {
                Feasibility::Empty
            }
        }
    }
}

fn require_exact(h: &HRep, what: &str) -> Result<()> {
    let exact = h
        .ineqs
        .iter()
        .all(|i| i.offset.is_exact() && i.normal.iter().all(Scalar::is_exact));
    if exact {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{what} requires exact rational data"
        )))
    }
}

/// Vertices and extreme rays of the closure, by exhaustive subset
/// enumeration. Exact data only; dimension capped at 6.
pub fn enumerate_vertices(h: &HRep) -> Result<VRep> {
    require_exact(h, "vertex enumeration")?;
    if h.dim > 6 {
        return Err(Error::Unsupported(format!(
            "vertex enumeration capped at dimension 6, got {}",
            h.dim
        )));
    }
    let d = h.dim;
    let m = h.ineqs.len();
    let satisfied_weakly = |p: &[Scalar]| -> bool {
        h.ineqs
            .iter()
            .all(|i| (scalar::dot(&i.normal, p) + &i.offset).sign() != Sign::Pos)
    };

    let mut vertices: Vec<Vec<Scalar>> = Vec::new();
    if d == 0 {
        if satisfied_weakly(&[]) {
            vertices.push(vec![]);
        }
        return Ok(VRep { vertices, rays: vec![] });
    }

    // Vertices: intersections of d-subsets of bounding hyperplanes.
    let mut idx: Vec<usize> = (0..d).collect();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    if m >= d {
        loop {
            subsets.push(idx.clone());
            // next combination
            let mut i = d;
            loop {
                if i == 0 {
                    idx.clear();
                    break;
                }
                i -= 1;
                if idx[i] != i + m - d {
                    idx[i] += 1;
                    for j in i + 1..d {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
            if idx.is_empty() {
                break;
            }
        }
    }
    for subset in &subsets {
        let a: Vec<Vec<Scalar>> = subset.iter().map(|&i| h.ineqs[i].normal.clone()).collect();
        let b: Vec<Scalar> = subset.iter().map(|&i| -&h.ineqs[i].offset).collect();
        if let Some(p) = linalg::solve_square(&a, &b) {
            if satisfied_weakly(&p) && !vertices.iter().any(|q| q == &p) {
                vertices.push(p);
            }
        }
    }

    // Extreme rays of the recession cone from (d-1)-subsets.
    let in_cone = |dir: &[Scalar]| -> bool {
        h.ineqs
            .iter()
            .all(|i| scalar::dot(&i.normal, dir).sign() != Sign::Pos)
    };
    let normalize = |dir: &mut Vec<Scalar>| {
        if let Some(first) = dir.iter().find(|x| !x.is_zero()).cloned() {
            let s = first.abs().recip();
            for x in dir.iter_mut() {
                *x = &*x * &s;
            }
        }
    };
    let mut rays: Vec<Vec<Scalar>> = Vec::new();
    let mut push_ray = |mut dir: Vec<Scalar>| {
        normalize(&mut dir);
        if dir.iter().any(|x| !x.is_zero()) && !rays.iter().any(|r| r == &dir) {
            rays.push(dir);
        }
    };
    if d == 1 {
        for cand in [vec![Scalar::one()], vec![Scalar::int(-1)]] {
            if in_cone(&cand) {
                push_ray(cand);
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..d - 1).collect();
        let k = d - 1;
        if m >= k {
            loop {
                let a: Vec<Vec<Scalar>> = idx.iter().map(|&i| h.ineqs[i].normal.clone()).collect();
                if linalg::rank(&a) == k {
                    // One-dimensional nullspace: solve A x = 0 with one free var.
                    let sol = linalg::solve_affine(&a, &vec![Scalar::zero(); k], 0.0).ok();
                    if let Some(sol) = sol {
                        for n in &sol.nullspace {
                            for cand in [n.clone(), n.iter().map(|x| -x).collect::<Vec<_>>()] {
                                if in_cone(&cand) {
                                    push_ray(cand);
                                }
                            }
                        }
                    }
                }
                let mut i = k;
                loop {
                    if i == 0 {
                        idx.clear();
                        break;
                    }
                    i -= 1;
                    if idx[i] != i + m - k {
                        idx[i] += 1;
                        for j in i + 1..k {
                            idx[j] = idx[j - 1] + 1;
                        }
                        break;
                    }
                }
                if idx.is_empty() {
                    break;
                }
            }
        }
    }

    let cmp = |p: &Vec<Scalar>, q: &Vec<Scalar>| {
        for (x, y) in p.iter().zip(q) {
            match x.partial_cmp(y) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        std::cmp::Ordering::Equal
    };
    vertices.sort_by(cmp);
    rays.sort_by(cmp);
    Ok(VRep { vertices, rays })
}

/// Is the recession cone `{x : normal . x <= 0 for all rows}` trivial?
/// Decided by 2d sign-probing linear programs.
pub fn boundedness(h: &HRep) -> Result<Boundedness> {
    let d = h.dim;
    for i in 0..d {
        for sgn in [1i64, -1] {
            // max sgn * x_i subject to the cone rows and sgn * x_i <= 1.
            let mut rows: Vec<(Vec<Scalar>, Scalar)> = h
                .ineqs
                .iter()
                .map(|q| (q.normal.clone(), Scalar::zero()))
                .collect();
            let mut cap = vec![Scalar::zero(); d];
            cap[i] = Scalar::int(sgn);
            rows.push((cap, Scalar::one()));
            let mut obj = vec![Scalar::zero(); d];
            obj[i] = Scalar::int(sgn);
            match lp::maximize_free(&obj, &rows) {
                LpOutcomeFree::Optimal { y, value } => {
                    if matches!(value.sign_with_tol(crate::SIGN_TOL), Some(Sign::Pos)) {
                        return Ok(Boundedness::Unbounded { direction: y });
                    }
                }
                LpOutcomeFree::Unbounded => {
                    return Err(Error::InternalFault(
                        "capped cone probe reported unbounded".into(),
                    ))
                }
                LpOutcomeFree::Infeasible => {
                    return Err(Error::InternalFault("cone probe infeasible".into()))
                }
            }
        }
    }
    Ok(Boundedness::Bounded)
}

/// One sign pattern over the saddles with its induced system.
#[derive(Debug, Clone)]
pub struct BalancedRegion {
    /// `(saddle id, sign)` in saddle-id order.
    pub pattern: Vec<(String, Sign)>,
    pub hrep: HRep,
    pub feasibility: Feasibility,
}

/// Enumerate all per-saddle sign patterns and test each region where all
/// three limits of each saddle carry the pattern's sign.
pub fn balanced_regions(
    g: &MeasuredReebGraph,
    space: &AffineCirculationSpace,
) -> Result<Vec<BalancedRegion>> {
    let saddles = g.saddles();
    if saddles.len() > 20 {
        return Err(Error::Unsupported(format!(
            "balanced-region enumeration capped at 20 saddles, got {}",
            saddles.len()
        )));
    }
    let forms = saddle_limit_forms(g, space)?;
    let mut out = Vec::new();
    for mask in 0..(1usize << saddles.len()) {
        let mut pattern = Vec::new();
        let mut ineqs = Vec::new();
        for (k, &v) in saddles.iter().enumerate() {
            let sign = if mask >> k & 1 == 1 { Sign::Pos } else { Sign::Neg };
            pattern.push((g.vertices[v].id.clone(), sign));
            for (fv, fe, form) in forms.iter().filter(|(fv, _, _)| *fv == v) {
                // sign * limit > 0  <=>  -sign * limit < 0
                let s = Scalar::int(-(sign.as_i8() as i64));
                ineqs.push(Ineq {
                    normal: form.coeffs.iter().map(|c| &s * c).collect(),
                    offset: &s * &form.constant,
                    strict: true,
                    label: Some(IneqLabel {
                        saddle: g.vertices[*fv].id.clone(),
                        edge: g.edges[*fe].id.clone(),
                    }),
                });
            }
        }
        let hrep = HRep {
            dim: space.dim(),
            ineqs,
        };
        let feasibility = feasibility(&hrep);
        out.push(BalancedRegion {
            pattern,
            hrep,
            feasibility,
        });
    }
    Ok(out)
}

/// Per-edge lower bound for the head limit of any totally negative
/// circulation: the sum of weights of all edges from which the edge is
/// reachable (including itself).
pub fn circulation_lower_bounds(g: &MeasuredReebGraph, weights: &[Scalar]) -> Result<Vec<Scalar>> {
    g.require_valid()?;
    let n = g.vertices.len();
    // reach[u] = set of vertices reachable from u along directed edges.
    let mut reach = vec![vec![false; n]; n];
    for u in 0..n {
        let mut stack = vec![u];
        reach[u][u] = true;
        while let Some(v) = stack.pop() {
            for e in g.out_edges(v) {
                let w = g.edges[e].head;
                if !reach[u][w] {
                    reach[u][w] = true;
                    stack.push(w);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(g.edges.len());
    for e in 0..g.edges.len() {
        let mut bound = Scalar::zero();
        for ep in 0..g.edges.len() {
            if ep == e || reach[g.edges[ep].head][g.edges[e].tail] {
                bound = bound + &weights[ep];
            }
        }
        out.push(bound);
    }
    Ok(out)
}

/// Reparametrize the circulation space so that parameter `i` equals the
/// circulation limit at the given `(vertex, edge)` pair. The pairs must
/// give affinely independent limits.
pub fn reparametrize_by_limits(
    g: &MeasuredReebGraph,
    space: &AffineCirculationSpace,
    pairs: &[(usize, usize)],
) -> Result<AffineCirculationSpace> {
    let d = space.dim();
    if pairs.len() != d {
        return Err(Error::InvalidInput(format!(
            "need exactly {d} limit pairs, got {}",
            pairs.len()
        )));
    }
    let forms: Vec<AffineForm> = pairs
        .iter()
        .map(|&(v, e)| limit_form(g, space, v, e))
        .collect();
    let m: Vec<Vec<Scalar>> = forms.iter().map(|f| f.coeffs.clone()).collect();
    let minv = linalg::invert(&m).ok_or_else(|| {
        Error::InvalidInput("chosen limits are not independent coordinates".into())
    })?;
    // t = Minv (y - o); head_limits = particular + B t.
    let o: Vec<Scalar> = forms.iter().map(|f| f.constant.clone()).collect();
    let minv_o = linalg::mat_vec(&minv, &o);
    let nedges = space.particular.len();
    let mut particular = space.particular.clone();
    for j in 0..d {
        for k in 0..nedges {
            particular[k] = &particular[k] - &(&space.basis[j][k] * &minv_o[j]);
        }
    }
    let mut basis = Vec::with_capacity(d);
    for i in 0..d {
        let mut b = vec![Scalar::zero(); nedges];
        for j in 0..d {
            for k in 0..nedges {
                b[k] = &b[k] + &(&space.basis[j][k] * &minv[j][i]);
            }
        }
        basis.push(b);
    }
    Ok(AffineCirculationSpace {
        particular,
        basis,
        free_edges: vec![],
        weights: space.weights.clone(),
    })
}

/// Use the graph's `coordinates` annotation (saddle id, edge id pairs) when
/// present and of the right arity.
pub fn preferred_space(
    g: &MeasuredReebGraph,
    space: &AffineCirculationSpace,
) -> Result<AffineCirculationSpace> {
    let Some(coords) = &g.coordinates else {
        return Ok(space.clone());
    };
    if coords.len() != space.dim() {
        return Err(Error::InvalidInput(format!(
            "coordinates annotation has {} pairs, space dimension is {}",
            coords.len(),
            space.dim()
        )));
    }
    let mut pairs = Vec::new();
    for (vid, eid) in coords {
        let v = g
            .vertex_index(vid)
            .ok_or_else(|| Error::InvalidInput(format!("unknown vertex id {vid}")))?;
        let e = g
            .edge_index(eid)
            .ok_or_else(|| Error::InvalidInput(format!("unknown edge id {eid}")))?;
        pairs.push((v, e));
    }
    reparametrize_by_limits(g, space, &pairs)
}

/// JSON form of the region: H-representation plus optional
/// V-representation, feasibility status and boundedness.
pub fn polytope_json(
    h: &HRep,
    v: Option<&VRep>,
    feas: &Feasibility,
    bounded: Option<&Boundedness>,
) -> serde_json::Value {
    let mut obj = serde_json::json!({
        "dim": h.dim,
        "H": h.ineqs,
        "status": if feas.is_feasible() { "feasible" } else { "empty" },
    });
    if let Feasibility::Feasible { point, slack } = feas {
        obj["point"] = serde_json::to_value(point).unwrap();
        obj["slack"] = match slack {
            Some(s) => serde_json::to_value(s).unwrap(),
            None => serde_json::Value::String("unbounded".into()),
        };
    }
    if let Some(v) = v {
        obj["V"] = serde_json::to_value(v).unwrap();
    }
    if let Some(b) = bounded {
        obj["bounded"] = serde_json::Value::Bool(matches!(b, Boundedness::Bounded));
        if let Boundedness::Unbounded { direction } = b {
            obj["unbounded_direction"] = serde_json::to_value(direction).unwrap();
        }
    }
    obj
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ineq(normal: &[i64], offset: i64) -> Ineq {
        Ineq {
            normal: normal.iter().map(|&x| Scalar::int(x)).collect(),
            offset: Scalar::int(offset),
            strict: true,
            label: None,
        }
    }

    #[test]
    fn interval_feasibility_and_vertices() {
        // t < 0 and -t - 1 < 0: the interval (-1, 0).
        let h = HRep {
            dim: 1,
            ineqs: vec![ineq(&[1], 0), ineq(&[-1], -1)],
        };
        let f = feasibility(&h);
        let Feasibility::Feasible { point, slack } = &f else {
            panic!("expected feasible");
        };
        assert_eq!(slack.clone().unwrap(), Scalar::ratio(1, 2));
        assert_eq!(point[0], Scalar::ratio(-1, 2));
        let v = enumerate_vertices(&h).unwrap();
        assert_eq!(v.vertices, vec![vec![Scalar::int(-1)], vec![Scalar::int(0)]]);
        assert!(v.rays.is_empty());
        assert!(matches!(boundedness(&h).unwrap(), Boundedness::Bounded));
    }

    #[test]
    fn empty_system() {
        // t < 0 and -t < -1 (t > 1): empty.
        let h = HRep {
            dim: 1,
            ineqs: vec![ineq(&[1], 0), ineq(&[-1], 1)],
        };
        assert!(!feasibility(&h).is_feasible());
    }

    #[test]
    fn open_boundary_is_empty_for_strict() {
        // t < 0 and -t < 0: only t = 0 in the closure, open set empty.
        let h = HRep {
            dim: 1,
            ineqs: vec![ineq(&[1], 0), ineq(&[-1], 0)],
        };
        assert!(!feasibility(&h).is_feasible());
    }

    #[test]
    fn unbounded_halfline() {
        // t < 0.
        let h = HRep {
            dim: 1,
            ineqs: vec![ineq(&[1], 0)],
        };
        let f = feasibility(&h);
        let Feasibility::Feasible { slack, .. } = &f else {
            panic!()
        };
        assert!(slack.is_none());
        match boundedness(&h).unwrap() {
            Boundedness::Unbounded { direction } => {
                assert_eq!(direction[0].sign(), Sign::Neg);
            }
            _ => panic!("expected unbounded"),
        }
        let v = enumerate_vertices(&h).unwrap();
        assert_eq!(v.vertices, vec![vec![Scalar::int(0)]]);
        assert_eq!(v.rays, vec![vec![Scalar::int(-1)]]);
    }

    #[test]
    fn zero_dimensional_system() {
        let feas_h = HRep {
            dim: 0,
            ineqs: vec![Ineq {
                normal: vec![],
                offset: Scalar::int(-1),
                strict: true,
                label: None,
            }],
        };
        assert!(feasibility(&feas_h).is_feasible());
        assert_eq!(enumerate_vertices(&feas_h).unwrap().vertices, vec![Vec::<Scalar>::new()]);
        let empty_h = HRep {
            dim: 0,
            ineqs: vec![Ineq {
                normal: vec![],
                offset: Scalar::int(1),
                strict: true,
                label: None,
            }],
        };
        assert!(!feasibility(&empty_h).is_feasible());
        assert!(enumerate_vertices(&empty_h).unwrap().vertices.is_empty());
    }

    #[test]
    fn square_vertices() {
        // -1 < t_i < 1 for i = 0, 1.
        let h = HRep {
            dim: 2,
            ineqs: vec![
                ineq(&[1, 0], -1),
                ineq(&[-1, 0], -1),
                ineq(&[0, 1], -1),
                ineq(&[0, -1], -1),
            ],
        };
        let v = enumerate_vertices(&h).unwrap();
        assert_eq!(v.vertices.len(), 4);
        assert!(v.rays.is_empty());
        assert!(matches!(boundedness(&h).unwrap(), Boundedness::Bounded));
    }
}
