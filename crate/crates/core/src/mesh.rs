//! Triangle meshes with a per-vertex scalar field, and extraction of the
//! measured Reeb graph of that field.
//!
//! Ties in the field are broken by vertex index (symbolic perturbation), so
//! every sweep sees an injective field. The sweep processes vertices in
//! increasing order while tracking the connected components of the level
//! set; each component in a slab between events contributes its exact
//! piecewise-quadratic sublevel area to the measure table of one graph edge.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, MeasuredReebGraph, SurfaceInfo, Vertex, VertexRole};
use crate::measure::{fit_log_coefficients, EdgeMeasure};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshVertex {
    pub id: String,
    pub xyz: [f64; 3],
    #[serde(rename = "F")]
    pub f: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<MeshVertex>,
    /// Consistently oriented after construction.
    pub triangles: Vec<[usize; 3]>,
    /// Sorted vertex pair -> incident triangles.
    edge_tris: BTreeMap<(usize, usize), Vec<usize>>,
    /// Boundary loops as cyclic vertex lists.
    boundary_loops: Vec<Vec<usize>>,
    areas: Vec<f64>,
    /// Field values of each triangle sorted ascending.
    tri_sorted: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshRole {
    Min,
    Max,
    Saddle,
    Regular,
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn triangle_area(p: &[f64; 3], q: &[f64; 3], r: &[f64; 3]) -> f64 {
    let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
    let v = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
    let c = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

impl Mesh {
    pub fn new(vertices: Vec<MeshVertex>, triangles: Vec<[usize; 3]>) -> Result<Mesh> {
        if vertices.is_empty() || triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh needs vertices and triangles".into()));
        }
        let mut ids = HashSet::new();
        for v in &vertices {
            if !ids.insert(&v.id) {
                return Err(Error::InvalidMesh(format!("duplicate vertex id {:?}", v.id)));
            }
            if !v.f.is_finite() {
                return Err(Error::InvalidMesh(format!("non-finite field at {:?}", v.id)));
            }
        }
        for (ti, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("triangle {ti} index out of range")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidMesh(format!("triangle {ti} repeats a vertex")));
            }
        }

        let mut mesh = Mesh {
            vertices,
            triangles,
            edge_tris: BTreeMap::new(),
            boundary_loops: vec![],
            areas: vec![],
            tri_sorted: vec![],
        };
        mesh.orient()?;
        mesh.build_derived()?;
        Ok(mesh)
    }

    /// Flip triangles until every interior edge is traversed in opposite
    /// directions by its two triangles.
    fn orient(&mut self) -> Result<()> {
        let mut edge_map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let e = sorted_pair(t[k], t[(k + 1) % 3]);
                edge_map.entry(e).or_default().push(ti);
            }
        }
        for (e, tris) in &edge_map {
            if tris.len() > 2 {
                return Err(Error::InvalidMesh(format!(
                    "non-manifold edge ({}, {}) with {} incident triangles",
                    self.vertices[e.0].id,
                    self.vertices[e.1].id,
                    tris.len()
                )));
            }
        }
        let dir = |t: &[usize; 3], a: usize, b: usize| -> bool {
            // true when the triangle traverses a -> b
            (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b)
        };
        let mut seen = vec![false; self.triangles.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(ti) = stack.pop() {
            let t = self.triangles[ti];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                for &tj in &edge_map[&sorted_pair(a, b)] {
                    if tj == ti {
                        continue;
                    }
                    let same = dir(&self.triangles[tj], a, b);
                    if !seen[tj] {
                        seen[tj] = true;
                        if same {
                            self.triangles[tj].swap(1, 2);
                        }
                        stack.push(tj);
                    } else if dir(&self.triangles[tj], a, b) == dir(&self.triangles[ti], a, b) {
                        return Err(Error::InvalidMesh("mesh is not orientable".into()));
                    }
                    let _ = same;
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidMesh("mesh is not connected".into()));
        }
        Ok(())
    }

    fn build_derived(&mut self) -> Result<()> {
        self.edge_tris.clear();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                self.edge_tris
                    .entry(sorted_pair(t[k], t[(k + 1) % 3]))
                    .or_default()
                    .push(ti);
            }
        }
        self.areas = self
            .triangles
            .iter()
            .map(|t| {
                triangle_area(
                    &self.vertices[t[0]].xyz,
                    &self.vertices[t[1]].xyz,
                    &self.vertices[t[2]].xyz,
                )
            })
            .collect();
        for (ti, &a) in self.areas.iter().enumerate() {
            if a <= 1e-14 {
                return Err(Error::InvalidMesh(format!("triangle {ti} has zero area")));
            }
        }
        self.tri_sorted = self
            .triangles
            .iter()
            .map(|t| {
                let mut fs = [
                    self.vertices[t[0]].f,
                    self.vertices[t[1]].f,
                    self.vertices[t[2]].f,
                ];
                fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                fs
            })
            .collect();

        // Chain boundary edges (single incident triangle) into loops.
        let mut succ: HashMap<usize, usize> = HashMap::new();
        for (&(a, b), tris) in &self.edge_tris {
            if tris.len() == 1 {
                // Boundary is traversed opposite to the triangle's direction.
                let t = &self.triangles[tris[0]];
                let fwd = (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b);
                let (from, to) = if fwd { (b, a) } else { (a, b) };
                if succ.insert(from, to).is_some() {
                    return Err(Error::InvalidMesh(format!(
                        "boundary is not a union of simple loops near {}",
                        self.vertices[from].id
                    )));
                }
            }
        }
        self.boundary_loops.clear();
        let mut remaining: HashSet<usize> = succ.keys().copied().collect();
        while let Some(&start) = remaining.iter().next() {
            let mut walk = vec![start];
            remaining.remove(&start);
            let mut v = succ[&start];
            while v != start {
                if !remaining.remove(&v) {
                    return Err(Error::InvalidMesh("boundary loops intersect".into()));
                }
                walk.push(v);
                v = succ[&v];
            }
            self.boundary_loops.push(walk);
        }

        // The field must be constant on each boundary loop.
        let range = {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for v in &self.vertices {
                lo = lo.min(v.f);
                hi = hi.max(v.f);
            }
            (hi - lo).max(1e-30)
        };
        for walk in &self.boundary_loops {
            let vals: Vec<f64> = walk.iter().map(|&v| self.vertices[v].f).collect();
            let (lo, hi) = vals
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                    (l.min(v), h.max(v))
                });
            if hi - lo > 1e-9 * range {
                return Err(Error::InvalidMesh(format!(
                    "field is not constant on the boundary loop through {} (spread {})",
                    self.vertices[walk[0]].id,
                    hi - lo
                )));
            }
        }
        Ok(())
    }

    /// Tie-broken comparison of field values.
    fn below(&self, a: usize, b: usize) -> bool {
        (self.vertices[a].f, a) < (self.vertices[b].f, b)
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_tris.len() as i64 + self.triangles.len() as i64
    }

    /// Genus from `chi = 2 - 2g - k`.
    pub fn genus(&self) -> Result<usize> {
        let g2 = 2 - self.euler_characteristic() - self.boundary_loops.len() as i64;
        if g2 < 0 || g2 % 2 != 0 {
            return Err(Error::InvalidMesh(format!(
                "Euler characteristic {} inconsistent with {} boundary loops",
                self.euler_characteristic(),
                self.boundary_loops.len()
            )));
        }
        Ok((g2 / 2) as usize)
    }

    /// Area of the part of a triangle with field value below `t`.
    fn sublevel_area(&self, ti: usize, t: f64) -> f64 {
        let [v0, v1, v2] = self.tri_sorted[ti];
        let a = self.areas[ti];
        if t <= v0 {
            0.0
        } else if t >= v2 {
            a
        } else if t < v1 {
            a * (t - v0) * (t - v0) / ((v1 - v0) * (v2 - v0))
        } else {
            a * (1.0 - (v2 - t) * (v2 - t) / ((v2 - v1) * (v2 - v0)))
        }
    }

    /// Cyclic (interior) or open (boundary) vertex ring around `v`,
    /// following the triangle orientation.
    fn link(&self, v: usize) -> Result<(Vec<usize>, bool)> {
        let mut next: HashMap<usize, usize> = HashMap::new();
        for t in &self.triangles {
            if let Some(k) = (0..3).find(|&k| t[k] == v) {
                next.insert(t[(k + 1) % 3], t[(k + 2) % 3]);
            }
        }
        if next.is_empty() {
            return Err(Error::InvalidMesh(format!(
                "isolated vertex {}",
                self.vertices[v].id
            )));
        }
        let sources: Vec<usize> = next
            .keys()
            .filter(|&&a| !next.values().any(|&b| b == a))
            .copied()
            .collect();
        let (start, closed) = match sources.len() {
            0 => (*next.keys().next().unwrap(), true),
            1 => (sources[0], false),
            _ => {
                return Err(Error::InvalidMesh(format!(
                    "non-manifold star at {}",
                    self.vertices[v].id
                )))
            }
        };
        let mut ring = vec![start];
        let mut cur = start;
        while let Some(&n) = next.get(&cur) {
            if n == start {
                break;
            }
            ring.push(n);
            if ring.len() > next.len() + 1 {
                return Err(Error::InvalidMesh(format!(
                    "non-manifold star at {}",
                    self.vertices[v].id
                )));
            }
            cur = n;
        }
        if closed && ring.len() != next.len() {
            return Err(Error::InvalidMesh(format!(
                "split star at {}",
                self.vertices[v].id
            )));
        }
        Ok((ring, closed))
    }

    /// Lower-link classification of interior vertices; boundary vertices map
    /// to `None`.
    pub fn classify_critical(&self) -> Result<Vec<Option<MeshRole>>> {
        let boundary: HashSet<usize> = self
            .boundary_loops
            .iter()
            .flat_map(|l| l.iter().copied())
            .collect();
        let mut roles = vec![None; self.vertices.len()];
        for v in 0..self.vertices.len() {
            if boundary.contains(&v) {
                continue;
            }
            let (ring, closed) = self.link(v)?;
            if !closed {
                return Err(Error::InvalidMesh(format!(
                    "interior vertex {} has an open link",
                    self.vertices[v].id
                )));
            }
            let below: Vec<bool> = ring.iter().map(|&w| self.below(w, v)).collect();
            let n = below.len();
            let mut lower = 0usize;
            let mut upper = 0usize;
            for i in 0..n {
                let prev = below[(i + n - 1) % n];
                if below[i] && !prev {
                    lower += 1;
                }
                if !below[i] && prev {
                    upper += 1;
                }
            }
            // Transition counts are run counts except for uniform links.
            let role = match (lower, upper) {
                (0, 0) if below[0] => MeshRole::Max,
                (0, 0) => MeshRole::Min,
                (1, 1) => MeshRole::Regular,
                (2, 2) => MeshRole::Saddle,
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "non-simple Morse vertex {}: {} lower-link components",
                        self.vertices[v].id, lower
                    )))
                }
            };
            roles[v] = Some(role);
        }
        Ok(roles)
    }
}

// ---------------------------------------------------------------------------
// Loading

#[derive(Deserialize)]
struct MeshJson {
    vertices: Vec<MeshVertex>,
    triangles: Vec<[usize; 3]>,
}

/// Load a mesh from OFF (field = z coordinate) or the JSON schema
/// `{"vertices":[{"id","xyz","F"}],"triangles":[[i,j,k]]}`.
pub fn load_mesh(path: &std::path::Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let raw: MeshJson = serde_json::from_str(&text)?;
        return Mesh::new(raw.vertices, raw.triangles);
    }
    parse_off(&text)
}

fn parse_off(text: &str) -> Result<Mesh> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .peekable();
    let header = tokens.next().ok_or_else(|| Error::InvalidMesh("empty OFF file".into()))?;
    if header != "OFF" {
        return Err(Error::InvalidMesh("missing OFF header".into()));
    }
    let mut next_num = |what: &str| -> Result<f64> {
        tokens
            .next()
            .ok_or_else(|| Error::InvalidMesh(format!("truncated OFF file at {what}")))?
            .parse::<f64>()
            .map_err(|_| Error::InvalidMesh(format!("bad number in OFF {what}")))
    };
    let nv = next_num("vertex count")? as usize;
    let nf = next_num("face count")? as usize;
    let _ne = next_num("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let x = next_num("vertex")?;
        let y = next_num("vertex")?;
        let z = next_num("vertex")?;
        vertices.push(MeshVertex {
            id: format!("v{i}"),
            xyz: [x, y, z],
            f: z,
        });
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let k = next_num("face size")? as usize;
        if k != 3 {
            return Err(Error::InvalidMesh("OFF faces must be triangles".into()));
        }
        let a = next_num("face")? as usize;
        let b = next_num("face")? as usize;
        let c = next_num("face")? as usize;
        triangles.push([a, b, c]);
    }
    Mesh::new(vertices, triangles)
}

// ---------------------------------------------------------------------------
// Reeb extraction

/// One extracted graph edge with its sweep data.
#[derive(Debug, Clone)]
pub struct ArcTrace {
    /// `(slab start level, representative crossing mesh edge)`; the entry
    /// covers levels from its start until the next entry's start.
    pub reps: Vec<(f64, (usize, usize))>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleEdgeFit {
    pub edge_id: String,
    /// Coefficient of `t ln|t|` in the cumulative measure from the saddle.
    pub kappa: f64,
    pub linear: f64,
    pub quadratic: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleFit {
    pub saddle_id: String,
    pub trunk: SaddleEdgeFit,
    pub branches: [SaddleEdgeFit; 2],
    /// `2 kappa_e / kappa_trunk` in trunk-first order; the local model
    /// predicts (2, -1, -1).
    pub ratios: [f64; 3],
}

#[derive(Debug)]
pub struct ExtractionResult {
    pub graph: MeasuredReebGraph,
    pub arcs: Vec<ArcTrace>,
    pub saddle_fits: Vec<SaddleFit>,
}

struct ArcState {
    tail: usize,
    cum: f64,
    samples: Vec<(f64, f64)>,
    reps: Vec<(f64, (usize, usize))>,
}

struct Sweep<'m> {
    mesh: &'m Mesh,
    /// Active crossing mesh edge -> union-find slot.
    active: HashMap<(usize, usize), usize>,
    parent: Vec<usize>,
    slot_arc: Vec<usize>,
    arcs: Vec<ArcState>,
    g_vertices: Vec<Vertex>,
    g_edges: Vec<(usize, usize, Vec<(f64, f64)>, Vec<(f64, (usize, usize))>)>,
    tri_stamp: Vec<u64>,
    stamp: u64,
}

impl<'m> Sweep<'m> {
    fn find(&mut self, mut s: usize) -> usize {
        while self.parent[s] != s {
            self.parent[s] = self.parent[self.parent[s]];
            s = self.parent[s];
        }
        s
    }

    fn new_slot(&mut self, arc: usize) -> usize {
        self.parent.push(self.parent.len());
        self.slot_arc.push(arc);
        self.parent.len() - 1
    }

    fn open_arc(&mut self, tail: usize, t: f64) -> usize {
        self.arcs.push(ArcState {
            tail,
            cum: 0.0,
            samples: vec![(t, 0.0)],
            reps: vec![],
        });
        self.arcs.len() - 1
    }

    fn close_arc(&mut self, arc: usize, head: usize, t: f64) -> Result<()> {
        let a = &mut self.arcs[arc];
        push_sample(&mut a.samples, t, a.cum);
        let tail_f = self.g_vertices[a.tail].height.to_f64();
        if !(tail_f < t) {
            return Err(Error::InvalidMesh(format!(
                "critical events share the level {t}; the field is not simple"
            )));
        }
        self.g_edges.push((
            a.tail,
            head,
            std::mem::take(&mut a.samples),
            std::mem::take(&mut a.reps),
        ));
        Ok(())
    }

    fn add_vertex(&mut self, role: VertexRole, t: f64) -> usize {
        let id = format!("n{}", self.g_vertices.len());
        self.g_vertices.push(Vertex {
            id,
            role,
            height: Scalar::real(t),
        });
        self.g_vertices.len() - 1
    }

    /// Attribute the slab `(t_prev, t)` area of every crossed triangle to
    /// the component owning it.
    fn accumulate(&mut self, t_prev: f64, t: f64) {
        if !(t > t_prev) {
            return;
        }
        self.stamp += 1;
        let edges: Vec<((usize, usize), usize)> =
            self.active.iter().map(|(&e, &s)| (e, s)).collect();
        for (e, slot) in edges {
            let root = self.find(slot);
            let arc = self.slot_arc[root];
            for &ti in &self.mesh.edge_tris[&e] {
                if self.tri_stamp[ti] == self.stamp {
                    continue;
                }
                self.tri_stamp[ti] = self.stamp;
                let da = self.mesh.sublevel_area(ti, t) - self.mesh.sublevel_area(ti, t_prev);
                self.arcs[arc].cum += da;
            }
        }
    }

    fn active_roots(&mut self) -> Vec<usize> {
        let slots: Vec<usize> = self.active.values().copied().collect();
        let mut roots: Vec<usize> = slots.into_iter().map(|s| self.find(s)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots
    }

    /// Other active edges sharing a triangle with `e`.
    fn active_neighbors(&self, e: (usize, usize)) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &ti in &self.mesh.edge_tris[&e] {
            let t = self.mesh.triangles[ti];
            for k in 0..3 {
                let other = sorted_pair(t[k], t[(k + 1) % 3]);
                if other != e && self.active.contains_key(&other) {
                    out.push(other);
                }
            }
        }
        out
    }

    fn flood_assign(&mut self, seed: (usize, usize), slot: usize) -> HashSet<(usize, usize)> {
        let mut visited = HashSet::new();
        let mut stack = vec![seed];
        visited.insert(seed);
        while let Some(e) = stack.pop() {
            self.active.insert(e, slot);
            for n in self.active_neighbors(e) {
                if visited.insert(n) {
                    stack.push(n);
                }
            }
        }
        visited
    }
}

fn push_sample(samples: &mut Vec<(f64, f64)>, t: f64, cum: f64) {
    if let Some(last) = samples.last_mut() {
        if last.0 >= t {
            last.1 = last.1.max(cum);
            return;
        }
    }
    samples.push((t, cum));
}

enum Event {
    Interior(usize),
    Loop(usize),
}

/// Sweep the mesh and extract the measured Reeb graph of its field.
pub fn extract_reeb(mesh: &Mesh) -> Result<ExtractionResult> {
    let roles = mesh.classify_critical()?;
    let in_loop: HashMap<usize, usize> = mesh
        .boundary_loops
        .iter()
        .enumerate()
        .flat_map(|(li, l)| l.iter().map(move |&v| (v, li)))
        .collect();

    let mut events: Vec<(f64, usize, Event)> = (0..mesh.vertices.len())
        .filter(|v| !in_loop.contains_key(v))
        .map(|v| (mesh.vertices[v].f, v, Event::Interior(v)))
        .collect();
    for (li, l) in mesh.boundary_loops.iter().enumerate() {
        let &anchor = l
            .iter()
            .min_by(|&&a, &&b| {
                (mesh.vertices[a].f, a)
                    .partial_cmp(&(mesh.vertices[b].f, b))
                    .unwrap()
            })
            .unwrap();
        events.push((mesh.vertices[anchor].f, anchor, Event::Loop(li)));
    }
    events.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());

    let mut sweep = Sweep {
        mesh,
        active: HashMap::new(),
        parent: vec![],
        slot_arc: vec![],
        arcs: vec![],
        g_vertices: vec![],
        g_edges: vec![],
        tri_stamp: vec![0; mesh.triangles.len()],
        stamp: 0,
    };
    let mut processed = vec![false; mesh.vertices.len()];
    let mut t_prev = f64::NEG_INFINITY;

    let neighbors = |v: usize| -> Vec<usize> {
        mesh.edge_tris
            .keys()
            .filter(move |&&(a, b)| a == v || b == v)
            .map(|&(a, b)| if a == v { b } else { a })
            .collect()
    };
    // Precomputing adjacency avoids a map scan per event.
    let mut adj: Vec<Vec<usize>> = vec![vec![]; mesh.vertices.len()];
    for &(a, b) in mesh.edge_tris.keys() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let _ = neighbors;

    for (t, _, ev) in events {
        if t_prev.is_finite() {
            sweep.accumulate(t_prev, t);
        }
        // Record the new cumulative value on every open component.
        for root in sweep.active_roots() {
            let arc = sweep.slot_arc[root];
            let (cum, samples) = {
                let a = &mut sweep.arcs[arc];
                (a.cum, &mut a.samples)
            };
            push_sample(samples, t, cum);
        }

        let group: Vec<usize> = match ev {
            Event::Interior(v) => vec![v],
            Event::Loop(li) => mesh.boundary_loops[li].clone(),
        };
        let group_set: HashSet<usize> = group.iter().copied().collect();

        let mut lower: Vec<(usize, usize)> = vec![];
        let mut upper: Vec<(usize, usize)> = vec![];
        for &v in &group {
            for &w in &adj[v] {
                if group_set.contains(&w) {
                    continue;
                }
                if processed[w] {
                    lower.push(sorted_pair(v, w));
                } else {
                    upper.push(sorted_pair(v, w));
                }
            }
        }
        for &v in &group {
            processed[v] = true;
        }

        let mut lower_roots: Vec<usize> = lower
            .iter()
            .map(|e| {
                let s = sweep.active[e];
                sweep.find(s)
            })
            .collect();
        lower_roots.sort_unstable();
        lower_roots.dedup();
        for e in &lower {
            sweep.active.remove(e);
        }

        match ev {
            Event::Loop(_) => {
                match (lower.is_empty(), upper.is_empty()) {
                    (true, false) => {
                        let gv = sweep.add_vertex(VertexRole::Boundary, t);
                        let arc = sweep.open_arc(gv, t);
                        let slot = sweep.new_slot(arc);
                        for e in upper.iter() {
                            sweep.active.insert(*e, slot);
                        }
                    }
                    (false, true) => {
                        if lower_roots.len() != 1 {
                            return Err(Error::InvalidMesh(format!(
                                "boundary loop at level {t} meets several contours"
                            )));
                        }
                        let gv = sweep.add_vertex(VertexRole::Boundary, t);
                        let arc = sweep.slot_arc[lower_roots[0]];
                        sweep.close_arc(arc, gv, t)?;
                    }
                    _ => {
                        return Err(Error::Unsupported(format!(
                            "boundary loop at level {t} is not an extremum of the field"
                        )))
                    }
                }
            }
            Event::Interior(v) => {
                let role = roles[v].expect("interior vertex was classified");
                match role {
                    MeshRole::Min => {
                        if !lower.is_empty() {
                            return Err(Error::InternalFault(format!(
                                "minimum {} has lower contours",
                                mesh.vertices[v].id
                            )));
                        }
                        let gv = sweep.add_vertex(VertexRole::Min, t);
                        let arc = sweep.open_arc(gv, t);
                        let slot = sweep.new_slot(arc);
                        for e in upper.iter() {
                            sweep.active.insert(*e, slot);
                        }
                    }
                    MeshRole::Max => {
                        if lower_roots.len() != 1 || !upper.is_empty() {
                            return Err(Error::InternalFault(format!(
                                "maximum {} closes {} contours",
                                mesh.vertices[v].id,
                                lower_roots.len()
                            )));
                        }
                        let gv = sweep.add_vertex(VertexRole::Max, t);
                        let arc = sweep.slot_arc[lower_roots[0]];
                        sweep.close_arc(arc, gv, t)?;
                    }
                    MeshRole::Regular => {
                        if lower_roots.len() != 1 {
                            return Err(Error::InvalidMesh(format!(
                                "non-simple configuration at level {t} (vertex {})",
                                mesh.vertices[v].id
                            )));
                        }
                        let slot = lower_roots[0];
                        for e in upper.iter() {
                            sweep.active.insert(*e, slot);
                        }
                    }
                    MeshRole::Saddle => {
                        let gv = sweep.add_vertex(VertexRole::Saddle, t);
                        match lower_roots.len() {
                            2 => {
                                sweep.close_arc(sweep.slot_arc[lower_roots[0]], gv, t)?;
                                sweep.close_arc(sweep.slot_arc[lower_roots[1]], gv, t)?;
                                let arc = sweep.open_arc(gv, t);
                                let slot = sweep.new_slot(arc);
                                sweep.parent[lower_roots[0]] = slot;
                                sweep.parent[lower_roots[1]] = slot;
                                for e in upper.iter() {
                                    sweep.active.insert(*e, slot);
                                }
                            }
                            1 => {
                                let old = lower_roots[0];
                                sweep.close_arc(sweep.slot_arc[old], gv, t)?;
                                for e in upper.iter() {
                                    sweep.active.insert(*e, old);
                                }
                                // The two upper-link wedges seed the two
                                // circles the contour splits into.
                                let (seed_a, seed_b) =
                                    split_seeds(mesh, v, &upper).ok_or_else(|| {
                                        Error::InternalFault(format!(
                                            "split saddle {} without two upper wedges",
                                            mesh.vertices[v].id
                                        ))
                                    })?;
                                let arc_a = sweep.open_arc(gv, t);
                                let slot_a = sweep.new_slot(arc_a);
                                let part_a = sweep.flood_assign(seed_a, slot_a);
                                if part_a.contains(&seed_b) {
                                    return Err(Error::InvalidMesh(format!(
                                        "contour fails to split at saddle {} (level {t})",
                                        mesh.vertices[v].id
                                    )));
                                }
                                let arc_b = sweep.open_arc(gv, t);
                                let slot_b = sweep.new_slot(arc_b);
                                let part_b = sweep.flood_assign(seed_b, slot_b);
                                // Everything of the old circle must land in
                                // one of the two parts.
                                let leftovers: Vec<(usize, usize)> = sweep
                                    .active
                                    .iter()
                                    .map(|(&e, &s)| (e, s))
                                    .collect::<Vec<_>>()
                                    .into_iter()
                                    .filter(|&(e, s)| {
                                        !part_a.contains(&e)
                                            && !part_b.contains(&e)
                                            && sweep.find(s) == sweep.find(old)
                                    })
                                    .map(|(e, _)| e)
                                    .collect();
                                if !leftovers.is_empty() {
                                    return Err(Error::InternalFault(format!(
                                        "split at saddle {} left {} unassigned contour edges",
                                        mesh.vertices[v].id,
                                        leftovers.len()
                                    )));
                                }
                            }
                            n => {
                                return Err(Error::InvalidMesh(format!(
                                    "saddle {} meets {} contours at level {t}",
                                    mesh.vertices[v].id, n
                                )))
                            }
                        }
                    }
                }
            }
        }

        // One representative crossing edge per open component.
        let mut rep_for_root: HashMap<usize, (usize, usize)> = HashMap::new();
        let snapshot: Vec<((usize, usize), usize)> =
            sweep.active.iter().map(|(&e, &s)| (e, s)).collect();
        for (e, s) in snapshot {
            let root = sweep.find(s);
            rep_for_root.entry(root).or_insert(e);
        }
        for (root, e) in rep_for_root {
            let arc = sweep.slot_arc[root];
            sweep.arcs[arc].reps.push((t, e));
        }

        t_prev = t;
    }

    if !sweep.active.is_empty() {
        return Err(Error::InternalFault("sweep ended with open contours".into()));
    }

    // Assemble the graph.
    let mut edges = Vec::with_capacity(sweep.g_edges.len());
    let mut arcs = Vec::with_capacity(sweep.g_edges.len());
    for (i, (tail, head, samples, reps)) in sweep.g_edges.into_iter().enumerate() {
        let f: Vec<Scalar> = samples.iter().map(|&(t, _)| Scalar::real(t)).collect();
        let cumulative: Vec<Scalar> = samples.iter().map(|&(_, c)| Scalar::real(c)).collect();
        edges.push(Edge {
            id: format!("e{i}"),
            tail,
            head,
            measure: Some(EdgeMeasure::Table { f, cumulative }),
        });
        arcs.push(ArcTrace { reps });
    }
    let genus = mesh.genus()?;
    let graph = MeasuredReebGraph {
        vertices: sweep.g_vertices,
        edges,
        surface: Some(SurfaceInfo {
            genus,
            boundary_components: mesh.boundary_loops.len(),
        }),
        coordinates: None,
    };
    graph.require_valid()?;

    let saddle_fits = saddle_log_fits(&graph)?;
    Ok(ExtractionResult {
        graph,
        arcs,
        saddle_fits,
    })
}

/// Pick one upper crossing edge per upper-link wedge of a split saddle.
fn split_seeds(
    mesh: &Mesh,
    v: usize,
    upper: &[(usize, usize)],
) -> Option<((usize, usize), (usize, usize))> {
    let (ring, _) = mesh.link(v).ok()?;
    let n = ring.len();
    let above: Vec<bool> = ring.iter().map(|&w| !mesh.below(w, v)).collect();
    let upper_set: HashSet<(usize, usize)> = upper.iter().copied().collect();
    let mut seeds: Vec<(usize, usize)> = vec![];
    for i in 0..n {
        let prev = above[(i + n - 1) % n];
        if above[i] && !prev {
            // First ring vertex of a wedge; its edge to v crosses the level.
            let e = sorted_pair(v, ring[i]);
            if upper_set.contains(&e) {
                seeds.push(e);
            }
        }
    }
    if seeds.len() == 2 {
        Some((seeds[0], seeds[1]))
    } else {
        None
    }
}

/// Fit `kappa t ln|t| + c t + d t^2` to the cumulative mass near each
/// saddle, per incident edge (trunk first).
pub fn saddle_log_fits(graph: &MeasuredReebGraph) -> Result<Vec<SaddleFit>> {
    let mut fits = Vec::new();
    for v in graph.saddles() {
        let (trunk, branches) = graph.trunk_and_branches(v)?;
        let fv = graph.vertices[v].height.to_f64();
        let fit_edge = |e: usize| -> Result<SaddleEdgeFit> {
            let m = graph.edge_measure(e)?;
            let EdgeMeasure::Table { f, cumulative } = m else {
                return Err(Error::Unsupported(
                    "saddle log fits need table measures".into(),
                ));
            };
            let at_head = graph.edges[e].head == v;
            let total = cumulative.last().unwrap().to_f64();
            let all: Vec<(f64, f64)> = f
                .iter()
                .zip(cumulative)
                .map(|(t, c)| {
                    let mass = if at_head {
                        total - c.to_f64()
                    } else {
                        c.to_f64()
                    };
                    (t.to_f64() - fv, mass)
                })
                .filter(|&(t, _)| t != 0.0)
                .collect();
            let span = all
                .iter()
                .fold(0.0f64, |m, &(t, _)| m.max(t.abs()))
                .max(1e-30);
            let mut frac = 0.25;
            let window = loop {
                let w: Vec<(f64, f64)> = all
                    .iter()
                    .copied()
                    .filter(|&(t, _)| t.abs() <= frac * span)
                    .collect();
                if w.len() >= 8 || frac >= 1.0 {
                    break w;
                }
                frac *= 2.0;
            };
            let (kappa, linear, quadratic) = fit_log_coefficients(&window)?;
            Ok(SaddleEdgeFit {
                edge_id: graph.edges[e].id.clone(),
                kappa,
                linear,
                quadratic,
                samples: window.len(),
            })
        };
        let trunk_fit = fit_edge(trunk)?;
        let b0 = fit_edge(branches[0])?;
        let b1 = fit_edge(branches[1])?;
        let ratios = [
            2.0,
            2.0 * b0.kappa / trunk_fit.kappa,
            2.0 * b1.kappa / trunk_fit.kappa,
        ];
        fits.push(SaddleFit {
            saddle_id: graph.vertices[v].id.clone(),
            trunk: trunk_fit,
            branches: [b0, b1],
            ratios,
        });
    }
    Ok(fits)
}

// ---------------------------------------------------------------------------
// Compatibility report

#[derive(Debug, Clone, Serialize)]
pub struct CompatEntry {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport {
    pub entries: Vec<CompatEntry>,
    pub pass: bool,
}

pub fn compatibility_check(
    graph: &MeasuredReebGraph,
    mesh: &Mesh,
    mass_rtol: f64,
) -> Result<CompatibilityReport> {
    let dims = graph.homology_dimensions()?;
    let genus = mesh.genus()?;
    let mut entries = vec![];
    entries.push(CompatEntry {
        name: "genus".into(),
        pass: dims.b1 == genus,
        detail: format!("graph cycles {} vs mesh genus {genus}", dims.b1),
    });
    entries.push(CompatEntry {
        name: "boundary".into(),
        pass: dims.boundary_count == mesh.boundary_loops.len(),
        detail: format!(
            "graph boundary vertices {} vs mesh loops {}",
            dims.boundary_count,
            mesh.boundary_loops.len()
        ),
    });
    let (mass, _) = graph.total_mass_and_weight()?;
    let area = mesh.total_area();
    let err = (mass.to_f64() - area).abs();
    entries.push(CompatEntry {
        name: "mass".into(),
        pass: err <= mass_rtol * area.max(1e-30),
        detail: format!("graph mass {} vs mesh area {area}", mass.to_f64()),
    });
    let pass = entries.iter().all(|e| e.pass);
    Ok(CompatibilityReport { entries, pass })
}

// ---------------------------------------------------------------------------
// Level-cycle integration of a discrete 1-form

#[derive(Debug, Clone)]
pub struct PushforwardResult {
    /// Per graph edge: `(level, integral over that level's cycle)`.
    pub profiles: Vec<Vec<(f64, f64)>>,
    /// Profile value nearest the head of each edge.
    pub head_limits: Vec<f64>,
    pub max_kirchhoff_residual: f64,
}

/// Integral of the Whitney interpolation of edge values over the straight
/// segment from barycentric `p` to `q` in a triangle with vertices `t` and
/// 1-form coefficients `c[k]` on the directed edges `t[k] -> t[k+1]`.
fn whitney_segment(p: [f64; 3], q: [f64; 3], c: [f64; 3]) -> f64 {
    let mut total = 0.0;
    for k in 0..3 {
        let (i, j) = (k, (k + 1) % 3);
        total += c[k] * ((p[i] + q[i]) * (q[j] - p[j]) - (p[j] + q[j]) * (q[i] - p[i])) / 2.0;
    }
    total
}

/// Integrate a discrete 1-form (`oneform(a, b)` antisymmetric) over level
/// cycles sampled along every graph edge, oriented as the boundary of the
/// smaller-value region.
pub fn pushforward_circulation(
    mesh: &Mesh,
    result: &ExtractionResult,
    oneform: &dyn Fn(usize, usize) -> f64,
    samples_per_edge: usize,
) -> Result<PushforwardResult> {
    let graph = &result.graph;
    let n = samples_per_edge.max(3);
    let mut profiles = Vec::with_capacity(graph.edges.len());
    let mut head_limits = Vec::with_capacity(graph.edges.len());

    for (ei, arc) in result.arcs.iter().enumerate() {
        let (_, hi) = graph.edge_span(ei);
        let hi = hi.to_f64();
        // Sample at midpoints of inter-event gaps: no mesh vertex value can
        // sit there, so every crossing is transversal.
        let mut stops: Vec<f64> = arc.reps.iter().map(|&(s, _)| s).collect();
        stops.push(hi);
        stops.dedup();
        let mut gaps: Vec<(f64, (usize, usize))> = Vec::new();
        for w in 0..stops.len() - 1 {
            if stops[w + 1] > stops[w] {
                let mid = 0.5 * (stops[w] + stops[w + 1]);
                let rep = arc
                    .reps
                    .iter()
                    .rev()
                    .find(|&&(start, _)| start <= stops[w])
                    .map(|&(_, e)| e)
                    .ok_or_else(|| {
                        Error::InternalFault(format!("no contour representative at level {mid}"))
                    })?;
                gaps.push((mid, rep));
            }
        }
        if gaps.is_empty() {
            return Err(Error::InternalFault(format!(
                "edge {} spans no sweep interval",
                graph.edges[ei].id
            )));
        }
        let picks: Vec<usize> = if gaps.len() <= n {
            (0..gaps.len()).collect()
        } else {
            (0..n).map(|k| k * (gaps.len() - 1) / (n - 1)).collect()
        };
        let mut prof = Vec::with_capacity(picks.len());
        for k in picks {
            let (t, rep) = gaps[k];
            let value = integrate_level_cycle(mesh, rep, t, oneform)?;
            prof.push((t, value));
        }
        head_limits.push(prof.last().unwrap().1);
        profiles.push(prof);
    }

    // Kirchhoff at saddles: the limit on the trunk side equals the sum of
    // the two branch limits.
    let mut max_res = 0.0f64;
    for v in graph.saddles() {
        let mut sum_in = 0.0;
        let mut sum_out = 0.0;
        let mut scale = 1.0f64;
        for e in graph.in_edges(v) {
            let val = profiles[e].last().unwrap().1;
            sum_in += val;
            scale = scale.max(val.abs());
        }
        for e in graph.out_edges(v) {
            let val = profiles[e][0].1;
            sum_out += val;
            scale = scale.max(val.abs());
        }
        max_res = max_res.max((sum_in - sum_out).abs() / scale);
    }

    Ok(PushforwardResult {
        profiles,
        head_limits,
        max_kirchhoff_residual: max_res,
    })
}

fn crossing_bary(mesh: &Mesh, tri: [usize; 3], edge: (usize, usize), t: f64) -> [f64; 3] {
    let (a, b) = edge;
    let (fa, fb) = (mesh.vertices[a].f, mesh.vertices[b].f);
    let s = (t - fa) / (fb - fa);
    let mut bary = [0.0; 3];
    for k in 0..3 {
        if tri[k] == a {
            bary[k] = 1.0 - s;
        } else if tri[k] == b {
            bary[k] = s;
        }
    }
    bary
}

/// Walk the level cycle through `seed` at level `t` and integrate the
/// 1-form, with the smaller-value region kept on the left.
fn integrate_level_cycle(
    mesh: &Mesh,
    seed: (usize, usize),
    t: f64,
    oneform: &dyn Fn(usize, usize) -> f64,
) -> Result<f64> {
    let crosses = |e: (usize, usize)| -> bool {
        let (fa, fb) = (mesh.vertices[e.0].f, mesh.vertices[e.1].f);
        (fa < t) != (fb < t)
    };
    if !crosses(seed) {
        return Err(Error::InternalFault(format!(
            "representative edge does not cross level {t}"
        )));
    }
    let mut visited_tris = HashSet::new();
    let mut stack = vec![seed];
    let mut seen = HashSet::new();
    seen.insert(seed);
    let mut total = 0.0;
    while let Some(e) = stack.pop() {
        for &ti in &mesh.edge_tris[&e] {
            if !visited_tris.insert(ti) {
                continue;
            }
            let tri = mesh.triangles[ti];
            let below: Vec<bool> = tri.iter().map(|&v| mesh.vertices[v].f < t).collect();
            let n_below = below.iter().filter(|&&b| b).count();
            if n_below == 0 || n_below == 3 {
                continue;
            }
            // With the smaller-value region on the left, the oriented
            // segment runs {m, succ(m)} -> {m, pred(m)} when the minority
            // vertex m lies below the level, and the reverse when above.
            let m = (0..3)
                .find(|&k| below[k] == (n_below == 1))
                .expect("minority vertex exists");
            let succ = sorted_pair(tri[m], tri[(m + 1) % 3]);
            let pred = sorted_pair(tri[m], tri[(m + 2) % 3]);
            let (e_in, e_out) = if n_below == 1 { (succ, pred) } else { (pred, succ) };
            let p = crossing_bary(mesh, tri, e_in, t);
            let q = crossing_bary(mesh, tri, e_out, t);
            let c = [
                oneform(tri[0], tri[1]),
                oneform(tri[1], tri[2]),
                oneform(tri[2], tri[0]),
            ];
            total += whitney_segment(p, q, c);
            for next in [e_in, e_out] {
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Built-in meshes

/// Regular octahedron with the vertical coordinate as the field.
pub fn octahedron_mesh() -> Mesh {
    let coords = [
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    let vertices = coords
        .iter()
        .enumerate()
        .map(|(i, &xyz)| MeshVertex {
            id: format!("v{i}"),
            xyz,
            f: xyz[2],
        })
        .collect();
    let triangles = vec![
        [0, 2, 1],
        [0, 3, 2],
        [0, 4, 3],
        [0, 1, 4],
        [5, 1, 2],
        [5, 2, 3],
        [5, 3, 4],
        [5, 4, 1],
    ];
    Mesh::new(vertices, triangles).expect("octahedron is a valid mesh")
}

/// Standard torus (radii 2 and 1) with its axis horizontal, so one
/// coordinate of the embedding is a simple Morse function with critical
/// values -3, -1, 1, 3. Vertex `(i, j)` sits at big angle `2 pi i / n` and
/// small angle `2 pi j / m`.
pub fn torus_mesh(n: usize, m: usize) -> Mesh {
    let (big_r, small_r) = (2.0, 1.0);
    let mut vertices = Vec::with_capacity(n * m);
    for i in 0..n {
        let psi = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        for j in 0..m {
            let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            let ring = big_r + small_r * th.cos();
            let xyz = [ring * psi.cos(), ring * psi.sin(), small_r * th.sin()];
            vertices.push(MeshVertex {
                id: format!("t{i}_{j}"),
                xyz,
                f: xyz[1],
            });
        }
    }
    let idx = |i: usize, j: usize| (i % n) * m + (j % m);
    let mut triangles = Vec::with_capacity(2 * n * m);
    for i in 0..n {
        for j in 0..m {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Mesh::new(vertices, triangles).expect("torus grid is a valid mesh")
}

/// Small-angle index of a torus mesh vertex, for building test 1-forms.
pub fn torus_small_angle(m: usize, v: usize) -> usize {
    v % m
}

/// Discrete 1-form of the small-angle coordinate on `torus_mesh(n, m)`:
/// the wrapped angle difference along each directed edge.
pub fn torus_dtheta(m: usize) -> impl Fn(usize, usize) -> f64 {
    move |a: usize, b: usize| {
        let ja = (a % m) as f64;
        let jb = (b % m) as f64;
        let mut d = (jb - ja) / m as f64;
        if d > 0.5 {
            d -= 1.0;
        }
        if d < -0.5 {
            d += 1.0;
        }
        2.0 * std::f64::consts::PI * d
    }
}

/// Triangulated disk: a cone from a center vertex at field value 0 to a
/// constant-field boundary ring at value 1.
pub fn cone_disk_mesh(n: usize) -> Mesh {
    let n = n.max(3);
    let mut vertices = vec![MeshVertex {
        id: "c".into(),
        xyz: [0.0, 0.0, 0.0],
        f: 0.0,
    }];
    for j in 0..n {
        let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        vertices.push(MeshVertex {
            id: format!("r{j}"),
            xyz: [th.cos(), th.sin(), 1.0],
            f: 1.0,
        });
    }
    let mut triangles = Vec::with_capacity(n);
    for j in 0..n {
        triangles.push([0, 1 + j, 1 + (j + 1) % n]);
    }
    Mesh::new(vertices, triangles).expect("cone disk is a valid mesh")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octahedron_classifies_and_extracts() {
        let mesh = octahedron_mesh();
        assert_eq!(mesh.euler_characteristic(), 2);
        assert_eq!(mesh.genus().unwrap(), 0);
        let roles = mesh.classify_critical().unwrap();
        let count = |r: MeshRole| roles.iter().filter(|&&x| x == Some(r)).count();
        assert_eq!(count(MeshRole::Min), 1);
        assert_eq!(count(MeshRole::Max), 1);
        assert_eq!(count(MeshRole::Saddle), 0);
        assert_eq!(count(MeshRole::Regular), 4);

        let res = extract_reeb(&mesh).unwrap();
        assert_eq!(res.graph.vertices.len(), 2);
        assert_eq!(res.graph.edges.len(), 1);
        let (mass, _) = res.graph.total_mass_and_weight().unwrap();
        assert!((mass.to_f64() - mesh.total_area()).abs() < 1e-9);
        let report = compatibility_check(&res.graph, &mesh, 1e-6).unwrap();
        assert!(report.pass, "{:?}", report.entries);
    }

    #[test]
    fn torus_extraction_matches_expected_shape() {
        let mesh = torus_mesh(24, 24);
        assert_eq!(mesh.euler_characteristic(), 0);
        let roles = mesh.classify_critical().unwrap();
        let count = |r: MeshRole| roles.iter().filter(|&&x| x == Some(r)).count();
        assert_eq!(count(MeshRole::Min), 1, "minima");
        assert_eq!(count(MeshRole::Max), 1, "maxima");
        assert_eq!(count(MeshRole::Saddle), 2, "saddles");

        let res = extract_reeb(&mesh).unwrap();
        let dims = res.graph.homology_dimensions().unwrap();
        assert_eq!(dims.b1, 1);
        assert_eq!(res.graph.edges.len(), 4);
        let (mass, _) = res.graph.total_mass_and_weight().unwrap();
        assert!(
            (mass.to_f64() - mesh.total_area()).abs() < 1e-9 * mesh.total_area(),
            "mass {} area {}",
            mass.to_f64(),
            mesh.total_area()
        );
        assert_eq!(res.saddle_fits.len(), 2);
    }

    #[test]
    fn torus_dtheta_pushforward() {
        let (n, m) = (24, 24);
        let mesh = torus_mesh(n, m);
        let res = extract_reeb(&mesh).unwrap();
        let form = torus_dtheta(m);
        let push = pushforward_circulation(&mesh, &res, &form, 6).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        // Trunk edges carry contractible levels (integral 0); the double
        // edge carries opposite meridians (integrals +-2 pi).
        let mut zero = 0;
        let mut pos = 0;
        let mut neg = 0;
        for (ei, prof) in push.profiles.iter().enumerate() {
            let vals: Vec<f64> = prof.iter().map(|&(_, v)| v).collect();
            let spread = vals.iter().fold(0.0f64, |s, v| {
                s.max((v - vals[0]).abs())
            });
            assert!(spread < 1e-9, "edge {ei} profile not constant: {vals:?}");
            if vals[0].abs() < 1e-9 {
                zero += 1;
            } else if (vals[0] - two_pi).abs() < 1e-9 {
                pos += 1;
            } else if (vals[0] + two_pi).abs() < 1e-9 {
                neg += 1;
            }
        }
        assert_eq!((zero, pos, neg), (2, 1, 1));
        assert!(push.max_kirchhoff_residual < 1e-9);
    }

    #[test]
    fn exact_form_integrates_to_zero() {
        let mesh = torus_mesh(16, 16);
        let res = extract_reeb(&mesh).unwrap();
        // Discrete gradient of x.
        let xs: Vec<f64> = mesh.vertices.iter().map(|v| v.xyz[0]).collect();
        let form = move |a: usize, b: usize| xs[b] - xs[a];
        let push = pushforward_circulation(&mesh, &res, &form, 5).unwrap();
        for prof in &push.profiles {
            for &(_, v) in prof {
                assert!(v.abs() < 1e-9, "exact form gave {v}");
            }
        }
    }

    #[test]
    fn cone_disk_has_boundary_vertex() {
        let mesh = cone_disk_mesh(12);
        assert_eq!(mesh.boundary_loops().len(), 1);
        assert_eq!(mesh.genus().unwrap(), 0);
        let res = extract_reeb(&mesh).unwrap();
        assert_eq!(res.graph.vertices.len(), 2);
        let roles: Vec<VertexRole> = res.graph.vertices.iter().map(|v| v.role).collect();
        assert!(roles.contains(&VertexRole::Min));
        assert!(roles.contains(&VertexRole::Boundary));
        let report = compatibility_check(&res.graph, &mesh, 1e-6).unwrap();
        assert!(report.pass, "{:?}", report.entries);
    }

    #[test]
    fn dangling_triangle_rejected() {
        // Two triangles sharing only a vertex: the star at the shared vertex
        // is not a disk.
        let vertices: Vec<MeshVertex> = (0..5)
            .map(|i| MeshVertex {
                id: format!("v{i}"),
                xyz: [i as f64, (i * i) as f64, 0.0],
                f: i as f64,
            })
            .collect();
        let r = Mesh::new(vertices, vec![[0, 1, 2], [2, 3, 4]]);
        let r = r.and_then(|m| m.classify_critical().map(|_| ()));
        assert!(r.is_err());
    }

    #[test]
    fn nonmanifold_edge_rejected() {
        let vertices: Vec<MeshVertex> = (0..5)
            .map(|i| MeshVertex {
                id: format!("v{i}"),
                xyz: [i as f64, 1.0, 2.0],
                f: i as f64,
            })
            .collect();
        let r = Mesh::new(vertices, vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]]);
        assert!(matches!(r, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn off_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("oct.off");
        let mesh = octahedron_mesh();
        let mut text = String::from("OFF\n6 8 0\n");
        for v in &mesh.vertices {
            text.push_str(&format!("{} {} {}\n", v.xyz[0], v.xyz[1], v.xyz[2]));
        }
        for t in &mesh.triangles {
            text.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
        }
        std::fs::write(&path, text).unwrap();
        let loaded = load_mesh(&path).unwrap();
        assert_eq!(loaded.vertices.len(), 6);
        assert_eq!(loaded.triangles.len(), 8);
        let res = extract_reeb(&loaded).unwrap();
        assert_eq!(res.graph.edges.len(), 1);
    }
}
