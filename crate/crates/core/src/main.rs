//! Command-line surface over the library.
//!
//! Subcommands: validate, circulation-space, check-steady, polytope,
//! casimirs, orbit-equiv, verify-triple, certificate, reeb-extract.
//!
//! Exit codes: 0 = success / admits a steady flow; 2 = decisively negative
//! answer (empty polytope, unbalanced, distinct orbits, invalid graph);
//! 3 = invalid input; 4 = tolerance or internal-consistency failure;
//! 64 = usage error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use reeb_steady::casimir::{moment_table, orbit_equivalent, OrbitVerdict};
use reeb_steady::certificate::{build_certificate, CertificateOutcome};
use reeb_steady::circulation::{solve_circulation_space, CirculationFunction, CirculationSolution};
use reeb_steady::graph::MeasuredReebGraph;
use reeb_steady::measure::EdgeMeasure;
use reeb_steady::mesh::{compatibility_check, extract_reeb, load_mesh};
use reeb_steady::poly::Poly;
use reeb_steady::polytope::{
    balanced_regions, boundedness, enumerate_vertices, feasibility, negative_system,
    polytope_json, preferred_space, Feasibility, HRep,
};
use reeb_steady::steady::{
    cylinder_triple, elliptic_triple, hyperbolic_triple, verify_triple, SteadyTriple, Tolerances,
};
use reeb_steady::{Error, Scalar, Sign};

const EXIT_OK: i32 = 0;
const EXIT_NEGATIVE: i32 = 2;
const EXIT_INVALID: i32 = 3;
const EXIT_TOLERANCE: i32 = 4;
const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(
    name = "reeb-steady",
    version,
    about = "Steady Euler flow admissibility for measured Reeb graphs"
)]
struct Cli {
    /// Arithmetic mode: float demotes every input scalar to f64; exact
    /// keeps rationals as given (operations that need exactness fail on
    /// float data).
    #[arg(long, value_enum, default_value_t = Arith::Exact, global = true)]
    arith: Arith,

    /// Sign-decision tolerance for floating-point quantities.
    #[arg(long, default_value_t = reeb_steady::SIGN_TOL, global = true)]
    tol: f64,

    /// Highest moment order for moment tables and orbit comparison.
    #[arg(long, default_value_t = 10, global = true)]
    order: u32,

    /// Also write the main JSON report (or extracted graph) to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for generator-backed workflows; accepted everywhere for script
    /// compatibility, the commands here are deterministic.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Arith {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum Chart {
    Cylinder,
    Elliptic,
    Hyperbolic,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the structural invariants of a measured Reeb graph file.
    Validate { graph: PathBuf },

    /// Solve for the affine space of circulation functions.
    CirculationSpace { graph: PathBuf },

    /// Decide whether the configuration admits a steady flow.
    CheckSteady {
        graph: PathBuf,
        /// Override the edge weights (comma list in edge-id order;
        /// integers, rationals "p/q" or floats).
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
    },

    /// Emit the region of totally negative circulations.
    Polytope {
        graph: PathBuf,
        /// Also enumerate vertices and extreme rays (exact data, dim <= 6).
        #[arg(long)]
        vertices: bool,
        /// Override the edge weights (comma list in edge-id order).
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
    },

    /// Per-edge moment table (generalized enstrophies).
    Casimirs {
        graph: PathBuf,
        /// Emit CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },

    /// Compare two (graph, circulation) pairs up to orbit equivalence.
    OrbitEquiv {
        graph1: PathBuf,
        circulation1: PathBuf,
        graph2: PathBuf,
        circulation2: PathBuf,
    },

    /// Verify the defining identities of a steady triple on a grid.
    VerifyTriple {
        #[arg(long, value_enum)]
        chart: Chart,
        /// Vorticity profile as a polynomial in s, e.g. "1+s" or "2-s^2/4".
        #[arg(long)]
        zeta: String,
        /// Circulation constant (cylinder and hyperbolic charts).
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        c: f64,
        /// Branch sign for the hyperbolic chart; defaults to sign(c).
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<i8>,
        /// Grid resolution per axis.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Chart domain: "lo,hi" for cylinder; the upper value is s_max for
        /// elliptic and the half-width for hyperbolic charts.
        #[arg(long, allow_hyphen_values = true)]
        s_range: Option<String>,
    },

    /// Produce a sign-coboundary certificate or refute it with a cycle.
    Certificate {
        graph: PathBuf,
        circulation: PathBuf,
    },

    /// Extract a measured Reeb graph from a triangulated mesh (.off or
    /// .json); --out receives the graph, --diagnostics the saddle fits.
    ReebExtract {
        mesh: PathBuf,
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code_of(&e));
        }
    }
}

fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::ToleranceFailure(_) | Error::InternalFault(_) => EXIT_TOLERANCE,
        _ => EXIT_INVALID,
    }
}

fn run(cli: &Cli) -> Result<i32, Error> {
    match &cli.cmd {
        Cmd::Validate { graph } => cmd_validate(cli, graph),
        Cmd::CirculationSpace { graph } => cmd_circulation_space(cli, graph),
        Cmd::CheckSteady { graph, a } => cmd_check_steady(cli, graph, a.as_deref()),
        Cmd::Polytope { graph, vertices, a } => cmd_polytope(cli, graph, *vertices, a.as_deref()),
        Cmd::Casimirs { graph, csv } => cmd_casimirs(cli, graph, *csv),
        Cmd::OrbitEquiv {
            graph1,
            circulation1,
            graph2,
            circulation2,
        } => cmd_orbit_equiv(cli, graph1, circulation1, graph2, circulation2),
        Cmd::VerifyTriple {
            chart,
            zeta,
            c,
            eps,
            grid,
            s_range,
        } => cmd_verify_triple(cli, *chart, zeta, *c, *eps, *grid, s_range.as_deref()),
        Cmd::Certificate { graph, circulation } => cmd_certificate(cli, graph, circulation),
        Cmd::ReebExtract { mesh, diagnostics } => {
            cmd_reeb_extract(cli, mesh, diagnostics.as_deref())
        }
    }
}

// ---------------------------------------------------------------------------
// Input plumbing

fn load_graph(cli: &Cli, path: &Path) -> Result<MeasuredReebGraph, Error> {
    let text = fs::read_to_string(path)?;
    let mut g: MeasuredReebGraph = serde_json::from_str(&text)?;
    if cli.arith == Arith::Float {
        demote_graph(&mut g);
    }
    Ok(g)
}

fn load_json(path: &Path) -> Result<Value, Error> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn demote_scalar(s: &mut Scalar) {
    *s = Scalar::real(s.to_f64());
}

fn demote_poly(p: &mut Poly) {
    for c in &mut p.0 {
        demote_scalar(c);
    }
}

fn demote_graph(g: &mut MeasuredReebGraph) {
    for v in &mut g.vertices {
        demote_scalar(&mut v.height);
    }
    for e in &mut g.edges {
        match &mut e.measure {
            Some(EdgeMeasure::PolyLog {
                poly,
                log_terms,
                bumps,
            }) => {
                demote_poly(poly);
                for t in log_terms {
                    demote_scalar(&mut t.coef);
                }
                for b in bumps {
                    demote_poly(&mut b.poly);
                    demote_scalar(&mut b.lo);
                    demote_scalar(&mut b.hi);
                }
            }
            Some(EdgeMeasure::Table { f, cumulative }) => {
                for x in f.iter_mut().chain(cumulative.iter_mut()) {
                    demote_scalar(x);
                }
            }
            None => {}
        }
    }
}

fn parse_scalar(tok: &str) -> Result<Scalar, Error> {
    let tok = tok.trim();
    if let Some((p, q)) = tok.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad rational {tok:?}")))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad rational {tok:?}")))?;
        if q == 0 {
            return Err(Error::InvalidInput(format!("zero denominator in {tok:?}")));
        }
        return Ok(Scalar::ratio(p, q));
    }
    if let Ok(n) = tok.parse::<i64>() {
        return Ok(Scalar::int(n));
    }
    tok.parse::<f64>()
        .map(Scalar::real)
        .map_err(|_| Error::InvalidInput(format!("bad number {tok:?}")))
}

/// Parse a comma list of weights and place them in edge-index order,
/// matching the list to edges sorted by id.
fn parse_weight_override(g: &MeasuredReebGraph, list: &str) -> Result<Vec<Scalar>, Error> {
    let vals: Vec<Scalar> = list
        .split(',')
        .map(parse_scalar)
        .collect::<Result<_, _>>()?;
    if vals.len() != g.edges.len() {
        return Err(Error::InvalidInput(format!(
            "weight override has {} entries for {} edges",
            vals.len(),
            g.edges.len()
        )));
    }
    let mut by_id: Vec<usize> = (0..g.edges.len()).collect();
    by_id.sort_by(|&a, &b| g.edges[a].id.cmp(&g.edges[b].id));
    let mut out = vec![Scalar::zero(); g.edges.len()];
    for (v, e) in vals.into_iter().zip(by_id) {
        out[e] = v;
    }
    Ok(out)
}

fn graph_weights(
    cli: &Cli,
    g: &MeasuredReebGraph,
    a: Option<&str>,
) -> Result<Vec<Scalar>, Error> {
    match a {
        Some(list) => parse_weight_override(g, list),
        None => g.edge_weights(),
    }
    .map(|mut w| {
        if cli.arith == Arith::Float {
            for x in &mut w {
                demote_scalar(x);
            }
        }
        w
    })
}

fn weights_map(g: &MeasuredReebGraph, w: &[Scalar]) -> Value {
    let mut m = serde_json::Map::new();
    let mut by_id: Vec<usize> = (0..g.edges.len()).collect();
    by_id.sort_by(|&a, &b| g.edges[a].id.cmp(&g.edges[b].id));
    for e in by_id {
        m.insert(g.edges[e].id.clone(), serde_json::to_value(&w[e]).unwrap());
    }
    Value::Object(m)
}

fn emit(cli: &Cli, report: &Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(report).unwrap();
    println!("{text}");
    if let Some(path) = &cli.out {
        fs::write(path, text + "\n")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcommands

fn cmd_validate(cli: &Cli, path: &Path) -> Result<i32, Error> {
    let g = load_graph(cli, path)?;
    let report = g.validate();
    let mut out = json!({
        "command": "validate",
        "valid": report.is_valid(),
        "violations": report.violations,
        "vertices": g.vertices.len(),
        "edges": g.edges.len(),
    });
    if report.is_valid() {
        let dims = g.homology_dimensions()?;
        let (mass, weight) = g.total_mass_and_weight()?;
        out["homology"] = json!({
            "cycles": dims.b1,
            "boundary": dims.boundary_count,
            "circulation_dim": dims.circulation_dim,
        });
        out["total_mass"] = serde_json::to_value(&mass).unwrap();
        out["total_weight"] = serde_json::to_value(&weight).unwrap();
    }
    emit(cli, &out)?;
    Ok(if report.is_valid() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_circulation_space(cli: &Cli, path: &Path) -> Result<i32, Error> {
    let g = load_graph(cli, path)?;
    let weights = graph_weights(cli, &g, None)?;
    match solve_circulation_space(&g, &weights)? {
        CirculationSolution::Space(space) => {
            let out = json!({
                "command": "circulation-space",
                "status": "space",
                "weights": weights_map(&g, &weights),
                "space": space.to_json(&g),
            });
            emit(cli, &out)?;
            Ok(EXIT_OK)
        }
        CirculationSolution::None { residual } => {
            let out = json!({
                "command": "circulation-space",
                "status": "none",
                "detail": "nonzero total weight on a closed graph",
                "residual": residual,
            });
            emit(cli, &out)?;
            Ok(EXIT_NEGATIVE)
        }
    }
}

/// Closed-interval extraction for 1-dimensional exact systems.
fn interval_of(h: &HRep) -> Option<(Scalar, Scalar)> {
    if h.dim != 1 {
        return None;
    }
    let v = enumerate_vertices(h).ok()?;
    if v.vertices.len() == 2 && v.rays.is_empty() {
        Some((v.vertices[0][0].clone(), v.vertices[1][0].clone()))
    } else {
        None
    }
}

fn cmd_check_steady(cli: &Cli, path: &Path, a: Option<&str>) -> Result<i32, Error> {
    let g = load_graph(cli, path)?;
    g.require_valid()?;
    let weights = graph_weights(cli, &g, a)?;
    let space = match solve_circulation_space(&g, &weights)? {
        CirculationSolution::Space(s) => s,
        CirculationSolution::None { residual } => {
            let out = json!({
                "command": "check-steady",
                "admits_steady": false,
                "status": "no circulation functions",
                "residual": residual,
            });
            emit(cli, &out)?;
            return Ok(EXIT_NEGATIVE);
        }
    };
    let space = preferred_space(&g, &space)?;
    let mut out = json!({
        "command": "check-steady",
        "closed": g.is_closed(),
        "dim": space.dim(),
        "weights": weights_map(&g, &weights),
    });
    let admits;
    if g.is_closed() {
        // Closed surfaces: steady iff some circulation is totally negative.
        let h = negative_system(&g, &space)?;
        let feas = feasibility(&h);
        admits = feas.is_feasible();
        let bounded = if admits { Some(boundedness(&h)?) } else { None };
        let vrep = if admits { enumerate_vertices(&h).ok() } else { None };
        if let Some((lo, hi)) = vrep.as_ref().and_then(|_| interval_of(&h)) {
            out["interval"] = json!([lo, hi]);
        }
        out["polytope"] = polytope_json(&h, vrep.as_ref(), &feas, bounded.as_ref());
        out["status"] = Value::String(if admits {
            "admits steady flow".into()
        } else {
            "empty polytope".into()
        });
    } else {
        // Bordered surfaces: steady iff some per-saddle sign pattern is
        // realizable by a circulation.
        let regions = balanced_regions(&g, &space)?;
        let mut patterns = Vec::new();
        let mut any = false;
        for r in &regions {
            let feasible = r.feasibility.is_feasible();
            any = any || feasible;
            let mut entry = json!({
                "pattern": r
                    .pattern
                    .iter()
                    .map(|(s, sg)| json!([s, if *sg == Sign::Pos { "+" } else { "-" }]))
                    .collect::<Vec<_>>(),
                "status": if feasible { "feasible" } else { "empty" },
            });
            if let Feasibility::Feasible { point, .. } = &r.feasibility {
                entry["point"] = serde_json::to_value(point).unwrap();
            }
            patterns.push(entry);
        }
        admits = any;
        out["patterns"] = Value::Array(patterns);
        out["status"] = Value::String(if admits {
            "admits steady flow".into()
        } else {
            "no balanced sign pattern".into()
        });
    }
    out["admits_steady"] = Value::Bool(admits);
    emit(cli, &out)?;
    Ok(if admits { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_polytope(cli: &Cli, path: &Path, vertices: bool, a: Option<&str>) -> Result<i32, Error> {
    let g = load_graph(cli, path)?;
    g.require_valid()?;
    let weights = graph_weights(cli, &g, a)?;
    let space = match solve_circulation_space(&g, &weights)? {
        CirculationSolution::Space(s) => s,
        CirculationSolution::None { .. } => {
            return Err(Error::InvalidInput(
                "graph admits no circulation functions (nonzero total weight)".into(),
            ))
        }
    };
    let space = preferred_space(&g, &space)?;
    let h = negative_system(&g, &space)?;
    let feas = feasibility(&h);
    let bounded = boundedness(&h)?;
    let vrep = if vertices {
        Some(enumerate_vertices(&h)?)
    } else {
        None
    };
    let out = polytope_json(&h, vrep.as_ref(), &feas, Some(&bounded));
    emit(cli, &out)?;
    Ok(if feas.is_feasible() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_casimirs(cli: &Cli, path: &Path, csv: bool) -> Result<i32, Error> {
    let g = load_graph(cli, path)?;
    let table = moment_table(&g, cli.order)?;
    if csv {
        let text = table.to_csv();
        print!("{text}");
        if let Some(path) = &cli.out {
            fs::write(path, text)?;
        }
    } else {
        emit(cli, &serde_json::to_value(&table).unwrap())?;
    }
    Ok(EXIT_OK)
}

fn cmd_orbit_equiv(
    cli: &Cli,
    g1_path: &Path,
    c1_path: &Path,
    g2_path: &Path,
    c2_path: &Path,
) -> Result<i32, Error> {
    let g1 = load_graph(cli, g1_path)?;
    let g2 = load_graph(cli, g2_path)?;
    let c1 = CirculationFunction::from_json(&load_json(c1_path)?, &g1, g1.edge_weights()?)?;
    let c2 = CirculationFunction::from_json(&load_json(c2_path)?, &g2, g2.edge_weights()?)?;
    match orbit_equivalent(&g1, &c1, &g2, &c2, cli.order, cli.tol)? {
        OrbitVerdict::Equivalent {
            vertex_map,
            edge_map,
        } => {
            let out = json!({
                "command": "orbit-equiv",
                "verdict": "equivalent",
                "vertex_map": vertex_map,
                "edge_map": edge_map,
            });
            emit(cli, &out)?;
            Ok(EXIT_OK)
        }
        OrbitVerdict::Distinct { witness } => {
            let out = json!({
                "command": "orbit-equiv",
                "verdict": "distinct",
                "witness": witness,
            });
            emit(cli, &out)?;
            Ok(EXIT_NEGATIVE)
        }
    }
}

/// Parse a polynomial in `s`, e.g. "1+s", "2-s^2", "0.5*s^3-s".
fn parse_poly(text: &str) -> Result<Vec<f64>, Error> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::InvalidInput("empty polynomial".into()));
    }
    // Split into signed terms.
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, ch) in compact.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !cur.is_empty() {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut coeffs: Vec<f64> = Vec::new();
    for term in terms {
        let bad = || Error::InvalidInput(format!("bad polynomial term {term:?}"));
        let (coef_text, power) = match term.find('s') {
            None => (term.as_str(), 0usize),
            Some(k) => {
                let rest = &term[k + 1..];
                let power = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .and_then(|p| p.parse::<usize>().ok())
                        .ok_or_else(bad)?
                };
                (term[..k].trim_end_matches('*'), power)
            }
        };
        let coef = match coef_text {
            "" | "+" => 1.0,
            "-" => -1.0,
            t => t.parse::<f64>().map_err(|_| bad())?,
        };
        if coeffs.len() <= power {
            coeffs.resize(power + 1, 0.0);
        }
        coeffs[power] += coef;
    }
    Ok(coeffs)
}

fn parse_range(text: &str) -> Result<(f64, f64), Error> {
    let bad = || Error::InvalidInput(format!("bad range {text:?}, want \"lo,hi\""));
    let (lo, hi) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn cmd_verify_triple(
    cli: &Cli,
    chart: Chart,
    zeta: &str,
    c: f64,
    eps: Option<i8>,
    grid: usize,
    s_range: Option<&str>,
) -> Result<i32, Error> {
    let zeta = parse_poly(zeta)?;
    let triple: SteadyTriple = match chart {
        Chart::Cylinder => {
            let range = s_range.map(parse_range).transpose()?.unwrap_or((0.5, 1.5));
            cylinder_triple(&zeta, c, range)?
        }
        Chart::Elliptic => {
            let s_max = s_range.map(parse_range).transpose()?.map_or(1.0, |r| r.1);
            elliptic_triple(&zeta, s_max)?
        }
        Chart::Hyperbolic => {
            let eps = eps.unwrap_or(if c < 0.0 { -1 } else { 1 });
            let half = s_range.map(parse_range).transpose()?.map_or(0.75, |r| r.1);
            hyperbolic_triple(&zeta, eps, c, half)?
        }
    };
    let report = verify_triple(&triple, grid, Tolerances::default());
    let mut out = serde_json::to_value(&report).unwrap();
    out["command"] = Value::String("verify-triple".into());
    emit(cli, &out)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_TOLERANCE })
}

fn cmd_certificate(cli: &Cli, g_path: &Path, c_path: &Path) -> Result<i32, Error> {
    let g = load_graph(cli, g_path)?;
    g.require_valid()?;
    let c = CirculationFunction::from_json(&load_json(c_path)?, &g, g.edge_weights()?)?;
    match build_certificate(&g, &c)? {
        CertificateOutcome::Certificate(cert) => {
            let mut out = cert.to_json();
            out["command"] = Value::String("certificate".into());
            out["status"] = Value::String("coboundary".into());
            emit(cli, &out)?;
            Ok(EXIT_OK)
        }
        CertificateOutcome::MonochromaticCycle { edges } => {
            let out = json!({
                "command": "certificate",
                "status": "monochromatic cycle",
                "cycle": edges,
            });
            emit(cli, &out)?;
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn cmd_reeb_extract(cli: &Cli, mesh_path: &Path, diagnostics: Option<&Path>) -> Result<i32, Error> {
    let mesh = load_mesh(mesh_path)?;
    let result = extract_reeb(&mesh)?;
    let compat = compatibility_check(&result.graph, &mesh, 0.01)?;
    let graph_json = serde_json::to_value(&result.graph).unwrap();
    if let Some(path) = &cli.out {
        fs::write(path, serde_json::to_string_pretty(&graph_json).unwrap() + "\n")?;
    }
    if let Some(path) = diagnostics {
        let diag = json!({
            "saddle_fits": result.saddle_fits,
            "compatibility": compat,
        });
        fs::write(path, serde_json::to_string_pretty(&diag).unwrap() + "\n")?;
    }
    let dims = result.graph.homology_dimensions()?;
    let mut out = json!({
        "command": "reeb-extract",
        "vertices": result.graph.vertices.len(),
        "edges": result.graph.edges.len(),
        "cycles": dims.b1,
        "boundary": dims.boundary_count,
        "mesh_area": mesh.total_area(),
        "compatibility": compat,
        "saddle_fits": result.saddle_fits.len(),
    });
    if cli.out.is_none() {
        out["graph"] = graph_json;
    }
    // stdout gets the summary; the extracted graph goes to --out.
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(if compat.pass { EXIT_OK } else { EXIT_TOLERANCE })
}
