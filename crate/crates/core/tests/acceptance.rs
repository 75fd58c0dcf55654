//! Acceptance suite: eleven end-to-end criteria with frozen golden values,
//! printed one pass/fail line each (run with `--nocapture` to see them).

use std::time::{Duration, Instant};

use rand::Rng;

use reeb_steady::casimir::{moment_table, move_density_between_branches, orbit_equivalent, OrbitVerdict};
use reeb_steady::certificate::{graph_certificate, sign_coboundary, CoboundaryResult};
use reeb_steady::circulation::{
    circulation_space_of, is_balanced, is_totally_negative, solve_circulation_space,
    BalanceVerdict, CirculationSolution, NegativityVerdict,
};
use reeb_steady::generate::{
    disk_graph, pretzel_graph, random_bordered_graph, random_closed_graph, random_parameters,
    rng, sphere_branch_graph, torus_graph,
};
use reeb_steady::graph::MeasuredReebGraph;
use reeb_steady::mesh::{compatibility_check, extract_reeb, torus_mesh};
use reeb_steady::poly::Poly;
use reeb_steady::polytope::{
    balanced_regions, boundedness, enumerate_vertices, feasibility, negative_system,
    preferred_space, Boundedness, Feasibility,
};
use reeb_steady::steady::{
    cylinder_triple, elliptic_triple, hyperbolic_triple, verify_triple, Tolerances,
};
use reeb_steady::Scalar;

type Outcome = Result<String, String>;

fn space_of(g: &MeasuredReebGraph) -> reeb_steady::circulation::AffineCirculationSpace {
    match circulation_space_of(g).expect("solvable") {
        CirculationSolution::Space(s) => s,
        CirculationSolution::None { residual } => panic!("no circulation space: {residual}"),
    }
}

fn ints(v: &[i64]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::int(x)).collect()
}

// -- criterion 1 -------------------------------------------------------------

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = torus_graph(&[
        Scalar::int(-3),
        Scalar::int(-1),
        Scalar::int(2),
        Scalar::int(2),
    ]);
    let space = preferred_space(&g, &space_of(&g)).map_err(|e| e.to_string())?;
    let h = negative_system(&g, &space).map_err(|e| e.to_string())?;
    if !feasibility(&h).is_feasible() {
        return Err("a = (-3,-1,2,2) reported empty".into());
    }
    let v = enumerate_vertices(&h).map_err(|e| e.to_string())?;
    if v.vertices != vec![ints(&[-1]), ints(&[0])] || !v.rays.is_empty() {
        return Err(format!("interval endpoints {:?}", v.vertices));
    }

    let g2 = torus_graph(&[
        Scalar::int(-1),
        Scalar::int(-4),
        Scalar::int(2),
        Scalar::int(3),
    ]);
    let space2 = preferred_space(&g2, &space_of(&g2)).map_err(|e| e.to_string())?;
    let h2 = negative_system(&g2, &space2).map_err(|e| e.to_string())?;
    if feasibility(&h2).is_feasible() {
        return Err("a = (-1,-4,2,3) reported feasible".into());
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_millis(100) {
        return Err(format!("took {elapsed:?}, budget 0.1 s"));
    }
    Ok(format!(
        "torus interval (-1, 0) exact, second weight choice empty ({elapsed:?})"
    ))
}

// -- criterion 2 -------------------------------------------------------------

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let g = pretzel_graph();
    let space = preferred_space(&g, &space_of(&g)).map_err(|e| e.to_string())?;
    let h = negative_system(&g, &space).map_err(|e| e.to_string())?;
    if !feasibility(&h).is_feasible() {
        return Err("pretzel system reported empty".into());
    }
    let v = enumerate_vertices(&h).map_err(|e| e.to_string())?;
    let want = vec![ints(&[-2, 0]), ints(&[-1, 0]), ints(&[0, -2]), ints(&[0, -1])];
    if v.vertices != want {
        return Err(format!("vertices {:?}", v.vertices));
    }
    if !v.rays.is_empty() {
        return Err("unexpected rays".into());
    }
    if !matches!(
        boundedness(&h).map_err(|e| e.to_string())?,
        Boundedness::Bounded
    ) {
        return Err("polytope not bounded".into());
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_millis(100) {
        return Err(format!("took {elapsed:?}, budget 0.1 s"));
    }
    Ok(format!(
        "pretzel vertices {{(-2,0),(-1,0),(0,-1),(0,-2)}}, bounded, no rays ({elapsed:?})"
    ))
}

// -- criterion 3 -------------------------------------------------------------

fn criterion_3() -> Outcome {
    let mut r = rng(301);
    let mut checked = 0usize;
    // Trees and closed graphs of genus 1..3.
    for genus in 0..=3usize {
        for k in 0..200usize {
            let g = random_closed_graph(&mut r, genus, k % 5);
            let dims = g.homology_dimensions().map_err(|e| e.to_string())?;
            if dims.b1 != genus {
                return Err(format!("closed genus {genus} graph has b1 = {}", dims.b1));
            }
            let space = space_of(&g);
            if space.dim() != genus {
                return Err(format!(
                    "closed genus {genus}: circulation dim {}",
                    space.dim()
                ));
            }
            checked += 1;
        }
    }
    // Bordered graphs with k = 1..3 boundary components.
    for k in 1..=3usize {
        for i in 0..200usize {
            let g = random_bordered_graph(&mut r, i % 3, k, i % 4);
            let dims = g.homology_dimensions().map_err(|e| e.to_string())?;
            let want = dims.b1 + k - 1;
            let space = space_of(&g);
            if space.dim() != want {
                return Err(format!(
                    "bordered k={k} b1={}: circulation dim {} want {want}",
                    dims.b1,
                    space.dim()
                ));
            }
            checked += 1;
        }
    }
    Ok(format!(
        "dimension formula b1 (closed) / b1 + k - 1 (bordered) on {checked} graphs"
    ))
}

// -- criterion 4 -------------------------------------------------------------

fn criterion_4() -> Outcome {
    let mut r = rng(401);
    let mut decidable = 0usize;
    let mut graphs = 0usize;
    while decidable < 1000 {
        graphs += 1;
        let g = random_closed_graph(&mut r, 1 + graphs % 3, graphs % 3);
        let space = space_of(&g);
        let mut points: Vec<Vec<Scalar>> = (0..3)
            .map(|_| random_parameters(&mut r, space.dim(), 2))
            .collect();
        // Include an interior point of the totally negative region when
        // one exists, so balanced samples occur.
        let h = negative_system(&g, &space).map_err(|e| e.to_string())?;
        if let Feasibility::Feasible { point, .. } = feasibility(&h) {
            points.push(point);
        }
        for t in points {
            let c = space.at(&t);
            let bal = is_balanced(&g, &c, 1e-9).map_err(|e| e.to_string())?;
            let neg = is_totally_negative(&g, &c, 1e-9).map_err(|e| e.to_string())?;
            let bal = match bal {
                BalanceVerdict::Indeterminate { .. } => continue,
                BalanceVerdict::Balanced => true,
                BalanceVerdict::Unbalanced { .. } => false,
            };
            let neg = match neg {
                NegativityVerdict::Indeterminate { .. } => continue,
                NegativityVerdict::TotallyNegative => true,
                NegativityVerdict::Violation { .. } => false,
            };
            if bal != neg {
                return Err(format!(
                    "verdicts disagree on graph {graphs}: balanced={bal}, totally_negative={neg}"
                ));
            }
            decidable += 1;
        }
    }
    Ok(format!(
        "balanced <=> totally negative on {decidable} decidable closed-graph samples"
    ))
}

// -- criterion 5 -------------------------------------------------------------

fn criterion_5() -> Outcome {
    let mut r = rng(501);
    let mut feasible = 0usize;
    for k in 0..200usize {
        let g = random_closed_graph(&mut r, 1 + k % 3, k % 4);
        let space = space_of(&g);
        let h = negative_system(&g, &space).map_err(|e| e.to_string())?;
        if !feasibility(&h).is_feasible() {
            continue;
        }
        feasible += 1;
        match boundedness(&h).map_err(|e| e.to_string())? {
            Boundedness::Bounded => {}
            Boundedness::Unbounded { direction } => {
                return Err(format!("unbounded feasible region, direction {direction:?}"))
            }
        }
    }
    if feasible == 0 {
        return Err("no feasible system among 200 samples".into());
    }
    Ok(format!(
        "recession cone trivial for all {feasible} feasible systems of 200"
    ))
}

// -- criterion 6 -------------------------------------------------------------

fn criterion_6() -> Outcome {
    let g = disk_graph();
    let space = space_of(&g);
    if space.dim() != 0 {
        return Err(format!("disk circulation dim {}", space.dim()));
    }
    let c = space.at(&[]);
    let s = g.vertex_index("s").unwrap();
    let limits = c.saddle_limits(&g, s).map_err(|e| e.to_string())?;
    if limits != [Scalar::int(2), Scalar::int(-3), Scalar::int(5)] {
        return Err(format!("saddle limits {limits:?}"));
    }
    let regions = balanced_regions(&g, &space).map_err(|e| e.to_string())?;
    if regions.len() != 2 || regions.iter().any(|r| r.feasibility.is_feasible()) {
        return Err("a sign pattern was reported feasible".into());
    }
    Ok("disk with saddle limits (2, -3, 5): both sign patterns empty".into())
}

// -- criterion 7 -------------------------------------------------------------

fn criterion_7() -> Outcome {
    let mut r = rng(701);
    let mut sign_samples = 0usize;
    for k in 0..50usize {
        let deg = 1 + k % 4;
        let zeta: Vec<f64> = (0..=deg)
            .map(|_| r.gen_range(-8i64..=8) as f64 / 8.0)
            .collect();
        let c_mag = 0.5 + r.gen_range(0i64..=12) as f64 / 8.0;
        let c_sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let triple = match k % 3 {
            0 => cylinder_triple(&zeta, c_sign * c_mag, (0.4, 1.6)),
            1 => elliptic_triple(&zeta, 1.2),
            _ => {
                let c = c_sign * (2.0 + c_mag);
                hyperbolic_triple(&zeta, c_sign as i8, c, 0.5)
            }
        }
        .map_err(|e| format!("combo {k}: construction failed: {e}"))?;
        let report = verify_triple(&triple, 20, Tolerances::default());
        if !report.pass {
            return Err(format!("combo {k}: {:?}", report.failures));
        }
        sign_samples += report.sign_rule_samples;
    }
    if sign_samples == 0 {
        return Err("sign rule never exercised".into());
    }
    Ok(format!(
        "50 random steady triples verified (curl, J^2, duality, metric, sign rule on {sign_samples} levels)"
    ))
}

// -- criterion 8 -------------------------------------------------------------

fn criterion_8() -> Outcome {
    let g = sphere_branch_graph();
    let moved = move_density_between_branches(
        &g,
        g.vertex_index("s").unwrap(),
        &Poly(vec![Scalar::ratio(1, 10)]),
        &Scalar::ratio(3, 2),
        &Scalar::ratio(7, 4),
    )
    .map_err(|e| e.to_string())?;
    let t1 = moment_table(&g, 10).map_err(|e| e.to_string())?;
    let t2 = moment_table(&moved, 10).map_err(|e| e.to_string())?;
    for (i, (a, b)) in t1.totals.iter().zip(&t2.totals).enumerate() {
        if (a.to_f64() - b.to_f64()).abs() > 1e-12 || a != b {
            return Err(format!("total moment m{i} differs: {a} vs {b}"));
        }
    }
    let c1 = space_of(&g).at(&[]);
    let c2 = space_of(&moved).at(&[]);
    match orbit_equivalent(&g, &c1, &moved, &c2, 10, 1e-9).map_err(|e| e.to_string())? {
        OrbitVerdict::Distinct { witness } if witness.edges.is_some() => Ok(format!(
            "totals m0..m10 agree exactly, orbits distinct: {}",
            witness.reason
        )),
        OrbitVerdict::Distinct { witness } => {
            Err(format!("distinct but no per-edge witness: {}", witness.reason))
        }
        OrbitVerdict::Equivalent { .. } => Err("pair reported equivalent".into()),
    }
}

// -- criterion 9 -------------------------------------------------------------

/// Does any potential with values in 0..n realize the signs? Longest-path
/// levels are bounded by n - 1, so this range is exhaustive.
fn brute_force_coboundary(n: usize, edges: &[(usize, usize)], eps: &[i8]) -> bool {
    let mut pot = vec![0i64; n];
    loop {
        if edges
            .iter()
            .zip(eps)
            .all(|(&(t, h), &s)| (pot[h] - pot[t]).signum() == s as i64)
        {
            return true;
        }
        // Increment the base-n counter.
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            pot[i] += 1;
            if pot[i] < n as i64 {
                break;
            }
            pot[i] = 0;
            i += 1;
        }
    }
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut cases = 0usize;
    for n in 1..=4usize {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|t| (0..n).map(move |h| (t, h)))
            .collect();
        // Multisets of up to 5 ordered pairs, as nondecreasing index lists.
        for m in 1..=5usize {
            let mut pick = vec![0usize; m];
            loop {
                let edges: Vec<(usize, usize)> = pick.iter().map(|&i| pairs[i]).collect();
                // Skip graphs with an untouched vertex; those duplicate a
                // smaller-n case.
                let mut touched = vec![false; n];
                for &(t, h) in &edges {
                    touched[t] = true;
                    touched[h] = true;
                }
                if touched.iter().all(|&t| t) {
                    for mask in 0..(1u32 << m) {
                        let eps: Vec<i8> =
                            (0..m).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
                        let got = sign_coboundary(n, &edges, &eps).map_err(|e| e.to_string())?;
                        let want = brute_force_coboundary(n, &edges, &eps);
                        match got {
                            CoboundaryResult::Coboundary { potential, xi } => {
                                if !want {
                                    return Err(format!(
                                        "false coboundary on {edges:?} signs {eps:?}"
                                    ));
                                }
                                for (i, &(t, h)) in edges.iter().enumerate() {
                                    let d = potential[h] - potential[t];
                                    if d.signum() != eps[i] as i64 || xi[i] != d {
                                        return Err(format!(
                                            "bad potential on {edges:?} signs {eps:?}"
                                        ));
                                    }
                                }
                            }
                            CoboundaryResult::MonochromaticCycle { edges: cyc } => {
                                if want {
                                    return Err(format!(
                                        "missed coboundary on {edges:?} signs {eps:?}"
                                    ));
                                }
                                if cyc.is_empty() {
                                    return Err("empty cycle witness".into());
                                }
                            }
                        }
                        cases += 1;
                    }
                }
                // Next nondecreasing index list.
                let mut i = m;
                loop {
                    if i == 0 {
                        pick.clear();
                        break;
                    }
                    i -= 1;
                    if pick[i] + 1 < pairs.len() {
                        pick[i] += 1;
                        for j in i + 1..m {
                            pick[j] = pick[i];
                        }
                        break;
                    }
                }
                if pick.is_empty() {
                    break;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {elapsed:?}, budget 60 s"));
    }
    Ok(format!(
        "sign-coboundary decision matches brute force on {cases} cases ({elapsed:?})"
    ))
}

// -- criterion 10 ------------------------------------------------------------

fn criterion_10() -> Outcome {
    let mut r = rng(1001);
    let mut done = 0usize;
    let mut attempts = 0usize;
    while done < 500 {
        attempts += 1;
        if attempts > 5000 {
            return Err(format!("only {done} balanced instances in {attempts} draws"));
        }
        let g = random_closed_graph(&mut r, 1 + attempts % 3, attempts % 3);
        let space = space_of(&g);
        let h = negative_system(&g, &space).map_err(|e| e.to_string())?;
        let Feasibility::Feasible { point, .. } = feasibility(&h) else {
            continue;
        };
        let c = space.at(&point);
        if !matches!(
            is_balanced(&g, &c, 1e-9).map_err(|e| e.to_string())?,
            BalanceVerdict::Balanced
        ) {
            return Err(format!("interior point not balanced on attempt {attempts}"));
        }
        let cert = graph_certificate(&g, &c).map_err(|e| format!("attempt {attempts}: {e}"))?;
        if cert.cycle_residuals.iter().any(|&x| x != 0) {
            return Err(format!("nonzero cycle integral: {:?}", cert.cycle_residuals));
        }
        if cert
            .edges
            .iter()
            .any(|e| (e.eps as i64).signum() != e.xi.signum() && e.xi != 0)
        {
            return Err("certificate piece sign mismatch".into());
        }
        done += 1;
    }
    Ok(format!(
        "{done} balanced instances certified, all cycle integrals exactly 0"
    ))
}

// -- criterion 11 ------------------------------------------------------------

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let mesh = torus_mesh(50, 50);
    let result = extract_reeb(&mesh).map_err(|e| e.to_string())?;
    let g = &result.graph;
    let dims = g.homology_dimensions().map_err(|e| e.to_string())?;
    if dims.b1 != 1 {
        return Err(format!("b1 = {}", dims.b1));
    }
    let count = |role| {
        g.vertices
            .iter()
            .filter(|v| v.role == role)
            .count()
    };
    use reeb_steady::graph::VertexRole::*;
    if count(Min) != 1 || count(Max) != 1 || count(Saddle) != 2 {
        return Err(format!(
            "roles: {} min, {} max, {} saddle",
            count(Min),
            count(Max),
            count(Saddle)
        ));
    }
    let compat = compatibility_check(g, &mesh, 0.005).map_err(|e| e.to_string())?;
    if !compat.pass {
        return Err(format!("compatibility: {:?}", compat.entries));
    }

    let fine = torus_mesh(100, 100);
    let fine_result = extract_reeb(&fine).map_err(|e| e.to_string())?;
    if fine_result.saddle_fits.len() != 2 {
        return Err(format!("{} saddle fits", fine_result.saddle_fits.len()));
    }
    for fit in &fine_result.saddle_fits {
        let want = [2.0, -1.0, -1.0];
        for (r, w) in fit.ratios.iter().zip(want) {
            if (r - w).abs() > 0.2 * w.abs() {
                return Err(format!(
                    "saddle {} ratios {:?}, want within 20% of (2, -1, -1)",
                    fit.saddle_id, fit.ratios
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(5) {
        return Err(format!("took {elapsed:?}, budget 5 s"));
    }
    Ok(format!(
        "torus mesh: topology (1 min, 1 max, 2 saddles, b1 = 1), mass within 0.5%, \
         saddle ratios within 20% of (2, -1, -1) ({elapsed:?})"
    ))
}

// -- harness -----------------------------------------------------------------

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("torus admissibility interval", criterion_1),
        ("pretzel polytope vertices", criterion_2),
        ("circulation-space dimension formula", criterion_3),
        ("balanced <=> totally negative (closed)", criterion_4),
        ("feasible regions are bounded", criterion_5),
        ("disk obstruction", criterion_6),
        ("steady-triple identities", criterion_7),
        ("per-edge moments separate orbits", criterion_8),
        ("sign-coboundary exhaustive check", criterion_9),
        ("certificate totality", criterion_10),
        ("mesh extraction pipeline", criterion_11),
    ];
    let mut failures = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {}: {name} — {detail}", i + 1),
            Err(why) => {
                println!("FAIL criterion {}: {name} — {why}", i + 1);
                failures.push(format!("criterion {} ({name}): {why}", i + 1));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn weight_override_matches_direct_construction() {
    // The solver must depend on the weights alone: overriding the measured
    // weights of one torus graph with another's reproduces its system.
    let a1 = [
        Scalar::int(-3),
        Scalar::int(-1),
        Scalar::int(2),
        Scalar::int(2),
    ];
    let a2 = [
        Scalar::int(-1),
        Scalar::int(-4),
        Scalar::int(2),
        Scalar::int(3),
    ];
    let g = torus_graph(&a1);
    let w2: Vec<Scalar> = a2.to_vec();
    let space = match solve_circulation_space(&g, &w2).unwrap() {
        CirculationSolution::Space(s) => s,
        _ => panic!(),
    };
    let space = preferred_space(&g, &space).unwrap();
    let h = negative_system(&g, &space).unwrap();
    assert!(!feasibility(&h).is_feasible());

    let g2 = torus_graph(&a2);
    let space2 = preferred_space(&g2, &space_of(&g2)).unwrap();
    let h2 = negative_system(&g2, &space2).unwrap();
    assert!(!feasibility(&h2).is_feasible());
}
