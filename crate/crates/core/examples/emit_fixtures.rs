//! Write the bundled fixture graphs as JSON files: `cargo run --example
//! emit_fixtures -- <dir>`.

use std::fs;
use std::path::PathBuf;

use reeb_steady::generate::{disk_graph, pretzel_graph, sphere_branch_graph, torus_graph};
use reeb_steady::Scalar;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    fs::create_dir_all(&dir).unwrap();
    let a = [
        Scalar::int(-3),
        Scalar::int(-1),
        Scalar::int(2),
        Scalar::int(2),
    ];
    let fixtures = [
        ("fig5.json", serde_json::to_value(torus_graph(&a)).unwrap()),
        (
            "pretzel_fig1.json",
            serde_json::to_value(pretzel_graph()).unwrap(),
        ),
        ("disk.json", serde_json::to_value(disk_graph()).unwrap()),
        (
            "sphere_branch.json",
            serde_json::to_value(sphere_branch_graph()).unwrap(),
        ),
    ];
    for (name, value) in fixtures {
        let path = dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(&value).unwrap() + "\n").unwrap();
        println!("wrote {}", path.display());
    }
}
