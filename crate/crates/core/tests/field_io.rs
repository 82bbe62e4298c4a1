use std::sync::Arc;

use ckn_core::boundary::probe_field;
use ckn_core::cli::{run, EXIT_OK};
use ckn_core::grid::{Field, Grid};
use ckn_core::io::{read_field, sidecar_path, write_field};
use ckn_core::CylParams;

#[test]
fn field_round_trip_is_exact() {
    for (n, l, p) in [(3u32, 2.0, 3.0), (2, 1.0, 4.0), (5, 0.5, 2.8)] {
        let c = CylParams::new(n, l, p).unwrap();
        let grid = Arc::new(Grid::new(n, 25.0 / l.sqrt(), 51, 5).unwrap());
        let f = probe_field(&c, grid, 0.3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        write_field(&path, &f).unwrap();
        assert!(sidecar_path(&path).exists());
        let g = read_field(&path).unwrap();
        assert_eq!(g.cyl, c);
        assert_eq!(g.grid.spec(), f.grid.spec());
        assert!(f.values.iter().zip(&g.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn corrupted_field_is_rejected() {
    let c = CylParams::new(3, 1.0, 3.0).unwrap();
    let grid = Arc::new(Grid::new(3, 25.0, 21, 3).unwrap());
    let f = Field::radial_extremal(grid, c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    write_field(&path, &f).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    std::fs::write(&path, truncated).unwrap();
    assert!(read_field(&path).is_err());
}

#[test]
fn minimize_saves_and_restarts_from_field() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("w.csv");
    let report = dir.path().join("r.json");
    let again = dir.path().join("r2.json");
    let base = ["ckn", "minimize", "--N", "3", "--lambda", "3", "--p", "3", "--nt", "201", "--nphi", "6"];
    let mut first: Vec<&str> = base.to_vec();
    first.extend(["--save-field", field.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(run(first), EXIT_OK);
    let mut second: Vec<&str> = base.to_vec();
    second.extend(["--init-field", field.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(run(second), EXIT_OK);
    let e = |p: &std::path::Path| {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v["result"]["report"]["energy"].as_f64().unwrap()
    };
    let (e1, e2) = (e(&report), e(&again));
    assert!(e2 <= e1 * (1.0 + 1e-12) && (e1 - e2).abs() < 1e-9 * e1, "{e1} {e2}");
}
