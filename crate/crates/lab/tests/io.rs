use riesz_swarm::io::{
    equilibrium_to_json, measure_from_json, measure_to_json, read_measure, read_measure_csv,
    read_shape_spec, write_measure, write_measure_csv, Format, TrajectoryWriter,
};
use riesz_swarm_core::equilibrium::solve;
use riesz_swarm_core::{rng, DiscreteMeasure, ShapeKind, ShapeSpec, SolverOptions};
use std::path::Path;

fn awkward_measure(dim: usize, n: usize, seed: u64) -> DiscreteMeasure {
    let mut r = rng::seeded(seed);
    let points: Vec<f64> = (0..n * dim)
        .map(|_| (rng::gaussian(&mut r) * 1e3).sin() / 3.0)
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng::uniform(&mut r) + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let rest: f64 = weights[1..].iter().sum();
    weights[0] = 1.0 - rest;
    DiscreteMeasure::new(dim, points, weights).unwrap()
}

fn bits(mu: &DiscreteMeasure) -> (Vec<u64>, Vec<u64>) {
    (
        mu.points().iter().map(|x| x.to_bits()).collect(),
        mu.weights().iter().map(|x| x.to_bits()).collect(),
    )
}

#[test]
fn json_round_trip_is_bit_exact() {
    for dim in 1..=4 {
        let mu = awkward_measure(dim, 37, dim as u64);
        let back = measure_from_json(&measure_to_json(&mu).unwrap()).unwrap();
        assert_eq!(back.dim(), dim);
        assert_eq!(bits(&back), bits(&mu));
    }
}

#[test]
fn csv_round_trip_is_bit_exact() {
    for dim in 1..=4 {
        let mu = awkward_measure(dim, 41, 10 + dim as u64);
        let mut buf = Vec::new();
        write_measure_csv(&mu, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let header: Vec<String> = (1..=dim)
            .map(|k| format!("x{k}"))
            .chain(["w".into()])
            .collect();
        assert_eq!(text.lines().next().unwrap(), header.join(","));
        let back = read_measure_csv(buf.as_slice()).unwrap();
        assert_eq!(bits(&back), bits(&mu));
    }
}

#[test]
fn files_round_trip_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let mu = awkward_measure(3, 20, 5);
    for (name, format) in [("m.json", Format::Json), ("m.csv", Format::Csv)] {
        let path = dir.path().join(name);
        assert_eq!(Format::from_path(&path), format);
        write_measure(&mu, &path, format).unwrap();
        assert_eq!(bits(&read_measure(&path).unwrap()), bits(&mu));
    }
}

#[test]
fn malformed_measures_are_rejected() {
    assert!(
        measure_from_json(r#"{"dim": 2, "points": [[0, 1], [1]], "weights": [0.5, 0.5]}"#).is_err()
    );
    assert!(
        measure_from_json(r#"{"dim": 1, "points": [[0], [1]], "weights": [0.5, 0.6]}"#).is_err()
    );
    assert!(read_measure_csv("x1,x3,w\n0,0,1\n".as_bytes()).is_err());
    assert!(read_measure_csv("w\n1\n".as_bytes()).is_err());
    assert!(read_measure_csv("x1,w\nzero,1\n".as_bytes()).is_err());
    assert!(read_measure(Path::new("/nonexistent/measure.json")).is_err());
}

#[test]
fn equilibrium_json_fields() {
    let cloud = ShapeSpec::new(
        ShapeKind::Sphere {
            dim: 3,
            radius: 0.5,
        },
        120,
        2,
    )
    .sample()
    .unwrap();
    let res = solve(3, cloud.points(), 1.0, &SolverOptions::default()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&equilibrium_to_json(&res).unwrap()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.len(), 5);
    for k in ["lambda", "energy", "capacity", "kkt_residual", "weights"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(v["weights"].as_array().unwrap().len(), 120);
    assert_eq!(v["capacity"].as_f64().unwrap(), res.capacity);
}

#[test]
fn shape_specs_parse_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    let spec = ShapeSpec::new(
        ShapeKind::ProductUnion {
            left: Box::new(ShapeSpec::new(ShapeKind::SphericalCap { dim: 4 }, 10, 1)),
            right: Box::new(ShapeSpec::new(ShapeKind::ReuleauxTriangle, 12, 2)),
            t: 0.25,
        },
        0,
        0,
    );
    std::fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(read_shape_spec(&path).unwrap(), spec);
    std::fs::write(
        &path,
        r#"{"kind": {"ball": {"dim": 3, "radius": 0.5}}, "n_samples": 7, "seed": 9}"#,
    )
    .unwrap();
    let ball = read_shape_spec(&path).unwrap();
    assert_eq!(
        ball.kind,
        ShapeKind::Ball {
            dim: 3,
            radius: 0.5
        }
    );
    assert_eq!(ball.sample().unwrap().len(), 7);
}

#[test]
fn trajectory_rows() {
    let mut buf = Vec::new();
    let mut w = TrajectoryWriter::new(&mut buf, 2).unwrap();
    w.frame(0, 0.0, 2, &[1.0, 2.0, 3.0, 4.5]).unwrap();
    w.frame(10, 0.25, 2, &[1.5, 2.0, 3.0, 4.0]).unwrap();
    w.finish().unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines,
        [
            "step,t,particle,x1,x2",
            "0,0,0,1,2",
            "0,0,1,3,4.5",
            "10,0.25,0,1.5,2",
            "10,0.25,1,3,4"
        ]
    );
}
