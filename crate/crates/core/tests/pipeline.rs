//! End-to-end runs through the public pipeline API.

use graphpack::pipeline::{prepare_instances, reverify, run_pipeline, Family, RunConfig};
use graphpack::report::{dump_embeddings, parse_embeddings};
use graphpack::{Graph, InstanceSet, PackingReport};

fn trees(n: usize, count: usize, seed: u64) -> RunConfig {
    let mut c = RunConfig::new(
        n,
        Family::Trees {
            count,
            min_order: Some(n * 9 / 10),
        },
        seed,
    );
    c.epsilon = 0.4;
    c.constants.delta = Some(0.0);
    c.constants.zeta = Some(0.0);
    c.constants.gamma = Some(0.15);
    c.constants.p0 = Some(0.3);
    c.constants.layers = Some(1);
    c
}

#[test]
fn reruns_are_byte_identical() {
    let c = trees(80, 12, 4);
    assert_eq!(
        run_pipeline(&c).unwrap().to_canonical_json(),
        run_pipeline(&c).unwrap().to_canonical_json()
    );
}

#[test]
fn valid_runs_survive_a_dump_round_trip() {
    let c = trees(200, 20, 1);
    let r = run_pipeline(&c).unwrap();
    assert!(r.valid, "{:?}", r.failure);
    let set = prepare_instances(&c).unwrap();
    let guests: Vec<Graph> = set.instances.iter().map(|i| i.graph.clone()).collect();
    let orders: Vec<usize> = guests.iter().map(Graph::vertex_count).collect();
    let back = parse_embeddings(&dump_embeddings(&r.embeddings), &orders).unwrap();
    let v = reverify(&guests, c.n, &back);
    assert!(v.valid);
    assert_eq!(v.used_edges, r.total_edges);
}

#[test]
fn failed_runs_still_report_the_phase() {
    // far too much Γ^(0) mass for Phase I to find room
    let mut c = trees(80, 12, 0);
    c.constants.p0 = Some(0.97);
    c.retries.run = 0;
    let r = run_pipeline(&c).unwrap();
    assert!(!r.valid);
    let failure = r.failure.as_ref().expect("failure recorded");
    assert!(!failure.phase.is_empty());
    let json: serde_json::Value = serde_json::from_str(&r.to_canonical_json()).unwrap();
    assert_eq!(json["failure"]["phase"], failure.phase.as_str());
    assert_eq!(json["valid"], false);
    assert!(json.get("timings").is_none());
}

#[test]
fn csv_has_a_header_and_one_row() {
    let r = run_pipeline(&trees(200, 20, 2)).unwrap();
    let csv = r.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], PackingReport::csv_header());
    assert_eq!(lines[1].split(',').count(), lines[0].split(',').count());
}

#[test]
fn instances_from_a_directory_pack_like_generated_ones() {
    let c = trees(200, 20, 3);
    let set = prepare_instances(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    set.write_dir(dir.path()).unwrap();
    let read = InstanceSet::read_dir(dir.path()).unwrap();
    assert_eq!(read.instances.len(), set.instances.len());
    for (a, b) in read.instances.iter().zip(&set.instances) {
        assert_eq!(a.graph, b.graph);
    }
    let mut from_files = c.clone();
    from_files.family = Family::FromFiles {
        dir: dir.path().to_path_buf(),
    };
    let r = run_pipeline(&from_files).unwrap();
    assert_eq!(r.total_edges, set.total_edges);
    assert!(r.valid, "{:?}", r.failure);
}
