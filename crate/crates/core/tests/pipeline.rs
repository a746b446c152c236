use std::io::Cursor;

use tempsketch::hashing::{read_sketches, write_sketches, HyperplaneSet};
use tempsketch::pipeline::{bucket_sketches, embed, evaluate_unsupervised, Attributes, EmbedParams, EvalParams};
use tempsketch::{load_edge_list, Edge, EdgeSchema, LoadOptions, NodeTypeTable, SketchFormat, TemporalGraph, WalkMode};

fn toy() -> TemporalGraph {
    let text = "a b 1\na c 2\nb c 3\nc d 4\nd e 5\ne a 6\nb d 7\n";
    load_edge_list(Cursor::new(text), &LoadOptions::default(), None).unwrap()
}

fn ring(n: u32, chords: u32) -> TemporalGraph {
    let mut edges: Vec<Edge> = (0..n).map(|i| Edge::at(i, (i + 1) % n, i as i64)).collect();
    edges.extend((0..chords).map(|i| Edge::at(i * 7 % n, (i * 13 + 5) % n, 100 + i as i64)));
    TemporalGraph::from_edges(n as usize, edges, false, None).unwrap()
}

#[test]
fn three_node_graph_gives_three_rows_of_eight_bits() {
    let g = load_edge_list(Cursor::new("a b 1\nb c 2\n"), &LoadOptions::default(), None).unwrap();
    let e = embed(&g, None, &EmbedParams { dim: 8, max_dt: 1, ..EmbedParams::default() }).unwrap();
    assert_eq!((e.sketches.num_rows(), e.sketches.num_bits()), (3, 8));
}

#[test]
fn embedding_is_deterministic_and_thread_independent() {
    let g = ring(300, 200);
    let params = EmbedParams { seed: 17, ..EmbedParams::default() };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| embed(&g, None, &params).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.histograms, four.histograms);
    assert_eq!(one.sketches, four.sketches);
    assert_eq!(run(3).sketches, one.sketches);
}

#[test]
fn different_seeds_change_the_planes() {
    let g = toy();
    let a = embed(&g, None, &EmbedParams { seed: 1, ..EmbedParams::default() }).unwrap();
    let b = embed(&g, None, &EmbedParams { seed: 2, ..EmbedParams::default() }).unwrap();
    assert_ne!(a.planes, b.planes);
}

#[test]
fn sketch_and_plane_files_round_trip() {
    let g = toy();
    let e = embed(&g, None, &EmbedParams::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for format in [SketchFormat::Sparse, SketchFormat::Packed] {
        let path = dir.path().join(format!("z.{format}"));
        write_sketches(&e.sketches, g.labels(), &path, format).unwrap();
        let (labels, z) = read_sketches(&path).unwrap();
        assert_eq!(z, e.sketches);
        if format == SketchFormat::Sparse {
            assert_eq!(labels.unwrap(), g.labels());
        }
    }
    let planes = dir.path().join("planes.bin");
    e.planes.write_file(&planes).unwrap();
    assert_eq!(HyperplaneSet::read_file(&planes).unwrap(), e.planes);
}

#[test]
fn packed_payload_is_sixteen_bytes_per_row_at_k128() {
    let g = ring(100, 0);
    let e = embed(&g, None, &EmbedParams::default()).unwrap();
    let mut buf = Vec::new();
    tempsketch::hashing::write_packed(&e.sketches, &mut buf).unwrap();
    assert_eq!(buf.len() - tempsketch::hashing::packed_header_len(3), 1600);
}

#[test]
fn histogram_dump_has_a_row_per_node_and_distance() {
    let g = toy();
    let e = embed(&g, None, &EmbedParams::default()).unwrap();
    let mut out = Vec::new();
    e.histograms.write_csv(g.labels(), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + g.num_nodes() * 3);
    assert_eq!(lines[1].split(',').count(), 2 + e.histograms.layout().dim());
    assert!(lines[1].starts_with("a,1,"));
}

#[test]
fn node_types_and_attributes_widen_the_histograms() {
    let g0 = toy();
    let types = NodeTypeTable::parse(Cursor::new("a\tuser\nb\tdevice\nc\tuser\nd\tdevice\ne\tuser\n")).unwrap();
    let g = load_edge_list(Cursor::new("a b 1\na c 2\nb c 3\nc d 4\nd e 5\ne a 6\nb d 7\n"), &LoadOptions::default(), Some(&types))
        .unwrap();
    assert_eq!(g.num_node_types(), 2);
    let attrs = Attributes { values: [(0, vec![3.0]), (2, vec![1.0])].into_iter().collect(), fill: 0.0 };
    let plain = embed(&g0, None, &EmbedParams::default()).unwrap();
    let rich = embed(&g, Some(&attrs), &EmbedParams::default()).unwrap();
    assert_eq!(plain.histograms.layout().dim(), 5);
    assert_eq!(rich.histograms.layout().dim(), 2 * 2 * 5);
}

#[test]
fn temporal_policy_on_static_graph_is_a_walk_stage_error() {
    let options = LoadOptions { schema: EdgeSchema::parse("src dst").unwrap(), directed: false };
    let g = load_edge_list(Cursor::new("a b\nb c\n"), &options, None).unwrap();
    for mode in [WalkMode::ShortTerm, WalkMode::LongTerm] {
        let err = embed(&g, None, &EmbedParams { policy: Some(mode), ..EmbedParams::default() }).unwrap_err();
        assert!(err.is_data_error());
        assert!(err.to_string().starts_with("walks: "), "{err}");
    }
    assert!(embed(&g, None, &EmbedParams::default()).is_ok());
}

#[test]
fn unsupervised_stitching_is_reproducible_and_bounded() {
    let g = ring(400, 300);
    let params = EvalParams { band_bits: 8, ..EvalParams::default() };
    let a = evaluate_unsupervised(&g, None, &params).unwrap();
    let b = evaluate_unsupervised(&g, None, &params).unwrap();
    assert_eq!(a.table.candidate_pairs(), b.table.candidate_pairs());
    assert_eq!(a.decisions, b.decisions);
    assert!(a.table.candidate_pairs().len() <= a.table.candidate_pair_bound());
    assert!(a.report.auc.is_none());
    let again = bucket_sketches(&a.embedding.sketches, 8, params.seed).unwrap();
    assert_eq!(again, a.table);
}
