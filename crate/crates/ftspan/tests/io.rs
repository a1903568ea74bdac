use ftspan::io::{format_graph, format_spanner, parse_graph, parse_spanner, read_graph, read_spanner, write_graph, write_spanner};
use ftspan_core::{generators, Edge, EdgeId, Graph, Spanner, SpannerMeta};
use proptest::prelude::*;

#[test]
fn files_round_trip_with_comments() {
    let dir = tempfile::tempdir().unwrap();
    let g = generators::gap_fixture(1000.0, 3);
    let gp = dir.path().join("g.txt");
    write_graph(&gp, &g, Some("made by a test\nsecond line")).unwrap();
    assert_eq!(read_graph(&gp).unwrap(), g);

    let h = Spanner::new([EdgeId(0), EdgeId(2)], SpannerMeta::new("ft2-lp", 2, 3, 7));
    let hp = dir.path().join("h.txt");
    write_spanner(&hp, &h, Some("ftspan build ...")).unwrap();
    let back = read_spanner(&hp).unwrap();
    assert_eq!(back, h);
}

#[test]
fn missing_file_is_an_io_error() {
    let err = read_graph(std::path::Path::new("/definitely/not/here.txt")).unwrap_err();
    assert!(matches!(err, ftspan::io::ParseError::Io { .. }));
}

#[test]
fn whitespace_is_normalized() {
    let g = parse_graph("  directed\t3\n0   1 1 1   \n").unwrap();
    assert_eq!(format_graph(&g), "directed 3\n0 1 1 1\n");
}

#[test]
fn spanner_rejects_junk() {
    assert!(parse_spanner("3 1\n").is_err());
    assert!(parse_spanner("3 1 0\n1 2\n").is_err());
    assert!(parse_spanner("3 1 0\nx\n").is_err());
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    (1usize..9, any::<bool>(), any::<u64>(), 0.0f64..1.0).prop_map(|(n, directed, seed, p)| {
        let base = generators::gnp(n, p, directed, seed);
        // irregular weights, including fractional ones
        let edges = base.edges().iter().enumerate().map(|(i, e)| {
            Edge::new(e.tail, e.head, 1.0 + (i % 3) as f64 * 0.25, (i as f64 * 1.5) % 7.0)
        });
        Graph::new(n, directed, edges).unwrap()
    })
}

proptest! {
    #[test]
    fn graph_text_round_trip(g in arb_graph()) {
        let text = format_graph(&g);
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(format_graph(&back), text);
    }

    #[test]
    fn spanner_text_round_trip(ids in proptest::collection::btree_set(0usize..500, 0..40), k in 1u32..9, r in 0usize..5, seed in any::<u64>()) {
        let h = Spanner::new(ids.into_iter().map(EdgeId), SpannerMeta::new("file", k, r, seed));
        prop_assert_eq!(parse_spanner(&format_spanner(&h)).unwrap(), h);
    }
}
