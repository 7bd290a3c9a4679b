//! Elliptic-format CSV ingestion.
//!
//! Three comma-separated inputs: a features file (`id, time step, 94 local,
//! 72 aggregated` with no header), a classes file (`id, class` where class is
//! `1` for illicit, `2` for licit or an unknown token; header optional per the
//! public distribution) and an edge list of id pairs. Headers are detected by
//! attempting to parse the leading row.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{
    Label, NodeTable, SplitCounts, TransactionGraph, AGGREGATED_FEATURES, FEATURE_FILE_COLUMNS,
    LOCAL_FEATURES,
};

/// Loads the CSV triplet into an immutable graph plus per-node table.
///
/// Dense indices are assigned in features-file order. Every edge endpoint
/// must appear in the features file; malformed rows, unknown ids and
/// duplicate ids abort with a row-numbered error.
pub fn load_elliptic(
    features_path: &Path,
    classes_path: &Path,
    edgelist_path: &Path,
) -> Result<(TransactionGraph, NodeTable)> {
    let (external_ids, id_index, time_steps, local, aggregated) = read_features(features_path)?;
    let labels = read_classes(classes_path, &id_index, external_ids.len())?;
    let edges = read_edges(edgelist_path, &id_index)?;

    let graph = TransactionGraph::from_parts(&edges, time_steps, external_ids, id_index);
    graph.validate()?;
    let table = NodeTable {
        local,
        aggregated,
        labels,
    };
    Ok((graph, table))
}

type FeatureParts = (
    Vec<u64>,
    HashMap<u64, u32>,
    Vec<u16>,
    Array2<f64>,
    Array2<f64>,
);

fn read_features(path: &Path) -> Result<FeatureParts> {
    let mut reader = open_reader(path)?;
    let mut record = csv::StringRecord::new();

    let mut external_ids: Vec<u64> = Vec::new();
    let mut id_index: HashMap<u64, u32> = HashMap::new();
    let mut time_steps: Vec<u16> = Vec::new();
    let mut local: Vec<f64> = Vec::new();
    let mut aggregated: Vec<f64> = Vec::new();

    let mut first = true;
    while next_record(&mut reader, &mut record, path)? {
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != FEATURE_FILE_COLUMNS {
            return Err(Error::data(
                path,
                row,
                format!(
                    "expected {} columns, got {}",
                    FEATURE_FILE_COLUMNS,
                    record.len()
                ),
            ));
        }
        if first {
            first = false;
            // Header detection: a leading row that is not fully numeric.
            if record.iter().any(|f| f.trim().parse::<f64>().is_err()) {
                continue;
            }
        }

        let id = parse_id(&record[0], path, row)?;
        let step = parse_time_step(&record[1], path, row)?;
        let dense = external_ids.len() as u32;
        if id_index.insert(id, dense).is_some() {
            return Err(Error::data(path, row, format!("duplicate node id {}", id)));
        }
        external_ids.push(id);
        time_steps.push(step);
        for (col, field) in record.iter().enumerate().skip(2) {
            let value: f64 = field.trim().parse().map_err(|_| {
                Error::data(
                    path,
                    row,
                    format!("column {}: not a number: {:?}", col, field),
                )
            })?;
            if !value.is_finite() {
                return Err(Error::data(
                    path,
                    row,
                    format!("column {}: non-finite value", col),
                ));
            }
            if col < 2 + LOCAL_FEATURES {
                local.push(value);
            } else {
                aggregated.push(value);
            }
        }
    }

    let n = external_ids.len();
    let local = Array2::from_shape_vec((n, LOCAL_FEATURES), local).expect("row-major local block");
    let aggregated = Array2::from_shape_vec((n, AGGREGATED_FEATURES), aggregated)
        .expect("row-major aggregated block");
    Ok((external_ids, id_index, time_steps, local, aggregated))
}

fn read_classes(path: &Path, id_index: &HashMap<u64, u32>, num_nodes: usize) -> Result<Vec<Label>> {
    let mut reader = open_reader(path)?;
    let mut record = csv::StringRecord::new();
    let mut labels = vec![Label::Unknown; num_nodes];
    let mut seen = vec![false; num_nodes];

    let mut first = true;
    while next_record(&mut reader, &mut record, path)? {
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::data(
                path,
                row,
                format!("expected 2 columns, got {}", record.len()),
            ));
        }
        if first {
            first = false;
            if record[0].trim().parse::<u64>().is_err() {
                continue;
            }
        }
        let id = parse_id(&record[0], path, row)?;
        let dense = *id_index
            .get(&id)
            .ok_or_else(|| Error::data(path, row, format!("node id {} not in features file", id)))?
            as usize;
        if seen[dense] {
            return Err(Error::data(
                path,
                row,
                format!("duplicate class row for id {}", id),
            ));
        }
        seen[dense] = true;
        labels[dense] = match record[1].trim() {
            "1" => Label::Illicit,
            "2" => Label::Licit,
            t if t.eq_ignore_ascii_case("unknown") => Label::Unknown,
            t => {
                return Err(Error::data(
                    path,
                    row,
                    format!("unrecognized class token {:?}", t),
                ));
            }
        };
    }
    Ok(labels)
}

fn read_edges(path: &Path, id_index: &HashMap<u64, u32>) -> Result<Vec<(u32, u32)>> {
    let mut reader = open_reader(path)?;
    let mut record = csv::StringRecord::new();
    let mut edges = Vec::new();

    let mut first = true;
    while next_record(&mut reader, &mut record, path)? {
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::data(
                path,
                row,
                format!("expected 2 columns, got {}", record.len()),
            ));
        }
        if first {
            first = false;
            if record[0].trim().parse::<u64>().is_err() {
                continue;
            }
        }
        let src = parse_id(&record[0], path, row)?;
        let dst = parse_id(&record[1], path, row)?;
        let lookup = |id: u64| {
            id_index.get(&id).copied().ok_or_else(|| {
                Error::data(
                    path,
                    row,
                    format!("edge endpoint {} not in features file", id),
                )
            })
        };
        edges.push((lookup(src)?, lookup(dst)?));
    }
    Ok(edges)
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::data(path, 0, format!("{:?}", other)),
        })
}

fn next_record(
    reader: &mut csv::Reader<std::fs::File>,
    record: &mut csv::StringRecord,
    path: &Path,
) -> Result<bool> {
    reader.read_record(record).map_err(|e| {
        let row = e.position().map(|p| p.line()).unwrap_or(0);
        Error::data(path, row, e.to_string())
    })
}

fn parse_id(field: &str, path: &Path, row: u64) -> Result<u64> {
    field
        .trim()
        .parse::<u64>()
        .map_err(|_| Error::data(path, row, format!("invalid node id {:?}", field)))
}

fn parse_time_step(field: &str, path: &Path, row: u64) -> Result<u16> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::data(path, row, format!("invalid time step {:?}", field)))?;
    let rounded = value.round();
    if (value - rounded).abs() > 1e-9 || !(0.0..=u16::MAX as f64).contains(&rounded) {
        return Err(Error::data(
            path,
            row,
            format!("invalid time step {:?}", field),
        ));
    }
    Ok(rounded as u16)
}

/// Structured ingestion summary: counts, label histogram and split sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub nodes: usize,
    pub edges: usize,
    pub undirected_edges: usize,
    pub illicit: usize,
    pub licit: usize,
    pub unknown: usize,
    pub time_step_min: u16,
    pub time_step_max: u16,
    pub splits: SplitCounts,
}

impl DatasetManifest {
    pub fn new(
        graph: &TransactionGraph,
        undirected: &TransactionGraph,
        table: &NodeTable,
        splits: SplitCounts,
    ) -> Self {
        let (illicit, licit, unknown) = table.label_counts();
        let time_step_min = graph.time_steps().iter().copied().min().unwrap_or(0);
        let time_step_max = graph.time_steps().iter().copied().max().unwrap_or(0);
        DatasetManifest {
            nodes: graph.num_nodes(),
            edges: graph.num_edges(),
            undirected_edges: undirected.undirected_pair_count(),
            illicit,
            licit,
            unknown,
            time_step_min,
            time_step_max,
            splits,
        }
    }

    /// True when the headline statistics match the canonical Elliptic release.
    pub fn matches_canonical_elliptic(&self) -> bool {
        self.nodes == 203_769
            && self.edges == 234_355
            && self.illicit == 4_545
            && self.licit == 42_019
            && self.time_step_min == 1
            && self.time_step_max == 49
    }

    /// Key-value text rendering, one `key = value` per line.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: usize| {
            let _ = writeln!(out, "{} = {}", k, v);
        };
        kv("nodes", self.nodes);
        kv("edges", self.edges);
        kv("undirected_edges", self.undirected_edges);
        kv("illicit", self.illicit);
        kv("licit", self.licit);
        kv("unknown", self.unknown);
        kv("time_step_min", self.time_step_min as usize);
        kv("time_step_max", self.time_step_max as usize);
        kv("train_nodes", self.splits.train_total);
        kv("val_nodes", self.splits.val_total);
        kv("test_nodes", self.splits.test_total);
        kv("train_labelled", self.splits.train_labelled);
        kv("val_labelled", self.splits.val_labelled);
        kv("test_labelled", self.splits.test_labelled);
        out
    }
}

/// Writes the stored arcs back out as an external-id edge list.
pub fn export_edgelist(graph: &TransactionGraph, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(graph.num_edges() * 16);
    out.push_str("txId1,txId2\n");
    for (s, t) in graph.edges() {
        let _ = writeln!(out, "{},{}", graph.external_id(s), graph.external_id(t));
    }
    std::fs::write(path, out).map_err(|e| Error::io(PathBuf::from(path), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_splits;
    use std::fs;

    fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, content).unwrap();
        p
    }

    fn feature_row(id: u64, step: u16) -> String {
        let mut row = format!("{},{}", id, step);
        for c in 0..(LOCAL_FEATURES + AGGREGATED_FEATURES) {
            row.push_str(&format!(",{}", c as f64 * 0.1));
        }
        row
    }

    #[test]
    fn loads_toy_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let features = write(
            dir.path(),
            "features.csv",
            &format!(
                "{}\n{}\n{}\n",
                feature_row(7, 1),
                feature_row(13, 2),
                feature_row(2, 41)
            ),
        );
        let classes = write(dir.path(), "classes.csv", "txId,class\n7,2\n13,2\n2,2\n");
        let edges = write(dir.path(), "edges.csv", "txId1,txId2\n7,13\n13,2\n");

        let (graph, table) = load_elliptic(&features, &classes, &edges).unwrap();
        assert_eq!(graph.num_nodes(), 3);
        assert_eq!(graph.num_edges(), 2);
        let (illicit, licit, unknown) = table.label_counts();
        assert_eq!((illicit, licit, unknown), (0, 3, 0));
        assert_eq!(graph.dense_index(7), Some(0));
        assert_eq!(graph.out_neighbors(0), &[1]);
        assert_eq!(graph.in_neighbors(2), &[1]);
    }

    #[test]
    fn rejects_wrong_column_count() {
        let dir = tempfile::tempdir().unwrap();
        let features = write(dir.path(), "features.csv", "1,1,0.5\n");
        let classes = write(dir.path(), "classes.csv", "1,2\n");
        let edges = write(dir.path(), "edges.csv", "");
        let err = load_elliptic(&features, &classes, &edges).unwrap_err();
        match err {
            Error::Data { row, .. } => assert_eq!(row, 1),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn rejects_unknown_edge_endpoint() {
        let dir = tempfile::tempdir().unwrap();
        let features = write(
            dir.path(),
            "features.csv",
            &format!("{}\n", feature_row(1, 1)),
        );
        let classes = write(dir.path(), "classes.csv", "1,unknown\n");
        let edges = write(dir.path(), "edges.csv", "1,99\n");
        let err = load_elliptic(&features, &classes, &edges).unwrap_err();
        assert!(err.to_string().contains("99"));
    }

    #[test]
    fn rejects_duplicate_node_id() {
        let dir = tempfile::tempdir().unwrap();
        let features = write(
            dir.path(),
            "features.csv",
            &format!("{}\n{}\n", feature_row(5, 1), feature_row(5, 2)),
        );
        let classes = write(dir.path(), "classes.csv", "5,1\n");
        let edges = write(dir.path(), "edges.csv", "");
        let err = load_elliptic(&features, &classes, &edges).unwrap_err();
        match err {
            Error::Data { row, message, .. } => {
                assert_eq!(row, 2);
                assert!(message.contains("duplicate"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn edgelist_round_trip_preserves_adjacency() {
        let dir = tempfile::tempdir().unwrap();
        let features_body = format!(
            "{}\n{}\n{}\n",
            feature_row(7, 1),
            feature_row(13, 2),
            feature_row(2, 41)
        );
        let features = write(dir.path(), "features.csv", &features_body);
        let classes = write(dir.path(), "classes.csv", "7,1\n13,2\n2,unknown\n");
        let edges = write(dir.path(), "edges.csv", "7,13\n13,2\n2,7\n7,2\n");

        let (graph, _) = load_elliptic(&features, &classes, &edges).unwrap();
        let exported = dir.path().join("roundtrip.csv");
        export_edgelist(&graph, &exported).unwrap();
        let (reloaded, _) = load_elliptic(&features, &classes, &exported).unwrap();

        assert_eq!(graph.num_edges(), reloaded.num_edges());
        for v in 0..graph.num_nodes() as u32 {
            assert_eq!(graph.out_neighbors(v), reloaded.out_neighbors(v));
            assert_eq!(graph.in_neighbors(v), reloaded.in_neighbors(v));
        }
    }

    #[test]
    fn manifest_reports_counts_and_splits() {
        let dir = tempfile::tempdir().unwrap();
        let features = write(
            dir.path(),
            "features.csv",
            &format!(
                "{}\n{}\n{}\n",
                feature_row(7, 1),
                feature_row(13, 31),
                feature_row(2, 41)
            ),
        );
        let classes = write(dir.path(), "classes.csv", "7,1\n13,2\n2,unknown\n");
        let edges = write(dir.path(), "edges.csv", "7,13\n13,2\n");
        let (graph, table) = load_elliptic(&features, &classes, &edges).unwrap();
        let (_, counts) = make_splits(&graph, &table).unwrap();
        let undirected = graph.undirected_view();
        let manifest = DatasetManifest::new(&graph, &undirected, &table, counts);
        assert_eq!(manifest.nodes, 3);
        assert_eq!(manifest.undirected_edges, 2);
        assert!(!manifest.matches_canonical_elliptic());
        assert!(manifest.to_kv().contains("train_labelled = 1"));
    }
}
