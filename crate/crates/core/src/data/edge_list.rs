//! Whitespace edge lists: one `src dst` pair of integer ids per line, `#` comments.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use indexmap::{IndexMap, IndexSet};

use super::{DataError, Preset};
use crate::model::DicNetwork;

/// How each listed pair becomes directed edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Directedness {
    /// `u v` gives `u → v`.
    #[default]
    AsIs,
    /// `u v` gives both `u → v` and `v → u`.
    Reciprocate,
    /// `u v` gives `v → u`.
    Reverse,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeListSpec {
    pub path: PathBuf,
    pub directedness: Directedness,
}

/// Parses an edge list into a dense topology: ids are renumbered in order of first
/// appearance, self-loops dropped and repeated edges kept once.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    mode: Directedness,
) -> Result<(usize, Vec<(usize, usize)>), DataError> {
    let mut ids: IndexMap<u64, usize> = IndexMap::new();
    let mut edges: IndexSet<(usize, usize)> = IndexSet::new();
    let mut intern = |raw: u64| {
        let next = ids.len();
        *ids.entry(raw).or_insert(next)
    };
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DataError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let [a, b] = tokens[..] else {
            return Err(DataError::Parse {
                line: line_no,
                message: format!("expected two node ids, found {} tokens", tokens.len()),
            });
        };
        let parse = |t: &str| {
            t.parse::<u64>().map_err(|_| DataError::Parse {
                line: line_no,
                message: format!("`{t}` is not a non-negative integer id"),
            })
        };
        let (u, v) = (parse(a)?, parse(b)?);
        let (u, v) = (intern(u), intern(v));
        if u == v {
            continue;
        }
        match mode {
            Directedness::AsIs => {
                edges.insert((u, v));
            }
            Directedness::Reverse => {
                edges.insert((v, u));
            }
            Directedness::Reciprocate => {
                edges.insert((u, v));
                edges.insert((v, u));
            }
        }
    }
    if edges.is_empty() {
        return Err(DataError::Empty);
    }
    Ok((ids.len(), edges.into_iter().collect()))
}

/// Reads an edge list and applies `preset` to every node and edge.
pub fn load_edge_list(
    spec: &EdgeListSpec,
    preset: &Preset,
    budget: usize,
) -> Result<DicNetwork, DataError> {
    let file = File::open(&spec.path).map_err(|e| DataError::io(&spec.path, e))?;
    let (nodes, edges) = parse_edge_list(BufReader::new(file), spec.directedness)?;
    preset.apply(nodes, budget, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Propagation;
    use crate::model::{NodeId, Violation};

    fn parse(text: &str, mode: Directedness) -> Result<(usize, Vec<(usize, usize)>), DataError> {
        parse_edge_list(text.as_bytes(), mode)
    }

    #[test]
    fn duplicates_collapse() {
        let (n, edges) = parse("0 1\n1 2\n0 1\n", Directedness::AsIs).unwrap();
        assert_eq!(n, 3);
        assert_eq!(edges, [(0, 1), (1, 2)]);
    }

    #[test]
    fn reciprocate_adds_both_directions() {
        let (_, edges) = parse("5 9\n", Directedness::Reciprocate).unwrap();
        assert_eq!(edges, [(0, 1), (1, 0)]);
    }

    #[test]
    fn reverse_flips() {
        let (_, edges) = parse("5 9\n9 7\n", Directedness::Reverse).unwrap();
        assert_eq!(edges, [(1, 0), (2, 1)]);
    }

    #[test]
    fn ids_remap_in_first_seen_order() {
        let (n, edges) = parse("# header\n\n100 7\n  7\t42  \n", Directedness::AsIs).unwrap();
        assert_eq!(n, 3);
        assert_eq!(edges, [(0, 1), (1, 2)]);
    }

    #[test]
    fn self_loops_dropped() {
        let (n, edges) = parse("1 1\n1 2\n", Directedness::Reciprocate).unwrap();
        assert_eq!(n, 2);
        assert_eq!(edges, [(0, 1), (1, 0)]);
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let err = parse("0 1\n# c\n1 x\n", Directedness::AsIs).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 3, .. }), "{err}");
        let err = parse("0 1 2\n", Directedness::AsIs).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 1, .. }));
        let err = parse("-1 2\n", Directedness::AsIs).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_graph_rejected() {
        assert!(matches!(
            parse("# nothing\n3 3\n", Directedness::AsIs),
            Err(DataError::Empty)
        ));
    }

    #[test]
    fn load_applies_preset_and_checks_budget() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        std::fs::write(&path, "0 1\n1 2\n").unwrap();
        let spec = EdgeListSpec {
            path: path.clone(),
            directedness: Directedness::Reciprocate,
        };
        let preset = Preset::new(Propagation::Fixed(0.1), 0.5);
        let net = load_edge_list(&spec, &preset, 2).unwrap();
        assert_eq!((net.node_count(), net.edge_count()), (3, 4));
        assert!(net.find_edge(NodeId(2), NodeId(1)).is_some());
        assert!(matches!(
            load_edge_list(&spec, &preset, 4),
            Err(DataError::Network(Violation::BudgetExceedsNodes { .. }))
        ));
        let missing = EdgeListSpec {
            path: dir.path().join("nope.txt"),
            directedness: Directedness::AsIs,
        };
        assert!(matches!(
            load_edge_list(&missing, &preset, 1),
            Err(DataError::Io { .. })
        ));
    }

    #[test]
    fn ingestion_is_deterministic() {
        let text = "3 1\n1 4\n4 1\n5 9\n2 6\n5 3\n";
        assert_eq!(
            parse(text, Directedness::Reciprocate).unwrap(),
            parse(text, Directedness::Reciprocate).unwrap()
        );
    }
}
