//! Dataset ingestion: canonical edge lists, label files, node dictionaries and
//! the Cora converter.
//!
//! The canonical edge list has one edge per line, `u v [w]`, whitespace
//! separated, with `#` starting a comment. Node tokens are original dataset
//! ids; the loader maps them to dense ids through a [`NodeDictionary`].

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::ClassId;
use crate::graph::{Edge, Graph, GraphError, NodeId};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: label for unknown node `{node}`")]
    DanglingLabel { line: usize, node: String },
    #[error("line {line}: node `{node}` is not in the dictionary")]
    UnknownNode { line: usize, node: String },
    #[error("line {line}: node `{node}` has two labels")]
    DuplicateLabel { line: usize, node: String },
    #[error("no edges found")]
    Empty,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn open(path: &Path) -> Result<BufReader<File>, DatasetError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

/// Bijection between original dataset ids and dense node ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeDictionary {
    ids: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl NodeDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Dense ids in the order given.
    pub fn from_ids<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut d = Self::new();
        for id in ids {
            d.insert(&id.into());
        }
        d
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dense(&self, original: &str) -> Option<NodeId> {
        self.index.get(original).copied()
    }

    pub fn original(&self, dense: NodeId) -> &str {
        &self.ids[dense]
    }

    pub fn originals(&self) -> &[String] {
        &self.ids
    }

    /// Returns the dense id of `original`, assigning the next one if new.
    pub fn insert(&mut self, original: &str) -> NodeId {
        if let Some(&v) = self.index.get(original) {
            return v;
        }
        let v = self.ids.len();
        self.ids.push(original.to_string());
        self.index.insert(original.to_string(), v);
        v
    }

    /// `original_id dense_id` per line.
    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (v, id) in self.ids.iter().enumerate() {
            writeln!(out, "{id} {v}")?;
        }
        Ok(())
    }

    /// Reads `original_id dense_id` lines; dense ids must be `0..n` without gaps.
    pub fn read<R: BufRead>(reader: R) -> Result<Self, DatasetError> {
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| DatasetError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
            let Some(fields) = fields(&line) else { continue };
            if fields.len() != 2 {
                return Err(malformed(line_no, "expected `original_id dense_id`"));
            }
            let dense: NodeId = fields[1]
                .parse()
                .map_err(|_| malformed(line_no, "dense id is not a non-negative integer"))?;
            pairs.push((dense, fields[0].to_string(), line_no));
        }
        pairs.sort_by_key(|p| p.0);
        let mut d = Self::new();
        for (expected, (dense, id, line_no)) in pairs.into_iter().enumerate() {
            if dense != expected || d.dense(&id).is_some() {
                return Err(malformed(line_no, "dense ids must be unique and contiguous from 0"));
            }
            d.insert(&id);
        }
        Ok(d)
    }
}

fn malformed(line: usize, message: &str) -> DatasetError {
    DatasetError::Malformed {
        line,
        message: message.to_string(),
    }
}

/// Whitespace fields of a line with any `#` comment removed; `None` if blank.
fn fields(line: &str) -> Option<Vec<&str>> {
    let content = line.split('#').next().unwrap_or("");
    let f: Vec<&str> = content.split_whitespace().collect();
    (!f.is_empty()).then_some(f)
}

/// Counts reported by the loader.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    /// Edge lines read, including duplicates and self-loops.
    pub edge_lines: usize,
    /// Undirected edges kept after deduplication.
    pub unique_edges: usize,
    pub duplicate_edges: usize,
    pub self_loops: usize,
    pub nodes: usize,
    pub isolated_nodes: usize,
    pub labeled_nodes: usize,
    pub classes: usize,
}

/// Parsed edge list before graph construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub edges: Vec<Edge>,
    pub edge_lines: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

/// Reads a canonical edge list. With `grow`, unseen nodes are added to the
/// dictionary in order of first appearance; otherwise they are an error.
/// Either direction of an already-seen edge is dropped as a duplicate.
pub fn read_edge_list<R: BufRead>(
    reader: R,
    dict: &mut NodeDictionary,
    grow: bool,
) -> Result<EdgeList, DatasetError> {
    let mut seen = std::collections::HashSet::new();
    let mut out = EdgeList {
        edges: Vec::new(),
        edge_lines: 0,
        duplicates: 0,
        self_loops: 0,
    };
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DatasetError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let Some(f) = fields(&line) else { continue };
        if f.len() != 2 && f.len() != 3 {
            return Err(malformed(line_no, "expected `u v [w]`"));
        }
        let weight = match f.get(2) {
            Some(w) => w
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite() && *w > 0.0)
                .ok_or_else(|| malformed(line_no, "weight must be a positive number"))?,
            None => 1.0,
        };
        let mut id = |tok: &str| -> Result<NodeId, DatasetError> {
            match dict.dense(tok) {
                Some(v) => Ok(v),
                None if grow => Ok(dict.insert(tok)),
                None => Err(DatasetError::UnknownNode {
                    line: line_no,
                    node: tok.to_string(),
                }),
            }
        };
        let (u, v) = (id(f[0])?, id(f[1])?);
        out.edge_lines += 1;
        if u == v {
            out.self_loops += 1;
            continue;
        }
        if !seen.insert((u.min(v), u.max(v))) {
            out.duplicates += 1;
            continue;
        }
        out.edges.push(Edge::new(u.min(v), u.max(v), weight));
    }
    if out.edges.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(out)
}

/// Reads `node_id class` lines. Class tokens get dense ids in order of first
/// appearance, returned alongside the per-node labels.
pub fn read_labels<R: BufRead>(
    reader: R,
    dict: &NodeDictionary,
) -> Result<(Vec<Option<ClassId>>, Vec<String>), DatasetError> {
    let mut labels = vec![None; dict.len()];
    let mut classes: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, ClassId> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DatasetError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let Some(f) = fields(&line) else { continue };
        if f.len() != 2 {
            return Err(malformed(line_no, "expected `node_id class`"));
        }
        let v = dict.dense(f[0]).ok_or_else(|| DatasetError::DanglingLabel {
            line: line_no,
            node: f[0].to_string(),
        })?;
        let next = classes.len();
        let c = *class_index.entry(f[1].to_string()).or_insert_with(|| {
            classes.push(f[1].to_string());
            next
        });
        if labels[v].replace(c).is_some() {
            return Err(DatasetError::DuplicateLabel {
                line: line_no,
                node: f[0].to_string(),
            });
        }
    }
    Ok((labels, classes))
}

/// Paths of one dataset in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetBundle {
    pub name: String,
    pub edges: PathBuf,
    pub labels: Option<PathBuf>,
    /// When given it fixes the node set and dense ids.
    pub dictionary: Option<PathBuf>,
}

impl DatasetBundle {
    /// `edges.txt`, `labels.txt` and `nodes.txt` inside `dir`; the latter two
    /// are used only if present.
    pub fn from_dir(name: &str, dir: &Path) -> Self {
        let opt = |f: &str| Some(dir.join(f)).filter(|p| p.exists());
        DatasetBundle {
            name: name.to_string(),
            edges: dir.join("edges.txt"),
            labels: opt("labels.txt"),
            dictionary: opt("nodes.txt"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub labels: Vec<Option<ClassId>>,
    pub classes: Vec<String>,
    pub dictionary: NodeDictionary,
    pub stats: LoadStats,
}

pub fn load_dataset(bundle: &DatasetBundle) -> Result<Dataset, DatasetError> {
    let (mut dict, grow) = match &bundle.dictionary {
        Some(p) => (NodeDictionary::read(open(p)?)?, false),
        None => (NodeDictionary::new(), true),
    };
    let list = read_edge_list(open(&bundle.edges)?, &mut dict, grow)?;
    let (labels, classes) = match &bundle.labels {
        Some(p) => read_labels(open(p)?, &dict)?,
        None => (vec![None; dict.len()], Vec::new()),
    };
    assemble(&bundle.name, dict, list, labels, classes)
}

fn assemble(
    name: &str,
    dictionary: NodeDictionary,
    list: EdgeList,
    labels: Vec<Option<ClassId>>,
    classes: Vec<String>,
) -> Result<Dataset, DatasetError> {
    let graph = Graph::from_edges(dictionary.len(), list.edges.iter().copied())?;
    let stats = LoadStats {
        edge_lines: list.edge_lines,
        unique_edges: graph.edge_count(),
        duplicate_edges: list.duplicates,
        self_loops: list.self_loops,
        nodes: graph.node_count(),
        isolated_nodes: graph.isolated_nodes().count(),
        labeled_nodes: labels.iter().flatten().count(),
        classes: classes.len(),
    };
    if stats.isolated_nodes > 0 {
        log::warn!("{name}: {} isolated nodes", stats.isolated_nodes);
    }
    Ok(Dataset {
        name: name.to_string(),
        graph,
        labels,
        classes,
        dictionary,
        stats,
    })
}

/// Result of converting a raw dataset into canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct Converted {
    pub dictionary: NodeDictionary,
    /// Edges in original ids, as listed in the raw file.
    pub edges: Vec<(String, String)>,
    pub labels: Vec<(String, String)>,
    /// Raw edges dropped because an endpoint has no content row.
    pub dropped_edges: usize,
}

impl Converted {
    pub fn write_edges<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn write_labels<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (v, c) in &self.labels {
            writeln!(out, "{v} {c}")?;
        }
        Ok(())
    }
}

/// Converts the raw Cora files: `cora.content` rows are
/// `id feature... class` and `cora.cites` rows are `cited citing`.
/// Dense ids follow the content row order.
pub fn convert_cora<C: BufRead, E: BufRead>(content: C, cites: E) -> Result<Converted, DatasetError> {
    let mut dictionary = NodeDictionary::new();
    let mut labels = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DatasetError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        if f.len() < 2 {
            return Err(malformed(line_no, "content row needs an id and a class"));
        }
        if dictionary.dense(f[0]).is_some() {
            return Err(malformed(line_no, "duplicate content id"));
        }
        dictionary.insert(f[0]);
        labels.push((f[0].to_string(), f[f.len() - 1].to_string()));
    }
    let mut edges = Vec::new();
    let mut dropped_edges = 0;
    for (i, line) in cites.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DatasetError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.len() {
            0 => continue,
            2 => {}
            _ => return Err(malformed(line_no, "cites row needs two ids")),
        }
        if dictionary.dense(f[0]).is_none() || dictionary.dense(f[1]).is_none() {
            dropped_edges += 1;
            continue;
        }
        edges.push((f[0].to_string(), f[1].to_string()));
    }
    if edges.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(Converted {
        dictionary,
        edges,
        labels,
        dropped_edges,
    })
}

/// Reads `cora.content` and `cora.cites` from `dir`.
pub fn convert_cora_dir(dir: &Path) -> Result<Converted, DatasetError> {
    convert_cora(open(&dir.join("cora.content"))?, open(&dir.join("cora.cites"))?)
}

/// Loads a dataset directory in canonical form (`edges.txt`, optional
/// `labels.txt` and `nodes.txt`) or, failing that, raw Cora files.
pub fn load_dir(dir: &Path) -> Result<Dataset, DatasetError> {
    let name = dir
        .file_name()
        .map_or_else(|| "dataset".to_string(), |n| n.to_string_lossy().into_owned());
    if dir.join("edges.txt").exists() || !dir.join("cora.cites").exists() {
        return load_dataset(&DatasetBundle::from_dir(&name, dir));
    }
    let conv = convert_cora_dir(dir)?;
    let mut edge_text = Vec::new();
    let mut label_text = Vec::new();
    conv.write_edges(&mut edge_text).expect("in-memory write");
    conv.write_labels(&mut label_text).expect("in-memory write");
    let mut dict = conv.dictionary;
    let list = read_edge_list(&edge_text[..], &mut dict, false)?;
    let (labels, classes) = read_labels(&label_text[..], &dict)?;
    assemble(&name, dict, list, labels, classes)
}
