//! File emitters: corpus files, graph renderings, scatter tables, and an
//! all-or-nothing output writer.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cluster::{ClusterLabels, Label, ReducedCoordinates};
use crate::corpus::{Corpus, CorpusFormat, Issue, CSV_COLUMNS};
use crate::error::{Error, Result};
use crate::graph::{PageRankResult, SimilarityGraph};

/// Serializes a corpus in the same layout `load_corpus` reads.
pub fn write_corpus(corpus: &Corpus, format: CorpusFormat) -> Result<String> {
    match format {
        CorpusFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| Error::Format(format!("corpus CSV: {e}"));
            w.write_record(CSV_COLUMNS).map_err(err)?;
            for i in &corpus.issues {
                w.write_record([&i.id, &i.working_group, &i.title, &i.description])
                    .map_err(err)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::Format(format!("corpus CSV: {e}")))?;
            Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
        }
        CorpusFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                issues: &'a [Issue],
            }
            let mut s = serde_json::to_string_pretty(&Doc {
                issues: &corpus.issues,
            })
            .expect("corpus serializes");
            s.push('\n');
            Ok(s)
        }
    }
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Mean node width in inches; a node's width scales with its importance.
const MEAN_NODE_WIDTH: f64 = 0.75;
/// Pen width of an edge with similarity 1.
const MAX_PEN_WIDTH: f64 = 4.0;

struct NodeStyle {
    id: String,
    working_group: String,
    importance: f64,
    width: f64,
    color: &'static str,
}

fn node_styles(graph: &SimilarityGraph, pr: &PageRankResult, corpus: &Corpus) -> Vec<NodeStyle> {
    let groups: BTreeSet<&str> = corpus
        .issues
        .iter()
        .map(|i| i.working_group.as_str())
        .collect();
    let groups: Vec<&str> = groups.into_iter().collect();
    let n = graph.len() as f64;
    graph
        .nodes()
        .iter()
        .map(|id| {
            let wg = corpus
                .get(id)
                .map(|i| i.working_group.clone())
                .unwrap_or_default();
            let slot = groups.iter().position(|g| *g == wg).unwrap_or(0);
            let importance = pr.scores.get(id).copied().unwrap_or(0.0);
            NodeStyle {
                id: id.clone(),
                working_group: wg,
                importance,
                width: importance * n * MEAN_NODE_WIDTH,
                color: PALETTE[slot % PALETTE.len()],
            }
        })
        .collect()
}

fn pen_width(weight: f64) -> f64 {
    weight.max(0.0) * MAX_PEN_WIDTH
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: node width follows importance, fill color follows
/// working group, edge pen width follows similarity.
pub fn graph_to_dot(graph: &SimilarityGraph, pr: &PageRankResult, corpus: &Corpus) -> String {
    let mut out = String::from("digraph similarity {\n");
    out.push_str("  node [shape=circle, style=filled, fixedsize=true, fontsize=10];\n");
    for s in node_styles(graph, pr, corpus) {
        let _ = writeln!(
            out,
            "  \"{id}\" [label=\"{id}\", width={w:.4}, color=\"{c}\", fillcolor=\"{c}\", \
             working_group=\"{wg}\", importance={imp:.6}];",
            id = dot_escape(&s.id),
            w = s.width,
            c = s.color,
            wg = dot_escape(&s.working_group),
            imp = s.importance,
        );
    }
    for e in graph.edges() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [weight={:.6}, penwidth={:.4}];",
            dot_escape(&graph.nodes()[e.src]),
            dot_escape(&graph.nodes()[e.dst]),
            e.weight,
            pen_width(e.weight)
        );
    }
    out.push_str("}\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// GraphML rendering with the same attributes as [`graph_to_dot`].
pub fn graph_to_graphml(graph: &SimilarityGraph, pr: &PageRankResult, corpus: &Corpus) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n\
         \x20 <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n\
         \x20 <key id=\"working_group\" for=\"node\" attr.name=\"working_group\" attr.type=\"string\"/>\n\
         \x20 <key id=\"importance\" for=\"node\" attr.name=\"importance\" attr.type=\"double\"/>\n\
         \x20 <key id=\"width\" for=\"node\" attr.name=\"width\" attr.type=\"double\"/>\n\
         \x20 <key id=\"color\" for=\"node\" attr.name=\"color\" attr.type=\"string\"/>\n\
         \x20 <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n\
         \x20 <key id=\"penwidth\" for=\"edge\" attr.name=\"penwidth\" attr.type=\"double\"/>\n\
         \x20 <graph id=\"similarity\" edgedefault=\"directed\">\n",
    );
    for s in node_styles(graph, pr, corpus) {
        let id = xml_escape(&s.id);
        let _ = writeln!(out, "    <node id=\"{id}\">");
        let _ = writeln!(out, "      <data key=\"label\">{id}</data>");
        let _ = writeln!(
            out,
            "      <data key=\"working_group\">{}</data>",
            xml_escape(&s.working_group)
        );
        let _ = writeln!(
            out,
            "      <data key=\"importance\">{:.6}</data>",
            s.importance
        );
        let _ = writeln!(out, "      <data key=\"width\">{:.4}</data>", s.width);
        let _ = writeln!(out, "      <data key=\"color\">{}</data>", s.color);
        out.push_str("    </node>\n");
    }
    for (k, e) in graph.edges().iter().enumerate() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{k}\" source=\"{}\" target=\"{}\">",
            xml_escape(&graph.nodes()[e.src]),
            xml_escape(&graph.nodes()[e.dst])
        );
        let _ = writeln!(out, "      <data key=\"weight\">{:.6}</data>", e.weight);
        let _ = writeln!(
            out,
            "      <data key=\"penwidth\">{:.4}</data>",
            pen_width(e.weight)
        );
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// `id,x,y,cluster,working_group`; noise points get cluster `-1`.
pub fn scatter_csv(
    coords: &ReducedCoordinates,
    labels: &ClusterLabels,
    corpus: &Corpus,
) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Format(format!("scatter CSV: {e}"));
    w.write_record(["id", "x", "y", "cluster", "working_group"])
        .map_err(err)?;
    for (id, row) in coords.ids.iter().zip(&coords.coords) {
        let cluster = match labels.labels.get(id) {
            Some(Label::Cluster(c)) => c.to_string(),
            Some(Label::Noise) => "-1".to_string(),
            None => return Err(Error::Validation(format!("no cluster label for {id:?}"))),
        };
        let wg = corpus
            .get(id)
            .map(|i| i.working_group.as_str())
            .unwrap_or("");
        let x = row.first().copied().unwrap_or(0.0);
        let y = row.get(1).copied().unwrap_or(0.0);
        w.write_record([id.as_str(), &x.to_string(), &y.to_string(), &cluster, wg])
            .map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Format(format!("scatter CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("UTF-8"))
}

/// Files staged in memory and written together: either every file lands in
/// the output directory or none does.
#[derive(Debug, Default)]
pub struct OutputBatch {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file to a temporary name in `dir`, then renames them into
    /// place. Already renamed files are removed again if a later rename fails.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let mut tmp = tempfile::Builder::new()
                .prefix(".partial-")
                .tempfile_in(dir)
                .map_err(|e| Error::io(dir, e))?;
            tmp.write_all(contents)
                .and_then(|_| tmp.flush())
                .map_err(|e| Error::io(tmp.path(), e))?;
            staged.push((tmp, dir.join(name)));
        }
        let mut done: Vec<PathBuf> = Vec::with_capacity(staged.len());
        for (tmp, target) in staged {
            if let Err(e) = tmp.persist(&target) {
                for p in &done {
                    let _ = fs::remove_file(p);
                }
                return Err(Error::io(&target, e.error));
            }
            done.push(target);
        }
        Ok(done)
    }
}
