//! The `consolidate` command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cluster::{analyze_cluster, Reducer};
use crate::compare::best_match_report;
use crate::config::{MethodSelection, ProviderConfig, ProviderKind, RunConfig};
use crate::corpus::{synth_corpus, Corpus, CorpusFormat};
use crate::embeddings::{embed_corpus, embeddings_to_json, EmbeddingSet};
use crate::error::{Error, Result};
use crate::export::{graph_to_dot, graph_to_graphml, scatter_csv, write_corpus, OutputBatch};
use crate::graph::analyze_graph;
use crate::grouping::{Grouping, Method};
use crate::report::markdown_report;
use crate::similarity::similarity_matrix;

#[derive(Debug, Parser)]
#[command(
    name = "consolidate",
    version,
    about = "Group issue statements by semantic similarity"
)]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for the bag-of-words hash and the synthetic generator
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed every issue of a corpus and write embeddings.json.
    Embed {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Group a corpus with the graph method, the cluster method, or both.
    Group {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        provider: ProviderArgs,
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Compare two groupings by best-match overlap.
    Compare {
        grouping_a: PathBuf,
        grouping_b: PathBuf,
    },
    /// Write a markdown report of a grouping.
    Report {
        #[arg(long, value_name = "PATH")]
        grouping: PathBuf,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Generate a synthetic corpus with planted topics.
    Synth {
        /// Issues per topic, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Probability of swapping a word for one shared across topics.
        #[arg(long, default_value_t = 0.0)]
        overlap: f64,
        #[arg(long, default_value_t = CorpusFormat::Csv)]
        format: CorpusFormat,
    },
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Issue corpus, CSV or JSON
    #[arg(long, value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    /// csv or json; guessed from the extension by default.
    #[arg(long)]
    pub format: Option<CorpusFormat>,
}

#[derive(Debug, Args)]
pub struct ProviderArgs {
    #[arg(long, value_enum)]
    pub provider: Option<ProviderKind>,
    /// Bag-of-words dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Embeddings JSON served by the file provider.
    #[arg(long, value_name = "PATH")]
    pub embeddings: Option<PathBuf>,
    /// Base URL of the embedding service.
    #[arg(long)]
    pub url: Option<String>,
    /// Model name sent to the embedding service
    #[arg(long)]
    pub model: Option<String>,
    /// Per-request timeout for the embedding service
    #[arg(long, value_name = "SECS")]
    pub timeout_secs: Option<f64>,
    /// Texts per embedding request
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodSelection>,
    /// PCA target dimensions, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "coords")]
    pub stages: Option<Vec<usize>>,
    /// Reduced coordinates JSON to cluster instead of running PCA.
    #[arg(long, value_name = "PATH")]
    pub coords: Option<PathBuf>,
    /// HDBSCAN minimum cluster size
    #[arg(long)]
    pub min_cluster_size: Option<usize>,
    /// HDBSCAN neighbourhood size for core distances, counting the point itself
    #[arg(long)]
    pub min_samples: Option<usize>,
    /// PageRank damping factor
    #[arg(long)]
    pub damping: Option<f64>,
    /// PageRank L1 convergence tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// PageRank iteration cap
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Also write the full similarity matrix as similarity.csv.
    #[arg(long)]
    pub similarity: bool,
}

impl CorpusArgs {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(p) = &self.corpus {
            config.corpus = Some(p.clone());
            config.format = None;
        }
        if let Some(f) = self.format {
            config.format = Some(f);
        }
    }
}

impl ProviderArgs {
    fn apply(&self, config: &mut RunConfig) -> Result<()> {
        let kind = self.provider.unwrap_or(config.provider.kind());
        if kind != config.provider.kind() {
            config.provider = match kind {
                ProviderKind::Bow => ProviderConfig::default(),
                ProviderKind::File => ProviderConfig::File {
                    path: self.embeddings.clone().ok_or_else(|| {
                        Error::Argument("the file provider needs --embeddings".into())
                    })?,
                },
                ProviderKind::Http => ProviderConfig::Http {
                    url: self
                        .url
                        .clone()
                        .ok_or_else(|| Error::Argument("the http provider needs --url".into()))?,
                    model_name: String::new(),
                    timeout_secs: 30.0,
                    batch_size: crate::embeddings::DEFAULT_BATCH_SIZE,
                },
            };
        }
        let misplaced = |flag: &str| {
            Error::Argument(
                format!("{flag} does not apply to the {kind:?} provider").to_lowercase(),
            )
        };
        match &mut config.provider {
            ProviderConfig::Bow { dim } => {
                if let Some(d) = self.dim {
                    *dim = d;
                }
                for (set, flag) in [
                    (self.embeddings.is_some(), "--embeddings"),
                    (self.url.is_some(), "--url"),
                    (self.model.is_some(), "--model"),
                    (self.timeout_secs.is_some(), "--timeout-secs"),
                    (self.batch_size.is_some(), "--batch-size"),
                ] {
                    if set {
                        return Err(misplaced(flag));
                    }
                }
            }
            ProviderConfig::File { path } => {
                if let Some(p) = &self.embeddings {
                    *path = p.clone();
                }
                for (set, flag) in [
                    (self.dim.is_some(), "--dim"),
                    (self.url.is_some(), "--url"),
                    (self.model.is_some(), "--model"),
                    (self.timeout_secs.is_some(), "--timeout-secs"),
                    (self.batch_size.is_some(), "--batch-size"),
                ] {
                    if set {
                        return Err(misplaced(flag));
                    }
                }
            }
            ProviderConfig::Http {
                url,
                model_name,
                timeout_secs,
                batch_size,
            } => {
                if let Some(u) = &self.url {
                    *url = u.clone();
                }
                if let Some(m) = &self.model {
                    *model_name = m.clone();
                }
                if let Some(t) = self.timeout_secs {
                    *timeout_secs = t;
                }
                if let Some(b) = self.batch_size {
                    *batch_size = b;
                }
                for (set, flag) in [
                    (self.dim.is_some(), "--dim"),
                    (self.embeddings.is_some(), "--embeddings"),
                ] {
                    if set {
                        return Err(misplaced(flag));
                    }
                }
            }
        }
        Ok(())
    }
}

impl GroupArgs {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(m) = self.method {
            config.method = m;
        }
        if let Some(s) = &self.stages {
            config.reducer = Reducer::Pca { stages: s.clone() };
        }
        if let Some(p) = &self.coords {
            config.reducer = Reducer::External { path: p.clone() };
        }
        if let Some(v) = self.min_cluster_size {
            config.hdbscan.min_cluster_size = v;
        }
        if let Some(v) = self.min_samples {
            config.hdbscan.min_samples = v;
        }
        if let Some(v) = self.damping {
            config.pagerank.damping = v;
        }
        if let Some(v) = self.tol {
            config.pagerank.tol = v;
        }
        if let Some(v) = self.max_iter {
            config.pagerank.max_iter = v;
        }
    }
}

impl Cli {
    /// The effective configuration: the config file (or defaults) with the
    /// command's flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(o) = &self.out {
            config.out = o.clone();
        }
        match &self.command {
            Command::Embed { corpus, provider } => {
                corpus.apply(&mut config);
                provider.apply(&mut config)?;
            }
            Command::Group {
                corpus,
                provider,
                group,
            } => {
                corpus.apply(&mut config);
                provider.apply(&mut config)?;
                group.apply(&mut config);
            }
            Command::Report { corpus, .. } => corpus.apply(&mut config),
            Command::Compare { .. } | Command::Synth { .. } => {}
        }
        Ok(config)
    }
}

/// What a successful command reports: a human-readable summary and the
/// files it wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Runs a parsed command line. Output files are written only if the whole
/// command succeeds.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let config = cli.resolve()?;
    config.check_out_dir()?;
    let (summary, batch) = match &cli.command {
        Command::Embed { .. } => cmd_embed(&config)?,
        Command::Group { group, .. } => cmd_group(&config, group.similarity)?,
        Command::Compare {
            grouping_a,
            grouping_b,
        } => cmd_compare(grouping_a, grouping_b)?,
        Command::Report { grouping, .. } => cmd_report(&config, grouping)?,
        Command::Synth {
            sizes,
            overlap,
            format,
        } => cmd_synth(sizes, *overlap, *format, config.seed)?,
    };
    let files = batch.commit(&config.out)?;
    Ok(Outcome { summary, files })
}

fn embed(config: &RunConfig) -> Result<(Corpus, EmbeddingSet)> {
    let corpus = config.load_corpus()?;
    let provider = config.provider.build(config.seed)?;
    let set = embed_corpus(&corpus, provider.as_ref())?;
    Ok((corpus, set))
}

pub fn cmd_embed(config: &RunConfig) -> Result<(String, OutputBatch)> {
    let (corpus, set) = embed(config)?;
    let summary = format!(
        "embedded {} issues from {}: dim {}, model {}\n",
        corpus.len(),
        corpus.source,
        set.dim(),
        set.model_name()
    );
    let mut batch = OutputBatch::new();
    batch.add("embeddings.json", embeddings_to_json(&set));
    Ok((summary, batch))
}

pub fn cmd_group(config: &RunConfig, write_similarity: bool) -> Result<(String, OutputBatch)> {
    let (corpus, set) = embed(config)?;
    corpus.require_groupable()?;
    let mut summary = String::new();
    let mut batch = OutputBatch::new();
    for method in config.method.methods() {
        match method {
            Method::Graph => {
                let matrix = similarity_matrix(&set)?;
                let analysis = analyze_graph(&matrix, &config.pagerank)?;
                let _ = writeln!(
                    summary,
                    "graph: {} groups; PageRank {} after {} iterations",
                    analysis.grouping.groups.len(),
                    if analysis.pagerank.converged {
                        "converged"
                    } else {
                        "stopped"
                    },
                    analysis.pagerank.iterations
                );
                batch.add("grouping_graph.json", analysis.grouping.to_json());
                batch.add(
                    "graph.dot",
                    graph_to_dot(&analysis.graph, &analysis.pagerank, &corpus),
                );
                batch.add(
                    "graph.graphml",
                    graph_to_graphml(&analysis.graph, &analysis.pagerank, &corpus),
                );
            }
            Method::Cluster => {
                let analysis =
                    analyze_cluster(&set, &config.reducer, &config.hdbscan, config.seed)?;
                for w in &analysis.coords.warnings {
                    log::warn!("{w}");
                }
                let _ = writeln!(
                    summary,
                    "cluster: {} groups, {} unassigned ({})",
                    analysis.grouping.groups.len(),
                    analysis.grouping.noise.len(),
                    analysis.coords.reducer
                );
                batch.add("grouping_cluster.json", analysis.grouping.to_json());
                batch.add("reduced.json", analysis.coords.to_json());
                batch.add(
                    "scatter.csv",
                    scatter_csv(&analysis.coords, &analysis.labels, &corpus)?,
                );
            }
        }
    }
    if write_similarity {
        let mut csv = Vec::new();
        similarity_matrix(&set)?.write_csv(&mut csv)?;
        batch.add("similarity.csv", csv);
    }
    Ok((summary, batch))
}

pub fn cmd_compare(a: &Path, b: &Path) -> Result<(String, OutputBatch)> {
    let ga = Grouping::load(a)?;
    let gb = Grouping::load(b)?;
    let report = best_match_report(&ga, &gb)?;
    let md = report.markdown(&ga, &gb);
    let mut batch = OutputBatch::new();
    batch.add("overlap.json", report.to_json());
    batch.add("histogram.csv", report.histogram_csv());
    batch.add("compare.md", md.clone());
    Ok((md, batch))
}

pub fn cmd_report(config: &RunConfig, grouping: &Path) -> Result<(String, OutputBatch)> {
    let g = Grouping::load(grouping)?;
    let corpus = config.load_corpus()?;
    let md = markdown_report(&g, &corpus)?;
    let summary = format!("report on {} groups of {}\n", g.groups.len(), corpus.source);
    let mut batch = OutputBatch::new();
    batch.add("report.md", md);
    Ok((summary, batch))
}

pub fn cmd_synth(
    sizes: &[usize],
    overlap: f64,
    format: CorpusFormat,
    seed: u64,
) -> Result<(String, OutputBatch)> {
    let (corpus, planted) = synth_corpus(sizes.len(), sizes, overlap, seed)?;
    let summary = format!(
        "synthesized {} issues in {} topics (seed {seed})\n",
        corpus.len(),
        sizes.len()
    );
    let mut batch = OutputBatch::new();
    batch.add(format!("corpus.{format}"), write_corpus(&corpus, format)?);
    let mut labels = serde_json::to_string_pretty(&planted).expect("labels serialize");
    labels.push('\n');
    batch.add("planted_labels.json", labels);
    Ok((summary, batch))
}
