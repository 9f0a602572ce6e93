use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use lumiref_core::catalog::Corpus;
use lumiref_core::ids::ImageId;
use lumiref_core::navigation::{
    corpus_graph, DirAlbumStore, NavConfig, SystemClock,
};
use lumiref_core::thesaurus::Thesaurus;
use lumiref_core::vsm::{Rocchio, Scope};
use serde_json::json;

use crate::error::ApiError;
use crate::search::{parse_term_arg, search, QuerySpec};
use crate::state::AppState;

/// Reference-image retrieval and navigation over a star-weighted thesaurus
/// index.
#[derive(Debug, Parser)]
#[command(name = "lumiref", version)]
pub struct Cli {
    /// Corpus file (JSON Lines, one image record per line).
    #[arg(long, env = "LUMIREF_CORPUS", global = true)]
    pub corpus: Option<PathBuf>,
    /// Thesaurus file (JSON).
    #[arg(long, env = "LUMIREF_THESAURUS", global = true)]
    pub thesaurus: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Session defaults; each mirrors a `LUMIREF_*` variable.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, env = "LUMIREF_MOSAIC_SIZE", default_value_t = 12, global = true)]
    pub mosaic_size: usize,
    #[arg(long, env = "LUMIREF_GRAPH_K", default_value_t = 8, global = true)]
    pub graph_k: usize,
    #[arg(long, env = "LUMIREF_EDGE_THRESHOLD", default_value_t = 0.3, global = true)]
    pub edge_threshold: f64,
    #[arg(long, env = "LUMIREF_GRAPH_SEED_COUNT", default_value_t = 10, global = true)]
    pub graph_seed_count: usize,
    #[arg(long, env = "LUMIREF_ALPHA", default_value_t = 1.0, global = true)]
    pub alpha: f64,
    #[arg(long, env = "LUMIREF_BETA", default_value_t = 0.75, global = true)]
    pub beta: f64,
    #[arg(long, env = "LUMIREF_GAMMA", default_value_t = 0.25, global = true)]
    pub gamma: f64,
    /// Scale star weights by inverse document frequency.
    #[arg(long, env = "LUMIREF_IDF", global = true)]
    pub idf: bool,
}

impl EngineArgs {
    pub fn config(&self) -> NavConfig {
        NavConfig {
            mosaic_size: self.mosaic_size,
            graph_k: self.graph_k,
            edge_threshold: self.edge_threshold,
            graph_seed_count: self.graph_seed_count,
            rocchio: Rocchio {
                alpha: self.alpha,
                beta: self.beta,
                gamma: self.gamma,
            },
            idf: self.idf,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "LUMIREF_HOST", default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "LUMIREF_PORT", default_value_t = 8080)]
        port: u16,
        /// Albums and session snapshots are kept here.
        #[arg(long, env = "LUMIREF_DATA_DIR", default_value = "lumiref-data")]
        data_dir: PathBuf,
    },
    /// Validate the corpus against the thesaurus and print a summary.
    Index {
        /// Also write the corpus in canonical form to this path.
        #[arg(long)]
        canonical: Option<PathBuf>,
    },
    /// Rank the corpus against an image or weighted terms.
    Search {
        #[arg(long, conflicts_with = "term", required_unless_present = "term")]
        query_image: Option<String>,
        /// `term:weight`, repeatable.
        #[arg(long = "term")]
        term: Vec<String>,
        /// Restrict comparison to these categories; repeatable.
        #[arg(long = "category")]
        category: Vec<String>,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Emit the whole-corpus similarity graph as JSON.
    Graph {
        /// Defaults to --edge-threshold.
        #[arg(long)]
        threshold: Option<f64>,
        /// Defaults to --graph-k.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long = "category")]
        category: Vec<String>,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path, what: &str) -> Result<Vec<u8>, ApiError> {
    std::fs::read(path).map_err(|e| {
        ApiError::new("UnreadableFile", format!("cannot read {what} {}: {e}", path.display()))
    })
}

/// Loads and validates the thesaurus, then the corpus against it.
pub fn load_inputs(corpus: &Path, thesaurus: &Path) -> Result<(Thesaurus, Corpus), ApiError> {
    let th = Thesaurus::load(&read(thesaurus, "thesaurus")?)?;
    let corpus = Corpus::ingest(&read(corpus, "corpus")?, &th)?;
    Ok((th, corpus))
}

fn scope_of(categories: &[String]) -> Scope {
    if categories.is_empty() {
        Scope::All
    } else {
        Scope::categories(categories.iter().map(String::as_str))
    }
}

fn pretty(value: &impl serde::Serialize) -> String {
    lumiref_core::canonical::to_canonical_string(value).expect("value serializes")
}

impl Cli {
    fn inputs(&self) -> Result<(Thesaurus, Corpus), ApiError> {
        let missing = |flag: &str| {
            ApiError::new("MissingArgument", format!("--{flag} (or LUMIREF_{}) is required", flag.to_uppercase()))
        };
        let corpus = self.corpus.as_deref().ok_or_else(|| missing("corpus"))?;
        let thesaurus = self.thesaurus.as_deref().ok_or_else(|| missing("thesaurus"))?;
        load_inputs(corpus, thesaurus)
    }

    /// Runs a batch subcommand, writing its result to `out`.
    pub fn run_batch(&self, out: &mut dyn Write) -> Result<(), ApiError> {
        let config = self.engine.config();
        config.validate()?;
        let (th, corpus) = self.inputs()?;
        let text = match &self.command {
            Command::Serve { .. } => unreachable!("serve is not a batch command"),
            Command::Index { canonical } => {
                if let Some(path) = canonical {
                    std::fs::write(path, corpus.to_canonical_string()).map_err(|e| {
                        ApiError::new("UnwritableFile", format!("{}: {e}", path.display()))
                    })?;
                }
                pretty(&json!({
                    "images": corpus.len(),
                    "thesaurus_version": th.version(),
                    "terms": th.term_count(),
                    "checksum": corpus.checksum(),
                }))
            }
            Command::Search {
                query_image,
                term,
                category,
                limit,
            } => {
                let spec = match query_image {
                    Some(id) => QuerySpec::Image(ImageId::from(id.as_str())),
                    None => QuerySpec::Terms(
                        term.iter()
                            .map(|t| parse_term_arg(t))
                            .collect::<Result<_, _>>()
                            .map_err(ApiError::malformed)?,
                    ),
                };
                let ranked = search(&th, &corpus, &scope_of(category), config.idf, &spec, *limit)?;
                pretty(&ranked)
            }
            Command::Graph {
                threshold,
                k,
                category,
                out: file,
            } => {
                let threshold = threshold.unwrap_or(config.edge_threshold);
                if !(0.0..=1.0).contains(&threshold) {
                    return Err(ApiError::new("InvalidConfig", "threshold must lie in [0, 1]"));
                }
                let graph = corpus_graph(
                    &corpus,
                    &th,
                    &scope_of(category),
                    threshold,
                    k.unwrap_or(config.graph_k),
                )?;
                let text = graph.to_canonical_string();
                if let Some(path) = file {
                    std::fs::write(path, &text).map_err(|e| {
                        ApiError::new("UnwritableFile", format!("{}: {e}", path.display()))
                    })?;
                    return Ok(());
                }
                text
            }
        };
        out.write_all(text.as_bytes())
            .map_err(|e| ApiError::new("UnwritableFile", e.to_string()))
    }

    /// Loads everything `serve` needs; fails before binding on bad inputs.
    pub fn serve_state(&self) -> Result<(Arc<AppState>, SocketAddr), ApiError> {
        let Command::Serve {
            host,
            port,
            data_dir,
        } = &self.command
        else {
            unreachable!("not a serve command")
        };
        let (th, corpus) = self.inputs()?;
        let albums = DirAlbumStore::open(data_dir.join("albums"))?;
        let state = AppState::new(
            Arc::new(th),
            Arc::new(corpus),
            Arc::new(albums),
            Arc::new(SystemClock),
            self.engine.config(),
            Some(data_dir.join("sessions")),
        )?;
        let addr: SocketAddr = format!("{host}:{port}")
            .parse()
            .map_err(|e| ApiError::malformed(format!("bind address {host}:{port}: {e}")))?;
        Ok((Arc::new(state), addr))
    }
}

/// Prints an error the way every subcommand reports failures.
pub fn report(err: &ApiError, w: &mut dyn Write) {
    let _ = writeln!(w, "error: {}: {}", err.code, err.message);
    if let Some(detail) = &err.detail {
        // a single violation is already the message
        if let Some(items) = detail.as_array().filter(|i| i.len() > 1) {
            for item in items {
                let msg = item.get("message").and_then(|m| m.as_str()).unwrap_or_default();
                let _ = writeln!(w, "  - {msg}");
            }
        }
    }
}
