//! Experiment configuration (TOML) and instance construction.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::generators::{make_blb_instance, random_cascade, random_pmc, synthetic_graph};
use crate::env::{CascadeForm, CascadingInstance, InfluenceGraph, InfluenceInstance, Instance, PmcInstance, RoutingInstance};
use crate::error::{Error, Result};
use crate::ingest::{self, EdgeListOptions, MovielensParams, RatingsTable};
use crate::model::{MeanVector, RegretMode};
use crate::oracle::{Oracle, TimParams};
use crate::policy::PolicySpec;

fn default_p() -> f64 {
    0.2
}
fn default_form() -> CascadeForm {
    CascadeForm::Disjunctive
}
fn default_one() -> usize {
    1
}
fn default_stride() -> u64 {
    1
}
fn default_n_mc() -> usize {
    10_000
}
fn default_mode() -> RegretMode {
    RegretMode::Expected
}

/// Environment description, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    /// Single user, first `list_len` items at `p`, the rest at `p - gap`.
    Blb {
        items: usize,
        list_len: usize,
        #[serde(default = "default_p")]
        p: f64,
        gap: f64,
    },
    RandomCascade {
        items: usize,
        users: usize,
        list_len: usize,
        #[serde(default = "default_form")]
        form: CascadeForm,
        #[serde(default)]
        seed: u64,
    },
    /// Explicit attractions, `attraction[item][user]`.
    Cascade {
        list_len: usize,
        #[serde(default = "default_form")]
        form: CascadeForm,
        attraction: Vec<Vec<f64>>,
    },
    /// Coverage instance built from ratings and genre tables.
    Movielens {
        ratings: PathBuf,
        movies: PathBuf,
        params: MovielensParams,
    },
    RandomPmc {
        items: usize,
        users: usize,
        k: usize,
        p_star: f64,
        #[serde(default = "default_p")]
        max_attraction: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Explicit coverage instance, `attraction[item][user]`.
    Pmc {
        k: usize,
        p_star: f64,
        attraction: Vec<Vec<f64>>,
    },
    SyntheticGraph {
        nodes: usize,
        edges: usize,
        k: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Whitespace-separated edge list with `1 / outdeg` probabilities.
    EdgeList {
        path: PathBuf,
        #[serde(default)]
        undirected: bool,
        k: usize,
    },
    /// Explicit influence graph as `[src, dst, p]` triples.
    Graph {
        nodes: usize,
        edges: Vec<(usize, usize, f64)>,
        k: usize,
    },
    Routing {
        nodes: usize,
        links: Vec<(usize, usize)>,
        reliability: Vec<f64>,
        source: usize,
        destination: usize,
    },
    /// JSON document written by one of the ingest commands.
    Ingested { path: PathBuf },
}

/// Output of the ingest commands: a ready environment plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestedDocument {
    pub environment: EnvSpec,
    /// Fingerprint of the built instance, see [`instance_fingerprint`].
    pub fingerprint: String,
    /// Source ids of items (movies) or nodes, where meaningful.
    #[serde(default)]
    pub item_ids: Vec<u64>,
    #[serde(default)]
    pub user_ids: Vec<u64>,
}

impl IngestedDocument {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string(self).expect("document serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Arguments handed to generators become configuration errors here.
fn as_config<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Argument(m) => Error::Config(m),
        other => other,
    })
}

fn transpose(matrix: &[Vec<f64>]) -> Result<(usize, usize, Vec<f64>)> {
    let items = matrix.len();
    let users = matrix.first().map_or(0, Vec::len);
    if items == 0 || users == 0 || matrix.iter().any(|r| r.len() != users) {
        return Err(Error::config("attraction must be a non-empty rectangular [item][user] matrix"));
    }
    let mut flat = vec![0.0; items * users];
    for (i, row) in matrix.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            flat[j * items + i] = x;
        }
    }
    Ok((items, users, flat))
}

impl EnvSpec {
    pub fn family(&self) -> &'static str {
        match self {
            EnvSpec::Blb { .. } => "blb",
            EnvSpec::RandomCascade { .. } => "random_cascade",
            EnvSpec::Cascade { .. } => "cascade",
            EnvSpec::Movielens { .. } => "movielens",
            EnvSpec::RandomPmc { .. } => "random_pmc",
            EnvSpec::Pmc { .. } => "pmc",
            EnvSpec::SyntheticGraph { .. } => "synthetic_graph",
            EnvSpec::EdgeList { .. } => "edge_list",
            EnvSpec::Graph { .. } => "graph",
            EnvSpec::Routing { .. } => "routing",
            EnvSpec::Ingested { .. } => "ingested",
        }
    }

    /// Builds the instance; relative paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<Instance> {
        let inst = match self {
            &EnvSpec::Blb { items, list_len, p, gap } => Instance::Cascade(as_config(make_blb_instance(items, list_len, p, gap))?),
            &EnvSpec::RandomCascade {
                items,
                users,
                list_len,
                form,
                seed,
            } => Instance::Cascade(as_config(random_cascade(items, users, list_len, form, seed))?),
            EnvSpec::Cascade { list_len, form, attraction } => {
                let (items, users, flat) = transpose(attraction)?;
                Instance::Cascade(as_config(
                    MeanVector::new(flat).and_then(|a| CascadingInstance::new(items, users, *list_len, *form, a)),
                )?)
            }
            EnvSpec::Movielens { ratings, movies, params } => {
                let table = RatingsTable::from_paths(&base.join(ratings), &base.join(movies))?;
                Instance::Pmc(ingest::build_movielens_instance(&table, params)?.instance)
            }
            &EnvSpec::RandomPmc {
                items,
                users,
                k,
                p_star,
                max_attraction,
                seed,
            } => Instance::Pmc(as_config(random_pmc(items, users, k, p_star, max_attraction, seed))?),
            EnvSpec::Pmc { k, p_star, attraction } => {
                let (items, users, flat) = transpose(attraction)?;
                Instance::Pmc(as_config(
                    MeanVector::new(flat).and_then(|a| PmcInstance::new(items, users, *k, a, *p_star)),
                )?)
            }
            &EnvSpec::SyntheticGraph { nodes, edges, k, seed } => {
                let g = as_config(synthetic_graph(nodes, edges, seed))?;
                Instance::Influence(as_config(InfluenceInstance::new(g, k))?)
            }
            EnvSpec::EdgeList { path, undirected, k } => {
                let g = ingest::load_edge_graph(&base.join(path), EdgeListOptions { undirected: *undirected })?;
                Instance::Influence(as_config(InfluenceInstance::new(g, *k))?)
            }
            EnvSpec::Graph { nodes, edges, k } => {
                let g = as_config(InfluenceGraph::from_triples(*nodes, edges))?;
                Instance::Influence(as_config(InfluenceInstance::new(g, *k))?)
            }
            EnvSpec::Routing {
                nodes,
                links,
                reliability,
                source,
                destination,
            } => Instance::Routing(as_config(
                MeanVector::new(reliability.clone())
                    .and_then(|r| RoutingInstance::new(*nodes, links.clone(), r, *source, *destination)),
            )?),
            EnvSpec::Ingested { path } => {
                let doc = IngestedDocument::read(&base.join(path))?;
                if matches!(doc.environment, EnvSpec::Ingested { .. }) {
                    return Err(Error::Ingest(format!("{}: documents may not nest", path.display())));
                }
                let inst = doc.environment.build(base)?;
                if instance_fingerprint(&inst) != doc.fingerprint {
                    return Err(Error::Ingest(format!("{}: fingerprint does not match contents", path.display())));
                }
                inst
            }
        };
        Ok(inst)
    }
}

/// One experiment: a single policy on a single instance, repeated `n_runs`
/// times with per-run seeds derived from `master_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub environment: EnvSpec,
    pub policy: PolicySpec,
    /// Defaults to the family's own oracle.
    #[serde(default)]
    pub oracle: Option<Oracle>,
    pub horizon: u64,
    #[serde(default = "default_one")]
    pub n_runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_mode")]
    pub regret_mode: RegretMode,
    /// Monte-Carlo cascades used once to estimate the benchmark spread.
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    /// Oracle settings for the benchmark seed set; full TIM+ budgets by default.
    #[serde(default)]
    pub benchmark_oracle: Option<TimParams>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Write every `stride`-th round to the per-run CSV; 0 disables it.
    #[serde(default = "default_stride")]
    pub per_run_stride: u64,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn new(environment: EnvSpec, policy: PolicySpec, horizon: u64, n_runs: usize, master_seed: u64) -> Self {
        RunConfig {
            environment,
            policy,
            oracle: None,
            horizon,
            n_runs,
            master_seed,
            regret_mode: RegretMode::Expected,
            n_mc: default_n_mc(),
            benchmark_oracle: None,
            output: None,
            per_run_stride: 1,
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new("")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::config("horizon must be at least 1"));
        }
        if self.n_runs < 1 {
            return Err(Error::config("n_runs must be at least 1"));
        }
        if self.n_mc < 1 {
            return Err(Error::config("n_mc must be at least 1"));
        }
        if let Some(p) = &self.benchmark_oracle {
            p.validate()?;
        }
        Ok(())
    }

    pub fn oracle_for(&self, inst: &Instance) -> Oracle {
        self.oracle.clone().unwrap_or_else(|| Oracle::default_for(inst))
    }

    /// Hex SHA-256 of the canonical JSON form of the configuration.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        ingest::fingerprint([json.as_slice()])
    }
}

/// Hex SHA-256 over the instance structure and its true means.
pub fn instance_fingerprint(inst: &Instance) -> String {
    let shape = match inst {
        Instance::Cascade(c) => format!("cascade {} {} {} {:?}", c.items(), c.users(), c.list_len(), c.form()),
        Instance::Pmc(p) => format!("pmc {} {} {} {}", p.items(), p.users(), p.k(), p.p_star()),
        Instance::Influence(i) => {
            let mut s = format!("influence {} {}", i.graph.nodes(), i.k);
            for e in i.graph.edges() {
                s.push_str(&format!(" {}>{}", e.src, e.dst));
            }
            s
        }
        Instance::Routing(r) => {
            let mut s = format!("routing {} {} {}", r.nodes(), r.source(), r.destination());
            for (a, b) in r.links() {
                s.push_str(&format!(" {a}>{b}"));
            }
            s
        }
    };
    let means: Vec<u8> = inst.means().values().iter().flat_map(|v| v.to_bits().to_le_bytes()).collect();
    ingest::fingerprint([shape.as_bytes(), means.as_slice()])
}
