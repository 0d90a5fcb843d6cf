use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semwalk::corpus::{generate_synthetic_corpus, write_corpus, write_norms};
use semwalk::fluency::{analyze_walks, PatchModel};
use semwalk::graphstats::{extract_features, ClusterSpace};
use semwalk::learner::LearnedMeanings;
use semwalk::pipeline::{
    self, read_features_csv, regress, run_sweep, write_features_csv, Config, FeatureRow,
    SweepInput, DEFAULT_BATCH_PAIRS, DEFAULT_INCREMENTAL_PAIRS,
};
use semwalk::walker::{run_ensemble, WalkRecord};
use semwalk::{Error, NetworkMode, Result};

#[derive(Parser)]
#[command(
    name = "semwalk",
    version,
    about = "Word learning, semantic networks and fluency walks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed for every stochastic stage.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Batch,
    Incremental,
}

impl From<Mode> for NetworkMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Batch => NetworkMode::Batch,
            Mode::Incremental => NetworkMode::Incremental,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Associative,
    Categorical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Meaning,
    Graph,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with category norms and its gold lexicon.
    GenCorpus {
        /// Output directory (corpus.txt, norms.csv, lexicon.json).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        categories: Option<usize>,
        #[arg(long)]
        words_per_category: Option<usize>,
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Train the learner; incremental mode also writes the network it built.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value = "batch")]
        mode: Mode,
        /// Number of pairs to consume (120000 batch, 28000 incremental).
        #[arg(long)]
        pairs: Option<usize>,
        /// Norms restricting the incremental network vocabulary.
        #[arg(long)]
        norms: Option<PathBuf>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        rho_animal: Option<f64>,
        /// Meanings JSON.
        #[arg(long)]
        out: PathBuf,
        /// Network JSON (incremental mode only).
        #[arg(long)]
        network_out: Option<PathBuf>,
    },
    /// Build a batch network from trained meanings.
    BuildNet {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        norms: PathBuf,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        rho_animal: Option<f64>,
        #[arg(long)]
        cue: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an ensemble of random walks from the cue.
    Walk {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        walks: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        /// Start word; defaults to the network's cue.
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Patch-switch and MVT analysis of a walk file.
    Analyze {
        #[arg(long)]
        walks: PathBuf,
        #[arg(long)]
        norms: PathBuf,
        /// Meanings JSON, enables the cosine profile.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "associative")]
        model: Model,
        #[arg(long)]
        cue: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Structural and semantic features of one network.
    Features {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        norms: PathBuf,
        #[arg(long)]
        state: Option<PathBuf>,
        /// Walk file used for the MVT label.
        #[arg(long)]
        walks: PathBuf,
        #[arg(long, value_enum, default_value = "meaning")]
        cluster_space: Space,
        #[arg(long)]
        out: PathBuf,
    },
    /// Balanced exhaustive logistic-regression model selection over a features CSV.
    Regress {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the threshold grid and write the features CSV and per-point reports.
    Sweep {
        /// Meanings JSON (batch sweeps).
        #[arg(long)]
        state: Option<PathBuf>,
        /// Corpus file (incremental sweeps, or batch sweeps without --state).
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        norms: PathBuf,
        #[arg(long, value_enum, default_value = "batch")]
        mode: Mode,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        min_reachable: Option<usize>,
        #[arg(long)]
        walks: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        /// Output directory (features.csv, skipped.json, reports/).
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(common: &Common) -> Result<Config> {
    match &common.config {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn load_meanings(path: &Path) -> Result<LearnedMeanings> {
    pipeline::read_json(path)
}

fn read_walks(path: &Path) -> Result<Vec<WalkRecord>> {
    pipeline::read_json(path)
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut config = load_config(&cli.common)?;
    let seed = cli.common.seed;
    match cli.command {
        Command::GenCorpus {
            out,
            categories,
            words_per_category,
            pairs,
        } => {
            let synth = &mut config.synth;
            synth.seed = seed;
            if let Some(v) = categories {
                synth.n_categories = v;
            }
            if let Some(v) = words_per_category {
                synth.words_per_category = v;
            }
            if let Some(v) = pairs {
                synth.n_pairs = v;
            }
            let corpus = generate_synthetic_corpus(synth)?;
            create_dir(&out)?;
            write_corpus(
                BufWriter::new(File::create(out.join("corpus.txt"))?),
                &corpus.pairs,
            )?;
            write_norms(
                BufWriter::new(File::create(out.join("norms.csv"))?),
                &corpus.norms,
            )?;
            pipeline::write_json(&out.join("lexicon.json"), &corpus.lexicon)?;
        }
        Command::Train {
            corpus,
            mode,
            pairs,
            norms,
            rho,
            rho_animal,
            out,
            network_out,
        } => {
            let data = pipeline::read_corpus_file(&corpus)?;
            match mode {
                Mode::Batch => {
                    if network_out.is_some() {
                        return Err(Error::invalid("--network-out needs --mode incremental"));
                    }
                    let m =
                        pipeline::train_batch(&data, Some(pairs.unwrap_or(DEFAULT_BATCH_PAIRS)));
                    pipeline::write_json(&out, &m)?;
                }
                Mode::Incremental => {
                    let network_out = network_out
                        .ok_or_else(|| Error::invalid("--mode incremental needs --network-out"))?;
                    let norms = norms.map(|p| pipeline::read_norms_file(&p)).transpose()?;
                    let net_cfg = &mut config.network;
                    net_cfg.rho = rho.unwrap_or(net_cfg.rho);
                    net_cfg.rho_animal = rho_animal.unwrap_or(net_cfg.rho_animal);
                    let (m, net) = pipeline::train_incremental(
                        &data,
                        Some(pairs.unwrap_or(DEFAULT_INCREMENTAL_PAIRS)),
                        net_cfg,
                        norms.as_ref(),
                        seed,
                    )?;
                    pipeline::write_json(&out, &m)?;
                    pipeline::write_network(&network_out, &net)?;
                }
            }
        }
        Command::BuildNet {
            state,
            norms,
            rho,
            rho_animal,
            cue,
            out,
        } => {
            let m = load_meanings(&state)?;
            let norms = pipeline::read_norms_file(&norms)?;
            let net_cfg = &mut config.network;
            net_cfg.rho = rho.unwrap_or(net_cfg.rho);
            net_cfg.rho_animal = rho_animal.unwrap_or(net_cfg.rho_animal);
            if let Some(c) = cue {
                net_cfg.cue = c;
            }
            let net = pipeline::build_network(&m, &norms, net_cfg)?;
            pipeline::write_network(&out, &net)?;
        }
        Command::Walk {
            network,
            walks,
            steps,
            start,
            out,
        } => {
            let net = pipeline::read_network(&network)?;
            let start = start.unwrap_or_else(|| net.meta.cue.clone());
            let records = run_ensemble(
                &net,
                &start,
                steps.unwrap_or(config.walks.steps),
                walks.unwrap_or(config.walks.walks),
                seed,
            )?;
            pipeline::write_json(&out, &records)?;
        }
        Command::Analyze {
            walks,
            norms,
            state,
            model,
            cue,
            out,
        } => {
            let records = read_walks(&walks)?;
            let norms = pipeline::read_norms_file(&norms)?;
            let cue = cue.unwrap_or_else(|| config.network.cue.clone());
            let vectors = match state {
                Some(p) => {
                    let m = load_meanings(&p)?;
                    let words: std::collections::BTreeSet<&str> = records
                        .iter()
                        .flat_map(|r| r.retrievals.iter().map(|x| x.word.as_str()))
                        .collect();
                    Some(m.vectors(words)?)
                }
                None => None,
            };
            config.analysis.model = match model {
                Model::Associative => PatchModel::Associative,
                Model::Categorical => PatchModel::Categorical,
            };
            let report = analyze_walks(
                &records,
                &norms,
                Some(&cue),
                vectors.as_ref(),
                &config.analysis,
            )?;
            pipeline::write_json(&out, &report)?;
        }
        Command::Features {
            network,
            norms,
            state,
            walks,
            cluster_space,
            out,
        } => {
            let net = pipeline::read_network(&network)?;
            let norms = pipeline::read_norms_file(&norms)?;
            let records = read_walks(&walks)?;
            config.features.cluster_space = match cluster_space {
                Space::Meaning => ClusterSpace::Meaning,
                Space::Graph => ClusterSpace::Graph,
            };
            let vectors = match state {
                Some(p) => Some(load_meanings(&p)?.vectors(net.nodes())?),
                None if config.features.cluster_space == ClusterSpace::Meaning => {
                    return Err(Error::invalid(
                        "--state is required for meaning-space clustering",
                    ))
                }
                None => None,
            };
            let cue = net.meta.cue.clone();
            let report = analyze_walks(&records, &norms, Some(&cue), None, &config.analysis)?;
            let f = extract_features(
                &net,
                vectors.as_ref(),
                &norms,
                report.mvt.adheres,
                &config.features,
                seed,
            )?;
            pipeline::write_json(&out, &f)?;
        }
        Command::Regress { features, out } => {
            let rows = read_features_csv(File::open(&features)?)?;
            let report = regress(&rows, &config, seed)?;
            pipeline::write_json(&out, &report)?;
        }
        Command::Sweep {
            state,
            corpus,
            norms,
            mode,
            pairs,
            min_reachable,
            walks,
            steps,
            out,
        } => {
            let norms = pipeline::read_norms_file(&norms)?;
            config.sweep.mode = mode.into();
            if let Some(v) = min_reachable {
                config.sweep.min_reachable = v;
            }
            if let Some(v) = walks {
                config.walks.walks = v;
            }
            if let Some(v) = steps {
                config.walks.steps = v;
            }
            let data = corpus.map(|p| pipeline::read_corpus_file(&p)).transpose()?;
            let meanings = match (mode, &state, &data) {
                (Mode::Batch, Some(p), _) => Some(load_meanings(p)?),
                (Mode::Batch, None, Some(d)) => Some(pipeline::train_batch(
                    d,
                    Some(pairs.unwrap_or(DEFAULT_BATCH_PAIRS)),
                )),
                (Mode::Batch, None, None) => {
                    return Err(Error::invalid("batch sweeps need --state or --corpus"))
                }
                (Mode::Incremental, _, None) => {
                    return Err(Error::invalid("incremental sweeps need --corpus"))
                }
                (Mode::Incremental, _, Some(_)) => None,
            };
            let input = match (&meanings, &data) {
                (Some(m), _) => SweepInput::Meanings(m),
                (None, Some(d)) => {
                    SweepInput::Corpus(d, Some(pairs.unwrap_or(DEFAULT_INCREMENTAL_PAIRS)))
                }
                (None, None) => unreachable!("checked above"),
            };
            let result = run_sweep(input, &norms, &config, seed)?;
            create_dir(&out.join("reports"))?;
            let rows: Vec<FeatureRow> = result.points.iter().map(FeatureRow::from).collect();
            write_features_csv(
                BufWriter::new(File::create(out.join("features.csv"))?),
                &rows,
            )?;
            pipeline::write_json(&out.join("skipped.json"), &result.skipped)?;
            for p in &result.points {
                let name = format!("rho{:.2}_animal{:.2}.json", p.rho, p.rho_animal);
                pipeline::write_json(&out.join("reports").join(name), &p.report)?;
            }
        }
    }
    Ok(())
}
