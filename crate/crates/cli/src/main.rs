//! Batch driver: ingestion, network, embedding, models, evaluation and the
//! synthetic-season generator.

mod config;

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use matchnet::baselines::{compute_apm, pagerank_with, write_pagerank_csv};
use matchnet::embed::{generate_walks, train_embedding};
use matchnet::eval::{rating_record_correlation, read_team_records};
use matchnet::pipeline::{evaluate, rate_teams, LineupModel, LineupVector};
use matchnet::{build_network, ingest_with, synth, BtModel, Embedding, Lineup, LineupId, SeasonDataset};
use serde::Serialize;

use crate::config::Config;

#[derive(Parser)]
#[command(name = "matchnet", version, about = "Lineup matchup networks and outcome prediction")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override the config file.
#[derive(Args, Default)]
struct Overrides {
    /// TOML config file
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; replaces every seed in the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Matchup CSV
    #[arg(short, long, global = true)]
    input: Option<PathBuf>,
    /// Output root; each run writes to <out>/<command>-<seed>
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    min_minutes: Option<f64>,
    #[arg(long, global = true)]
    num_walks: Option<usize>,
    #[arg(long, global = true)]
    walk_length: Option<usize>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Embedding dimension
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    /// Bradley-Terry ridge penalty
    #[arg(long, global = true)]
    l2: Option<f64>,
    /// PageRank damping
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// APM ridge penalty
    #[arg(long, global = true)]
    ridge: Option<f64>,
    #[arg(long, global = true)]
    train_fraction: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a matchup CSV and summarize it
    IngestCheck,
    /// Build the matchup network and write its edge list
    BuildNet,
    /// Generate walks and train the lineup embedding
    Embed,
    /// Train the embedding model and both baselines on the whole season
    Fit,
    /// Split, train all three methods and score them on the held-out records
    Evaluate,
    /// Probability that lineup A outperforms lineup B
    Predict {
        /// Lineup id, or TEAM:p1|p2|p3|p4|p5 for a lineup not in the data
        a: String,
        /// Lineup id, or TEAM:p1|p2|p3|p4|p5 for a lineup not in the data
        b: String,
        /// Output directory of a previous `fit` run to load instead of retraining
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Generate a synthetic season with planted abilities
    Synth,
    /// Rate teams from their lineups' predicted strength
    RateTeams {
        /// team,wins,losses CSV to correlate the ratings with
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::IngestCheck => "ingest-check",
            Command::BuildNet => "build-net",
            Command::Embed => "embed",
            Command::Fit => "fit",
            Command::Evaluate => "evaluate",
            Command::Predict { .. } => "predict",
            Command::Synth => "synth",
            Command::RateTeams { .. } => "rate-teams",
        }
    }
}

fn apply(cfg: &mut Config, o: &Overrides) {
    if let Some(seed) = o.seed {
        cfg.run.seed = seed;
        cfg.apply_master_seed(&["walk", "embed", "split", "synth"]);
    }
    if let Some(v) = &o.input {
        cfg.data.input = Some(v.clone());
    }
    if let Some(v) = &o.out {
        cfg.output.dir = v.clone();
    }
    if let Some(v) = o.min_minutes {
        cfg.data.min_minutes = v;
    }
    if let Some(v) = o.num_walks {
        cfg.walk.num_walks = v;
    }
    if let Some(v) = o.walk_length {
        cfg.walk.walk_length = v;
    }
    if let Some(v) = o.p {
        cfg.walk.p = v;
    }
    if let Some(v) = o.q {
        cfg.walk.q = v;
    }
    if let Some(v) = o.dim {
        cfg.embed.d = v;
    }
    if let Some(v) = o.epochs {
        cfg.embed.epochs = v;
    }
    if let Some(v) = o.l2 {
        cfg.model.l2 = v;
    }
    if let Some(v) = o.alpha {
        cfg.pagerank.alpha = v;
    }
    if let Some(v) = o.ridge {
        cfg.apm.ridge = v;
    }
    if let Some(v) = o.train_fraction {
        cfg.split.train_fraction = v;
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = Config::load(cli.overrides.config.as_deref())?;
    apply(&mut cfg, &cli.overrides);
    let dir = cfg.output.dir.join(format!("{}-{}", cli.command.name(), cfg.run.seed));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    log::info!("writing to {}", dir.display());
    let summary = match &cli.command {
        Command::IngestCheck => ingest_check(&cfg, &dir)?,
        Command::BuildNet => build_net(&cfg, &dir)?,
        Command::Embed => embed(&cfg, &dir)?,
        Command::Fit => fit(&cfg, &dir)?,
        Command::Evaluate => run_evaluate(&cfg, &dir)?,
        Command::Predict { a, b, from } => predict(&cfg, &dir, a, b, from.as_deref())?,
        Command::Synth => run_synth(&cfg, &dir)?,
        Command::RateTeams { records } => run_rate_teams(&cfg, &dir, records.as_deref())?,
    };
    println!("{summary}");
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load_season(cfg: &Config) -> Result<SeasonDataset> {
    let input = cfg.input()?;
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    ingest_with(BufReader::new(file), cfg.ingest_options()).with_context(|| format!("reading {}", input.display()))
}

#[derive(Serialize)]
struct SeasonSummary {
    lineups: usize,
    records: usize,
    labeled: usize,
    ties: usize,
    teams: usize,
}

fn ingest_check(cfg: &Config, dir: &Path) -> Result<String> {
    let ds = load_season(cfg)?;
    let labeled = ds.labeled().count();
    let s = SeasonSummary {
        lineups: ds.lineups().len(),
        records: ds.matchups().len(),
        labeled,
        ties: ds.matchups().len() - labeled,
        teams: ds.teams().len(),
    };
    write_json(&dir.join("summary.json"), &s)?;
    Ok(format!(
        "ok: {} lineups, {} records ({} labelled, {} ties), {} teams",
        s.lineups, s.records, s.labeled, s.ties, s.teams
    ))
}

fn build_net(cfg: &Config, dir: &Path) -> Result<String> {
    let ds = load_season(cfg)?;
    let net = build_network(&ds);
    let path = dir.join("network.edgelist");
    let mut w = create(&path)?;
    net.write_edge_list(&mut w)?;
    w.flush()?;
    let isolated = net.connected().iter().filter(|c| !**c).count();
    Ok(format!(
        "network: {} nodes, {} edges, {} isolated -> {}",
        net.node_count(),
        net.edge_count(),
        isolated,
        path.display()
    ))
}

#[derive(Serialize)]
struct EmbedSummary {
    walks: usize,
    mean_walk_hops: f64,
    max_walk_hops: usize,
    updates: u64,
    untrained: Vec<LineupId>,
    loss_curve: Vec<f64>,
}

fn embed(cfg: &Config, dir: &Path) -> Result<String> {
    let ds = load_season(cfg)?;
    let net = build_network(&ds);
    let walks = generate_walks(&net, &cfg.walk)?;
    let trained = train_embedding(&walks, &cfg.embed)?;
    let path = dir.join("embedding.txt");
    let mut w = create(&path)?;
    trained.embedding.write_text(&mut w)?;
    w.flush()?;
    let s = EmbedSummary {
        walks: walks.len(),
        mean_walk_hops: walks.mean_hops(),
        max_walk_hops: walks.hop_counts().max().unwrap_or(0),
        updates: trained.updates,
        untrained: trained.untrained,
        loss_curve: trained.loss_curve,
    };
    write_json(&dir.join("embed_summary.json"), &s)?;
    Ok(format!(
        "embedded {} lineups in {} dimensions from {} walks (mean {:.1} hops) -> {}",
        trained.embedding.len(),
        trained.embedding.dim(),
        s.walks,
        s.mean_walk_hops,
        path.display()
    ))
}

fn write_lineup_model(model: &LineupModel, dir: &Path) -> Result<()> {
    let mut w = create(&dir.join("embedding.txt"))?;
    model.embedding.write_text(&mut w)?;
    w.flush()?;
    let mut w = create(&dir.join("model.txt"))?;
    model.model.write_text(&mut w)?;
    w.flush()?;
    let mut w = create(&dir.join("seen.txt"))?;
    for id in &model.seen {
        writeln!(w, "{id}")?;
    }
    w.flush()?;
    write_json(&dir.join("training.json"), &model.summary)
}

fn read_lineup_model(dir: &Path) -> Result<LineupModel> {
    let open = |name: &str| -> Result<BufReader<File>> {
        let path = dir.join(name);
        Ok(BufReader::new(
            File::open(&path).with_context(|| format!("opening {}", path.display()))?,
        ))
    };
    let embedding = Embedding::read_text(open("embedding.txt")?).context("reading embedding.txt")?;
    let model = BtModel::read_text(open("model.txt")?).context("reading model.txt")?;
    let mut seen = BTreeSet::new();
    for (i, line) in open("seen.txt")?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let id = line
            .trim()
            .parse()
            .with_context(|| format!("seen.txt line {}: bad lineup id", i + 1))?;
        seen.insert(LineupId(id));
    }
    Ok(LineupModel::from_parts(embedding, seen, model))
}

fn fit(cfg: &Config, dir: &Path) -> Result<String> {
    let ds = load_season(cfg)?;
    let pipeline = cfg.pipeline();
    let model = LineupModel::train(&ds, &pipeline)?;
    write_lineup_model(&model, dir)?;
    let pr = pagerank_with(&build_network(&ds), &pipeline.pagerank)?;
    let mut w = create(&dir.join("pagerank.csv"))?;
    write_pagerank_csv(&pr, &mut w)?;
    w.flush()?;
    let apm = compute_apm(&ds, pipeline.apm.ridge)?;
    let mut w = create(&dir.join("apm.csv"))?;
    apm.write_csv(&mut w)?;
    w.flush()?;
    let warn = model
        .summary
        .bt_warning
        .map(|w| format!(", warning {w:?}"))
        .unwrap_or_default();
    Ok(format!(
        "fit on {} pairs: {} embedded lineups, {} Newton iterations{} -> {}",
        model.summary.training_pairs,
        model.seen.len(),
        model.summary.bt_iterations,
        warn,
        dir.display()
    ))
}

fn run_evaluate(cfg: &Config, dir: &Path) -> Result<String> {
    let ds = load_season(cfg)?;
    let cmp = evaluate(&ds, &cfg.split, &cfg.pipeline())?;
    write_json(&dir.join("report.json"), &cmp)?;
    for report in cmp.reports() {
        let mut w = create(&dir.join(format!("calibration_{}.csv", report.method)))?;
        report.calibration_curve().write_csv(&mut w)?;
        w.flush()?;
    }
    let parts: Vec<String> = cmp
        .reports()
        .iter()
        .map(|r| format!("{} acc {:.3} brier {:.3}", r.method, r.accuracy, r.brier))
        .collect();
    Ok(format!(
        "{} | climatology brier {:.3} | {} test pairs, {} with unseen lineups",
        parts.join(" | "),
        cmp.embedding.brier_climatology,
        cmp.embedding.n_test,
        cmp.embedding.n_unseen
    ))
}

/// A predict operand resolved to a vector.
struct Resolved {
    label: String,
    vector: LineupVector,
}

fn resolve(ds: &SeasonDataset, model: &LineupModel, operand: &str, fresh_id: LineupId) -> Result<Resolved> {
    if let Some((team, players)) = operand.split_once(':') {
        let lineup = Lineup::parse(fresh_id, players).with_context(|| format!("bad player list {players:?}"))?;
        if let Some(known) = ds.lineups().find(|l| l.players() == lineup.players()) {
            return Ok(Resolved {
                label: known.id().to_string(),
                vector: model.vector_for(ds, known)?,
            });
        }
        if !ds.teams().contains(&team) {
            bail!("unknown team {team:?}; known teams: {}", ds.teams().join(", "));
        }
        return Ok(Resolved {
            label: format!("{team}:{}", lineup.player_list()),
            vector: model.impute(ds, &lineup, team),
        });
    }
    let id = operand
        .parse::<u64>()
        .map(LineupId)
        .with_context(|| format!("{operand:?} is neither a lineup id nor TEAM:p1|p2|p3|p4|p5"))?;
    if ds.lineup(id).is_none() {
        let known: Vec<String> = ds.lineup_ids().map(|i| i.to_string()).collect();
        bail!(
            "unknown lineup id {id} and no player list given; known ids: {}",
            known.join(", ")
        );
    }
    Ok(Resolved {
        label: id.to_string(),
        vector: model.vector(ds, id)?,
    })
}

#[derive(Serialize)]
struct Prediction {
    lineup_a: String,
    lineup_b: String,
    probability: f64,
    imputed_a: bool,
    imputed_b: bool,
}

fn predict(cfg: &Config, dir: &Path, a: &str, b: &str, from: Option<&Path>) -> Result<String> {
    let ds = load_season(cfg)?;
    let model = match from {
        Some(d) => read_lineup_model(d)?,
        None => LineupModel::train(&ds, &cfg.pipeline())?,
    };
    let next = ds.lineup_ids().map(|i| i.0).max().unwrap_or(0);
    let ra = resolve(&ds, &model, a, LineupId(next + 1))?;
    let rb = resolve(&ds, &model, b, LineupId(next + 2))?;
    let probability = model.model.predict(&ra.vector.vector, &rb.vector.vector)?;
    let p = Prediction {
        imputed_a: ra.vector.imputed.is_some(),
        imputed_b: rb.vector.imputed.is_some(),
        lineup_a: ra.label,
        lineup_b: rb.label,
        probability,
    };
    write_json(&dir.join("prediction.json"), &p)?;
    Ok(format!(
        "P({} outperforms {}) = {:.4}",
        p.lineup_a, p.lineup_b, p.probability
    ))
}

fn run_synth(cfg: &Config, dir: &Path) -> Result<String> {
    let (ds, truth) = synth::generate(&cfg.synth)?;
    let season = dir.join("season.csv");
    let mut w = create(&season)?;
    ds.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&dir.join("abilities.csv"))?;
    truth.write_csv(&mut w)?;
    w.flush()?;
    Ok(format!(
        "synthetic season: {} teams, {} lineups, {} records, true-ability accuracy {:.3} -> {}",
        ds.teams().len(),
        ds.lineups().len(),
        ds.matchups().len(),
        truth.oracle_accuracy(ds.matchups()),
        season.display()
    ))
}

fn run_rate_teams(cfg: &Config, dir: &Path, records: Option<&Path>) -> Result<String> {
    let ds = load_season(cfg)?;
    let model = LineupModel::train(&ds, &cfg.pipeline())?;
    let ratings = rate_teams(&ds, &model)?;
    let mut w = create(&dir.join("team_ratings.csv"))?;
    writeln!(w, "team,rating,lineups")?;
    for r in &ratings {
        writeln!(w, "{},{},{}", r.team, r.rating, r.lineups)?;
    }
    w.flush()?;
    let diag = model.similarity_diagnostics(&ds);
    let mut w = create(&dir.join("similarity.csv"))?;
    writeln!(w, "team,overlap_distance_corr")?;
    for (team, r) in &diag {
        writeln!(w, "{team},{}", r.map(|r| r.to_string()).unwrap_or_default())?;
    }
    w.flush()?;
    let negative = diag.iter().filter(|(_, r)| r.is_some_and(|r| r < 0.0)).count();
    let mut line = format!(
        "rated {} teams; overlap/distance correlation negative for {}/{}",
        ratings.len(),
        negative,
        diag.len()
    );
    if let Some(path) = records.or(cfg.rating.records.as_deref()) {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let recs = read_team_records(file).with_context(|| format!("reading {}", path.display()))?;
        match rating_record_correlation(&ratings, &recs) {
            Some(r) => line.push_str(&format!("; correlation with win fraction {r:.3}")),
            None => line.push_str("; too few teams to correlate with records"),
        }
    }
    Ok(line)
}
