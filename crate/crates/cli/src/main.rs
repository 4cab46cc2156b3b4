//! `etrees`: classify weight sequences, sample structures, run experiments.
//!
//! Exit status: 0 on success (or a passing experiment), 1 for a failing
//! experiment, 2 for bad input.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use etrees::analysis::{canonical_code, map_graph, run_experiment, CanonicalCode, EmpiricalDistribution, Params};
use etrees::decode::{
    dissection_from_enriched, graph_from_enriched, ktree_from_enriched, outerplanar_from_enriched,
    planarmap_from_enriched, LabelledGraph,
};
use etrees::enrich::Decorator;
use etrees::parallel::{replicate_range, ChaCha8Rng, Exec};
use etrees::series::{classify, parse_weights_file, preset, WeightSequence};
use etrees::species::presets::{self, EnrichedClass};
use etrees::treegen::{is_lukasiewicz, Backend, LeafTreeSampler, SgtSampler};
use etrees::{Error, Result};

#[derive(Parser)]
#[command(name = "etrees", version, about = "Random enriched trees and the structures they encode")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the profile (tau, nu, kind, ...) of a weight sequence as JSON.
    Classify {
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Emit random structures as JSON lines.
    Sample(SampleArgs),
    /// Run a named experiment and print its report.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct WeightArgs {
    /// Named weight sequence, e.g. `uniform-plane`, `excool`, `power:beta=2.5`.
    #[arg(long, conflicts_with = "weights")]
    preset: Option<String>,
    /// File of `k value` lines.
    #[arg(long)]
    weights: Option<PathBuf>,
}

impl WeightArgs {
    fn load(&self, default: &str) -> Result<WeightSequence> {
        match (&self.weights, &self.preset) {
            (Some(path), _) => parse_weights_file(path),
            (None, Some(p)) => preset(p),
            (None, None) => preset(default),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Tree,
    LeafTree,
    Graph,
    Dissection,
    Outerplanar,
    Map,
    Ktree,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[command(flatten)]
    weights: WeightArgs,
    /// Size: vertices (tree, graph, outerplanar), leaves (leaf-tree),
    /// non-root vertices (dissection), edges (map), hedra (ktree).
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    backend: Option<String>,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the structure validators on every sample.
    #[arg(long)]
    validate: bool,
    /// Also write a `code,count` census of rooted isomorphism classes.
    #[arg(long)]
    census: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    name: String,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key=value` lines; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` setting, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

fn exec_of(threads: Option<usize>) -> Exec {
    match threads {
        Some(1) => Exec::Sequential,
        Some(t) => Exec::Threads(t),
        None => Exec::default(),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_classify(w: &WeightArgs) -> Result<()> {
    let seq = w.load("uniform-plane")?;
    seq.validate()?;
    let prof = classify(&seq)?;
    let mut v = serde_json::to_value(&prof)?;
    v["name"] = json!(seq.name());
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

/// The class behind a model, with the preset naming its parameters.
fn class_of(model: Model, spec: Option<&str>) -> Result<EnrichedClass> {
    let param = |key: &str, default: usize| -> Result<usize> {
        let Some(s) = spec else { return Ok(default) };
        match s.split_once(':') {
            None => Ok(default),
            Some((_, rest)) => rest
                .split(',')
                .filter_map(|kv| kv.split_once('='))
                .find(|(k, _)| k.trim() == key)
                .map_or(Ok(default), |(_, v)| v.trim().parse().map_err(|_| Error::Parse(format!("bad `{key}`")))),
        }
    };
    Ok(match model {
        Model::Graph => presets::block_graph(param("blocks", 5)?)?,
        Model::Map => presets::planar_maps(param("edges", 6)?)?,
        Model::Ktree => presets::ktree(param("k", 2)?.max(1)),
        Model::Outerplanar => presets::outerplanar()?,
        Model::Dissection => match spec {
            Some("dissection-factorial") => presets::dissection_factorial()?,
            None | Some("dissection") => presets::dissection_uniform()?,
            Some(other) => return Err(Error::Unknown { kind: "dissection preset", name: other.into() }),
        },
        Model::Tree | Model::LeafTree => unreachable!("trees use weight sequences"),
    })
}

/// One sampled structure as JSON plus its rooted code when a census is kept.
type Sampled = (Value, Option<CanonicalCode>);

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    if a.n == 0 {
        return Err(Error::InvalidStructure("--n must be positive".into()));
    }
    let backend: Option<Backend> = a.backend.as_deref().map(str::parse).transpose()?;
    let exec = exec_of(a.threads);
    let mut out = output(&a.out)?;
    let mut census = EmpiricalDistribution::<CanonicalCode>::new();
    let want_code = a.census.is_some();
    let code = |g: &LabelledGraph| -> Result<Option<CanonicalCode>> {
        if want_code { canonical_code(g).map(Some) } else { Ok(None) }
    };
    let invalid = |what: &str| Error::InvalidStructure(format!("validator rejected a {what}"));

    let f: Box<dyn Fn(&mut ChaCha8Rng) -> Result<Sampled> + Sync + Send> = match a.model {
        Model::Tree => {
            let w = a.weights.load("uniform-plane")?;
            let prof = classify(&w)?;
            let s = SgtSampler::new(&w, &prof, a.n, backend.unwrap_or(Backend::CycleLemma))?;
            let validate = a.validate;
            Box::new(move |rng| {
                let t = s.sample(rng)?;
                if validate && !is_lukasiewicz(&t.outdeg) {
                    return Err(invalid("tree"));
                }
                Ok((json!({ "outdeg": t.outdeg }), None))
            })
        }
        Model::LeafTree => {
            let p = a.weights.load("binary")?;
            let s = LeafTreeSampler::new(&p, a.n, backend.unwrap_or(Backend::CycleLemma))?;
            let validate = a.validate;
            Box::new(move |rng| {
                let t = s.sample(rng)?;
                if validate && !is_lukasiewicz(&t.tree.outdeg) {
                    return Err(invalid("leaf tree"));
                }
                Ok((json!({ "outdeg": t.tree.outdeg }), None))
            })
        }
        model => {
            if a.weights.weights.is_some() {
                return Err(Error::Unsupported("--weights applies to tree models only".into()));
            }
            let class = class_of(model, a.weights.preset.as_deref())?;
            let w = class.weights();
            let prof = classify(&w)?;
            let size = if model == Model::Map { 2 * a.n + 1 } else { a.n };
            let default_backend = if prof.tau == 0.0 { Backend::RecursiveZ } else { Backend::CycleLemma };
            let s = SgtSampler::new(&w, &prof, size, backend.unwrap_or(default_backend))?;
            let bound = w.support_bound().map_or(size, |b| b.min(size));
            let deco = Decorator::new(&class.r, bound)?;
            let validate = a.validate;
            let n = a.n;
            Box::new(move |rng| {
                let t = s.sample(rng)?;
                let e = deco.decorate(&t, rng)?;
                if validate {
                    e.validate()?;
                }
                match model {
                    Model::Graph => {
                        let g = graph_from_enriched(&e, class.catalog.as_deref().expect("catalog"))?;
                        if validate && (!g.is_connected() || g.n != n) {
                            return Err(invalid("graph"));
                        }
                        let c = code(&g)?;
                        Ok((serde_json::to_value(&g)?, c))
                    }
                    Model::Dissection => {
                        let d = dissection_from_enriched(&e)?;
                        if validate {
                            d.validate()?;
                        }
                        let c = code(&d.to_graph())?;
                        Ok((serde_json::to_value(&d)?, c))
                    }
                    Model::Outerplanar | Model::Map => {
                        let m = if model == Model::Map {
                            planarmap_from_enriched(&e, class.catalog.as_deref().expect("catalog"))?
                        } else {
                            outerplanar_from_enriched(&e)?
                        };
                        if validate {
                            m.validate()?;
                            if !m.is_planar() || (model == Model::Map && m.edge_count() != n) {
                                return Err(invalid("map"));
                            }
                        }
                        let c = code(&map_graph(&m))?;
                        Ok((serde_json::to_value(&m)?, c))
                    }
                    Model::Ktree => {
                        let k = match class.kind {
                            presets::ClassKind::KTree(k) => k,
                            _ => unreachable!(),
                        };
                        let kt = ktree_from_enriched(&[e], k)?;
                        if validate {
                            kt.validate()?;
                        }
                        let c = code(&kt.to_graph())?;
                        Ok((serde_json::to_value(&kt)?, c))
                    }
                    Model::Tree | Model::LeafTree => unreachable!(),
                }
            })
        }
    };

    const CHUNK: usize = 4096;
    let mut start = 0;
    while start < a.count {
        let end = (start + CHUNK).min(a.count);
        for item in replicate_range(start..end, a.seed, exec, |_, rng| f(rng)) {
            let (v, c) = item?;
            writeln!(out, "{}", serde_json::to_string(&v)?)?;
            if let Some(c) = c {
                census.add(c);
            }
        }
        start = end;
    }
    out.flush()?;
    if let Some(p) = &a.census {
        census.write_csv(BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

fn experiment_params(a: &ExperimentArgs) -> Result<Params> {
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    if let Some(path) = &a.config {
        for line in std::fs::read_to_string(path)?.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got `{line}`")))?;
            kv.insert(k.trim().into(), v.trim().into());
        }
    }
    for s in &a.params {
        let (k, v) = s.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got `{s}`")))?;
        kv.insert(k.trim().into(), v.trim().into());
    }
    let num = |v: String, key: &str| -> Result<usize> { v.parse().map_err(|_| Error::Parse(format!("bad `{key}`"))) };
    let mut p = Params::default();
    p.preset = a.preset.clone().or(kv.remove("preset"));
    p.n = match a.n {
        Some(n) => Some(n),
        None => kv.remove("n").map(|v| num(v, "n")).transpose()?,
    };
    p.reps = match a.reps {
        Some(r) => Some(r),
        None => kv.remove("reps").map(|v| num(v, "reps")).transpose()?,
    };
    let seed = kv.remove("seed");
    p.seed = match seed {
        Some(s) if a.seed == 0 => s.parse().map_err(|_| Error::Parse("bad `seed`".into()))?,
        _ => a.seed,
    };
    let backend = a.backend.clone().or(kv.remove("backend"));
    p.backend = backend.as_deref().map(str::parse).transpose()?;
    p.threads = match a.threads {
        Some(t) => Some(t),
        None => kv.remove("threads").map(|v| num(v, "threads")).transpose()?,
    };
    p.extra = kv;
    Ok(p)
}

/// `Ok(true)` when the experiment passed.
fn cmd_experiment(a: &ExperimentArgs) -> Result<bool> {
    let p = experiment_params(a)?;
    let report = run_experiment(&a.name, &p)?;
    let mut out = output(&a.out)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    out.flush()?;
    for c in &report.checks {
        eprintln!("{} {}: {:.6} (target {}{})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.target,
            if c.tolerance > 0.0 { format!(" ± {}", c.tolerance) } else { String::new() });
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Classify { weights } => cmd_classify(weights).map(|_| true),
        Command::Sample(a) => cmd_sample(a).map(|_| true),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("etrees: {e}");
            ExitCode::from(2)
        }
    }
}
