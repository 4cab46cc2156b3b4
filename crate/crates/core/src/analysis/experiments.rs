//! Named experiments, each producing a JSON report with its statistics and
//! pass/fail checks at fixed tolerances.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ball::{ball_graph, Metric};
use super::canon::{canonical_code, CanonicalCode};
use super::gibbs::{starter_ratio, GibbsSampler};
use super::patch::PatchedMetric;
use super::stats::{frechet_cdf, ks_against, ks_two_sample, mean, survival, tv_distance, EmpiricalDistribution};
use crate::decode::{
    dissection_from_enriched, graph_from_enriched, ktree_from_enriched, maps::rooted_code, planarmap_from_enriched,
    Dissection, LabelledGraph,
};
use crate::enrich::Decorator;
use crate::error::{Error, Result};
use crate::numeric::{linear_fit, ln_factorial};
use crate::parallel::{replicate, Exec};
use crate::series::{classify, partition_function, preset, CoefficientTable, SeriesProfile, WeightSequence};
use crate::species::presets::{self as classes, EnrichedClass};
use crate::species::Expr;
use crate::treegen::{all_plane_trees, condensation_threshold, Backend, PlaneTree, SgtSampler};

/// Every experiment [`run_experiment`] knows.
pub const EXPERIMENTS: &[&str] = &[
    "classification",
    "enumeration",
    "sampler-exactness",
    "graph-census",
    "root-degree",
    "fringe-degree",
    "spine-geometric",
    "block-clt",
    "frechet",
    "height-tail",
    "fpp-scaling",
    "type3-giant",
    "dissection-path",
    "ktree-degree",
    "tv-identical",
];

/// Inputs shared by all experiments. Unset fields take per-experiment defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Params {
    pub preset: Option<String>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub seed: u64,
    pub backend: Option<Backend>,
    /// `None` or `Some(0)`: all cores; `Some(1)`: sequential.
    pub threads: Option<usize>,
    /// Experiment-specific `key=value` settings.
    pub extra: BTreeMap<String, String>,
}

impl Params {
    pub fn exec(&self) -> Exec {
        match self.threads {
            Some(1) => Exec::Sequential,
            Some(t) => Exec::Threads(t),
            None => Exec::default(),
        }
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.extra.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
    /// `|value − target| ≤ tolerance`.
    Near,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, target: bound, tolerance: 0.0, relation: Relation::AtMost, pass: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, target: bound, tolerance: 0.0, relation: Relation::AtLeast, pass: value >= bound }
    }

    pub fn near(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let pass = (value - target).abs() <= tolerance;
        Self { name: name.into(), value, target, tolerance, relation: Relation::Near, pass }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub params: Params,
    pub stats: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    fn new(name: &str, params: &Params) -> Self {
        Self { experiment: name.into(), params: params.clone(), stats: BTreeMap::new(), checks: Vec::new(), pass: true }
    }

    fn stat(&mut self, key: &str, v: impl Serialize) {
        self.stats.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn run_experiment(name: &str, p: &Params) -> Result<Report> {
    let mut r = Report::new(name, p);
    match name {
        "classification" => classification(p, &mut r)?,
        "enumeration" => enumeration(p, &mut r)?,
        "sampler-exactness" => sampler_exactness(p, &mut r)?,
        "graph-census" => graph_census(p, &mut r)?,
        "root-degree" => degree_law(p, &mut r, true)?,
        "fringe-degree" => degree_law(p, &mut r, false)?,
        "spine-geometric" => spine_geometric(p, &mut r)?,
        "block-clt" => block_clt(p, &mut r)?,
        "frechet" => frechet(p, &mut r)?,
        "height-tail" => height_tail(p, &mut r)?,
        "fpp-scaling" => fpp_scaling(p, &mut r)?,
        "type3-giant" => type3_giant(p, &mut r)?,
        "dissection-path" => dissection_path(p, &mut r)?,
        "ktree-degree" => ktree_degree(p, &mut r)?,
        "tv-identical" => tv_identical(p, &mut r)?,
        other => return Err(Error::Unknown { kind: "experiment", name: other.into() }),
    }
    Ok(r)
}

fn profile(spec: &str) -> Result<(WeightSequence, SeriesProfile)> {
    let w = preset(spec)?;
    let p = classify(&w)?;
    Ok((w, p))
}

/// Reject impossible replicate counts and sizes early.
fn positive(what: &str, x: usize) -> Result<usize> {
    if x == 0 {
        return Err(Error::InvalidStructure(format!("{what} must be positive")));
    }
    Ok(x)
}

fn classification(p: &Params, r: &mut Report) -> Result<()> {
    let names: Vec<String> = match &p.preset {
        Some(s) => vec![s.clone()],
        None => ["uniform-plane", "labelled-tree", "ktree:k=2", "ktree:k=3", "excool", "excool-dissection"]
            .map(String::from)
            .to_vec(),
    };
    const TOL: f64 = 1e-6;
    for name in &names {
        let (_, prof) = profile(name)?;
        r.stat(name, &prof);
        match name.as_str() {
            "uniform-plane" => {
                r.check(Check::near("uniform-plane tau", prof.tau, 0.5, TOL));
                r.check(Check::near("uniform-plane sigma2", prof.sigma2, 2.0, TOL));
            }
            "labelled-tree" => {
                r.check(Check::near("labelled-tree tau", prof.tau, 1.0, TOL));
                r.check(Check::near("labelled-tree sigma2", prof.sigma2, 1.0, TOL));
            }
            "excool" => r.check(Check::near("excool nu", prof.nu, 23.0 / 60.0, TOL)),
            "excool-dissection" => r.check(Check::near("excool-dissection nu", prof.nu, 3.0 / 23.0, TOL)),
            s => {
                if let Some(k) = s.strip_prefix("ktree:k=").and_then(|k| k.parse::<f64>().ok()) {
                    r.check(Check::near(format!("{s} tau"), prof.tau, 1.0 / k, TOL));
                }
            }
        }
    }
    Ok(())
}

/// `Σ_T Π ω_{d⁺(v)}` over all plane trees with `m` vertices.
fn brute_force_z(w: &WeightSequence, m: usize) -> f64 {
    all_plane_trees(m).iter().map(|t| t.outdeg.iter().map(|&d| w.coeff(d)).product::<f64>()).sum()
}

/// Dissections of a polygon with `m + 1` vertices, by brute force over
/// diagonal subsets.
fn brute_force_dissections(m: usize) -> usize {
    let n = m as u32;
    let diag: Vec<(u32, u32)> =
        (0..=n).flat_map(|a| ((a + 2)..=n).map(move |b| (a, b))).filter(|&e| e != (0, n)).collect();
    (0u64..1 << diag.len())
        .filter(|mask| {
            let d = Dissection { n: m, diagonals: (0..diag.len()).filter(|i| mask >> i & 1 == 1).map(|i| diag[i]).collect() };
            d.validate().is_ok()
        })
        .count()
}

fn enumeration(p: &Params, r: &mut Report) -> Result<()> {
    let n = p.n.unwrap_or(8);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    for name in ["uniform-plane", "labelled-tree"] {
        let w = preset(name)?;
        let z = partition_function(&w, n)?;
        let brute: Vec<f64> = (1..=n).map(|m| brute_force_z(&w, m)).collect();
        let err = (1..=n).map(|m| rel(z.values[m], brute[m - 1])).fold(0.0, f64::max);
        r.stat(&format!("{name} Z"), &z.values[1..]);
        r.check(Check::at_most(format!("{name} Z vs brute force"), err, 1e-9));
    }
    let dn = n.min(6);
    let w = preset("dissection")?;
    let z = partition_function(&w, dn)?;
    let brute: Vec<usize> = (1..=dn).map(brute_force_dissections).collect();
    let err = (1..=dn).map(|m| rel(z.values[m], brute[m - 1] as f64)).fold(0.0, f64::max);
    r.stat("dissection counts", &brute);
    r.check(Check::at_most("dissection Z vs brute force", err, 1e-9));

    let edges = p.get("edges", 3usize)?;
    let class = classes::planar_maps(edges)?;
    let cat = class.catalog.clone().expect("maps carry a catalog");
    let w = class.weights();
    let z = partition_function(&w, 2 * edges + 1)?;
    let mut counts = Vec::new();
    let mut err: f64 = 0.0;
    for m in 0..=edges {
        let mut codes = std::collections::BTreeSet::new();
        for t in all_plane_trees(2 * m + 1) {
            for e in all_core_choices(&t, &cat) {
                codes.insert(rooted_code(&planarmap_from_enriched(&e, &cat)?));
            }
        }
        err = err.max(rel(z.values[2 * m + 1], codes.len() as f64));
        counts.push(codes.len());
    }
    r.stat("rooted map counts", &counts);
    r.check(Check::at_most("map Z vs distinct decoded maps", err, 1e-9));
    Ok(())
}

/// Every decoration of `t` by `1 + Q` (empty corner or a nonseparable core).
fn all_core_choices(t: &PlaneTree, cat: &crate::species::Catalog) -> Vec<crate::enrich::EnrichedTree> {
    use crate::species::Structure;
    let mut choices: Vec<Vec<Structure>> = Vec::new();
    for &d in &t.outdeg {
        if d == 0 {
            choices.push(vec![Structure::Branch(0, Box::new(Structure::Unit))]);
        } else {
            let atoms: Vec<u32> = (0..d as u32).collect();
            choices.push(
                (0..cat.entries(d).len())
                    .map(|i| {
                        let entry = Structure::Entry { catalog: cat.id, index: i as u32, atoms: atoms.clone() };
                        Structure::Branch(1, Box::new(entry))
                    })
                    .collect(),
            );
        }
    }
    let total: usize = choices.iter().map(Vec::len).product();
    let matching: Vec<Vec<u32>> = t.outdeg.iter().map(|&d| (0..d as u32).collect()).collect();
    (0..total)
        .map(|mut idx| {
            let deco = choices
                .iter()
                .map(|c| {
                    let s = c[idx % c.len()].clone();
                    idx /= c.len();
                    Some(s)
                })
                .collect();
            crate::enrich::EnrichedTree { tree: t.clone(), deco, matching: matching.clone() }
        })
        .collect()
}

fn sampler_exactness(p: &Params, r: &mut Report) -> Result<()> {
    let spec = p.preset.clone().unwrap_or_else(|| "uniform-plane".into());
    let n = positive("n", p.n.unwrap_or(5))?;
    let reps = positive("reps", p.reps.unwrap_or(200_000))?;
    let (w, prof) = profile(&spec)?;
    let trees = all_plane_trees(n);
    let weights: Vec<f64> = trees.iter().map(|t| t.outdeg.iter().map(|&d| w.coeff(d)).product()).collect();
    let total: f64 = weights.iter().sum();
    let exact: Vec<(Vec<usize>, f64)> = trees.iter().zip(&weights).map(|(t, x)| (t.outdeg.clone(), x / total)).collect();
    let mut censuses = Vec::new();
    for (i, backend) in [Backend::CycleLemma, Backend::RejectionGW, Backend::RecursiveZ].into_iter().enumerate() {
        let s = SgtSampler::new(&w, &prof, n, backend)?;
        let seed = p.seed ^ (i as u64 + 1);
        let trees = replicate(reps, seed, p.exec(), |_, rng| s.sample(rng).map(|t| t.outdeg));
        let census: EmpiricalDistribution<Vec<usize>> = trees.into_iter().collect::<Result<_>>()?;
        let tv = census.tv_to(exact.iter().map(|(k, x)| (k, *x)))?;
        r.check(Check::at_most(format!("{backend:?} TV vs exact"), tv, 0.01));
        censuses.push((backend, census));
    }
    for i in 0..censuses.len() {
        for j in (i + 1)..censuses.len() {
            let tv = tv_distance(&censuses[i].1, &censuses[j].1)?;
            r.check(Check::at_most(format!("{:?} vs {:?} TV", censuses[i].0, censuses[j].0), tv, 0.015));
        }
    }
    r.stat("support", trees.len());
    Ok(())
}

/// All labelled connected graphs on `0..n`, each rooted at every vertex,
/// with the block weight product. Codes are canonical rooted codes.
pub fn rooted_connected_law(n: usize, block_weight: impl Fn(usize) -> f64) -> Result<BTreeMap<CanonicalCode, f64>> {
    let pairs: Vec<(u32, u32)> = (0..n as u32).flat_map(|a| ((a + 1)..n as u32).map(move |b| (a, b))).collect();
    let mut law = BTreeMap::new();
    let mut total = 0.0;
    for mask in 0u64..1 << pairs.len() {
        let edges = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]);
        let g = LabelledGraph::new(n, None, edges)?;
        if !g.is_connected() {
            continue;
        }
        let wt: f64 = super::extremes::block_sizes(&g).iter().map(|&b| block_weight(b)).product();
        for root in 0..n as u32 {
            let rooted = LabelledGraph { root: Some(root), ..g.clone() };
            *law.entry(canonical_code(&rooted)?).or_insert(0.0) += wt;
            total += wt;
        }
    }
    for v in law.values_mut() {
        *v /= total;
    }
    Ok(law)
}

fn graph_census(p: &Params, r: &mut Report) -> Result<()> {
    let n = positive("n", p.n.unwrap_or(4))?;
    let reps = positive("reps", p.reps.unwrap_or(100_000))?;
    let class = classes::block_graph(n.saturating_sub(1).max(1))?;
    let cat = class.catalog.clone().expect("graph classes carry a catalog");
    let w = class.weights();
    let prof = classify(&w)?;
    let sampler = SgtSampler::new(&w, &prof, n, p.backend.unwrap_or(Backend::RecursiveZ))?;
    let deco = Decorator::new(&class.r, n)?;
    let codes = replicate(reps, p.seed, p.exec(), |_, rng| -> Result<CanonicalCode> {
        let t = sampler.sample(rng)?;
        let e = deco.decorate(&t, rng)?;
        canonical_code(&graph_from_enriched(&e, &cat)?)
    });
    let census: EmpiricalDistribution<CanonicalCode> = codes.into_iter().collect::<Result<_>>()?;
    let law = rooted_connected_law(n, |_| 1.0)?;
    let tv = census.tv_to(law.iter().map(|(k, x)| (k, *x)))?;
    r.stat("classes", law.len());
    r.stat("observed classes", census.support_size());
    r.check(Check::at_most("TV vs exhaustive law", tv, 0.02));
    Ok(())
}

fn degree_law(p: &Params, r: &mut Report, at_root: bool) -> Result<()> {
    let spec = p.preset.clone().unwrap_or_else(|| "uniform-plane".into());
    let n = positive("n", p.n.unwrap_or(10_000))?;
    let reps = positive("reps", p.reps.unwrap_or(10_000))?;
    let (w, prof) = profile(&spec)?;
    let s = SgtSampler::new(&w, &prof, n, p.backend.unwrap_or(Backend::CycleLemma))?;
    let degs = replicate(reps, p.seed, p.exec(), |_, rng| -> Result<usize> {
        let t = s.sample(rng)?;
        Ok(if at_root { t.outdeg[0] } else { t.outdeg[rng.random_range(0..t.len())] })
    });
    let census: EmpiricalDistribution<usize> = degs.into_iter().collect::<Result<_>>()?;
    let len = n.min(1 << 16);
    let target = if at_root { prof.size_biased(&w, len) } else { prof.offspring_pmf(&w, len) };
    let tv = census.tv_to_pmf(&target)?;
    let shown = census.pmf().len().max(8).min(target.len());
    r.stat("empirical", census.pmf());
    r.stat("target", &target[..shown]);
    let (name, tol) = if at_root { ("root outdegree TV", 0.03) } else { ("uniform vertex outdegree TV", 0.02) };
    r.check(Check::at_most(name, tv, tol));
    Ok(())
}

/// Steps from `v` to its first strict ancestor of outdegree above `omega`,
/// minus one; `None` if there is none.
pub fn spine_length(t: &PlaneTree, parents: &[usize], v: usize, omega: usize) -> Option<usize> {
    let mut x = v;
    let mut steps = 0;
    while parents[x] != usize::MAX {
        x = parents[x];
        steps += 1;
        if t.outdeg[x] > omega {
            return Some(steps - 1);
        }
    }
    None
}

fn spine_geometric(p: &Params, r: &mut Report) -> Result<()> {
    let spec = p.preset.clone().unwrap_or_else(|| "excool".into());
    let n = positive("n", p.n.unwrap_or(50_000))?;
    let reps = positive("reps", p.reps.unwrap_or(2000))?;
    let (w, prof) = profile(&spec)?;
    let omega = condensation_threshold(n);
    let s = SgtSampler::new(&w, &prof, n, p.backend.unwrap_or(Backend::CycleLemma))?;
    let lens = replicate(reps, p.seed, p.exec(), |_, rng| -> Result<usize> {
        let t = s.sample(rng)?;
        let v = rng.random_range(0..t.len());
        Ok(spine_length(&t, &t.parents(), v, omega).unwrap_or(usize::MAX))
    });
    let census: EmpiricalDistribution<usize> = lens.into_iter().collect::<Result<_>>()?;
    let nu = prof.nu;
    let target: Vec<f64> = (0..400).map(|l| nu.powi(l) * (1.0 - nu)).collect();
    let tv = census.tv_to_pmf(&target)?;
    r.stat("nu", nu);
    r.stat("omega", omega);
    r.stat("no hub above", census.prob(&usize::MAX));
    r.stat("empirical", census.counts.iter().filter(|(&k, _)| k < 64).map(|(k, c)| (*k, *c)).collect::<Vec<_>>());
    r.check(Check::at_most("spine length TV vs geometric", tv, 0.05));
    Ok(())
}

/// Largest and second-largest outdegree of one tree per replicate.
fn top_two(w: &WeightSequence, prof: &SeriesProfile, n: usize, reps: usize, p: &Params, seed: u64) -> Result<Vec<(usize, usize)>> {
    let s = SgtSampler::new(w, prof, n, p.backend.unwrap_or(Backend::CycleLemma))?;
    replicate(reps, seed, p.exec(), |_, rng| -> Result<(usize, usize)> {
        let t = s.sample(rng)?;
        let (mut a, mut b) = (0, 0);
        for &d in &t.outdeg {
            if d > a {
                b = a;
                a = d;
            } else if d > b {
                b = d;
            }
        }
        Ok((a, b))
    })
    .into_iter()
    .collect()
}

fn block_clt(p: &Params, r: &mut Report) -> Result<()> {
    let spec = p.preset.clone().unwrap_or_else(|| "power:beta=2.5".into());
    let n = positive("n", p.n.unwrap_or(100_000))?;
    let reps = positive("reps", p.reps.unwrap_or(500))?;
    let alpha: f64 = p.get("alpha", 1.5)?;
    let (w, prof) = profile(&spec)?;
    let nu = prof.nu;
    let big = top_two(&w, &prof, n, reps, p, p.seed)?;
    let half = top_two(&w, &prof, n / 2, reps, p, p.seed ^ 0x5eed)?;
    let m = mean(&big.iter().map(|&(a, _)| a as f64 / n as f64).collect::<Vec<_>>());
    let fluct = |v: &[(usize, usize)], n: usize| -> Vec<f64> {
        let n = n as f64;
        v.iter().map(|&(a, _)| ((1.0 - nu) * n - a as f64) / n.powf(1.0 / alpha)).collect()
    };
    let ks = ks_two_sample(&fluct(&big, n), &fluct(&half, n / 2));
    r.stat("nu", nu);
    r.stat("mean Y1/n", m);
    r.check(Check::near("mean Y1/n vs 1 - nu", m, 1.0 - nu, 0.02));
    r.check(Check::at_most("fluctuation KS between n/2 and n", ks, 0.1));
    Ok(())
}

/// `c′` with `π_k ~ c′ k^{−α−1}`, read off far in the tail.
fn tail_constant(w: &WeightSequence, prof: &SeriesProfile, alpha: f64) -> f64 {
    let k = 1_000_000usize;
    (w.ln_coeff(k) + k as f64 * prof.tau.ln() - prof.phi_tau.ln() + (alpha + 1.0) * (k as f64).ln()).exp()
}

fn frechet(p: &Params, r: &mut Report) -> Result<()> {
    let spec = p.preset.clone().unwrap_or_else(|| "power:beta=2.5".into());
    let n = positive("n", p.n.unwrap_or(100_000))?;
    let reps = positive("reps", p.reps.unwrap_or(500))?;
    let alpha: f64 = p.get("alpha", 1.5)?;
    let (w, prof) = profile(&spec)?;
    let c = tail_constant(&w, &prof, alpha);
    let xs: Vec<f64> =
        top_two(&w, &prof, n, reps, p, p.seed)?.iter().map(|&(_, b)| b as f64 / (n as f64).powf(1.0 / alpha)).collect();
    let ks = ks_against(&xs, |x| frechet_cdf(x, c, alpha));
    r.stat("c_prime", c);
    r.stat("median", {
        let mut v = xs.clone();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    });
    r.check(Check::at_most("KS of n^(-1/alpha) Y2 vs Frechet", ks, 0.1));
    Ok(())
}

/// Fit `ln P(H ≥ h)` against `h²/n` over `P(H ≥ h) ≤ ½` while at least
/// `min_count` samples reach `h`. Returns `(slope, intercept, r², points)`.
pub fn height_tail_fit(heights: &[f64], n: usize, min_count: usize) -> (f64, f64, f64, usize) {
    let total = heights.len() as f64;
    let pts: Vec<(f64, f64)> = survival(heights)
        .into_iter()
        .filter(|&(_, s)| s <= 0.5 && s * total >= min_count as f64)
        .map(|(h, s)| (h * h / n as f64, s.ln()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let (a, b, r2) = linear_fit(&xs, &ys);
    (b, a, r2, pts.len())
}

fn height_tail(p: &Params, r: &mut Report) -> Result<()> {
    let spec = p.preset.clone().unwrap_or_else(|| "uniform-plane".into());
    let n = positive("n", p.n.unwrap_or(10_000))?;
    let reps = positive("reps", p.reps.unwrap_or(10_000))?;
    let min_count = p.get("min-count", 10usize)?;
    let (w, prof) = profile(&spec)?;
    let s = SgtSampler::new(&w, &prof, n, p.backend.unwrap_or(Backend::CycleLemma))?;
    let hs = replicate(reps, p.seed, p.exec(), |_, rng| -> Result<f64> {
        let t = s.sample(rng)?;
        Ok(t.depths().into_iter().max().unwrap_or(0) as f64)
    });
    let hs: Vec<f64> = hs.into_iter().collect::<Result<_>>()?;
    let (slope, intercept, r2, points) = height_tail_fit(&hs, n, min_count);
    r.stat("slope", slope);
    r.stat("intercept", intercept);
    r.stat("points", points);
    r.check(Check::at_least("R^2 of ln P(H >= h) vs h^2/n", if points >= 3 { r2 } else { 0.0 }, 0.98));
    Ok(())
}

/// First-passage diameter (double sweep from the root vertex) of the map
/// decoded from one sample, with exponential(1) edge weights.
fn fpp_diameters(class: &EnrichedClass, edges: usize, reps: usize, p: &Params, seed: u64) -> Result<Vec<f64>> {
    use rand_distr::{Distribution, Exp};
    let cat = class.catalog.clone().expect("maps carry a catalog");
    let w = class.weights();
    let prof = classify(&w)?;
    let size = 2 * edges + 1;
    let s = SgtSampler::new(&w, &prof, size, p.backend.unwrap_or(Backend::CycleLemma))?;
    let deco = Decorator::new(&class.r, 2 * cat.max_size())?;
    replicate(reps, seed, p.exec(), |_, rng| -> Result<f64> {
        let t = s.sample(rng)?;
        let e = deco.decorate(&t, rng)?;
        let m = planarmap_from_enriched(&e, &cat)?;
        if m.edge_count() != edges {
            return Err(Error::InvalidStructure("decoded map has the wrong size".into()));
        }
        let (nv, es) = m.multigraph();
        let exp = Exp::new(1.0).expect("rate 1");
        let metric = PatchedMetric::from_edges(nv, es.into_iter().map(|(a, b)| (a, b, exp.sample(rng))));
        Ok(metric.diameter_double_sweep(m.vertex_of()[m.root as usize]))
    })
    .into_iter()
    .collect()
}

/// Fit `S(x) ≈ exp(c₀ + c₁x²)` by least squares on `ln S` over the tail
/// `S ≤ ½`, then return `c₁` and the largest excess of the empirical
/// survival over the fitted bound, in binomial standard errors
/// `√(F(1−F)/N)` of the bound `F`. Points where the bound reaches 1 hold
/// trivially.
pub fn tail_excess(xs: &[f64]) -> (f64, f64) {
    let total = xs.len() as f64;
    let surv = survival(xs);
    let pts: Vec<(f64, f64)> = surv.iter().filter(|&&(_, s)| s <= 0.5).map(|&(x, s)| (x * x, s.ln())).collect();
    let (a, b): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let (c0, c1, _) = linear_fit(&a, &b);
    let worst = surv
        .iter()
        .filter_map(|&(x, s)| {
            let f = (c0 + c1 * x * x).exp();
            (f < 1.0).then(|| (s - f) / (f * (1.0 - f) / total).sqrt())
        })
        .fold(f64::NEG_INFINITY, f64::max);
    (c1, worst.max(0.0))
}

fn fpp_scaling(p: &Params, r: &mut Report) -> Result<()> {
    let n = positive("n", p.n.unwrap_or(2500))?;
    let reps = positive("reps", p.reps.unwrap_or(100))?;
    let cap = p.get("edges", 6usize)?;
    let class = classes::planar_maps(cap)?;
    let small = fpp_diameters(&class, n, reps, p, p.seed)?;
    let large = fpp_diameters(&class, 4 * n, reps, p, p.seed ^ 0xf0)?;
    let ratio = mean(&large) / mean(&small);
    let scaled: Vec<f64> = large.iter().map(|d| d / ((4 * n) as f64).sqrt()).collect();
    let (slope, excess) = tail_excess(&scaled);
    r.stat("mean D / sqrt(n) small", mean(&small) / (n as f64).sqrt());
    r.stat("mean D / sqrt(n) large", mean(&scaled));
    r.stat("tail slope", slope);
    r.check(Check::near("E D(4n) / E D(n)", ratio, 2.0, 0.2));
    r.check(Check::at_most("largest survival excess over fitted tail, binomial sd", excess, 3.0));
    Ok(())
}

/// A uniform labelled graph on `0..n` (each edge with probability ½).
pub fn uniform_graph<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LabelledGraph {
    let mut edges = Vec::new();
    for a in 0..n as u32 {
        for b in (a + 1)..n as u32 {
            if rng.random::<bool>() {
                edges.push((a, b));
            }
        }
    }
    LabelledGraph::new(n, None, edges).expect("valid edges")
}

/// A uniform connected labelled graph on `0..k`, by rejection.
pub fn uniform_connected_graph<R: Rng + ?Sized>(k: usize, rng: &mut R) -> LabelledGraph {
    loop {
        let g = uniform_graph(k, rng);
        if g.is_connected() {
            return g;
        }
    }
}

fn type3_giant(p: &Params, r: &mut Report) -> Result<()> {
    let n = positive("n", p.n.unwrap_or(30))?;
    let reps = positive("reps", p.reps.unwrap_or(1000))?;
    let connected = replicate(reps, p.seed, p.exec(), |_, rng| uniform_graph(n, rng).is_connected());
    let frac = connected.iter().filter(|&&c| c).count() as f64 / reps as f64;
    let gibbs = GibbsSampler::new(&Expr::set(crate::species::SizeSet::ALL), &classes::connected_graphs_blob(n), n)?;
    let parts = replicate(reps, p.seed ^ 0x61bb5, p.exec(), |_, rng| -> Result<(usize, bool)> {
        let g = gibbs.sample(rng)?;
        // Fill every component with a uniform connected graph on its labels.
        let ok = g.sizes.iter().all(|&k| uniform_connected_graph(k, rng).is_connected());
        Ok((g.sizes[0], ok))
    });
    let parts: Vec<(usize, bool)> = parts.into_iter().collect::<Result<_>>()?;
    let giant = parts.iter().filter(|&&(s, _)| s + 2 >= n).count() as f64 / reps as f64;
    let counts = classes::connected_graph_counts(n.max(30));
    let a = CoefficientTable {
        values: counts.iter().enumerate().map(|(k, c)| (crate::numeric::ln_bigint(c) - ln_factorial(k)).exp()).collect(),
    };
    let ratios: Vec<f64> = [15, 20, 25, 30].iter().map(|&m| starter_ratio(&a, m, 2)).collect::<Result<_>>()?;
    let monotone = ratios.windows(2).all(|x| x[1] < x[0]);
    r.stat("starter ratios n=15,20,25,30", &ratios);
    r.stat("components connected", parts.iter().all(|x| x.1));
    r.check(Check::at_least("connected fraction", frac, 0.95));
    r.check(Check::at_least("largest component >= n - 2 fraction", giant, 0.9));
    r.check(Check::at_least("starter ratio decreasing", f64::from(u8::from(monotone)), 1.0));
    Ok(())
}

/// Whether a rooted ball is a path on five vertices.
fn is_p5(g: &LabelledGraph) -> bool {
    g.n == 5 && g.edges.len() == 4 && g.is_connected() && (0..5).all(|v| g.degree(v) <= 2)
}

fn dissection_path(p: &Params, r: &mut Report) -> Result<()> {
    let n = positive("n", p.n.unwrap_or(200))?;
    let reps = positive("reps", p.reps.unwrap_or(2000))?;
    let class = classes::dissection_factorial()?;
    let w = class.weights();
    let prof = classify(&w)?;
    let s = SgtSampler::new(&w, &prof, n, p.backend.unwrap_or(Backend::RecursiveZ))?;
    let deco = Decorator::new(&class.r, n)?;
    let hits = replicate(reps, p.seed, p.exec(), |_, rng| -> Result<bool> {
        let t = s.sample(rng)?;
        let e = deco.decorate(&t, rng)?;
        let g = dissection_from_enriched(&e)?.to_graph();
        let v = rng.random_range(0..g.n) as u32;
        Ok(is_p5(&ball_graph(&g, v, 2, Metric::Graph)))
    });
    let hits: Vec<bool> = hits.into_iter().collect::<Result<_>>()?;
    let frac = hits.iter().filter(|&&h| h).count() as f64 / reps as f64;
    r.check(Check::at_least("V_2 ball is a path on five vertices", frac, 0.8));
    Ok(())
}

/// Degree law of a uniform vertex in a large random k-tree: the
/// coefficients of `u(z) = z^k f(z)^k` with `f = exp((z f^{k−1} − 1)/k)`.
/// With `literal` the inner power is `f^k` instead.
pub fn ktree_degree_law(k: usize, len: usize, literal: bool) -> Vec<f64> {
    let power = if literal { k } else { k - 1 };
    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; len];
        for (i, &x) in a.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(len - i) {
                c[i + j] += x * y;
            }
        }
        c
    };
    let pow = |a: &[f64], e: usize| -> Vec<f64> {
        let mut out = vec![0.0; len];
        out[0] = 1.0;
        for _ in 0..e {
            out = mul(&out, a);
        }
        out
    };
    let mut f = vec![0.0; len];
    f[0] = (-1.0 / k as f64).exp();
    for _ in 0..len {
        // g = z f^power / k, then f = e^{-1/k} exp(g).
        let fp = pow(&f, power);
        let mut g = vec![0.0; len];
        for i in 1..len {
            g[i] = fp[i - 1] / k as f64;
        }
        let mut e = vec![0.0; len];
        e[0] = (-1.0 / k as f64).exp();
        for m in 1..len {
            e[m] = (1..=m).map(|j| j as f64 * g[j] * e[m - j]).sum::<f64>() / m as f64;
        }
        f = e;
    }
    let fk = pow(&f, k);
    let mut u = vec![0.0; len];
    if k < len {
        u[k..].copy_from_slice(&fk[..len - k]);
    }
    u
}

fn ktree_degree(p: &Params, r: &mut Report) -> Result<()> {
    let k = p.get("k", 2usize)?;
    if k == 0 {
        return Err(Error::InvalidStructure("k-trees need k ≥ 1".into()));
    }
    let n = positive("n", p.n.unwrap_or(10_000))?;
    let reps = positive("reps", p.reps.unwrap_or(5000))?;
    let trees = positive("trees", p.get("trees", 1usize)?)?;
    let class = classes::ktree(k);
    let w = class.weights();
    let prof = classify(&w)?;
    let s = SgtSampler::new(&w, &prof, n, p.backend.unwrap_or(Backend::CycleLemma))?;
    let per = reps.div_ceil(trees);
    let chunks = replicate(trees, p.seed, p.exec(), |_, rng| -> Result<Vec<usize>> {
        let t = s.sample(rng)?;
        let e = crate::enrich::decorate(&t, &class.r, rng)?;
        let kt = ktree_from_enriched(&[e], k)?;
        let mut deg = vec![0usize; kt.n_vertices];
        for (a, b) in kt.edges() {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        Ok((0..per).map(|_| deg[rng.random_range(0..deg.len())]).collect())
    });
    let mut census = EmpiricalDistribution::new();
    for c in chunks {
        for d in c? {
            census.add(d);
        }
    }
    let target = ktree_degree_law(k, 120, false);
    let literal = ktree_degree_law(k, 120, true);
    r.stat("empirical", census.pmf());
    r.stat("target", &target[..30]);
    r.stat("TV vs literal formula", census.tv_to_pmf(&literal)?);
    r.check(Check::at_most("degree TV vs z^k f^k law", census.tv_to_pmf(&target)?, 0.03));
    Ok(())
}

fn tv_identical(p: &Params, r: &mut Report) -> Result<()> {
    let spec = p.preset.clone().unwrap_or_else(|| "uniform-plane".into());
    let n = positive("n", p.n.unwrap_or(100))?;
    let reps = positive("reps", p.reps.unwrap_or(1000))?;
    let (w, prof) = profile(&spec)?;
    let s = SgtSampler::new(&w, &prof, n, p.backend.unwrap_or(Backend::CycleLemma))?;
    let run = || -> Result<EmpiricalDistribution<usize>> {
        replicate(reps, p.seed, p.exec(), |_, rng| s.sample(rng).map(|t| t.outdeg[0])).into_iter().collect()
    };
    let (a, b) = (run()?, run()?);
    r.check(Check::at_most("TV of a census with its rerun", tv_distance(&a, &b)?, 0.0));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_tree_enumeration_counts() {
        let counts: Vec<usize> = (1..=8).map(|n| all_plane_trees(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 14, 42, 132, 429]);
    }

    #[test]
    fn dissection_brute_force() {
        let c: Vec<usize> = (1..=5).map(brute_force_dissections).collect();
        assert_eq!(c, vec![1, 1, 3, 11, 45]);
    }

    #[test]
    fn ktree_law_sums_to_one() {
        for k in [1, 2, 3] {
            let u = ktree_degree_law(k, 200, false);
            let s: f64 = u.iter().sum();
            assert!((s - 1.0).abs() < 1e-6, "k = {k}: {s}");
        }
    }

    #[test]
    fn rooted_law_on_three_vertices() {
        // Connected graphs on 3 labels: 3 paths and 1 triangle; 12 rootings
        // fall into: path at an end (6), path at the centre (3), triangle (3).
        let law = rooted_connected_law(3, |_| 1.0).unwrap();
        let mut p: Vec<f64> = law.values().copied().collect();
        p.sort_by(f64::total_cmp);
        assert_eq!(p, vec![0.25, 0.25, 0.5]);
    }

    #[test]
    fn unknown_experiment() {
        assert!(run_experiment("nope", &Params::default()).is_err());
    }

    #[test]
    fn tv_identical_passes() {
        let p = Params { n: Some(20), reps: Some(200), seed: 3, ..Params::default() };
        let r = run_experiment("tv-identical", &p).unwrap();
        assert!(r.pass);
    }
}
