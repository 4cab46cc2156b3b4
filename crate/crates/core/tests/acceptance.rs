//! The fourteen acceptance criteria, one printed line each.
//!
//! Every criterion runs its experiment at full size and, where the target
//! is a derived quantity, recomputes that target here from a closed form
//! or an exhaustive count that does not go through the code under test.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use etrees::analysis::{run_experiment, Params, Report};
use etrees::decode::{graph_from_enriched, LabelledGraph};
use etrees::enrich::Decorator;
use etrees::series::{classify, preset, Kind};
use etrees::species::presets;
use etrees::treegen::{Backend, SgtSampler};

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(name: &str) -> (Report, Duration) {
    let t = Instant::now();
    let r = run_experiment(name, &Params::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
    (r, t.elapsed())
}

fn summary(r: &Report) -> String {
    r.checks.iter().map(|c| format!("{} = {:.4}", c.name, c.value)).collect::<Vec<_>>().join("; ")
}

fn stat_vec(r: &Report, key: &str) -> Vec<f64> {
    match r.stats.get(key) {
        Some(Value::Array(v)) => v.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)).collect(),
        other => panic!("stat {key} missing: {other:?}"),
    }
}

fn stat_f64(r: &Report, key: &str) -> f64 {
    r.stats.get(key).and_then(Value::as_f64).unwrap_or_else(|| panic!("stat {key} missing"))
}

fn within(d: Duration, limit_secs: u64) -> (bool, String) {
    (d <= Duration::from_secs(limit_secs), format!("{:.1}s (limit {limit_secs}s)", d.as_secs_f64()))
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

fn c1_classification() -> Outcome {
    let (r, d) = run("classification");
    let mut ok = r.pass;
    let near = |x: f64, y: f64| (x - y).abs() <= 1e-6;
    let prof = |s: &str| classify(&preset(s).unwrap()).unwrap();
    let plane = prof("uniform-plane");
    ok &= near(plane.tau, 0.5) && near(plane.sigma2, 2.0) && plane.kind == Kind::Ia;
    let lab = prof("labelled-tree");
    ok &= near(lab.tau, 1.0) && near(lab.sigma2, 1.0) && lab.kind == Kind::Ia;
    ok &= near(prof("ktree:k=2").tau, 0.5) && near(prof("ktree:k=3").tau, 1.0 / 3.0);
    let ex = prof("excool");
    ok &= near(ex.nu, 23.0 / 60.0) && ex.kind == Kind::II;
    ok &= near(prof("excool-dissection").nu, 3.0 / 23.0);
    let (t_ok, t) = within(d, 1);
    Outcome { pass: ok && t_ok, detail: format!("{} checks, {t}", r.checks.len()) }
}

fn c2_enumeration() -> Outcome {
    let (r, d) = run("enumeration");
    // Catalan(m − 1) plane trees and m^{m−1}/m! for rooted labelled trees.
    let catalan = |m: usize| -> f64 { (1..m).map(|i| (m - 1 + i) as f64 / i as f64).product::<f64>() / m as f64 };
    let plane = stat_vec(&r, "uniform-plane Z");
    let lab = stat_vec(&r, "labelled-tree Z");
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b;
    let mut ok = r.pass && plane.len() == 8 && lab.len() == 8;
    for m in 1..=8 {
        ok &= rel(plane[m - 1], catalan(m));
        ok &= rel(lab[m - 1], ((m - 1) as f64 * (m as f64).ln() - ln_factorial(m)).exp());
    }
    let dis = stat_vec(&r, "dissection counts");
    ok &= dis[..5] == [1.0, 1.0, 3.0, 11.0, 45.0];
    let maps = stat_vec(&r, "rooted map counts");
    ok &= maps == [1.0, 2.0, 9.0, 54.0];
    let (t_ok, t) = within(d, 120);
    Outcome { pass: ok && t_ok, detail: format!("{}; maps {maps:?}; {t}", summary(&r)) }
}

fn c3_sampler_exactness() -> Outcome {
    let (r, d) = run("sampler-exactness");
    // The uniform plane tree law on five vertices: Catalan(4) = 14 trees.
    let ok = r.pass && stat_f64(&r, "support") == 14.0;
    let (t_ok, t) = within(d, 60);
    Outcome { pass: ok && t_ok, detail: format!("{}; {t}", summary(&r)) }
}

fn permutations(n: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, (n - 1) as u32);
            out.push(q);
        }
    }
    out
}

/// Rooted isomorphism class by minimising over every relabelling that
/// sends the root to 0.
fn brute_rooted_code(n: usize, root: u32, edges: &[(u32, u32)]) -> Vec<(u32, u32)> {
    permutations(n)
        .into_iter()
        .filter(|p| p[root as usize] == 0)
        .map(|p| {
            let mut e: Vec<(u32, u32)> = edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (p[a as usize], p[b as usize]);
                    (x.min(y), x.max(y))
                })
                .collect();
            e.sort_unstable();
            e
        })
        .min()
        .unwrap()
}

fn connected(n: usize, edges: &[(u32, u32)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let (a, b) = (a as usize, b as usize);
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn c4_graph_census() -> Outcome {
    let (r, d) = run("graph-census");
    // Exhaustive law: every connected graph on 4 labels, rooted at each
    // vertex, weight one (unit block weights).
    let n = 4;
    let pairs: Vec<(u32, u32)> = (0..n as u32).flat_map(|a| ((a + 1)..n as u32).map(move |b| (a, b))).collect();
    let mut law: BTreeMap<Vec<(u32, u32)>, f64> = BTreeMap::new();
    let mut total = 0.0;
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<(u32, u32)> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        if !connected(n, &edges) {
            continue;
        }
        for root in 0..n as u32 {
            *law.entry(brute_rooted_code(n, root, &edges)).or_default() += 1.0;
            total += 1.0;
        }
    }
    // 38 connected labelled graphs on four vertices.
    let graphs_ok = total == 38.0 * n as f64;

    let class = presets::block_graph(n - 1).unwrap();
    let cat = class.catalog.clone().unwrap();
    let w = class.weights();
    let prof = classify(&w).unwrap();
    let s = SgtSampler::new(&w, &prof, n, Backend::RecursiveZ).unwrap();
    let deco = Decorator::new(&class.r, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce55);
    let reps = 100_000;
    let mut seen: BTreeMap<Vec<(u32, u32)>, f64> = BTreeMap::new();
    for _ in 0..reps {
        let e = deco.decorate(&s.sample(&mut rng).unwrap(), &mut rng).unwrap();
        let g: LabelledGraph = graph_from_enriched(&e, &cat).unwrap();
        *seen.entry(brute_rooted_code(g.n, g.root.unwrap_or(0), &g.edges)).or_default() += 1.0 / reps as f64;
    }
    let mut tv = 0.0;
    for (k, p) in &law {
        tv += (p / total - seen.get(k).copied().unwrap_or(0.0)).abs();
    }
    tv += seen.iter().filter(|(k, _)| !law.contains_key(*k)).map(|(_, p)| p).sum::<f64>();
    tv /= 2.0;
    let (t_ok, t) = within(d, 120);
    Outcome {
        pass: r.pass && graphs_ok && tv < 0.02 && t_ok,
        detail: format!("{}; brute-force TV = {tv:.4} over {} classes; {t}", summary(&r), law.len()),
    }
}

fn c5_root_degree() -> Outcome {
    let (r, d) = run("root-degree");
    let target = stat_vec(&r, "target");
    let ok = (0..target.len()).all(|k| (target[k] - k as f64 * 0.5f64.powi(k as i32 + 1)).abs() < 1e-9);
    let (t_ok, t) = within(d, 60);
    Outcome { pass: r.pass && ok && t_ok, detail: format!("{}; {t}", summary(&r)) }
}

fn c6_fringe_degree() -> Outcome {
    let (r, _) = run("fringe-degree");
    let target = stat_vec(&r, "target");
    let ok = (0..target.len()).all(|k| (target[k] - 0.5f64.powi(k as i32 + 1)).abs() < 1e-9);
    Outcome { pass: r.pass && ok, detail: summary(&r) }
}

fn c7_spine() -> Outcome {
    let (r, _) = run("spine-geometric");
    let ok = (stat_f64(&r, "nu") - 23.0 / 60.0).abs() < 1e-6;
    let omega = stat_f64(&r, "omega");
    let expect = (50_000f64.ln().powi(2)).ceil();
    Outcome { pass: r.pass && ok && omega == expect, detail: format!("{}; Omega_n = {omega}", summary(&r)) }
}

fn c8_block_clt() -> Outcome {
    let (r, _) = run("block-clt");
    Outcome { pass: r.pass, detail: format!("{}; nu = {:.6}", summary(&r), stat_f64(&r, "nu")) }
}

fn c9_frechet() -> Outcome {
    let (r, d) = run("frechet");
    // c′ = lim π_k k^{α+1}, read off independently at a second index.
    let w = preset("power:beta=2.5").unwrap();
    let prof = classify(&w).unwrap();
    let k = 200_000usize;
    let c_here = (w.coeff(k).ln() + k as f64 * prof.tau.ln() - prof.phi_tau.ln() + 2.5 * (k as f64).ln()).exp();
    let c = stat_f64(&r, "c_prime");
    let ok = (c - c_here).abs() <= 0.01 * c_here;
    let (t_ok, t) = within(d, 600);
    Outcome { pass: r.pass && ok && t_ok, detail: format!("{}; c' = {c:.5} (check {c_here:.5}); {t}", summary(&r)) }
}

fn c10_height_tail() -> Outcome {
    let (r, _) = run("height-tail");
    Outcome { pass: r.pass, detail: summary(&r) }
}

fn c11_fpp() -> Outcome {
    let (r, _) = run("fpp-scaling");
    Outcome { pass: r.pass, detail: summary(&r) }
}

fn c12_type3() -> Outcome {
    let (r, _) = run("type3-giant");
    // Oracle sampler: independent fair coins per edge of K_30.
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let n = 30;
    let reps = 1000;
    let mut hits = 0;
    for _ in 0..reps {
        let edges: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|a| ((a + 1)..n as u32).map(move |b| (a, b)))
            .filter(|_| rng.random::<bool>())
            .collect::<Vec<_>>();
        hits += usize::from(connected(n, &edges));
    }
    let frac = hits as f64 / reps as f64;
    Outcome { pass: r.pass && frac >= 0.95, detail: format!("{}; oracle connected fraction = {frac:.3}", summary(&r)) }
}

fn c13_dissection_path() -> Outcome {
    let (r, _) = run("dissection-path");
    Outcome { pass: r.pass, detail: summary(&r) }
}

fn c14_ktree() -> Outcome {
    let (r, _) = run("ktree-degree");
    // By Lagrange inversion on the tree function, for k = 2:
    // u_n = 8 n^{n−3} e^{−n/2} / (2^n (n−2)!) for n ≥ 2.
    let u = |n: usize| -> f64 {
        if n < 2 {
            return 0.0;
        }
        let nf = n as f64;
        (8f64.ln() + (nf - 3.0) * nf.ln() - nf / 2.0 - nf * 2f64.ln() - ln_factorial(n - 2)).exp()
    };
    let target = stat_vec(&r, "target");
    let ok = target.iter().enumerate().all(|(n, &t)| (t - u(n)).abs() < 1e-9);
    Outcome {
        pass: r.pass && ok,
        detail: format!("{}; literal-formula TV = {:.4}", summary(&r), stat_f64(&r, "TV vs literal formula")),
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("classification exactness", c1_classification),
        ("enumeration oracles", c2_enumeration),
        ("sampler exactness", c3_sampler_exactness),
        ("decoded graph census", c4_graph_census),
        ("root degree local limit", c5_root_degree),
        ("re-rooted fringe degree", c6_fringe_degree),
        ("condensation spine", c7_spine),
        ("largest component law", c8_block_clt),
        ("second largest Frechet", c9_frechet),
        ("height tail", c10_height_tail),
        ("FPP scaling", c11_fpp),
        ("type III giant", c12_type3),
        ("type III dissection path", c13_dissection_path),
        ("k-tree root degree", c14_ktree),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!("criterion {:>2} {:<26} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
