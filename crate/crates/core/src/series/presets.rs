use std::collections::BTreeMap;
use std::path::Path;

use num_rational::BigRational;

use super::excool::{ExcoolDissection, ExcoolOuterplanar};
use super::source::WeightSequence;
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, ln_ratio, log_sum_exp, polylog};

/// Names accepted by [`preset`], with their parameters.
pub fn preset_names() -> &'static [&'static str] {
    &[
        "uniform-plane",
        "binary",
        "labelled-tree",
        "ktree:k=K",
        "excool",
        "excool-dissection",
        "power:beta=B,rho=R[,c=C]",
        "dissection",
        "dissection-factorial",
        "graph[:blocks=B]",
        "maps[:edges=E]",
    ]
}

fn parse_params(spec: &str) -> Result<(String, BTreeMap<String, f64>)> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, r),
        None => (spec, ""),
    };
    let mut params = BTreeMap::new();
    for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value in `{kv}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number `{v}` for `{k}`")))?;
        params.insert(k.trim().to_string(), v);
    }
    Ok((name.trim().to_string(), params))
}

fn take(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64> {
    params
        .get(key)
        .copied()
        .or(default)
        .ok_or_else(|| Error::Parse(format!("missing parameter `{key}`")))
}

/// Look up a named weight sequence such as `ktree:k=2` or `power:beta=2.5,rho=1`.
pub fn preset(spec: &str) -> Result<WeightSequence> {
    let (name, p) = parse_params(spec)?;
    Ok(match name.as_str() {
        "uniform-plane" => WeightSequence::from_ln_fn_closed("uniform-plane", Some(1.0), |_| 0.0, |t| {
            let u = 1.0 - t;
            [1.0 / u, 1.0 / (u * u), 2.0 / (u * u * u)]
        }),
        "binary" => WeightSequence::from_values(vec![1.0, 0.0, 1.0], None)?,
        "labelled-tree" => WeightSequence::from_ln_fn_closed(
            "labelled-tree",
            Some(f64::INFINITY),
            |k| -ln_factorial(k),
            |t| [t.exp(), t.exp(), t.exp()],
        ),
        "ktree" => {
            let k = take(&p, "k", None)?;
            if k < 1.0 || k.fract() != 0.0 {
                return Err(Error::Parse("ktree needs an integer k ≥ 1".into()));
            }
            WeightSequence::from_ln_fn_closed(
                format!("ktree:k={k}"),
                Some(f64::INFINITY),
                move |j| j as f64 * k.ln() - ln_factorial(j),
                move |t| {
                    let e = (k * t).exp();
                    [e, k * e, k * k * e]
                },
            )
        }
        "excool" => WeightSequence::new(ExcoolOuterplanar::new()),
        "excool-dissection" => WeightSequence::new(ExcoolDissection::new()),
        "power" => {
            let beta = take(&p, "beta", None)?;
            let rho = take(&p, "rho", Some(1.0))?;
            let c = take(&p, "c", Some(0.25))?;
            if beta <= 2.0 || rho <= 0.0 || c <= 0.0 {
                return Err(Error::Parse("power needs beta > 2, rho > 0, c > 0".into()));
            }
            power_law(beta, rho, c)
        }
        "dissection" => WeightSequence::from_ln_fn_closed(
            "dissection",
            Some(0.5),
            |k| if k == 0 { 0.0 } else { (k - 1) as f64 * std::f64::consts::LN_2 },
            |t| {
                let u = 1.0 - 2.0 * t;
                [(1.0 - t) / u, 1.0 / (u * u), 4.0 / (u * u * u)]
            },
        ),
        "dissection-factorial" => factorial_faces(),
        "graph" => {
            let b = take(&p, "blocks", Some(5.0))? as usize;
            crate::species::presets::block_graph(b)?.weights()
        }
        "maps" => {
            let e = take(&p, "edges", Some(6.0))? as usize;
            crate::species::presets::planar_maps(e)?.weights()
        }
        other => {
            return Err(Error::Unknown { kind: "preset", name: other.to_string() });
        }
    })
}

/// `ω_0 = 1`, `ω_k = c k^{-β} ρ^{-k}`.
fn power_law(beta: f64, rho: f64, c: f64) -> WeightSequence {
    WeightSequence::from_ln_fn_closed(
        format!("power:beta={beta},rho={rho},c={c}"),
        Some(rho),
        move |k| if k == 0 { 0.0 } else { c.ln() - beta * (k as f64).ln() - k as f64 * rho.ln() },
        move |t| {
            let x = t / rho;
            let phi = 1.0 + c * polylog(beta, x);
            if t == 0.0 {
                return [1.0, c / rho, 2.0 * c * 2f64.powf(-beta) / (rho * rho)];
            }
            let l1 = polylog(beta - 1.0, x);
            let l2 = polylog(beta - 2.0, x);
            [phi, c * l1 / t, c * (l2 - l1) / (t * t)]
        },
    )
}

/// Dissections whose faces of degree `k` weigh `(k-2)!`: `ω = 1/(1 - Σ_{j≥1} j! z^j)`.
fn factorial_faces() -> WeightSequence {
    WeightSequence::from_bulk("dissection-factorial", Some(0.0), None, |len| {
        let mut ln = vec![f64::NEG_INFINITY; len];
        ln[0] = 0.0;
        let mut buf = Vec::with_capacity(len);
        for k in 1..len {
            buf.clear();
            for j in 1..=k {
                if ln[k - j].is_finite() {
                    buf.push(ln_factorial(j) + ln[k - j]);
                }
            }
            ln[k] = log_sum_exp(&buf);
        }
        ln
    })
}

/// Read `k value` pairs (value may be `p/q`), `#` comments and an optional
/// `radius R` line. Omitted indices are zero.
pub fn parse_weights_file(path: &Path) -> Result<WeightSequence> {
    let text = std::fs::read_to_string(path)?;
    parse_weights_text(&text)
}

pub(crate) fn parse_weights_text(text: &str) -> Result<WeightSequence> {
    let mut radius = None;
    let mut ln: Vec<f64> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let head = it.next().unwrap_or_default();
        let val = it
            .next()
            .ok_or_else(|| Error::Parse(format!("line {}: expected two fields", lineno + 1)))?;
        if head == "radius" || head == "rho" {
            radius = Some(
                val.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad radius", lineno + 1)))?,
            );
            continue;
        }
        let k: usize = head
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad index `{head}`", lineno + 1)))?;
        let l = if val.contains('/') {
            let r: BigRational = val
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad rational `{val}`", lineno + 1)))?;
            if r < BigRational::from_integer(0.into()) {
                return Err(Error::InvalidWeights(format!("negative weight at index {k}")));
            }
            ln_ratio(&r)
        } else {
            let v: f64 = val
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number `{val}`", lineno + 1)))?;
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidWeights(format!("weight {v} at index {k}")));
            }
            v.ln()
        };
        if ln.len() <= k {
            ln.resize(k + 1, f64::NEG_INFINITY);
        }
        ln[k] = l;
    }
    if ln.is_empty() {
        return Err(Error::InvalidWeights("empty weight file".into()));
    }
    WeightSequence::from_values(ln.iter().map(|l| l.exp()).collect(), radius)
}
