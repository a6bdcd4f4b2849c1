use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::{json, Value};
use thermo_spectrum::spectrum::GridBox;
use thermo_spectrum::{
    bowen_bisect, certify_dim_lower, certify_dim_lower_from, certify_interval, chi_lower_bound, construct_subsystem,
    dimension_gap_bound, partition_function, pressure_bracket, BowenBracket, BowenOptions, CertifyParams,
    CertifyReport, CertifyVerdict, ConstructParams, DimLowerReport, GapBoundInput, LambdaData, LetterSet,
    OrderedAlphabet, PressureMethod, StraddleRule, SystemDescriptor, TransferParams,
};

use crate::args::{parse_subset, parse_system};
use crate::report::{Report, SlackEntry, Status, Verdict};
use crate::{Outcome, RunConfig};

impl RunConfig {
    pub fn system(&self) -> Result<SystemDescriptor> {
        parse_system(&self.global.system)
    }

    pub fn subset(&self, system: &SystemDescriptor) -> Result<LetterSet> {
        match &self.global.subset {
            Some(s) => parse_subset(system, s),
            None => bail!("this command needs --subset"),
        }
    }

    pub fn alphabet(&self, system: &SystemDescriptor, exclude: Option<&str>) -> Result<OrderedAlphabet> {
        Ok(match exclude {
            Some(spec) => OrderedAlphabet::with_excluded(system.clone(), parse_subset(system, spec)?),
            None => OrderedAlphabet::new(system.clone()),
        })
    }
}

fn parse_box(spec: &str) -> Result<GridBox> {
    let (w, h) = spec.split_once(['x', 'X']).with_context(|| format!("box {spec:?} is not of the form WxH"))?;
    let m: u64 = w.trim().parse().with_context(|| format!("bad width in {spec:?}"))?;
    let n: u64 = h.trim().parse().with_context(|| format!("bad height in {spec:?}"))?;
    if m == 0 {
        bail!("box width must be positive");
    }
    Ok(GridBox::new(m, n))
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Letters removed from the alphabet before ordering
    #[arg(long)]
    pub exclude: Option<String>,
}

pub fn enumerate(ctx: &RunConfig, a: &EnumerateArgs) -> Result<Outcome> {
    let system = ctx.system()?;
    let alphabet = ctx.alphabet(&system, a.exclude.as_deref())?;
    let letters = alphabet.prefix(a.count)?;
    let rows: Vec<Value> = letters
        .iter()
        .enumerate()
        .map(|(i, &e)| Ok(json!({"k": i + 1, "letter": e, "norm": system.deriv_norm(e)?})))
        .collect::<Result<_>>()?;
    let mut report = Report::new("enumerate", json!({"system": system.name(), "count": a.count, "exclude": a.exclude}));
    report.results = json!({ "letters": rows });
    Ok(Outcome::informational(report))
}

#[derive(Debug, Args)]
pub struct PressureArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Also test the claim Z_n < BELOW
    #[arg(long)]
    pub below: Option<f64>,
}

pub fn pressure(ctx: &RunConfig, a: &PressureArgs) -> Result<Outcome> {
    let system = ctx.system()?;
    let letters = ctx.subset(&system)?;
    let opts = ctx.partition();
    let z = partition_function(&system, &letters, a.n, a.t, &opts)?;
    let p = pressure_bracket(&system, &letters, a.n, a.t, &opts)?;
    let mut report = Report::new(
        "pressure",
        json!({"system": system.name(), "subset": ctx.global.subset, "letters": letters, "t": a.t, "n": a.n, "below": a.below}),
    );
    report.results = json!({
        "t": a.t,
        "n": a.n,
        "Z_n": z.value,
        "Z_n_upper": z.upper,
        "Z_n_lower": z.lower,
        "words": z.words,
        "lower": p.lower,
        "upper": p.upper,
        "method": p.method,
        "Z_n_inf": p.partition_inf.map(|v| v.value),
    });
    report.slack_ledger.push(SlackEntry::up("Z_n", z.slack, "directed compensated sum, 8 ulps"));
    if p.method == PressureMethod::SuperadditiveSlack {
        report.slack_ledger.push(SlackEntry::down(
            "P lower (distortion)",
            a.t * system.distortion().ln() / a.n as f64,
            "t log K / n",
        ));
    }
    let Some(bound) = a.below else {
        return Ok(Outcome::informational(report));
    };
    report.verdicts.push(Verdict::new(
        format!("Z_{}(F, {}) < {bound}", a.n, a.t),
        bound - z.value,
        z.upper - z.value,
        "partition-sum",
    ));
    Ok(Outcome::new(report))
}

#[derive(Debug, Args)]
pub struct DimensionArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

/// Bisects from 0, doubling the upper end until the pressure bound turns nonpositive.
pub fn bisect_dimension(
    ctx: &RunConfig,
    system: &SystemDescriptor,
    letters: &LetterSet,
    opts: &BowenOptions,
) -> Result<BowenBracket> {
    if letters.len() == 1 {
        return Ok(BowenBracket { h_lower: 0.0, h_upper: 0.0, n: opts.n, iterations: 0, slack_limited: false, suggested_n: None });
    }
    let mut t_hi = system.ambient_dimension().max(1.0);
    while pressure_bracket(system, letters, opts.n, t_hi, &ctx.partition())?.upper > 0.0 {
        t_hi *= 2.0;
        if t_hi > 1024.0 {
            bail!("pressure stays positive up to t = 1024");
        }
    }
    Ok(bowen_bisect(system, letters, 0.0, t_hi, opts)?)
}

pub fn dimension(ctx: &RunConfig, a: &DimensionArgs) -> Result<Outcome> {
    let system = ctx.system()?;
    let letters = ctx.subset(&system)?;
    let opts = BowenOptions { n: a.n, tol: a.tol, partition: ctx.partition(), ..BowenOptions::default() };
    let h = bisect_dimension(ctx, &system, &letters, &opts)?;
    let mut report =
        Report::new("dimension", json!({"system": system.name(), "subset": ctx.global.subset, "n": a.n, "tol": a.tol}));
    report.results = serde_json::to_value(h)?;
    if h.slack_limited {
        report.slack_ledger.push(SlackEntry::up(
            "h bracket width",
            h.width(),
            "distortion slack at this n exceeds the tolerance",
        ));
    }
    Ok(Outcome::informational(report))
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub t_low: f64,
    #[arg(long)]
    pub t_high: f64,
    /// Size of the initial block I(d)
    #[arg(long, conflicts_with = "block")]
    pub d: Option<usize>,
    /// Initial block given as I:k or T:k
    #[arg(long)]
    pub block: Option<String>,
    /// Letters removed from the alphabet, e.g. T:2
    #[arg(long)]
    pub exclude: Option<String>,
    /// Certification box WxH
    #[arg(long = "box")]
    pub cert_box: Option<String>,
    /// Seed box WxH
    #[arg(long)]
    pub seed_box: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Keep every per-letter margin in the report
    #[arg(long)]
    pub keep_margins: bool,
}

fn block_size(alphabet: &OrderedAlphabet, spec: &str) -> Result<usize> {
    let count = |s: &str| s.parse::<usize>().with_context(|| format!("bad block {spec:?}"));
    if let Some(k) = spec.strip_prefix("I:") {
        return count(k);
    }
    if let Some(k) = spec.strip_prefix("T:") {
        let b = alphabet.tilde_block(count(k)?)?;
        if !b.is_initial_block {
            bail!("{spec} is not an initial block of the alphabet");
        }
        return Ok(b.n_k);
    }
    bail!("--block must be I:k or T:k, got {spec:?}")
}

/// Maps a certification report onto a verdict.
pub fn certify_verdict(label: &str, r: &CertifyReport) -> Verdict {
    let margin = match r.scan.min_margin {
        Some(m) if r.pressure_ok => m.margin / r.scan.threshold,
        _ => -r.pressure.upper,
    };
    let claim = format!("[{}, {}] in DS({label})", r.params.t_low, r.params.t_high);
    let method = "pressure + tail-ratio".to_string();
    let status = match r.verdict {
        CertifyVerdict::Certified => Status::Certified,
        CertifyVerdict::PressureConditionFailed => Status::Inconclusive,
        CertifyVerdict::CounterexampleFound | CertifyVerdict::BothConditionsFailed => Status::Refuted,
    };
    Verdict { claim, status, margin, slack: 0.0, method }
}

pub fn certify_slack(r: &CertifyReport) -> Vec<SlackEntry> {
    let mut out = vec![
        SlackEntry::up("K^{2t} threshold", r.scan.threshold * 1e-12, "relative 1e-12"),
        SlackEntry::down("f~ recursion", r.scan.step_slack, "relative, per step"),
    ];
    if let Some(z) = r.pressure.partition {
        out.push(SlackEntry::up("Z_n", z.slack, "directed compensated sum, 8 ulps"));
    }
    out
}

pub fn certify_params(ctx: &RunConfig, t_low: f64, t_high: f64, d: usize) -> CertifyParams {
    let mut p =
        if ctx.global.paper_box { CertifyParams::paper(t_low, t_high, d) } else { CertifyParams::desk(t_low, t_high, d) };
    p.partition = ctx.partition();
    p
}

pub fn certify(ctx: &RunConfig, a: &CertifyArgs) -> Result<Outcome> {
    let system = ctx.system()?;
    let alphabet = ctx.alphabet(&system, a.exclude.as_deref())?;
    let d = match (&a.block, a.d) {
        (Some(b), _) => block_size(&alphabet, b)?,
        (None, Some(d)) => d,
        (None, None) => bail!("certify-spectrum needs --d or --block"),
    };
    let mut params = certify_params(ctx, a.t_low, a.t_high, d);
    params.n = a.n;
    params.keep_margins = a.keep_margins || ctx.global.format == crate::Format::Csv;
    if let Some(b) = &a.cert_box {
        params.cert_box = parse_box(b)?;
    }
    if let Some(b) = &a.seed_box {
        params.seed_box = parse_box(b)?;
    }
    let r = certify_interval(&alphabet, &params)?;
    let mut report = Report::new(
        "certify-spectrum",
        json!({"system": system.name(), "exclude": a.exclude, "t_low": a.t_low, "t_high": a.t_high, "d": d,
               "paper_box": ctx.global.paper_box}),
    );
    let label = match &a.exclude {
        Some(x) => format!("{} \\ {x}", system.name()),
        None => system.name().to_string(),
    };
    report.verdicts.push(certify_verdict(&label, &r));
    report.slack_ledger = certify_slack(&r);
    let mut rows = vec![vec!["k".into(), "letter".into(), "f_lower".into(), "margin".into()]];
    rows.extend(
        r.scan.margins.iter().map(|m| vec![m.k.to_string(), m.letter.to_string(), m.f_lower.to_string(), m.margin.to_string()]),
    );
    report.results = serde_json::to_value(&r)?;
    let mut out = Outcome::new(report);
    out.csv = Some(rows);
    Ok(out)
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub target: f64,
    #[arg(long, default_value_t = 10)]
    pub max_letters: usize,
    /// Letters scanned per step before the window doubles
    #[arg(long)]
    pub window: Option<usize>,
}

pub fn construct(ctx: &RunConfig, a: &ConstructArgs) -> Result<Outcome> {
    let system = ctx.system()?;
    let alphabet = OrderedAlphabet::new(system.clone());
    let mut params = ConstructParams::default();
    params.bisect.partition = ctx.partition();
    if let Some(w) = a.window {
        params.window = w;
    }
    let c = construct_subsystem(&alphabet, a.target, a.max_letters, &params)?;
    let mut report =
        Report::new("construct", json!({"system": system.name(), "target": a.target, "max_letters": a.max_letters}));
    let (lo, hi) = c.bracket();
    report.results = json!({"letters": c.letters, "bracket": [lo, hi], "stop": c.stop, "steps": c.steps,
                            "candidates_scanned": c.candidates_scanned});
    Ok(Outcome::informational(report))
}

#[derive(Debug, Args)]
pub struct GapArgs {
    /// Finite block F; defaults to --subset
    #[arg(long)]
    pub block: Option<String>,
    /// Override for the Lyapunov lower bound
    #[arg(long)]
    pub chi: Option<f64>,
    /// Word length for the chi search
    #[arg(long, default_value_t = 2)]
    pub chi_n: usize,
    /// Override for the lower end of h_F
    #[arg(long)]
    pub h_lower: Option<f64>,
    /// Override for the upper end of h_F
    #[arg(long)]
    pub h_upper: Option<f64>,
    /// Explicit tail-sum radius
    #[arg(long, default_value_t = 400)]
    pub radius: u64,
    /// Grid size for the transfer lower bound on h_F
    #[arg(long, default_value_t = 64)]
    pub p: usize,
    /// Connecting-word data COUNT,KAPPA,P for graph-directed systems
    #[arg(long)]
    pub lambda: Option<String>,
}

fn parse_lambda(spec: &str) -> Result<LambdaData> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [count, kappa, p] = parts[..] else { bail!("--lambda must be COUNT,KAPPA,P") };
    Ok(LambdaData { count: count.parse()?, kappa: kappa.parse()?, p: p.parse()? })
}

/// Largest certified transfer lower bound found by bisection on `[lo, hi]`.
fn transfer_h_lower(system: &SystemDescriptor, letters: &LetterSet, lo: f64, hi: f64, p: usize) -> Result<Option<f64>> {
    let params = TransferParams { p, ..TransferParams::default() };
    let letters = letters.as_slice();
    let certified = |t: f64| -> Result<bool> { Ok(certify_dim_lower_from(system, letters, t, &params)?.certified) };
    let (mut a, mut b) = (lo, hi);
    if !certified(a)? {
        return Ok(None);
    }
    while b - a > 1e-4 {
        let mid = 0.5 * (a + b);
        if certified(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(a))
}

/// Smallest `t` in `[lo, hi]` found with a nonpositive upper pressure bound, else `hi`.
fn pressure_h_upper(ctx: &RunConfig, system: &SystemDescriptor, letters: &LetterSet, lo: f64, hi: f64) -> Result<f64> {
    let up = |t: f64| -> Result<f64> { Ok(pressure_bracket(system, letters, 2, t, &ctx.partition())?.upper) };
    if up(hi)? > 0.0 {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > 1e-4 {
        let mid = 0.5 * (a + b);
        if up(mid)? <= 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b)
}

pub fn gap_bound(ctx: &RunConfig, a: &GapArgs) -> Result<Outcome> {
    let system = ctx.system()?;
    let letters = match &a.block {
        Some(b) => parse_subset(&system, b)?,
        None => ctx.subset(&system).context("gap-bound needs --block or --subset")?,
    };
    let alphabet = OrderedAlphabet::new(system.clone());
    let chi = match a.chi {
        Some(c) => json!({"chi": c, "source": "override"}),
        None => serde_json::to_value(chi_lower_bound(&alphabet, a.chi_n)?)?,
    };
    let chi_lower = chi["chi"].as_f64().expect("chi is numeric");
    let mut h_method = "override";
    let bracket = if system.is_grid() {
        let ambient = system.ambient_dimension();
        let h_lower = match a.h_lower {
            Some(h) => h,
            None => {
                h_method = "transfer + pressure";
                transfer_h_lower(&system, &letters, system.theta(), ambient, a.p)?
                    .context("the transfer bound does not certify h_F above the finiteness threshold")?
            }
        };
        let h_upper = match a.h_upper {
            Some(h) => h,
            None => pressure_h_upper(ctx, &system, &letters, h_lower, ambient)?,
        };
        BowenBracket { h_lower, h_upper, n: 2, iterations: 0, slack_limited: false, suggested_n: None }
    } else {
        h_method = "bowen";
        let opts = BowenOptions { partition: ctx.partition(), ..BowenOptions::default() };
        let mut b = bisect_dimension(ctx, &system, &letters, &opts)?;
        b.h_lower = a.h_lower.unwrap_or(b.h_lower);
        b.h_upper = a.h_upper.unwrap_or(b.h_upper);
        b
    };
    let lambda = a.lambda.as_deref().map(parse_lambda).transpose()?.unwrap_or_default();
    let input = GapBoundInput { letters: letters.clone(), h_f: bracket, chi_lower, lambda };
    let g = dimension_gap_bound(&system, &input, a.radius)?;
    let mut report = Report::new(
        "gap-bound",
        json!({"system": system.name(), "block": a.block.as_ref().or(ctx.global.subset.as_ref()), "letters": letters.len(),
               "radius": a.radius, "lambda": lambda}),
    );
    report.results = json!({"bound": g.bound, "h_f": bracket, "h_method": h_method, "chi": chi, "gap": g});
    report.slack_ledger = vec![
        SlackEntry::up("prefactor", g.prefactor * 4.0 * f64::EPSILON, "relative 4 eps"),
        SlackEntry::up("tail sum", g.tail.upper - g.tail.explicit, "analytic shell majorant"),
        SlackEntry::down("chi", chi_lower * 4.0 * f64::EPSILON, "relative 4 eps"),
    ];
    Ok(Outcome::informational(report))
}

#[derive(Debug, Args)]
pub struct LowerBoundArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 64)]
    pub p: usize,
    /// Natural-order prefix of the alphabet; ignored with --subset
    #[arg(long, default_value_t = 2000)]
    pub letters: usize,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    /// Letters removed from the alphabet, e.g. T:2
    #[arg(long)]
    pub exclude: Option<String>,
    /// Drop straddling images instead of crediting the cell minimum
    #[arg(long)]
    pub drop_straddling: bool,
}

pub fn transfer_params(ctx: &RunConfig, p: usize, letters: usize, iters: usize, drop: bool) -> TransferParams {
    TransferParams {
        p,
        letter_cut: letters,
        iters,
        rule: if drop { StraddleRule::Drop } else { StraddleRule::MinOverCells },
        exec: ctx.exec,
        ..TransferParams::default()
    }
}

pub fn transfer_verdict(claim: String, r: &DimLowerReport) -> Verdict {
    Verdict::one_sided(claim, r.margin, r.params.margin, "transfer-operator")
}

pub fn transfer_slack() -> Vec<SlackEntry> {
    vec![
        SlackEntry::down("weights", 8.0 * f64::EPSILON, "relative 8 ulps"),
        SlackEntry::down("row sums", 2.0 * f64::EPSILON, "relative (row length + 2) ulps"),
    ]
}

pub fn lower_bound(ctx: &RunConfig, a: &LowerBoundArgs) -> Result<Outcome> {
    let system = ctx.system()?;
    let params = transfer_params(ctx, a.p, a.letters, a.iters, a.drop_straddling);
    let r = match &ctx.global.subset {
        Some(s) => {
            let alphabet = ctx.alphabet(&system, a.exclude.as_deref())?;
            let letters: Vec<_> = parse_subset(&system, s)?.iter().filter(|&e| alphabet.contains(e)).collect();
            certify_dim_lower_from(&system, &letters, a.t, &params)?
        }
        None => certify_dim_lower(&ctx.alphabet(&system, a.exclude.as_deref())?, a.t, &params)?,
    };
    let mut report = Report::new(
        "lower-bound",
        json!({"system": system.name(), "subset": ctx.global.subset, "exclude": a.exclude, "t": a.t, "p": a.p,
               "letters": a.letters, "iters": a.iters, "rule": params.rule}),
    );
    report.results = json!({"t": r.t, "cw_bound": r.cw.value, "certified": r.certified, "cells": r.cells,
                            "best_iteration": r.cw.best_iteration, "stats": r.stats});
    report.verdicts.push(transfer_verdict(format!("dim_H >= {}", a.t), &r));
    report.slack_ledger = transfer_slack();
    report.slack_ledger.push(SlackEntry::up("certification threshold", r.params.margin, "required excess over 1"));
    Ok(Outcome::new(report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boxes_and_lambda() {
        assert_eq!(parse_box("128x256").unwrap(), GridBox::new(128, 256));
        assert!(parse_box("0x4").is_err());
        assert!(parse_box("12").is_err());
        assert_eq!(parse_lambda("3, 0.5, 2").unwrap(), LambdaData { count: 3, kappa: 0.5, p: 2 });
        assert!(parse_lambda("3,0.5").is_err());
    }
}
