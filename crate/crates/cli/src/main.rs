//! `norming-lab`: norming constants, Remez-type bounds and their audits.

mod input;
mod report;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use norming_core::bounds::{
    analytic_bound, audit, bg_bound, bg_upper_envelope, chebyshev, cor22_bound, curve_bound,
    e_function, nested_bound, rd_span_bound, remez_bound, BoundResult, BoundSelection,
    FindingStatus,
};
use norming_core::entropy::{metric_span_with, SpanOptions, COVER_CAP};
use norming_core::fewnomial::{
    cor31_bound, discrete_fewnomial_bound, estimate_c, fewnomial_bound, tn_bound_1d,
    tn_bound_multi, ConvexBody, ExpPoly, LogBody, MeasureProvenance, TrialDistribution,
};
use norming_core::norming::{
    fekete_select, lebesgue_constant, norming_constant, sandwich_check, FeketeMode, NormingConfig,
    NormingReport,
};
use norming_core::stability::{lipschitz_audit, perturbation_experiment, stability_ball};

use input::{load_points, load_space, parse_intervals, parse_json, parse_list, CliError, CliResult};
use report::{num, opt, Emitter, Format, OutputConfig, RunConfig, Table};

const EXIT_NOT_NORMING: u8 = 2;

#[derive(Parser)]
#[command(name = "norming-lab", version, about = "Norming constants, Remez-type bounds and audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Grid spacing h for sup-norm sweeps.
    #[arg(long, default_value_t = 1e-3)]
    grid: f64,
    /// Smallest singular value treated as rank deficiency.
    #[arg(long = "rank-tol", default_value_t = 1e-10)]
    rank_tol: f64,
    /// Maximal number of grid points per sweep.
    #[arg(long, default_value_t = 200_000)]
    budget: usize,
    /// Turán–Nazarov constant c.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shorthand for `--format json`.
    #[arg(long)]
    json: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Greedy covers above the exact-cover cap (uncertified).
    #[arg(long = "heuristic-cover")]
    heuristic_cover: bool,
    /// Skip local refinement of grid maxima.
    #[arg(long = "no-refine")]
    no_refine: bool,
}

impl Common {
    fn run_config(&self) -> CliResult<RunConfig> {
        let format = match (self.json, self.format) {
            (true, Some(f)) if f != Format::Json => {
                return Err(CliError::Input("--json conflicts with --format".into()))
            }
            (true, _) => Format::Json,
            (false, Some(f)) => f,
            (false, None) => Format::Text,
        };
        let cfg = RunConfig {
            grid_spacing: self.grid,
            rank_threshold: self.rank_tol,
            lp_budget: self.budget,
            cover_cap: COVER_CAP,
            heuristic_cover: self.heuristic_cover,
            refine: !self.no_refine,
            c: self.c,
            seed: self.seed,
            output: OutputConfig {
                path: self.out.clone(),
                format,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn norming_config(cfg: &RunConfig) -> NormingConfig {
    NormingConfig {
        grid_spacing: cfg.grid_spacing,
        rank_tol: cfg.rank_threshold,
        budget: cfg.lp_budget.max(2),
        refine: cfg.refine,
        ..NormingConfig::default()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Greedy,
    Exhaustive,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundName {
    Chebyshev,
    E,
    Remez,
    Bg,
    BgEnvelope,
    Analytic,
    RdSpan,
    Cor22,
    Curve,
    Nested,
    Tn,
    DiscreteFewnomial,
}

#[derive(Subcommand)]
enum Command {
    /// Norming constant N_V(Z) (exit 2 when Z is not norming).
    Norming {
        /// Space descriptor: JSON file or inline JSON.
        #[arg(long)]
        space: String,
        /// Points: CSV or JSON file, or inline JSON.
        #[arg(long)]
        points: String,
        #[command(flatten)]
        common: Common,
    },
    /// Lebesgue constant of a node set with #Z = dim V.
    Lebesgue {
        #[arg(long)]
        space: String,
        #[arg(long)]
        points: String,
        #[command(flatten)]
        common: Common,
    },
    /// Fekete subset of Z, optionally with the sandwich check.
    Fekete {
        #[arg(long)]
        space: String,
        #[arg(long)]
        points: String,
        #[arg(long, value_enum, default_value = "greedy")]
        mode: Mode,
        /// Also check N(Z) <= N(Z') <= l N(Z) (exhaustive search).
        #[arg(long)]
        sandwich: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Metric (d, n)-span of a point set.
    Span {
        #[arg(long)]
        points: String,
        #[arg(long)]
        degree: usize,
        /// Coefficients C_0, C_1, ... of M_{n,d} (JSON list), required for n >= 3.
        #[arg(long)]
        coefficients: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate one closed-form bound.
    Bound {
        #[arg(long, value_enum)]
        name: BoundName,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Comma-separated integer exponents.
        #[arg(long)]
        exponents: Option<String>,
        #[arg(long)]
        points: Option<String>,
        /// Number of terms minus one.
        #[arg(long)]
        m: Option<usize>,
        /// max |Re lambda_k|.
        #[arg(long)]
        rate: Option<f64>,
        /// Interval length |I|.
        #[arg(long)]
        len: Option<f64>,
        #[arg(long = "meas-z")]
        meas_z: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare exact norming constants with selected bounds.
    Audit {
        #[arg(long)]
        space: String,
        #[arg(long)]
        points: String,
        /// JSON list of bound selections (file or inline).
        #[arg(long)]
        bounds: String,
        #[command(flatten)]
        common: Common,
    },
    /// Turán–Nazarov bound for an exponential polynomial.
    Tn {
        /// Exponential polynomial JSON (file or inline).
        #[arg(long)]
        poly: String,
        /// Univariate: the interval I as `a,b`.
        #[arg(long, default_value = "0,1")]
        interval: String,
        /// Univariate: Z as `a,b;c,d;...`.
        #[arg(long)]
        z: Option<String>,
        /// Multivariate: convex body JSON.
        #[arg(long)]
        body: Option<String>,
        /// Multivariate: asserted measure of Z.
        #[arg(long = "meas-z")]
        meas_z: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Fewnomial bounds on a logarithmically convex body.
    Fewnomial {
        /// Exponent vectors as a JSON list of lists.
        #[arg(long)]
        exponents: String,
        /// Log-convex body JSON (file or inline).
        #[arg(long)]
        body: String,
        /// Asserted measure of Z.
        #[arg(long = "meas-z")]
        meas_z: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Lipschitz check of 1/N_V and perturbation experiments.
    Lipschitz {
        #[arg(long)]
        space: String,
        #[arg(long)]
        points: String,
        /// Second set for the Lipschitz check and the ball bound.
        #[arg(long)]
        points2: Option<String>,
        /// Comma-separated perturbation magnitudes.
        #[arg(long)]
        magnitudes: Option<String>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical Turán–Nazarov constant from seeded trials.
    #[command(name = "estimate-c")]
    EstimateC {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long = "m-max")]
        m_max: Option<usize>,
        #[arg(long = "re-rate-max")]
        re_rate_max: Option<f64>,
        #[arg(long = "im-rate-max")]
        im_rate_max: Option<f64>,
        #[arg(long = "interval-len")]
        interval_len: Option<f64>,
        #[arg(long = "max-intervals")]
        max_intervals: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn require<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Input(format!("missing --{flag}")))
}

fn norming_text(r: &NormingReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "norming: {}", r.norming);
    let _ = writeln!(s, "value: {}", opt(r.value));
    let _ = writeln!(s, "reciprocal: {}", num(r.reciprocal));
    let _ = writeln!(s, "bracket: [{}, {}] certified={}", opt(r.lower), opt(r.upper), r.certified);
    let _ = writeln!(s, "method: {}", serde_json::to_string(&r.method).unwrap_or_default().trim_matches('"'));
    let _ = writeln!(s, "grid: h={} points={}", num(r.grid_spacing), r.grid_points);
    let _ = writeln!(s, "markov: {} certified={}", num(r.markov.value), r.markov.certified);
    let _ = writeln!(s, "smallest singular value: {}", num(r.smallest_singular_value));
    let _ = writeln!(s, "witness point: {:?}", r.witness_point);
    let _ = writeln!(s, "witness coefficients: {:?}", r.witness_coefficients);
    s
}

fn bound_text(results: &[BoundResult]) -> String {
    let mut s = String::new();
    for b in results {
        if b.applicable {
            let _ = writeln!(s, "{}: {}", b.name, num(b.value));
        } else {
            let _ = writeln!(s, "{}: inapplicable ({})", b.name, b.reason.as_deref().unwrap_or(""));
        }
        if let Some(n) = &b.note {
            let _ = writeln!(s, "  note: {n}");
        }
    }
    s
}

fn bound_table(results: &[BoundResult]) -> Table {
    Table {
        headers: ["name", "value", "applicable", "inputs", "reason"].map(String::from).to_vec(),
        rows: results
            .iter()
            .map(|b| {
                vec![
                    b.name.clone(),
                    num(b.value),
                    b.applicable.to_string(),
                    b.inputs.to_string(),
                    b.reason.clone().unwrap_or_default(),
                ]
            })
            .collect(),
    }
}

fn value_result(name: &str, value: f64, inputs: serde_json::Value) -> BoundResult {
    BoundResult {
        name: name.into(),
        value,
        inputs,
        applicable: true,
        reason: None,
        note: None,
    }
}

#[allow(clippy::too_many_arguments)]
fn eval_bound(
    name: BoundName,
    d: Option<u32>,
    n: Option<usize>,
    x: Option<f64>,
    mu: Option<f64>,
    lambda: Option<f64>,
    omega: Option<f64>,
    delta: Option<f64>,
    exponents: Option<&str>,
    points: Option<&str>,
    m: Option<usize>,
    rate: Option<f64>,
    len: Option<f64>,
    meas_z: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
) -> CliResult<BoundResult> {
    let exps = |flag| -> CliResult<Vec<u32>> { parse_list(require(exponents, flag)?, "exponents") };
    Ok(match name {
        BoundName::Chebyshev => {
            let (d, x) = (require(d, "d")?, require(x, "x")?);
            value_result("chebyshev", chebyshev(d, x), json!({"d": d, "x": x}))
        }
        BoundName::E => {
            let x = require(x, "x")?;
            value_result("e", e_function(x)?, json!({"x": x}))
        }
        BoundName::Remez => {
            let (d, mu) = (require(d, "d")?, require(mu, "mu")?);
            value_result("remez", remez_bound(d, mu)?, json!({"d": d, "mu": mu}))
        }
        BoundName::Bg | BoundName::BgEnvelope => {
            let (n, d, l) = (require(n, "n")?, require(d, "d")?, require(lambda, "lambda")?);
            let inputs = json!({"n": n, "d": d, "lambda": l});
            if name == BoundName::Bg {
                value_result("bg", bg_bound(n, d, l)?, inputs)
            } else {
                value_result("bg_envelope", bg_upper_envelope(n, d, l)?, inputs)
            }
        }
        BoundName::Analytic => {
            let (n, l) = (require(n, "n")?, require(lambda, "lambda")?);
            value_result("analytic", analytic_bound(n, l, c)?, json!({"n": n, "lambda": l, "c": c}))
        }
        BoundName::RdSpan => rd_span_bound(require(n, "n")?, require(d, "d")?, require(omega, "omega")?)?,
        BoundName::Cor22 => cor22_bound(&load_points(require(points, "points")?)?, require(d, "d")?)?,
        BoundName::Curve => {
            let e = exps("exponents")?;
            curve_bound(e.len(), require(d, "d")?, &e)?
        }
        BoundName::Nested => {
            let (d, delta) = (require(d, "d")?, require(delta, "delta")?);
            value_result("nested", nested_bound(d, delta)?, json!({"d": d, "delta": delta}))
        }
        BoundName::Tn => {
            let (m, rate, len, mz) = (require(m, "m")?, require(rate, "rate")?, require(len, "len")?, require(meas_z, "meas-z")?);
            value_result(
                "tn",
                tn_bound_1d(m, rate, len, mz, c)?,
                json!({"m": m, "max_re_rate": rate, "len_i": len, "meas_z": mz, "c": c, "meas_z_provenance": MeasureProvenance::UserAsserted}),
            )
        }
        BoundName::DiscreteFewnomial => {
            let (a, b, om) = (require(a, "a")?, require(b, "b")?, require(omega, "omega")?);
            let e = exps("exponents")?;
            value_result(
                "discrete_fewnomial",
                discrete_fewnomial_bound(a, b, &e, om, c)?,
                json!({"a": a, "b": b, "exponents": e, "omega": om, "c": c}),
            )
        }
    })
}

#[derive(Serialize)]
struct TnReport {
    bound: BoundResult,
    sup_i: Option<f64>,
    sup_z: Option<f64>,
    ratio: Option<f64>,
    satisfied: Option<bool>,
    meas_z: f64,
    meas_z_provenance: MeasureProvenance,
    sup_norms_certified: bool,
}

#[derive(Serialize)]
struct FewnomialReport {
    bounds: Vec<BoundResult>,
    meas_z: f64,
    meas_z_provenance: MeasureProvenance,
    body_measure: f64,
    body_measure_provenance: MeasureProvenance,
}

#[derive(Serialize)]
struct FeketeReport {
    subset: norming_core::norming::FeketeSubset,
    #[serde(skip_serializing_if = "Option::is_none")]
    sandwich: Option<norming_core::norming::SandwichReport>,
}

#[derive(Serialize)]
struct LipschitzCliReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    lipschitz: Option<norming_core::stability::LipschitzReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ball: Option<norming_core::stability::StabilityBall>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ball_bound: Option<norming_core::stability::BallBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    perturbation: Option<norming_core::stability::PerturbationReport>,
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Norming { space, points, common } => {
            let cfg = common.run_config()?;
            let (space, z) = (load_space(&space)?, load_points(&points)?);
            let r = norming_constant(&space, &z, &norming_config(&cfg))?;
            Emitter { command: "norming", config: &cfg }.emit(&r, &norming_text(&r), None)?;
            Ok(if r.norming { 0 } else { EXIT_NOT_NORMING })
        }
        Command::Lebesgue { space, points, common } => {
            let cfg = common.run_config()?;
            let (space, z) = (load_space(&space)?, load_points(&points)?);
            let r = lebesgue_constant(&space, &z, &norming_config(&cfg))?;
            Emitter { command: "lebesgue", config: &cfg }.emit(&r, &norming_text(&r), None)?;
            Ok(if r.norming { 0 } else { EXIT_NOT_NORMING })
        }
        Command::Fekete { space, points, mode, sandwich, common } => {
            let cfg = common.run_config()?;
            let (space, z) = (load_space(&space)?, load_points(&points)?);
            let ncfg = norming_config(&cfg);
            let mode = match mode {
                Mode::Greedy => FeketeMode::Greedy,
                Mode::Exhaustive => FeketeMode::Exhaustive,
            };
            let subset = fekete_select(&space, &z, mode, &ncfg)?;
            let sandwich = sandwich.then(|| sandwich_check(&space, &z, &ncfg)).transpose()?;
            let mut text = format!("indices: {:?}\ndeterminant: {}\n", subset.indices, num(subset.determinant));
            if let Some(s) = &sandwich {
                let _ = writeln!(
                    text,
                    "N(Z): {}\nN(Fekete): {}\nmax |L_i| on Z: {}\nsandwich holds: {}",
                    num(s.norming_z),
                    num(s.norming_fekete),
                    num(s.lagrange_max),
                    s.holds
                );
            }
            let table = Table {
                headers: (0..z.dim()).map(|i| format!("x{i}")).chain(["index".into()]).collect(),
                rows: subset
                    .indices
                    .iter()
                    .zip(subset.points.iter())
                    .map(|(i, p)| p.iter().map(|v| num(*v)).chain([i.to_string()]).collect())
                    .collect(),
            };
            let report = FeketeReport { subset, sandwich };
            Emitter { command: "fekete", config: &cfg }.emit(&report, &text, Some(table))?;
            Ok(0)
        }
        Command::Span { points, degree, coefficients, common } => {
            let cfg = common.run_config()?;
            let z = load_points(&points)?;
            let coefficients: Option<Vec<f64>> = coefficients.map(|c| parse_json(&c, "coefficients")).transpose()?;
            let opts = SpanOptions {
                coefficients,
                heuristic: cfg.heuristic_cover,
            };
            let p = metric_span_with(&z, degree, &opts)?;
            let text = format!(
                "span: {}\nargmax eps: {}\nattained: {}\npositive: {}\nexact: {}\nbreakpoints: {:?}\ncover counts: {:?}\n",
                num(p.span),
                num(p.argmax_eps),
                p.attained,
                p.positive,
                p.exact,
                p.breakpoints,
                p.cover_counts
            );
            let mut rows = Vec::with_capacity(p.cover_counts.len());
            for (k, count) in p.cover_counts.iter().enumerate() {
                let lo = if k == 0 { 0.0 } else { p.breakpoints[k - 1] };
                let hi = p.breakpoints.get(k).copied().unwrap_or(f64::INFINITY);
                rows.push(vec![num(lo), num(hi), count.to_string()]);
            }
            let table = Table {
                headers: ["eps_from", "eps_to", "cover_count"].map(String::from).to_vec(),
                rows,
            };
            Emitter { command: "span", config: &cfg }.emit(&p, &text, Some(table))?;
            Ok(0)
        }
        Command::Bound {
            name,
            d,
            n,
            x,
            mu,
            lambda,
            omega,
            delta,
            exponents,
            points,
            m,
            rate,
            len,
            meas_z,
            a,
            b,
            common,
        } => {
            let cfg = common.run_config()?;
            let r = eval_bound(
                name,
                d,
                n,
                x,
                mu,
                lambda,
                omega,
                delta,
                exponents.as_deref(),
                points.as_deref(),
                m,
                rate,
                len,
                meas_z,
                a,
                b,
                cfg.c,
            )?;
            let text = if r.applicable {
                format!("{}\n", num(r.value))
            } else {
                bound_text(std::slice::from_ref(&r))
            };
            let table = bound_table(std::slice::from_ref(&r));
            Emitter { command: "bound", config: &cfg }.emit(&r, &text, Some(table))?;
            Ok(0)
        }
        Command::Audit { space, points, bounds, common } => {
            let cfg = common.run_config()?;
            let (space, z) = (load_space(&space)?, load_points(&points)?);
            let selections: Vec<BoundSelection> = parse_json(&bounds, "bounds")?;
            let r = audit(&space, &z, &selections, &norming_config(&cfg))?;
            let mut text = format!(
                "exact N_V(Z): {} (norming={})\n{:<12} {:<13} {:>16} {:>12}\n",
                opt(r.exact.value),
                r.exact.norming,
                "bound",
                "status",
                "value",
                "ratio"
            );
            for f in &r.findings {
                let status = match f.status {
                    FindingStatus::Ok => "ok",
                    FindingStatus::Violation => "VIOLATION",
                    FindingStatus::Inapplicable => "inapplicable",
                };
                let _ = writeln!(text, "{:<12} {:<13} {:>16} {:>12}", f.name, status, num(f.bound.value), opt(f.ratio));
                if let Some(cmd) = &f.repro {
                    let _ = writeln!(text, "  reproduce: {cmd}");
                }
            }
            let _ = writeln!(text, "violations: {}", r.violations);
            let table = Table {
                headers: ["name", "status", "bound", "ratio", "exact", "repro"].map(String::from).to_vec(),
                rows: r
                    .findings
                    .iter()
                    .map(|f| {
                        vec![
                            f.name.clone(),
                            serde_json::to_string(&f.status).unwrap_or_default().trim_matches('"').to_string(),
                            num(f.bound.value),
                            opt(f.ratio),
                            opt(r.exact.value),
                            f.repro.clone().unwrap_or_default(),
                        ]
                    })
                    .collect(),
            };
            Emitter { command: "audit", config: &cfg }.emit(&r, &text, Some(table))?;
            Ok(0)
        }
        Command::Tn { poly, interval, z, body, meas_z, common } => {
            let cfg = common.run_config()?;
            let p: ExpPoly = parse_json(&poly, "exponential polynomial")?;
            let report = if let Some(body) = body {
                let body: ConvexBody = parse_json(&body, "body")?;
                let mz = require(meas_z, "meas-z")?;
                TnReport {
                    bound: tn_bound_multi(&p, &body, mz, cfg.c)?,
                    sup_i: None,
                    sup_z: None,
                    ratio: None,
                    satisfied: None,
                    meas_z: mz,
                    meas_z_provenance: MeasureProvenance::UserAsserted,
                    sup_norms_certified: false,
                }
            } else {
                let i = parse_intervals(&interval)?;
                let [(a, b)] = i[..] else {
                    return Err(CliError::Input("--interval takes exactly one interval `a,b`".into()));
                };
                let zs = parse_intervals(&require(z, "z")?)?;
                if zs.iter().any(|&(za, zb)| za < a || zb > b) {
                    return Err(CliError::Input("--z must lie inside --interval".into()));
                }
                if p.vars() != 1 {
                    return Err(CliError::Input("univariate mode needs a one-variable polynomial; use --body".into()));
                }
                let mz: f64 = zs.iter().map(|(za, zb)| zb - za).sum();
                let value = tn_bound_1d(p.m(), p.max_abs_re_rate(), b - a, mz, cfg.c)?;
                let sup_i = p.sup_abs_intervals(&[(a, b)]);
                let sup_z = p.sup_abs_intervals(&zs);
                let ratio = sup_i / sup_z;
                TnReport {
                    bound: value_result(
                        "tn",
                        value,
                        json!({"m": p.m(), "max_re_rate": p.max_abs_re_rate(), "len_i": b - a, "meas_z": mz, "c": cfg.c}),
                    ),
                    sup_i: Some(sup_i),
                    sup_z: Some(sup_z),
                    ratio: Some(ratio),
                    satisfied: Some(ratio <= value * (1.0 + 1e-6)),
                    meas_z: mz,
                    meas_z_provenance: MeasureProvenance::Computed,
                    sup_norms_certified: false,
                }
            };
            let mut text = bound_text(std::slice::from_ref(&report.bound));
            if let (Some(si), Some(sz)) = (report.sup_i, report.sup_z) {
                let _ = writeln!(text, "sup_I |p|: {}\nsup_Z |p|: {}\nratio: {}", num(si), num(sz), num(si / sz));
            }
            let _ = writeln!(
                text,
                "meas_z: {} ({})",
                num(report.meas_z),
                serde_json::to_string(&report.meas_z_provenance).unwrap_or_default().trim_matches('"')
            );
            let table = bound_table(std::slice::from_ref(&report.bound));
            Emitter { command: "tn", config: &cfg }.emit(&report, &text, Some(table))?;
            Ok(0)
        }
        Command::Fewnomial { exponents, body, meas_z, common } => {
            let cfg = common.run_config()?;
            let exps: Vec<Vec<f64>> = parse_json(&exponents, "exponents")?;
            let body: LogBody = parse_json(&body, "body")?;
            body.validate()?;
            let (body_measure, body_prov) = body.measure()?;
            let bounds = vec![
                fewnomial_bound(&exps, &body, meas_z, cfg.c)?,
                cor31_bound(&exps, &body, meas_z, cfg.c)?,
            ];
            let report = FewnomialReport {
                bounds,
                meas_z,
                meas_z_provenance: MeasureProvenance::UserAsserted,
                body_measure,
                body_measure_provenance: body_prov,
            };
            let text = bound_text(&report.bounds);
            let table = bound_table(&report.bounds);
            Emitter { command: "fewnomial", config: &cfg }.emit(&report, &text, Some(table))?;
            Ok(0)
        }
        Command::Lipschitz { space, points, points2, magnitudes, trials, common } => {
            let cfg = common.run_config()?;
            let (space, z) = (load_space(&space)?, load_points(&points)?);
            let ncfg = norming_config(&cfg);
            if points2.is_none() && magnitudes.is_none() {
                return Err(CliError::Input("give --points2, --magnitudes or both".into()));
            }
            let mut report = LipschitzCliReport {
                lipschitz: None,
                ball: None,
                ball_bound: None,
                perturbation: None,
            };
            let mut text = String::new();
            if let Some(p2) = points2 {
                let z2 = load_points(&p2)?;
                let l = lipschitz_audit(&space, &z, &z2, &ncfg)?;
                let _ = writeln!(
                    text,
                    "d_H: {}\n|1/N(Z1) - 1/N(Z2)|: {}\nM omega(d_H): {}\nstatus: {}",
                    num(l.d_h),
                    num(l.lhs),
                    num(l.rhs),
                    serde_json::to_string(&l.status).unwrap_or_default().trim_matches('"')
                );
                if l.inv_n1 > 0.0 {
                    let ball = stability_ball(&space, &z, &ncfg)?;
                    let bb = ball.bound(&space, &z2)?;
                    let _ = writeln!(text, "ball radius: {}\nball bound on N(Z2): {}", num(ball.radius), opt(bb.bound));
                    report.ball = Some(ball);
                    report.ball_bound = Some(bb);
                }
                report.lipschitz = Some(l);
            }
            let mut table = None;
            if let Some(mags) = magnitudes {
                let mags: Vec<f64> = parse_list(&mags, "magnitudes")?;
                let p = perturbation_experiment(&space, &z, &mags, trials, cfg.seed, &ncfg)?;
                let _ = writeln!(text, "{:>10} {:>7} {:>8} {:>12} {:>10}", "magnitude", "trials", "skipped", "max ratio", "violations");
                for r in &p.rows {
                    let _ = writeln!(
                        text,
                        "{:>10} {:>7} {:>8} {:>12} {:>10}",
                        num(r.magnitude),
                        r.trials,
                        r.skipped,
                        opt(r.max_ratio),
                        r.violations
                    );
                }
                table = Some(Table {
                    headers: ["magnitude", "trials", "skipped", "max_ratio", "violations", "non_norming_in_ball"]
                        .map(String::from)
                        .to_vec(),
                    rows: p
                        .rows
                        .iter()
                        .map(|r| {
                            vec![
                                num(r.magnitude),
                                r.trials.to_string(),
                                r.skipped.to_string(),
                                opt(r.max_ratio),
                                r.violations.to_string(),
                                r.non_norming_in_ball.to_string(),
                            ]
                        })
                        .collect(),
                });
                report.perturbation = Some(p);
            }
            Emitter { command: "lipschitz", config: &cfg }.emit(&report, &text, table)?;
            Ok(0)
        }
        Command::EstimateC {
            trials,
            m_max,
            re_rate_max,
            im_rate_max,
            interval_len,
            max_intervals,
            common,
        } => {
            let cfg = common.run_config()?;
            let base = TrialDistribution::default();
            let dist = TrialDistribution {
                m_max: m_max.unwrap_or(base.m_max),
                re_rate_max: re_rate_max.unwrap_or(base.re_rate_max),
                im_rate_max: im_rate_max.unwrap_or(base.im_rate_max),
                interval_len: interval_len.unwrap_or(base.interval_len),
                max_intervals: max_intervals.unwrap_or(base.max_intervals),
            };
            let r = estimate_c(trials, cfg.seed, &dist)?;
            let text = format!(
                "c: {}\ntrials: {}\nseed: {}\nworst trial: {}\nsingle-term only: {}\ncertified: {}\n",
                num(r.c),
                r.trials,
                r.seed,
                match (r.worst_trial, r.worst_m) {
                    (Some(t), Some(m)) => format!("{t} (m = {m})"),
                    (Some(t), None) => t.to_string(),
                    _ => "none".into(),
                },
                r.single_term_only,
                r.certified
            );
            Emitter { command: "estimate-c", config: &cfg }.emit(&r, &text, None)?;
            Ok(0)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("NORMING_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("NORMING_LAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
