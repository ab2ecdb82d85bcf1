//! Command-line schema and command execution. Every command renders its
//! output into a string (so runs are testable and byte-reproducible) and
//! writes it to stdout or `--out`.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracvar_core::analysis::{
    classify, convergence_report, hurst_sweep, signed_variation_limit, variation_slope, Regime,
    SignedLimit, SlopeMethod,
};
use fracvar_core::increments::{
    exact_partial_sum_distribution, expected_power, mc_estimate, preferred_mode, AtomState,
};
use fracvar_core::moments::moments_recursive;
use fracvar_core::variation::variation_series;
use fracvar_core::{FractalSpec, DEFAULT_ATOM_BUDGET, DEFAULT_INCREMENT_BUDGET};

use crate::error::{AppError, Result};
use crate::parse::{parse_alpha, parse_h_grid, parse_n_range, parse_phi};

#[derive(Debug, Parser)]
#[command(
    name = "fracvar",
    about = "pth variation of fractal functions: evaluation, classification, slopes, moments",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Recursion,
    Enumeration,
    Mc,
}

/// Flags identifying the fractal function f(t) = sum alpha^m phi(b^m t).
#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Base function: tent | skewed:l=L | sine:amp=A | degenerate:inner=SPEC | pwl:@FILE
    #[arg(long, default_value = "tent")]
    pub phi: String,
    /// Branching factor b >= 2
    #[arg(long)]
    pub b: u32,
    /// Scale factor; decimal or expression like `b^(-1/3)`
    #[arg(long, conflicts_with = "hurst")]
    pub alpha: Option<String>,
    /// Hurst parameter; sets alpha = b^(-H)
    #[arg(long)]
    pub hurst: Option<f64>,
}

impl SpecArgs {
    pub fn resolve(&self) -> Result<FractalSpec> {
        let alpha = match (&self.alpha, self.hurst) {
            (Some(expr), None) => parse_alpha(expr, self.b)?,
            (None, Some(h)) => {
                if !(h > 0.0 && h < 1.0) {
                    return Err(AppError::usage(format!("--hurst must be in (0,1), got {h}")));
                }
                f64::from(self.b).powf(-h)
            }
            (None, None) => return Err(AppError::usage("one of --alpha or --hurst is required")),
            (Some(_), Some(_)) => unreachable!("clap conflict"),
        };
        let phi = parse_phi(&self.phi, self.b, alpha)?;
        Ok(FractalSpec::new(phi, self.b, alpha)?)
    }

    fn describe(&self) -> String {
        let mut s = format!("phi={} b={}", self.phi, self.b);
        if let Some(a) = &self.alpha {
            let _ = write!(s, " alpha={a}");
        }
        if let Some(h) = self.hurst {
            let _ = write!(s, " hurst={h}");
        }
        s
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate f(t) with controlled truncation error
    Eval {
        #[command(flatten)]
        spec: SpecArgs,
        /// Evaluation points (repeatable)
        #[arg(long, required = true, num_args = 1..)]
        t: Vec<f64>,
        #[arg(long, default_value_t = fracvar_core::DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Partition sums V_{p,t,n} over the b-adic grids
    Variation {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Level or inclusive range, e.g. 8 or 2:12
        #[arg(long)]
        n: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Signed sums (no absolute values), odd exponent
    Signed {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        n: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Regime classification with degeneracy evidence
    Classify {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Variation slope E[|Z|^q] in the rough regime
    Slope {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum, default_value_t = Method::Enumeration)]
        method: Method,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Signed qth-variation limit for (skewed) tent bases
    SignedLimit {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Moments of the limit law Z: recursion on a two-point law, or
    /// enumeration/Monte Carlo on a full spec
    Moments {
        /// Down-step value (recursion method)
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        /// Up-step value (recursion method)
        #[arg(long)]
        nu: Option<f64>,
        /// Up-step probability (recursion method)
        #[arg(long)]
        p: Option<f64>,
        /// Geometric weight in (-1,1) (recursion method)
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        /// Highest moment order
        #[arg(long, default_value_t = 16)]
        k: u32,
        #[arg(long, value_enum, default_value_t = Method::Recursion)]
        method: Method,
        #[command(flatten)]
        spec: MomentsSpecArgs,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dump the exact distribution atoms instead of moments
        #[arg(long, default_value_t = false)]
        dump_distribution: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Slope estimates over a grid of Hurst parameters
    Sweep {
        /// Base function string (see `eval --help`)
        #[arg(long, default_value = "tent")]
        phi: String,
        #[arg(long)]
        b: u32,
        /// lo:hi:step or comma-separated H values
        #[arg(long, default_value = "0.05:0.95:0.05")]
        grid: String,
        #[arg(long, value_enum, default_value_t = Method::Enumeration)]
        method: Method,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Empirical convergence of V_{p,t,n} against the theoretical rate
    Convergence {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value = "2:12")]
        n: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the acceptance suite
    Selftest,
}

/// Optional spec flags for `moments --method enumeration|mc`.
#[derive(Debug, Args)]
pub struct MomentsSpecArgs {
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub b: Option<u32>,
    #[arg(long, conflicts_with = "hurst")]
    pub alpha: Option<String>,
    #[arg(long)]
    pub hurst: Option<f64>,
}

impl MomentsSpecArgs {
    fn to_spec_args(&self) -> Result<SpecArgs> {
        Ok(SpecArgs {
            phi: self.phi.clone().unwrap_or_else(|| String::from("tent")),
            b: self
                .b
                .ok_or_else(|| AppError::usage("--b is required for this moments method"))?,
            alpha: self.alpha.clone(),
            hurst: self.hurst,
        })
    }
}

/// Budgets, overridable via the FRACVAR_BUDGET environment variable.
#[derive(Debug, Clone, Copy)]
pub struct Budgets {
    pub increments: u64,
    pub atoms: u64,
}

impl Budgets {
    pub fn from_env() -> Result<Self> {
        match std::env::var("FRACVAR_BUDGET") {
            Ok(v) => {
                let n: u64 = v.trim().parse().map_err(|e| {
                    AppError::usage(format!("bad FRACVAR_BUDGET value `{v}`: {e}"))
                })?;
                Ok(Budgets {
                    increments: n,
                    atoms: n,
                })
            }
            Err(_) => Ok(Budgets {
                increments: DEFAULT_INCREMENT_BUDGET,
                atoms: DEFAULT_ATOM_BUDGET,
            }),
        }
    }
}

fn method_to_slope(method: Method, depth: Option<u32>, samples: u64, seed: u64) -> SlopeMethod {
    match method {
        Method::Recursion => SlopeMethod::Recursion,
        Method::Enumeration => SlopeMethod::Enumeration { depth },
        Method::Mc => SlopeMethod::MonteCarlo {
            depth,
            samples,
            seed,
        },
    }
}

fn regime_name(r: &Regime) -> &'static str {
    match r {
        Regime::BoundedVariation => "BoundedVariation",
        Regime::CriticalVanishing => "CriticalVanishing",
        Regime::Rough { .. } => "Rough",
    }
}

/// Execute a parsed command and return the rendered output.
pub fn execute(command: &Command) -> Result<String> {
    let budgets = Budgets::from_env()?;
    match command {
        Command::Eval {
            spec,
            t,
            tol,
            output,
        } => {
            let s = spec.resolve()?;
            let mut body = String::new();
            match output.format {
                Format::Csv => {
                    let _ = writeln!(
                        body,
                        "# fracvar eval {} tol={tol}",
                        spec.describe()
                    );
                    body.push_str("t,value\n");
                    for &ti in t {
                        let v = s.eval_f(ti, *tol)?;
                        let _ = writeln!(body, "{ti},{v}");
                    }
                }
                Format::Plain => {
                    for &ti in t {
                        let v = s.eval_f(ti, *tol)?;
                        let _ = writeln!(body, "{v}");
                    }
                }
            }
            Ok(body)
        }
        Command::Variation {
            spec,
            p,
            t,
            n,
            output,
        } => {
            let s = spec.resolve()?;
            let (n_min, n_max) = parse_n_range(n)?;
            let series = variation_series(&s, *p, *t, n_min, n_max, false, budgets.increments)?;
            Ok(render_series(
                &format!("# fracvar variation {} p={p} t={t} n={n}", spec.describe()),
                &s,
                *p,
                *t,
                &series.values,
                output.format,
            ))
        }
        Command::Signed {
            spec,
            q,
            t,
            n,
            output,
        } => {
            let s = spec.resolve()?;
            let (n_min, n_max) = parse_n_range(n)?;
            let series =
                variation_series(&s, f64::from(*q), *t, n_min, n_max, true, budgets.increments)?;
            Ok(render_series(
                &format!("# fracvar signed {} q={q} t={t} n={n}", spec.describe()),
                &s,
                f64::from(*q),
                *t,
                &series.values,
                output.format,
            ))
        }
        Command::Classify { spec, output } => {
            let s = spec.resolve()?;
            let report = classify(&s);
            let mut body = String::new();
            if output.format == Format::Csv {
                let _ = writeln!(body, "# fracvar classify {}", spec.describe());
                body.push_str("key,value\n");
                let _ = writeln!(body, "regime,{}", regime_name(&report.regime));
                if let Regime::Rough { q, hurst } = report.regime {
                    let _ = writeln!(body, "q,{q}");
                    let _ = writeln!(body, "hurst,{hurst}");
                }
                if let Some(ok) = report.sufficient_condition_holds {
                    let _ = writeln!(body, "sufficient_condition_holds,{ok}");
                }
                if let Some(ev) = report.degenerate_evidence {
                    let _ = writeln!(body, "max_abs_Sn,{}", ev.max_abs_partial_sum);
                    let _ = writeln!(body, "evidence_depth,{}", ev.depth);
                }
            } else {
                let _ = writeln!(body, "{}", regime_name(&report.regime));
                if let Regime::Rough { q, hurst } = report.regime {
                    let _ = writeln!(body, "q = {q}");
                    let _ = writeln!(body, "H = {hurst}");
                }
                if let Some(ok) = report.sufficient_condition_holds {
                    let _ = writeln!(body, "sufficient condition holds: {ok}");
                }
                if let Some(ev) = report.degenerate_evidence {
                    let _ = writeln!(
                        body,
                        "max |S_n| over exact support (depth {}): {}",
                        ev.depth, ev.max_abs_partial_sum
                    );
                }
            }
            Ok(body)
        }
        Command::Slope {
            spec,
            method,
            depth,
            samples,
            seed,
            output,
        } => {
            let s = spec.resolve()?;
            let m = method_to_slope(*method, *depth, *samples, *seed);
            let r = variation_slope(&s, m, budgets.atoms)?;
            let mut body = String::new();
            if output.format == Format::Csv {
                let _ = writeln!(
                    body,
                    "# fracvar slope {} method={:?} depth={:?} samples={samples} seed={seed}",
                    spec.describe(),
                    method,
                    depth
                );
                body.push_str("H,q,slope,error,method,b,phi\n");
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{},{}",
                    s.hurst(),
                    r.q,
                    r.slope,
                    r.error_measure,
                    r.method,
                    s.b(),
                    s.phi().label()
                );
            } else {
                let _ = writeln!(
                    body,
                    "q = {}\nslope = {}\nerror = {}\nmethod = {}",
                    r.q, r.slope, r.error_measure, r.method
                );
            }
            Ok(body)
        }
        Command::SignedLimit { spec, output } => {
            let s = spec.resolve()?;
            let r = signed_variation_limit(&s)?;
            let mut body = String::new();
            if output.format == Format::Csv {
                let _ = writeln!(body, "# fracvar signed-limit {}", spec.describe());
                body.push_str("key,value\n");
                let _ = writeln!(body, "q,{}", r.q);
                match r.kind {
                    SignedLimit::IdenticallyZero => {
                        body.push_str("kind,IdenticallyZero\nvalue,0\n");
                    }
                    SignedLimit::Limit(v) => {
                        let _ = writeln!(body, "kind,Limit\nvalue,{v}");
                    }
                    SignedLimit::OscillatingPair { even_n, odd_n } => {
                        let _ = writeln!(
                            body,
                            "kind,OscillatingPair\nvalue_even_n,{even_n}\nvalue_odd_n,{odd_n}"
                        );
                    }
                }
            } else {
                match r.kind {
                    SignedLimit::IdenticallyZero => {
                        let _ = writeln!(body, "q = {}: limit exists and is 0", r.q);
                    }
                    SignedLimit::Limit(v) => {
                        let _ = writeln!(body, "q = {}: limit = {v}", r.q);
                    }
                    SignedLimit::OscillatingPair { even_n, odd_n } => {
                        let _ = writeln!(
                            body,
                            "q = {}: no limit; even levels -> {even_n}, odd levels -> {odd_n}",
                            r.q
                        );
                    }
                }
            }
            Ok(body)
        }
        Command::Moments {
            mu,
            nu,
            p,
            gamma,
            k,
            method,
            spec,
            depth,
            samples,
            seed,
            dump_distribution,
            output,
        } => run_moments(
            *mu,
            *nu,
            *p,
            *gamma,
            *k,
            *method,
            spec,
            *depth,
            *samples,
            *seed,
            *dump_distribution,
            output,
            budgets,
        ),
        Command::Sweep {
            phi,
            b,
            grid,
            method,
            depth,
            samples,
            seed,
            output: _,
        } => {
            let h_grid = parse_h_grid(grid)?;
            // a degenerate base embeds alpha; for sweeps it is pinned at the
            // representative value below, since the grid varies alpha itself
            let phi_parsed = parse_phi(phi, *b, f64::from(*b).powf(-0.5))?;
            let m = method_to_slope(*method, *depth, *samples, *seed);
            let rows = hurst_sweep(&phi_parsed, *b, &h_grid, m, budgets.atoms);
            let mut body = String::new();
            let _ = writeln!(
                body,
                "# fracvar sweep phi={phi} b={b} grid={grid} method={method:?} depth={depth:?} samples={samples} seed={seed}"
            );
            body.push_str("H,q,slope,error,method,b,phi\n");
            for row in rows {
                match row.outcome {
                    Ok(r) => {
                        let _ = writeln!(
                            body,
                            "{},{},{},{},{},{},{}",
                            row.hurst,
                            r.q,
                            r.slope,
                            r.error_measure,
                            r.method,
                            b,
                            phi_parsed.label()
                        );
                    }
                    Err(e) => {
                        let _ = writeln!(
                            body,
                            "{},,,,\"error: {}\",{},{}",
                            row.hurst,
                            e,
                            b,
                            phi_parsed.label()
                        );
                    }
                }
            }
            Ok(body)
        }
        Command::Convergence {
            spec,
            p,
            t,
            n,
            output,
        } => {
            let s = spec.resolve()?;
            let (n_min, n_max) = parse_n_range(n)?;
            let report = convergence_report(&s, *p, *t, n_min, n_max, budgets.increments)?;
            let mut body = String::new();
            if output.format == Format::Csv {
                let _ = writeln!(
                    body,
                    "# fracvar convergence {} p={p} t={t} n={n} fitted_rate={} theoretical_rate={} observed={:?} predicted={:?}",
                    spec.describe(),
                    report.fitted_rate,
                    report.theoretical_rate,
                    report.observed,
                    report.predicted
                );
                body.push_str("n,value,predicted_rate\n");
                for (level, v) in &report.series.values {
                    let _ = writeln!(body, "{level},{v},{}", report.theoretical_rate);
                }
            } else {
                let _ = writeln!(
                    body,
                    "fitted rate {} vs theoretical {}; observed {:?}, predicted {:?}",
                    report.fitted_rate, report.theoretical_rate, report.observed, report.predicted
                );
            }
            Ok(body)
        }
        Command::Selftest => unreachable!("selftest handled by the caller"),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_moments(
    mu: Option<f64>,
    nu: Option<f64>,
    p: Option<f64>,
    gamma: Option<f64>,
    k: u32,
    method: Method,
    spec: &MomentsSpecArgs,
    depth: Option<u32>,
    samples: u64,
    seed: u64,
    dump_distribution: bool,
    output: &OutputArgs,
    budgets: Budgets,
) -> Result<String> {
    let mut body = String::new();
    match method {
        Method::Recursion => {
            let (mu, nu, p, gamma) = match (mu, nu, p, gamma) {
                (Some(mu), Some(nu), Some(p), Some(gamma)) => (mu, nu, p, gamma),
                _ => {
                    return Err(AppError::usage(
                        "moments --method recursion requires --mu --nu --p --gamma",
                    ))
                }
            };
            let table = moments_recursive(mu, nu, p, gamma, k)?;
            if output.format == Format::Csv {
                let _ = writeln!(
                    body,
                    "# fracvar moments mu={mu} nu={nu} p={p} gamma={gamma} k={k} method=recursion"
                );
                body.push_str("k,moment\n");
                for (i, m) in table.moments.iter().enumerate() {
                    let _ = writeln!(body, "{i},{m}");
                }
            } else {
                for (i, m) in table.moments.iter().enumerate() {
                    let _ = writeln!(body, "E[Z^{i}] = {m}");
                }
            }
        }
        Method::Enumeration => {
            let s = spec.to_spec_args()?.resolve()?;
            let mode = preferred_mode(&s);
            let n = depth.unwrap_or(16);
            let dist = exact_partial_sum_distribution(&s, n, mode, budgets.atoms)?;
            if dump_distribution {
                let _ = writeln!(
                    body,
                    "# fracvar moments {} method=enumeration depth={n} dump",
                    spec.to_spec_args()?.describe()
                );
                body.push_str("value,probability,state\n");
                for atom in &dist.atoms {
                    let state = match atom.state {
                        AtomState::Site(r) => format!("site:{r}"),
                        AtomState::TwoPoint(s) => format!("step:{s}"),
                        AtomState::Ternary(s) => format!("chain:{s}"),
                    };
                    let _ = writeln!(body, "{},{},{state}", atom.value, atom.probability);
                }
            } else {
                if output.format == Format::Csv {
                    let _ = writeln!(
                        body,
                        "# fracvar moments {} method=enumeration depth={n} k={k}",
                        spec.to_spec_args()?.describe()
                    );
                    body.push_str("k,moment\n");
                }
                for i in 0..=k {
                    let m = expected_power(&dist, i);
                    if output.format == Format::Csv {
                        let _ = writeln!(body, "{i},{m}");
                    } else {
                        let _ = writeln!(body, "E[S_{n}^{i}] = {m}");
                    }
                }
            }
        }
        Method::Mc => {
            let s = spec.to_spec_args()?.resolve()?;
            if output.format == Format::Csv {
                let _ = writeln!(
                    body,
                    "# fracvar moments {} method=mc depth={depth:?} samples={samples} seed={seed} k={k}",
                    spec.to_spec_args()?.describe()
                );
                body.push_str("k,moment,std_error\n");
            }
            for i in 1..=k {
                let signed = i % 2 == 1;
                let est = mc_estimate(&s, f64::from(i), signed, depth, samples, seed)?;
                if output.format == Format::Csv {
                    let _ = writeln!(body, "{i},{},{}", est.estimate, est.std_error);
                } else {
                    let _ = writeln!(
                        body,
                        "E[Z^{i}] ~ {} (std error {})",
                        est.estimate, est.std_error
                    );
                }
            }
        }
    }
    Ok(body)
}

fn render_series(
    header: &str,
    spec: &FractalSpec,
    p: f64,
    t: f64,
    values: &[(u32, f64)],
    format: Format,
) -> String {
    let mut body = String::new();
    match format {
        Format::Csv => {
            let _ = writeln!(body, "{header}");
            body.push_str("n,p,t,b,alpha,phi,value\n");
            for (n, v) in values {
                let _ = writeln!(
                    body,
                    "{n},{p},{t},{},{},{},{v}",
                    spec.b(),
                    spec.alpha(),
                    spec.phi().label()
                );
            }
        }
        Format::Plain => {
            for (n, v) in values {
                let _ = writeln!(body, "{n} {v}");
            }
        }
    }
    body
}

/// Write rendered output to `--out` or stdout.
pub fn emit(output: Option<&PathBuf>, body: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, body)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

/// The `--out` path of a command, if any.
pub fn out_path(command: &Command) -> Option<&PathBuf> {
    let output = match command {
        Command::Eval { output, .. }
        | Command::Variation { output, .. }
        | Command::Signed { output, .. }
        | Command::Classify { output, .. }
        | Command::Slope { output, .. }
        | Command::SignedLimit { output, .. }
        | Command::Moments { output, .. }
        | Command::Sweep { output, .. }
        | Command::Convergence { output, .. } => output,
        Command::Selftest => return None,
    };
    output.out.as_ref()
}
