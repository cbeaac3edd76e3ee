//! `kscube`: verify and certify the metric Kwapień–Schütt inequality on
//! hypercube matrix spaces, compute exact cut-cone distortion for small
//! metric spaces, and build snowflake embeddings.
//!
//! Exit codes: 0 all checks pass, 1 verification failure, 2 usage error.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use kscube::bounds::{
    asymptotic_lower_bound, coarse_obstruction, holder_sandwich, ks_pair, poincare_lower_bound,
};
use kscube::cutcone::{c1_distortion, l1_embeddable, EmbeddabilityOutcome};
use kscube::embed::{fp_embed, schoenberg_embed};
use kscube::fourier::FunctionTable;
use kscube::ks::{
    character_ks_sides, character_permutation_sides, isoperimetric_check,
    isoperimetric_exhaustive_n2, ks_sides, ks_sides_sampled, ks_y_variant_sides, witness_odd,
    witness_phi, witness_psi, CharacterFn, SubsetWitness,
};
use kscube::metric::{
    hamming_cube, materialize_space, FiniteMetricSpace, DEFAULT_LP_POINT_CAP,
};
use kscube::repro::{emit_distortion_table, run_all, DistortionTable, ReproReport, RunConfig};
use kscube::space::{enumerate_points, PqParams};

#[derive(Parser)]
#[command(name = "kscube", version, about)]
struct Cli {
    /// Seed for every randomized computation (recorded in each artifact).
    #[arg(long, global = true, default_value_t = 2016)]
    seed: u64,

    /// Worker threads for the verification driver.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Inequality evaluations: verify random tables, evaluate witnesses,
    /// run the exhaustive isoperimetric sweep, sample beyond the caps.
    Ks(KsCmd),
    /// Isoperimetric verification (exhaustive at n = 2, or one subset).
    Isoperimetric(IsoArgs),
    /// Cut-cone linear programming: embeddability and exact distortion.
    Lp(LpCmd),
    /// Distortion lower bounds and the snowflake sandwich.
    Bound(BoundCmd),
    /// Explicit embedding constructions.
    Embed(EmbedCmd),
    /// Uniform/coarse obstruction arithmetic.
    Obstruct(ObstructArgs),
    /// Run the full verification checklist.
    Repro,
    /// Emit the lower/upper distortion table.
    Table(TableArgs),
}

#[derive(Args)]
struct KsCmd {
    #[command(subcommand)]
    action: KsAction,
}

#[derive(Subcommand)]
enum KsAction {
    /// Evaluate both sides on seeded random tables.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        theta: f64,
        #[arg(long, default_value_t = 100)]
        tables: u64,
        /// Value dimension of the random tables.
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Inequality variant: the standard even-n form or the
        /// y-averaged all-n form.
        #[arg(long, value_enum, default_value_t = Variant::Standard)]
        variant: Variant,
    },
    /// Evaluate an extremal witness exactly.
    Witness {
        #[arg(value_enum)]
        which: Witness,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        theta: u32,
    },
    /// Exhaustive isoperimetric sweep (n = 2).
    Isoperimetric(IsoArgs),
    /// Monte-Carlo estimate of the sides for a witness oracle.
    Sample {
        #[arg(long, value_enum, default_value_t = Witness::Phi)]
        witness: Witness,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Standard,
    Y,
}

#[derive(Clone, Copy, ValueEnum)]
enum Witness {
    Phi,
    Psi,
    Odd,
}

#[derive(Args)]
struct IsoArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Sweep all 2^16 subsets (n = 2 only).
    #[arg(long)]
    exhaustive: bool,
    /// Check a single subset given as a membership bitmask over point
    /// indices (little-endian).
    #[arg(long)]
    subset_mask: Option<u64>,
}

#[derive(Args)]
struct LpCmd {
    #[command(subcommand)]
    action: LpAction,
}

#[derive(Args)]
struct SpaceSource {
    /// FiniteMetricSpace JSON file.
    #[arg(long, conflicts_with_all = ["hamming_cube", "n"])]
    input: Option<PathBuf>,
    /// The Hamming cube F_2^M.
    #[arg(long, value_name = "M")]
    hamming_cube: Option<usize>,
    /// Side of the matrix space l_q^n(F_2^n, ||.||_p).
    #[arg(long, requires = "p", requires = "q")]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Snowflake exponent applied to the space before solving.
    #[arg(long)]
    snowflake: Option<f64>,
}

#[derive(Subcommand)]
enum LpAction {
    /// Decide isometric l_1-embeddability (cut-cone membership).
    Embeddable(SpaceSource),
    /// Compute the exact minimal L_1 distortion with certificates.
    Distortion(SpaceSource),
}

#[derive(Args)]
struct BoundCmd {
    #[command(subcommand)]
    action: BoundAction,
}

#[derive(Subcommand)]
enum BoundAction {
    /// Explicit lower bound with the Poincaré pair behind it.
    Lower {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
    /// Snowflake sandwich factors and the c_1 upper bound.
    Sandwich {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
}

#[derive(Args)]
struct EmbedCmd {
    #[command(subcommand)]
    action: EmbedAction,
}

#[derive(Subcommand)]
enum EmbedAction {
    /// Classical-scaling snowflake embedding of a Euclidean point set
    /// (JSON file: array of coordinate arrays).
    Schoenberg {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        input: PathBuf,
        /// Include coordinates in the output (they can be large).
        #[arg(long)]
        coordinates: bool,
    },
    /// Finite-scale l_2(l_1) -> l_p map on all points of M_n(F_2).
    Fp {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long, default_value_t = 50_000)]
        m: usize,
        #[arg(long)]
        coordinates: bool,
    },
}

#[derive(Args)]
struct ObstructArgs {
    #[arg(long)]
    n: usize,
    /// Explicit scale s for alpha(s n) <= C beta(s sqrt n).
    #[arg(long)]
    scale: Option<f64>,
    /// Preset scales: coarse (s = 1/sqrt n) or uniform (s = 1/n).
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Coarse,
    Uniform,
}

#[derive(Args)]
struct TableArgs {
    /// Comma-separated side lengths.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8, 16])]
    n: Vec<usize>,
    /// Comma-separated p:q pairs, e.g. 1:2,1:4.
    #[arg(long, value_delimiter = ',', default_value = "1:2")]
    pq: Vec<String>,
}

fn lp_point_cap() -> usize {
    std::env::var("KSCUBE_LP_POINT_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_LP_POINT_CAP)
}

fn load_space(src: &SpaceSource) -> anyhow::Result<FiniteMetricSpace> {
    let base = if let Some(path) = &src.input {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str::<FiniteMetricSpace>(&text)?
    } else if let Some(m) = src.hamming_cube {
        hamming_cube(m, lp_point_cap())?
    } else if let (Some(n), Some(p), Some(q)) = (src.n, src.p, src.q) {
        materialize_space(n, &PqParams::new(p, q)?, lp_point_cap())?
    } else {
        return Err(anyhow!(
            "provide --input, --hamming-cube, or --n with --p and --q"
        ));
    };
    match src.snowflake {
        Some(alpha) => Ok(base.snowflake(alpha)?),
        None => Ok(base),
    }
}

fn witness_character(which: Witness, n: usize) -> kscube::Result<CharacterFn> {
    match which {
        Witness::Phi => witness_phi(n),
        Witness::Psi => witness_psi(n),
        Witness::Odd => witness_odd(n),
    }
}

struct Emitter {
    format: Format,
    out: Option<PathBuf>,
    envelope: serde_json::Map<String, serde_json::Value>,
}

impl Emitter {
    fn new(cli: &Cli, command: String) -> Self {
        let mut h = DefaultHasher::new();
        (cli.seed, cli.threads, command.as_str()).hash(&mut h);
        let mut envelope = serde_json::Map::new();
        envelope.insert("command".into(), json!(command));
        envelope.insert("seed".into(), json!(cli.seed));
        envelope.insert("threads".into(), json!(cli.threads));
        envelope.insert("config_hash".into(), json!(format!("{:016x}", h.finish())));
        envelope.insert("schema_version".into(), json!(1));
        Emitter {
            format: cli.format,
            out: cli.out.clone(),
            envelope,
        }
    }

    fn write(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => {
                std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
            }
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                if !text.ends_with('\n') {
                    println!();
                }
            }
        }
        Ok(())
    }

    /// Emits a value wrapped in the provenance envelope.
    fn emit(&self, data: serde_json::Value) -> anyhow::Result<()> {
        let mut body = self.envelope.clone();
        body.insert("data".into(), data);
        match self.format {
            Format::Json => self.write(&serde_json::to_string_pretty(&body)?),
            // flat single-record CSV: alphabetical keys, values JSON-encoded
            Format::Csv => {
                let flat = flatten("data", &body["data"]);
                let header: Vec<&str> = flat.iter().map(|(k, _)| k.as_str()).collect();
                let values: Vec<String> = flat.iter().map(|(_, v)| v.clone()).collect();
                self.write(&format!("{}\n{}\n", header.join(","), values.join(",")))
            }
            Format::Markdown => {
                self.write(&format!("```json\n{}\n```", serde_json::to_string_pretty(&body)?))
            }
        }
    }

    fn emit_repro(&self, report: &ReproReport) -> anyhow::Result<()> {
        match self.format {
            Format::Json => {
                let mut body = self.envelope.clone();
                body.insert("data".into(), serde_json::to_value(report)?);
                self.write(&serde_json::to_string_pretty(&body)?)
            }
            Format::Csv => {
                let mut text = String::from("id,pass,runtime_ms,claim\n");
                for row in &report.rows {
                    text.push_str(&format!(
                        "{},{},{},{:?}\n",
                        row.id, row.pass, row.runtime_ms, row.claim
                    ));
                }
                self.write(&text)
            }
            Format::Markdown => {
                let mut text = format!(
                    "# verification report (seed {})\n\n| id | verdict | runtime (ms) |\n|---|---|---|\n",
                    report.seed
                );
                for row in &report.rows {
                    text.push_str(&format!(
                        "| {} | {} | {} |\n",
                        row.id,
                        if row.pass { "PASS" } else { "FAIL" },
                        row.runtime_ms
                    ));
                }
                self.write(&text)
            }
        }
    }

    fn emit_table(&self, table: &DistortionTable) -> anyhow::Result<()> {
        match self.format {
            Format::Json => {
                let mut body = self.envelope.clone();
                body.insert("data".into(), serde_json::to_value(table)?);
                self.write(&serde_json::to_string_pretty(&body)?)
            }
            Format::Csv => {
                let mut text =
                    String::from("n,p,q,lower,upper,lp_value,log_card_fourth_root,vacuous\n");
                for r in &table.rows {
                    text.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        r.n,
                        r.p,
                        r.q,
                        r.lower.map_or(String::new(), |v| v.to_string()),
                        r.upper.map_or(String::new(), |v| v.to_string()),
                        r.lp_value.map_or(String::new(), |v| v.to_string()),
                        r.log_card_fourth_root,
                        r.vacuous
                    ));
                }
                self.write(&text)
            }
            Format::Markdown => {
                let mut text = String::from(
                    "| n | p | q | lower | upper | exact LP | (n^2 ln 2)^(1/4) |\n|---|---|---|---|---|---|---|\n",
                );
                for r in &table.rows {
                    let fmt = |v: Option<f64>| {
                        v.map_or("—".to_string(), |x| format!("{x:.6}"))
                    };
                    text.push_str(&format!(
                        "| {} | {} | {} | {} | {} | {} | {:.6} |\n",
                        r.n,
                        r.p,
                        r.q,
                        if r.vacuous { "vacuous".into() } else { fmt(r.lower) },
                        fmt(r.upper),
                        fmt(r.lp_value),
                        r.log_card_fourth_root
                    ));
                }
                self.write(&text)
            }
        }
    }
}

fn flatten(prefix: &str, value: &serde_json::Value) -> Vec<(String, String)> {
    match value {
        serde_json::Value::Object(map) => {
            let mut out = Vec::new();
            for (k, v) in map {
                out.extend(flatten(&format!("{prefix}.{k}"), v));
            }
            out
        }
        other => vec![(prefix.to_string(), other.to_string().replace(',', ";"))],
    }
}

fn parse_pq_list(raw: &[String]) -> anyhow::Result<Vec<(f64, f64)>> {
    raw.iter()
        .map(|s| {
            let (p, q) = s
                .split_once(':')
                .ok_or_else(|| anyhow!("bad p:q pair {s:?}"))?;
            Ok((parse_exponent(p)?, parse_exponent(q)?))
        })
        .collect()
}

fn parse_exponent(s: &str) -> anyhow::Result<f64> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    Ok(s.parse()?)
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Ks(cmd) => run_ks(cli, cmd),
        Command::Isoperimetric(args) => run_isoperimetric(cli, args),
        Command::Lp(cmd) => run_lp(cli, cmd),
        Command::Bound(cmd) => run_bound(cli, cmd),
        Command::Embed(cmd) => run_embed(cli, cmd),
        Command::Obstruct(args) => run_obstruct(cli, args),
        Command::Repro => {
            let emitter = Emitter::new(cli, "repro".into());
            let report = run_all(&RunConfig {
                seed: cli.seed,
                threads: cli.threads,
            });
            for row in &report.rows {
                eprintln!(
                    "criterion {:<32} {} ({} ms)",
                    row.id,
                    if row.pass { "PASS" } else { "FAIL" },
                    row.runtime_ms
                );
            }
            emitter.emit_repro(&report)?;
            Ok(if report.all_pass { 0 } else { 1 })
        }
        Command::Table(args) => {
            let emitter = Emitter::new(cli, "table".into());
            let pq = parse_pq_list(&args.pq)?;
            let table = emit_distortion_table(&args.n, &pq)?;
            emitter.emit_table(&table)?;
            Ok(0)
        }
    }
}

fn run_ks(cli: &Cli, cmd: &KsCmd) -> anyhow::Result<u8> {
    match &cmd.action {
        KsAction::Verify {
            n,
            theta,
            tables,
            d,
            variant,
        } => {
            let emitter = Emitter::new(cli, format!("ks verify --n {n} --theta {theta}"));
            let mut rng = kscube::seeded_rng(cli.seed);
            let mut violations = 0u64;
            let mut min_slack = f64::INFINITY;
            let mut last = None;
            for _ in 0..*tables {
                let f = FunctionTable::random(*n, *d, &mut rng)?;
                let report = match variant {
                    Variant::Standard => ks_sides(&f, *theta)?,
                    Variant::Y => ks_y_variant_sides(&f, *theta)?,
                };
                if !report.holds {
                    violations += 1;
                }
                min_slack = min_slack.min(report.slack);
                last = Some(report);
            }
            emitter.emit(json!({
                "tables": tables,
                "violations": violations,
                "min_slack": min_slack,
                "last_report": last,
            }))?;
            Ok(if violations == 0 { 0 } else { 1 })
        }
        KsAction::Witness { which, n, theta } => {
            let emitter = Emitter::new(cli, format!("ks witness --n {n}"));
            let character = witness_character(*which, *n)?;
            let exact = character_ks_sides(&character, *theta)?;
            let perm = if character.n() <= 8 {
                Some(character_permutation_sides(&character)?)
            } else {
                None
            };
            emitter.emit(json!({
                "n": n,
                "mask": character.mask().to_string(),
                "theta": theta,
                "lhs": exact.lhs.to_string(),
                "rhs": exact.rhs.to_string(),
                "ratio": exact.ratio.map(|r| r.to_string()),
                "permutation": perm.map(|p| json!({
                    "lhs_total": p.lhs_total.to_string(),
                    "rhs_total": p.rhs_total.to_string(),
                    "min_k": p.min_k.map(|k| k.to_string()),
                })),
            }))?;
            Ok(0)
        }
        KsAction::Isoperimetric(args) => run_isoperimetric(cli, args),
        KsAction::Sample {
            witness,
            n,
            theta,
            samples,
        } => {
            let emitter = Emitter::new(cli, format!("ks sample --n {n}"));
            let character = witness_character(*witness, *n)?;
            let report = ks_sides_sampled(
                |x| vec![character.eval(x)],
                *n,
                *theta,
                *samples,
                cli.seed,
            )?;
            let holds = report.holds;
            emitter.emit(serde_json::to_value(&report)?)?;
            Ok(if holds { 0 } else { 1 })
        }
    }
}

fn run_isoperimetric(cli: &Cli, args: &IsoArgs) -> anyhow::Result<u8> {
    let emitter = Emitter::new(cli, format!("isoperimetric --n {}", args.n));
    if args.exhaustive {
        if args.n != 2 {
            return Err(anyhow!("exhaustive mode enumerates 2^(2^(n^2)) subsets; only n = 2 is feasible"));
        }
        let sweep = isoperimetric_exhaustive_n2();
        let ok = sweep.violations == 0;
        emitter.emit(serde_json::to_value(&sweep)?)?;
        return Ok(if ok { 0 } else { 1 });
    }
    let Some(mask) = args.subset_mask else {
        return Err(anyhow!("pass --exhaustive or --subset-mask"));
    };
    let subset = if args.n == 2 {
        SubsetWitness::from_mask16(mask as u16)
    } else {
        SubsetWitness::from_predicate(args.n, |p| (mask >> p.index()) & 1 == 1)?
    };
    let report = isoperimetric_check(&subset)?;
    let holds = report.holds;
    emitter.emit(serde_json::to_value(&report)?)?;
    Ok(if holds { 0 } else { 1 })
}

fn run_lp(cli: &Cli, cmd: &LpCmd) -> anyhow::Result<u8> {
    match &cmd.action {
        LpAction::Embeddable(src) => {
            let emitter = Emitter::new(cli, "lp embeddable".into());
            let space = load_space(src)?;
            match l1_embeddable(&space)? {
                EmbeddabilityOutcome::Embeddable(comb) => {
                    emitter.emit(json!({
                        "space": space.provenance(),
                        "embeddable": true,
                        "witness": comb,
                    }))?;
                }
                EmbeddabilityOutcome::NotEmbeddable(sep) => {
                    emitter.emit(json!({
                        "space": space.provenance(),
                        "embeddable": false,
                        "separating_functional": sep,
                    }))?;
                }
            }
            Ok(0)
        }
        LpAction::Distortion(src) => {
            let emitter = Emitter::new(cli, "lp distortion".into());
            let space = load_space(src)?;
            let cert = c1_distortion(&space)?;
            emitter.emit(serde_json::to_value(&cert)?)?;
            Ok(0)
        }
    }
}

fn run_bound(cli: &Cli, cmd: &BoundCmd) -> anyhow::Result<u8> {
    match cmd.action {
        BoundAction::Lower { n, p, q } => {
            let emitter = Emitter::new(cli, format!("bound lower --n {n}"));
            let params = PqParams::new(p, q)?;
            let explicit = asymptotic_lower_bound(n, &params)?;
            let even = if n % 2 == 0 { n } else { n - 1 };
            let pair = ks_pair(even, &params, 1.0)?;
            let pair_bound = poincare_lower_bound(&pair)?;
            emitter.emit(json!({
                "n": n,
                "p": p,
                "q": q,
                "lower_bound": explicit,
                "poincare_pair": pair,
                "poincare_bound": pair_bound,
                "provenance": "explicit coefficient (1-(1-2/n)^n)/2 n^(1/p-1/q); this implementation's explicit rendering of an asymptotic bound",
            }))?;
            Ok(0)
        }
        BoundAction::Sandwich { n, m, p, q } => {
            let emitter = Emitter::new(cli, format!("bound sandwich --n {n} --m {m}"));
            let bounds = holder_sandwich(n, m, &PqParams::new(p, q)?)?;
            emitter.emit(serde_json::to_value(&bounds)?)?;
            Ok(0)
        }
    }
}

fn run_embed(cli: &Cli, cmd: &EmbedCmd) -> anyhow::Result<u8> {
    match &cmd.action {
        EmbedAction::Schoenberg {
            beta,
            input,
            coordinates,
        } => {
            let emitter = Emitter::new(cli, format!("embed schoenberg --beta {beta}"));
            let text = std::fs::read_to_string(input)
                .with_context(|| format!("reading {}", input.display()))?;
            let points: Vec<Vec<f64>> = serde_json::from_str(&text)?;
            let mut result = schoenberg_embed(&points, *beta)?;
            if !coordinates {
                result.coordinates.clear();
            }
            emitter.emit(serde_json::to_value(&result)?)?;
            Ok(0)
        }
        EmbedAction::Fp {
            n,
            p,
            m,
            coordinates,
        } => {
            let emitter = Emitter::new(cli, format!("embed fp --n {n} --p {p} --m {m}"));
            let points: Vec<_> = enumerate_points(*n)?.collect();
            let mut result = fp_embed(&points, *p, *m, cli.seed)?;
            if !coordinates {
                result.coordinates.clear();
            }
            emitter.emit(serde_json::to_value(&result)?)?;
            Ok(0)
        }
    }
}

fn run_obstruct(cli: &Cli, args: &ObstructArgs) -> anyhow::Result<u8> {
    let emitter = Emitter::new(cli, format!("obstruct --n {}", args.n));
    let nf = args.n as f64;
    let scale = match (args.scale, args.preset) {
        (Some(s), None) => s,
        (None, Some(Preset::Coarse)) => 1.0 / nf.sqrt(),
        (None, Some(Preset::Uniform)) => 1.0 / nf,
        _ => return Err(anyhow!("pass exactly one of --scale or --preset")),
    };
    let obstruction = coarse_obstruction(args.n, scale)?;
    emitter.emit(serde_json::to_value(&obstruction)?)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let usage = err
                .downcast_ref::<kscube::Error>()
                .map(|e| {
                    matches!(
                        e,
                        kscube::Error::InvalidParameter { .. }
                            | kscube::Error::SizeLimit { .. }
                            | kscube::Error::RequiresEvenSide { .. }
                            | kscube::Error::RequiresOddSide { .. }
                    )
                })
                .unwrap_or(false);
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
