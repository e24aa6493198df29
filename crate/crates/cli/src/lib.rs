//! Argument parsing, dispatch and rendering for the `hermkr` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hermkr::btree::{self, DiagInvariants, TreeConfig};
use hermkr::checks::{self, CheckRecord};
use hermkr::exact::{approx, format_rational, Polynomial, Rational};
use hermkr::global::{self, GlobalHermitianMatrix, LevelStructure, Place, QuadField};
use hermkr::hironaka::{self, DensityTarget, Partition};
use hermkr::localfield::mu;
use hermkr::oracle::{self, LocalTarget, OracleConfig, OracleJob};
use hermkr::{Error, InertLocalRing, LocalHermitianSpec};

#[derive(Parser, Debug)]
#[command(name = "hermkr", version, about = "Exact local Kudla-Rapoport computations at inert primes")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = checks::DEFAULT_SEED, global = true)]
    pub seed: u64,
    /// Also report floating-point approximations, labelled as such.
    #[arg(long, global = true)]
    pub approx: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// F(S, T; X) for S = diag(p,1) (double sum and closed form) and S = Id (Nagaoka).
    DensityPoly(DensityPolyArgs),
    /// alpha(S_xi, T_lambda) by Hironaka's formula.
    DensityGeneral(DensityGeneralArgs),
    /// Brute-force count over o/p^k.
    Oracle(OracleArgs),
    /// Intersection of two local divisors on the Bruhat-Tits tree.
    Tree(TreeArgs),
    /// mu_p(T) = (a+b)/2 - (p + ... + p^b).
    Mu(MuArgs),
    /// Density-derivative combination against mu over all even pairs.
    Identity(IdentityArgs),
    /// Diff(T) for a global Hermitian matrix.
    Diff(DiffArgs),
    /// Hilbert symbols (a, b)_v.
    Hilbert(HilbertArgs),
    /// Class number and unit count of Q(sqrt disc).
    Classnum(ClassnumArgs),
    /// Local invariants (a, b) of a global T at an inert prime.
    Localize(LocalizeArgs),
    /// Number of pairs in o_k^2 with prescribed Hermitian Gram matrix.
    Reps(RepsArgs),
    /// Runs the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct DensityPolyArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub a: u32,
    #[arg(long)]
    pub b: u32,
    /// Also evaluate at X = (-p)^-r.
    #[arg(long)]
    pub r: Option<u32>,
}

#[derive(Args, Debug, Serialize)]
pub struct DensityGeneralArgs {
    #[arg(long)]
    pub p: u64,
    /// Exponents of S, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub xi: Vec<u32>,
    /// Exponents of T, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambda: Vec<u32>,
}

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub k: u32,
    /// Exponents of S, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub s: Vec<u32>,
    /// Diagonal entries of T (integers), comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<i64>,
    /// Off-diagonal entry `x,y` meaning x + y*delta.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub off: Option<Vec<i64>>,
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    pub budget: u128,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also run at precision k+1 and compare.
    #[arg(long)]
    pub stabilize: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct TreeArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub m1: u32,
    #[arg(long)]
    pub m2: u32,
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub e: Option<u32>,
    /// Write the explicit subtree in Graphviz format.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct MuArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub a: u32,
    #[arg(long)]
    pub b: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct IdentityArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub max: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct DiffArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub disc: i64,
    #[arg(long, default_value_t = 1)]
    pub level: u64,
    /// `t1,t2,ax,ay`, off-diagonal in the w-basis.
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
}

#[derive(Args, Debug, Serialize)]
pub struct HilbertArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// A prime or `inf`; omitted means every relevant place.
    #[arg(long)]
    pub place: Option<String>,
    /// Check the product formula on this many seeded random pairs instead.
    #[arg(long)]
    pub random: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassnumArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub disc: i64,
}

#[derive(Args, Debug, Serialize)]
pub struct LocalizeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub disc: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
    #[arg(long)]
    pub p: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct RepsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub disc: i64,
    /// Gram matrix of L = o_k^2 as `t1,t2,ax,ay`.
    #[arg(long, allow_hyphen_values = true)]
    pub gram: String,
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
}

#[derive(Args, Debug, Serialize)]
pub struct SelftestArgs {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandResult {
    pub command: String,
    pub inputs: Value,
    pub outputs: BTreeMap<String, Value>,
    pub checks: Vec<CheckRecord>,
}

impl CommandResult {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Precondition(_) | Error::Parse(_)) => 2,
            CliError::Core(Error::BudgetExceeded { .. }) => 3,
            CliError::Core(Error::InexactDivision(_)) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

struct Outputs {
    map: BTreeMap<String, Value>,
    approx: Option<BTreeMap<String, Value>>,
}

impl Outputs {
    fn new(with_approx: bool) -> Self {
        Outputs { map: BTreeMap::new(), approx: with_approx.then(BTreeMap::new) }
    }

    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.map.insert(key.to_string(), v.into());
    }

    fn rational(&mut self, key: &str, x: &Rational) {
        self.put(key, format_rational(x));
        if let Some(a) = self.approx.as_mut() {
            a.insert(key.to_string(), json!(approx(x)));
        }
    }

    fn poly(&mut self, key: &str, f: &Polynomial) {
        self.put(key, f.to_strings());
    }

    fn finish(mut self) -> BTreeMap<String, Value> {
        if let Some(a) = self.approx.take() {
            if !a.is_empty() {
                self.map.insert("approximate".to_string(), Value::Object(a.into_iter().collect()));
            }
        }
        self.map
    }
}

fn record(criterion: u32, name: &str, passed: bool, detail: String) -> CheckRecord {
    CheckRecord {
        criterion,
        name: name.to_string(),
        passed,
        cases: 1,
        tolerance: "exact".to_string(),
        detail,
        millis: 0,
    }
}

fn name_of(cmd: &Command) -> &'static str {
    match cmd {
        Command::DensityPoly(_) => "density-poly",
        Command::DensityGeneral(_) => "density-general",
        Command::Oracle(_) => "oracle",
        Command::Tree(_) => "tree",
        Command::Mu(_) => "mu",
        Command::Identity(_) => "identity",
        Command::Diff(_) => "diff",
        Command::Hilbert(_) => "hilbert",
        Command::Classnum(_) => "classnum",
        Command::Localize(_) => "localize",
        Command::Reps(_) => "reps",
        Command::Selftest(_) => "selftest",
    }
}

fn parse_matrix(s: &str) -> Result<GlobalHermitianMatrix, CliError> {
    Ok(s.parse()?)
}

pub fn run(cli: &Cli) -> Result<CommandResult, CliError> {
    let mut out = Outputs::new(cli.approx);
    let mut checks_out = Vec::new();
    match &cli.command {
        Command::DensityPoly(a) => {
            let target = DensityTarget::new(a.a, a.b, a.p)?;
            let nagaoka = hironaka::f_poly_nagaoka(&target)?;
            out.poly("f_self_dual", &nagaoka);
            if (a.a + a.b) % 2 == 0 {
                let nonsplit = hironaka::f_poly_nonsplit(&target)?;
                let closed = hironaka::f_poly_closed(&target)?;
                out.poly("f_nonsplit", &nonsplit);
                out.poly("f_closed", &closed);
                out.rational("alpha_prime", &hironaka::alpha_prime(&target)?);
                checks_out.push(record(0, "double sum equals closed form", nonsplit == closed, String::new()));
                if let Some(r) = a.r {
                    out.rational("f_nonsplit_at_r", &nonsplit.eval(&hironaka::x_at(a.p, r)));
                }
            }
            if let Some(r) = a.r {
                out.rational("f_self_dual_at_r", &nagaoka.eval(&hironaka::x_at(a.p, r)));
            }
        }
        Command::DensityGeneral(a) => {
            let alpha = hironaka::alpha_general(&Partition::new(a.xi.clone())?, &Partition::new(a.lambda.clone())?, a.p)?;
            out.rational("alpha", &alpha);
        }
        Command::Oracle(a) => {
            let mut target = LocalTarget::diag(&a.t)?;
            if let (Some(off), LocalTarget::Rank2 { off: slot, .. }) = (&a.off, &mut target) {
                *slot = (off[0], off[1]);
            }
            let job = OracleJob::new(InertLocalRing::new(a.p, a.k)?, LocalHermitianSpec::new(a.s.clone())?, target)?;
            let progress = |done: u64, total: u64| {
                if done == total || done.is_multiple_of(32) {
                    eprintln!("oracle: {done}/{total} chunks");
                }
            };
            let config = OracleConfig { budget: a.budget, threads: a.threads, progress: Some(&progress) };
            out.put("count", oracle::count_solutions_with(&job, &config)?.to_string());
            out.rational("density", &oracle::density_estimate_with(&job, &config)?);
            out.put("eps", job.ring.eps());
            if a.stabilize {
                let st = oracle::stabilized_density(&job, &config)?;
                out.rational("density_next", &st.value);
                out.put("stabilized", if st.stabilized { "yes" } else { "undetermined" });
            }
        }
        Command::Tree(a) => {
            let config = TreeConfig::new(a.p, a.m1, a.m2, a.d, a.e)?;
            let brute = btree::intersect_bruteforce(&config);
            let closed = btree::intersect_closed(&config);
            out.put("bruteforce", brute.to_string());
            out.put("closed", closed.to_string());
            match btree::diag_invariants(&config) {
                DiagInvariants::Integral { a: ia, b: ib } => {
                    out.put("invariants", json!([ia, ib]));
                    let m = mu(ia, ib, a.p)?;
                    out.rational("mu", &m);
                    checks_out.push(record(0, "closed form equals mu", m == hermkr::exact::int(closed), String::new()));
                }
                DiagInvariants::NotIntegral => out.put("invariants", "not integral"),
            }
            if let Ok(o) = btree::overlap_ball(&config) {
                out.put("overlap", json!({ "radius": o.radius, "center_position": o.center_position }));
            }
            checks_out.push(record(0, "brute force equals closed form", brute == closed, String::new()));
            if let Some(path) = &a.dot {
                let tree = btree::build_tree(&config);
                std::fs::write(path, tree.to_dot(&config)).map_err(CliError::Io)?;
                out.put("dot_vertices", tree.len());
            }
        }
        Command::Mu(a) => out.rational("mu", &mu(a.a, a.b, a.p)?),
        Command::Identity(a) => {
            let mut pairs = 0;
            for x in 0..=a.max {
                for y in (0..=x).filter(|y| (x + y) % 2 == 0) {
                    let target = DensityTarget::new(x, y, a.p)?;
                    let lhs = hironaka::mu_from_densities(&target)?;
                    let rhs = mu(x, y, a.p)?;
                    checks_out.push(record(
                        5,
                        &format!("(a,b)=({x},{y})"),
                        lhs == rhs,
                        format!("{} vs {}", format_rational(&lhs), format_rational(&rhs)),
                    ));
                    pairs += 1;
                }
            }
            out.put("pairs", pairs);
        }
        Command::Diff(a) => {
            let field = QuadField::new(a.disc)?;
            let level = LevelStructure::new(&field, a.level)?;
            let t = parse_matrix(&a.t)?;
            let diff = global::diff_set(&field, &level, &t)?;
            out.rational("det", &t.det(&field));
            out.put("diff", diff.iter().copied().collect::<Vec<_>>());
            let two_ways = global::diff_set_via_invariants(&field, &level, &t)?;
            checks_out.push(record(0, "Diff(T) from Hilbert symbols", two_ways == diff, format!("{two_ways:?}")));
        }
        Command::Hilbert(a) => hilbert(a, cli.seed, &mut out, &mut checks_out)?,
        Command::Classnum(a) => {
            let field = QuadField::new(a.disc)?;
            let c = global::class_number(&field);
            out.put("h", c.h);
            out.put("unit_order", c.unit_order);
            out.rational("constant", &c.constant());
            out.put("reduced_forms", json!(global::reduced_forms(&field)));
        }
        Command::Localize(a) => {
            let field = QuadField::new(a.disc)?;
            let t = parse_matrix(&a.t)?;
            let (ia, ib) = global::localize(&field, &t, a.p)?;
            out.put("a", ia);
            out.put("b", ib);
            if (ia + ib) % 2 == 0 {
                out.rational("mu", &mu(ia, ib, a.p)?);
            }
        }
        Command::Reps(a) => {
            let field = QuadField::new(a.disc)?;
            let gram = parse_matrix(&a.gram)?;
            let t = parse_matrix(&a.t)?;
            out.put("count", global::count_lattice_reps(&field, &gram, &t)?);
            out.rational("class_constant", &global::class_number(&field).constant());
        }
        Command::Selftest(_) => {
            checks_out = checks::run_all(cli.seed);
            out.put("passed", checks_out.iter().filter(|c| c.passed).count());
            out.put("total", checks_out.len());
        }
    }
    let mut inputs = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    if let (Value::Object(m), Command::Hilbert(_) | Command::Selftest(_)) = (&mut inputs, &cli.command) {
        m.insert("seed".to_string(), json!(cli.seed));
    }
    Ok(CommandResult { command: name_of(&cli.command).to_string(), inputs, outputs: out.finish(), checks: checks_out })
}

fn hilbert(a: &HilbertArgs, seed: u64, out: &mut Outputs, checks_out: &mut Vec<CheckRecord>) -> Result<(), CliError> {
    if let Some(n) = a.random {
        let pairs = checks::seeded_pairs(seed, n);
        for &(x, y) in &pairs {
            let prod = global::hilbert_product(&hermkr::exact::int(x), &hermkr::exact::int(y))?;
            checks_out.push(record(9, &format!("({x},{y})"), prod == 1, format!("product {prod}")));
        }
        out.put("pairs", pairs.len());
        return Ok(());
    }
    let (Some(sa), Some(sb)) = (&a.a, &a.b) else {
        return Err(Error::Parse("hilbert needs --a and --b, or --random N".into()).into());
    };
    let (x, y) = (hermkr::exact::parse_rational(sa)?, hermkr::exact::parse_rational(sb)?);
    match &a.place {
        Some(place) => {
            let v: Place = place.parse()?;
            out.put("symbol", global::hilbert_symbol(&x, &y, v)?);
        }
        None => {
            let mut symbols = serde_json::Map::new();
            for v in global::relevant_places(&x, &y) {
                symbols.insert(v.to_string(), json!(global::hilbert_symbol(&x, &y, v)?));
            }
            out.put("symbols", Value::Object(symbols));
            let prod = global::hilbert_product(&x, &y)?;
            out.put("product", prod);
            checks_out.push(record(9, "product formula", prod == 1, String::new()));
        }
    }
    Ok(())
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Plain-text rendering with aligned keys.
pub fn render_text(r: &CommandResult) -> String {
    let mut s = String::new();
    let width = r.outputs.keys().map(String::len).max().unwrap_or(0).max("command".len());
    let _ = writeln!(s, "{:width$}  {}", "command", r.command);
    for (k, v) in &r.outputs {
        let _ = writeln!(s, "{k:width$}  {}", scalar_text(v));
    }
    for c in &r.checks {
        let _ = writeln!(s, "{}", checks::render_line(c));
    }
    s
}

pub fn render(r: &CommandResult, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("results serialize"),
        Format::Text => render_text(r),
    }
}
