use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_integer::Integer;
use serde::Deserialize;
use serde_json::{json, Value};

use metaplectic_core::adelic::{
    a_chain_n2, hypothesis_star, hypothesis_star2, product_formula_sigma,
};
use metaplectic_core::cocycle::{kubota_gl2, sigma, sigma_traced};
use metaplectic_core::cover::{center_exponent, in_center_glr};
use metaplectic_core::levi::{block_embed, coset_decompose, in_mn, levi_cocycle, phi_w};
use metaplectic_core::verify::{self, Fault, VerifyConfig};
use metaplectic_core::{
    BlockPerm, CocycleParams, CoverElement, LeviShape, MatQ, MuN, Rat, SymbolBackend,
};

const DEFAULT_SEED: u64 = 0x5eed_2026;

/// Exact cocycles on metaplectic covers of GL_r.
#[derive(Parser)]
#[command(name = "metaplectic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded property suites and emit a JSON report.
    Verify(VerifyArgs),
    /// Local symbol (a, b) as an exponent of ζ_n.
    Symbol {
        #[arg(long, default_value = "real")]
        backend: String,
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// σ(g, g') with its reduction trace.
    Cocycle {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long)]
        g: String,
        #[arg(long)]
        g2: String,
    },
    /// Kubota's cocycle on GL_2 next to σ.
    Kubota {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long)]
        g: String,
        #[arg(long)]
        g2: String,
    },
    /// Whether the scalar aI is central in the cover of GL_r.
    Center {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
    /// x y x^-1 for elements {"g": matrix, "xi": exponent}.
    Conj {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// x y for elements {"g": matrix, "xi": exponent}.
    Mul {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// φ_w(m) for a block permutation w (1-based) and m in M^(n).
    WeylTwist {
        #[command(flatten)]
        levi: LeviArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        perm: Vec<usize>,
        #[arg(long)]
        m: String,
    },
    /// σ on block-diagonal matrices next to the block cocycle.
    LeviCocycle {
        #[command(flatten)]
        levi: LeviArgs,
        #[arg(long)]
        m: String,
        #[arg(long)]
        m2: String,
    },
    /// Split m = mn · rep with mn in M^(n).
    Coset {
        #[command(flatten)]
        levi: LeviArgs,
        #[arg(long)]
        m: String,
    },
    /// gcd criteria for the choice of the abelian subgroup of the Levi cover.
    Hypothesis {
        #[arg(long, value_delimiter = ',', required = true)]
        shape: Vec<usize>,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        c: u32,
    },
    /// Local quadratic cocycles at every relevant place and their product.
    ProductFormula {
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, default_value_t = 0)]
        c: u32,
        #[arg(long)]
        g: String,
        #[arg(long)]
        g2: String,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, env = "METAPLECTIC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = verify::DEFAULT_SAMPLES)]
    samples: usize,
    /// Suite names, `all` or `none`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    suite: Vec<String>,
    /// Repeatable; defaults to real, padic:2, padic:3, padic:5, tame:7:3.
    #[arg(long)]
    backend: Vec<String>,
    #[arg(long)]
    inject_fault: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the suite names and statements instead of running.
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    r: Option<usize>,
    /// Must match the order of the backend's roots of unity when given.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 0)]
    c: u32,
    #[arg(long, default_value = "real")]
    backend: String,
}

#[derive(Args)]
struct LeviArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    shape: Vec<usize>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 0)]
    c: u32,
    #[arg(long, default_value = "real")]
    backend: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementJson {
    g: MatQ,
    #[serde(default)]
    xi: i64,
}

fn backend(s: &str, n: Option<u32>) -> Result<SymbolBackend> {
    let b: SymbolBackend = s.parse()?;
    if let Some(n) = n {
        if n != b.modulus() {
            bail!("--n {n} does not match backend {b}, which has n = {}", b.modulus());
        }
    }
    Ok(b)
}

fn matrix(label: &str, s: &str) -> Result<MatQ> {
    serde_json::from_str(s).with_context(|| format!("--{label}: expected a JSON matrix of rationals"))
}

fn rational(label: &str, s: &str) -> Result<Rat> {
    s.parse().with_context(|| format!("{label}: expected a rational number"))
}

impl CoverArgs {
    fn params(&self, dim: usize) -> Result<CocycleParams> {
        if let Some(r) = self.r {
            if r != dim {
                bail!("--r {r} does not match a {dim}x{dim} matrix");
            }
        }
        Ok(CocycleParams::new(dim, self.c, backend(&self.backend, self.n)?)?)
    }
}

impl LeviArgs {
    fn shape(&self) -> Result<LeviShape> {
        Ok(LeviShape::new(self.shape.clone(), self.c, backend(&self.backend, self.n)?)?)
    }

    /// Blocks from either a JSON list of block matrices or one block-diagonal
    /// matrix.
    fn blocks(&self, label: &str, s: &str, shape: &LeviShape) -> Result<Vec<MatQ>> {
        if let Ok(blocks) = serde_json::from_str::<Vec<MatQ>>(s) {
            return Ok(blocks);
        }
        let m = matrix(label, s)?;
        Ok(shape.split(&m)?)
    }
}

fn element(label: &str, s: &str, p: &CocycleParams) -> Result<CoverElement> {
    let e: ElementJson = serde_json::from_str(s)
        .with_context(|| format!("--{label}: expected {{\"g\": matrix, \"xi\": exponent}}"))?;
    Ok(CoverElement::new(e.g, MuN::new(e.xi, p.n), p)?)
}

fn mu(v: MuN) -> Value {
    json!({ "exponent": v.exponent(), "n": v.modulus() })
}

fn emit(text: &str) -> Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn print(v: &Value) -> Result<()> {
    emit(&serde_json::to_string_pretty(v)?)
}

fn run_verify(args: &VerifyArgs) -> Result<ExitCode> {
    if args.list {
        let suites: Vec<Value> = verify::suite_names()
            .into_iter()
            .map(|name| json!({ "name": name, "statement": verify::suite_statement(name) }))
            .collect();
        print(&json!({ "suites": suites }))?;
        return Ok(ExitCode::SUCCESS);
    }
    let mut config = VerifyConfig::new(args.seed);
    config.samples = args.samples;
    config.suites = match args.suite.as_slice() {
        [one] if one == "all" => config.suites,
        [one] if one == "none" => Vec::new(),
        names => names.to_vec(),
    };
    if !args.backend.is_empty() {
        config.backends = args
            .backend
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_, _>>()?;
    }
    config.fault = args.inject_fault.as_deref().map(str::parse::<Fault>).transpose()?;
    let report = verify::run(&config)?;
    let text = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))?,
        None => emit(&text)?,
    }
    for s in report.suites.iter().filter(|s| !s.passed) {
        eprintln!("FAIL {}: {} of {} samples", s.name, s.failures, s.samples);
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Verify(args) => return run_verify(&args),
        Command::Symbol { backend: b, a, b: bb } => {
            let bk = backend(&b, None)?;
            let (x, y) = (rational("a", &a)?, rational("b", &bb)?);
            let v = bk.symbol(&x, &y)?;
            print(&json!({ "backend": bk.to_string(), "a": x, "b": y, "exponent": v.exponent(), "n": v.modulus() }))?;
        }
        Command::Cocycle { cover, g, g2 } => {
            let (g, g2) = (matrix("g", &g)?, matrix("g2", &g2)?);
            let p = cover.params(g.dim())?;
            let t = sigma_traced(&g, &g2, &p)?;
            print(&json!({
                "params": { "r": p.r, "n": p.n, "c": p.c, "backend": p.backend.describe() },
                "exponent": t.value.exponent(),
                "formal": t.formal,
                "trace": t.trace,
            }))?;
        }
        Command::Kubota { cover, g, g2 } => {
            let (g, g2) = (matrix("g", &g)?, matrix("g2", &g2)?);
            let p = cover.params(g.dim())?;
            let k = kubota_gl2(&g, &g2, &p)?;
            let s = sigma(&g, &g2, &p)?;
            print(&json!({ "kubota": mu(k), "sigma": mu(s), "agree": k == s }))?;
        }
        Command::Center { cover, a } => {
            let r = cover.r.ok_or_else(|| anyhow!("--r is required"))?;
            let a = rational("--a", &a)?;
            let p = cover.params(r)?;
            let e = center_exponent(r, p.c);
            print(&json!({
                "a": a,
                "central": in_center_glr(&a, &p)?,
                "exponent": e,
                "gcd": e.gcd(&(p.n as i64)),
            }))?;
        }
        Command::Conj { cover, x, y } => {
            let out = binary(&cover, &x, &y, |a, b| a.conj(b))?;
            print(&out)?;
        }
        Command::Mul { cover, x, y } => {
            let out = binary(&cover, &x, &y, |a, b| a.mul(b))?;
            print(&out)?;
        }
        Command::WeylTwist { levi, perm, m } => {
            let sh = levi.shape()?;
            let m = levi.blocks("m", &m, &sh)?;
            if perm.contains(&0) {
                bail!("--perm is 1-based");
            }
            let bp = BlockPerm::new(perm.iter().map(|i| i - 1).collect(), &sh)?;
            let in_m = in_mn(&m, &sh)?;
            if !in_m {
                bail!("m is not in M^(n): some block determinant is not an n-th power");
            }
            print(&json!({ "w": bp.matrix(), "phi_w": mu(phi_w(&m, &bp)?) }))?;
        }
        Command::LeviCocycle { levi, m, m2 } => {
            let sh = levi.shape()?;
            let (m, m2) = (levi.blocks("m", &m, &sh)?, levi.blocks("m2", &m2, &sh)?);
            let l = levi_cocycle(&m, &m2, &sh)?;
            let s = sigma(&block_embed(&m, &sh)?, &block_embed(&m2, &sh)?, sh.params())?;
            print(&json!({ "levi": mu(l), "sigma": mu(s), "agree": l == s }))?;
        }
        Command::Coset { levi, m } => {
            let sh = levi.shape()?;
            let m = levi.blocks("m", &m, &sh)?;
            print(&serde_json::to_value(coset_decompose(&m, &sh)?)?)?;
        }
        Command::Hypothesis { shape, n, c } => {
            let sh = LeviShape::new(shape, c, SymbolBackend::trivial(n)?)?;
            let star = hypothesis_star(&sh);
            let mut out = json!({ "verdict": star.verdict, "star": star });
            if sh.k() >= 2 {
                out["restriction"] = serde_json::to_value(hypothesis_star2(&sh)?)?;
            }
            if n == 2 {
                out["chain"] = serde_json::to_value(a_chain_n2(&sh)?)?;
            }
            print(&out)?;
        }
        Command::ProductFormula { r, c, g, g2 } => {
            let (g, g2) = (matrix("g", &g)?, matrix("g2", &g2)?);
            if let Some(r) = r {
                if r != g.dim() {
                    bail!("--r {r} does not match a {0}x{0} matrix", g.dim());
                }
            }
            let rep = product_formula_sigma(&g, &g2, c)?;
            let local: Vec<Value> = rep
                .local
                .iter()
                .map(|(place, v)| json!({ "place": place, "exponent": v.exponent() }))
                .collect();
            print(&json!({ "exponent": rep.value.exponent(), "n": 2, "local": local }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn binary(
    cover: &CoverArgs,
    x: &str,
    y: &str,
    op: impl Fn(&CoverElement, &CoverElement) -> metaplectic_core::Result<CoverElement>,
) -> Result<Value> {
    let probe: ElementJson = serde_json::from_str(x)
        .context("--x: expected {\"g\": matrix, \"xi\": exponent}")?;
    let p = cover.params(probe.g.dim())?;
    let z = op(&element("x", x, &p)?, &element("y", y, &p)?)?;
    Ok(json!({ "g": z.g, "xi": z.xi.exponent(), "n": p.n }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
