//! The `hcw` command line: every subcommand parses its flags, calls one
//! library operation and serializes the result.
//!
//! Reports are JSON objects with sorted keys:
//! `{"command", "config": {"enumeration", "horizons"}, "result", "certified"}`.
//! Exit code 0 means certified, 1 means not certified (or a search or
//! certificate failure), 2 means the input was rejected.

mod commands;
pub mod specs;

use clap::{ArgGroup, Args, Parser, Subcommand};
use hcw::Error;
use serde_json::{json, Value};

/// What a run printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "hcw", version, about = "Exact weighted backward shifts on l2: orbits, constructions and certificates")]
pub struct Cli {
    /// JSON file selecting the challenge and triple enumerations.
    #[arg(long, global = true)]
    pub config: Option<String>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Orbit norms of B_w^k(y) for k in [0, K].
    Orbit {
        #[arg(long)]
        w: String,
        #[arg(long)]
        y: String,
        #[arg(long = "K", default_value_t = 200)]
        big_k: usize,
        /// Explicit coordinates per iterate when y has an infinite tail.
        #[arg(long, default_value_t = 64)]
        window: usize,
        #[arg(long)]
        csv: bool,
    },
    /// Least k <= K with B_w^k(y) certified inside a basic set.
    Hit {
        #[arg(long)]
        w: String,
        #[arg(long)]
        y: String,
        #[command(flatten)]
        target: Target,
        #[arg(long = "K", default_value_t = 200)]
        big_k: usize,
    },
    /// Hypercyclic vector for w built against the first challenges.
    BuildHc {
        #[arg(long)]
        w: String,
        #[arg(long, default_value_t = 8)]
        challenges: usize,
    },
    /// Weight sequence whose shift keeps the orbit of y in the unit ball.
    Defeat {
        #[arg(long)]
        y: String,
        #[arg(long = "K", default_value_t = 200)]
        big_k: usize,
    },
    /// The indices i_n, the weight f(y), and its boundedness certificate.
    Fmap {
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 6)]
        count: usize,
        #[arg(long = "K", default_value_t = 200)]
        big_k: usize,
    },
    /// Partition blocks and the prefixes of y_a and w_a.
    Encode {
        #[arg(long, default_value = "countable")]
        universe: String,
        #[arg(long)]
        a: String,
        #[arg(long, default_value_t = 12)]
        blocks: usize,
        /// Coordinates of y_a and w_a to print.
        #[arg(long, default_value_t = 64)]
        prefix: usize,
    },
    /// Bound certificate when b is contained in a, hit certificates otherwise.
    VerifyPair {
        #[arg(long)]
        universe: usize,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 12)]
        blocks: usize,
        /// Hits checked per element of b outside a.
        #[arg(long, default_value_t = 3)]
        per_elem: usize,
    },
    /// Tree/branch verdict: y_T against w_p.
    Tree {
        #[arg(long)]
        t: String,
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 12)]
        blocks: usize,
    },
    #[command(subcommand)]
    Nice(NiceCmd),
    #[command(subcommand)]
    Force(ForceCmd),
    /// Enumerations and their inverses.
    Enum(EnumArgs),
}

/// A basic set, as an index into the challenge enumeration or explicitly.
#[derive(Args, Debug, Clone)]
pub struct Target {
    #[arg(long, conflicts_with_all = ["q", "eps"])]
    pub challenge: Option<usize>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum NiceCmd {
    /// Dense refinement of U_{r,delta} into the nicely-maps set, with samples.
    Refine {
        #[arg(long)]
        r: String,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// A weight for which y is nicely hypercyclic on the first challenges.
    Witness {
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 5)]
        challenges: usize,
        #[arg(long = "K", default_value_t = 200)]
        big_k: usize,
    },
    /// One vector mapping nicely for several weights.
    Common {
        #[arg(long, required = true)]
        w: Vec<String>,
        #[arg(long, default_value_t = 5)]
        challenges: usize,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
    },
    /// Whether w maps y nicely into U_{q,eps} at k.
    Check {
        #[arg(long)]
        w: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: String,
        #[arg(long)]
        eps: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum ForceCmd {
    /// Extension certificate for p2 below p1.
    Extend {
        #[arg(long)]
        p2: String,
        #[arg(long)]
        p1: String,
    },
    /// Extension of p whose open set lies inside a refiner's set.
    Avoid {
        #[arg(long)]
        p: String,
        #[arg(long)]
        refiner: String,
        #[arg(long, default_value_t = 0)]
        n: usize,
    },
    /// Extension of p forcing y to map nicely into U_{q,eps}.
    Nice {
        #[arg(long)]
        p: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        v: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
    },
    /// Descending chain meeting a list of requests.
    Run {
        #[arg(long)]
        p0: String,
        #[arg(long)]
        requests: String,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("which").required(true)))]
pub struct EnumArgs {
    #[arg(long, group = "which")]
    pub challenge: Option<usize>,
    #[arg(long, group = "which")]
    pub rational: Option<usize>,
    #[arg(long, group = "which")]
    pub string: Option<usize>,
    #[arg(long, group = "which")]
    pub triple: Option<usize>,
    /// Universe for --triple.
    #[arg(long, default_value = "countable", requires = "triple")]
    pub universe: String,
}

/// A finished command before rendering.
pub(crate) enum Output {
    Report { horizons: Value, result: Value, certified: bool },
    Csv { text: String, certified: bool },
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Domain(_) | Error::Precondition(_) => 2,
        Error::Horizon { .. } | Error::Certificate(_) => 1,
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.use_stderr() {
                true => Outcome { code: 2, stdout: String::new(), stderr: text },
                false => Outcome { code: 0, stdout: text, stderr: String::new() },
            };
        }
    };
    let result = specs::Config::load(cli.config.as_deref()).and_then(|cfg| {
        commands::dispatch(&cli.cmd, &cfg).map(|out| (cfg, out))
    });
    match result {
        Err(e) => Outcome { code: exit_for(&e), stdout: String::new(), stderr: format!("hcw: {e}\n") },
        Ok((_, Output::Csv { text, certified })) => Outcome { code: i32::from(!certified), stdout: text, stderr: String::new() },
        Ok((cfg, Output::Report { horizons, result, certified })) => {
            let report = json!({
                "command": argv.get(1..).unwrap_or_default(),
                "config": { "enumeration": cfg.label, "horizons": horizons },
                "result": result,
                "certified": certified,
            });
            let mut stdout = serde_json::to_string_pretty(&report).expect("JSON values serialize");
            stdout.push('\n');
            Outcome { code: i32::from(!certified), stdout, stderr: String::new() }
        }
    }
}
