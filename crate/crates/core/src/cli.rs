//! The `twobase` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classify::{self, Classification};
use crate::critical::{self, CriticalCase, CurveSelection, Which};
use crate::error::{Error, Result};
use crate::eval::{self, Bracket, Precision, SolveOptions, DEFAULT_MAX_DEPTH, DEFAULT_PRECISION_DIGITS, DEFAULT_TOL};
use crate::par::Execution;
use crate::spectral;
use crate::substitution::{s_map, DirectiveSequence};
use crate::word::{letters_to_string, EpWord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;

/// Environment variable holding the default `--precision`.
pub const PRECISION_ENV: &str = "TWOBASE_PRECISION";

#[derive(Debug, Parser)]
#[command(name = "twobase", version, about = "Two-base expansions: critical curves, classification, entropy")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Working precision in decimal digits.
    #[arg(long, global = true, env = PRECISION_ENV, default_value_t = DEFAULT_PRECISION_DIGITS,
          value_parser = clap::value_parser!(u32).range(15..))]
    pub precision: u32,
    /// Bracket width at which solvers stop.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Maximal descent depth.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Validated run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub precision: u32,
    pub tol: f64,
    pub max_depth: usize,
    pub output: Option<PathBuf>,
}

impl Config {
    pub fn from_args(args: &ConfigArgs) -> Result<Config> {
        if !(args.tol > 0.0 && args.tol.is_finite()) {
            return Err(Error::Precondition(format!("tol must be positive, got {}", args.tol)));
        }
        if args.max_depth < 1 {
            return Err(Error::Precondition("max-depth must be at least 1".into()));
        }
        Ok(Config { precision: args.precision, tol: args.tol, max_depth: args.max_depth, output: args.out.clone() })
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { tol: self.tol, max_depth: self.max_depth, precision: Precision::from_digits(self.precision) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExpandMode {
    QuasiGreedy,
    QuasiLazy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveWhat {
    Gr,
    Kl,
    Both,
}

impl From<CurveWhat> for CurveSelection {
    fn from(w: CurveWhat) -> Self {
        match w {
            CurveWhat::Gr => CurveSelection::G,
            CurveWhat::Kl => CurveSelection::K,
            CurveWhat::Both => CurveSelection::Both,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generalized golden ratio G(q0).
    Gr { q0: f64 },
    /// Generalized Komornik-Loreti constant K(q0).
    Kl { q0: f64 },
    /// The base q1 at which two words have equal value.
    Mu {
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
    },
    /// Cardinality class of Omega_{a,b}.
    ClassifyOmega {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Cardinality class of U_{q0,q1}.
    ClassifyU {
        #[arg(long)]
        q0: f64,
        #[arg(long)]
        q1: f64,
    },
    /// Digits of a quasi-greedy or quasi-lazy expansion.
    Expand {
        #[arg(long)]
        q0: f64,
        #[arg(long)]
        q1: f64,
        #[arg(long, value_enum)]
        mode: ExpandMode,
        #[arg(long)]
        digits: usize,
        /// Defaults to 1/q1 (quasi-greedy) or 1/(q0(q1-1)) (quasi-lazy).
        #[arg(long)]
        x: Option<f64>,
    },
    /// Directive sequence of a word.
    Smap {
        #[arg(long)]
        word: String,
        #[arg(long)]
        directive_depth: Option<usize>,
    },
    /// Prefix of the limit word of a directive sequence.
    LimitWord {
        #[arg(long)]
        directive: String,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        seed: u8,
    },
    /// Topological entropy of Omega_{a,b}.
    Entropy {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Also print the automaton.
        #[arg(long)]
        automaton: bool,
    },
    /// Dimension lower bound for U_{q0,q1}, or the similarity dimension of two ratios.
    Dim {
        #[arg(long, requires = "q1", conflicts_with_all = ["r0", "r1"])]
        q0: Option<f64>,
        #[arg(long, requires = "q0")]
        q1: Option<f64>,
        #[arg(long, requires = "r1")]
        r0: Option<f64>,
        #[arg(long, requires = "r0")]
        r1: Option<f64>,
    },
    /// Samples G and/or K on a grid and writes CSV.
    Curve {
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = CurveWhat::Both)]
        what: CurveWhat,
    },
    /// Affine reduction of digits (d0, d1) to (0, 1).
    Reduce {
        #[arg(long)]
        d0: f64,
        #[arg(long)]
        q0: f64,
        #[arg(long)]
        d1: f64,
        #[arg(long)]
        q1: f64,
    },
}

fn word(text: &str) -> Result<EpWord> {
    EpWord::parse(text)
}

fn classification_status(c: Classification) -> i32 {
    if matches!(c, Classification::Undecided(_)) {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    }
}

fn critical_status(c: CriticalCase) -> i32 {
    if c == CriticalCase::DepthExhausted {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    }
}

fn execute(command: &Command, config: &Config, out: &mut dyn Write) -> Result<i32> {
    let opts = config.solve_options();
    let io_err = |e: io::Error| Error::Precondition(format!("write failed: {e}"));
    match command {
        Command::Gr { q0 } | Command::Kl { q0 } => {
            let which = if matches!(command, Command::Gr { .. }) { Which::G } else { Which::K };
            let r = critical::critical_value(which, *q0, &opts)?;
            writeln!(out, "{r}").map_err(io_err)?;
            Ok(critical_status(r.case))
        }
        Command::Mu { u, v } => {
            let b = eval::mu_with(&word(u)?, &word(v)?, &opts)?;
            writeln!(out, "{b}").map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::ClassifyOmega { a, b } => {
            let c = classify::classify_omega_words(&word(a)?, &word(b)?, config.max_depth)?;
            writeln!(out, "{c}").map_err(io_err)?;
            Ok(classification_status(c))
        }
        Command::ClassifyU { q0, q1 } => {
            let c = classify::classify_univoque_with(*q0, *q1, &opts)?;
            writeln!(out, "{c}").map_err(io_err)?;
            Ok(classification_status(c))
        }
        Command::Expand { q0, q1, mode, digits, x } => {
            let run = match (mode, x) {
                (ExpandMode::QuasiGreedy, None) => classify::expansion_a(*q0, *q1, *digits, config.tol)?,
                (ExpandMode::QuasiLazy, None) => classify::expansion_b(*q0, *q1, *digits, config.tol)?,
                (ExpandMode::QuasiGreedy, Some(x)) => classify::quasi_greedy(*q0, *q1, *x, *digits, config.tol)?,
                (ExpandMode::QuasiLazy, Some(x)) => classify::quasi_lazy(*q0, *q1, *x, *digits, config.tol)?,
            };
            writeln!(out, "{run}").map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Smap { word: w, directive_depth } => {
            let s = s_map(&word(w)?, directive_depth.unwrap_or(config.max_depth));
            if s.truncated {
                writeln!(out, "{}...  truncated", s.directive).map_err(io_err)?;
                Ok(EXIT_UNDECIDED)
            } else {
                writeln!(out, "{}", s.directive).map_err(io_err)?;
                Ok(EXIT_OK)
            }
        }
        Command::LimitWord { directive, length, seed } => {
            let d = DirectiveSequence::parse(directive)?;
            writeln!(out, "{}", letters_to_string(&d.limit_word(*seed, *length))).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Entropy { a, b, automaton } => {
            let m = spectral::build_automaton(&word(a)?, &word(b)?)?;
            let h = spectral::entropy(&m, config.tol);
            let bracket = if h == 0.0 { Bracket::point(0.0) } else { Bracket::new(h - config.tol, h + config.tol, config.tol) };
            writeln!(out, "{bracket}  states={}", m.states()).map_err(io_err)?;
            if *automaton {
                write!(out, "{}", m.dump()).map_err(io_err)?;
            }
            Ok(EXIT_OK)
        }
        Command::Dim { q0, q1, r0, r1 } => match (q0, q1, r0, r1) {
            (Some(q0), Some(q1), _, _) => {
                let w = spectral::univoque_dimension_witness(*q0, *q1)?;
                let d = Bracket::new(w.dimension - 1e-12, w.dimension + 1e-12, 1e-12);
                let gens: Vec<String> = w.generators.iter().map(|g| letters_to_string(g)).collect();
                writeln!(
                    out,
                    "{d}  node={} generators={},{}",
                    crate::substitution::subs_to_string(&w.node),
                    gens[0],
                    gens[1]
                )
                .map_err(io_err)?;
                Ok(EXIT_OK)
            }
            (_, _, Some(r0), Some(r1)) => {
                let d = spectral::ifs_dimension(*r0, *r1, 1e-12)?;
                writeln!(out, "{}", Bracket::new(d - 1e-12, d + 1e-12, 1e-12)).map_err(io_err)?;
                Ok(EXIT_OK)
            }
            _ => Err(Error::Precondition("dim needs --q0 --q1 or --r0 --r1".into())),
        },
        Command::Curve { from, to, samples, what } => {
            let rows = critical::sample_curve(*from, *to, *samples, (*what).into(), &opts, Execution::default())?;
            critical::write_csv(&rows, &mut *out)?;
            Ok(rows.iter().map(|r| critical_status(r.result.case)).max().unwrap_or(EXIT_OK))
        }
        Command::Reduce { d0, q0, d1, q1 } => {
            let r = eval::reduce_system(*d0, *q0, *d1, *q1)?;
            writeln!(out, "offset={}  scale={}", Bracket::point(r.offset), Bracket::point(r.scale)).map_err(io_err)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = Config::from_args(&cli.config).and_then(|config| match &config.output {
        Some(path) => {
            let mut file = File::create(path).map_err(|e| Error::Precondition(format!("{}: {e}", path.display())))?;
            execute(&cli.command, &config, &mut file)
        }
        None => execute(&cli.command, &config, stdout),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("twobase").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn gr_and_kl() {
        let (code, out, _) = call(&["gr", "1.75"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("[1.571428571428"), "{out}");
        assert!(out.trim_end().ends_with("node= case=RightFormula"), "{out}");
        let (code, out, _) = call(&["kl", "1.5"]);
        assert_eq!(code, 0);
        assert!(out.contains("node= case=LeftFormula"), "{out}");
    }

    #[test]
    fn classify_omega_text() {
        let (code, out, _) = call(&["classify-omega", "--a", "01(0)", "--b", "1(0)"]);
        assert_eq!((code, out.trim()), (0, "CountableNontrivial"));
    }

    #[test]
    fn config_invariants() {
        assert_eq!(call(&["--precision", "12", "gr", "1.75"]).0, EXIT_ERROR);
        assert_eq!(call(&["--tol", "0", "gr", "1.75"]).0, EXIT_ERROR);
        assert_eq!(call(&["--max-depth", "0", "gr", "1.75"]).0, EXIT_ERROR);
        assert_eq!(call(&["--precision", "16", "gr", "1.75"]).0, EXIT_OK);
    }

    #[test]
    fn parse_errors_exit_2() {
        assert_eq!(call(&["classify-omega", "--a", "0(", "--b", "1(0)"]).0, EXIT_ERROR);
        assert_eq!(call(&["frobnicate"]).0, EXIT_ERROR);
        assert_eq!(call(&["gr", "0.5"]).0, EXIT_ERROR);
    }

    #[test]
    fn undecided_exits_3() {
        let (code, out, _) = call(&["smap", "--word", "(01101001)", "--directive-depth", "2"]);
        assert_eq!(code, EXIT_UNDECIDED, "{out}");
    }
}
