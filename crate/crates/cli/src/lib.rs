//! The `leftcorner` command-line tool.
//!
//! Exit codes: 0 on success, 1 on domain errors (and on a failed
//! equivalence check), 2 on usage errors. Diagnostics go to stderr as
//! `error[code]: message`; data goes to stdout or the `--output` file.

pub mod params;

use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use leftcorner::derivmap::Mapper;
use leftcorner::grammar::text::{
    derivation_to_string, peek_semiring, read_derivation, read_wcfg, symbol_to_string, transform_ids, write_wcfg,
};
use leftcorner::grammar::{equivalence_check, trim, EquivalenceOptions};
use leftcorner::ingest::{extract_grammar, parse_treebank, ExtractOptions, DEFAULT_DELIMITERS};
use leftcorner::leftrec::{bottoms, eliminate_left_recursion, left_recursive_rules};
use leftcorner::pipeline::{run_stages, stats, GrammarStats, Method};
use leftcorner::preprocess::{
    binarize, eliminate_nullary, eliminate_unary_cycles, null_weights_fixed_point, null_weights_glct,
    DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE,
};
use leftcorner::transform::{glct, glct_filtered, lct, slct_params, speculate, TransformParams};
use leftcorner::{Boolean, Grammar, Real, Semiring, SemiringKind, Viterbi};
use serde_json::json;

use params::ParamsFile;

pub const SEMIRING_ENV: &str = "LEFTCORNER_SEMIRING";

#[derive(Debug, Parser)]
#[command(
    name = "leftcorner",
    version,
    about = "Generalized left-corner transformations of weighted grammars"
)]
pub struct Cli {
    /// Semiring of input grammars. Defaults to the file's `semiring:` header,
    /// then $LEFTCORNER_SEMIRING, then `real`.
    #[arg(long, global = true, value_enum)]
    semiring: Option<SemiringArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply a left-corner transformation.
    Transform {
        grammar: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Glct)]
        kind: Kind,
        /// Parameter file with `P` and `X` (for `slct`, only `P` is used).
        #[arg(long, conflicts_with = "recipe")]
        params: Option<PathBuf>,
        /// Choose `P` and `X` automatically.
        #[arg(long, value_enum)]
        recipe: Option<Recipe>,
        /// Keep useless rules.
        #[arg(long)]
        raw: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the parameters used.
        #[arg(long)]
        params_out: Option<PathBuf>,
    },
    /// Report size, rule count, components, left recursion and lr-depth.
    Stats {
        grammar: PathBuf,
        /// Also run the transform, trim, binarize, nullary-removal pipeline
        /// for SLCT and GLCT.
        #[arg(long, value_enum)]
        pipeline: Option<Pipeline>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Remove left recursion from a unary-free, nullary-free grammar.
    EliminateLeftRecursion {
        grammar: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        params_out: Option<PathBuf>,
    },
    /// Apply preprocessing steps in the order given.
    Preprocess {
        grammar: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', required = true)]
        steps: Vec<Step>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the total weight of empty derivations of every symbol.
    NullWeights {
        grammar: PathBuf,
        #[arg(long, value_enum, default_value_t = NullMethod::Auto)]
        method: NullMethod,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Estimate a real-weighted grammar from a bracketed treebank.
    ExtractGrammar {
        #[arg(long)]
        treebank: PathBuf,
        /// Strip function tags and indices from labels.
        #[arg(long)]
        strip: bool,
        /// Label delimiters used by --strip (repeatable).
        #[arg(long = "delimiter")]
        delimiters: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Map a derivation between a grammar and its transformation.
    MapDerivation {
        grammar: PathBuf,
        #[arg(long)]
        params: PathBuf,
        /// Derivation file, `-` for stdin.
        #[arg(default_value = "-")]
        derivation: PathBuf,
        #[arg(long, value_enum, default_value_t = Direction::Phi)]
        direction: Direction,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare string weights of two grammars up to a length.
    CheckEquivalence {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        /// Skip the empty string.
        #[arg(long)]
        nonempty: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SemiringArg {
    Boolean,
    Real,
    Viterbi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Glct,
    Filtered,
    Speculate,
    Lct,
    Slct,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Recipe {
    LeftRecursion,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Pipeline {
    Table1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Jsonl,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Step {
    Trim,
    Unary,
    Nullary,
    Binarize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NullMethod {
    Auto,
    FixedPoint,
    GlctFast,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Direction {
    /// Source derivation to GLCT derivation.
    Phi,
    /// GLCT derivation to source derivation.
    PhiInverse,
    SpecToGlct,
    GlctToSpec,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: io::Error },
    Domain(leftcorner::Error),
    NotEquivalent(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Domain(e) => e.code(),
            CliError::NotEquivalent(_) => "not-equivalent",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::NotEquivalent(m) => f.write_str(m),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<leftcorner::Error> for CliError {
    fn from(e: leftcorner::Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err(path))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io_err(path))
    }
}

/// Write to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
fn write_output(path: Option<&Path>, text: &str) -> CliResult {
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        return out
            .write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(io_err(Path::new("<stdout>")));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(text.as_bytes()).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

fn semiring_for(flag: Option<SemiringArg>, text: &str) -> CliResult<SemiringKind> {
    if let Some(flag) = flag {
        return Ok(match flag {
            SemiringArg::Boolean => SemiringKind::Boolean,
            SemiringArg::Real => SemiringKind::Real,
            SemiringArg::Viterbi => SemiringKind::Viterbi,
        });
    }
    if let Some(kind) = peek_semiring(text)? {
        return Ok(kind);
    }
    match std::env::var(SEMIRING_ENV) {
        Ok(name) => name
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEMIRING_ENV}: unknown semiring `{name}`"))),
        Err(_) => Ok(SemiringKind::Real),
    }
}

macro_rules! dispatch {
    ($kind:expr, $f:ident($($arg:expr),*)) => {
        match $kind {
            SemiringKind::Boolean => $f::<Boolean>($($arg),*),
            SemiringKind::Real => $f::<Real>($($arg),*),
            SemiringKind::Viterbi => $f::<Viterbi>($($arg),*),
        }
    };
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> CliResult {
    let flag = cli.semiring;
    match cli.command {
        Command::Transform {
            grammar,
            kind,
            params,
            recipe,
            raw,
            output,
            params_out,
        } => {
            let text = read_input(&grammar)?;
            let params_text = params.as_deref().map(read_input).transpose()?;
            let args = TransformArgs {
                kind,
                params: params_text,
                recipe,
                raw,
            };
            let (out, used) = dispatch!(semiring_for(flag, &text)?, cmd_transform(&text, &args))?;
            if let (Some(path), Some(used)) = (params_out, used) {
                write_output(Some(&path), &used)?;
            }
            write_output(output.as_deref(), &out)
        }
        Command::Stats {
            grammar,
            pipeline,
            format,
        } => {
            let text = read_input(&grammar)?;
            let out = dispatch!(semiring_for(flag, &text)?, cmd_stats(&text, pipeline.is_some(), format))?;
            write_output(None, &out)
        }
        Command::EliminateLeftRecursion {
            grammar,
            output,
            params_out,
        } => {
            let text = read_input(&grammar)?;
            let (out, used) = dispatch!(semiring_for(flag, &text)?, cmd_eliminate(&text))?;
            if let Some(path) = params_out {
                write_output(Some(&path), &used)?;
            }
            write_output(output.as_deref(), &out)
        }
        Command::Preprocess { grammar, steps, output } => {
            let text = read_input(&grammar)?;
            let out = dispatch!(semiring_for(flag, &text)?, cmd_preprocess(&text, &steps))?;
            write_output(output.as_deref(), &out)
        }
        Command::NullWeights {
            grammar,
            method,
            max_iters,
            tolerance,
        } => {
            let text = read_input(&grammar)?;
            let out = dispatch!(
                semiring_for(flag, &text)?,
                cmd_null_weights(&text, method, max_iters, tolerance)
            )?;
            write_output(None, &out)
        }
        Command::ExtractGrammar {
            treebank,
            strip,
            delimiters,
            output,
        } => {
            let text = read_input(&treebank)?;
            let tb = parse_treebank(&text)?;
            let delimiters = if delimiters.is_empty() {
                DEFAULT_DELIMITERS.iter().map(|d| d.to_string()).collect()
            } else {
                delimiters
            };
            let extraction = extract_grammar(&tb, &ExtractOptions { strip, delimiters })?;
            if extraction.start_tied {
                eprintln!("warning: several root labels tie; using {}", extraction.grammar.start());
            }
            write_output(output.as_deref(), &write_wcfg(&extraction.grammar))
        }
        Command::MapDerivation {
            grammar,
            params,
            derivation,
            direction,
            output,
        } => {
            let text = read_input(&grammar)?;
            let params = ParamsFile::parse(&read_input(&params)?)?;
            let tree = read_input(&derivation)?;
            let out = dispatch!(semiring_for(flag, &text)?, cmd_map(&text, &params, &tree, direction))?;
            write_output(output.as_deref(), &out)
        }
        Command::CheckEquivalence {
            left,
            right,
            max_len,
            nonempty,
        } => {
            let (a, b) = (read_input(&left)?, read_input(&right)?);
            let kind = semiring_for(flag, &a)?;
            let options = if nonempty {
                EquivalenceOptions::nonempty_up_to(max_len)
            } else {
                EquivalenceOptions::up_to(max_len)
            };
            let (equivalent, report) = dispatch!(kind, cmd_check(&a, &b, options))?;
            if equivalent {
                write_output(None, &format!("{report}\n"))
            } else {
                Err(CliError::NotEquivalent(report))
            }
        }
    }
}

struct TransformArgs {
    kind: Kind,
    params: Option<String>,
    recipe: Option<Recipe>,
    raw: bool,
}

/// Returns the output grammar and, when parameters were used, their JSON.
fn cmd_transform<W: Semiring>(text: &str, args: &TransformArgs) -> CliResult<(String, Option<String>)> {
    let g: Grammar<W> = read_wcfg(text)?;
    let (out, params) = if args.kind == Kind::Lct {
        if args.params.is_some() || args.recipe.is_some() {
            return Err(CliError::Usage("--kind lct takes no --params or --recipe".into()));
        }
        let (out, params) = lct(&g)?;
        (out, params)
    } else {
        let params = match (&args.params, args.recipe) {
            (Some(p), _) => ParamsFile::parse(p)?.resolve(&g)?,
            (None, Some(Recipe::LeftRecursion)) => {
                let p = left_recursive_rules(&g);
                let x = bottoms(&g, &p);
                TransformParams::new(&g, p, x)?
            }
            (None, None) => {
                return Err(CliError::Usage(
                    format!("--kind {:?} needs --params or --recipe", args.kind).to_lowercase(),
                ))
            }
        };
        let params = if args.kind == Kind::Slct {
            slct_params(&g, params.p().iter().copied())?
        } else {
            params
        };
        let out = match args.kind {
            Kind::Glct | Kind::Slct => glct(&g, &params)?,
            Kind::Filtered => glct_filtered(&g, &params)?,
            Kind::Speculate => speculate(&g, &params)?,
            Kind::Lct => unreachable!(),
        };
        (out, params)
    };
    let out = if args.raw { out } else { trim(&out) };
    Ok((write_wcfg(&out), Some(ParamsFile::from_params(&params).to_json())))
}

fn cmd_eliminate<W: Semiring>(text: &str) -> CliResult<(String, String)> {
    let g: Grammar<W> = read_wcfg(text)?;
    let (out, params) = eliminate_left_recursion(&g)?;
    Ok((write_wcfg(&out), ParamsFile::from_params(&params).to_json()))
}

fn stats_json(name: &str, s: &GrammarStats) -> serde_json::Value {
    json!({
        "grammar": name,
        "size": s.size,
        "rules": s.rules,
        "components": s.components,
        "left_recursive_rules": s.left_recursive_rules,
        "lr_depth": s.lr_depth.to_string(),
        "acyclic": s.acyclic,
    })
}

fn cmd_stats<W: Semiring>(text: &str, pipeline: bool, format: Format) -> CliResult<String> {
    let g: Grammar<W> = read_wcfg(text)?;
    let mut rows = vec![("input".to_string(), stats(&g))];
    if pipeline {
        for method in [Method::Slct, Method::Glct] {
            let s = run_stages(&g, method)?;
            rows.push((format!("{method} raw"), stats(&s.raw)));
            rows.push((format!("{method} +trim"), stats(&s.trimmed)));
            rows.push((format!("{method} -eps"), stats(&s.nullary_free)));
        }
    }
    let mut out = String::new();
    match format {
        Format::Jsonl => {
            for (name, s) in &rows {
                let _ = writeln!(out, "{}", stats_json(name, s));
            }
        }
        Format::Human => {
            let _ = writeln!(
                out,
                "{:<12} {:>8} {:>8} {:>6} {:>8} {:>10} {:>8}",
                "grammar", "size", "rules", "C", "lr-rules", "lr-depth", "acyclic"
            );
            for (name, s) in &rows {
                let _ = writeln!(
                    out,
                    "{:<12} {:>8} {:>8} {:>6} {:>8} {:>10} {:>8}",
                    name,
                    s.size,
                    s.rules,
                    s.components,
                    s.left_recursive_rules,
                    s.lr_depth.to_string(),
                    if s.acyclic { "yes" } else { "no" }
                );
            }
        }
    }
    Ok(out)
}

fn cmd_preprocess<W: Semiring>(text: &str, steps: &[Step]) -> CliResult<String> {
    let mut g: Grammar<W> = read_wcfg(text)?;
    let mut start_null = None;
    for step in steps {
        g = match step {
            Step::Trim => trim(&g),
            Step::Unary => eliminate_unary_cycles(&g)?,
            Step::Binarize => binarize(&g),
            Step::Nullary => {
                let free = eliminate_nullary(&g)?;
                start_null = Some(free.start_null_weight);
                free.grammar
            }
        };
    }
    let mut out = String::new();
    if let Some(w) = start_null.filter(|w| !w.is_zero()) {
        let _ = writeln!(out, "# weight of the empty string, dropped by nullary removal: {w}");
    }
    out.push_str(&write_wcfg(&g));
    Ok(out)
}

fn cmd_null_weights<W: Semiring>(text: &str, method: NullMethod, max_iters: usize, tol: f64) -> CliResult<String> {
    let g: Grammar<W> = read_wcfg(text)?;
    let weights = match method {
        NullMethod::Auto => leftcorner::preprocess::null_weights(&g)?,
        NullMethod::FixedPoint => null_weights_fixed_point(&g, max_iters, tol)?,
        NullMethod::GlctFast => null_weights_glct(&g)?,
    };
    let show_ids = transform_ids(&g).len() > 1;
    let mut out = String::new();
    for (s, w) in &weights {
        let _ = writeln!(out, "{}\t{w}", symbol_to_string(s, show_ids));
    }
    Ok(out)
}

fn cmd_map<W: Semiring>(text: &str, file: &ParamsFile, tree: &str, direction: Direction) -> CliResult<String> {
    let g: Grammar<W> = read_wcfg(text)?;
    let params = file.resolve(&g)?;
    let mapper = Mapper::new(&g, &params)?;
    let lc = || glct(&g, &params);
    let (source, target) = match direction {
        Direction::Phi => (g.clone(), lc()?),
        Direction::PhiInverse => (lc()?, g.clone()),
        Direction::SpecToGlct => (speculate(&g, &params)?, lc()?),
        Direction::GlctToSpec => (lc()?, speculate(&g, &params)?),
    };
    let t = read_derivation(tree, &source)?;
    let image = match direction {
        Direction::Phi => mapper.phi(&t)?,
        Direction::PhiInverse => mapper.phi_inverse(&t)?,
        Direction::SpecToGlct => mapper.spec_to_glct(&t)?,
        Direction::GlctToSpec => mapper.glct_to_spec(&t)?,
    };
    let show_ids = transform_ids(&target).len() > 1;
    Ok(format!("{}\n", derivation_to_string(&image, show_ids)))
}

fn cmd_check<W: Semiring>(a: &str, b: &str, options: EquivalenceOptions) -> CliResult<(bool, String)> {
    let left: Grammar<W> = read_wcfg(a)?;
    let right: Grammar<W> = read_wcfg(b)?;
    let report = equivalence_check(&left, &right, options)?;
    Ok((report.is_equivalent(), report.to_string()))
}
