use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use multmap::classify::{classify, ClassifyConfig};
use multmap::doc::{
    expr_from_json, factorization_to_json, form_to_json, matrix_from_json, matrix_to_json, parse_field_descriptor,
    parse_json, report_to_json, to_text, verdict_to_json,
};
use multmap::mapexpr::{eval, simplify, MapAtom, MapExpr};
use multmap::oracle::{adjugate, det_power_scalar, plus_identity, MapOracle};
use multmap::slword::{decompose_gl, default_pool, random_gl, random_singular, random_sl, random_unitriangular};
use multmap::verify::{check_equal, check_multiplicative, FuzzConfig};
use multmap::{Error, Field};

const BUILTINS: &[&str] = &["identity", "cofactor", "adjugate", "plus-identity", "det-cubed"];

#[derive(Parser)]
#[command(name = "multmap", version, about = "Evaluate, simplify and classify multiplicative matrix maps")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Sample count for verify, fresh invertible checks for classify.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// rational or quadratic:<d>; used by builtins and gen.
    #[arg(long, global = true, default_value = "rational")]
    field: String,

    /// Dimension for builtin maps.
    #[arg(long, global = true, default_value_t = 3)]
    n: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an expression on a matrix.
    Eval { expr: String, matrix: String },
    /// Rewrite an expression to canonical form.
    Simplify { expr: String },
    /// Classify an expression file or builtin purely through evaluation.
    Classify { map: String },
    /// Factor an invertible matrix as D_1(det) times transvections.
    Decompose { matrix: String },
    /// Check multiplicativity of one map, or equality of two.
    Verify { map: String, other: Option<String> },
    /// Print a random matrix.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Sl,
    Gl,
    Unitriangular,
    Singular,
}

enum CliError {
    Lib(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Lib(e) => match e {
                Error::Parse { .. } | Error::Document(_) | Error::InvalidField(_) | Error::UnregisteredHom(_) => 2,
                Error::DimensionMismatch(_) | Error::FieldMismatch(_) => 3,
                Error::NotMultiplicative(_) | Error::RankLadderViolation(_) => 4,
                Error::VerificationFailed { .. } => 5,
                Error::UnsupportedDimension(_) => 6,
                _ => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Io(m) => m.clone(),
            CliError::Lib(Error::VerificationFailed { counterexample }) => format!(
                "{}; counterexample {}",
                Error::VerificationFailed { counterexample: counterexample.clone() },
                serde_json::to_string(&matrix_to_json(counterexample)).expect("serializable")
            ),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

fn read_doc(path: &str) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
    Ok(parse_json(&text)?)
}

fn read_expr(path: &str) -> Result<MapExpr, CliError> {
    Ok(expr_from_json(&read_doc(path)?)?)
}

fn builtin(name: &str, field: Field, n: usize) -> Result<Box<dyn MapOracle>, CliError> {
    Ok(match name {
        "identity" => Box::new(MapExpr::identity(n, field)),
        "cofactor" => Box::new(MapExpr::atom(n, field, MapAtom::Cof)?),
        "adjugate" => Box::new(adjugate(field, n)),
        "plus-identity" => Box::new(plus_identity(field, n)),
        "det-cubed" => Box::new(det_power_scalar(field, n, n.saturating_sub(1).max(1), 3)),
        _ => unreachable!("checked against BUILTINS"),
    })
}

/// An expression file, or a builtin name when no such file exists.
fn load_map(arg: &str, field: Field, n: usize) -> Result<Box<dyn MapOracle>, CliError> {
    if !Path::new(arg).exists() && BUILTINS.contains(&arg) {
        return builtin(arg, field, n);
    }
    Ok(Box::new(read_expr(arg)?))
}

fn run(cli: &Cli) -> Result<Value, CliError> {
    let field = parse_field_descriptor(&cli.field)?;
    match &cli.command {
        Command::Eval { expr, matrix } => {
            let e = read_expr(expr)?;
            let a = matrix_from_json(&read_doc(matrix)?)?;
            Ok(matrix_to_json(&eval(&e, &a)?))
        }
        Command::Simplify { expr } => Ok(form_to_json(&simplify(&read_expr(expr)?)?)),
        Command::Classify { map } => {
            let o = load_map(map, field, cli.n)?;
            let mut cfg = ClassifyConfig { seed: cli.seed, ..Default::default() };
            if let Some(s) = cli.samples {
                cfg.fresh_invertible = s;
            }
            Ok(report_to_json(&classify(o.as_ref(), &cfg)?))
        }
        Command::Decompose { matrix } => {
            let a = matrix_from_json(&read_doc(matrix)?)?;
            Ok(factorization_to_json(&decompose_gl(&a)?))
        }
        Command::Verify { map, other } => {
            let o = load_map(map, field, cli.n)?;
            let mut cfg = FuzzConfig::new(o.field(), cli.seed);
            if let Some(s) = cli.samples {
                cfg.pair_count = s;
            }
            let verdict = match other {
                None => check_multiplicative(o.as_ref(), &cfg)?,
                Some(p) => check_equal(o.as_ref(), load_map(p, field, cli.n)?.as_ref(), &cfg)?,
            };
            Ok(verdict_to_json(&verdict))
        }
        Command::Gen { kind, n } => {
            if *n == 0 {
                return Err(Error::DimensionMismatch("n must be positive".into()).into());
            }
            let pool = default_pool(field);
            let m = match kind {
                GenKind::Sl => random_sl(*n, 2 * n * n, &pool, cli.seed),
                GenKind::Gl => random_gl(*n, 2 * n * n, &pool, cli.seed),
                GenKind::Unitriangular => random_unitriangular(*n, &pool, cli.seed),
                GenKind::Singular => random_singular(*n, *n, &pool, cli.seed),
            };
            Ok(matrix_to_json(&m))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) => {
            print!("{}", to_text(&v));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
