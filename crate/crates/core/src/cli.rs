//! Command-line front end.
//!
//! Every command writes one JSON envelope to stdout, including on failure,
//! and returns a process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O, parse or structural error |
//! | 2 | fan failed validation |
//! | 3 | class not ample |
//! | 4 | unsupported dimension |
//!
//! Fan files are JSON, `{"name": str?, "dim": int, "rays": [[int]], "cones": [[int]]}`
//! with 1-based ray indices in cones. Polynomial files use the term syntax of
//! [`crate::cox`].

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cox::{default_coefficient_pool, graded_basis, random_section, CoxError, CoxPolynomial};
use crate::divisor::{anticanonical_class, is_ample_class, is_fano, DivisorClass};
use crate::fan::{validate_fan, Fan, FanError, ToricVariety, ValidationReport};
use crate::jacobian::{Jacobian, JacobianError};
use crate::quasismooth::{
    singular_witness_search, QuasiSmoothError, SearchMode, SearchOptions, Verdict, DEFAULT_BUDGET,
    DEFAULT_PRIME,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable capping the worker thread count; 0 or unset means automatic.
pub const THREADS_ENV: &str = "TORIC_NL_THREADS";

pub const VERY_GENERAL_CAVEAT: &str = "very general, not this member: the predicted Picard number holds for a very general hypersurface in the class, not necessarily for the given polynomial";

const QUASISMOOTH_WARNING: &str =
    "quasi-smoothness is checked heuristically by a finite-field search; absence of a witness is not a proof";

#[derive(Parser, Debug)]
#[command(
    name = "toric-nl",
    version,
    about = "Toric hypersurface Hodge and Noether-Lefschetz toolkit"
)]
pub struct Cli {
    /// Emit compact JSON (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    pub json: bool,
    /// Render the envelope as indented text.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fan validation, class group and Picard number.
    Fan {
        #[arg(value_enum)]
        action: FanAction,
        fan: PathBuf,
    },
    /// Graded pieces of the Cox ring.
    Cox {
        #[arg(value_enum)]
        action: CoxAction,
        fan: PathBuf,
        #[command(flatten)]
        class: ClassArgs,
        /// Seed for `random`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the polynomial produced by `random` to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Jacobian ring dimensions and primitive Hodge numbers.
    Hodge { fan: PathBuf, poly: PathBuf },
    /// Quasi-smoothness falsifier followed by the Noether-Lefschetz check.
    NlCheck {
        fan: PathBuf,
        poly: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PRIME)]
        prime: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Seed for the randomized fallback search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FanAction {
    Validate,
    Classgroup,
    Picard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CoxAction {
    Basis,
    Random,
}

#[derive(Args, Debug)]
pub struct ClassArgs {
    /// Free part of the class, comma separated.
    #[arg(long = "class", allow_hyphen_values = true)]
    pub free: String,
    /// Torsion residues, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub torsion: Option<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Structure(String),
    #[error("fan failed validation")]
    Validation(Box<ValidationReport>),
    #[error("class {0} is not ample")]
    NotAmple(DivisorClass),
    #[error("unsupported dimension {0}; this command needs dimension 3")]
    UnsupportedDimension(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Structure(_) => 1,
            CliError::Validation(_) => 2,
            CliError::NotAmple(_) => 3,
            CliError::UnsupportedDimension(_) => 4,
        }
    }

    fn to_json(&self) -> Value {
        let kind = match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Structure(_) => "structure",
            CliError::Validation(_) => "validation",
            CliError::NotAmple(_) => "not_ample",
            CliError::UnsupportedDimension(_) => "unsupported_dimension",
        };
        let mut v = json!({ "kind": kind, "message": self.to_string() });
        match self {
            CliError::Parse { line, column, .. } => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            CliError::Validation(report) => v["report"] = report_json(report),
            CliError::NotAmple(c) => v["class"] = json!(c),
            CliError::UnsupportedDimension(d) => v["dim"] = json!(d),
            _ => {}
        }
        v
    }
}

impl From<FanError> for CliError {
    fn from(e: FanError) -> Self {
        match e {
            FanError::Invalid(r) => CliError::Validation(r),
            other => CliError::Structure(other.to_string()),
        }
    }
}

impl From<JacobianError> for CliError {
    fn from(e: JacobianError) -> Self {
        match e {
            JacobianError::NotAmple(c) => CliError::NotAmple(c),
            JacobianError::UnsupportedDimension(d) => CliError::UnsupportedDimension(d),
            other => CliError::Structure(other.to_string()),
        }
    }
}

impl From<QuasiSmoothError> for CliError {
    fn from(e: QuasiSmoothError) -> Self {
        CliError::Structure(e.to_string())
    }
}

#[derive(Debug, Serialize)]
pub struct ResultEnvelope {
    pub command: String,
    /// SHA-256 over the command, its options and the bytes of every input file.
    pub inputs_digest: String,
    pub ok: bool,
    pub result: Value,
    pub warnings: Vec<String>,
    pub version: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FanFile {
    name: Option<String>,
    dim: usize,
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
}

/// Hashes the inputs of one invocation.
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new(command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        Inputs { hasher }
    }

    fn field(&mut self, name: &str, bytes: &[u8]) {
        self.hasher.update((name.len() as u64).to_le_bytes());
        self.hasher.update(name.as_bytes());
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    fn read(&mut self, name: &str, path: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.field(name, text.as_bytes());
        Ok(text)
    }

    fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

struct Outcome {
    result: Result<Value, CliError>,
    warnings: Vec<String>,
}

pub fn parse_fan(path: &str, text: &str) -> Result<Fan, CliError> {
    let file: FanFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut cones = Vec::with_capacity(file.cones.len());
    for (k, cone) in file.cones.iter().enumerate() {
        let mut c = Vec::with_capacity(cone.len());
        for &i in cone {
            if i == 0 {
                return Err(CliError::Structure(format!(
                    "cone {} uses ray index 0; indices are 1-based",
                    k + 1
                )));
            }
            c.push(i - 1);
        }
        cones.push(c);
    }
    let fan = Fan::new(file.dim, file.rays, cones)
        .map_err(|e| CliError::Structure(one_based_structural(e)))?;
    Ok(match file.name {
        Some(n) => fan.with_name(n),
        None => fan,
    })
}

fn one_based_structural(e: FanError) -> String {
    match e {
        FanError::RayLength { ray, len, dim } => FanError::RayLength {
            ray: ray + 1,
            len,
            dim,
        }
        .to_string(),
        FanError::IndexOutOfRange { cone, index, rays } => FanError::IndexOutOfRange {
            cone: cone + 1,
            index: index + 1,
            rays,
        }
        .to_string(),
        other => other.to_string(),
    }
}

/// The validation report with ray and cone indices shifted to 1-based.
fn report_json(r: &ValidationReport) -> Value {
    let one = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
    let pairs = |v: &[(usize, usize)]| v.iter().map(|&(a, b)| [a + 1, b + 1]).collect::<Vec<_>>();
    json!({
        "passed": r.passed(),
        "primitive": r.primitive,
        "non_primitive_rays": one(&r.non_primitive_rays),
        "duplicate_rays": pairs(&r.duplicate_rays),
        "unused_rays": one(&r.unused_rays),
        "simplicial": r.simplicial,
        "non_simplicial_cones": one(&r.non_simplicial_cones),
        "facet_pairing": r.facet_pairing,
        "unmatched_facets": r.unmatched_facets.iter().map(|f| one(f)).collect::<Vec<_>>(),
        "proper_intersection": r.proper_intersection,
        "improper_pairs": pairs(&r.improper_pairs),
    })
}

fn load_variety(inputs: &mut Inputs, path: &Path) -> Result<ToricVariety, CliError> {
    let text = inputs.read("fan", path)?;
    let fan = parse_fan(&path.display().to_string(), &text)?;
    Ok(ToricVariety::new(fan)?)
}

fn load_poly(
    inputs: &mut Inputs,
    variety: &ToricVariety,
    path: &Path,
) -> Result<CoxPolynomial, CliError> {
    let text = inputs.read("poly", path)?;
    CoxPolynomial::parse(variety, &text).map_err(|e| match e {
        CoxError::Parse(p) => CliError::Parse {
            path: path.display().to_string(),
            line: p.line,
            column: p.column,
            message: p.message,
        },
        other => CliError::Structure(other.to_string()),
    })
}

fn parse_ints(flag: &str, s: &str) -> Result<Vec<i64>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim().parse::<i64>().map_err(|_| {
                CliError::Structure(format!("--{flag}: `{}` is not an integer", t.trim()))
            })
        })
        .collect()
}

fn parse_class(variety: &ToricVariety, args: &ClassArgs) -> Result<DivisorClass, CliError> {
    let cl = variety.class_group();
    let free = parse_ints("class", &args.free)?;
    let torsion = match &args.torsion {
        Some(t) => parse_ints("torsion", t)?,
        None => vec![0; cl.torsion.len()],
    };
    if free.len() != cl.free_rank || torsion.len() != cl.torsion.len() {
        return Err(CliError::Structure(format!(
            "class needs {} free entries and {} torsion residues, got {} and {}",
            cl.free_rank,
            cl.torsion.len(),
            free.len(),
            torsion.len()
        )));
    }
    Ok(cl.normalize(DivisorClass { free, torsion }))
}

/// Checks ampleness of the class of `f`; warns if it is only Q-Cartier.
fn require_ample(
    variety: &ToricVariety,
    f: &CoxPolynomial,
    warnings: &mut Vec<String>,
) -> Result<Value, CliError> {
    let beta = f.class();
    let verdict = is_ample_class(variety, beta).ok_or_else(|| CliError::NotAmple(beta.clone()))?;
    if !verdict.ample {
        return Err(CliError::NotAmple(beta.clone()));
    }
    if !verdict.cartier {
        warnings.push(format!(
            "class {beta} is ample but not Cartier; dimension counts use it as a Q-Cartier class"
        ));
    }
    Ok(json!({ "ample": verdict.ample, "cartier": verdict.cartier }))
}

fn cmd_fan(inputs: &mut Inputs, action: FanAction, path: &Path) -> Result<Value, CliError> {
    let text = inputs.read("fan", path)?;
    let fan = parse_fan(&path.display().to_string(), &text)?;
    let report = validate_fan(&fan);
    if !report.passed() {
        return Err(CliError::Validation(Box::new(report)));
    }
    let variety = ToricVariety::new(fan)?;
    let cl = variety.class_group();
    Ok(match action {
        FanAction::Validate => json!({ "valid": true, "report": report_json(&report) }),
        FanAction::Classgroup => json!({
            "free_rank": cl.free_rank,
            "torsion": cl.torsion,
            "degrees": cl.free_degrees,
            "torsion_degrees": cl.torsion_degrees,
            "anticanonical": anticanonical_class(&variety),
        }),
        FanAction::Picard => json!({
            "picard": variety.picard_number(),
            "rays": variety.num_rays(),
            "dim": variety.dim(),
        }),
    })
}

fn cmd_cox(
    inputs: &mut Inputs,
    action: CoxAction,
    path: &Path,
    class: &ClassArgs,
    seed: u64,
    out: Option<&Path>,
) -> Result<Value, CliError> {
    let variety = load_variety(inputs, path)?;
    let beta = parse_class(&variety, class)?;
    match action {
        CoxAction::Basis => {
            let basis =
                graded_basis(&variety, &beta).map_err(|e| CliError::Structure(e.to_string()))?;
            let monomials: Vec<String> = basis.monomials.iter().map(ToString::to_string).collect();
            Ok(json!({ "class": beta, "dimension": monomials.len(), "monomials": monomials }))
        }
        CoxAction::Random => {
            let f = random_section(&variety, &beta, seed, &default_coefficient_pool())
                .map_err(|e| CliError::Structure(e.to_string()))?;
            let text = f.to_string();
            if let Some(out) = out {
                std::fs::write(out, format!("{text}\n")).map_err(|source| CliError::Io {
                    path: out.display().to_string(),
                    source,
                })?;
            }
            Ok(json!({ "class": beta, "seed": seed, "terms": f.num_terms(), "polynomial": text }))
        }
    }
}

fn cmd_hodge(
    inputs: &mut Inputs,
    fan: &Path,
    poly: &Path,
    warnings: &mut Vec<String>,
) -> Result<Value, CliError> {
    let variety = load_variety(inputs, fan)?;
    let f = load_poly(inputs, &variety, poly)?;
    let ampleness = require_ample(&variety, &f, warnings)?;
    let jac = Jacobian::new(&variety, &f)?;
    let at_beta = jac.dims(f.class())?;
    let hodge = jac.primitive_hodge_dims()?;
    let beta0 = anticanonical_class(&variety);
    let k3 = if variety.dim() == 3 && *f.class() == beta0 && is_fano(&variety) {
        Some(jac.k3_hodge_summary()?)
    } else {
        None
    };
    Ok(json!({
        "class": f.class(),
        "anticanonical": beta0,
        "ampleness": ampleness,
        "jacobian_at_class": at_beta,
        "hodge": hodge,
        "k3": k3,
    }))
}

fn cmd_nl_check(
    inputs: &mut Inputs,
    fan: &Path,
    poly: &Path,
    options: SearchOptions,
    warnings: &mut Vec<String>,
) -> Result<Value, CliError> {
    let variety = load_variety(inputs, fan)?;
    let f = load_poly(inputs, &variety, poly)?;
    if variety.dim() != 3 {
        return Err(CliError::UnsupportedDimension(variety.dim()));
    }
    require_ample(&variety, &f, warnings)?;
    let witness = singular_witness_search(&variety, &f, &options)?;
    warnings.push(QUASISMOOTH_WARNING.to_string());
    let verdict = match witness.verdict {
        Verdict::Found => {
            warnings.push(format!(
                "singular point found modulo {}: the input may not be quasi-smooth",
                options.prime
            ));
            "input may be singular"
        }
        Verdict::NoneFound => "no singular point found",
    };
    let report = Jacobian::new(&variety, &f)?.nl_check()?;
    Ok(json!({
        "class": f.class(),
        "quasismooth": { "verdict": verdict, "search": witness },
        "nl": report,
        "caveat": VERY_GENERAL_CAVEAT,
    }))
}

fn execute(cli: &Cli) -> (String, String, Outcome) {
    let mut warnings = Vec::new();
    let (name, mut inputs, result) = match &cli.command {
        Command::Fan { action, fan } => {
            let name = format!(
                "fan {}",
                action.to_possible_value().expect("named").get_name()
            );
            let mut inputs = Inputs::new(&name);
            let r = cmd_fan(&mut inputs, *action, fan);
            (name, inputs, r)
        }
        Command::Cox {
            action,
            fan,
            class,
            seed,
            out,
        } => {
            let name = format!(
                "cox {}",
                action.to_possible_value().expect("named").get_name()
            );
            let mut inputs = Inputs::new(&name);
            inputs.field("class", class.free.as_bytes());
            inputs.field("torsion", class.torsion.as_deref().unwrap_or("").as_bytes());
            if *action == CoxAction::Random {
                inputs.field("seed", seed.to_string().as_bytes());
            }
            let r = cmd_cox(&mut inputs, *action, fan, class, *seed, out.as_deref());
            (name, inputs, r)
        }
        Command::Hodge { fan, poly } => {
            let name = "hodge".to_string();
            let mut inputs = Inputs::new(&name);
            let r = cmd_hodge(&mut inputs, fan, poly, &mut warnings);
            (name, inputs, r)
        }
        Command::NlCheck {
            fan,
            poly,
            prime,
            budget,
            seed,
        } => {
            let name = "nl-check".to_string();
            let mut inputs = Inputs::new(&name);
            inputs.field(
                "options",
                format!("prime={prime};budget={budget};seed={seed}").as_bytes(),
            );
            let options = SearchOptions {
                prime: *prime,
                mode: SearchMode::Exhaustive,
                budget: *budget,
                seed: *seed,
            };
            let r = cmd_nl_check(&mut inputs, fan, poly, options, &mut warnings);
            (name, inputs, r)
        }
    };
    // Input files are hashed as they are read; fold in a marker so a failed
    // read still yields a well-defined digest.
    inputs.field("end", b"");
    (name, inputs.digest(), Outcome { result, warnings })
}

fn configure_threads() {
    let n = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if n > 0 {
        // Fails only if the pool was already built, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Renders a JSON value as indented `key: value` lines.
pub fn render_pretty(value: &Value) -> String {
    fn scalar(v: &Value) -> Option<String> {
        match v {
            Value::Null => Some("-".into()),
            Value::Bool(b) => Some(b.to_string()),
            Value::Number(n) => Some(n.to_string()),
            Value::String(s) => Some(s.clone()),
            Value::Array(a) if a.iter().all(|x| !x.is_object()) => {
                let parts: Option<Vec<String>> = a.iter().map(scalar).collect();
                parts.map(|p| format!("[{}]", p.join(", ")))
            }
            _ => None,
        }
    }
    fn walk(v: &Value, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    match scalar(x) {
                        Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                        None => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            walk(x, indent + 1, out);
                        }
                    }
                }
            }
            Value::Array(items) => {
                for (i, x) in items.iter().enumerate() {
                    match scalar(x) {
                        Some(s) => out.push_str(&format!("{pad}[{i}] {s}\n")),
                        None => {
                            out.push_str(&format!("{pad}[{i}]\n"));
                            walk(x, indent + 1, out);
                        }
                    }
                }
            }
            other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
        }
    }
    let mut out = String::new();
    walk(value, 0, &mut out);
    out
}

/// Parses `args` (including the program name), runs the command and writes
/// the envelope to `out`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(
                if e.use_stderr() {
                    err as &mut dyn Write
                } else {
                    out as &mut dyn Write
                },
                "{}",
                e.render()
            );
            return code;
        }
    };
    configure_threads();
    let (command, inputs_digest, outcome) = execute(&cli);
    let (ok, result, code) = match outcome.result {
        Ok(v) => (true, v, 0),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            (false, json!({ "error": e.to_json() }), e.exit_code())
        }
    };
    let envelope = ResultEnvelope {
        command,
        inputs_digest,
        ok,
        result,
        warnings: outcome.warnings,
        version: VERSION.to_string(),
    };
    let text = if cli.pretty {
        render_pretty(&serde_json::to_value(&envelope).expect("envelope serializes"))
    } else {
        let mut s = serde_json::to_string(&envelope).expect("envelope serializes");
        s.push('\n');
        s
    };
    if out.write_all(text.as_bytes()).is_err() {
        return 1;
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_file_errors_carry_positions() {
        let e = parse_fan("x.fan", "{\n  \"dim\": 2,\n  \"rays\": [[1, 0],, ]\n}").unwrap_err();
        match e {
            CliError::Parse { line, column, .. } => assert_eq!((line, column), (3, 19)),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            parse_fan("x", "{\"dim\":1,\"rays\":[[1],[-1]],\"cones\":[[0]]}")
                .unwrap_err()
                .exit_code(),
            1
        );
        assert!(parse_fan(
            "x",
            "{\"dim\":1,\"rays\":[[1],[-1]],\"cones\":[[1]],\"extra\":0}"
        )
        .is_err());
    }

    #[test]
    fn fan_file_indices_are_one_based() {
        let f = parse_fan(
            "x",
            "{\"name\":\"P1\",\"dim\":1,\"rays\":[[1],[-1]],\"cones\":[[1],[2]]}",
        )
        .unwrap();
        assert_eq!(f.cones, vec![vec![0], vec![1]]);
        assert_eq!(f.name.as_deref(), Some("P1"));
    }

    #[test]
    fn pretty_rendering() {
        let v = json!({"a": 1, "b": {"c": [1, 2], "d": null}, "e": [{"f": true}]});
        assert_eq!(
            render_pretty(&v),
            "a: 1\nb:\n  c: [1, 2]\n  d: -\ne:\n  [0]\n    f: true\n"
        );
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["toric-nl", "fan"], &mut out, &mut err), 1);
        assert_eq!(run(["toric-nl", "--help"], &mut out, &mut err), 0);
    }
}
