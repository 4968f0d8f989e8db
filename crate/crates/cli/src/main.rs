use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use fmf_core::eigsys::{synthesize, PrincipalRestriction, SynthOptions};
use fmf_core::format::{self, EigensystemsDoc, FormalSumDoc, MatrixSetDoc, RestrictionDoc, SCHEMA};
use fmf_core::heckemat::{matrix_set_for, verify_sublattice_action};
use fmf_core::ideals::psi;
use fmf_core::msym::P1;
use fmf_core::suite::{run_fixture, Fixture};
use fmf_core::{ClassGroup, Error, Field, FormalSum, Ideal, Level, ModPoint};

#[derive(Parser)]
#[command(name = "fmf", version, about = "Modular points and Hecke operators over imaginary quadratic fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(clap::Args)]
struct FieldArg {
    /// The field is Q(sqrt(-d)).
    #[arg(long)]
    d: i64,
}

#[derive(clap::Args)]
struct OutArg {
    /// Write the document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Class group structure and standard representatives.
    Classgroup {
        #[command(flatten)]
        field: FieldArg,
        /// Representatives are chosen coprime to this ideal.
        #[arg(long)]
        level: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// M-symbols of the projective line mod the level, with lifts.
    P1 {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        level: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Explicit matrices for a principal operator.
    HeckeMatrices {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        level: String,
        #[arg(long)]
        op: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Apply an operator to a modular point or a formal sum.
    Apply {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        level: String,
        #[arg(long)]
        op: String,
        /// A point literal, `std0:i,j` / `std1:i,j` for a standard point,
        /// or a formal sum `[{c, P}, ...]`.
        #[arg(long, required_unless_present = "input", conflicts_with = "input")]
        point: Option<String>,
        /// A formal-sum document.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run a check suite: relations, matrices, eigen or all.
    Verify {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        level: String,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Prime-norm bound for the eigen suite.
        #[arg(long, default_value_t = 60)]
        bound: i128,
        #[command(flatten)]
        out: OutArg,
    },
    /// Recover all eigensystems from a principal restriction document.
    Recover {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistent(_) => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn emit<T: Serialize>(doc: &T, out: &OutArg) -> Result<(), Failure> {
    let text = format::to_json(doc);
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn field_of(f: &FieldArg) -> Result<Field, Failure> {
    Ok(Field::new(f.d)?)
}

fn level_of(field: Field, s: &str) -> Result<Ideal, Failure> {
    let n = format::parse_ideal(field, s)?;
    if !n.is_integral() {
        return Err(Failure::Usage(format!("level {n} is not integral")));
    }
    Ok(n)
}

#[derive(Serialize)]
struct ClassGroupDoc {
    schema: u32,
    kind: &'static str,
    d: i64,
    h: usize,
    invariants: Vec<i128>,
    level: String,
    p: Vec<String>,
    q: Vec<String>,
}

#[derive(Serialize)]
struct SymbolDoc {
    symbol: String,
    lift: String,
}

#[derive(Serialize)]
struct P1Doc {
    schema: u32,
    kind: &'static str,
    d: i64,
    level: String,
    count: usize,
    psi: i128,
    symbols: Vec<SymbolDoc>,
}

#[derive(Serialize)]
struct CheckDoc {
    name: String,
    passed: bool,
}

#[derive(Serialize)]
struct VerifyDoc {
    schema: u32,
    kind: &'static str,
    d: i64,
    level: String,
    suite: String,
    passed: bool,
    checks: Vec<CheckDoc>,
}

fn classgroup(field: &FieldArg, level: &Option<String>, out: &OutArg) -> Outcome {
    let f = field_of(field)?;
    let cg = ClassGroup::new(f);
    let n = match level {
        Some(s) => level_of(f, s)?,
        None => Ideal::unit(f),
    };
    let reps = cg.standard_reps(&n);
    emit(
        &ClassGroupDoc {
            schema: SCHEMA,
            kind: "classgroup",
            d: f.d(),
            h: cg.order(),
            invariants: cg.invariants().to_vec(),
            level: n.to_string(),
            p: reps.p.iter().map(|i| i.to_string()).collect(),
            q: reps.q.iter().map(|i| i.to_string()).collect(),
        },
        out,
    )?;
    Ok(true)
}

fn p1(field: &FieldArg, level: &str, out: &OutArg) -> Outcome {
    let f = field_of(field)?;
    let n = level_of(f, level)?;
    let p1 = P1::new(&n)?;
    let mut ok = p1.len() as i128 == psi(&n);
    let mut symbols = Vec::new();
    for s in p1.symbols() {
        let lift = p1.lift_to_sl2(s)?;
        ok &= lift.det() == f.one() && p1.symbol_of(&lift)? == *s;
        symbols.push(SymbolDoc { symbol: s.to_string(), lift: lift.to_string() });
    }
    emit(
        &P1Doc { schema: SCHEMA, kind: "p1", d: f.d(), level: n.to_string(), count: p1.len(), psi: psi(&n), symbols },
        out,
    )?;
    Ok(ok)
}

fn hecke_matrices(field: &FieldArg, level: &str, op: &str, out: &OutArg) -> Outcome {
    let f = field_of(field)?;
    let n = level_of(f, level)?;
    let op = format::parse_op(f, op)?;
    let cg = Arc::new(ClassGroup::new(f));
    let set = matrix_set_for(&cg, &op, &n)?;
    let report = verify_sublattice_action(&set, &Level::new(cg, &n)?)?;
    emit(&MatrixSetDoc::from_set(&set), out)?;
    if !report.passed() {
        eprintln!("matrix set failed verification: {:?}", report.messages);
    }
    Ok(report.passed())
}

fn point_of(level: &Level, s: &str) -> Result<ModPoint, Failure> {
    let std = |rest: &str| -> Result<(usize, usize), Failure> {
        let (i, j) = rest.split_once(',').ok_or_else(|| Failure::Usage(format!("expected i,j in '{s}'")))?;
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| Failure::Usage(format!("bad index in '{s}'")));
        let (i, j) = (parse(i)?, parse(j)?);
        if i >= level.reps().p.len() || j >= level.reps().q.len() {
            return Err(Failure::Usage(format!("no standard point {i},{j}")));
        }
        Ok((i, j))
    };
    let p = if let Some(rest) = s.strip_prefix("std0:") {
        let (i, j) = std(rest)?;
        level.standard_point0(i, j)
    } else if let Some(rest) = s.strip_prefix("std1:") {
        let (i, j) = std(rest)?;
        level.standard_point1(i, j)
    } else {
        format::parse_point(level.field(), s)?
    };
    p.check(level.ideal())
        .map_err(|e| Failure::Usage(format!("point is not valid at level {}: {e}", level.ideal())))?;
    Ok(p)
}

fn apply(
    field: &FieldArg,
    level: &str,
    op: &str,
    point: &Option<String>,
    input: &Option<PathBuf>,
    out: &OutArg,
) -> Outcome {
    let f = field_of(field)?;
    let n = level_of(f, level)?;
    let op = format::parse_op(f, op)?;
    let lv = Level::new(Arc::new(ClassGroup::new(f)), &n)?;
    let v = match (point, input) {
        (Some(s), _) if s.trim_start().starts_with('[') => format::parse_formal_sum(&n, s)?,
        (Some(s), _) => FormalSum::point(&n, point_of(&lv, s)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let doc: FormalSumDoc = format::from_json(&text)?;
            if doc.d != f.d() {
                return Err(Failure::Usage(format!("document is over d={}, not d={}", doc.d, f.d())));
            }
            let v = doc.sum()?;
            if v.level() != &n {
                return Err(Failure::Usage(format!("document level {} differs from --level", v.level())));
            }
            v
        }
        (None, None) => return Err(Failure::Usage("need --point or --in".into())),
    };
    if !v.all_valid() {
        return Err(Failure::Usage(format!("formal sum has points that are not valid at level {n}")));
    }
    let image = op.apply(&v)?;
    emit(&FormalSumDoc::from_sum(&image), out)?;
    Ok(image.all_valid())
}

fn eigen_checks(f: Field, n: &Ideal, seed: u64, bound: i128) -> Result<Vec<CheckDoc>, Failure> {
    let cg = Arc::new(ClassGroup::new(f));
    let mut out = Vec::new();
    for (k, force) in [(0, false), (1, true)] {
        let lam = synthesize(seed + k, cg.clone(), *n, bound, SynthOptions { force_inner_twist: force });
        let r = lam.restrict_to_principal().with_witnesses(lam.witnesses());
        let rec = r.recover()?;
        let tag = if force { "self-twist" } else { "generic" };
        out.push(CheckDoc { name: format!("{tag} system is valid"), passed: lam.validate() });
        out.push(CheckDoc { name: format!("{tag} system recovered"), passed: rec.contains(&lam) });
        out.push(CheckDoc { name: format!("{tag} recovery is the twist orbit"), passed: rec == lam.twist_orbit() });
    }
    Ok(out)
}

fn verify(field: &FieldArg, level: &str, suite: &str, seed: u64, bound: i128, out: &OutArg) -> Outcome {
    let f = field_of(field)?;
    let n = level_of(f, level)?;
    if n.is_unit_ideal() {
        return Err(Failure::Usage("verify needs a proper level".into()));
    }
    let want = |s: &str| suite == "all" || suite == s;
    if !["all", "relations", "matrices", "eigen"].contains(&suite) {
        return Err(Failure::Usage(format!("unknown suite '{suite}'")));
    }
    let mut checks = Vec::new();
    if want("relations") {
        let fx = Fixture::new("cli", f, &n, seed)?;
        checks.extend(run_fixture(&fx)?.into_iter().map(|c| CheckDoc { name: c.name, passed: c.passed }));
    }
    if want("matrices") {
        let cg = Arc::new(ClassGroup::new(f));
        let lv = Level::new(cg.clone(), &n)?;
        for p in fmf_core::ideals::primes_up_to_norm(f, 13) {
            if !p.is_coprime(&n) || !cg.is_principal(&p) {
                continue;
            }
            let op = fmf_core::heckeops::Op::TaDual(p);
            let set = matrix_set_for(&cg, &op, &n)?;
            let report = verify_sublattice_action(&set, &lv)?;
            let lhs = set.act(&lv, &lv.principal_point0())?;
            let rhs = op.apply_with(
                &FormalSum::point(&n, lv.principal_point0()),
                fmf_core::heckeops::Normalization::Unscaled,
            )?;
            checks.push(CheckDoc { name: format!("matrices for {op} act on sublattices"), passed: report.passed() });
            checks.push(CheckDoc { name: format!("matrices for {op} match the operator"), passed: lhs == rhs });
        }
    }
    if want("eigen") {
        checks.extend(eigen_checks(f, &n, seed, bound)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    emit(
        &VerifyDoc {
            schema: SCHEMA,
            kind: "verify",
            d: f.d(),
            level: n.to_string(),
            suite: suite.into(),
            passed,
            checks,
        },
        out,
    )?;
    Ok(passed)
}

fn recover(input: &PathBuf, out: &OutArg) -> Outcome {
    let text = fs::read_to_string(input).map_err(|e| Failure::Usage(format!("{}: {e}", input.display())))?;
    let doc: RestrictionDoc = format::from_json(&text)?;
    let cg = Arc::new(ClassGroup::new(Field::new(doc.d)?));
    let r: PrincipalRestriction = doc.restriction(cg)?;
    let systems = r.recover()?;
    emit(&EigensystemsDoc::from_systems(&systems)?, out)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Command::Classgroup { field, level, out } => classgroup(field, level, out),
        Command::P1 { field, level, out } => p1(field, level, out),
        Command::HeckeMatrices { field, level, op, out } => hecke_matrices(field, level, op, out),
        Command::Apply { field, level, op, point, input, out } => apply(field, level, op, point, input, out),
        Command::Verify { field, level, suite, seed, bound, out } => verify(field, level, suite, *seed, *bound, out),
        Command::Recover { input, out } => recover(input, out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
