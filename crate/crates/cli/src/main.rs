//! `cubicmf`: batch driver for the cubic-mf library.

mod report;

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cubic_mf::equiv::{
    constant_equivalence, enumerate_classes, linear_reduction, pairwise_distinctness, scalar_equivalence, Catalog,
    EquivalenceVerdict,
};
use cubic_mf::families::{
    build_six_gen, five_gen_catalog, five_gen_unnormalized_catalog, nonorientable_4gen_catalog, orientable_catalog,
    rank1_catalog, sample_surface_points, CurvePoint, FamilyError, FamilyId,
};
use cubic_mf::field::{FieldElement, NumberField};
use cubic_mf::linalg::FMatrix;
use cubic_mf::matrix::{MfFailure, PolyMatrix};
use cubic_mf::moduli6::{
    dual_point, gamma2_solve, group_action, has_alpha_shape, linear_equation_values, linear_system_nullity,
    residual_equations, sample_moduli_point, GammaBlock, GroupAction, ModuliPoint,
};
use report::{Outcome, Record, Report};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cubicmf", version, about = "Exact matrix factorizations over the Fermat cubic surface")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Seed for sampling commands.
    #[arg(long, default_value_t = 1, global = true)]
    seed: u64,
    /// Trial budget for sampling commands.
    #[arg(long, default_value_t = 1000, global = true)]
    budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check phi*psi = psi*phi = f*Id for one family member or the whole catalog.
    Verify(VerifyArgs),
    /// List the isomorphism-class representatives of a catalog.
    Enumerate(EnumerateArgs),
    /// Decide whether two family members are equivalent.
    Equiv(EquivArgs),
    /// Six-generated moduli: linear layer, sampling and group actions.
    #[command(subcommand)]
    Moduli(ModuliCommand),
    /// Pfaffian of a skew matrix read from FILE or stdin.
    Pfaffian(MatrixInput),
    /// Determinant of a square matrix read from FILE or stdin.
    Det(MatrixInput),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct VerifyArgs {
    #[arg(long)]
    all: bool,
    /// Family string, e.g. phi_t_sigma:t=1,sigma=234,a=-1,b=-w,u=w
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// rank2_3gen, nonorientable_4gen or nonorientable_5gen
    #[arg(long)]
    catalog: String,
    /// Also run the pairwise distinctness sweep over the representatives.
    #[arg(long)]
    pairs: bool,
}

#[derive(Args)]
struct EquivArgs {
    #[arg(long)]
    left: String,
    #[arg(long)]
    right: String,
    /// Only compare the mod m^2 reductions.
    #[arg(long)]
    reduced: bool,
}

#[derive(Subcommand)]
enum ModuliCommand {
    /// Solve the Gamma2 linear system at lambda with the given free parameters.
    Solve {
        /// "a,b" for [a:b:1] or "a:b:c"
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Three free parameters, comma separated.
        #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
        free: String,
    },
    /// Search for a certified point (det = f^2, Pf = f) at lambda.
    Sample {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Apply a group element to the six-generated matrix of (lambda, gamma).
    Act {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Fifteen constants a1..a15, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, value_enum)]
        action: ActionKind,
        /// Scalar for uk.
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        /// K1,K2,K3,K4 for h.
        #[arg(long, allow_hyphen_values = true)]
        h: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ActionKind {
    Uk,
    S2,
    H,
}

#[derive(Args)]
struct MatrixInput {
    /// Matrix text (rows separated by ';', entries by ','); stdin when absent.
    file: Option<std::path::PathBuf>,
}

struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Run = Result<Vec<Record>, UsageError>;

fn field_for(texts: &[&str]) -> NumberField {
    if texts.iter().any(|t| t.contains('g')) {
        NumberField::eisenstein_cbrt2()
    } else {
        NumberField::eisenstein()
    }
}

fn parse_list(k: &NumberField, s: &str) -> Result<Vec<FieldElement>, UsageError> {
    s.split(',').map(|x| FieldElement::parse(k, x.trim()).map_err(UsageError::from)).collect()
}

fn fmat_json(m: &FMatrix) -> serde_json::Value {
    json!((0..m.rows).map(|i| m.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn verify_one(id: &FamilyId) -> Result<Record, UsageError> {
    let subject = id.to_string();
    match id.verify() {
        Ok(mf) => Ok(Record::new(subject, "matrix_factorization", Outcome::Pass).detail(json!({ "size": mf.size() }))),
        Err(FamilyError::Verification(fail)) => {
            let residual = match &fail {
                MfFailure::Residual(entries) => entries
                    .iter()
                    .take(3)
                    .map(|e| format!("{} ({},{}) = {}", e.product, e.row, e.col, e.value))
                    .collect::<Vec<_>>()
                    .join("; "),
                MfFailure::Shape(e) => e.to_string(),
            };
            Ok(Record::new(subject, "matrix_factorization", Outcome::Fail).residual(residual))
        }
        Err(e) => Err(e.into()),
    }
}

fn verify(args: &VerifyArgs) -> Run {
    if let Some(f) = &args.family {
        return Ok(vec![verify_one(&FamilyId::parse(f)?)?]);
    }
    let mut ids = vec![];
    ids.extend(nonorientable_4gen_catalog());
    ids.extend(five_gen_catalog());
    ids.extend(five_gen_unnormalized_catalog());
    ids.extend(orientable_catalog());
    ids.extend(rank1_catalog());
    for p in sample_surface_points() {
        ids.push(FamilyId::Lambda { psi: false, point: p.clone() });
        ids.push(FamilyId::Lambda { psi: true, point: p });
    }
    ids.iter().map(verify_one).collect()
}

fn enumerate(args: &EnumerateArgs) -> Run {
    let catalog = Catalog::parse(&args.catalog)?;
    let rep = enumerate_classes(catalog);
    let mut out = vec![Record::new(catalog.name(), "class_count", Outcome::Info).detail(json!({
        "count": rep.count,
        "representatives": rep.representatives,
        "orbit_sizes": rep.orbit_sizes,
    }))];
    if args.pairs {
        let mats = rep
            .representatives
            .iter()
            .map(|n| FamilyId::parse(n).and_then(|id| id.matrix()))
            .collect::<Result<Vec<_>, _>>()?;
        let d = pairwise_distinctness(catalog.name(), &rep.representatives, &mats)?;
        let outcome = if d.equivalent > 0 {
            Outcome::Fail
        } else if d.inconclusive > 0 {
            Outcome::Inconclusive
        } else {
            Outcome::Pass
        };
        let flagged: Vec<_> = d
            .pairs
            .iter()
            .filter(|p| p.outcome != cubic_mf::equiv::Outcome::NotEquivalent)
            .map(|p| {
                json!({
                    "left": d.representatives[p.pair.0],
                    "right": d.representatives[p.pair.1],
                    "outcome": p.outcome,
                    "method": p.method,
                    "witness": p.witness,
                })
            })
            .collect();
        out.push(Record::new(catalog.name(), "pairwise_distinctness", outcome).detail(json!({
            "pairs": d.pairs.len(),
            "distinct": d.distinct,
            "equivalent": d.equivalent,
            "inconclusive": d.inconclusive,
            "flagged": flagged,
        })));
    }
    Ok(out)
}

fn verdict_record(subject: String, check: &str, v: &EquivalenceVerdict) -> Record {
    let outcome = match v.outcome {
        cubic_mf::equiv::Outcome::EquivalentWithWitness => Outcome::EquivalentWithWitness,
        cubic_mf::equiv::Outcome::NotEquivalent => Outcome::NotEquivalent,
        cubic_mf::equiv::Outcome::Inconclusive => Outcome::Inconclusive,
    };
    let mut r = Record::new(subject, check, outcome).detail(json!({ "parameters": v.parameters }));
    if let Some((u, w)) = &v.witness {
        r = r.witness(json!({ "u": fmat_json(u), "v": fmat_json(w) }));
    }
    r
}

fn equiv(args: &EquivArgs) -> Run {
    let (l, r) = (FamilyId::parse(&args.left)?, FamilyId::parse(&args.right)?);
    let (a, b) = (l.matrix()?, r.matrix()?);
    let subject = format!("{} ~ {}", l, r);
    let reduced = scalar_equivalence(&linear_reduction(&a), &linear_reduction(&b))?;
    if args.reduced || reduced.outcome != cubic_mf::equiv::Outcome::EquivalentWithWitness {
        return Ok(vec![verdict_record(subject, "reduced_scalar_test", &reduced)]);
    }
    // equivalent reductions: only a constant witness on the full matrices decides
    let full = constant_equivalence(&a, &b)?;
    let mut rec = verdict_record(subject, "full_scalar_test", &full);
    if full.outcome != cubic_mf::equiv::Outcome::EquivalentWithWitness {
        rec.outcome = Outcome::Inconclusive;
    }
    Ok(vec![rec])
}

fn lambda_of(s: &str, extra: &[&str]) -> Result<CurvePoint, UsageError> {
    let mut texts = vec![s];
    texts.extend_from_slice(extra);
    Ok(CurvePoint::parse(&field_for(&texts), s)?)
}

fn gamma_json(g: &GammaBlock) -> serde_json::Value {
    json!(g.entries().iter().map(|x| x.to_string()).collect::<Vec<_>>())
}

fn moduli(cmd: &ModuliCommand, seed: u64, budget: usize) -> Run {
    match cmd {
        ModuliCommand::Solve { lambda, free } => {
            let l = lambda_of(lambda, &[free])?;
            let k = l.field().clone();
            let t = parse_list(&k, free)?;
            let t: [FieldElement; 3] = t.try_into().map_err(|_| UsageError("--free needs three values".into()))?;
            let subject = format!("lambda={}", l);
            let (rank, nullity) = linear_system_nullity(&l)?;
            let lin = Record::new(subject.clone(), "linear_system", if nullity == 3 { Outcome::Pass } else { Outcome::Fail })
                .detail(json!({ "rank": rank, "nullity": nullity }));
            let g = gamma2_solve(&l, &t)?;
            let vals = linear_equation_values(&l, &g)?;
            let ok = vals.iter().all(|v| v.is_zero());
            let mut sol = Record::new(subject.clone(), "gamma2_solution", if ok { Outcome::Pass } else { Outcome::Fail })
                .detail(json!({ "gamma": gamma_json(&g) }));
            if !ok {
                sol = sol.residual(vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "));
            }
            let res = residual_equations(&l, &g)?;
            let point = ModuliPoint::certify(&l, &g)?;
            let resid = Record::new(subject, "residual_equations", Outcome::Info).detail(json!({
                "I6": res[0].to_string(),
                "I7": res[1].to_string(),
                "I9": res[2].to_string(),
                "I10": res[3].to_string(),
                "certified": point.certified(),
            }));
            Ok(vec![lin, sol, resid])
        }
        ModuliCommand::Sample { lambda } => {
            let l = lambda_of(lambda, &[])?;
            let subject = format!("lambda={}", l);
            let detail = json!({ "seed": seed, "budget": budget });
            Ok(vec![match sample_moduli_point(&l, seed, budget)? {
                Some(p) if p.certified() => Record::new(subject, "sample", Outcome::Pass)
                    .detail(json!({ "seed": seed, "budget": budget, "point": p.report() })),
                Some(p) => Record::new(subject, "sample", Outcome::Fail).detail(json!({ "point": p.report() })),
                None => Record::new(subject, "sample", Outcome::Inconclusive).detail(detail),
            }])
        }
        ModuliCommand::Act { lambda, gamma, action, k, h } => {
            let mut texts = vec![gamma.as_str()];
            texts.extend(k.as_deref());
            texts.extend(h.as_deref());
            let l = lambda_of(lambda, &texts)?;
            let fk = l.field().clone();
            let g = GammaBlock::from_slice(&fk, &parse_list(&fk, gamma)?).map_err(UsageError)?;
            let big = build_six_gen(&l, &g)?;
            let (kind, target) = match action {
                ActionKind::Uk => {
                    let s = k.as_deref().ok_or_else(|| UsageError("--k is required for uk".into()))?;
                    (GroupAction::Uk(FieldElement::parse(&fk, s)?), l.clone())
                }
                ActionKind::S2 => (GroupAction::S2, dual_point(&l)?),
                ActionKind::H => {
                    let s = h.as_deref().ok_or_else(|| UsageError("--h is required for h".into()))?;
                    let v: [FieldElement; 4] =
                        parse_list(&fk, s)?.try_into().map_err(|_| UsageError("--h needs four values".into()))?;
                    (GroupAction::H(v), l.clone())
                }
            };
            let out = group_action(&kind, &l, &big)?;
            let shape = has_alpha_shape(&out, &target)?;
            let det_kept = out.determinant()? == big.determinant()?;
            let mut detail = json!({ "target_lambda": target.to_string(), "matrix": out.to_string() });
            if shape {
                if let Ok(g2) = GammaBlock::from_lambda_matrix(&out) {
                    detail["gamma"] = gamma_json(&g2);
                }
            }
            let outcome = if shape && det_kept && out.is_skew() { Outcome::Pass } else { Outcome::Fail };
            let mut rec = Record::new(format!("lambda={}", l), "group_action", outcome).detail(detail);
            if outcome == Outcome::Fail {
                rec = rec.residual(format!("shape={} det_preserved={} skew={}", shape, det_kept, out.is_skew()));
            }
            Ok(vec![rec])
        }
    }
}

fn read_matrix(input: &MatrixInput) -> Result<PolyMatrix, UsageError> {
    let text = match &input.file {
        Some(p) => std::fs::read_to_string(p)?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    Ok(PolyMatrix::parse(&field_for(&[&text]), &text)?)
}

fn pfaffian(input: &MatrixInput) -> Run {
    let m = read_matrix(input)?;
    if !m.is_skew() {
        return Err(UsageError("matrix is not skew-symmetric".into()));
    }
    let pf = m.pfaffian()?;
    Ok(vec![Record::new(format!("{}x{}", m.rows(), m.cols()), "pfaffian", Outcome::Info)
        .detail(json!({ "value": pf.to_string() }))])
}

fn det(input: &MatrixInput) -> Run {
    let m = read_matrix(input)?;
    let d = m.determinant()?;
    Ok(vec![Record::new(format!("{}x{}", m.rows(), m.cols()), "determinant", Outcome::Info)
        .detail(json!({ "value": d.to_string() }))])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let records = match &cli.command {
        Command::Verify(a) => verify(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Equiv(a) => equiv(a),
        Command::Moduli(c) => moduli(c, cli.seed, cli.budget),
        Command::Pfaffian(i) => pfaffian(i),
        Command::Det(i) => det(i),
    };
    let records = match records {
        Ok(r) => r,
        Err(UsageError(msg)) => {
            eprintln!("error: {}", msg);
            return ExitCode::from(2);
        }
    };
    let report = Report::new(std::env::args().skip(1).collect(), records);
    match cli.format {
        Format::Json => println!("{}", report.render_json()),
        Format::Text => print!("{}", report.render_text()),
    }
    ExitCode::from(report.exit_status as u8)
}
