use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use polyext::complex::{reconstruction_error, TOL};
use polyext::polytope::{hexagon, l1, linf};
use polyext::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::inputs::{parse_matrix, parse_vector, Inputs};
use crate::report::CliError;
use crate::{Cli, CliResult, Command, CompanionCmd, DecomposeCmd, EnumerateCmd, Linfl1Cmd, OpCmd, SpaceCmd};

pub struct Outcome {
    pub result: Value,
    pub human: String,
    pub code: u8,
    pub tol: Option<f64>,
    pub digest: String,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

struct Draft {
    result: Value,
    human: String,
    code: u8,
    tol: Option<f64>,
}

fn ok(result: Value, human: String) -> Draft {
    Draft {
        result,
        human,
        code: 0,
        tol: None,
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let mut inputs = Inputs::new();
    let draft = match &cli.command {
        Command::Space(cmd) => space(cmd, &mut inputs)?,
        Command::Op(cmd) => op(cmd, &mut inputs)?,
        Command::Enumerate(cmd) => enumerate(cmd, &mut inputs)?,
        Command::Decompose(cmd) => decompose(cmd, &mut inputs)?,
        Command::Companion(cmd) => companion(cmd, &mut inputs)?,
        Command::Farkas { file } => farkas(&inputs.json(file)?)?,
        Command::Linfl1(cmd) => linfl1(cmd, &mut inputs)?,
        Command::Selftest => selftest(cli.seed)?,
    };
    Ok(Outcome {
        result: draft.result,
        human: draft.human,
        code: draft.code,
        tol: draft.tol,
        digest: inputs.digest(),
    })
}

fn space_json(s: &PolyhedralSpace) -> Value {
    json!({
        "name": s.name(),
        "dim": s.dim(),
        "vertices": s.vertices(),
        "facets": s.facets(),
        "incidence": s.incidence(),
        "facet_pairs": s.facet_pair_representatives().len(),
        "vertex_pairs": s.vertex_pair_representatives().len(),
    })
}

fn space_summary(s: &PolyhedralSpace) -> String {
    let mut h = format!(
        "space {}: dimension {}, {} vertices, {} facets\n",
        s.name(),
        s.dim(),
        s.vertices().len(),
        s.facets().len()
    );
    for (f, inc) in s.facets().iter().zip(s.incidence()) {
        let _ = writeln!(h, "  facet {f} through vertices {inc:?}");
    }
    h
}

fn space(cmd: &SpaceCmd, inputs: &mut Inputs) -> CliResult<Draft> {
    match cmd {
        SpaceCmd::Build { file, out } => {
            let sf: SpaceFile = inputs.json(file)?;
            let s = PolyhedralSpace::from_file(&sf)?;
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&s.to_file()).expect("serializable");
                std::fs::write(path, text + "\n").map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
            Ok(ok(space_json(&s), space_summary(&s)))
        }
        SpaceCmd::Inspect { space } => {
            let s = inputs.space(space)?;
            Ok(ok(space_json(&s), space_summary(&s)))
        }
    }
}

fn op(cmd: &OpCmd, inputs: &mut Inputs) -> CliResult<Draft> {
    let (OpCmd::Norm { file }
    | OpCmd::Attain { file }
    | OpCmd::Rank { file }
    | OpCmd::CheckExtreme { file }
    | OpCmd::ExtremalNumber { file }) = cmd;
    let t = inputs.operator(file)?;
    Ok(match cmd {
        OpCmd::Norm { .. } => ok(json!({ "norm": t.norm() }), format!("norm = {}", t.norm())),
        OpCmd::Attain { .. } => {
            let verts = t.norm_attainment_vertices()?;
            let human = format!(
                "norm {} attained at {} vertices: {}",
                t.norm(),
                verts.len(),
                verts.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
            );
            ok(
                json!({ "norm": t.norm(), "indices": t.attaining_indices(), "vertices": verts }),
                human,
            )
        }
        OpCmd::Rank { .. } => {
            let kernel = kernel_basis(t.matrix());
            ok(
                json!({ "rank": t.rank(), "kernel": kernel }),
                format!("rank {}, kernel dimension {}", t.rank(), kernel.len()),
            )
        }
        OpCmd::CheckExtreme { .. } => {
            let cert = t.is_extreme_contraction()?;
            let full = t.domain().dim() * t.codomain().dim();
            let human = match &cert.witness {
                None => format!("extreme: active rank {} of {full}", cert.active_rank),
                Some(d) => format!(
                    "not extreme: active rank {} of {full}; T + D and T - D both have norm at most 1 for D = {d}",
                    cert.active_rank
                ),
            };
            ok(to_value(&cert), human)
        }
        OpCmd::ExtremalNumber { .. } => {
            let e = t.extremal_number()?;
            ok(
                json!({ "extremal_number": e, "dim": t.domain().dim() }),
                format!("extremal number {e} (domain dimension {})", t.domain().dim()),
            )
        }
    })
}

fn enumerate(cmd: &EnumerateCmd, inputs: &mut Inputs) -> CliResult<Draft> {
    match cmd {
        EnumerateCmd::Rank1 { domain, codomain } => {
            let (x, y) = (inputs.space(domain)?, inputs.space(codomain)?);
            let ops = enumerate_rank1_extremes(&x, &y);
            let r = x.facet_pair_representatives().len();
            let s = y.vertex_pair_representatives().len();
            let mats: Vec<&QMatrix> = ops.iter().map(Operator::matrix).collect();
            Ok(ok(
                json!({ "count": ops.len(), "facet_pairs": r, "vertex_pairs": s, "operators": mats }),
                format!("{} rank-one extreme contractions (2·{r}·{s})", ops.len()),
            ))
        }
        EnumerateCmd::All { domain, codomain, cap } => {
            let (x, y) = (inputs.space(domain)?, inputs.space(codomain)?);
            let ops = enumerate_extreme_contractions(&x, &y, *cap)?;
            let mut by_rank: BTreeMap<usize, usize> = BTreeMap::new();
            for t in &ops {
                *by_rank.entry(t.rank()).or_default() += 1;
            }
            let list: Vec<Value> = ops.iter().map(|t| json!({ "matrix": t.matrix(), "rank": t.rank() })).collect();
            let mut human = format!("{} extreme contractions", ops.len());
            for (r, c) in &by_rank {
                let _ = write!(human, ", {c} of rank {r}");
            }
            Ok(ok(
                json!({ "count": ops.len(), "by_rank": by_rank, "operators": list }),
                human,
            ))
        }
    }
}

fn decomposition_human(outcome: &DecompositionOutcome) -> String {
    match outcome {
        DecompositionOutcome::Decomposed(d) => {
            let mut h = format!("T is a convex combination of {} extreme contractions:\n", d.parts.len());
            for (w, p) in d.weights.iter().zip(&d.parts) {
                let _ = writeln!(h, "  {w} × {}", p.matrix());
            }
            h
        }
        DecompositionOutcome::Infeasible(r) => format!(
            "infeasible: no {}; dual certificate y = {}",
            r.context, r.certificate
        ),
    }
}

fn decomposition_draft(outcome: DecompositionOutcome) -> Draft {
    let human = decomposition_human(&outcome);
    let code = if outcome.report().is_some() { 3 } else { 0 };
    Draft {
        result: to_value(&outcome),
        human,
        code,
        tol: None,
    }
}

fn decompose(cmd: &DecomposeCmd, inputs: &mut Inputs) -> CliResult<Draft> {
    match cmd {
        DecomposeCmd::Km { file, vertex, subsets } => {
            let t = inputs.operator(file)?;
            let opts = Rank1Options {
                vertex: *vertex,
                facets: if *subsets { FacetSelection::NSubsets } else { FacetSelection::All },
            };
            Ok(decomposition_draft(decompose_rank1_with(&t, &opts)?))
        }
        DecomposeCmd::General { file, rank, cap } => {
            let t = inputs.operator(file)?;
            Ok(decomposition_draft(decompose_general(&t, *rank, *cap)?))
        }
    }
}

fn companion(cmd: &CompanionCmd, inputs: &mut Inputs) -> CliResult<Draft> {
    match cmd {
        CompanionCmd::Enumerate {
            domain,
            codomain,
            vertex,
            image,
            cap,
        } => {
            let (x, y) = (inputs.space(domain)?, inputs.space(codomain)?);
            inputs.literal(vertex);
            inputs.literal(image);
            let (v, w) = (parse_vector(vertex)?, parse_vector(image)?);
            let comps = enumerate_companion_matrices(&x, &y, &v, &w, *cap)?;
            let mut list = Vec::new();
            let mut human = format!("{} companion matrices at {v}\n", comps.len());
            for c in &comps {
                let holds = c.hypothesis_holds()?;
                let _ = writeln!(human, "  {} hypothesis {}", c.matrix, if holds { "holds" } else { "fails" });
                let mut entry = to_value(c);
                entry["hypothesis_holds"] = json!(holds);
                list.push(entry);
            }
            Ok(ok(
                json!({
                    "z_basis_rule": "kernel of the mean of the facet functionals through the vertex",
                    "companions": list,
                }),
                human,
            ))
        }
        CompanionCmd::Check { matrix } => {
            inputs.literal(matrix);
            let a = parse_matrix(matrix)?;
            let holds = companion_hypothesis_holds(&a)?;
            Ok(ok(
                json!({ "matrix": a, "hypothesis_holds": holds }),
                format!("hypothesis {} for {a}", if holds { "holds" } else { "fails" }),
            ))
        }
    }
}

#[derive(Deserialize)]
struct FarkasFile {
    a: QMatrix,
    b: QVector,
}

fn farkas(f: &FarkasFile) -> CliResult<Draft> {
    let cert = farkas_decide(&f.a, &f.b)?;
    let (human, code) = match &cert {
        FarkasCertificate::Primal(x) => (format!("feasible: x = {x}"), 0),
        FarkasCertificate::Dual(y) => (format!("infeasible: y = {y} has Aᵀy >= 0 and bᵀy < 0"), 3),
    };
    Ok(Draft {
        result: to_value(&cert),
        human,
        code,
        tol: None,
    })
}

fn linfl1(cmd: &Linfl1Cmd, inputs: &mut Inputs) -> CliResult<Draft> {
    let (Linfl1Cmd::Check { file } | Linfl1Cmd::Decompose { file }) = cmd;
    let spec: ComplexOpFile = inputs.json(file)?;
    let (t, u) = spec.load()?;
    match cmd {
        Linfl1Cmd::Check { .. } => {
            let (result, human) = match kappa_profile(&t, &u) {
                Ok(p) => {
                    let norm_one = is_norm_one_rank1(&t, &u);
                    let extreme = is_extreme_contraction_c(&t, &u);
                    let human = format!(
                        "κ = {:?}; norm one: {norm_one}; extreme: {extreme}",
                        p.kappa
                    );
                    (
                        json!({
                            "norm": t.norm(),
                            "profile": p,
                            "norm_formula": p.norm_formula(),
                            "norm_one": norm_one,
                            "extreme": extreme,
                        }),
                        human,
                    )
                }
                Err(e) => (
                    json!({ "norm": t.norm(), "profile": null, "norm_one": false, "extreme": false, "reason": e.to_string() }),
                    format!("classification failed: {e}"),
                ),
            };
            Ok(Draft {
                result,
                human,
                code: 0,
                tol: Some(TOL),
            })
        }
        Linfl1Cmd::Decompose { .. } => {
            let leaves = decompose_c(&t, &u)?;
            let err = reconstruction_error(&t, &leaves);
            let mut human = format!("{} extreme contractions, reconstruction error {err:.1e}\n", leaves.len());
            for l in &leaves {
                let _ = writeln!(human, "  {:.6} × κ = {:?} (depth {})", l.weight, l.kappa, l.depth);
            }
            Ok(Draft {
                result: json!({ "u": u, "leaves": leaves, "reconstruction_error": err }),
                human,
                code: 0,
                tol: Some(TOL),
            })
        }
    }
}

fn selftest(seed: u64) -> CliResult<Draft> {
    let mut checks: Vec<(String, bool)> = Vec::new();
    let sq = Arc::new(linf(2)?);
    let remark = Operator::new(
        sq.clone(),
        sq.clone(),
        QMatrix::from_fracs(&[&[(1, 1), (0, 1)], &[(1, 2), (1, 2)]]),
    )?;

    let rank2: Vec<QMatrix> = enumerate_extreme_contractions(&sq, &sq, DEFAULT_ENUMERATION_CAP)?
        .into_iter()
        .filter(|t| t.rank() == 2)
        .map(|t| t.matrix().clone())
        .collect();
    let mut expected = Vec::new();
    for rows in [[[1, 0], [0, 1]], [[1, 0], [0, -1]], [[0, 1], [1, 0]], [[0, 1], [-1, 0]]] {
        let a = QMatrix::from_ints(&[&rows[0], &rows[1]]);
        expected.push(-&a);
        expected.push(a);
    }
    expected.sort();
    checks.push(("rank-2 extreme contractions of linf2 are ±A1..±A4".into(), rank2 == expected));

    let filtered = decompose_general(&remark, Some(2), DEFAULT_ENUMERATION_CAP)?;
    checks.push((
        "(1 0; 1/2 1/2) is not a combination of rank-2 extreme contractions".into(),
        filtered.report().is_some_and(InfeasibilityReport::verify),
    ));
    let free = decompose_general(&remark, None, DEFAULT_ENUMERATION_CAP)?;
    checks.push((
        "(1 0; 1/2 1/2) is a combination of extreme contractions".into(),
        free.decomposition().is_some_and(|d| d.verify(&remark)),
    ));
    let half = Rational::new(1, 2);
    let pair = &QMatrix::identity(2).scale(&half) + &QMatrix::from_ints(&[&[1, 0], &[1, 0]]).scale(&half);
    checks.push(("½A1 + ½B equals (1 0; 1/2 1/2)".into(), &pair == remark.matrix()));
    checks.push(("extremal number of (1 0; 1/2 1/2) is 1".into(), remark.extremal_number()? == 1));

    let hex = Arc::new(hexagon());
    let l12 = Arc::new(l1(2)?);
    let l13 = Arc::new(l1(3)?);
    for (x, y, n) in [(&sq, &l12, 8), (&hex, &l12, 12), (&sq, &sq, 8), (&hex, &l13, 18)] {
        checks.push((
            format!("{} -> {} has {n} rank-one extreme contractions", x.name(), y.name()),
            enumerate_rank1_extremes(x, y).len() == n,
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all_ok = true;
    for _ in 0..20 {
        let f: QVector = (0..2).map(|_| Rational::new(rng.gen_range(-6..=6), rng.gen_range(1..=4))).collect();
        let w: QVector = (0..2).map(|_| Rational::new(rng.gen_range(-6..=6), rng.gen_range(1..=4))).collect();
        if f.is_zero() || w.is_zero() {
            continue;
        }
        let f = f.scale(&hex.dual_norm(&f)?.recip());
        let w = w.scale(&l12.norm(&w)?.recip());
        let t = Operator::rank_one(hex.clone(), l12.clone(), &w, &f)?;
        all_ok &= decompose_rank1(&t)?.decomposition().is_some_and(|d| d.verify(&t));
    }
    checks.push(("random hex -> l1-2 rank-one operators decompose".into(), all_ok));

    let failed = checks.iter().filter(|(_, p)| !p).count();
    let mut human = String::new();
    for (name, passed) in &checks {
        let _ = writeln!(human, "{} {name}", if *passed { "PASS" } else { "FAIL" });
    }
    let list: Vec<Value> = checks.iter().map(|(n, p)| json!({ "name": n, "passed": p })).collect();
    Ok(Draft {
        result: json!({ "seed": seed, "checks": list, "failed": failed }),
        human,
        code: if failed == 0 { 0 } else { 2 },
        tol: None,
    })
}
