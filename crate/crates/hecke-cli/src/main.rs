//! Command-line driver: loads a pair from a JSON spec file and dispatches
//! one operation per invocation. Exit codes: 0 success, 2 domain error,
//! 3 enumeration overflow.

use clap::{Parser, Subcommand};
use hecke_core::algebra::{project_p, HeckeElement};
use hecke_core::catalog::{
    build_pair, char_eval, finite_pair_spec_json, parse_pair_spec, verify_character,
    CharacterSpec, PairSpec,
};
use hecke_core::coset::core_reduce;
use hecke_core::group::parse_lenient_json;
use hecke_core::levels::{h_level_quotient, haar_index, hecke_group_check};
use hecke_core::rat::format_rational;
use hecke_core::{corner, Complex, GroupElement, HeckeError, HeckePair};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "hecke", version, about = "Exact computations with Hecke pairs")]
struct Cli {
    /// Pair spec file (JSON).
    #[arg(long, global = true)]
    pair: Option<PathBuf>,

    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe the pair: family, sizes, generators.
    PairInfo,
    /// L(x): number of left cosets in the double coset of ELEM.
    #[command(alias = "L")]
    L { elem: String },
    /// Modular function Δ(x) = L(x)/L(x⁻¹), exact.
    Delta { elem: String },
    /// Full double-coset record of ELEM: L, R, Δ, transversal.
    Decompose { elem: String },
    /// Convolution of two element files.
    Conv { f: PathBuf, g: PathBuf },
    /// Involution (adjoint) of an element file.
    Star { f: PathBuf },
    /// l1 norm of an element file, exact.
    Norm1 { f: PathBuf },
    /// Projection of a left-coset sum file onto bi-invariant sums.
    Project { f: PathBuf },
    /// Membership in the directing semigroup T = {t | tHt⁻¹ ⊇ H}.
    #[command(alias = "in-T")]
    InT { elem: String },
    /// Search for s, t in T with s⁻¹t = ELEM (semidecision).
    DirectedWitness {
        elem: String,
        /// JSON array of candidate T-elements to combine.
        #[arg(long)]
        candidates: PathBuf,
        /// Maximum word length over the candidates.
        #[arg(long, default_value_t = 4)]
        bound: usize,
    },
    /// Reduce a finite pair by the kernel of the action on G/H.
    Reduce,
    /// Fullness of the averaging projection (finite pairs).
    Full,
    /// Rank of the corner of the group algebra (finite pairs).
    CornerDim,
    /// Dual-group fullness criterion (finite semidirect pairs, abelian N).
    OmegaFull,
    /// Level quotient of H on a window of cosets.
    Level {
        /// JSON array of window coset representatives.
        #[arg(long)]
        window: String,
    },
    /// Haar weight of the basic compact open set attached to a window.
    Haar {
        #[arg(long)]
        window: String,
    },
    /// Verify a closed-form character against engine convolutions.
    CharCheck {
        /// dihedral_pi_c | psl2_hall_z | psl2_hall_z1
        #[arg(long)]
        kind: String,
        /// Complex parameter, e.g. "2", "i", "1+2i", "polar:1:0.785".
        #[arg(long)]
        param: Option<String>,
        #[arg(long, default_value_t = 4)]
        max_degree: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Stabilizer-orbit finiteness evidence over (s, t) samples.
    OrbitCheck {
        /// JSON array of [s, t] element pairs.
        #[arg(long)]
        samples: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, human)) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&value).unwrap());
            } else {
                println!("{human}");
            }
            std::process::exit(0);
        }
        Err(e) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "error": e.code(),
                        "detail": e.to_string(),
                    }))
                    .unwrap()
                );
            } else {
                eprintln!("error: {e}");
            }
            std::process::exit(e.exit_code());
        }
    }
}

fn read_file(path: &Path) -> Result<String, HeckeError> {
    std::fs::read_to_string(path)
        .map_err(|e| HeckeError::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_spec(cli: &Cli) -> Result<(PairSpec, Value), HeckeError> {
    let path = cli
        .pair
        .as_ref()
        .ok_or_else(|| HeckeError::Parse("--pair <file.json> is required".into()))?;
    let raw: Value =
        serde_json::from_str(&read_file(path)?).map_err(|e| HeckeError::Parse(e.to_string()))?;
    Ok((parse_pair_spec(&raw)?, raw))
}

fn load_pair(cli: &Cli) -> Result<Arc<HeckePair>, HeckeError> {
    let (spec, _) = load_spec(cli)?;
    build_pair(&spec)
}

fn element_file(pair: &Arc<HeckePair>, path: &Path) -> Result<HeckeElement, HeckeError> {
    let v: Value =
        serde_json::from_str(&read_file(path)?).map_err(|e| HeckeError::Parse(e.to_string()))?;
    HeckeElement::from_json(pair, &v)
}

fn run(cli: &Cli) -> Result<(Value, String), HeckeError> {
    match &cli.command {
        Command::PairInfo => {
            let pair = load_pair(cli)?;
            let meta = pair.meta();
            let order = pair.group().finite().ok().map(|fg| fg.order());
            let gens: Vec<Value> = pair
                .subgroup()
                .generators()
                .iter()
                .map(GroupElement::to_json)
                .collect();
            let v = json!({
                "family": meta.family,
                "q": meta.q,
                "assumed_reduced": meta.assumed_reduced,
                "order": order,
                "h_generators": gens,
                "max_index": pair.max_index(),
                "interned_classes": pair.interned_count(),
            });
            let human = format!(
                "family {}{}; {} subgroup generators; cap {}",
                meta.family,
                order.map(|o| format!(", |G| = {o}")).unwrap_or_default(),
                pair.subgroup().generators().len(),
                pair.max_index()
            );
            Ok((v, human))
        }
        Command::L { elem } => {
            let pair = load_pair(cli)?;
            let x = pair.group().element_from_str(elem)?;
            let l = pair.hecke_l(&x)?;
            Ok((
                json!({"elem": x.to_json(), "L": l}),
                format!("L = {l}"),
            ))
        }
        Command::Delta { elem } => {
            let pair = load_pair(cli)?;
            let x = pair.group().element_from_str(elem)?;
            let d = pair.delta(&x)?;
            Ok((
                json!({"elem": x.to_json(), "delta": format_rational(&d)}),
                format!("delta = {}", format_rational(&d)),
            ))
        }
        Command::Decompose { elem } => {
            let pair = load_pair(cli)?;
            let x = pair.group().element_from_str(elem)?;
            let rec = pair.coset(pair.double_coset_of(&x)?);
            let transversal: Vec<Value> =
                rec.transversal.iter().map(GroupElement::to_json).collect();
            let v = json!({
                "elem": x.to_json(),
                "class_rep": rec.rep.to_json(),
                "L": rec.l,
                "R": rec.r,
                "delta": format_rational(&rec.delta()),
                "transversal": transversal,
            });
            let human = format!(
                "L = {}, R = {}, delta = {}, transversal of {} left cosets",
                rec.l,
                rec.r,
                format_rational(&rec.delta()),
                rec.l
            );
            Ok((v, human))
        }
        Command::Conv { f, g } => {
            let pair = load_pair(cli)?;
            let fe = element_file(&pair, f)?;
            let ge = element_file(&pair, g)?;
            let out = fe.convolve(&ge)?;
            let v = out.to_json();
            Ok((v.clone(), v.to_string()))
        }
        Command::Star { f } => {
            let pair = load_pair(cli)?;
            let out = element_file(&pair, f)?.involute()?;
            let v = out.to_json();
            Ok((v.clone(), v.to_string()))
        }
        Command::Norm1 { f } => {
            let pair = load_pair(cli)?;
            let n = element_file(&pair, f)?.l1_norm();
            Ok((
                json!({"norm1": format_rational(&n)}),
                format!("norm1 = {}", format_rational(&n)),
            ))
        }
        Command::Project { f } => {
            let pair = load_pair(cli)?;
            let v: Value = serde_json::from_str(&read_file(f)?)
                .map_err(|e| HeckeError::Parse(e.to_string()))?;
            let arr = v
                .as_array()
                .ok_or_else(|| HeckeError::Parse("expected array of [rep, coeff] pairs".into()))?;
            let mut sum = Vec::with_capacity(arr.len());
            for item in arr {
                let rep = item
                    .get(0)
                    .ok_or_else(|| HeckeError::Parse("entry missing rep".into()))?;
                let coeff = item
                    .get(1)
                    .and_then(Value::as_str)
                    .ok_or_else(|| HeckeError::Parse("entry missing coeff string".into()))?;
                sum.push((
                    pair.group().element_from_json(rep)?,
                    hecke_core::rat::parse_rational(coeff)?,
                ));
            }
            let out = project_p(&pair, &sum)?;
            let v = out.to_json();
            Ok((v.clone(), v.to_string()))
        }
        Command::InT { elem } => {
            let pair = load_pair(cli)?;
            let t = pair.group().element_from_str(elem)?;
            let inside = pair.in_t(&t)?;
            Ok((
                json!({"elem": t.to_json(), "in_T": inside}),
                format!("in_T = {inside}"),
            ))
        }
        Command::DirectedWitness {
            elem,
            candidates,
            bound,
        } => {
            let pair = load_pair(cli)?;
            let x = pair.group().element_from_str(elem)?;
            let cands = pair.group().elements_from_str(&read_file(candidates)?)?;
            let witness = pair.directed_witness(&x, &cands, *bound)?;
            match witness {
                Some((s, t)) => Ok((
                    json!({"found": true, "s": s.to_json(), "t": t.to_json()}),
                    format!("witness: s = {}, t = {}", s.to_json(), t.to_json()),
                )),
                None => Ok((
                    json!({"found": false}),
                    "no witness within bound (inconclusive)".into(),
                )),
            }
        }
        Command::Reduce => {
            let pair = load_pair(cli)?;
            let red = core_reduce(&pair)?;
            let v = json!({
                "already_reduced": red.already_reduced,
                "kernel_size": red.kernel_size,
                "order": red.table.len(),
                "pair": finite_pair_spec_json(&red.table, &red.h_image),
            });
            let human = if red.already_reduced {
                "pair is already reduced".to_string()
            } else {
                format!(
                    "kernel of size {}; reduced pair has order {}",
                    red.kernel_size,
                    red.table.len()
                )
            };
            Ok((v, human))
        }
        Command::Full => {
            let pair = load_pair(cli)?;
            let full = corner::fullness_test(&pair)?;
            Ok((json!({"full": full}), format!("full = {full}")))
        }
        Command::CornerDim => {
            let pair = load_pair(cli)?;
            let dim = corner::corner_dimension(&pair)?;
            Ok((
                json!({"corner_dimension": dim}),
                format!("corner dimension = {dim}"),
            ))
        }
        Command::OmegaFull => {
            let (spec, _) = load_spec(cli)?;
            let PairSpec::FiniteSemidirect {
                n_table, action, h, ..
            } = &spec
            else {
                return Err(HeckeError::SpecInvalid(
                    "omega-full requires a finite_semidirect pair".into(),
                ));
            };
            let ng = hecke_core::group::FiniteGroup::from_table(n_table)?;
            let full = corner::omega_is_full_dual(&ng, h, action)?;
            Ok((json!({"omega_full": full}), format!("omega_full = {full}")))
        }
        Command::Level { window } => {
            let pair = load_pair(cli)?;
            let win = pair.group().elements_from_str(window)?;
            let (size, table) = h_level_quotient(&pair, &win)?;
            let v = json!({
                "window": table.window.iter().map(GroupElement::to_json).collect::<Vec<_>>(),
                "size": size,
                "rows": table.rows,
            });
            let human = format!(
                "saturated window of {} cosets; level group of order {size}",
                table.window.len()
            );
            Ok((v, human))
        }
        Command::Haar { window } => {
            let pair = load_pair(cli)?;
            let win = pair.group().elements_from_str(window)?;
            let mu = haar_index(&pair, &pair.group().identity(), &win)?;
            Ok((
                json!({"mu": format_rational(&mu)}),
                format!("mu = {}", format_rational(&mu)),
            ))
        }
        Command::CharCheck {
            kind,
            param,
            max_degree,
            tol,
        } => {
            let pair = load_pair(cli)?;
            let q = pair.meta().q;
            let spec = match kind.as_str() {
                "dihedral_pi_c" => CharacterSpec::DihedralPiC {
                    c: parse_complex(param.as_deref().ok_or_else(|| {
                        HeckeError::DegenerateParameter("dihedral_pi_c requires --param".into())
                    })?)?,
                },
                "psl2_hall_z" => CharacterSpec::Psl2HallZ {
                    q: q.ok_or(HeckeError::PairMismatch)?,
                    z: parse_complex(param.as_deref().ok_or_else(|| {
                        HeckeError::DegenerateParameter("psl2_hall_z requires --param".into())
                    })?)?,
                },
                "psl2_hall_z1" => CharacterSpec::Psl2HallZ1 {
                    q: q.ok_or(HeckeError::PairMismatch)?,
                },
                other => {
                    return Err(HeckeError::SpecInvalid(format!(
                        "unknown character kind {other:?}"
                    )))
                }
            };
            let report = verify_character(&pair, &spec, *max_degree, *tol)?;
            let sample = char_eval(&spec, 1)?;
            let v = json!({
                "kind": kind,
                "cases": report.cases,
                "max_deviation": report.max_deviation,
                "tol": report.tol,
                "pass": report.pass,
                "value_at_1": [sample.re, sample.im],
            });
            let human = format!(
                "{} cases; max deviation {:.3e}; pass = {}",
                report.cases, report.max_deviation, report.pass
            );
            Ok((v, human))
        }
        Command::OrbitCheck { samples } => {
            let pair = load_pair(cli)?;
            let v: Value = serde_json::from_str(&parse_lenient_json(&read_file(samples)?)?.to_string())
                .map_err(|e| HeckeError::Parse(e.to_string()))?;
            let arr = v
                .as_array()
                .ok_or_else(|| HeckeError::Parse("expected array of [s, t] pairs".into()))?;
            let mut pairs = Vec::with_capacity(arr.len());
            for item in arr {
                let s = item
                    .get(0)
                    .ok_or_else(|| HeckeError::Parse("sample missing s".into()))?;
                let t = item
                    .get(1)
                    .ok_or_else(|| HeckeError::Parse("sample missing t".into()))?;
                pairs.push((
                    pair.group().element_from_json(s)?,
                    pair.group().element_from_json(t)?,
                ));
            }
            let reports = hecke_group_check(&pair, &pairs)?;
            let all_finite = reports.iter().all(|r| r.orbit_size.is_some());
            let items: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({
                        "s": r.s.to_json(),
                        "t": r.t.to_json(),
                        "orbit_size": r.orbit_size,
                        "inconclusive": r.orbit_size.is_none(),
                    })
                })
                .collect();
            let v = json!({"reports": items, "all_finite": all_finite});
            let human = if all_finite {
                format!("{} samples, all orbits finite", reports.len())
            } else {
                format!(
                    "{} samples; {} overflowed the cap (inconclusive)",
                    reports.len(),
                    reports.iter().filter(|r| r.orbit_size.is_none()).count()
                )
            };
            Ok((v, human))
        }
    }
}

/// Accepts "1.5", "i", "-2i", "1+2i", "0.5-0.3i", and "polar:R:THETA".
fn parse_complex(s: &str) -> Result<Complex, HeckeError> {
    let s = s.trim();
    let bad = || HeckeError::Parse(format!("cannot parse complex number {s:?}"));
    if let Some(rest) = s.strip_prefix("polar:") {
        let (r, theta) = rest.split_once(':').ok_or_else(bad)?;
        let r: f64 = r.trim().parse().map_err(|_| bad())?;
        let theta: f64 = theta.trim().parse().map_err(|_| bad())?;
        return Ok(Complex::from_polar(r, theta));
    }
    let parse_imag = |t: &str| -> Result<f64, HeckeError> {
        let t = t.trim().strip_suffix(['i', 'I']).ok_or_else(bad)?;
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            other => other.trim().parse().map_err(|_| bad()),
        }
    };
    // Split into real and imaginary parts at a sign that is not leading and
    // not part of an exponent.
    let chars: Vec<char> = s.chars().collect();
    for i in (1..chars.len()).rev() {
        if (chars[i] == '+' || chars[i] == '-')
            && chars[i - 1] != 'e'
            && chars[i - 1] != 'E'
        {
            let (re, im) = (&s[..i], &s[i..]);
            if im.ends_with(['i', 'I']) {
                let re: f64 = re.trim().parse().map_err(|_| bad())?;
                return Ok(Complex::new(re, parse_imag(im)?));
            }
        }
    }
    if s.ends_with(['i', 'I']) {
        Ok(Complex::new(0.0, parse_imag(s)?))
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        Ok(Complex::new(re, 0.0))
    }
}
