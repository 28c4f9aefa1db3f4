use btlat::autdecomp::{
    aut_order_formula, count_automorphisms, decompose_hom, label_action, normal_form, AutWord, ProductGraph,
};
use btlat::building::{Ball, BallOptions, BuildingDescriptor, PolyVertex};
use btlat::drinfeld::{
    diagonalize_norm, min_depth, omega_check, tau_coordinates, RigidPoint, DEFAULT_ENUM_BUDGET,
};
use btlat::error::{Error, Result};
use btlat::field::{ExtensionDescriptor, FieldModel};
use btlat::subdivision::{check_compatible, eta_chambers, nu_embed_poly, subdivide_ball, verify_induced_structure, Marking};
use btlat::verify::{run_suite, SuiteConfig, SUITES};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "btlat", version, about = "Exact computations in Bruhat-Tits buildings of SL_{d+1} and their products")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// padic:p or laurent:q
    #[arg(long, global = true, default_value = "padic:2")]
    field: String,
    /// Dimension (default 2; for suites, an upper bound).
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Number of factors.
    #[arg(long, global = true, default_value_t = 1)]
    r: usize,
    #[arg(long, global = true, default_value_t = 1)]
    radius: usize,
    #[arg(long, global = true)]
    depth: Option<u32>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Residue field size, for suites.
    #[arg(long, global = true)]
    q: Option<u32>,
    /// Residue degree of an extension.
    #[arg(long, global = true, default_value_t = 1)]
    f: u32,
    /// Ramification index of an extension.
    #[arg(long, global = true, default_value_t = 1)]
    e: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Vertices, edges and chambers of a ball.
    Ball {
        #[arg(long)]
        center: Option<String>,
    },
    /// Projection of a vertex onto the standard apartment.
    Project {
        #[arg(long)]
        vertex: String,
    },
    /// Labels of a vertex, the basic vertex with given labels, or the label
    /// action of a word.
    Label {
        #[arg(long)]
        vertex: Option<String>,
        #[arg(long)]
        labels: Option<String>,
        #[arg(long)]
        word: Option<String>,
    },
    /// Image of a vertex under the involution on the masked factors.
    Involution {
        #[arg(long)]
        vertex: String,
        /// JSON array of booleans, one per factor (default: all).
        #[arg(long)]
        mask: Option<String>,
    },
    /// Subdivision of a ball by a marking.
    Subdivide {
        /// JSON array, one positive integer per factor (default: all 2).
        #[arg(long)]
        marking: Option<String>,
    },
    /// Alcove charts of the dilated simplex.
    Eta {
        #[arg(long)]
        n: u32,
    },
    /// Embedding into the building over an extension; checks the induced
    /// structure on a ball when no vertex is given.
    Extend {
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Decomposition of an automorphism of a product of complete graphs, or
    /// the automorphism count when no map is given.
    DecomposeAut {
        /// JSON array of factor sizes.
        #[arg(long)]
        sizes: String,
        /// JSON array: image index of every vertex (mixed radix, first factor slowest).
        #[arg(long)]
        map: Option<String>,
    },
    /// Normal form of an automorphism word, checked on a ball.
    NormalForm {
        #[arg(long)]
        word: String,
    },
    /// Membership of a rigid point in the closed (or open) filtration step.
    Omega {
        #[arg(long)]
        point: String,
        #[arg(long)]
        open: bool,
    },
    /// Retraction of a rigid point to the building, with certified
    /// diagonalizing bases.
    Retract {
        #[arg(long)]
        point: String,
    },
    /// Runs a named verification suite.
    Verify { suite: String },
}

enum Outcome {
    Pass(Value),
    Fail(Value),
    Text(String),
}

fn read_json(s: &str) -> Result<Value> {
    let text = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::input(format!("{path}: {e}")))?,
        None => s.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::input(format!("malformed JSON: {e}")))
}

fn parse<T: serde::de::DeserializeOwned>(s: &str, what: &str) -> Result<T> {
    serde_json::from_value(read_json(s)?).map_err(|e| Error::input(format!("{what}: {e}")))
}

fn descriptor(o: &Opts) -> Result<BuildingDescriptor> {
    let d = dim(o);
    if d == 0 || o.r == 0 {
        return Err(Error::input("--d and --r must be positive"));
    }
    BuildingDescriptor::uniform(&FieldModel::from_spec(&o.field)?, d, o.r)
}

fn dim(o: &Opts) -> usize {
    o.d.unwrap_or(2)
}

fn vertex(desc: &BuildingDescriptor, s: &str) -> Result<PolyVertex> {
    desc.parse_vertex(&parse::<Vec<Vec<String>>>(s, "vertex")?)
}

fn extension(o: &Opts) -> Result<ExtensionDescriptor> {
    ExtensionDescriptor::new(&FieldModel::from_spec(&o.field)?, o.f, o.e)
}

fn ball(desc: &BuildingDescriptor, o: &Opts) -> Result<Ball> {
    Ball::new(desc, &desc.origin(), &BallOptions::full(o.radius))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let o = &cli.opts;
    if o.format == Format::Dot && !matches!(cli.cmd, Cmd::Ball { .. }) {
        return Err(Error::input("dot output is only available for ball"));
    }
    let out = match &cli.cmd {
        Cmd::Ball { center } => {
            let desc = descriptor(o)?;
            let c = match center {
                Some(s) => vertex(&desc, s)?,
                None => desc.origin(),
            };
            let b = Ball::new(&desc, &c, &BallOptions::full(o.radius))?;
            match o.format {
                Format::Json => Outcome::Pass(b.to_json()),
                Format::Dot => Outcome::Text(b.to_dot()),
            }
        }
        Cmd::Project { vertex: v } => {
            let desc = descriptor(o)?;
            let x = vertex(&desc, v)?;
            let p = desc.project_apartment(&x, None)?;
            let y = desc.apartment_vertex(&p, None)?;
            Outcome::Pass(json!({
                "vertex": desc.vertex_json(&x),
                "point": p.to_json(),
                "projection": desc.vertex_json(&y),
                "in_apartment": x == y,
            }))
        }
        Cmd::Label { vertex: v, labels, word } => {
            let desc = descriptor(o)?;
            match (v, labels, word) {
                (Some(v), None, None) => {
                    let x = vertex(&desc, v)?;
                    Outcome::Pass(json!({"vertex": desc.vertex_json(&x), "labels": desc.labelling_c(&x)}))
                }
                (None, Some(l), None) => {
                    let l: Vec<usize> = parse(l, "labels")?;
                    Outcome::Pass(json!({"labels": l, "vertex": desc.vertex_json(&desc.labelling_d(&l)?)}))
                }
                (None, None, Some(w)) => {
                    let w = AutWord::parse_json(&desc, &read_json(w)?)?;
                    let la = label_action(&w, &ball(&desc, o)?)?;
                    let ok = la.counterexample.is_none();
                    let v = la.to_json();
                    if ok {
                        Outcome::Pass(v)
                    } else {
                        Outcome::Fail(v)
                    }
                }
                _ => return Err(Error::input("label takes exactly one of --vertex, --labels, --word")),
            }
        }
        Cmd::Involution { vertex: v, mask } => {
            let desc = descriptor(o)?;
            let x = vertex(&desc, v)?;
            let mask: Vec<bool> = match mask {
                Some(m) => parse(m, "mask")?,
                None => vec![true; desc.r()],
            };
            if mask.len() != desc.r() {
                return Err(Error::input("mask needs one entry per factor"));
            }
            let y = desc.involution_lambda(&x, &mask);
            Outcome::Pass(json!({
                "vertex": desc.vertex_json(&x),
                "image": desc.vertex_json(&y),
                "labels": desc.labelling_c(&x),
                "image_labels": desc.labelling_c(&y),
            }))
        }
        Cmd::Subdivide { marking } => {
            let desc = descriptor(o)?;
            let m = Marking(match marking {
                Some(s) => parse(s, "marking")?,
                None => vec![2; desc.r()],
            });
            let b = ball(&desc, o)?;
            if let Some(why) = check_compatible(&b, &m)? {
                return Err(Error::input(format!("marking is not compatible: {why}")));
            }
            Outcome::Pass(subdivide_ball(&b, &m)?.to_json(&b))
        }
        Cmd::Eta { n } => {
            let charts = eta_chambers(dim(o), *n)?;
            Outcome::Pass(json!({
                "d": dim(o),
                "n": n,
                "count": charts.len(),
                "charts": charts.iter().map(|c| json!({"sigma": c.sigma, "a": c.a, "vertices": c.vertices()})).collect::<Vec<_>>(),
            }))
        }
        Cmd::Extend { vertex: v } => {
            let desc = descriptor(o)?;
            let ext = extension(o)?;
            match v {
                Some(v) => {
                    let x = vertex(&desc, v)?;
                    let y = nu_embed_poly(&x, &ext)?;
                    Outcome::Pass(json!({
                        "vertex": desc.vertex_json(&x),
                        "image": y.0.iter().map(|c| c.to_strings()).collect::<Vec<_>>(),
                        "f": o.f,
                        "e": o.e,
                    }))
                }
                None => {
                    let r = verify_induced_structure(&ball(&desc, o)?, &ext)?;
                    let v = json!({
                        "pass": r.pass,
                        "sub_vertices": r.sub_vertices,
                        "sub_chambers": r.sub_chambers,
                        "counterexample": r.counterexample,
                    });
                    if r.pass {
                        Outcome::Pass(v)
                    } else {
                        Outcome::Fail(v)
                    }
                }
            }
        }
        Cmd::DecomposeAut { sizes, map } => {
            let sizes: Vec<usize> = parse(sizes, "sizes")?;
            let g = ProductGraph::new(&sizes)?;
            match map {
                Some(m) => {
                    let f: Vec<usize> = parse(m, "map")?;
                    Outcome::Pass(decompose_hom(&g, &g, &f)?.to_json())
                }
                None => {
                    let (count, _) = count_automorphisms(&g);
                    let formula = aut_order_formula(&sizes);
                    let v = json!({"sizes": sizes, "count": count.to_string(), "formula": formula.to_string()});
                    if count == formula {
                        Outcome::Pass(v)
                    } else {
                        Outcome::Fail(v)
                    }
                }
            }
        }
        Cmd::NormalForm { word } => {
            let desc = descriptor(o)?;
            let w = AutWord::parse_json(&desc, &read_json(word)?)?;
            let nf = normal_form(&w, &ball(&desc, o)?)?;
            if nf.violations.is_empty() {
                Outcome::Pass(nf.to_json())
            } else {
                Outcome::Fail(nf.to_json())
            }
        }
        Cmd::Omega { point, open } => {
            let ext = extension(o)?;
            let x = RigidPoint::parse_json(&ext, &read_json(point)?)?;
            let n = o.depth.ok_or_else(|| Error::input("omega needs --depth"))?;
            let rep = omega_check(&x, n, !open, DEFAULT_ENUM_BUDGET)?;
            let mut v = rep.to_json(ext.base());
            v["depth"] = json!(n);
            v["closed"] = json!(!open);
            Outcome::Pass(v)
        }
        Cmd::Retract { point } => {
            let ext = extension(o)?;
            let x = RigidPoint::parse_json(&ext, &read_json(point)?)?;
            let n = match o.depth {
                Some(n) => n,
                None => min_depth(&x, 3, DEFAULT_ENUM_BUDGET)?
                    .ok_or_else(|| Error::budget("filtration depth", 4, 3))?,
            };
            let bases: Vec<Value> =
                (0..x.r()).map(|i| diagonalize_norm(&x, i, n, DEFAULT_ENUM_BUDGET).map(|d| d.to_json())).collect::<Result<_>>()?;
            Outcome::Pass(json!({"point": x.to_json(), "tau": tau_coordinates(&x).to_json(), "depth": n, "bases": bases}))
        }
        Cmd::Verify { suite } => {
            if !SUITES.contains(&suite.as_str()) {
                return Err(Error::input(format!("unknown suite {suite:?}; known: {}", SUITES.join(", "))));
            }
            let cfg = SuiteConfig { seed: o.seed, q: o.q, d: o.d };
            let rep = run_suite(suite, &cfg)?;
            if rep.pass() {
                Outcome::Pass(rep.to_json())
            } else {
                Outcome::Fail(rep.to_json())
            }
        }
    };
    Ok(out)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } | Error::WindowTooSmall { .. } => 3,
        Error::Violation(_) => 1,
        _ => 2,
    }
}

/// Ignores write errors so that piping into a closed reader is not a crash.
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Pass(v)) => {
            emit(&(serde_json::to_string_pretty(&v).unwrap() + "\n"));
            ExitCode::SUCCESS
        }
        Ok(Outcome::Fail(v)) => {
            emit(&(serde_json::to_string_pretty(&v).unwrap() + "\n"));
            ExitCode::from(1)
        }
        Ok(Outcome::Text(s)) => {
            emit(&s);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = exit_code(&e);
            emit(&(serde_json::to_string_pretty(&json!({"error": e.to_string(), "exit_code": code})).unwrap() + "\n"));
            ExitCode::from(code)
        }
    }
}
