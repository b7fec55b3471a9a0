//! Command-line front end.
//!
//! Exit codes: 0 success, 1 negative answer (invalid model, step not
//! enabled, not isomorphic), 2 state separation fails, 3 forward closure
//! fails, 4 invalid input or malformed file, 5 internal error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::exec::Exec;
use crate::explore::ExploreLimits;
use crate::membrane_structure::MembraneStructure;
use crate::membrane_system::{BasicMembraneSystem, VectorMultiRule};
use crate::multiset::Multiset;
use crate::ptl_net::{Mode, PtlNet};
use crate::synthesis::{self, Failure, Outcome, SynthesisError, SynthesisProblem, Synthesized};
use crate::transition_system::StepTransitionSystem;
use crate::translate::{bms_to_ptl, ptl_to_bms};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_SEPARATION: i32 = 2;
pub const EXIT_CLOSURE: i32 = 3;
pub const EXIT_INVALID: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "memsynth", version, about = "Simulate, translate and synthesise membrane systems and PTL-nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a .bms, .ptl or .sts file against its well-formedness rules.
    Validate {
        file: PathBuf,
        /// Membrane structure to check a .ptl net for being spanned over.
        #[arg(long)]
        structure: Option<PathBuf>,
    },
    /// Execute a sequence of steps from the initial marking or configuration.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "free")]
        mode: Mode,
        /// A step as a JSON object `{"t": 2}`; for .bms files either a flat
        /// object of rule names or an array with one object per membrane.
        #[arg(long = "step")]
        steps: Vec<String>,
    },
    /// Build the concurrent reachability graph of a .bms or .ptl model.
    Crg {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "free")]
        mode: Mode,
        #[arg(long, default_value_t = ExploreLimits::default().max_states)]
        max_states: usize,
        #[arg(long, default_value_t = ExploreLimits::default().max_depth)]
        max_depth: usize,
        /// Where to write the .sts graph; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Explore without the thread pool.
        #[arg(long)]
        sequential: bool,
    },
    /// Translate a .bms into a .ptl net or a spanned .ptl net into a .bms.
    Translate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sidecar file for the transition/rule and place maps.
        #[arg(long)]
        maps: Option<PathBuf>,
        /// Membrane structure, required for .ptl input.
        #[arg(long)]
        structure: Option<PathBuf>,
    },
    /// Synthesise a net (and optionally a membrane system) from a .sts file.
    Synthesize {
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        ts: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        /// JSON object mapping every action to its membrane.
        #[arg(long)]
        locations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        bms: Option<PathBuf>,
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Check two .sts files for isomorphism under an action map.
    CheckIso {
        a: PathBuf,
        b: PathBuf,
        /// JSON object action→action; the identity when absent.
        #[arg(long)]
        phi: Option<PathBuf>,
    },
    /// Render a .bms, .ptl or .sts file in DOT.
    Dot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// An error together with the exit code it maps to.
struct Fail {
    code: i32,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail {
            code: EXIT_INVALID,
            err: e.into(),
        }
    }
}

type CmdResult = Result<i32, Fail>;

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Fail { code, err }) => {
            eprintln!("error: {err:#}");
            code
        }
    }
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Validate { file, structure } => validate(&file, structure.as_deref()),
        Command::Simulate { input, mode, steps } => simulate(&input, mode, &steps),
        Command::Crg {
            input,
            mode,
            max_states,
            max_depth,
            out,
            dot,
            sequential,
        } => {
            if max_states == 0 || max_depth == 0 {
                return Err(anyhow!("--max-states and --max-depth must be positive").into());
            }
            let exec = if sequential { Exec::Sequential } else { Exec::default() };
            crg(
                &input,
                mode,
                ExploreLimits::new(max_states, max_depth),
                out.as_deref(),
                dot.as_deref(),
                exec,
            )
        }
        Command::Translate {
            input,
            out,
            maps,
            structure,
        } => translate(&input, &out, maps.as_deref(), structure.as_deref()),
        Command::Synthesize {
            mode,
            ts,
            structure,
            locations,
            out,
            bms,
            certificate,
            dot,
            sequential,
        } => {
            let problem = SynthesisProblem {
                ts: read_json(&ts)?,
                mu: read_json(&structure)?,
                loc: read_json(&locations)?,
                mode,
            };
            let exec = if sequential { Exec::Sequential } else { Exec::default() };
            synthesize(&problem, &out, bms.as_deref(), certificate.as_deref(), dot.as_deref(), exec)
        }
        Command::CheckIso { a, b, phi } => check_iso(&a, &b, phi.as_deref()),
        Command::Dot { input, out } => {
            let text = match kind(&input)? {
                Kind::Bms => bms_to_ptl(&read_json::<BasicMembraneSystem>(&input)?)?.0.to_dot(),
                Kind::Ptl => read_json::<PtlNet>(&input)?.to_dot(),
                Kind::Sts => read_json::<StepTransitionSystem>(&input)?.to_dot(),
            };
            emit(out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Bms,
    Ptl,
    Sts,
}

fn kind(path: &Path) -> Result<Kind, Fail> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bms") => Ok(Kind::Bms),
        Some("ptl") => Ok(Kind::Ptl),
        Some("sts") => Ok(Kind::Sts),
        _ => Err(anyhow!("{}: expected a .bms, .ptl or .sts file", path.display()).into()),
    }
}

/// Reads a JSON file, reporting parse and shape errors as `path:line:column`.
fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Fail> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
        anyhow!("{}:{}:{}: {}", path.display(), e.line(), e.column(), msg).into()
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("model values serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), Fail> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(|err| Fail {
            code: EXIT_INTERNAL,
            err,
        })
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Fail> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report<T: std::fmt::Display>(what: &str, violations: &[T]) -> i32 {
    if violations.is_empty() {
        println!("{what}: valid");
        EXIT_OK
    } else {
        println!("{what}: {} violation(s)", violations.len());
        for v in violations {
            println!("  {v}");
        }
        EXIT_NEGATIVE
    }
}

fn validate(file: &Path, structure: Option<&Path>) -> CmdResult {
    let name = file.display().to_string();
    Ok(match kind(file)? {
        Kind::Bms => report(&name, &read_json::<BasicMembraneSystem>(file)?.validate()),
        Kind::Sts => report(&name, &read_json::<StepTransitionSystem>(file)?.validate()),
        Kind::Ptl => {
            let net: PtlNet = read_json(file)?;
            match structure {
                Some(s) => {
                    let mu: MembraneStructure = read_json(s)?;
                    let tree = mu.validate_tree();
                    if !tree.is_empty() {
                        return Ok(report(&s.display().to_string(), &tree));
                    }
                    report(&name, &net.check_spanned(&mu))
                }
                None => report::<String>(&name, &[]),
            }
        }
    })
}

fn parse_step(text: &str) -> Result<Multiset<String>, Fail> {
    serde_json::from_str(text).map_err(|e| anyhow!("step `{text}`: {e}").into())
}

fn simulate(input: &Path, mode: Mode, steps: &[String]) -> CmdResult {
    match kind(input)? {
        Kind::Ptl => {
            let net: PtlNet = read_json(input)?;
            let mut m = net.initial_marking().clone();
            println!("{m}");
            for text in steps {
                let step = parse_step(text)?;
                if !net.is_enabled(&m, &step, mode)? {
                    println!("step {step} is not {mode}-enabled at {m}");
                    return Ok(EXIT_NEGATIVE);
                }
                m = net.execute(&m, &step)?;
                println!("{step} -> {m}");
            }
        }
        Kind::Bms => {
            let bms: BasicMembraneSystem = read_json(input)?;
            let mut c = bms.initial().clone();
            println!("{c}");
            for text in steps {
                let r = if text.trim_start().starts_with('[') {
                    let parts: Vec<Multiset<String>> =
                        serde_json::from_str(text).map_err(|e| anyhow!("step `{text}`: {e}"))?;
                    VectorMultiRule::new(parts)
                } else {
                    bms.vector_from_step(&parse_step(text)?)?
                };
                if !bms.is_enabled(&c, &r, mode)? {
                    println!("vector multi-rule {r} is not {mode}-enabled at {c}");
                    return Ok(EXIT_NEGATIVE);
                }
                c = bms.evolve(&c, &r)?;
                println!("{r} -> {c}");
            }
        }
        Kind::Sts => return Err(anyhow!("cannot simulate a transition system; use a .bms or .ptl file").into()),
    }
    Ok(EXIT_OK)
}

fn crg(
    input: &Path,
    mode: Mode,
    limits: ExploreLimits,
    out: Option<&Path>,
    dot: Option<&Path>,
    exec: Exec,
) -> CmdResult {
    let (ts, truncated) = match kind(input)? {
        Kind::Bms => {
            let bms: BasicMembraneSystem = read_json(input)?;
            let g = bms.reachability_graph_with(mode, limits, exec)?;
            (g.ts, g.truncated)
        }
        Kind::Ptl => {
            let net: PtlNet = read_json(input)?;
            let g = net.reachability_graph_with(mode, limits, exec)?;
            (g.ts, g.truncated)
        }
        Kind::Sts => return Err(anyhow!("input is already a transition system").into()),
    };
    let summary = json!({
        "mode": mode,
        "states": ts.states().len(),
        "arcs": ts.num_arcs(),
        "truncated": truncated,
    });
    emit(out, &to_json(&ts))?;
    if let Some(d) = dot {
        write_file(d, &ts.to_dot())?;
    }
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    if truncated {
        eprintln!(
            "warning: exploration truncated at {} states / depth {}; the graph is a prefix of the full one",
            limits.max_states, limits.max_depth
        );
    }
    Ok(EXIT_OK)
}

fn translate(input: &Path, out: &Path, maps: Option<&Path>, structure: Option<&Path>) -> CmdResult {
    let (text, sidecar) = match (kind(input)?, kind(out)?) {
        (Kind::Bms, Kind::Ptl) => {
            let (net, m) = bms_to_ptl(&read_json(input)?)?;
            (to_json(&net), to_json(&m))
        }
        (Kind::Ptl, Kind::Bms) => {
            let s = structure.ok_or_else(|| anyhow!("--structure is required to translate a net"))?;
            let (bms, m) = ptl_to_bms(&read_json(input)?, &read_json(s)?)?;
            (to_json(&bms), to_json(&m))
        }
        _ => return Err(anyhow!("translate converts .bms to .ptl or .ptl to .bms").into()),
    };
    write_file(out, &text)?;
    if let Some(m) = maps {
        write_file(m, &sidecar)?;
    }
    Ok(EXIT_OK)
}

fn synthesize(
    problem: &SynthesisProblem,
    out: &Path,
    bms_out: Option<&Path>,
    certificate: Option<&Path>,
    dot: Option<&Path>,
    exec: Exec,
) -> CmdResult {
    let classify = |e: SynthesisError| -> Fail {
        let code = match e {
            SynthesisError::Certificate(_) => EXIT_INTERNAL,
            _ => EXIT_INVALID,
        };
        Fail { code, err: e.into() }
    };
    let (result, bms) = if bms_out.is_some() {
        match synthesis::synthesize_bms_with(problem, exec).map_err(classify)? {
            Outcome::Success(s) => (Outcome::Success(s.net), Some(s.bms)),
            Outcome::Failure(f) => (Outcome::Failure(f), None),
        }
    } else {
        (synthesis::synthesize_with(problem, exec).map_err(classify)?, None)
    };
    let s: Synthesized = match result {
        Outcome::Success(s) => s,
        Outcome::Failure(f) => {
            eprintln!("{f}");
            return Ok(match f {
                Failure::Separation { .. } => EXIT_SEPARATION,
                Failure::Closure { .. } => EXIT_CLOSURE,
            });
        }
    };
    write_file(out, &to_json(&s.net))?;
    if let (Some(path), Some(bms)) = (bms_out, bms) {
        write_file(path, &to_json(&bms))?;
    }
    if let Some(d) = dot {
        write_file(d, &s.net.to_dot())?;
    }
    if let Some(c) = certificate {
        let phi: BTreeMap<&String, &String> = problem.ts.actions().iter().map(|t| (t, t)).collect();
        let witnesses: Vec<_> = s
            .witnesses
            .iter()
            .map(|w| {
                json!({
                    "place": w.place,
                    "location": w.region.location,
                    "reasons": w.reasons.iter().map(ToString::to_string).collect::<Vec<_>>(),
                })
            })
            .collect();
        let doc = json!({ "mode": problem.mode, "phi": phi, "nu": s.certificate, "witnesses": witnesses });
        write_file(c, &to_json(&doc))?;
    }
    println!(
        "synthesised {} place(s), {} transition(s); reachability graph verified isomorphic",
        s.net.places().len(),
        s.net.transitions().len()
    );
    for w in &s.witnesses {
        let reasons: Vec<String> = w.reasons.iter().map(ToString::to_string).collect();
        println!("  {}: {}", w.place, reasons.join("; "));
    }
    Ok(EXIT_OK)
}

fn check_iso(a: &Path, b: &Path, phi: Option<&Path>) -> CmdResult {
    let ta: StepTransitionSystem = read_json(a)?;
    let tb: StepTransitionSystem = read_json(b)?;
    let phi: BTreeMap<String, String> = match phi {
        Some(p) => read_json(p)?,
        None => ta.actions().iter().map(|t| (t.clone(), t.clone())).collect(),
    };
    match ta.check_isomorphic(&tb, &phi)? {
        Some(nu) => {
            print!("{}", to_json(&nu));
            Ok(EXIT_OK)
        }
        None => {
            println!("not isomorphic under the given action map");
            Ok(EXIT_NEGATIVE)
        }
    }
}
