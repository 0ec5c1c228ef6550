//! Command-line front end and the two file formats for magic rectangle sets.
//!
//! Exit codes: 0 success, 1 invalid document or failed construction, 2 usage
//! or parse error, 3 `NotExists` or no witness, 4 `Open`, 5 search budget
//! exhausted. Errors go to standard error as one JSON line.

use std::fmt::Write as _;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::constructions::{construct, verify_mrs, MagicRectangleSet};
use crate::decider::{decide, existence_table, open_case_catalog, Status};
use crate::error::{Error, Result};
use crate::group::{AbelianGroup, GroupElement};
use crate::oracle::{cross_validate, enumerate_sum_pairs, search_mrs, SearchResult, DEFAULT_BUDGET};

pub const BUDGET_VAR: &str = "MRK_BUDGET";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONE: i32 = 3;
pub const EXIT_OPEN: i32 = 4;
pub const EXIT_UNKNOWN: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "mrs", version, about = "Magic rectangle sets over finite Abelian groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Grid,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Existence verdict for a group and shape.
    Decide {
        /// Group as a product of cyclic factors, e.g. Z2xZ4xZ3.
        #[arg(long)]
        group: String,
        /// Rectangle size and count as AxBxC; C defaults to 1.
        #[arg(long)]
        shape: String,
    },
    /// Construct an instance.
    Build {
        /// Group as a product of cyclic factors, e.g. Z2xZ4xZ3.
        #[arg(long)]
        group: String,
        /// Rectangle size and count as AxBxC; C defaults to 1.
        #[arg(long)]
        shape: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Check a JSON or grid document.
    Verify { file: std::path::PathBuf },
    /// Exhaustive search for a witness.
    Search {
        /// Group as a product of cyclic factors, e.g. Z2xZ4xZ3.
        #[arg(long)]
        group: String,
        /// Rectangle size and count as AxBxC; C defaults to 1.
        #[arg(long)]
        shape: String,
        /// Search node limit; falls back to MRK_BUDGET, then a built-in default.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Every feasible (omega, delta) pair, by exhaustive search.
    Sums {
        /// Group as a product of cyclic factors, e.g. Z2xZ4xZ3.
        #[arg(long)]
        group: String,
        /// Rectangle size and count as AxBxC; C defaults to 1.
        #[arg(long)]
        shape: String,
        /// Search node limit; falls back to MRK_BUDGET, then a built-in default.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// CSV of unresolved instances.
    OpenCases {
        /// Largest group order to include.
        #[arg(long)]
        max_order: u64,
    },
    /// CSV of verdicts for every group and shape.
    Table {
        /// Largest group order to include.
        #[arg(long)]
        max_order: u64,
    },
    /// Compare verdicts, constructions and search.
    ValidateSuite {
        /// Largest group order to include.
        #[arg(long)]
        max_order: u64,
        /// Search node limit; falls back to MRK_BUDGET, then a built-in default.
        #[arg(long)]
        budget: Option<u64>,
    },
}

/// What a command printed and how it exited.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutput {
    fn ok(code: i32, stdout: String) -> Self {
        CliOutput {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(code: i32, kind: &str, message: &str) -> Self {
        let line = json!({ "error": kind, "message": message.replace('\n', " ").trim() });
        CliOutput {
            code,
            stdout: String::new(),
            stderr: format!("{line}\n"),
        }
    }
}

/// Serialized form of a [`MagicRectangleSet`]. Coordinates follow the
/// canonical moduli listed in `group`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MrsDocument {
    pub group: Vec<u64>,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub omega: Vec<u64>,
    pub delta: Vec<u64>,
    pub rectangles: Vec<Vec<Vec<Vec<u64>>>>,
    pub meta: DocumentMeta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub route: String,
    pub version: String,
}

impl MrsDocument {
    pub fn from_mrs(mrs: &MagicRectangleSet, route: &str) -> Self {
        MrsDocument {
            group: mrs.group.moduli().to_vec(),
            a: mrs.a,
            b: mrs.b,
            c: mrs.c,
            omega: mrs.omega.0.clone(),
            delta: mrs.delta.0.clone(),
            rectangles: mrs
                .rectangles
                .iter()
                .map(|g| g.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect())
                .collect(),
            meta: DocumentMeta {
                route: route.into(),
                version: env!("CARGO_PKG_VERSION").into(),
            },
        }
    }

    /// Entries are taken as written; range and sum checks are left to
    /// [`verify_mrs`].
    pub fn to_mrs(&self) -> Result<MagicRectangleSet> {
        let group = AbelianGroup::from_canonical(&self.group)?;
        Ok(MagicRectangleSet {
            group,
            a: self.a,
            b: self.b,
            c: self.c,
            rectangles: self
                .rectangles
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|r| r.iter().map(|x| GroupElement(x.clone())).collect())
                        .collect()
                })
                .collect(),
            omega: GroupElement(self.omega.clone()),
            delta: GroupElement(self.delta.clone()),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }
}

/// Parses `AxBxC`, with `C` defaulting to 1.
pub fn parse_shape(text: &str) -> Result<(usize, usize, usize)> {
    let bad = || Error::MalformedShape(text.to_string());
    let parts: Vec<&str> = text.trim().split(['x', 'X']).collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    if nums.contains(&0) {
        return Err(bad());
    }
    Ok((nums[0], nums[1], nums.get(2).copied().unwrap_or(1)))
}

fn element_text(x: &GroupElement) -> String {
    let coords: Vec<String> = x.0.iter().map(u64::to_string).collect();
    format!("({})", coords.join(","))
}

/// Text rendering with one aligned block per rectangle.
pub fn format_grid(mrs: &MagicRectangleSet) -> String {
    let width = mrs
        .rectangles
        .iter()
        .flatten()
        .flatten()
        .map(|x| element_text(x).len())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    writeln!(out, "group {}", mrs.group).unwrap();
    writeln!(out, "shape {}x{}x{}", mrs.a, mrs.b, mrs.c).unwrap();
    writeln!(out, "omega {}", element_text(&mrs.omega)).unwrap();
    writeln!(out, "delta {}", element_text(&mrs.delta)).unwrap();
    for (s, grid) in mrs.rectangles.iter().enumerate() {
        writeln!(out, "\nrectangle {s}").unwrap();
        for row in grid {
            let cells: Vec<String> = row
                .iter()
                .map(|x| format!("{:>width$}", element_text(x)))
                .collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
    }
    out
}

fn parse_element(token: &str) -> Result<GroupElement> {
    let bad = || Error::Document(format!("bad element `{token}`"));
    let inner = token
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(bad)?;
    let coords = inner
        .split(',')
        .map(|c| c.trim().parse::<u64>().map_err(|_| bad()))
        .collect::<Result<Vec<u64>>>()?;
    Ok(GroupElement(coords))
}

fn header<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    line.and_then(|l| l.strip_prefix(key))
        .and_then(|l| l.strip_prefix(' '))
        .map(str::trim)
        .ok_or_else(|| Error::Document(format!("expected `{key}` line")))
}

/// Parses the output of [`format_grid`].
pub fn parse_grid(text: &str) -> Result<MagicRectangleSet> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let group = AbelianGroup::parse(header(lines.next(), "group")?)?;
    let moduli = group.moduli().to_vec();
    let group = AbelianGroup::from_canonical(&moduli)?;
    let (a, b, c) = parse_shape(header(lines.next(), "shape")?)?;
    let omega = parse_element(header(lines.next(), "omega")?)?;
    let delta = parse_element(header(lines.next(), "delta")?)?;
    let mut rectangles = Vec::new();
    let mut current: Option<Vec<Vec<GroupElement>>> = None;
    for line in lines {
        if line.starts_with("rectangle") {
            rectangles.extend(current.take());
            current = Some(Vec::new());
            continue;
        }
        let row = line
            .split_whitespace()
            .map(parse_element)
            .collect::<Result<Vec<_>>>()?;
        current
            .as_mut()
            .ok_or_else(|| Error::Document("row outside a rectangle".into()))?
            .push(row);
    }
    rectangles.extend(current);
    Ok(MagicRectangleSet {
        group,
        a,
        b,
        c,
        rectangles,
        omega,
        delta,
    })
}

/// Reads either format, choosing JSON when the text starts with `{`.
pub fn parse_document(text: &str) -> Result<MagicRectangleSet> {
    if text.trim_start().starts_with('{') {
        MrsDocument::from_json(text)?.to_mrs()
    } else {
        parse_grid(text)
    }
}

fn exit_for(status: Status) -> i32 {
    match status {
        Status::Exists => EXIT_OK,
        Status::NotExists => EXIT_NONE,
        Status::Open => EXIT_OPEN,
    }
}

fn budget_from(flag: Option<u64>, env: Option<&str>) -> std::result::Result<u64, CliOutput> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match env {
        None => Ok(DEFAULT_BUDGET),
        Some(v) => v.trim().parse().map_err(|_| {
            CliOutput::error(EXIT_USAGE, "usage", &format!("{BUDGET_VAR} must be an integer, got `{v}`"))
        }),
    }
}

fn instance(group: &str, shape: &str) -> Result<(AbelianGroup, usize, usize, usize)> {
    let g = AbelianGroup::parse(group)?;
    let (a, b, c) = parse_shape(shape)?;
    decide(a, b, c, &g)?;
    Ok((g, a, b, c))
}

fn usage(e: Error) -> CliOutput {
    CliOutput::error(EXIT_USAGE, "usage", &e.to_string())
}

fn json_line<T: Serialize>(value: &T) -> String {
    format!("{}\n", serde_json::to_string(value).expect("reports serialize"))
}

/// Runs one command. `argv[0]` is the program name. `budget_env` stands in
/// for the `MRK_BUDGET` variable.
pub fn run_with_env<I, T>(argv: I, budget_env: Option<&str>) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return CliOutput::ok(EXIT_OK, e.to_string());
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("usage error");
            return CliOutput::error(EXIT_USAGE, "usage", first.trim_start_matches("error: "));
        }
    };
    match cli.command {
        Command::Decide { group, shape } => {
            let (g, a, b, c) = match instance(&group, &shape) {
                Ok(x) => x,
                Err(e) => return usage(e),
            };
            let v = decide(a, b, c, &g).expect("checked above");
            CliOutput::ok(exit_for(v.status), json_line(&v))
        }
        Command::Build { group, shape, format } => {
            let (g, a, b, c) = match instance(&group, &shape) {
                Ok(x) => x,
                Err(e) => return usage(e),
            };
            let v = decide(a, b, c, &g).expect("checked above");
            if v.status != Status::Exists {
                let mut out = CliOutput::error(exit_for(v.status), "not-constructible", &v.reason);
                out.stdout = json_line(&v);
                return out;
            }
            match construct(a, b, c, &g) {
                Ok(m) => {
                    let route = v.route.map(|r| r.to_string()).unwrap_or_default();
                    let text = match format {
                        Format::Json => MrsDocument::from_mrs(&m, &route).to_json() + "\n",
                        Format::Grid => format_grid(&m),
                    };
                    CliOutput::ok(EXIT_OK, text)
                }
                Err(e) => CliOutput::error(EXIT_INVALID, "construction", &e.to_string()),
            }
        }
        Command::Verify { file } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => return CliOutput::error(EXIT_USAGE, "io", &format!("{}: {e}", file.display())),
            };
            match parse_document(&text) {
                Ok(m) => {
                    let report = verify_mrs(&m);
                    let code = if report.is_valid() { EXIT_OK } else { EXIT_INVALID };
                    CliOutput::ok(code, json_line(&report))
                }
                Err(e) => CliOutput::error(EXIT_USAGE, "parse", &e.to_string()),
            }
        }
        Command::Search { group, shape, budget } => {
            let budget = match budget_from(budget, budget_env) {
                Ok(b) => b,
                Err(out) => return out,
            };
            let (g, a, b, c) = match instance(&group, &shape) {
                Ok(x) => x,
                Err(e) => return usage(e),
            };
            let out = search_mrs(a, b, c, &g, budget).expect("checked above");
            let code = match out.result {
                SearchResult::Found(_) => EXIT_OK,
                SearchResult::NoneExists => EXIT_NONE,
                SearchResult::Unknown => EXIT_UNKNOWN,
            };
            let report = json!({
                "result": out.label(),
                "nodes_expanded": out.nodes_expanded,
                "budget": out.budget,
                "witness": out.witness().map(|m| MrsDocument::from_mrs(m, "search")),
            });
            CliOutput::ok(code, json_line(&report))
        }
        Command::Sums { group, shape, budget } => {
            let budget = match budget_from(budget, budget_env) {
                Ok(b) => b,
                Err(out) => return out,
            };
            let (g, a, b, c) = match instance(&group, &shape) {
                Ok(x) => x,
                Err(e) => return usage(e),
            };
            let found = enumerate_sum_pairs(a, b, c, &g, budget).expect("checked above");
            let pairs: Vec<_> = found
                .pairs
                .iter()
                .map(|(w, d)| json!({ "omega": w.0, "delta": d.0 }))
                .collect();
            let code = if found.complete { EXIT_OK } else { EXIT_UNKNOWN };
            CliOutput::ok(code, json_line(&json!({ "pairs": pairs, "complete": found.complete })))
        }
        Command::OpenCases { max_order } => {
            let mut out = String::from("group,a,b,c,status,reason\n");
            for o in open_case_catalog(max_order) {
                writeln!(out, "{},{},{},{},Open,open-case-{}", o.group, o.a, o.b, o.c, o.case_id).unwrap();
            }
            CliOutput::ok(EXIT_OK, out)
        }
        Command::Table { max_order } => {
            let mut out = String::from("group,a,b,c,status,reason\n");
            for i in existence_table(max_order) {
                let v = &i.verdict;
                writeln!(out, "{},{},{},{},{},{}", i.group, i.a, i.b, i.c, v.status, v.reason).unwrap();
            }
            CliOutput::ok(EXIT_OK, out)
        }
        Command::ValidateSuite { max_order, budget } => {
            let budget = match budget_from(budget, budget_env) {
                Ok(b) => b,
                Err(out) => return out,
            };
            let report = cross_validate(max_order, budget);
            let code = if report.disagreements.is_empty() { EXIT_OK } else { EXIT_INVALID };
            CliOutput::ok(code, json_line(&report))
        }
    }
}

/// Runs one command, reading the budget default from `MRK_BUDGET`.
pub fn run_cli<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(BUDGET_VAR).ok();
    run_with_env(argv, env.as_deref())
}
