//! Command line front end. Wires the text grammar and the JSON codecs to
//! the computations and renders results as text, JSON, or TSV with stable
//! formatting: identical arguments and seed give byte-identical output.
//!
//! Exit codes: 0 on success or a passing check, 1 on a failing check, 2 on
//! usage, parse, or computation errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cellular::{
    self, builtin, chow_witt_table, derive_I_table, BuiltinSpace, CellularVariety,
    CochainComplexSpec, FinAbGroup, System,
};
use crate::exactnum::{rat, IntPoly, RatFunc, Rational, RealAlg};
use crate::gersten::{
    self, CurveSpec, GerstenCochain, LineBundleTwist, LocalSystem, Payload, TopClass, TopData,
};
use crate::parse;
use crate::quadform::{
    self, ClosedPoint, DiagonalForm, FieldTag, Ordering as FieldOrdering, WittClass, WittData,
};
use crate::realspec::{self, SpecValue};

#[derive(Parser)]
#[command(
    name = "wittcycle",
    version,
    about = "Exact Witt group and cohomology computations for real curves and cellular varieties"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output to a file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and compare diagonal forms.
    #[command(subcommand)]
    Form(FormCmd),
    /// Second residue class of a form at a closed point.
    Residue { form: String, point: String },
    /// Sign sections over the real spectrum and their boundary values.
    #[command(subcommand)]
    Section(SectionCmd),
    /// Cochain operations in the residue complex of a curve.
    #[command(subcommand)]
    Gersten(GerstenCmd),
    /// Cohomology of a curve for one twist, level, and degree.
    Cohomology {
        curve: String,
        /// Degree of the twisting line bundle on the projective line.
        #[arg(long, default_value_t = 0)]
        twist: i64,
        /// Power of the fundamental ideal.
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Cohomological degree, 0 or 1.
        #[arg(long, default_value_t = 0)]
        degree: u8,
    },
    /// Bigraded table of derived groups for a cellular variety.
    Table {
        /// Builtin name (RPn, Sn, P1) or a path to a complex in JSON.
        space: String,
    },
    /// Chow-Witt groups of a cellular variety as fiber products.
    Chowwitt {
        /// Builtin name (RPn, Sn, P1) or a path to a complex in JSON.
        space: String,
        /// Use the twisted system on the sheaf side.
        #[arg(long)]
        twisted: bool,
    },
    /// Run a named verification suite and report every check.
    Verify {
        suite: Suite,
        /// Number of random samples for the randomized suites.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Seed for the randomized suites; required there, ignored elsewhere.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum FormCmd {
    /// Parse a form literal and print its canonical shape.
    Parse { form: String },
    /// Decide equality of two forms in the Witt group.
    WittEqual { left: String, right: String },
    /// Sign section of a form over the real spectrum.
    Signature { form: String },
}

#[derive(Subcommand)]
enum SectionCmd {
    /// Parse a section literal and print its canonical shape.
    Parse { section: String },
    /// Jump of a section at a real point, with the dual frame.
    Beta { section: String, point: String },
    /// Boundary values of the sign section of a form, infinity included.
    DRe { form: String },
}

#[derive(Subcommand)]
enum GerstenCmd {
    /// Differential of a degree zero cochain on a curve.
    D0 { cochain: String, curve: String },
    /// Check that a cochain is a cocycle on a curve.
    Cocycle { cochain: String, curve: String },
    /// Decide whether a degree one cochain bounds; print a primitive.
    Coboundary { cochain: String, curve: String },
    /// Sum of transfers of a degree one cochain, with the frame at infinity.
    Transfer { cochain: String },
    /// Euler cochain of the line bundle O(d) on the projective line.
    Euler { d: i64 },
    /// Class of a cocycle on the real points of a curve.
    CycleClass { cochain: String, curve: String },
    /// Residues of a degree zero cochain along a closed subset.
    Localize {
        cochain: String,
        /// Points of the closed subset, separated by semicolons.
        #[arg(long = "at", required = true, value_delimiter = ';')]
        at: Vec<String>,
    },
    /// Pushforward of a residue class from a closed point.
    Pushforward {
        point: String,
        /// Signature at a real point, or a mod 2 rank at a complex one.
        value: String,
        /// Level of the class being pushed.
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
    /// Cup product of a degree zero cochain with another cochain.
    Cup {
        left: String,
        right: String,
        curve: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    #[value(name = "thmA7")]
    ThmA7,
    #[value(name = "prop410n1")]
    Prop410N1,
    #[value(name = "eulerP1")]
    EulerP1,
    #[value(name = "bocksteinRP2")]
    BocksteinRP2,
    #[value(name = "triangle316")]
    Triangle316,
    #[value(name = "localizationP1")]
    LocalizationP1,
    #[value(name = "productSign")]
    ProductSign,
}

/// Parse the process arguments, run one command, emit the result.
pub fn run() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = match execute(&cli.command) {
        Ok(out) => out,
        Err(msg) => error_output(&msg),
    };
    let rendered = match cli.format {
        Format::Text => with_newline(&out.text),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("serializable value");
            s.push('\n');
            s
        }
        Format::Tsv => with_newline(&out.tsv),
    };
    if let Some(path) = &cli.out {
        if let Err(e) = fs::write(path, &rendered) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 2;
        }
    } else {
        print!("{rendered}");
    }
    match out.status {
        Status::Pass => 0,
        Status::Fail => 1,
        Status::Error => 2,
    }
}

fn with_newline(s: &str) -> String {
    let mut s = s.to_string();
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Error,
}

struct Output {
    status: Status,
    text: String,
    json: Value,
    tsv: String,
}

/// One comparison of a report: the check passes when both sides agree.
struct Item {
    check: String,
    expected: String,
    got: String,
}

impl Item {
    fn new(check: impl Into<String>, expected: impl Into<String>, got: impl Into<String>) -> Self {
        Item {
            check: check.into(),
            expected: expected.into(),
            got: got.into(),
        }
    }

    fn ok(&self) -> bool {
        self.expected == self.got
    }
}

struct Report {
    items: Vec<Item>,
}

fn report_output(r: &Report) -> Output {
    let failures = r.items.iter().filter(|i| !i.ok()).count();
    let status = if failures == 0 { Status::Pass } else { Status::Fail };
    let mut lines = Vec::with_capacity(r.items.len() + 1);
    for item in &r.items {
        if item.ok() {
            lines.push(format!("pass {}", item.check));
        } else {
            lines.push(format!(
                "FAIL {}: expected {}, got {}",
                item.check, item.expected, item.got
            ));
        }
    }
    lines.push(match status {
        Status::Pass => format!("status: pass ({} checks)", r.items.len()),
        _ => format!("status: fail ({failures} of {} checks)", r.items.len()),
    });
    let items: Vec<Value> = r
        .items
        .iter()
        .map(|i| json!({"check": i.check, "expected": i.expected, "got": i.got}))
        .collect();
    let json = json!({
        "status": if failures == 0 { "pass" } else { "fail" },
        "items": items,
    });
    let tsv = std::iter::once("check\texpected\tgot".to_string())
        .chain(
            r.items
                .iter()
                .map(|i| format!("{}\t{}\t{}", i.check, i.expected, i.got)),
        )
        .collect::<Vec<_>>()
        .join("\n");
    Output {
        status,
        text: lines.join("\n"),
        json,
        tsv,
    }
}

fn error_output(msg: &str) -> Output {
    Output {
        status: Status::Error,
        text: format!("error: {msg}"),
        json: json!({
            "status": "error",
            "items": [{"check": "run", "expected": "success", "got": msg}],
        }),
        tsv: format!("check\texpected\tgot\nrun\tsuccess\t{msg}"),
    }
}

/// Key-value output; a single pair prints as the bare value.
fn fields_output(pairs: &[(&str, String)]) -> Output {
    let text = if pairs.len() == 1 {
        pairs[0].1.clone()
    } else {
        pairs
            .iter()
            .map(|(k, v)| format!("{k}: {v}"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let mut obj = serde_json::Map::new();
    for (k, v) in pairs {
        obj.insert((*k).into(), Value::String(v.clone()));
    }
    let tsv = format!(
        "{}\n{}",
        pairs.iter().map(|p| p.0).collect::<Vec<_>>().join("\t"),
        pairs
            .iter()
            .map(|p| p.1.as_str())
            .collect::<Vec<_>>()
            .join("\t")
    );
    Output {
        status: Status::Pass,
        text,
        json: Value::Object(obj),
        tsv,
    }
}

fn table_output(meta: Vec<(&str, Value)>, columns: Vec<String>, rows: Vec<Vec<String>>) -> Output {
    let mut widths: Vec<usize> = columns.iter().map(|c| c.len()).collect();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:<w$}", c, w = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut text_lines = vec![line(&columns)];
    for row in &rows {
        text_lines.push(line(row));
    }
    let mut obj = serde_json::Map::new();
    for (k, v) in meta {
        obj.insert(k.into(), v);
    }
    obj.insert("columns".into(), json!(columns));
    obj.insert("rows".into(), json!(rows));
    let tsv = std::iter::once(columns.join("\t"))
        .chain(rows.iter().map(|r| r.join("\t")))
        .collect::<Vec<_>>()
        .join("\n");
    Output {
        status: Status::Pass,
        text: text_lines.join("\n"),
        json: Value::Object(obj),
        tsv,
    }
}

fn cochain_output(c: &GerstenCochain) -> Output {
    let payload = match c.payload() {
        Payload::Form(f) => f.to_string(),
        Payload::Residues(m) => residues_string(m),
    };
    Output {
        status: Status::Pass,
        text: c.to_string(),
        json: cochain_to_json(c),
        tsv: format!(
            "degree\tlevel\ttwist\tpayload\n{}\t{}\t{}\t{}",
            c.degree(),
            c.level(),
            c.twist().degree(),
            payload
        ),
    }
}

fn es<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn execute(cmd: &Command) -> Result<Output, String> {
    match cmd {
        Command::Form(op) => run_form(op),
        Command::Residue { form, point } => run_residue(form, point),
        Command::Section(op) => run_section(op),
        Command::Gersten(op) => run_gersten(op),
        Command::Cohomology {
            curve,
            twist,
            level,
            degree,
        } => {
            let curve = parse::parse_curve(curve).map_err(es)?;
            let g = gersten::curve_cohomology(&curve, LineBundleTwist(*twist), *level, *degree)
                .map_err(es)?;
            Ok(fields_output(&[("group", g.to_string())]))
        }
        Command::Table { space } => run_table(space),
        Command::Chowwitt { space, twisted } => run_chowwitt(space, *twisted),
        Command::Verify {
            suite,
            samples,
            seed,
        } => {
            let report = match suite {
                Suite::ThmA7 => suite_squares(*samples, require_seed(seed)?)?,
                Suite::Prop410N1 => suite_punctured_line()?,
                Suite::EulerP1 => suite_euler()?,
                Suite::BocksteinRP2 => suite_bockstein()?,
                Suite::Triangle316 => suite_rank_parity(*samples, require_seed(seed)?)?,
                Suite::LocalizationP1 => suite_localization(*samples, require_seed(seed)?)?,
                Suite::ProductSign => suite_product(*samples, require_seed(seed)?)?,
            };
            Ok(report_output(&report))
        }
    }
}

fn require_seed(seed: &Option<u64>) -> Result<u64, String> {
    seed.ok_or_else(|| "a seed is required for randomized suites: pass --seed N".to_string())
}

fn run_form(op: &FormCmd) -> Result<Output, String> {
    match op {
        FormCmd::Parse { form } => {
            let f = parse::parse_form(form).map_err(es)?;
            Ok(fields_output(&[("form", f.to_string())]))
        }
        FormCmd::WittEqual { left, right } => {
            let a = parse::parse_form(left).map_err(es)?;
            let b = parse::parse_form(right).map_err(es)?;
            let eq = quadform::witt_equal(&a, &b).map_err(es)?;
            let report = Report {
                items: vec![Item::new(
                    format!("{a} equals {b} in the Witt group"),
                    "equal",
                    if eq { "equal" } else { "inequal" },
                )],
            };
            Ok(report_output(&report))
        }
        FormCmd::Signature { form } => {
            let f = parse::parse_form(form).map_err(es)?;
            let s = realspec::signature(&f, f.twist()).map_err(es)?;
            Ok(fields_output(&[("section", s.to_string())]))
        }
    }
}

fn run_residue(form: &str, point: &str) -> Result<Output, String> {
    let f = parse::parse_form(form).map_err(es)?;
    let x = parse::parse_point(point).map_err(es)?;
    let v = quadform::second_residue(&f, &x).map_err(es)?;
    let dual = v
        .twist
        .as_ref()
        .map(|t| t.to_string())
        .unwrap_or_else(|| "1".to_string());
    Ok(fields_output(&[
        ("point", x.to_string()),
        ("value", witt_value_string(&v)),
        ("dual", dual),
    ]))
}

fn witt_value_string(v: &WittClass) -> String {
    match &v.data {
        WittData::Sig(n) => format!("{n}"),
        WittData::RankParity(p) => format!("{} mod 2", p % 2),
        WittData::Fun { .. } => "function field class".to_string(),
    }
}

fn run_section(op: &SectionCmd) -> Result<Output, String> {
    match op {
        SectionCmd::Parse { section } => {
            let s = parse::parse_section(section).map_err(es)?;
            Ok(fields_output(&[("section", s.to_string())]))
        }
        SectionCmd::Beta { section, point } => {
            let s = parse::parse_section(section).map_err(es)?;
            let alpha = real_point(point)?;
            let v = realspec::beta(&s, &alpha);
            Ok(fields_output(&[
                ("point", v.point.to_string()),
                ("value", v.value.to_string()),
                ("dual", v.twist.to_string()),
            ]))
        }
        SectionCmd::DRe { form } => {
            let f = parse::parse_form(form).map_err(es)?;
            let s = realspec::signature(&f, f.twist()).map_err(es)?;
            let mut sup = quadform::support(&f);
            sup.push(ClosedPoint::Infinity);
            let vals = realspec::d_re(&s, &sup).map_err(es)?;
            let rows: Vec<Vec<String>> = vals
                .iter()
                .map(|v| {
                    vec![
                        v.point.to_string(),
                        v.value.to_string(),
                        v.twist.to_string(),
                    ]
                })
                .collect();
            Ok(table_output(
                vec![("section", json!(s.to_string()))],
                vec!["point".into(), "value".into(), "dual".into()],
                rows,
            ))
        }
    }
}

fn real_point(text: &str) -> Result<RealAlg, String> {
    match parse::parse_point(text).map_err(es)? {
        ClosedPoint::Real(a) => Ok(a),
        other => Err(format!("{other} is not a real point")),
    }
}

fn run_gersten(op: &GerstenCmd) -> Result<Output, String> {
    match op {
        GerstenCmd::D0 { cochain, curve } => {
            let c = cochain_arg(cochain)?;
            let curve = parse::parse_curve(curve).map_err(es)?;
            let b = gersten::d0(&c, &curve).map_err(es)?;
            Ok(cochain_output(&b))
        }
        GerstenCmd::Cocycle { cochain, curve } => {
            let c = cochain_arg(cochain)?;
            let curve = parse::parse_curve(curve).map_err(es)?;
            let ok = gersten::is_cocycle(&c, &curve).map_err(es)?;
            let report = Report {
                items: vec![Item::new(
                    format!("cocycle on {curve}"),
                    "true",
                    ok.to_string(),
                )],
            };
            Ok(report_output(&report))
        }
        GerstenCmd::Coboundary { cochain, curve } => {
            let c = cochain_arg(cochain)?;
            let curve = parse::parse_curve(curve).map_err(es)?;
            let (bounds, primitive) = gersten::is_coboundary(&c, &curve).map_err(es)?;
            let mut items = vec![Item::new(
                format!("bounds on {curve}"),
                "true",
                bounds.to_string(),
            )];
            if let Some(w) = primitive {
                let shown = w.to_string();
                items.push(Item::new("primitive", shown.clone(), shown));
            }
            Ok(report_output(&Report { items }))
        }
        GerstenCmd::Transfer { cochain } => {
            let c = cochain_arg(cochain)?;
            let n = gersten::total_transfer(&c).map_err(es)?;
            Ok(fields_output(&[("transfer", n.to_string())]))
        }
        GerstenCmd::Euler { d } => Ok(cochain_output(&gersten::euler_O(*d))),
        GerstenCmd::CycleClass { cochain, curve } => {
            let c = cochain_arg(cochain)?;
            let curve = parse::parse_curve(curve).map_err(es)?;
            let cls = gersten::cycle_class(&c, &curve).map_err(es)?;
            Ok(class_output(&cls))
        }
        GerstenCmd::Localize { cochain, at } => {
            let c = cochain_arg(cochain)?;
            let mut points = Vec::with_capacity(at.len());
            for p in at {
                points.push(parse::parse_point(p).map_err(es)?);
            }
            let b = gersten::boundary_localization(&c, &points).map_err(es)?;
            Ok(cochain_output(&b))
        }
        GerstenCmd::Pushforward {
            point,
            value,
            level,
        } => {
            let x = parse::parse_point(point).map_err(es)?;
            let v = witt_value_arg(&x, value)?;
            let c = gersten::pushforward_point(&x, &v, *level).map_err(es)?;
            Ok(cochain_output(&c))
        }
        GerstenCmd::Cup { left, right, curve } => {
            let a = cochain_arg(left)?;
            let b = cochain_arg(right)?;
            let curve = parse::parse_curve(curve).map_err(es)?;
            let c = gersten::cup(&a, &b, &curve).map_err(es)?;
            Ok(cochain_output(&c))
        }
    }
}

fn witt_value_arg(x: &ClosedPoint, text: &str) -> Result<WittClass, String> {
    let value = parse_spec_value(text)?;
    let field = x.residue_field();
    let data = match (field, value) {
        (FieldTag::ComplexField, SpecValue::Mod2(p)) => WittData::RankParity(p % 2),
        (FieldTag::ComplexField, SpecValue::Int(n)) => {
            WittData::RankParity((n.rem_euclid(2)) as u8)
        }
        (_, SpecValue::Int(n)) => WittData::Sig(n),
        (_, SpecValue::Mod2(_)) => {
            return Err(format!("the value at {x} is an integer signature"));
        }
    };
    Ok(WittClass {
        field,
        twist: None,
        data,
    })
}

fn class_output(cls: &TopClass) -> Output {
    let data = match &cls.data {
        TopData::Function(vals) => json!({"kind": "function", "values": vals}),
        TopData::Count(n) => json!({"kind": "count", "value": n}),
        TopData::Parity(p) => json!({"kind": "parity", "value": p % 2}),
        TopData::Zero => json!({"kind": "zero"}),
    };
    let json = json!({
        "ambient": cls.ambient,
        "degree": cls.degree,
        "system": cls.local_system.to_string(),
        "data": data,
    });
    let short = match &cls.data {
        TopData::Function(vals) => format!(
            "({})",
            vals.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
        TopData::Count(n) => n.to_string(),
        TopData::Parity(p) => format!("{} mod 2", p % 2),
        TopData::Zero => "0".to_string(),
    };
    Output {
        status: Status::Pass,
        text: cls.to_string(),
        json,
        tsv: format!(
            "ambient\tdegree\tsystem\tclass\n{}\t{}\t{}\t{}",
            cls.ambient, cls.degree, cls.local_system, short
        ),
    }
}

fn run_table(space: &str) -> Result<Output, String> {
    let x = load_space(space)?;
    let t = derive_I_table(&x).map_err(es)?;
    let mut columns = vec!["system".to_string(), "degree".to_string()];
    for j in 0..=t.jmax {
        columns.push(format!("j={j}"));
    }
    columns.push("Ch".to_string());
    let mut rows = Vec::new();
    for sys in [System::Z, System::ZL] {
        for i in 0..=t.dim {
            let mut row = vec![sys.to_string(), i.to_string()];
            for j in 0..=t.jmax {
                row.push(t.entry(i, j, sys).to_string());
            }
            row.push(FinAbGroup::elementary_2(t.ch_dim(i)).to_string());
            rows.push(row);
        }
    }
    Ok(table_output(
        vec![("space", json!(x.name)), ("dim", json!(t.dim))],
        columns,
        rows,
    ))
}

fn run_chowwitt(space: &str, twisted: bool) -> Result<Output, String> {
    let x = load_space(space)?;
    let sys = if twisted { System::ZL } else { System::Z };
    let entries = chow_witt_table(&x, sys).map_err(es)?;
    let columns = vec![
        "codim".to_string(),
        "group".to_string(),
        "witt part".to_string(),
        "kernel index".to_string(),
        "product index".to_string(),
        "onto cycles".to_string(),
        "projection kernel".to_string(),
    ];
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                e.codim.to_string(),
                e.group.to_string(),
                e.witt_part.to_string(),
                e.cycle_kernel_index.to_string(),
                e.product_index.to_string(),
                e.onto_cycles.to_string(),
                e.projection_kernel.to_string(),
            ]
        })
        .collect();
    Ok(table_output(
        vec![("space", json!(x.name)), ("system", json!(sys.to_string()))],
        columns,
        rows,
    ))
}

fn load_space(arg: &str) -> Result<CellularVariety, String> {
    if let Some(n) = arg.strip_prefix("RP").and_then(|r| r.parse::<usize>().ok()) {
        return Ok(builtin(BuiltinSpace::RPn(n)));
    }
    if arg == "P1" {
        return Ok(builtin(BuiltinSpace::P1));
    }
    if let Some(n) = arg.strip_prefix('S').and_then(|r| r.parse::<usize>().ok()) {
        return Ok(builtin(BuiltinSpace::Sn(n)));
    }
    let text = fs::read_to_string(arg).map_err(|e| format!("cannot read {arg}: {e}"))?;
    let name = std::path::Path::new(arg)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| arg.to_string());
    complex_from_json(&name, &text)
}

fn complex_from_json(name: &str, text: &str) -> Result<CellularVariety, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("complex JSON: {e}"))?;
    let cells: Vec<usize> = pull(&v, "cells")?;
    let z: Vec<Vec<Vec<i64>>> = pull(&v, "Z")?;
    let zl: Vec<Vec<Vec<i64>>> = pull(&v, "ZL")?;
    let z2: Vec<Vec<Vec<i64>>> = pull(&v, "Z2")?;
    let spec = CochainComplexSpec::from_integer_rows(cells, z, zl, z2).map_err(es)?;
    Ok(CellularVariety::new(name, spec))
}

fn pull<T: serde::de::DeserializeOwned>(v: &Value, key: &str) -> Result<T, String> {
    let field = v
        .get(key)
        .cloned()
        .ok_or_else(|| format!("complex JSON: missing {key}"))?;
    serde_json::from_value(field).map_err(|e| format!("complex JSON: bad {key}: {e}"))
}

/// Accept a cochain as inline JSON or as a path to a JSON file.
fn cochain_arg(text: &str) -> Result<GerstenCochain, String> {
    let body = if text.trim_start().starts_with('{') {
        text.to_string()
    } else {
        fs::read_to_string(text).map_err(|e| format!("cannot read {text}: {e}"))?
    };
    cochain_from_json(&body)
}

fn cochain_to_json(c: &GerstenCochain) -> Value {
    let payload = match c.payload() {
        Payload::Form(f) => Value::String(f.to_string()),
        Payload::Residues(m) => {
            let mut obj = serde_json::Map::new();
            for (x, v) in m {
                obj.insert(x.to_string(), Value::String(v.to_string()));
            }
            Value::Object(obj)
        }
    };
    json!({
        "degree": c.degree(),
        "level": c.level(),
        "twist": c.twist().degree(),
        "payload": payload,
    })
}

fn cochain_from_json(text: &str) -> Result<GerstenCochain, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("cochain JSON: {e}"))?;
    let degree = v
        .get("degree")
        .and_then(Value::as_u64)
        .ok_or("cochain JSON: missing integer degree")?;
    let level = v
        .get("level")
        .and_then(Value::as_u64)
        .ok_or("cochain JSON: missing integer level")? as usize;
    let twist = LineBundleTwist(
        v.get("twist")
            .and_then(Value::as_i64)
            .ok_or("cochain JSON: missing integer twist")?,
    );
    let payload = v.get("payload").ok_or("cochain JSON: missing payload")?;
    match degree {
        0 => {
            let s = payload
                .as_str()
                .ok_or("cochain JSON: a degree 0 payload is a form string")?;
            let f = parse::parse_form(s).map_err(es)?;
            GerstenCochain::from_form(f, level, twist).map_err(es)
        }
        1 => {
            let obj = payload
                .as_object()
                .ok_or("cochain JSON: a degree 1 payload maps points to values")?;
            let mut map = BTreeMap::new();
            for (k, val) in obj {
                let x = parse::parse_point(k).map_err(es)?;
                let s = val
                    .as_str()
                    .ok_or_else(|| format!("cochain JSON: the value at {k} is a string"))?;
                map.insert(x, parse_spec_value(s)?);
            }
            GerstenCochain::from_residues(map, level, twist).map_err(es)
        }
        d => Err(format!("cochain JSON: unsupported degree {d}")),
    }
}

fn parse_spec_value(text: &str) -> Result<SpecValue, String> {
    let t = text.trim();
    if let Some(head) = t.strip_suffix("mod 2") {
        let n: i64 = head
            .trim()
            .parse()
            .map_err(|_| format!("bad residue value: {text}"))?;
        Ok(SpecValue::Mod2(n.rem_euclid(2) as u8))
    } else {
        let n: i64 = t
            .parse()
            .map_err(|_| format!("bad residue value: {text}"))?;
        Ok(SpecValue::Int(n))
    }
}

fn residues_string(m: &BTreeMap<ClosedPoint, SpecValue>) -> String {
    if m.is_empty() {
        return "none".to_string();
    }
    m.iter()
        .map(|(x, v)| format!("{x}: {v}"))
        .collect::<Vec<_>>()
        .join("; ")
}

// ---- verification suites ----

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> IntPoly {
    loop {
        let deg = rng.gen_range(0..=max_deg);
        let coeffs: Vec<Rational> = (0..=deg).map(|_| rat(rng.gen_range(-3..=3), 1)).collect();
        let p = IntPoly::from_coeffs(coeffs);
        if p.degree().is_some() {
            return p;
        }
    }
}

fn random_form(rng: &mut ChaCha8Rng) -> DiagonalForm {
    let n = rng.gen_range(1..=4);
    let entries: Vec<RatFunc> = (0..n)
        .map(|_| RatFunc::from_poly(random_poly(rng, 4)))
        .collect();
    DiagonalForm::ratfunc(entries).expect("nonzero polynomial entries")
}

/// Forms whose residues all vanish: rational constants plus split pairs.
fn random_unramified_form(rng: &mut ChaCha8Rng) -> DiagonalForm {
    let m = rng.gen_range(1..=3);
    let mut entries: Vec<RatFunc> = (0..m)
        .map(|_| {
            let mut c = 0;
            while c == 0 {
                c = rng.gen_range(-3..=3);
            }
            RatFunc::from_rational(rat(c, 1))
        })
        .collect();
    for _ in 0..rng.gen_range(0..=2) {
        let g = RatFunc::from_poly(random_poly(rng, 2));
        entries.push(g.clone());
        entries.push(g.neg());
    }
    DiagonalForm::ratfunc(entries).expect("nonzero entries")
}

fn zero_value_at(x: &ClosedPoint) -> SpecValue {
    match x {
        ClosedPoint::Complex(_) => SpecValue::Mod2(0),
        _ => SpecValue::Int(0),
    }
}

fn doubled_value(v: &SpecValue) -> SpecValue {
    match v {
        SpecValue::Int(n) => SpecValue::Int(2 * n),
        SpecValue::Mod2(_) => SpecValue::Mod2(0),
    }
}

/// Residue and boundary squares on random forms: twice the residue
/// signature matches the section jump at every real breakpoint, and the
/// real boundary of the section matches twice the residue differential on
/// the projective line, infinity included.
fn suite_squares(samples: usize, seed: u64) -> Result<Report, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(samples);
    for k in 0..samples {
        let f = random_form(&mut rng);
        let s = realspec::signature(&f, None).map_err(es)?;
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for alpha in s.breakpoints() {
            let jump = realspec::beta(&s, alpha);
            let x = ClosedPoint::real(alpha.clone());
            let res = quadform::second_residue(&f, &x).map_err(es)?;
            let sig = res
                .signature()
                .ok_or_else(|| format!("no signature for the residue at {x}"))?;
            lhs.push(format!("{x}: {}", jump.value));
            rhs.push(format!("{x}: {}", 2 * sig));
        }
        let c = GerstenCochain::from_form(f.clone(), 0, LineBundleTwist::trivial()).map_err(es)?;
        let b = gersten::d0(&c, &CurveSpec::P1).map_err(es)?;
        let got_res = b.residues().map_err(es)?;
        let mut sup = quadform::support(&f);
        sup.push(ClosedPoint::Infinity);
        let dre = realspec::d_re(&s, &sup).map_err(es)?;
        for pv in &dre {
            let raw = got_res
                .get(&pv.point)
                .cloned()
                .unwrap_or_else(|| zero_value_at(&pv.point));
            lhs.push(format!("d {}: {}", pv.point, pv.value));
            rhs.push(format!("d {}: {}", pv.point, doubled_value(&raw)));
        }
        items.push(Item::new(
            format!("sample {k}: {f}"),
            lhs.join("; "),
            rhs.join("; "),
        ));
    }
    Ok(Report { items })
}

/// Generators of the punctured line: classes of <1, t> and <1, -t>, their
/// span, and the boundary of the generator at the origin.
fn suite_punctured_line() -> Result<Report, String> {
    let origin = ClosedPoint::rational(Rational::zero());
    let curve = CurveSpec::a1_minus(vec![origin.clone()]).map_err(es)?;
    let one = RatFunc::from_rational(Rational::one());
    let tvar = RatFunc::var();
    let plus = DiagonalForm::ratfunc(vec![one.clone(), tvar.clone()]).map_err(es)?;
    let minus = DiagonalForm::ratfunc(vec![one, tvar.neg()]).map_err(es)?;
    let mut items = Vec::new();
    let mut classes = Vec::new();
    for (name, f, want) in [("<1, t>", &plus, (1i64, 0i64)), ("<1, -t>", &minus, (0, 1))] {
        let c = GerstenCochain::from_form(f.clone(), 1, LineBundleTwist::trivial()).map_err(es)?;
        let ok = gersten::is_cocycle(&c, &curve).map_err(es)?;
        items.push(Item::new(
            format!("{name} is a cocycle off the origin"),
            "true",
            ok.to_string(),
        ));
        let cls = gersten::cycle_class(&c, &curve).map_err(es)?;
        let vals = function_values(&cls)?;
        if vals.len() != 2 {
            return Err(format!("expected two components, got {}", vals.len()));
        }
        items.push(Item::new(
            format!("{name} class on (t>0, t<0)"),
            format!("({}, {})", want.0, want.1),
            format!("({}, {})", vals[1], vals[0]),
        ));
        classes.push(vals);
    }
    let det = classes[0][0] * classes[1][1] - classes[0][1] * classes[1][0];
    items.push(Item::new(
        "span of the two classes in Z^2",
        "determinant of absolute value 1",
        if det.abs() == 1 {
            "determinant of absolute value 1".to_string()
        } else {
            format!("determinant {det}")
        },
    ));
    let cplus = GerstenCochain::from_form(plus, 1, LineBundleTwist::trivial()).map_err(es)?;
    let b = gersten::boundary_localization(&cplus, &[origin.clone()]).map_err(es)?;
    let unit = WittClass {
        field: FieldTag::RealField,
        twist: None,
        data: WittData::Sig(1),
    };
    let p = gersten::pushforward_point(&origin, &unit, 0).map_err(es)?;
    items.push(Item::new(
        "boundary at the origin",
        p.to_string(),
        b.to_string(),
    ));
    Ok(Report { items })
}

fn function_values(cls: &TopClass) -> Result<Vec<i64>, String> {
    match &cls.data {
        TopData::Function(vals) => Ok(vals.clone()),
        _ => Err("expected a function class".to_string()),
    }
}

/// Classes of the Euler cochains of O(-1) and O(-2) on the projective line.
fn suite_euler() -> Result<Report, String> {
    let p1 = CurveSpec::P1;
    let e1 = gersten::euler_O(-1);
    let c1 = gersten::cycle_class(&e1, &p1).map_err(es)?;
    let want1 = TopClass {
        ambient: p1.ambient(),
        degree: 1,
        local_system: LocalSystem::Moebius,
        data: TopData::Parity(1),
    };
    let e2 = gersten::euler_O(-2);
    let c2 = gersten::cycle_class(&e2, &p1).map_err(es)?;
    let want2 = TopClass {
        ambient: p1.ambient(),
        degree: 1,
        local_system: LocalSystem::Trivial,
        data: TopData::Count(0),
    };
    Ok(Report {
        items: vec![
            Item::new("euler class of O(-1)", want1.to_string(), c1.to_string()),
            Item::new("euler class of O(-2)", want2.to_string(), c2.to_string()),
        ],
    })
}

/// Snake connecting maps on the projective plane and the Moebius circle.
fn suite_bockstein() -> Result<Report, String> {
    let mut items = Vec::new();
    let rp2 = builtin(BuiltinSpace::RPn(2));
    let snake = cellular::bockstein(&rp2.complex, System::Z, 1);
    items.push(Item::new(
        "plane connecting map source dimension",
        "1",
        snake.source_dim.to_string(),
    ));
    items.push(Item::new(
        "plane connecting map target",
        "Z/2",
        snake.target.to_string(),
    ));
    items.push(Item::new(
        "plane generator image",
        "nonzero",
        image_kind(&snake, 0),
    ));
    let circle = builtin(BuiltinSpace::P1);
    let moebius = cellular::bockstein(&circle.complex, System::ZL, 0);
    items.push(Item::new(
        "circle connecting map source dimension",
        "1",
        moebius.source_dim.to_string(),
    ));
    items.push(Item::new(
        "circle connecting map target",
        "Z/2",
        moebius.target.to_string(),
    ));
    items.push(Item::new(
        "circle generator image with the twisted system",
        "nonzero",
        image_kind(&moebius, 0),
    ));
    Ok(Report { items })
}

fn image_kind(b: &cellular::Bockstein, idx: usize) -> String {
    let rep = b.source_rep(idx);
    let img = b.apply_cocycle(&rep);
    if b.is_zero_image(&img) {
        "zero".to_string()
    } else {
        "nonzero".to_string()
    }
}

/// Rank parity against the reduced class of unramified cocycles.
fn suite_rank_parity(samples: usize, seed: u64) -> Result<Report, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(samples);
    for k in 0..samples {
        let f = random_unramified_form(&mut rng);
        let c = GerstenCochain::from_form(f.clone(), 0, LineBundleTwist::trivial()).map_err(es)?;
        let cls = gersten::cycle_class(&c, &CurveSpec::P1).map_err(es)?;
        let vals = function_values(&cls)?;
        let got: Vec<i64> = vals.iter().map(|v| v.rem_euclid(2)).collect();
        let expected = vec![(f.rank() % 2) as i64; got.len()];
        items.push(Item::new(
            format!("sample {k}: {f}"),
            format!("{expected:?}"),
            format!("{got:?}"),
        ));
    }
    Ok(Report { items })
}

/// Support splice, reciprocity, count additivity, and the chart jump at
/// infinity for the boundary of random classes on the projective line;
/// the same splice with the odd twist.
fn suite_localization(samples: usize, seed: u64) -> Result<Report, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(samples);
    let p1 = CurveSpec::P1;
    for k in 0..samples {
        let f = random_form(&mut rng);
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let c = GerstenCochain::from_form(f.clone(), 0, LineBundleTwist::trivial()).map_err(es)?;
        let full = gersten::d0(&c, &p1).map_err(es)?;
        let finite = quadform::support(&f);
        let fin = gersten::boundary_localization(&c, &finite).map_err(es)?;
        let inf = gersten::boundary_localization(&c, &[ClosedPoint::Infinity]).map_err(es)?;
        let mut merged = fin.residues().map_err(es)?.clone();
        for (x, v) in inf.residues().map_err(es)? {
            merged.insert(x.clone(), v.clone());
        }
        lhs.push(format!(
            "residues {}",
            residues_string(full.residues().map_err(es)?)
        ));
        rhs.push(format!("residues {}", residues_string(&merged)));
        let t = gersten::total_transfer(&full).map_err(es)?;
        lhs.push("transfer 0".to_string());
        rhs.push(format!("transfer {t}"));
        let cf = count_of(&full, &p1)?;
        let ca = count_of(&fin, &p1)?;
        let ci = count_of(&inf, &p1)?;
        lhs.push(format!("count {cf}"));
        rhs.push(format!("count {}", ca + ci));
        let s = realspec::signature(&f, None).map_err(es)?;
        let mut sup = finite.clone();
        sup.push(ClosedPoint::Infinity);
        let dre = realspec::d_re(&s, &sup).map_err(es)?;
        let chart = match &dre.last().expect("infinity is in the support").value {
            SpecValue::Int(n) => *n,
            SpecValue::Mod2(_) => return Err("integer chart jump expected".to_string()),
        };
        let m_inf = match inf.residues().map_err(es)?.get(&ClosedPoint::Infinity) {
            Some(SpecValue::Int(n)) => *n,
            Some(SpecValue::Mod2(_)) => return Err("integer residue expected".to_string()),
            None => 0,
        };
        lhs.push(format!("chart jump {chart}"));
        rhs.push(format!("chart jump {}", 2 * m_inf));
        // the same splice with the odd twist, where the class map counts parity
        let ct = GerstenCochain::from_form(f.clone(), 0, LineBundleTwist(1)).map_err(es)?;
        let fullt = gersten::d0(&ct, &p1).map_err(es)?;
        let fint = gersten::boundary_localization(&ct, &finite).map_err(es)?;
        let inft = gersten::boundary_localization(&ct, &[ClosedPoint::Infinity]).map_err(es)?;
        let mut mergedt = fint.residues().map_err(es)?.clone();
        for (x, v) in inft.residues().map_err(es)? {
            mergedt.insert(x.clone(), v.clone());
        }
        lhs.push(format!(
            "twisted residues {}",
            residues_string(fullt.residues().map_err(es)?)
        ));
        rhs.push(format!("twisted residues {}", residues_string(&mergedt)));
        let pf = parity_of(&fullt, &p1)?;
        let pa = parity_of(&fint, &p1)?;
        let pi = parity_of(&inft, &p1)?;
        lhs.push(format!("parity {pf}"));
        rhs.push(format!("parity {}", (pa + pi) % 2));
        items.push(Item::new(
            format!("sample {k}: {f}"),
            lhs.join("; "),
            rhs.join("; "),
        ));
    }
    Ok(Report { items })
}

fn count_of(c: &GerstenCochain, curve: &CurveSpec) -> Result<i64, String> {
    match gersten::cycle_class(c, curve).map_err(es)?.data {
        TopData::Count(n) => Ok(n),
        _ => Err("expected a counting class".to_string()),
    }
}

fn parity_of(c: &GerstenCochain, curve: &CurveSpec) -> Result<u8, String> {
    match gersten::cycle_class(c, curve).map_err(es)?.data {
        TopData::Parity(p) => Ok(p % 2),
        _ => Err("expected a parity class".to_string()),
    }
}

/// Signatures multiply under the tensor product at sampled orderings, and
/// the cup product against a transverse point class scales by local signs.
fn suite_product(samples: usize, seed: u64) -> Result<Report, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::new();
    for k in 0..samples {
        let f = random_form(&mut rng);
        let g = random_form(&mut rng);
        let h = quadform::tensor(&f, &g).map_err(es)?;
        let mut orderings = vec![FieldOrdering::MinusInfinity, FieldOrdering::PlusInfinity];
        while orderings.len() < 20 {
            let num = rng.gen_range(-12..=12);
            let den = rng.gen_range(1..=4);
            orderings.push(FieldOrdering::FinitePlus(RealAlg::from_rational(rat(
                num, den,
            ))));
        }
        let mut lhs = Vec::with_capacity(orderings.len());
        let mut rhs = Vec::with_capacity(orderings.len());
        for p in &orderings {
            let sf = quadform::signature_at(&f, p).map_err(es)?;
            let sg = quadform::signature_at(&g, p).map_err(es)?;
            let sh = quadform::signature_at(&h, p).map_err(es)?;
            lhs.push(format!("{p}: {}", sf * sg));
            rhs.push(format!("{p}: {sh}"));
        }
        items.push(Item::new(
            format!("sample {k}: product signatures"),
            lhs.join("; "),
            rhs.join("; "),
        ));
    }
    let t_form = DiagonalForm::ratfunc(vec![RatFunc::var()]).map_err(es)?;
    let c0 = GerstenCochain::from_form(t_form, 0, LineBundleTwist::trivial()).map_err(es)?;
    let unit = WittClass {
        field: FieldTag::RealField,
        twist: None,
        data: WittData::Sig(1),
    };
    for (r, want) in [(1i64, 1i64), (-1, -1)] {
        let x = ClosedPoint::rational(rat(r, 1));
        let c1 = gersten::pushforward_point(&x, &unit, 0).map_err(es)?;
        let cup = gersten::cup(&c0, &c1, &CurveSpec::P1).map_err(es)?;
        let mut want_map = BTreeMap::new();
        want_map.insert(x.clone(), SpecValue::Int(want));
        let expected = GerstenCochain::from_residues(want_map, 1, LineBundleTwist::trivial())
            .map_err(es)?;
        items.push(Item::new(
            format!("cup with the point class at {x}"),
            expected.to_string(),
            cup.to_string(),
        ));
    }
    let origin = ClosedPoint::rational(Rational::zero());
    let c_bad = gersten::pushforward_point(&origin, &unit, 0).map_err(es)?;
    let rejected = gersten::cup(&c0, &c_bad, &CurveSpec::P1).is_err();
    items.push(Item::new(
        "cup with a point in the zero locus",
        "rejected",
        if rejected { "rejected" } else { "accepted" },
    ));
    Ok(Report { items })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_values_parse_both_shapes() {
        assert_eq!(parse_spec_value("-4").unwrap(), SpecValue::Int(-4));
        assert_eq!(parse_spec_value("1 mod 2").unwrap(), SpecValue::Mod2(1));
        assert_eq!(parse_spec_value(" 3 mod 2 ".trim()).unwrap(), SpecValue::Mod2(1));
        assert!(parse_spec_value("x").is_err());
    }

    #[test]
    fn cochain_json_round_trips() {
        let f = parse::parse_form("<1, t, t^2 - 2>").unwrap();
        let c = GerstenCochain::from_form(f, 0, LineBundleTwist(2)).unwrap();
        let text = serde_json::to_string(&cochain_to_json(&c)).unwrap();
        let back = cochain_from_json(&text).unwrap();
        assert_eq!(back, c);
        let b = gersten::d0(&c, &CurveSpec::P1).unwrap();
        let text1 = serde_json::to_string(&cochain_to_json(&b)).unwrap();
        assert_eq!(cochain_from_json(&text1).unwrap(), b);
    }

    #[test]
    fn builtin_spaces_resolve_by_name() {
        assert_eq!(load_space("RP3").unwrap().name, "RP^3");
        assert_eq!(load_space("S2").unwrap().name, "S^2");
        assert_eq!(load_space("P1").unwrap().name, "P^1");
        assert!(load_space("T2").is_err());
    }

    #[test]
    fn deterministic_suites_pass() {
        for report in [
            suite_punctured_line().unwrap(),
            suite_euler().unwrap(),
            suite_bockstein().unwrap(),
        ] {
            for item in &report.items {
                assert_eq!(item.expected, item.got, "failed: {}", item.check);
            }
        }
    }

    #[test]
    fn randomized_suites_pass_at_a_small_size() {
        for report in [
            suite_squares(12, 5).unwrap(),
            suite_rank_parity(12, 5).unwrap(),
            suite_localization(12, 5).unwrap(),
            suite_product(6, 5).unwrap(),
        ] {
            for item in &report.items {
                assert_eq!(item.expected, item.got, "failed: {}", item.check);
            }
        }
    }
}
