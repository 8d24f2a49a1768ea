//! Batch front-end: load scenario files, run a pipeline per scenario, emit a
//! text table or one JSON record per scenario.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::localization::{
    build_sigma, load_scenario, stationary_phase_data, verify_scenario, z_lambda, LocalizationReport, Scenario,
};
use crate::morse::{normalize_jet, MorseOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Full localization check.
    Verify,
    /// `Z(λ)` against the stationary-phase leading term of `S = Qσ`.
    Spa,
    /// Normal form of `Qσ` along `N`.
    Morse,
    /// The direct Berezin integral only.
    Integrate,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Verify => "verify",
            Mode::Spa => "spa",
            Mode::Morse => "morse",
            Mode::Integrate => "integrate",
        }
    }
}

#[derive(Clone, Debug, Parser)]
#[command(name = "superloc", version, about = "Verify localization and stationary phase on R^{m|n} scenarios")]
pub struct Args {
    /// Scenario files (JSON).
    pub paths: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "verify")]
    pub mode: Mode,
    /// Relative tolerance for the localization and stationary-phase comparisons.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Comma-separated λ grid replacing the scenario's.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Reject scenarios with inexact constants.
    #[arg(long)]
    pub exact: bool,
    /// One JSON record per scenario instead of a table.
    #[arg(long)]
    pub json: bool,
    /// Also write each report to `<dir>/<id>.{txt,json}`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One table row: quantity, value, reference, residual, pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub value: String,
    pub reference: String,
    pub residual: Option<f64>,
    pub pass: Option<bool>,
}

impl Row {
    fn info(quantity: impl Into<String>, value: impl Into<String>) -> Row {
        Row {
            quantity: quantity.into(),
            value: value.into(),
            reference: "-".into(),
            residual: None,
            pass: None,
        }
    }

    fn check(quantity: impl Into<String>, value: impl Into<String>, reference: impl Into<String>, residual: f64, pass: bool) -> Row {
        Row {
            quantity: quantity.into(),
            value: value.into(),
            reference: reference.into(),
            residual: Some(residual),
            pass: Some(pass),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportDocument {
    pub id: String,
    pub mode: Mode,
    pub pass: bool,
    pub rows: Vec<Row>,
    /// Flat record for `--json`; keys sort deterministically.
    pub record: Map<String, Value>,
}

pub fn fmt_complex(z: Complex64) -> String {
    let scale = z.norm().max(1.0);
    if z.im.abs() <= 1e-12 * scale {
        format!("{:.9}", z.re)
    } else if z.re.abs() <= 1e-12 * scale {
        format!("{:.9}i", z.im)
    } else {
        format!("{:.9}{:+.9}i", z.re, z.im)
    }
}

fn cjson(z: Complex64) -> Value {
    // adding 0.0 turns -0.0 into 0.0
    json!([z.re + 0.0, z.im + 0.0])
}

fn opt_cjson(z: Option<Complex64>) -> Value {
    z.map_or(Value::Null, cjson)
}

fn fmt_residual(r: Option<f64>) -> String {
    r.map_or("-".into(), |r| format!("{r:.3e}"))
}

fn relative(reference: Complex64, v: Complex64) -> f64 {
    let d = (v - reference).norm();
    if reference.norm() > 0.0 { d / reference.norm() } else { d }
}

fn verify_document(scn: &Scenario) -> Result<ReportDocument> {
    let rep = verify_scenario(scn)?;
    Ok(verify_rows(scn, &rep))
}

/// Rows and record for a finished localization report.
pub fn verify_rows(scn: &Scenario, rep: &LocalizationReport) -> ReportDocument {
    let mut rows = Vec::new();
    let direct = rep.direct;
    rows.push(Row::info("direct_integral", direct.map_or("error".into(), fmt_complex)));
    if let Some(s) = &rep.sigma {
        rows.push(Row::info("sigma", s.clone()));
    }
    for s in &rep.samples {
        if let (Some(z), Some(d)) = (s.z, direct) {
            let r = relative(d, z);
            rows.push(Row::check(format!("Z({})", s.lambda), fmt_complex(z), fmt_complex(d), r, r <= scn.tol.constancy));
        }
        if let (Some(lead), Some(z)) = (s.spa, s.z) {
            rows.push(Row {
                reference: fmt_complex(z),
                residual: Some(relative(z, lead)),
                ..Row::info(format!("spa({})", s.lambda), fmt_complex(lead))
            });
        }
    }
    if let (Some(rhs), Some(d)) = (rep.localization_rhs, direct) {
        let r = rep.localization_residual.unwrap_or(f64::INFINITY);
        rows.push(Row::check("localization_rhs", fmt_complex(rhs), fmt_complex(d), r, r <= scn.tol.localization));
    } else if !rep.nondegenerate {
        rows.push(Row::info("localization_rhs", "skipped (degenerate locus)"));
    }
    if let (Some(c), Some(d), Some(r)) = (rep.cutoff_integral, direct, rep.cutoff_residual) {
        rows.push(Row::check("cutoff_integral", fmt_complex(c), fmt_complex(d), r, r <= scn.tol.localization));
    }
    for (name, c) in &rep.identities {
        rows.push(Row::check(format!("identities.{name}"), c.holds.to_string(), "true", c.residual, c.holds));
    }
    for e in &rep.errors {
        rows.push(Row {
            pass: Some(false),
            ..Row::info("error", e.clone())
        });
    }

    let mut rec = Map::new();
    rec.insert("direct_integral".into(), opt_cjson(direct));
    rec.insert("sigma".into(), rep.sigma.clone().map_or(Value::Null, Value::String));
    rec.insert("lambda".into(), json!(rep.samples.iter().map(|s| s.lambda).collect::<Vec<_>>()));
    rec.insert("z".into(), Value::Array(rep.samples.iter().map(|s| opt_cjson(s.z)).collect()));
    rec.insert("spa".into(), Value::Array(rep.samples.iter().map(|s| opt_cjson(s.spa)).collect()));
    rec.insert("nondegenerate".into(), json!(rep.nondegenerate));
    rec.insert("l".into(), json!(rep.l));
    rec.insert("localization_rhs".into(), opt_cjson(rep.localization_rhs));
    rec.insert("localization_residual".into(), json!(rep.localization_residual));
    rec.insert("spa_lambda_independent".into(), json!(rep.spa_lambda_independent));
    rec.insert("cutoff_integral".into(), opt_cjson(rep.cutoff_integral));
    rec.insert("cutoff_residual".into(), json!(rep.cutoff_residual));
    rec.insert("exact".into(), json!(rep.exact));
    for (name, c) in &rep.identities {
        rec.insert(format!("identities.{name}"), json!(c.holds));
        rec.insert(format!("residuals.{name}"), json!(c.residual));
    }
    rec.insert("errors".into(), json!(rep.errors));
    ReportDocument {
        id: scn.id.clone(),
        mode: Mode::Verify,
        pass: rep.pass,
        rows,
        record: rec,
    }
}

fn spa_document(scn: &Scenario, tol: f64) -> Result<ReportDocument> {
    let sigma = build_sigma(scn)?;
    let qs = scn.q.apply(&sigma)?;
    let data = stationary_phase_data(&qs, &scn.mu, &scn.n_sub, &scn.quad)?;
    let mut rows = vec![Row::info("S", scn.names.print(&qs))];
    let mut pass = true;
    let (mut lams, mut zs, mut leads) = (Vec::new(), Vec::new(), Vec::new());
    for &lam in scn.lambdas.iter().filter(|l| **l > 0.0) {
        let z = z_lambda(scn, &sigma, lam)?;
        let lead = data.leading_term(lam);
        let r = relative(lead, z);
        pass &= r <= tol;
        rows.push(Row::check(format!("Z({lam})"), fmt_complex(z), fmt_complex(lead), r, r <= tol));
        lams.push(lam);
        zs.push(cjson(z));
        leads.push(cjson(lead));
    }
    rows.push(Row::info("lambda_independent", data.lambda_independent().to_string()));
    let mut rec = Map::new();
    rec.insert("S".into(), json!(scn.names.print(&qs)));
    rec.insert("lambda".into(), json!(lams));
    rec.insert("z".into(), Value::Array(zs));
    rec.insert("leading_term".into(), Value::Array(leads));
    rec.insert("signature".into(), json!(data.signature));
    rec.insert("codim".into(), json!([data.k, 2 * data.l]));
    rec.insert("lambda_independent".into(), json!(data.lambda_independent()));
    Ok(ReportDocument {
        id: scn.id.clone(),
        mode: Mode::Spa,
        pass,
        rows,
        record: rec,
    })
}

fn morse_document(scn: &Scenario) -> Result<ReportDocument> {
    let sigma = build_sigma(scn)?;
    let qs = scn.q.apply(&sigma)?;
    let res = normalize_jet(&qs, &scn.n_sub, MorseOptions::default())?;
    let residual = res.residual();
    let pass = residual.is_zero();
    let std = scn.names.print(&res.standard_form());
    let normal = scn.names.print(res.normal_form.function());
    let kinds: Vec<String> = res.change.kinds().iter().map(|k| format!("{k:?}")).collect();
    let rows = vec![
        Row::info("S", scn.names.print(&qs)),
        Row::info("critical_value", res.critical_value.to_string()),
        Row::check("normal_form", normal.clone(), std.clone(), if pass { 0.0 } else { 1.0 }, pass),
        Row::info("steps", kinds.join(",")),
    ];
    let mut rec = Map::new();
    rec.insert("S".into(), json!(scn.names.print(&qs)));
    rec.insert("critical_value".into(), json!(res.critical_value.to_string()));
    rec.insert("normal_form".into(), json!(normal));
    rec.insert("standard_form".into(), json!(std));
    rec.insert("residual_zero".into(), json!(pass));
    rec.insert("steps".into(), json!(kinds));
    Ok(ReportDocument {
        id: scn.id.clone(),
        mode: Mode::Morse,
        pass,
        rows,
        record: rec,
    })
}

fn integrate_document(scn: &Scenario) -> Result<ReportDocument> {
    let v = crate::calculus::berezin_integrate(&scn.mu, &scn.quad)?;
    let mut rec = Map::new();
    rec.insert("direct_integral".into(), cjson(v));
    Ok(ReportDocument {
        id: scn.id.clone(),
        mode: Mode::Integrate,
        pass: true,
        rows: vec![Row::info("direct_integral", fmt_complex(v))],
        record: rec,
    })
}

/// Load and apply the command-line overrides.
pub fn prepare(text: &str, args: &Args) -> Result<Scenario> {
    let mut scn = load_scenario(text)?;
    if args.exact && !scn.is_exact() {
        return Err(Error::Scenario("scenario has inexact constants (--exact)".into()));
    }
    if let Some(l) = &args.lambda {
        if l.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Scenario("--lambda: values must be finite and non-negative".into()));
        }
        scn.lambdas = l.clone();
    }
    if let Some(t) = args.tol {
        scn.tol.localization = t;
    }
    Ok(scn)
}

/// Run one pipeline; sub-operation errors become a failed document.
pub fn run_scenario(scn: &Scenario, mode: Mode) -> ReportDocument {
    let doc = match mode {
        Mode::Verify => verify_document(scn),
        Mode::Spa => spa_document(scn, scn.tol.localization),
        Mode::Morse => morse_document(scn),
        Mode::Integrate => integrate_document(scn),
    };
    let mut doc = doc.unwrap_or_else(|e| {
        let mut rec = Map::new();
        rec.insert("errors".into(), json!([e.to_string()]));
        ReportDocument {
            id: scn.id.clone(),
            mode,
            pass: false,
            rows: vec![Row {
                pass: Some(false),
                ..Row::info("error", e.to_string())
            }],
            record: rec,
        }
    });
    doc.record.insert("id".into(), json!(doc.id));
    doc.record.insert("mode".into(), json!(mode.name()));
    doc.record.insert("pass".into(), json!(doc.pass));
    doc
}

pub fn render_text(doc: &ReportDocument) -> String {
    let head = Row {
        quantity: "quantity".into(),
        value: "value".into(),
        reference: "reference".into(),
        residual: None,
        pass: None,
    };
    let cells = |r: &Row, header: bool| -> [String; 5] {
        [
            r.quantity.clone(),
            r.value.clone(),
            r.reference.clone(),
            if header { "residual".into() } else { fmt_residual(r.residual) },
            if header {
                "pass".into()
            } else {
                r.pass.map_or("-".into(), |p| if p { "ok".into() } else { "FAIL".into() })
            },
        ]
    };
    let mut table = vec![cells(&head, true)];
    table.extend(doc.rows.iter().map(|r| cells(r, false)));
    let mut width = [0usize; 5];
    for row in &table {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = format!(
        "scenario {} [{}]: {}\n",
        doc.id,
        doc.mode.name(),
        if doc.pass { "PASS" } else { "FAIL" }
    );
    for row in &table {
        let line: Vec<String> = row
            .iter()
            .zip(width)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn render_json(doc: &ReportDocument) -> String {
    serde_json::to_string(&Value::Object(doc.record.clone())).expect("report serializes")
}

fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Everything `run` produced: text for stdout and stderr and the exit code.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Exit code 2 if any file fails to load, else 1 if any report fails, else 0.
pub fn run(args: &Args) -> Outcome {
    let mut out = Outcome::default();
    let mut loaded: Vec<Option<Scenario>> = Vec::new();
    let mut parse_failed = false;
    for p in &args.paths {
        match std::fs::read_to_string(p).map_err(|e| Error::Scenario(format!("read: {e}"))).and_then(|t| prepare(&t, args)) {
            Ok(s) => loaded.push(Some(s)),
            Err(e) => {
                out.stderr.push_str(&format!("error: {}: {e}\n", p.display()));
                parse_failed = true;
                loaded.push(None);
            }
        }
    }
    let docs: Vec<Option<(ReportDocument, f64)>> = std::thread::scope(|sc| {
        let handles: Vec<_> = loaded
            .iter()
            .map(|s| {
                s.as_ref().map(|scn| {
                    sc.spawn(move || {
                        let t = std::time::Instant::now();
                        let d = run_scenario(scn, args.mode);
                        (d, t.elapsed().as_secs_f64())
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.map(|h| h.join().expect("scenario thread panicked"))).collect()
    });
    let (mut passed, mut failed) = (0, 0);
    for (doc, secs) in docs.into_iter().flatten() {
        if doc.pass {
            passed += 1;
        } else {
            failed += 1;
        }
        let text = if args.json { render_json(&doc) + "\n" } else { render_text(&doc) + "\n" };
        out.stdout.push_str(&text);
        // timing stays off stdout so reports are byte-stable
        out.stderr.push_str(&format!("{}: {:.3}s\n", doc.id, secs));
        if let Some(dir) = &args.out {
            if let Err(e) = write_report(dir, &doc, args.json, &text) {
                out.stderr.push_str(&format!("error: {e}\n"));
                failed += 1;
            }
        }
    }
    if !args.json {
        out.stdout.push_str(&format!("summary: {} scenarios, {passed} passed, {failed} failed\n", passed + failed));
    }
    out.code = if parse_failed { 2 } else if failed > 0 { 1 } else { 0 };
    out
}

fn write_report(dir: &Path, doc: &ReportDocument, json: bool, text: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let ext = if json { "json" } else { "txt" };
    std::fs::write(dir.join(format!("{}.{ext}", file_stem(&doc.id))), text)
}
