mod args;
mod render;

use std::fmt::Write as _;
use std::io::{self, Read};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, GenArgs, SweepKind};
use condpath::conditioning;
use condpath::factorize::{self, Factorization, Mode};
use condpath::format;
use condpath::gaussian;
use condpath::harness::{self, GeneratorConfig, Outcome, ReplayArtifact};
use condpath::separation;
use condpath::simpson::{self, AssociationMeasure};
use condpath::{Error, PathDiagram};
use render::{num, real, set};

const EXIT_PARSE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NOT_APPLICABLE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_USAGE: u8 = 5;

/// A finished command: the text report, the same content as JSON, and the
/// exit code.
struct Report {
    text: String,
    json: Value,
    code: u8,
}

impl Report {
    fn ok(text: String, json: Value) -> Report {
        Report { text, json, code: 0 }
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::Parse { .. } => EXIT_PARSE,
            Error::InvalidDiagram(_) => EXIT_INVALID,
            Error::NotApplicable(_) => EXIT_NOT_APPLICABLE,
            Error::Numerical(_) | Error::EnumerationCap(_) | Error::GeneratorExhausted(_) | Error::NameCollision { .. } => {
                EXIT_NUMERICAL
            }
            Error::InvalidIdentifier(_)
            | Error::UnknownNode(_)
            | Error::MalformedQuery(_)
            | Error::InvalidWalk(_)
            | Error::NotOpen
            | Error::InvalidConfig(_) => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.json);
            } else {
                print!("{}", report.text);
            }
            ExitCode::from(report.code)
        }
        Err(f) => {
            if cli.json {
                println!("{}", json!({ "error": f.message, "exit_code": f.code }));
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("reading standard input: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))
    }
}

fn load(cli: &Cli) -> Result<PathDiagram, Failure> {
    let path = cli.diagram.as_deref().ok_or_else(|| usage("this command needs --diagram FILE"))?;
    Ok(format::parse_diagram(&read_text(path)?)?)
}

fn load_valid(cli: &Cli) -> Result<PathDiagram, Failure> {
    let d = load(cli)?;
    d.ensure_valid()?;
    Ok(d)
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Validate => validate(&load(cli)?),
        Command::Cov { x, y } => cov(&load_valid(cli)?, x.as_deref(), y.as_deref()),
        Command::Pcov { x, y, given } => pcov(&load_valid(cli)?, x, y, given),
        Command::Wright { x, y } => wright(&load_valid(cli)?, x, y),
        Command::Dsep { x, y, given } => dsep(&load_valid(cli)?, x, y, given),
        Command::Condition { on, output } => condition(&load_valid(cli)?, on, output.as_deref()),
        Command::Factorize { x, y, given, chain } => {
            let mode = if *chain { Mode::Chain } else { Mode::Single };
            factorize_cmd(&load_valid(cli)?, x, y, given, mode)
        }
        Command::Simpson { x, y, given, search, seed } => simpson_cmd(&load_valid(cli)?, x, y, given, *search, *seed),
        Command::Gen(g) => gen(g),
        Command::Sweep { kind, trials, artifact, gen } => sweep(*kind, *trials, artifact.as_deref(), gen),
        Command::Replay { artifact } => replay(artifact),
    }
}

fn validate(d: &PathDiagram) -> Result<Report, Failure> {
    let report = d.validate();
    let mut text = String::new();
    if report.is_ok() {
        let _ = writeln!(text, "ok: {} nodes, {} edges", d.node_count(), d.edges().len());
    } else {
        for v in &report.violations {
            let _ = writeln!(text, "violation: {v}");
        }
    }
    let json = json!({
        "valid": report.is_ok(),
        "nodes": d.node_count(),
        "edges": d.edges().len(),
        "violations": report.violations.iter().map(ToString::to_string).collect::<Vec<_>>(),
    });
    Ok(Report { text, json, code: if report.is_ok() { 0 } else { EXIT_INVALID } })
}

fn cov(d: &PathDiagram, x: Option<&str>, y: Option<&str>) -> Result<Report, Failure> {
    let sigma = gaussian::implied_covariance(d)?;
    match (x, y) {
        (Some(x), Some(y)) => {
            let v = sigma.get(d.index_of(x)?, d.index_of(y)?);
            Ok(Report::ok(format!("{}\n", real(v)), json!({ "x": x, "y": y, "covariance": num(v) })))
        }
        (None, None) => {
            let names: Vec<&str> = d.names().iter().map(|n| n.as_str()).collect();
            let mut text = format!("{}\n", names.join("\t"));
            let mut rows = Vec::new();
            for i in 0..d.node_count() {
                let row: Vec<f64> = (0..d.node_count()).map(|j| sigma.get(i, j)).collect();
                let cells: Vec<String> = row.iter().map(|&v| real(v)).collect();
                let _ = writeln!(text, "{}", cells.join("\t"));
                rows.push(row.into_iter().map(num).collect::<Vec<_>>());
            }
            Ok(Report::ok(text, json!({ "nodes": names, "covariance": rows })))
        }
        _ => Err(usage("cov takes two nodes or none")),
    }
}

fn pcov(d: &PathDiagram, x: &str, y: &str, given: &[String]) -> Result<Report, Failure> {
    let sigma = gaussian::implied_covariance(d)?;
    let v = sigma.partial_covariance(d.index_of(x)?, d.index_of(y)?, &d.indices_of(given)?)?;
    Ok(Report::ok(format!("{}\n", real(v)), json!({ "x": x, "y": y, "given": given, "partial_covariance": num(v) })))
}

fn wright(d: &PathDiagram, x: &str, y: &str) -> Result<Report, Failure> {
    let (xi, yi) = (d.index_of(x)?, d.index_of(y)?);
    let w = gaussian::wright_covariance(d, xi, yi)?;
    let implied = gaussian::implied_covariance(d)?.get(xi, yi);
    let mut text = String::new();
    let mut terms = Vec::new();
    for t in &w.terms {
        let path = t.path.display(d).to_string();
        let _ = writeln!(text, "{}\t{path}", real(t.monomial));
        terms.push(json!({ "path": path, "monomial": num(t.monomial) }));
    }
    let agree = gaussian::approx_eq(w.total, implied, gaussian::REL_TOL);
    let _ = writeln!(text, "total\t{}", real(w.total));
    let _ = writeln!(text, "implied\t{}", real(implied));
    let _ = writeln!(text, "verdict\t{}", if agree { "match" } else { "mismatch" });
    let json = json!({ "x": x, "y": y, "terms": terms, "total": num(w.total), "implied": num(implied), "match": agree });
    Ok(Report { text, json, code: if agree { 0 } else { EXIT_NUMERICAL } })
}

fn dsep(d: &PathDiagram, x: &str, y: &str, given: &[String]) -> Result<Report, Failure> {
    let (xi, yi, z) = (d.index_of(x)?, d.index_of(y)?, d.indices_of(given)?);
    let separated = separation::m_separated(d, xi, yi, &z)?;
    let witness = match separation::find_open_route(d, xi, yi, &z)? {
        Some(route) => Some(separation::route_to_path(d, &route, &z)?.display(d).to_string()),
        None => None,
    };
    let mut text = format!("{}\n", if separated { "separated" } else { "connected" });
    if let Some(w) = &witness {
        let _ = writeln!(text, "open path: {w}");
    }
    Ok(Report::ok(text, json!({ "x": x, "y": y, "given": given, "separated": separated, "open_path": witness })))
}

fn condition(d: &PathDiagram, on: &[String], output: Option<&Path>) -> Result<Report, Failure> {
    let cd = conditioning::condition(d, on)?;
    let body = format::format_conditioned(&cd);
    let splits: Vec<Value> = cd
        .split_map
        .iter()
        .map(|((t, h), s)| json!({ "edge": format!("{t} -> {h}"), "node": s.as_str() }))
        .collect();
    let text = match output {
        Some(path) => {
            std::fs::write(path, &body).map_err(|e| usage(format!("writing {}: {e}", path.display())))?;
            format!("wrote {} ({} split nodes)\n", path.display(), cd.s_prime.len())
        }
        None => body.clone(),
    };
    Ok(Report::ok(text, json!({ "on": on, "splits": splits, "diagram": body })))
}

fn factorize_cmd(d: &PathDiagram, x: &str, y: &str, given: &[String], mode: Mode) -> Result<Report, Failure> {
    let f = factorize::factorize(d, x, y, given, mode)?;
    let cd = &f.conditioned.diagram;
    let mut text = String::new();
    let _ = writeln!(text, "query: cov({x}, {y} | {})", set(given));
    let _ = writeln!(text, "conditioning set Z: {}", set(&names(cd, &f.z)));
    let _ = writeln!(text, "open paths: {}", f.paths.len());
    for p in &f.paths {
        let _ = writeln!(text, "  {}", p.display(cd));
    }
    if let Some(spine) = &f.spine {
        let roles: Vec<String> =
            spine.nodes.iter().zip(&spine.roles).map(|(n, r)| format!("{n}:{}", role_name(*r))).collect();
        let _ = writeln!(text, "spine: {} (m = {}, n = {})", roles.join(" "), spine.m, spine.n);
    }
    let _ = writeln!(text, "applicable: {}", if f.is_applicable() { "yes" } else { "no" });
    for failure in &f.report.failures {
        let _ = writeln!(text, "failure: {failure}");
    }
    if let Some(p) = &f.partition {
        if !p.leftovers.is_empty() {
            let _ = writeln!(text, "leftovers: {}", set(&p.leftovers));
        }
    }
    let verdict = verdict(&f);
    if let Some(r) = &f.result {
        match r.theorem_used {
            Some(t) => {
                let _ = writeln!(text, "form: {}", t.label());
            }
            None => {
                let _ = writeln!(text, "form: none (no open path)");
            }
        }
        let _ = writeln!(text, "base cov({x}, {y}): {}", real(r.base));
        let _ = writeln!(text, "node\tnumerator\tdenominator\tratio");
        for t in &r.terms {
            let _ = writeln!(text, "{}\t{}\t{}\t{}", t.node, set(&t.numerator_set), set(&t.denominator_set), real(t.ratio));
        }
        let _ = writeln!(text, "value: {}", real(r.value));
    }
    let _ = writeln!(text, "oracle: {}", real(f.oracle));
    let _ = writeln!(text, "verdict: {verdict}");

    let json = json!({
        "x": x,
        "y": y,
        "given": given,
        "z": names(cd, &f.z),
        "paths": f.paths.iter().map(|p| p.display(cd).to_string()).collect::<Vec<_>>(),
        "spine": f.spine.as_ref().map(|s| json!({
            "nodes": s.nodes,
            "roles": s.roles.iter().map(|r| role_name(*r)).collect::<Vec<_>>(),
            "m": s.m,
            "n": s.n,
        })),
        "applicable": f.is_applicable(),
        "failures": f.report.failures.iter().map(|k| json!({ "kind": k.kind(), "detail": k.to_string() })).collect::<Vec<_>>(),
        "form": f.result.as_ref().and_then(|r| r.theorem_used).map(|t| t.label()),
        "base": f.result.as_ref().map(|r| num(r.base)),
        "terms": f.result.as_ref().map(|r| r.terms.iter().map(|t| json!({
            "node": t.node,
            "numerator_set": t.numerator_set,
            "denominator_set": t.denominator_set,
            "ratio": num(t.ratio),
        })).collect::<Vec<_>>()),
        "value": f.result.as_ref().map(|r| num(r.value)),
        "oracle": num(f.oracle),
        "verdict": verdict,
    });
    let code = match verdict {
        "not-applicable" => EXIT_NOT_APPLICABLE,
        "mismatch" => EXIT_NUMERICAL,
        _ => 0,
    };
    Ok(Report { text, json, code })
}

fn verdict(f: &Factorization) -> &'static str {
    match f.matches_oracle() {
        None => "not-applicable",
        Some(true) => "match",
        Some(false) => "mismatch",
    }
}

fn role_name(r: factorize::Role) -> &'static str {
    match r {
        factorize::Role::Root => "root",
        factorize::Role::FromX => "from-x",
        factorize::Role::FromY => "from-y",
    }
}

fn names(d: &PathDiagram, ix: &[usize]) -> Vec<String> {
    ix.iter().map(|&i| d.name(i).to_string()).collect()
}

fn simpson_cmd(
    d: &PathDiagram,
    x: &str,
    y: &str,
    given: &[String],
    search: Option<usize>,
    seed: u64,
) -> Result<Report, Failure> {
    let mut text = String::new();
    let mut measures = Vec::new();
    for (label, m) in [("covariance", AssociationMeasure::Covariance), ("regression", AssociationMeasure::RegressionCoefficient)] {
        let c = simpson::collapsibility_check(d, x, y, given, m)?;
        let _ = writeln!(
            text,
            "{label}: marginal {} conditional {} -> {}",
            real(c.marginal),
            real(c.conditional),
            if c.collapsible { "collapsible" } else { "not collapsible" }
        );
        measures.push(json!({
            "measure": label,
            "marginal": num(c.marginal),
            "conditional": num(c.conditional),
            "collapsible": c.collapsible,
        }));
    }
    let mut witness_json = Value::Null;
    if let Some(trials) = search {
        match simpson::simpson_witness_search(d, x, y, given, trials, seed)? {
            Some(w) => {
                let body = format::format_diagram(&w.diagram);
                let _ = writeln!(
                    text,
                    "sign reversal at trial {}: regression {} -> {}",
                    w.trial,
                    real(w.marginal),
                    real(w.conditional)
                );
                let _ = writeln!(text, "# witness parameters");
                text.push_str(&body);
                witness_json = json!({
                    "trial": w.trial,
                    "marginal": num(w.marginal),
                    "conditional": num(w.conditional),
                    "diagram": body,
                });
            }
            None => {
                let _ = writeln!(text, "no sign reversal in {trials} trials");
            }
        }
    }
    Ok(Report::ok(text, json!({ "x": x, "y": y, "given": given, "measures": measures, "witness": witness_json })))
}

fn generator(g: &GenArgs) -> GeneratorConfig {
    GeneratorConfig {
        node_count: g.nodes,
        edge_density: g.density,
        bidirected_fraction: g.bidirected,
        singly_connected: g.tree,
        seed: g.seed,
        ..GeneratorConfig::default()
    }
}

fn gen(g: &GenArgs) -> Result<Report, Failure> {
    let d = harness::random_diagram(&generator(g))?;
    let body = format::format_diagram(&d);
    Ok(Report::ok(body.clone(), json!({ "seed": g.seed, "diagram": body })))
}

fn sweep(kind: SweepKind, trials: usize, artifact: Option<&Path>, g: &GenArgs) -> Result<Report, Failure> {
    let cfg = generator(g);
    let (stats, first) = match kind {
        SweepKind::Soundness => {
            let st = harness::sweep_soundness(&cfg, trials)?;
            let first = st.first_mismatch.clone();
            (serde_json::to_value(&st).expect("stats serialize"), first)
        }
        SweepKind::Simpson => {
            let st = harness::sweep_simpson(&cfg, trials)?;
            let first = st.first_reversal.clone();
            (serde_json::to_value(&st).expect("stats serialize"), first)
        }
    };
    let stats = round_numbers(stats);
    let mut text = String::new();
    if let Value::Object(map) = &stats {
        for (k, v) in map {
            let _ = writeln!(text, "{k}: {}", plain(v));
        }
    }
    let mut written = Value::Null;
    if let (Some(path), Some(a)) = (artifact, &first) {
        std::fs::write(path, a.to_text()).map_err(|e| usage(format!("writing {}: {e}", path.display())))?;
        let _ = writeln!(text, "first failure written to {}", path.display());
        written = json!(path.display().to_string());
    }
    let json = json!({ "kind": format!("{kind:?}").to_lowercase(), "stats": stats, "artifact": written });
    Ok(Report::ok(text, json))
}

fn round_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or_default()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_numbers(v))).collect()),
        Value::Array(a) => Value::Array(a.into_iter().map(round_numbers).collect()),
        other => other,
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => real(n.as_f64().unwrap_or_default()),
        Value::Object(m) => {
            let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k}={}", plain(v))).collect();
            format!("{{{}}}", parts.join(", "))
        }
        other => other.to_string(),
    }
}

fn replay(path: &Path) -> Result<Report, Failure> {
    let a = ReplayArtifact::parse(&read_text(path)?)?;
    let outcome = a.replay();
    let reproduced = match a.expect.as_str() {
        "reversal" => sign_reversed(&a)?,
        expect => outcome.label() == expect,
    };
    let mut text = String::new();
    let _ = writeln!(text, "query: cov({}, {} | {})", a.x, a.y, set(&a.s));
    let _ = writeln!(text, "mode: {}", harness::mode_name(a.mode));
    let _ = writeln!(text, "recorded: {}", a.expect);
    let _ = writeln!(text, "observed: {}", outcome.label());
    if let Outcome::Mismatch { value, oracle, rel_error } = &outcome {
        let _ = writeln!(text, "value {} oracle {} relative error {}", real(*value), real(*oracle), real(*rel_error));
    }
    let _ = writeln!(text, "{}", if reproduced { "reproduced" } else { "not reproduced" });
    let json = json!({
        "recorded": a.expect,
        "observed": outcome.label(),
        "reproduced": reproduced,
    });
    Ok(Report { text, json, code: if reproduced { 0 } else { EXIT_NUMERICAL } })
}

fn sign_reversed(a: &ReplayArtifact) -> Result<bool, Failure> {
    let d = &a.diagram;
    let sigma = gaussian::implied_covariance(d)?;
    let (x, y, s) = (d.index_of(a.x.as_str())?, d.index_of(a.y.as_str())?, d.indices_of(&a.s)?);
    let before = sigma.regression_coefficient(y, x, &[])?;
    let after = sigma.regression_coefficient(y, x, &s)?;
    Ok(before.abs() > simpson::WITNESS_FLOOR && after.abs() > simpson::WITNESS_FLOOR && before.signum() != after.signum())
}
