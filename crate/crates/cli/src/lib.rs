//! The `gnoop` command-line front end.
//!
//! Every subcommand loads a `.gnoop` file, runs one analysis and prints a
//! report, either as text or as a single JSON document.

use std::io::IsTerminal;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use gnoop_core::denote::{enumerate_ground_names_capped, DEFAULT_CAP};
use gnoop_core::parser::render_constructor;
use gnoop_core::subst::GroundingMode;
use gnoop_core::{
    check_erasure_theorem, denote, erase_env, erase_name, expansiveness, inject_top, instantiate,
    instantiation_closure, parse_env_with_map, parse_type_name, render_env, subsigns, theorem_check_with,
    valid_ground_name, validate_env_usage, wf_env, wf_type_name, Code, ConstructorEnvironment, Diagnostic,
    ErasureConfig, GenericObjectSignature, GroundSignature, Name, SourceMap, TheoremOptions, TypeName,
};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug, Clone)]
#[command(name = "gnoop", version, about = "Checks and analyses generic nominal object signatures")]
pub struct Cli {
    /// Emit one JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Name of the top constructor.
    #[arg(long, global = true, default_value = "Object")]
    pub top: String,
    /// Add the top constructor and make it the super of every root.
    #[arg(long, global = true)]
    pub inject_top: bool,
    /// Distinct names the closure may discover.
    #[arg(long, global = true, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub fuel: u64,
    /// Maximum nesting depth of enumerated ground names.
    #[arg(long, global = true, default_value_t = 2)]
    pub depth: usize,
    /// Keep only names whose arguments respect their bounds.
    #[arg(long, global = true)]
    pub valid_only: bool,
    /// Treat warnings as failures.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Omit the timestamp from JSON output.
    #[arg(long, global = true)]
    pub stable: bool,
    /// Erase naked variables to the top even when they are bounded.
    #[arg(long, global = true)]
    pub erase_to_top: bool,
    /// Refuse universes that could hold more names than this.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Check that the environment is well-formed.
    Check { file: PathBuf },
    /// Decide whether SUB subsigns SUP.
    Subsign { file: PathBuf, sub: String, sup: String },
    /// Print the ground signature of a ground name.
    Instantiate { file: PathBuf, name: String },
    /// Erase the environment, and check the erasure of NAME if given.
    Erase { file: PathBuf, name: Option<String> },
    /// Check that ground names respect their bounds.
    Validate { file: PathBuf, names: Vec<String> },
    /// Collect the ground names an instantiation refers to.
    Closure { file: PathBuf, name: String },
    /// Look for expansive cycles among type parameters.
    Expansive { file: PathBuf },
    /// List the ground names up to the given depth.
    Enumerate { file: PathBuf },
    /// List the names denoted by NAME within the enumerated universe.
    Denote { file: PathBuf, name: String },
    /// Compare subsigning with inclusion of denotations on every pair.
    TheoremCheck { file: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Subsign { .. } => "subsign",
            Command::Instantiate { .. } => "instantiate",
            Command::Erase { .. } => "erase",
            Command::Validate { .. } => "validate",
            Command::Closure { .. } => "closure",
            Command::Expansive { .. } => "expansive",
            Command::Enumerate { .. } => "enumerate",
            Command::Denote { .. } => "denote",
            Command::TheoremCheck { .. } => "theorem-check",
        }
    }

    pub fn file(&self) -> &PathBuf {
        match self {
            Command::Check { file }
            | Command::Subsign { file, .. }
            | Command::Instantiate { file, .. }
            | Command::Erase { file, .. }
            | Command::Validate { file, .. }
            | Command::Closure { file, .. }
            | Command::Expansive { file }
            | Command::Enumerate { file }
            | Command::Denote { file, .. }
            | Command::TheoremCheck { file } => file,
        }
    }
}

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct JsonDiagnostic {
    pub code: String,
    pub severity: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<u32>,
}

impl From<&Diagnostic> for JsonDiagnostic {
    fn from(d: &Diagnostic) -> Self {
        JsonDiagnostic {
            code: d.code.as_str().to_string(),
            severity: d.severity.as_str().to_string(),
            message: d.message.clone(),
            line: d.span.map(|s| s.line),
            column: d.span.map(|s| s.column),
        }
    }
}

#[derive(Serialize, Debug)]
struct JsonReport<'a> {
    command: &'a str,
    ok: bool,
    diagnostics: Vec<JsonDiagnostic>,
    result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

/// What a run produced, before formatting.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: &'static str,
    pub diagnostics: Vec<Diagnostic>,
    pub result: Value,
    /// Text lines for human output, printed after the diagnostics.
    pub lines: Vec<String>,
    /// Set when the run could not start: unreadable or unparsable input,
    /// or a malformed type-name argument.
    pub usage_failure: bool,
}

impl Outcome {
    fn new(command: &'static str) -> Self {
        Outcome { command, diagnostics: Vec::new(), result: json!({}), lines: Vec::new(), usage_failure: false }
    }

    pub fn ok(&self) -> bool {
        !self.usage_failure && !self.diagnostics.iter().any(Diagnostic::is_error)
    }

    pub fn exit_code(&self, strict: bool) -> i32 {
        if self.usage_failure {
            EXIT_USAGE
        } else if !self.ok() || (strict && !self.diagnostics.is_empty()) {
            EXIT_FINDINGS
        } else {
            EXIT_OK
        }
    }
}

struct Loaded {
    env: Arc<ConstructorEnvironment>,
    map: SourceMap,
}

fn load(cli: &Cli, out: &mut Outcome) -> Option<Loaded> {
    let path = cli.command.file();
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            out.diagnostics.push(Diagnostic::error(Code::E000, format!("cannot read `{}`: {e}", path.display())));
            out.usage_failure = true;
            return None;
        }
    };
    match parse_env_with_map(&src) {
        Ok((env, map)) => {
            let env = if cli.inject_top { inject_top(&env, &erasure_config(cli)) } else { env };
            Some(Loaded { env: Arc::new(env), map })
        }
        Err(diags) => {
            out.usage_failure = true;
            out.diagnostics.extend(diags);
            None
        }
    }
}

fn erasure_config(cli: &Cli) -> ErasureConfig {
    ErasureConfig { top: Name::new(&cli.top), bound_aware: !cli.erase_to_top }
}

/// Parses a ground-name argument. Syntax errors are usage failures;
/// unknown heads and variables are reported as E100.
fn ground_arg(text: &str, env: &ConstructorEnvironment, out: &mut Outcome) -> Option<TypeName> {
    let t = match parse_type_name(text, env) {
        Ok(t) => t,
        Err(diags) => {
            out.diagnostics.extend(diags);
            out.usage_failure = true;
            return None;
        }
    };
    // Undeclared names parse as variables.
    let mut diags: Vec<Diagnostic> = t
        .free_vars()
        .iter()
        .map(|v| Diagnostic::error(Code::E100, format!("`{v}` in `{t}` is not a declared constructor")))
        .collect();
    if diags.is_empty() {
        diags = wf_type_name(&t, env, &[]).diagnostics;
    }
    if diags.is_empty() {
        Some(t)
    } else {
        out.diagnostics.extend(diags);
        None
    }
}

fn names_json<'a>(names: impl IntoIterator<Item = &'a TypeName>) -> Vec<String> {
    names.into_iter().map(|t| t.to_string()).collect()
}

fn signature_json(g: &GroundSignature) -> Value {
    json!({
        "name": g.name.to_string(),
        "supers": names_json(&g.supers),
        "fields": g.fields.iter().map(|f| json!({"label": f.label.as_str(), "type": f.ty.to_string()})).collect::<Vec<_>>(),
        "methods": g.methods.iter().map(|m| json!({
            "label": m.label.as_str(),
            "type_vars": m.mtvars.iter().map(|b| json!({
                "var": b.var.as_str(),
                "bound": b.bound.as_ref().map(|t| t.to_string()),
            })).collect::<Vec<_>>(),
            "params": names_json(&m.params),
            "ret": m.ret.to_string(),
        })).collect::<Vec<_>>(),
    })
}

fn signature_text(g: &GroundSignature) -> Vec<String> {
    let mut lines = vec![format!("{} extends {{ {} }}", g.name, names_json(&g.supers).join(", "))];
    lines.extend(g.fields.iter().map(|f| format!("    field {}: {};", f.label, f.ty)));
    for m in &g.methods {
        let vars: Vec<String> = m
            .mtvars
            .iter()
            .map(|b| match &b.bound {
                Some(t) => format!("{} extends {t}", b.var),
                None => b.var.to_string(),
            })
            .collect();
        let vars = if vars.is_empty() { String::new() } else { format!("<{}>", vars.join(", ")) };
        lines.push(format!("    method {}{vars}({}): {};", m.label, names_json(&m.params).join(", "), m.ret));
    }
    lines
}

/// Runs one invocation without printing anything.
pub fn execute(cli: &Cli) -> Outcome {
    let mut out = Outcome::new(cli.command.name());
    let Some(Loaded { env, map }) = load(cli, &mut out) else { return out };
    let locate = |ds: Vec<Diagnostic>| -> Vec<Diagnostic> { ds.into_iter().map(|d| d.locate(&map)).collect() };

    match &cli.command {
        Command::Check { .. } => {
            let r = wf_env(&env);
            out.diagnostics.extend(locate(r.diagnostics));
            out.result = json!({ "constructors": env.len() });
            if out.ok() {
                out.lines.push(format!("well-formed: {} constructors", env.len()));
            }
        }
        Command::Subsign { sub, sup, .. } => {
            let (Some(a), Some(b)) = (ground_arg(sub, &env, &mut out), ground_arg(sup, &env, &mut out)) else {
                return out;
            };
            let v = subsigns(
                &GenericObjectSignature::new_unchecked(a.clone(), env.clone()),
                &GenericObjectSignature::new_unchecked(b.clone(), env.clone()),
            );
            out.result = json!({ "holds": v.holds, "chain": names_json(&v.chain) });
            out.lines.push(format!("{a} {} {b}", if v.holds { "subsigns" } else { "does not subsign" }));
            if v.chain.len() > 1 {
                out.lines.push(format!("chain: {}", names_json(&v.chain).join(" -> ")));
            }
        }
        Command::Instantiate { name, .. } => {
            let Some(g) = ground_arg(name, &env, &mut out) else { return out };
            let sc = env.get(g.head().expect("ground")).expect("checked");
            let mode = if cli.strict { GroundingMode::Strict } else { GroundingMode::Relaxed };
            match instantiate(sc, g.args(), mode) {
                Ok(inst) => {
                    out.diagnostics.extend(inst.warnings);
                    out.result = json!({ "signature": signature_json(&inst.signature) });
                    out.lines.extend(signature_text(&inst.signature));
                }
                Err(d) => out.diagnostics.push(d),
            }
        }
        Command::Erase { name, .. } => {
            let cfg = erasure_config(cli);
            let erased = match erase_env(&env, &cfg) {
                Ok(e) => e,
                Err(d) => {
                    out.diagnostics.push(d);
                    return out;
                }
            };
            out.result = json!({
                "environment": render_env(&erased),
                "constructors": erased.constructors().map(|sc| (sc.name.to_string(), json!(render_constructor(sc)))).collect::<serde_json::Map<_, _>>(),
            });
            out.lines.push(render_env(&erased));
            if let Some(name) = name {
                let Some(g) = ground_arg(name, &env, &mut out) else { return out };
                let r = check_erasure_theorem(&GenericObjectSignature::new_unchecked(g.clone(), env.clone()), &cfg);
                out.result["name"] = json!(erase_name(&g).to_string());
                out.result["theorem_ok"] = json!(r.ok);
                out.lines.push(format!("erasure of {g} is {}", erase_name(&g)));
                out.diagnostics.extend(r.diagnostics);
            }
        }
        Command::Validate { names, .. } => {
            if names.is_empty() {
                out.diagnostics.extend(locate(validate_env_usage(&env).diagnostics));
            } else {
                for n in names {
                    if let Some(g) = ground_arg(n, &env, &mut out) {
                        out.diagnostics.extend(valid_ground_name(&env, &g).diagnostics);
                    }
                }
            }
            out.result = json!({ "valid": out.ok() });
            if out.ok() {
                out.lines.push("valid".to_string());
            }
        }
        Command::Closure { name, .. } => {
            let Some(g) = ground_arg(name, &env, &mut out) else { return out };
            let fuel = usize::try_from(cli.fuel).unwrap_or(usize::MAX);
            let c = instantiation_closure(&GenericObjectSignature::new_unchecked(g.clone(), env.clone()), fuel);
            if c.exhausted_fuel {
                out.diagnostics.push(Diagnostic::warning(
                    Code::E251,
                    format!("closure of `{g}` needs more than {fuel} names"),
                ));
            }
            out.result = json!({ "closure": names_json(&c.names), "exhausted_fuel": c.exhausted_fuel });
            out.lines.extend(c.names.iter().map(|t| t.to_string()));
        }
        Command::Expansive { .. } => {
            let r = expansiveness(&env);
            let cycle: Vec<String> = r.witness_cycle.iter().map(|n| format!("({},{})", n.constructor, n.index)).collect();
            if r.expansive {
                out.diagnostics.push(
                    Diagnostic::warning(Code::E250, format!("expansive parameter cycle: {}", cycle.join(" -> ")))
                        .with_related(cycle.clone()),
                );
            } else {
                out.lines.push("not expansive".to_string());
            }
            out.result = json!({
                "expansive": r.expansive,
                "witness_cycle": cycle,
                "witness_edges": r.witness_edges.iter().map(|k| format!("{k:?}").to_lowercase()).collect::<Vec<_>>(),
            });
        }
        Command::Enumerate { .. } => match enumerate_ground_names_capped(&env, cli.depth, cli.valid_only, cli.cap) {
            Ok(u) => {
                out.result = json!({ "universe_size": u.len(), "names": names_json(&u.names) });
                out.lines.extend(u.names.iter().map(|t| t.to_string()));
            }
            Err(d) => out.diagnostics.push(d),
        },
        Command::Denote { name, .. } => {
            let Some(g) = ground_arg(name, &env, &mut out) else { return out };
            let u = match enumerate_ground_names_capped(&env, cli.depth, cli.valid_only, cli.cap) {
                Ok(u) => u,
                Err(d) => {
                    out.diagnostics.push(d);
                    return out;
                }
            };
            match denote(&GenericObjectSignature::new_unchecked(g, env.clone()), &u) {
                Ok(set) => {
                    out.result = json!({ "universe_size": u.len(), "denotation": names_json(&set) });
                    out.lines.extend(set.iter().map(|t| t.to_string()));
                }
                Err(d) => out.diagnostics.push(d),
            }
        }
        Command::TheoremCheck { .. } => {
            let opts = TheoremOptions { depth: cli.depth, valid_only: cli.valid_only, cap: cli.cap };
            let r = theorem_check_with(&env, &opts);
            out.diagnostics.extend(r.report.diagnostics);
            out.result = json!({
                "universe_size": r.universe_size,
                "pairs_checked": r.pairs_checked,
                "violations": r.violations,
                "counterexample": r.counterexample.as_ref().map(|c| json!({
                    "sub": c.sub.to_string(),
                    "sup": c.sup.to_string(),
                    "subsigns": c.subsigns,
                    "denotation_included": c.denotation_included,
                    "witness": c.witness.as_ref().map(|w| w.to_string()),
                })),
            });
            if out.ok() {
                out.lines.push(format!("theorem holds on {} pairs of {} names", r.pairs_checked, r.universe_size));
            }
        }
    }
    out
}

/// Formats an outcome as one JSON document.
pub fn to_json(out: &Outcome, stable: bool) -> String {
    let timestamp = (!stable).then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    let report = JsonReport {
        command: out.command,
        ok: out.ok(),
        diagnostics: out.diagnostics.iter().map(JsonDiagnostic::from).collect(),
        result: out.result.clone(),
        timestamp,
    };
    serde_json::to_string_pretty(&report).expect("report serializes")
}

/// Formats an outcome as text.
pub fn to_text(out: &Outcome, color: bool) -> String {
    let mut s = String::new();
    for d in &out.diagnostics {
        let text = d.to_string();
        if color {
            let sev = d.severity.as_str();
            let paint = if d.is_error() { "\x1b[1;31m" } else { "\x1b[1;33m" };
            s.push_str(&format!("{paint}{sev}\x1b[0m{}\n", &text[sev.len()..]));
        } else {
            s.push_str(&text);
            s.push('\n');
        }
        for r in d.related.iter().filter(|r| !d.message.contains(r.as_str())) {
            s.push_str(&format!("  note: {r}\n"));
        }
    }
    for l in &out.lines {
        s.push_str(l);
        s.push('\n');
    }
    s
}

fn color_enabled() -> bool {
    std::env::var("GNOOP_COLOR").map_or(true, |v| v != "0") && std::io::stdout().is_terminal()
}

/// Runs an invocation, prints its report and returns the exit status.
pub fn run(cli: &Cli) -> i32 {
    let out = execute(cli);
    if cli.json {
        println!("{}", to_json(&out, cli.stable));
    } else {
        print!("{}", to_text(&out, color_enabled()));
    }
    out.exit_code(cli.strict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("gnoop").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn parses_global_flags_after_subcommand() {
        let c = cli(&["closure", "x.gnoop", "C<Int>", "--fuel", "5", "--json"]);
        assert!(c.json);
        assert_eq!(c.fuel, 5);
        assert_eq!(c.command.name(), "closure");
    }

    #[test]
    fn zero_fuel_is_rejected() {
        assert!(Cli::try_parse_from(["gnoop", "closure", "x", "C", "--fuel", "0"]).is_err());
    }

    #[test]
    fn subsign_needs_two_names() {
        assert!(Cli::try_parse_from(["gnoop", "subsign", "x.gnoop", "C<Int>"]).is_err());
    }

    #[test]
    fn exit_codes() {
        let mut o = Outcome::new("check");
        assert_eq!(o.exit_code(false), EXIT_OK);
        o.diagnostics.push(Diagnostic::warning(Code::E250, "w"));
        assert_eq!(o.exit_code(false), EXIT_OK);
        assert_eq!(o.exit_code(true), EXIT_FINDINGS);
        o.diagnostics.push(Diagnostic::error(Code::E101, "e"));
        assert_eq!(o.exit_code(false), EXIT_FINDINGS);
        o.usage_failure = true;
        assert_eq!(o.exit_code(false), EXIT_USAGE);
    }

    #[test]
    fn json_shape() {
        let mut o = Outcome::new("check");
        o.diagnostics.push(Diagnostic::error(Code::E101, "boom"));
        let v: Value = serde_json::from_str(&to_json(&o, true)).unwrap();
        assert_eq!(v["command"], "check");
        assert_eq!(v["ok"], false);
        assert_eq!(v["diagnostics"][0]["code"], "E101");
        assert!(v["diagnostics"][0].get("line").is_none());
        assert!(v.get("timestamp").is_none());
        let v: Value = serde_json::from_str(&to_json(&o, false)).unwrap();
        assert!(v["timestamp"].is_u64());
    }

    #[test]
    fn text_without_color() {
        let mut o = Outcome::new("check");
        o.diagnostics.push(Diagnostic::warning(Code::E250, "loop").with_related(["(C,0)".to_string()]));
        o.lines.push("done".into());
        assert_eq!(to_text(&o, false), "warning[E250]: loop\n  note: (C,0)\ndone\n");
        assert!(to_text(&o, true).contains("\x1b[1;33mwarning\x1b[0m[E250]"));
    }
}
