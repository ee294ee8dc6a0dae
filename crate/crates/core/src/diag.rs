//! Machine-readable check outcomes.
//!
//! Codes are stable: `E0xx` parsing, `E1xx` well-formedness, `E20x`
//! substitution, `E21x` validity, `E22x`..`E29x` erasure and the analyses.

use std::collections::HashMap;
use std::fmt;

use crate::syntax::{Label, Name};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    /// Lexical or syntax error.
    E000,
    /// Duplicate constructor name.
    E001,
    /// Duplicate type variable in one declaration list.
    E002,
    /// Unbound constructor name.
    E100,
    /// Wrong number of type arguments.
    E101,
    /// Type variable out of scope.
    E102,
    /// Duplicate field label.
    E103,
    /// Duplicate method label.
    E104,
    /// Method type variable reuses a class type variable name.
    E105,
    /// Binding key differs from the constructor's own name.
    E106,
    /// Naked type variable used as a supersignature.
    E110,
    /// Naked type variable used as a bound.
    E111,
    /// Inherited member missing.
    E120,
    /// Inherited member with a different signature.
    E121,
    /// Cycle in the supersignature hierarchy.
    E130,
    /// Substitution met a variable outside its domain.
    E200,
    /// Substitution does not match the constructor's variables.
    E201,
    /// Non-ground type argument.
    E202,
    /// Polymorphic method keeps the instantiation schematic.
    E203,
    /// Type argument violates its bound.
    E210,
    /// Designated top constructor missing or unsuitable.
    E220,
    /// Bound erasure never reaches a constructor name.
    E221,
    /// Counterexample to inheritance = subtyping.
    E230,
    /// Ground-name universe exceeds the size cap.
    E231,
    /// Expansive generic constructor.
    E250,
    /// Instantiation closure ran out of fuel.
    E251,
    /// Erasure produced an ill-formed non-generic environment.
    E299,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::E000 => "E000",
            Code::E001 => "E001",
            Code::E002 => "E002",
            Code::E100 => "E100",
            Code::E101 => "E101",
            Code::E102 => "E102",
            Code::E103 => "E103",
            Code::E104 => "E104",
            Code::E105 => "E105",
            Code::E106 => "E106",
            Code::E110 => "E110",
            Code::E111 => "E111",
            Code::E120 => "E120",
            Code::E121 => "E121",
            Code::E130 => "E130",
            Code::E200 => "E200",
            Code::E201 => "E201",
            Code::E202 => "E202",
            Code::E203 => "E203",
            Code::E210 => "E210",
            Code::E220 => "E220",
            Code::E221 => "E221",
            Code::E230 => "E230",
            Code::E231 => "E231",
            Code::E250 => "E250",
            Code::E251 => "E251",
            Code::E299 => "E299",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

/// 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

/// A syntactic location inside an environment, independent of source text.
/// The parser records a span for each site it reads.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Site {
    Constructor(Name),
    TypeVar(Name, usize),
    Super(Name, usize),
    Field(Name, Label),
    Method(Name, Label),
}

#[derive(Clone, Debug, Default)]
pub struct SourceMap {
    spans: HashMap<Site, SourceSpan>,
}

impl SourceMap {
    pub fn insert(&mut self, site: Site, span: SourceSpan) {
        self.spans.entry(site).or_insert(span);
    }

    pub fn get(&self, site: &Site) -> Option<SourceSpan> {
        self.spans.get(site).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub message: String,
    pub span: Option<SourceSpan>,
    pub site: Option<Site>,
    /// Renderings of the names involved.
    pub related: Vec<String>,
}

impl Diagnostic {
    pub fn error(code: Code, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            severity: Severity::Error,
            message: message.into(),
            span: None,
            site: None,
            related: Vec::new(),
        }
    }

    pub fn warning(code: Code, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, ..Diagnostic::error(code, message) }
    }

    pub fn at(mut self, site: Site) -> Self {
        self.site = Some(site);
        self
    }

    pub fn with_span(mut self, span: SourceSpan) -> Self {
        self.span = Some(span);
        self
    }

    pub fn with_related(mut self, related: impl IntoIterator<Item = String>) -> Self {
        self.related.extend(related);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Fills in `span` from `map` when the site is known and no span is set.
    pub fn locate(mut self, map: &SourceMap) -> Self {
        if self.span.is_none() {
            if let Some(site) = &self.site {
                self.span = map.get(site);
            }
        }
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]: {}", self.severity.as_str(), self.code, self.message)?;
        if let Some(span) = self.span {
            write!(f, " (line {}, column {})", span.line, span.column)?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}

/// Outcome of a check: `ok` iff no error-severity diagnostic is present.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WfReport {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl WfReport {
    pub fn from_diagnostics(diagnostics: Vec<Diagnostic>) -> Self {
        let ok = !diagnostics.iter().any(Diagnostic::is_error);
        WfReport { ok, diagnostics }
    }

    pub fn ok() -> Self {
        WfReport { ok: true, diagnostics: Vec::new() }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn has_code(&self, code: Code) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }

    pub fn codes(&self) -> Vec<Code> {
        self.diagnostics.iter().map(|d| d.code).collect()
    }

    pub fn merge(mut self, other: WfReport) -> Self {
        self.ok &= other.ok;
        self.diagnostics.extend(other.diagnostics);
        self
    }
}
