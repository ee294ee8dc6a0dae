//! Reader and writer for the `.gnoop` declaration format.
//!
//! ```text
//! env        ::= constructor*
//! constructor::= "constructor" IDENT "<" tvarlist? ">" "extends" "{" typelist? "}" "{" member* "}"
//! tvarlist   ::= tvar ("," tvar)* ;  tvar ::= IDENT ("extends" type)?
//! typelist   ::= type ("," type)*
//! type       ::= IDENT ("<" typelist? ">")?
//! member     ::= "field" IDENT ":" type ";"
//!              | "method" IDENT ("<" tvarlist? ">")? "(" typelist? ")" ":" type ";"
//! ```
//!
//! A bare identifier that names a type variable in scope reads as that
//! variable; any other identifier reads as a constructor application.

use std::fmt::Write as _;

use crate::diag::{Code, Diagnostic, Site, SourceMap, SourceSpan};
use crate::syntax::{
    BoundedVar, ConstructorEnvironment, FieldSig, Label, MethodSig, Name, SignatureConstructor,
    TypeName, TypeVarName,
};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Constructor,
    Extends,
    Field,
    Method,
    Lt,
    Gt,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Semi,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Constructor => "`constructor`".into(),
            Tok::Extends => "`extends`".into(),
            Tok::Field => "`field`".into(),
            Tok::Method => "`method`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let span = |len: usize| SourceSpan { line, column: col, length: len as u32 };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let tok = match text.as_str() {
                "constructor" => Tok::Constructor,
                "extends" => Tok::Extends,
                "field" => Tok::Field,
                "method" => Tok::Method,
                _ => Tok::Ident(text),
            };
            out.push(Token { tok, span: span(i - start) });
            col += (i - start) as u32;
            continue;
        }
        let tok = match c {
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            ',' => Tok::Comma,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            _ => {
                return Err(Diagnostic::error(Code::E000, format!("unexpected character `{c}`"))
                    .with_span(span(1)))
            }
        };
        out.push(Token { tok, span: span(1) });
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::Eof, span: SourceSpan { line, column: col, length: 0 } });
    Ok(out)
}

/// A type as written, before variable/application disambiguation.
#[derive(Clone, Debug)]
struct RawType {
    name: String,
    span: SourceSpan,
    args: Option<Vec<RawType>>,
}

impl RawType {
    fn resolve(&self, scope: &[TypeVarName]) -> TypeName {
        match &self.args {
            None if scope.iter().any(|v| v.as_str() == self.name) => TypeName::var(&self.name),
            None => TypeName::con(&self.name),
            Some(args) => TypeName::app(&self.name, args.iter().map(|a| a.resolve(scope)).collect()),
        }
    }
}

struct RawTvar {
    name: String,
    span: SourceSpan,
    bound: Option<RawType>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0, diags: Vec::new() })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        let t = self.peek();
        Diagnostic::error(Code::E000, format!("expected {wanted}, found {}", t.tok.describe()))
            .with_span(t.span)
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn raw_type(&mut self) -> PResult<RawType> {
        let (name, span) = self.ident()?;
        let args = if self.eat(&Tok::Lt) {
            let mut args = Vec::new();
            if !self.eat(&Tok::Gt) {
                loop {
                    args.push(self.raw_type()?);
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    self.expect(Tok::Gt)?;
                    break;
                }
            }
            Some(args)
        } else {
            None
        };
        Ok(RawType { name, span, args })
    }

    fn type_list(&mut self, close: Tok) -> PResult<Vec<RawType>> {
        let mut out = Vec::new();
        if self.eat(&close) {
            return Ok(out);
        }
        loop {
            out.push(self.raw_type()?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(close)?;
            return Ok(out);
        }
    }

    /// Parses the contents of `<…>` up to and including the closing `>`.
    fn tvar_list(&mut self) -> PResult<Vec<RawTvar>> {
        let mut out = Vec::new();
        if self.eat(&Tok::Gt) {
            return Ok(out);
        }
        loop {
            let (name, span) = self.ident()?;
            let bound = if self.eat(&Tok::Extends) { Some(self.raw_type()?) } else { None };
            if out.iter().any(|t: &RawTvar| t.name == name) {
                self.diags.push(
                    Diagnostic::error(Code::E002, format!("type variable `{name}` declared twice"))
                        .with_span(span),
                );
            }
            out.push(RawTvar { name, span, bound });
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::Gt)?;
            return Ok(out);
        }
    }

    fn constructor(&mut self, map: &mut SourceMap) -> PResult<(SignatureConstructor, SourceSpan)> {
        self.expect(Tok::Constructor)?;
        let (name, name_span) = self.ident()?;
        let cname = Name::new(&name);
        self.expect(Tok::Lt)?;
        let raw_tvars = self.tvar_list()?;
        let scope: Vec<TypeVarName> = raw_tvars.iter().map(|t| TypeVarName::new(&t.name)).collect();
        let tvars = raw_tvars
            .iter()
            .enumerate()
            .map(|(i, t)| {
                map.insert(Site::TypeVar(cname.clone(), i), t.span);
                BoundedVar { var: TypeVarName::new(&t.name), bound: t.bound.as_ref().map(|b| b.resolve(&scope)) }
            })
            .collect();
        self.expect(Tok::Extends)?;
        self.expect(Tok::LBrace)?;
        let supers = self
            .type_list(Tok::RBrace)?
            .iter()
            .enumerate()
            .map(|(i, t)| {
                map.insert(Site::Super(cname.clone(), i), t.span);
                t.resolve(&scope)
            })
            .collect();
        self.expect(Tok::LBrace)?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        loop {
            match self.peek().tok {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Field => {
                    self.bump();
                    let (label, span) = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let ty = self.raw_type()?.resolve(&scope);
                    self.expect(Tok::Semi)?;
                    map.insert(Site::Field(cname.clone(), Label::new(&label)), span);
                    fields.push(FieldSig::new(label, ty));
                }
                Tok::Method => {
                    self.bump();
                    let (label, span) = self.ident()?;
                    let raw_m = if self.eat(&Tok::Lt) { self.tvar_list()? } else { Vec::new() };
                    let mut mscope = scope.clone();
                    mscope.extend(raw_m.iter().map(|t| TypeVarName::new(&t.name)));
                    let mtvars = raw_m
                        .iter()
                        .map(|t| BoundedVar {
                            var: TypeVarName::new(&t.name),
                            bound: t.bound.as_ref().map(|b| b.resolve(&mscope)),
                        })
                        .collect();
                    self.expect(Tok::LParen)?;
                    let params = self.type_list(Tok::RParen)?.iter().map(|t| t.resolve(&mscope)).collect();
                    self.expect(Tok::Colon)?;
                    let ret = self.raw_type()?.resolve(&mscope);
                    self.expect(Tok::Semi)?;
                    map.insert(Site::Method(cname.clone(), Label::new(&label)), span);
                    methods.push(MethodSig { label: Label::new(label), mtvars, params, ret });
                }
                _ => return Err(self.unexpected("`field`, `method` or `}`")),
            }
        }
        Ok((SignatureConstructor { name: cname, tvars, supers, fields, methods }, name_span))
    }
}

/// Parses a whole environment and records where each construct was read.
pub fn parse_env_with_map(src: &str) -> Result<(ConstructorEnvironment, SourceMap), Vec<Diagnostic>> {
    let mut p = Parser::new(src).map_err(|d| vec![d])?;
    let mut env = ConstructorEnvironment::new();
    let mut map = SourceMap::default();
    while p.peek().tok != Tok::Eof {
        match p.constructor(&mut map) {
            Ok((sc, span)) => {
                if env.contains(&sc.name) {
                    p.diags.push(
                        Diagnostic::error(Code::E001, format!("constructor `{}` declared twice", sc.name))
                            .with_span(span),
                    );
                } else {
                    map.insert(Site::Constructor(sc.name.clone()), span);
                    env.insert(sc);
                }
            }
            Err(d) => {
                p.diags.push(d);
                return Err(p.diags);
            }
        }
    }
    if p.diags.is_empty() {
        Ok((env, map))
    } else {
        Err(p.diags)
    }
}

pub fn parse_env(src: &str) -> Result<ConstructorEnvironment, Vec<Diagnostic>> {
    parse_env_with_map(src).map(|(env, _)| env)
}

/// Parses a type name against `env` with no variables in scope: a bare
/// identifier bound in `env` is a zeroary application, anything else bare
/// is a variable.
pub fn parse_type_name(src: &str, env: &ConstructorEnvironment) -> Result<TypeName, Vec<Diagnostic>> {
    parse_type_name_in(src, env, &[])
}

/// Like [`parse_type_name`], with `scope` variables taking priority over
/// constructor names.
pub fn parse_type_name_in(
    src: &str,
    env: &ConstructorEnvironment,
    scope: &[TypeVarName],
) -> Result<TypeName, Vec<Diagnostic>> {
    let mut p = Parser::new(src).map_err(|d| vec![d])?;
    let raw = p.raw_type().map_err(|d| vec![d])?;
    if p.peek().tok != Tok::Eof {
        return Err(vec![p.unexpected("end of input")]);
    }
    Ok(resolve_against_env(&raw, env, scope))
}

fn resolve_against_env(raw: &RawType, env: &ConstructorEnvironment, scope: &[TypeVarName]) -> TypeName {
    match &raw.args {
        None if scope.iter().any(|v| v.as_str() == raw.name) => TypeName::var(&raw.name),
        None if env.contains(&Name::new(&raw.name)) => TypeName::con(&raw.name),
        None => TypeName::var(&raw.name),
        Some(args) => {
            TypeName::app(&raw.name, args.iter().map(|a| resolve_against_env(a, env, scope)).collect())
        }
    }
}

/// Renders a type; a zeroary application whose head is shadowed by a
/// variable in `scope` is written with explicit `<>`.
pub fn render_type_in(t: &TypeName, scope: &[TypeVarName]) -> String {
    let mut s = String::new();
    write_type(&mut s, t, scope);
    s
}

fn write_type(out: &mut String, t: &TypeName, scope: &[TypeVarName]) {
    match t {
        TypeName::Var(v) => out.push_str(v.as_str()),
        TypeName::App(h, args) => {
            out.push_str(h.as_str());
            if args.is_empty() {
                if scope.iter().any(|v| v.as_str() == h.as_str()) {
                    out.push_str("<>");
                }
            } else {
                out.push('<');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_type(out, a, scope);
                }
                out.push('>');
            }
        }
    }
}

pub fn render_type(t: &TypeName) -> String {
    t.to_string()
}

fn write_tvars(out: &mut String, tvars: &[BoundedVar], scope: &[TypeVarName]) {
    for (i, b) in tvars.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(b.var.as_str());
        if let Some(bound) = &b.bound {
            out.push_str(" extends ");
            write_type(out, bound, scope);
        }
    }
}

pub fn render_constructor(sc: &SignatureConstructor) -> String {
    let scope = sc.tvar_names();
    let mut out = String::new();
    let _ = write!(out, "constructor {}<", sc.name);
    write_tvars(&mut out, &sc.tvars, &scope);
    out.push_str("> extends {");
    if !sc.supers.is_empty() {
        out.push(' ');
        let supers: Vec<_> = sc.supers.iter().map(|t| render_type_in(t, &scope)).collect();
        out.push_str(&supers.join(", "));
        out.push(' ');
    }
    out.push_str("} {");
    if sc.fields.is_empty() && sc.methods.is_empty() {
        out.push('}');
        return out;
    }
    out.push('\n');
    for f in &sc.fields {
        let _ = writeln!(out, "    field {}: {};", f.label, render_type_in(&f.ty, &scope));
    }
    for m in &sc.methods {
        let mut mscope = scope.clone();
        mscope.extend(m.mtvar_names());
        let _ = write!(out, "    method {}", m.label);
        if !m.mtvars.is_empty() {
            out.push('<');
            write_tvars(&mut out, &m.mtvars, &mscope);
            out.push('>');
        }
        let params: Vec<_> = m.params.iter().map(|t| render_type_in(t, &mscope)).collect();
        let _ = writeln!(out, "({}): {};", params.join(", "), render_type_in(&m.ret, &mscope));
    }
    out.push('}');
    out
}

pub fn render_env(env: &ConstructorEnvironment) -> String {
    let mut out = String::new();
    for sc in env.constructors() {
        out.push_str(&render_constructor(sc));
        out.push('\n');
    }
    out
}
