//! Well-formedness of type names, constructors and environments.
//!
//! Environment checks run in stages: structure and closedness, then
//! acyclicity of the supersignature head graph, then inherited-member
//! matching. A stage only runs when the previous ones reported no errors.

use std::collections::{HashMap, HashSet};

use crate::diag::{Code, Diagnostic, Site, WfReport};
use crate::subst::Substitution;
use crate::syntax::{
    sc_equal, ConstructorEnvironment, FieldSig, MethodSig, Name, SignatureConstructor, TypeName,
    TypeVarName,
};

/// Checks that `t` only applies bound constructors at their declared arity
/// and only mentions variables in `scope`.
pub fn wf_type_name(t: &TypeName, sce: &ConstructorEnvironment, scope: &[TypeVarName]) -> WfReport {
    let mut out = Vec::new();
    check_type(t, sce, scope, None, &mut out);
    WfReport::from_diagnostics(out)
}

fn check_type(
    t: &TypeName,
    sce: &ConstructorEnvironment,
    scope: &[TypeVarName],
    site: Option<&Site>,
    out: &mut Vec<Diagnostic>,
) {
    let locate = |d: Diagnostic| match site {
        Some(s) => d.at(s.clone()),
        None => d,
    };
    match t {
        TypeName::Var(v) => {
            if !scope.contains(v) {
                out.push(locate(Diagnostic::error(
                    Code::E102,
                    format!("type variable `{v}` is not in scope"),
                )));
            }
        }
        TypeName::App(head, args) => {
            match sce.get(head) {
                None => out.push(locate(
                    Diagnostic::error(Code::E100, format!("unknown constructor `{head}`"))
                        .with_related([head.to_string()]),
                )),
                Some(sc) if sc.arity() != args.len() => out.push(locate(
                    Diagnostic::error(
                        Code::E101,
                        format!(
                            "`{head}` expects {} type argument{}, got {} in `{t}`",
                            sc.arity(),
                            if sc.arity() == 1 { "" } else { "s" },
                            args.len()
                        ),
                    )
                    .with_related([t.to_string()]),
                )),
                Some(_) => {}
            }
            for a in args {
                check_type(a, sce, scope, site, out);
            }
        }
    }
}

fn duplicates<'a, T: Eq + std::hash::Hash + 'a>(items: impl IntoIterator<Item = &'a T>) -> Vec<&'a T> {
    let mut seen = HashSet::new();
    let mut dups = Vec::new();
    for i in items {
        if !seen.insert(i) && !dups.contains(&i) {
            dups.push(i);
        }
    }
    dups
}

/// Invariants that need no environment: distinct variables and labels,
/// no naked variables as supers or bounds.
fn structural(sc: &SignatureConstructor, out: &mut Vec<Diagnostic>) {
    let name = &sc.name;
    let class_vars = sc.tvar_names();
    for v in duplicates(&class_vars) {
        out.push(
            Diagnostic::error(Code::E002, format!("type variable `{v}` declared twice in `{name}`"))
                .at(Site::Constructor(name.clone())),
        );
    }
    for (i, b) in sc.tvars.iter().enumerate() {
        if let Some(TypeName::Var(w)) = &b.bound {
            out.push(
                Diagnostic::error(
                    Code::E111,
                    format!("type variable `{}` of `{name}` is bounded by the naked variable `{w}`", b.var),
                )
                .at(Site::TypeVar(name.clone(), i)),
            );
        }
    }
    for (i, s) in sc.supers.iter().enumerate() {
        if let TypeName::Var(v) = s {
            out.push(
                Diagnostic::error(
                    Code::E110,
                    format!("naked type variable `{v}` cannot be a supersignature of `{name}`"),
                )
                .at(Site::Super(name.clone(), i)),
            );
        }
    }
    for l in duplicates(sc.fields.iter().map(|f| &f.label)) {
        out.push(
            Diagnostic::error(Code::E103, format!("field `{l}` declared twice in `{name}`"))
                .at(Site::Field(name.clone(), l.clone())),
        );
    }
    for l in duplicates(sc.methods.iter().map(|m| &m.label)) {
        out.push(
            Diagnostic::error(Code::E104, format!("method `{l}` declared twice in `{name}`"))
                .at(Site::Method(name.clone(), l.clone())),
        );
    }
    for m in &sc.methods {
        let site = Site::Method(name.clone(), m.label.clone());
        let mvars = m.mtvar_names();
        for v in duplicates(&mvars) {
            out.push(
                Diagnostic::error(Code::E002, format!("type variable `{v}` declared twice in method `{}`", m.label))
                    .at(site.clone()),
            );
        }
        for v in mvars.iter().filter(|v| class_vars.contains(v)) {
            out.push(
                Diagnostic::error(
                    Code::E105,
                    format!("method `{}` redeclares type variable `{v}` of `{name}`", m.label),
                )
                .at(site.clone()),
            );
        }
        for b in &m.mtvars {
            if let Some(TypeName::Var(w)) = &b.bound {
                out.push(
                    Diagnostic::error(
                        Code::E111,
                        format!("type variable `{}` of method `{}` is bounded by the naked variable `{w}`", b.var, m.label),
                    )
                    .at(site.clone()),
                );
            }
        }
    }
}

/// Every type occurrence well-formed under its scope.
fn closedness(sc: &SignatureConstructor, sce: &ConstructorEnvironment, out: &mut Vec<Diagnostic>) {
    let name = &sc.name;
    let scope = sc.tvar_names();
    for (i, b) in sc.tvars.iter().enumerate() {
        if let Some(bound) = &b.bound {
            check_type(bound, sce, &scope, Some(&Site::TypeVar(name.clone(), i)), out);
        }
    }
    for (i, s) in sc.supers.iter().enumerate() {
        check_type(s, sce, &scope, Some(&Site::Super(name.clone(), i)), out);
    }
    for f in &sc.fields {
        check_type(&f.ty, sce, &scope, Some(&Site::Field(name.clone(), f.label.clone())), out);
    }
    for m in &sc.methods {
        let site = Site::Method(name.clone(), m.label.clone());
        let mut mscope = scope.clone();
        mscope.extend(m.mtvar_names());
        for b in &m.mtvars {
            if let Some(bound) = &b.bound {
                check_type(bound, sce, &mscope, Some(&site), out);
            }
        }
        for t in m.types() {
            check_type(t, sce, &mscope, Some(&site), out);
        }
    }
}

/// Checks conditions 1–5 and 7 for one constructor; acyclicity is an
/// environment-wide property checked by [`wf_env`].
pub fn wf_constructor(sc: &SignatureConstructor, sce: &ConstructorEnvironment) -> WfReport {
    let mut out = Vec::new();
    structural(sc, &mut out);
    closedness(sc, sce, &mut out);
    if out.iter().any(Diagnostic::is_error) {
        return WfReport::from_diagnostics(out);
    }
    let members = check_member_inheritance(sc, sce);
    out.extend(members.diagnostics);
    WfReport::from_diagnostics(out)
}

/// A member of some ancestor, expressed in terms of `sc`'s own variables.
enum Inherited {
    Field(FieldSig),
    Method(MethodSig),
}

/// Walks all ancestors of `sc`, substituting each super's arguments into
/// the ancestor's members. Heads already on the current path are skipped so
/// that the walk terminates even on cyclic input.
fn inherited_members(sc: &SignatureConstructor, sce: &ConstructorEnvironment) -> Vec<(TypeName, Inherited)> {
    let mut out = Vec::new();
    let mut path = vec![sc.name.clone()];
    for s in &sc.supers {
        collect_inherited(s, sce, &mut path, &mut out);
    }
    out
}

fn collect_inherited(
    sup: &TypeName,
    sce: &ConstructorEnvironment,
    path: &mut Vec<Name>,
    out: &mut Vec<(TypeName, Inherited)>,
) {
    let TypeName::App(head, args) = sup else { return };
    let Some(d) = sce.get(head) else { return };
    if path.contains(head) || d.arity() != args.len() {
        return;
    }
    let Ok(s) = Substitution::new(d.tvar_names(), args.clone()) else { return };
    for f in &d.fields {
        if let Ok(ty) = s.apply(&f.ty) {
            out.push((sup.clone(), Inherited::Field(FieldSig { label: f.label.clone(), ty })));
        }
    }
    for m in &d.methods {
        // Canonicalize the method's own variables first so that arguments
        // mentioning same-named class variables cannot be captured.
        let m = m.canonicalize_mtvars();
        if let Ok(m) = s.apply_method(&m) {
            out.push((sup.clone(), Inherited::Method(m)));
        }
    }
    path.push(head.clone());
    for grand in &d.supers {
        if let Ok(g) = s.apply(grand) {
            collect_inherited(&g, sce, path, out);
        }
    }
    path.pop();
}

/// Condition 7: every member of every (substituted) ancestor must occur in
/// `sc` with the same label and an identical signature, method-level
/// variables compared up to renaming.
pub fn check_member_inheritance(sc: &SignatureConstructor, sce: &ConstructorEnvironment) -> WfReport {
    let mut out = Vec::new();
    let mut reported = HashSet::new();
    for (origin, member) in inherited_members(sc, sce) {
        match member {
            Inherited::Field(f) => {
                let site = Site::Field(sc.name.clone(), f.label.clone());
                match sc.field(&f.label) {
                    None => {
                        if reported.insert((false, f.label.clone())) {
                            out.push(
                                Diagnostic::error(
                                    Code::E120,
                                    format!("`{}` does not declare field `{}: {}` inherited from `{origin}`", sc.name, f.label, f.ty),
                                )
                                .at(Site::Constructor(sc.name.clone()))
                                .with_related([origin.to_string()]),
                            );
                        }
                    }
                    Some(own) if own.ty != f.ty => {
                        if reported.insert((false, f.label.clone())) {
                            out.push(
                                Diagnostic::error(
                                    Code::E121,
                                    format!(
                                        "field `{}` of `{}` has type `{}` but `{origin}` requires `{}`",
                                        f.label, sc.name, own.ty, f.ty
                                    ),
                                )
                                .at(site)
                                .with_related([origin.to_string()]),
                            );
                        }
                    }
                    Some(_) => {}
                }
            }
            Inherited::Method(m) => {
                let site = Site::Method(sc.name.clone(), m.label.clone());
                match sc.method(&m.label) {
                    None => {
                        if reported.insert((true, m.label.clone())) {
                            out.push(
                                Diagnostic::error(
                                    Code::E120,
                                    format!("`{}` does not declare method `{}` inherited from `{origin}`", sc.name, m.label),
                                )
                                .at(Site::Constructor(sc.name.clone()))
                                .with_related([origin.to_string()]),
                            );
                        }
                    }
                    Some(own) if own.canonicalize_mtvars() != m => {
                        if reported.insert((true, m.label.clone())) {
                            out.push(
                                Diagnostic::error(
                                    Code::E121,
                                    format!(
                                        "method `{}` of `{}` does not match its signature in `{origin}`",
                                        m.label, sc.name
                                    ),
                                )
                                .at(site)
                                .with_related([origin.to_string()]),
                            );
                        }
                    }
                    Some(_) => {}
                }
            }
        }
    }
    WfReport::from_diagnostics(out)
}

/// Finds a cycle in the graph with an edge from each constructor to the
/// head of each of its supers. Returns the cycle with its first node
/// repeated at the end.
pub fn find_supersignature_cycle(sce: &ConstructorEnvironment) -> Option<Vec<Name>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    fn visit(
        n: &Name,
        sce: &ConstructorEnvironment,
        marks: &mut HashMap<Name, Mark>,
        stack: &mut Vec<Name>,
    ) -> Option<Vec<Name>> {
        marks.insert(n.clone(), Mark::Active);
        stack.push(n.clone());
        if let Some(sc) = sce.get(n) {
            for s in &sc.supers {
                let Some(h) = s.head() else { continue };
                if !sce.contains(h) {
                    continue;
                }
                match marks.get(h).copied().unwrap_or(Mark::Fresh) {
                    Mark::Active => {
                        let start = stack.iter().position(|x| x == h).unwrap();
                        let mut cycle = stack[start..].to_vec();
                        cycle.push(h.clone());
                        return Some(cycle);
                    }
                    Mark::Fresh => {
                        if let Some(c) = visit(h, sce, marks, stack) {
                            return Some(c);
                        }
                    }
                    Mark::Done => {}
                }
            }
        }
        stack.pop();
        marks.insert(n.clone(), Mark::Done);
        None
    }
    let mut marks = HashMap::new();
    for n in sce.names() {
        if marks.get(n).copied().unwrap_or(Mark::Fresh) == Mark::Fresh {
            let mut stack = Vec::new();
            if let Some(c) = visit(n, sce, &mut marks, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

/// Constructor names ordered so that every constructor precedes the heads
/// of its supers. `None` if the head graph has a cycle.
pub fn topological_order(sce: &ConstructorEnvironment) -> Option<Vec<Name>> {
    if find_supersignature_cycle(sce).is_some() {
        return None;
    }
    let mut order = Vec::new();
    let mut done = HashSet::new();
    fn post(n: &Name, sce: &ConstructorEnvironment, done: &mut HashSet<Name>, order: &mut Vec<Name>) {
        if !done.insert(n.clone()) {
            return;
        }
        if let Some(sc) = sce.get(n) {
            for h in sc.supers.iter().filter_map(TypeName::head) {
                if sce.contains(h) {
                    post(h, sce, done, order);
                }
            }
        }
        order.push(n.clone());
    }
    for n in sce.names() {
        post(n, sce, &mut done, &mut order);
    }
    order.reverse();
    Some(order)
}

pub fn wf_env(sce: &ConstructorEnvironment) -> WfReport {
    let mut out = Vec::new();
    for (key, sc) in sce.iter() {
        if key != &sc.name {
            out.push(
                Diagnostic::error(
                    Code::E106,
                    format!("binding `{key}` holds a constructor named `{}`", sc.name),
                )
                .at(Site::Constructor(key.clone())),
            );
        }
        structural(sc, &mut out);
        closedness(sc, sce, &mut out);
    }
    if out.iter().any(Diagnostic::is_error) {
        return WfReport::from_diagnostics(out);
    }
    if let Some(cycle) = find_supersignature_cycle(sce) {
        let rendered: Vec<String> = cycle.iter().map(|n| n.to_string()).collect();
        out.push(
            Diagnostic::error(Code::E130, format!("supersignature cycle {}", rendered.join(" -> ")))
                .at(Site::Constructor(cycle[0].clone()))
                .with_related(rendered),
        );
        return WfReport::from_diagnostics(out);
    }
    for sc in sce.constructors() {
        out.extend(check_member_inheritance(sc, sce).diagnostics);
    }
    WfReport::from_diagnostics(out)
}

/// `big` extends `small`: every binding of `small` has an alpha-equal
/// counterpart in `big`.
pub fn sce_extends(big: &ConstructorEnvironment, small: &ConstructorEnvironment) -> bool {
    if std::ptr::eq(big, small) {
        return true;
    }
    small
        .iter()
        .all(|(n, sc)| big.get(n).is_some_and(|other| sc_equal(sc, other)))
}
