//! Erasure of generic entities to non-generic ones.
//!
//! A ground name erases to its head; an environment erases by dropping
//! every constructor's variables, replacing naked variables by the erasure
//! of their bound (or the top name), and dropping all type arguments.

use std::sync::Arc;

use crate::diag::{Code, Diagnostic, WfReport};
use crate::subst::instantiate;
use crate::subst::GroundingMode;
use crate::syntax::{
    BoundedVar, ConstructorEnvironment, FieldSig, GenericObjectSignature, GroundSignature, MethodSig, Name,
    SignatureConstructor, TypeName, TypeVarName,
};
use crate::wellformed::{wf_env, wf_type_name};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasureConfig {
    /// Designated top constructor.
    pub top: Name,
    /// Erase a naked variable to its bound's erasure rather than the top.
    pub bound_aware: bool,
}

impl Default for ErasureConfig {
    fn default() -> Self {
        ErasureConfig { top: Name::new("Object"), bound_aware: true }
    }
}

impl ErasureConfig {
    pub fn with_top(top: impl AsRef<str>) -> Self {
        ErasureConfig { top: Name::new(top), ..Self::default() }
    }

    fn top_name(&self) -> TypeName {
        TypeName::App(self.top.clone(), Vec::new())
    }
}

/// The top must be bound, zeroary and without supersignatures.
pub fn check_top(sce: &ConstructorEnvironment, cfg: &ErasureConfig) -> Result<(), Diagnostic> {
    let top = &cfg.top;
    match sce.get(top) {
        None => Err(Diagnostic::error(Code::E220, format!("top constructor `{top}` is not declared"))),
        Some(sc) if sc.arity() != 0 => {
            Err(Diagnostic::error(Code::E220, format!("top constructor `{top}` must not take type parameters")))
        }
        Some(sc) if !sc.supers.is_empty() => {
            Err(Diagnostic::error(Code::E220, format!("top constructor `{top}` must not have supersignatures")))
        }
        Some(_) => Ok(()),
    }
}

/// Adds a member-less top constructor if absent and makes it the single
/// supersignature of every other constructor that declares none.
pub fn inject_top(sce: &ConstructorEnvironment, cfg: &ErasureConfig) -> ConstructorEnvironment {
    let mut out = ConstructorEnvironment::new();
    if !sce.contains(&cfg.top) {
        out.insert(SignatureConstructor::new(cfg.top.as_str()));
    }
    for sc in sce.constructors() {
        let mut sc = sc.clone();
        if sc.name != cfg.top && sc.supers.is_empty() {
            sc.supers.push(cfg.top_name());
        }
        out.insert(sc);
    }
    out
}

/// Drops the type arguments of a ground name. Variables are returned as is.
pub fn erase_name(g: &TypeName) -> TypeName {
    match g {
        TypeName::App(h, _) => TypeName::App(h.clone(), Vec::new()),
        TypeName::Var(_) => g.clone(),
    }
}

/// Element-wise erasure. Method variables left schematic by relaxed
/// instantiation erase to the erasure of their bound or to the top.
pub fn erase_ground_signature(ggs: &GroundSignature, cfg: &ErasureConfig) -> GroundSignature {
    GroundSignature {
        name: erase_name(&ggs.name),
        supers: ggs.supers.iter().map(erase_name).collect(),
        fields: ggs.fields.iter().map(|f| FieldSig { label: f.label.clone(), ty: erase_name(&f.ty) }).collect(),
        methods: ggs
            .methods
            .iter()
            .map(|m| {
                let erase = |t: &TypeName| match t {
                    TypeName::Var(v) => m
                        .mtvars
                        .iter()
                        .find(|b| &b.var == v)
                        .and_then(|b| b.bound.as_ref())
                        .filter(|_| cfg.bound_aware)
                        .map(erase_name)
                        .unwrap_or_else(|| cfg.top_name()),
                    _ => erase_name(t),
                };
                MethodSig {
                    label: m.label.clone(),
                    mtvars: Vec::new(),
                    params: m.params.iter().map(erase).collect(),
                    ret: erase(&m.ret),
                }
            })
            .collect(),
    }
}

/// Erasure of a naked variable, following variable-to-variable bounds
/// until a constructor name is reached. `scope` lists the visible binders,
/// innermost first.
fn erase_var(scope: &[&[BoundedVar]], owner: &Name, v: &TypeVarName, cfg: &ErasureConfig) -> Result<TypeName, Diagnostic> {
    if !cfg.bound_aware {
        return Ok(cfg.top_name());
    }
    let lookup = |w: &TypeVarName| scope.iter().flat_map(|bs| bs.iter()).find(|b| &b.var == w);
    let mut seen = vec![v.clone()];
    let mut cur = v.clone();
    loop {
        match lookup(&cur).and_then(|b| b.bound.as_ref()) {
            None => return Ok(cfg.top_name()),
            Some(TypeName::App(h, _)) => return Ok(TypeName::App(h.clone(), Vec::new())),
            Some(TypeName::Var(w)) => {
                if seen.contains(w) {
                    let chain: Vec<String> = seen.iter().map(|x| x.to_string()).collect();
                    return Err(Diagnostic::error(
                        Code::E221,
                        format!("bounds of `{v}` in `{owner}` never reach a constructor: {}", chain.join(" -> ")),
                    ));
                }
                seen.push(w.clone());
                cur = w.clone();
            }
        }
    }
}

fn erase_type(scope: &[&[BoundedVar]], owner: &Name, t: &TypeName, cfg: &ErasureConfig) -> Result<TypeName, Diagnostic> {
    match t {
        TypeName::Var(v) => erase_var(scope, owner, v, cfg),
        TypeName::App(..) => Ok(erase_name(t)),
    }
}

fn erase_constructor(sc: &SignatureConstructor, cfg: &ErasureConfig) -> Result<SignatureConstructor, Diagnostic> {
    let class: &[&[BoundedVar]] = &[&sc.tvars];
    let n = &sc.name;
    Ok(SignatureConstructor {
        name: n.clone(),
        tvars: Vec::new(),
        supers: sc.supers.iter().map(|t| erase_type(class, n, t, cfg)).collect::<Result<_, _>>()?,
        fields: sc
            .fields
            .iter()
            .map(|f| Ok(FieldSig { label: f.label.clone(), ty: erase_type(class, n, &f.ty, cfg)? }))
            .collect::<Result<_, Diagnostic>>()?,
        methods: sc
            .methods
            .iter()
            .map(|m| {
                let scope: &[&[BoundedVar]] = &[&m.mtvars, &sc.tvars];
                Ok(MethodSig {
                    label: m.label.clone(),
                    mtvars: Vec::new(),
                    params: m.params.iter().map(|t| erase_type(scope, n, t, cfg)).collect::<Result<_, _>>()?,
                    ret: erase_type(scope, n, &m.ret, cfg)?,
                })
            })
            .collect::<Result<_, Diagnostic>>()?,
    })
}

/// Erases every constructor to a zeroary one under the same name.
pub fn erase_env(sce: &ConstructorEnvironment, cfg: &ErasureConfig) -> Result<ConstructorEnvironment, Diagnostic> {
    check_top(sce, cfg)?;
    let mut out = ConstructorEnvironment::new();
    for (key, sc) in sce.iter() {
        out.insert_as(key.clone(), erase_constructor(sc, cfg)?);
    }
    Ok(out)
}

/// The other route to erasure: instantiate every constructor with the top
/// name for all arguments, then erase the resulting ground signature. It
/// agrees with [`erase_env`] when no variable has a bound.
pub fn erase_env_by_instantiation(
    sce: &ConstructorEnvironment,
    cfg: &ErasureConfig,
) -> Result<ConstructorEnvironment, Diagnostic> {
    check_top(sce, cfg)?;
    let mut out = ConstructorEnvironment::new();
    for (key, sc) in sce.iter() {
        let args = vec![cfg.top_name(); sc.arity()];
        let g = instantiate(sc, &args, GroundingMode::Relaxed)?.signature;
        let e = erase_ground_signature(&g, cfg);
        out.insert_as(
            key.clone(),
            SignatureConstructor {
                name: sc.name.clone(),
                tvars: Vec::new(),
                supers: e.supers,
                fields: e.fields,
                methods: e.methods,
            },
        );
    }
    Ok(out)
}

pub fn erase_gos(gos: &GenericObjectSignature, cfg: &ErasureConfig) -> Result<GenericObjectSignature, Diagnostic> {
    Ok(GenericObjectSignature::new_unchecked(erase_name(&gos.name), Arc::new(erase_env(&gos.env, cfg)?)))
}

/// Checks that the erasure of `gos` is a well-formed non-generic object
/// signature. Any failure is reported as E299 with the underlying
/// diagnostics attached as related text.
pub fn check_erasure_theorem(gos: &GenericObjectSignature, cfg: &ErasureConfig) -> WfReport {
    let erased = match erase_gos(gos, cfg) {
        Ok(e) => e,
        Err(d) => return WfReport::from_diagnostics(vec![d]),
    };
    let mut problems: Vec<Diagnostic> = Vec::new();
    for sc in erased.env.constructors().filter(|sc| sc.arity() != 0) {
        problems.push(Diagnostic::error(Code::E299, format!("`{}` still has type parameters", sc.name)));
    }
    problems.extend(wf_env(&erased.env).diagnostics.into_iter().filter(Diagnostic::is_error));
    problems.extend(wf_type_name(&erased.name, &erased.env, &[]).diagnostics);
    if problems.is_empty() {
        return WfReport::ok();
    }
    let related: Vec<String> = problems.iter().map(|d| d.to_string()).collect();
    WfReport::from_diagnostics(vec![Diagnostic::error(
        Code::E299,
        format!("erasure of `{}` is not a well-formed non-generic signature: {}", gos.name, related[0]),
    )
    .with_related(related)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::parser::{parse_env, parse_type_name, render_constructor};

    fn cfg() -> ErasureConfig {
        ErasureConfig::default()
    }

    #[test]
    fn names_lose_arguments() {
        let env = fixtures::pair();
        let t = |s| parse_type_name(s, &env).unwrap();
        assert_eq!(erase_name(&t("Pair<Pair<Int,Bool>,Int>")), TypeName::con("Pair"));
        assert_eq!(erase_name(&t("Int")), TypeName::con("Int"));
        assert_eq!(erase_name(&t("List<List<Int>>")), TypeName::con("List"));
    }

    #[test]
    fn ground_signatures() {
        let env = fixtures::pair();
        let g = crate::subst::ground_signature(&env, &parse_type_name("Pair<Int,Bool>", &env).unwrap())
            .unwrap()
            .signature;
        let e = erase_ground_signature(&g, &cfg());
        assert_eq!(e.name, TypeName::con("Pair"));
        assert_eq!(e.supers, vec![TypeName::con("Object")]);
        assert_eq!(e.fields[0].ty, TypeName::con("Int"));
        assert_eq!(e.fields[1].ty, TypeName::con("Bool"));
        assert_eq!(e.methods[0].ret, TypeName::con("Pair"));

        let int = crate::subst::ground_signature(&env, &TypeName::con("Int")).unwrap().signature;
        assert_eq!(erase_ground_signature(&int, &cfg()), int);

        let javac = fixtures::javac_with_top();
        let c = crate::subst::ground_signature(&javac, &parse_type_name("C<Int>", &javac).unwrap())
            .unwrap()
            .signature;
        let e = erase_ground_signature(&c, &cfg());
        assert_eq!((e.name, e.supers), (TypeName::con("C"), vec![TypeName::con("B")]));
    }

    #[test]
    fn pair_environment() {
        let e = erase_env(&fixtures::pair(), &cfg()).unwrap();
        assert_eq!(
            render_constructor(e.get_str("List").unwrap()),
            "constructor List<> extends { Object } {\n    method head(): Object;\n    method cons(Object): List;\n}"
        );
        assert_eq!(
            render_constructor(e.get_str("Pair").unwrap()),
            "constructor Pair<> extends { Object } {\n    field fst: Object;\n    field snd: Object;\n    method swap(): Pair;\n}"
        );
        assert!(e.constructors().all(|sc| sc.arity() == 0));
    }

    #[test]
    fn javac_environment_keeps_super_heads() {
        let e = erase_env(&fixtures::javac_with_top(), &cfg()).unwrap();
        assert_eq!(e.get_str("B").unwrap().supers, vec![TypeName::con("A")]);
        assert_eq!(e.get_str("C").unwrap().supers, vec![TypeName::con("B")]);
    }

    #[test]
    fn bounds_guide_erasure() {
        let env = fixtures::enumeration();
        let e = erase_env(&env, &cfg()).unwrap();
        let m = &e.get_str("Enum").unwrap().methods[0];
        assert_eq!(m.params, vec![TypeName::con("Enum")]);
        let to_top = erase_env(&env, &ErasureConfig { bound_aware: false, ..cfg() }).unwrap();
        assert_eq!(to_top.get_str("Enum").unwrap().methods[0].params, vec![TypeName::con("Object")]);
    }

    #[test]
    fn method_variable_bounds() {
        let env = parse_env(
            "constructor Object<> extends {} {} constructor Cmp<T> extends { Object } {}
             constructor Sorter<> extends { Object } { method sort<E extends Cmp<E>>(E): E; method id<X>(X): X; }",
        )
        .unwrap();
        let e = erase_env(&env, &cfg()).unwrap();
        let s = e.get_str("Sorter").unwrap();
        assert_eq!(s.methods[0].params, vec![TypeName::con("Cmp")]);
        assert_eq!(s.methods[1].ret, TypeName::con("Object"));
    }

    #[test]
    fn top_is_required() {
        assert_eq!(erase_env(&fixtures::javac(), &cfg()).unwrap_err().code, Code::E220);
        let bad = parse_env("constructor Object<T> extends {} {}").unwrap();
        assert_eq!(erase_env(&bad, &cfg()).unwrap_err().code, Code::E220);
    }

    #[test]
    fn variable_bound_cycle() {
        // Naked-variable bounds are ill-formed, but erasure still refuses
        // to loop on them.
        let env = parse_env("constructor Object<> extends {} {} constructor W<A extends B, B extends A> extends {} { field f: A; }").unwrap();
        assert_eq!(erase_env(&env, &cfg()).unwrap_err().code, Code::E221);
    }

    #[test]
    fn gos_erasure() {
        let env = Arc::new(fixtures::pair());
        let gos = GenericObjectSignature::new(parse_type_name("Pair<Int,Bool>", &env).unwrap(), env.clone()).unwrap();
        let e = erase_gos(&gos, &cfg()).unwrap();
        assert_eq!(e.name, TypeName::con("Pair"));
        assert_eq!(*e.env, erase_env(&env, &cfg()).unwrap());
    }

    #[test]
    fn theorem_on_fixtures() {
        let env = Arc::new(fixtures::pair());
        let gos = GenericObjectSignature::new(parse_type_name("Pair<Int,Bool>", &env).unwrap(), env).unwrap();
        assert!(check_erasure_theorem(&gos, &cfg()).ok);
        let env = Arc::new(fixtures::javac_with_top());
        let gos = GenericObjectSignature::new(parse_type_name("C<Int>", &env).unwrap(), env).unwrap();
        assert!(check_erasure_theorem(&gos, &cfg()).ok);
    }

    #[test]
    fn theorem_fails_when_subclass_fixes_a_member_type() {
        // Erasure keeps `head(): Int` in S but turns List's into
        // `head(): Object`, so inherited signatures no longer match.
        let env = Arc::new(
            parse_env(
                "constructor Object<> extends {} {} constructor Int<> extends { Object } {}
                 constructor List<T> extends { Object } { method head(): T; }
                 constructor S<> extends { List<Int> } { method head(): Int; }",
            )
            .unwrap(),
        );
        assert!(wf_env(&env).ok);
        let gos = GenericObjectSignature::new(TypeName::con("S"), env).unwrap();
        let r = check_erasure_theorem(&gos, &cfg());
        assert_eq!(r.codes(), vec![Code::E299]);
        assert!(r.diagnostics[0].related.iter().any(|s| s.contains("E121")));
    }

    #[test]
    fn routes_agree_without_bounds() {
        for env in [fixtures::pair(), fixtures::javac_with_top(), fixtures::recur_with_top()] {
            assert_eq!(erase_env(&env, &cfg()).unwrap(), erase_env_by_instantiation(&env, &cfg()).unwrap());
        }
    }

    #[test]
    fn injection() {
        let env = inject_top(&fixtures::javac(), &cfg());
        assert_eq!(env.names().next().unwrap().as_str(), "Object");
        assert_eq!(env.get_str("A").unwrap().supers, vec![TypeName::con("Object")]);
        assert_eq!(env.get_str("B").unwrap().supers.len(), 1);
        assert!(check_top(&env, &cfg()).is_ok());
        assert_eq!(inject_top(&env, &cfg()), env);
    }
}
