//! Name substitution and everything built on it: instantiating
//! constructors to ground signatures, instantiation closures, and the
//! expansiveness analysis that predicts whether closures are finite.

use std::collections::{HashMap, HashSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::diag::{Code, Diagnostic};
use crate::syntax::{
    BoundedVar, ConstructorEnvironment, FieldSig, GenericObjectSignature, GroundSignature, MethodSig,
    Name, SignatureConstructor, TypeName, TypeVarName,
};

/// Positional map from variables to type names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    vars: Vec<TypeVarName>,
    args: Vec<TypeName>,
}

impl Substitution {
    pub fn new(vars: Vec<TypeVarName>, args: Vec<TypeName>) -> Result<Self, Diagnostic> {
        if vars.len() != args.len() {
            return Err(Diagnostic::error(
                Code::E201,
                format!("substitution has {} variables but {} arguments", vars.len(), args.len()),
            ));
        }
        let mut seen = HashSet::new();
        if let Some(v) = vars.iter().find(|v| !seen.insert(*v)) {
            return Err(Diagnostic::error(Code::E201, format!("variable `{v}` substituted twice")));
        }
        Ok(Substitution { vars, args })
    }

    pub fn empty() -> Self {
        Substitution { vars: Vec::new(), args: Vec::new() }
    }

    /// Maps `sc`'s variables, in order, to `args`.
    pub fn for_constructor(sc: &SignatureConstructor, args: Vec<TypeName>) -> Result<Self, Diagnostic> {
        if sc.arity() != args.len() {
            return Err(Diagnostic::error(
                Code::E201,
                format!("`{}` expects {} type arguments, got {}", sc.name, sc.arity(), args.len()),
            ));
        }
        Substitution::new(sc.tvar_names(), args)
    }

    pub fn vars(&self) -> &[TypeVarName] {
        &self.vars
    }

    pub fn args(&self) -> &[TypeName] {
        &self.args
    }

    fn lookup(&self, v: &TypeVarName) -> Option<&TypeName> {
        self.vars.iter().position(|w| w == v).map(|i| &self.args[i])
    }

    /// Substitutes; any variable outside the domain is an E200 error.
    pub fn apply(&self, t: &TypeName) -> Result<TypeName, Diagnostic> {
        self.apply_keeping(t, &[])
    }

    /// Substitutes, leaving variables in `keep` untouched.
    pub fn apply_keeping(&self, t: &TypeName, keep: &[TypeVarName]) -> Result<TypeName, Diagnostic> {
        match t {
            TypeName::Var(v) => match self.lookup(v) {
                Some(a) => Ok(a.clone()),
                None if keep.contains(v) => Ok(t.clone()),
                None => Err(Diagnostic::error(
                    Code::E200,
                    format!("type variable `{v}` is not bound by the substitution"),
                )
                .with_related([v.to_string()])),
            },
            TypeName::App(h, args) => Ok(TypeName::App(
                h.clone(),
                args.iter().map(|a| self.apply_keeping(a, keep)).collect::<Result<_, _>>()?,
            )),
        }
    }

    /// Substitutes inside a method signature. The method's own variables
    /// are outside the substitution's domain and stay as they are.
    pub fn apply_method(&self, m: &MethodSig) -> Result<MethodSig, Diagnostic> {
        let keep = m.mtvar_names();
        Ok(MethodSig {
            label: m.label.clone(),
            mtvars: m
                .mtvars
                .iter()
                .map(|b| {
                    Ok(BoundedVar {
                        var: b.var.clone(),
                        bound: b.bound.as_ref().map(|t| self.apply_keeping(t, &keep)).transpose()?,
                    })
                })
                .collect::<Result<_, Diagnostic>>()?,
            params: m.params.iter().map(|t| self.apply_keeping(t, &keep)).collect::<Result<_, _>>()?,
            ret: self.apply_keeping(&m.ret, &keep)?,
        })
    }

    pub fn apply_field(&self, f: &FieldSig) -> Result<FieldSig, Diagnostic> {
        Ok(FieldSig { label: f.label.clone(), ty: self.apply(&f.ty)? })
    }
}

/// Free-function form of [`Substitution::apply`].
pub fn substitute(s: &Substitution, t: &TypeName) -> Result<TypeName, Diagnostic> {
    s.apply(t)
}

/// Substitutes through supers, fields and methods. The variable list is
/// kept; `s` must substitute exactly `sc`'s variables in order.
pub fn substitute_constructor(
    s: &Substitution,
    sc: &SignatureConstructor,
) -> Result<SignatureConstructor, Diagnostic> {
    if s.vars() != sc.tvar_names().as_slice() {
        return Err(Diagnostic::error(
            Code::E201,
            format!("substitution variables do not match the type variables of `{}`", sc.name),
        ));
    }
    Ok(SignatureConstructor {
        name: sc.name.clone(),
        tvars: sc.tvars.clone(),
        supers: sc.supers.iter().map(|t| s.apply(t)).collect::<Result<_, _>>()?,
        fields: sc.fields.iter().map(|f| s.apply_field(f)).collect::<Result<_, _>>()?,
        methods: sc.methods.iter().map(|m| s.apply_method(m)).collect::<Result<_, _>>()?,
    })
}

/// How instantiation treats methods with their own type variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroundingMode {
    /// Polymorphic methods make instantiation fail with E203.
    Strict,
    /// Polymorphic methods stay schematic; E203 is attached as a warning.
    Relaxed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instantiation {
    pub signature: GroundSignature,
    pub warnings: Vec<Diagnostic>,
}

/// Instantiates `sc` with ground arguments and drops its variable list.
pub fn instantiate(
    sc: &SignatureConstructor,
    args: &[TypeName],
    mode: GroundingMode,
) -> Result<Instantiation, Diagnostic> {
    if let Some(bad) = args.iter().find(|a| !a.is_ground()) {
        return Err(Diagnostic::error(
            Code::E202,
            format!("type argument `{bad}` of `{}` is not ground", sc.name),
        )
        .with_related([bad.to_string()]));
    }
    let s = Substitution::for_constructor(sc, args.to_vec())?;
    let inst = substitute_constructor(&s, sc)?;
    let name = TypeName::App(sc.name.clone(), args.to_vec());
    let mut warnings = Vec::new();
    for m in inst.methods.iter().filter(|m| m.is_polymorphic()) {
        let msg = format!("method `{}` of `{name}` is polymorphic and stays schematic", m.label);
        match mode {
            GroundingMode::Strict => return Err(Diagnostic::error(Code::E203, msg)),
            GroundingMode::Relaxed => warnings.push(Diagnostic::warning(Code::E203, msg)),
        }
    }
    Ok(Instantiation {
        signature: GroundSignature { name, supers: inst.supers, fields: inst.fields, methods: inst.methods },
        warnings,
    })
}

/// The ground signature a generic object signature stands for.
pub fn ground_of(gos: &GenericObjectSignature) -> Result<Instantiation, Diagnostic> {
    ground_signature(&gos.env, &gos.name)
}

/// [`ground_of`] without building the pair.
pub fn ground_signature(env: &ConstructorEnvironment, name: &TypeName) -> Result<Instantiation, Diagnostic> {
    let TypeName::App(head, args) = name else {
        return Err(Diagnostic::error(Code::E202, format!("`{name}` is a type variable")));
    };
    let sc = env
        .get(head)
        .ok_or_else(|| Diagnostic::error(Code::E100, format!("unknown constructor `{head}`")))?;
    let inst = instantiate(sc, args, GroundingMode::Relaxed)?;
    debug_assert_eq!(&inst.signature.name, name);
    Ok(inst)
}

/// The instantiated direct supersignatures of a ground name.
pub fn direct_supers(env: &ConstructorEnvironment, name: &TypeName) -> Result<Vec<TypeName>, Diagnostic> {
    let TypeName::App(head, args) = name else {
        return Err(Diagnostic::error(Code::E202, format!("`{name}` is a type variable")));
    };
    let sc = env
        .get(head)
        .ok_or_else(|| Diagnostic::error(Code::E100, format!("unknown constructor `{head}`")))?;
    let s = Substitution::for_constructor(sc, args.clone())?;
    sc.supers.iter().map(|t| s.apply(t)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureResult {
    /// Ground names in breadth-first discovery order.
    pub names: Vec<TypeName>,
    /// True if some further name was discovered after the fuel ran out.
    pub exhausted_fuel: bool,
}

impl ClosureResult {
    pub fn contains(&self, t: &TypeName) -> bool {
        self.names.contains(t)
    }
}

/// Smallest set containing `gos.name` and every ground type occurring in
/// the ground signature of each member, materializing at most `fuel`
/// distinct names.
pub fn instantiation_closure(gos: &GenericObjectSignature, fuel: usize) -> ClosureResult {
    let mut names = Vec::new();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    if fuel == 0 {
        return ClosureResult { names, exhausted_fuel: true };
    }
    seen.insert(gos.name.clone());
    names.push(gos.name.clone());
    queue.push_back(gos.name.clone());
    while let Some(g) = queue.pop_front() {
        let Ok(inst) = ground_signature(&gos.env, &g) else { continue };
        for t in inst.signature.body_types().filter(|t| t.is_ground()) {
            if seen.contains(t) {
                continue;
            }
            if names.len() == fuel {
                return ClosureResult { names, exhausted_fuel: true };
            }
            seen.insert(t.clone());
            names.push(t.clone());
            queue.push_back(t.clone());
        }
    }
    ClosureResult { names, exhausted_fuel: false }
}

/// A formal type parameter: constructor name and zero-based index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamNode {
    pub constructor: Name,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// The parameter is passed through unchanged.
    Plain,
    /// The parameter is wrapped inside a larger argument.
    Expansive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansivenessReport {
    pub expansive: bool,
    /// A cycle through an expansive edge; first node repeated at the end.
    pub witness_cycle: Vec<ParamNode>,
    /// `witness_edges[i]` is the edge from `witness_cycle[i]` to `witness_cycle[i + 1]`.
    pub witness_edges: Vec<EdgeKind>,
}

/// Builds the parameter dependency graph of `sce`: for every occurrence of
/// `D<a1..ak>` in the body of `C` and every variable `Xi` of `C` occurring
/// in `aj`, an edge `(C,i) -> (D,j)`, plain if `aj` is exactly `Xi`.
pub fn parameter_graph(sce: &ConstructorEnvironment) -> Vec<(ParamNode, ParamNode, EdgeKind)> {
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for sc in sce.constructors() {
        let vars = sc.tvar_names();
        let body = sc
            .supers
            .iter()
            .chain(sc.fields.iter().map(|f| &f.ty))
            .chain(sc.methods.iter().flat_map(|m| m.types()));
        for t in body {
            t.for_each_app(&mut |head, args| {
                for (j, a) in args.iter().enumerate() {
                    for (i, x) in vars.iter().enumerate() {
                        if !a.mentions_var(x) {
                            continue;
                        }
                        let kind = if a.as_var() == Some(x) { EdgeKind::Plain } else { EdgeKind::Expansive };
                        let from = ParamNode { constructor: sc.name.clone(), index: i };
                        let to = ParamNode { constructor: head.clone(), index: j };
                        if seen.insert((from.clone(), to.clone(), kind)) {
                            edges.push((from, to, kind));
                        }
                    }
                }
            });
        }
    }
    edges
}

/// Flags environments whose instantiation closures may be infinite: some
/// cycle of the parameter graph contains an expansive edge. A negative
/// answer guarantees finite closures; a positive one is conservative.
pub fn expansiveness(sce: &ConstructorEnvironment) -> ExpansivenessReport {
    let edges = parameter_graph(sce);
    let mut graph: DiGraph<ParamNode, EdgeKind> = DiGraph::new();
    let mut index: HashMap<ParamNode, NodeIndex> = HashMap::new();
    let mut node = |g: &mut DiGraph<ParamNode, EdgeKind>, p: &ParamNode| {
        *index.entry(p.clone()).or_insert_with(|| g.add_node(p.clone()))
    };
    for (from, to, kind) in &edges {
        let a = node(&mut graph, from);
        let b = node(&mut graph, to);
        graph.add_edge(a, b, *kind);
    }
    let mut component = vec![usize::MAX; graph.node_count()];
    for (c, scc) in tarjan_scc(&graph).iter().enumerate() {
        for n in scc {
            component[n.index()] = c;
        }
    }
    // Deterministic: the first expansive edge in declaration order whose
    // endpoints share a strongly connected component.
    for e in graph.edge_indices() {
        if graph[e] != EdgeKind::Expansive {
            continue;
        }
        let (a, b) = graph.edge_endpoints(e).unwrap();
        if component[a.index()] != component[b.index()] {
            continue;
        }
        let back = shortest_path(&graph, b, a).expect("same component");
        let mut witness_cycle = vec![graph[a].clone()];
        let mut witness_edges = vec![EdgeKind::Expansive];
        for (n, kind) in back {
            witness_cycle.push(graph[n].clone());
            witness_edges.push(kind);
        }
        // `back` starts at `b`; for a self-loop it is just `[b]`.
        witness_edges.pop();
        return ExpansivenessReport { expansive: true, witness_cycle, witness_edges };
    }
    ExpansivenessReport { expansive: false, witness_cycle: Vec::new(), witness_edges: Vec::new() }
}

/// Breadth-first path from `from` to `to`, as a list of nodes starting at
/// `from`, each paired with the kind of the edge leaving it (the last one
/// is a placeholder).
fn shortest_path(
    g: &DiGraph<ParamNode, EdgeKind>,
    from: NodeIndex,
    to: NodeIndex,
) -> Option<Vec<(NodeIndex, EdgeKind)>> {
    let mut prev: HashMap<NodeIndex, (NodeIndex, EdgeKind)> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = HashSet::from([from]);
    while let Some(n) = queue.pop_front() {
        if n == to {
            let mut path = vec![(to, EdgeKind::Plain)];
            let mut cur = to;
            while cur != from {
                let (p, k) = prev[&cur];
                path.push((p, k));
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        let mut out: Vec<_> = g.edges(n).map(|e| (petgraph::visit::EdgeRef::target(&e), *e.weight())).collect();
        // petgraph yields edges newest first
        out.reverse();
        for (m, k) in out {
            if seen.insert(m) {
                prev.insert(m, (n, k));
                queue.push_back(m);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::sync::Arc;

    fn ty(s: &str) -> TypeName {
        // Single uppercase letters other than I/B/O are variables in these tests.
        fn parse(s: &str) -> (TypeName, &str) {
            let end = s.find(['<', ',', '>']).unwrap_or(s.len());
            let head = &s[..end];
            let rest = &s[end..];
            if let Some(mut rest) = rest.strip_prefix('<') {
                let mut args = Vec::new();
                loop {
                    let (a, r) = parse(rest);
                    args.push(a);
                    if let Some(r) = r.strip_prefix(',') {
                        rest = r;
                    } else {
                        return (TypeName::app(head, args), r.strip_prefix('>').unwrap());
                    }
                }
            }
            if head.len() == 1 {
                (TypeName::var(head), rest)
            } else {
                (TypeName::con(head), rest)
            }
        }
        parse(s).0
    }

    #[test]
    fn substitution_is_positional() {
        let s = Substitution::new(
            vec![TypeVarName::new("A"), TypeVarName::new("B")],
            vec![TypeName::con("Int"), TypeName::con("Bool")],
        )
        .unwrap();
        assert_eq!(s.apply(&ty("Pair<B,A>")).unwrap(), ty("Pair<Bool,Int>"));
        assert_eq!(s.apply(&ty("Pair<Int,Int>")).unwrap(), ty("Pair<Int,Int>"));
        let s = Substitution::new(vec![TypeVarName::new("A")], vec![TypeName::con("Int")]).unwrap();
        assert_eq!(s.apply(&TypeName::var("B")).unwrap_err().code, Code::E200);
    }

    #[test]
    fn malformed_substitutions() {
        assert_eq!(Substitution::new(vec![TypeVarName::new("A")], vec![]).unwrap_err().code, Code::E201);
        let dup = vec![TypeVarName::new("A"), TypeVarName::new("A")];
        assert_eq!(Substitution::new(dup, vec![TypeName::con("X"), TypeName::con("Y")]).unwrap_err().code, Code::E201);
    }

    #[test]
    fn constructor_substitution() {
        let pair = fixtures::pair();
        let sc = pair.get_str("Pair").unwrap();
        let s = Substitution::for_constructor(sc, vec![TypeName::con("Int"), TypeName::con("Bool")]).unwrap();
        let out = substitute_constructor(&s, sc).unwrap();
        assert_eq!(out.tvars, sc.tvars);
        assert_eq!(out.fields[0].ty, TypeName::con("Int"));
        assert_eq!(out.fields[1].ty, TypeName::con("Bool"));
        assert_eq!(out.methods[0].ret, ty("Pair<Bool,Int>"));

        let int = pair.get_str("Int").unwrap();
        assert_eq!(&substitute_constructor(&Substitution::empty(), int).unwrap(), int);

        let wrong = Substitution::new(vec![TypeVarName::new("X"), TypeVarName::new("B")], vec![TypeName::con("Int"), TypeName::con("Int")]).unwrap();
        assert_eq!(substitute_constructor(&wrong, sc).unwrap_err().code, Code::E201);
    }

    #[test]
    fn method_variables_are_not_substituted() {
        let env = crate::parser::parse_env(
            "constructor Int<> extends {} {} constructor List<T> extends {} { method head(): T; method map<U>(U): List<U>; }",
        )
        .unwrap();
        let sc = env.get_str("List").unwrap();
        let s = Substitution::for_constructor(sc, vec![TypeName::con("Int")]).unwrap();
        let out = substitute_constructor(&s, sc).unwrap();
        assert_eq!(out.methods[0].ret, TypeName::con("Int"));
        assert_eq!(out.methods[1], sc.methods[1]);
    }

    #[test]
    fn instantiation() {
        let pair = fixtures::pair();
        let g = instantiate(pair.get_str("Pair").unwrap(), &[TypeName::con("Int"), TypeName::con("Bool")], GroundingMode::Strict)
            .unwrap()
            .signature;
        assert_eq!(g.name, ty("Pair<Int,Bool>"));
        assert_eq!(g.fields[0].ty, TypeName::con("Int"));
        assert_eq!(g.fields[1].ty, TypeName::con("Bool"));
        assert_eq!(g.methods[0].ret, ty("Pair<Bool,Int>"));
        assert_eq!(g.supers, vec![TypeName::con("Object")]);

        let int = instantiate(pair.get_str("Int").unwrap(), &[], GroundingMode::Strict).unwrap().signature;
        assert_eq!(int.name, TypeName::con("Int"));

        let err = instantiate(pair.get_str("Pair").unwrap(), &[TypeName::var("T"), TypeName::con("Int")], GroundingMode::Strict)
            .unwrap_err();
        assert_eq!(err.code, Code::E202);
        let err = instantiate(pair.get_str("Pair").unwrap(), &[TypeName::con("Int")], GroundingMode::Strict).unwrap_err();
        assert_eq!(err.code, Code::E201);
    }

    #[test]
    fn polymorphic_methods_and_modes() {
        let env = crate::parser::parse_env(
            "constructor Int<> extends {} {} constructor List<T> extends {} { method map<U>(U): List<U>; }",
        )
        .unwrap();
        let sc = env.get_str("List").unwrap();
        let err = instantiate(sc, &[TypeName::con("Int")], GroundingMode::Strict).unwrap_err();
        assert_eq!(err.code, Code::E203);
        let ok = instantiate(sc, &[TypeName::con("Int")], GroundingMode::Relaxed).unwrap();
        assert_eq!(ok.warnings.len(), 1);
        assert!(!ok.warnings[0].is_error());
        assert_eq!(ok.signature.methods[0].ret, ty("List<U>"));
    }

    #[test]
    fn ground_of_javac() {
        let env = Arc::new(fixtures::javac_with_top());
        let gos = GenericObjectSignature::new(ty("C<Int>"), env).unwrap();
        let g = ground_of(&gos).unwrap().signature;
        assert_eq!(g.name, gos.name);
        assert_eq!(g.supers, vec![ty("B<Int>")]);
    }

    #[test]
    fn javac_closure() {
        let env = Arc::new(fixtures::javac_with_top());
        let gos = GenericObjectSignature::new(ty("C<Int>"), env).unwrap();
        let c = instantiation_closure(&gos, 50);
        assert!(!c.exhausted_fuel);
        let mut got: Vec<String> = c.names.iter().map(|t| t.to_string()).collect();
        got.sort();
        assert_eq!(got, ["A<C<Int>>", "B<Int>", "C<Int>", "Object"]);
    }

    #[test]
    fn expansive_closure_runs_out_of_fuel() {
        let env = Arc::new(fixtures::recur());
        let gos = GenericObjectSignature::new(ty("C<Int>"), env).unwrap();
        let c = instantiation_closure(&gos, 5);
        assert!(c.exhausted_fuel);
        let got: Vec<String> = c.names.iter().map(|t| t.to_string()).collect();
        assert_eq!(got, ["C<Int>", "C<C<Int>>", "C<C<C<Int>>>", "C<C<C<C<Int>>>>", "C<C<C<C<C<Int>>>>>"]);
    }

    #[test]
    fn pair_closure() {
        let gos = GenericObjectSignature::new(TypeName::con("Int"), Arc::new(fixtures::pair())).unwrap();
        let c = instantiation_closure(&gos, 10);
        assert_eq!(c.names, vec![TypeName::con("Int"), TypeName::con("Object")]);
        assert!(!c.exhausted_fuel);
    }

    #[test]
    fn exact_fuel_is_not_exhaustion() {
        let gos = GenericObjectSignature::new(TypeName::con("Int"), Arc::new(fixtures::pair())).unwrap();
        assert!(!instantiation_closure(&gos, 2).exhausted_fuel);
        assert!(instantiation_closure(&gos, 1).exhausted_fuel);
    }

    fn node(c: &str, i: usize) -> ParamNode {
        ParamNode { constructor: Name::new(c), index: i }
    }

    #[test]
    fn recursive_return_type_is_expansive() {
        let r = expansiveness(&fixtures::recur());
        assert!(r.expansive);
        assert_eq!(r.witness_cycle, vec![node("C", 0), node("C", 0)]);
        assert_eq!(r.witness_edges, vec![EdgeKind::Expansive]);
    }

    #[test]
    fn javac_is_not_expansive() {
        let env = fixtures::javac();
        let edges = parameter_graph(&env);
        assert!(edges.contains(&(node("B", 0), node("A", 0), EdgeKind::Expansive)));
        assert!(edges.contains(&(node("B", 0), node("C", 0), EdgeKind::Plain)));
        assert!(edges.contains(&(node("C", 0), node("B", 0), EdgeKind::Plain)));
        assert!(!expansiveness(&env).expansive);
        assert!(!expansiveness(&fixtures::pair()).expansive);
    }

    #[test]
    fn longer_witness_cycle() {
        let env = crate::parser::parse_env(
            "constructor Int<> extends {} {}
             constructor P<T> extends {} { method q(): Q<List<T>>; }
             constructor Q<T> extends {} { method p(): P<T>; }
             constructor List<T> extends {} {}",
        )
        .unwrap();
        let r = expansiveness(&env);
        assert!(r.expansive);
        assert_eq!(r.witness_cycle, vec![node("P", 0), node("Q", 0), node("P", 0)]);
        assert_eq!(r.witness_edges, vec![EdgeKind::Expansive, EdgeKind::Plain]);
    }
}
