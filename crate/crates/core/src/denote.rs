//! Finite-depth denotations of ground names and a brute-force check that
//! subsigning coincides with inclusion of denotations.
//!
//! Denotations are computed at the level of names: each ground name stands
//! for the principal object signature it generates. A name `h` is in the
//! denotation of `g` when `g` is `h` or one of its ancestors, and `h`'s
//! ground signature carries every member of `g`'s with the same type.
//! Ancestors are found by a plain walk over direct supersignatures that
//! shares nothing with the memoized [`Hierarchy`], so the two sides of the
//! check are computed independently.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use crate::diag::{Code, Diagnostic, WfReport};
use crate::subsign::Hierarchy;
use crate::subst::{direct_supers, ground_signature};
use crate::syntax::{ConstructorEnvironment, GenericObjectSignature, GroundSignature, TypeName};

pub const DEFAULT_CAP: usize = 10_000;

#[derive(Clone, Debug)]
pub struct GroundUniverse {
    pub env: Arc<ConstructorEnvironment>,
    pub depth: usize,
    /// Sorted by rendered form.
    pub names: Vec<TypeName>,
    pub valid_only: bool,
}

impl GroundUniverse {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, g: &TypeName) -> bool {
        self.names.iter().any(|n| n == g)
    }
}

/// Upper bound on the number of names of depth at most `depth`, saturating.
pub fn universe_size_estimate(sce: &ConstructorEnvironment, depth: usize) -> usize {
    let zeroary = sce.constructors().filter(|sc| sc.arity() == 0).count();
    let mut n = zeroary;
    for _ in 0..depth {
        let mut next = zeroary;
        for sc in sce.constructors().filter(|sc| sc.arity() > 0) {
            let k = u32::try_from(sc.arity()).unwrap_or(u32::MAX);
            next = next.saturating_add(n.saturating_pow(k));
        }
        n = next;
    }
    n
}

/// All well-formed ground names of depth at most `depth`, optionally only
/// the valid ones. Refuses with E231 when the estimate exceeds `cap`.
pub fn enumerate_ground_names_capped(
    sce: &ConstructorEnvironment,
    depth: usize,
    valid_only: bool,
    cap: usize,
) -> Result<GroundUniverse, Diagnostic> {
    let estimate = universe_size_estimate(sce, depth);
    if estimate > cap {
        return Err(Diagnostic::error(
            Code::E231,
            format!("universe of depth {depth} would hold up to {estimate} names, above the cap of {cap}"),
        ));
    }
    let h = Hierarchy::new(sce);
    let keep = |g: &TypeName| !valid_only || h.valid_ground_name(g).ok;
    let zeroary: Vec<TypeName> = sce
        .iter()
        .filter(|(_, sc)| sc.arity() == 0)
        .map(|(n, _)| TypeName::App(n.clone(), Vec::new()))
        .filter(|g| keep(g))
        .collect();
    let mut level = zeroary.clone();
    for _ in 0..depth {
        let mut next = zeroary.clone();
        for (n, sc) in sce.iter().filter(|(_, sc)| sc.arity() > 0) {
            for args in tuples(&level, sc.arity()) {
                let g = TypeName::App(n.clone(), args);
                if keep(&g) {
                    next.push(g);
                }
            }
        }
        level = next;
    }
    let mut keyed: Vec<(String, TypeName)> = level.into_iter().map(|g| (g.to_string(), g)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    Ok(GroundUniverse {
        env: Arc::new(sce.clone()),
        depth,
        names: keyed.into_iter().map(|(_, g)| g).collect(),
        valid_only,
    })
}

pub fn enumerate_ground_names(
    sce: &ConstructorEnvironment,
    depth: usize,
    valid_only: bool,
) -> Result<GroundUniverse, Diagnostic> {
    enumerate_ground_names_capped(sce, depth, valid_only, DEFAULT_CAP)
}

fn tuples(pool: &[TypeName], k: usize) -> Vec<Vec<TypeName>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                pool.iter().map(move |g| {
                    let mut v = prefix.clone();
                    v.push(g.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// `g` and every name reachable from it by direct supersignature steps.
pub fn ancestors(env: &ConstructorEnvironment, g: &TypeName) -> Result<HashSet<TypeName>, Diagnostic> {
    let mut seen = HashSet::from([g.clone()]);
    let mut queue = VecDeque::from([g.clone()]);
    while let Some(n) = queue.pop_front() {
        for s in direct_supers(env, &n)? {
            if seen.insert(s.clone()) {
                queue.push_back(s);
            }
        }
    }
    Ok(seen)
}

/// Every member of `sup` appears in `sub` with an identical signature.
pub fn conforms(sub: &GroundSignature, sup: &GroundSignature) -> bool {
    sup.fields.iter().all(|f| sub.field(&f.label).is_some_and(|g| g.ty == f.ty))
        && sup.methods.iter().all(|m| {
            sub.method(&m.label).is_some_and(|n| n.canonicalize_mtvars() == m.canonicalize_mtvars())
        })
}

/// Ground signatures and ancestor sets for every universe name.
struct Evidence {
    sigs: Vec<GroundSignature>,
    ancestors: Vec<HashSet<TypeName>>,
}

impl Evidence {
    fn gather(u: &GroundUniverse) -> Result<Self, Diagnostic> {
        let mut sigs = Vec::with_capacity(u.len());
        let mut ancs = Vec::with_capacity(u.len());
        for g in &u.names {
            sigs.push(ground_signature(&u.env, g)?.signature);
            ancs.push(ancestors(&u.env, g)?);
        }
        Ok(Evidence { sigs, ancestors: ancs })
    }

    fn denote_bits(&self, target: usize, target_sig: &GroundSignature, name: &TypeName) -> Vec<u64> {
        let mut bits = vec![0u64; self.sigs.len().div_ceil(64)];
        for (h, sig) in self.sigs.iter().enumerate() {
            if (h == target || self.ancestors[h].contains(name)) && conforms(sig, target_sig) {
                bits[h / 64] |= 1 << (h % 64);
            }
        }
        bits
    }
}

/// Denotation of `gos` within `universe`.
pub fn denote(gos: &GenericObjectSignature, universe: &GroundUniverse) -> Result<BTreeSet<TypeName>, Diagnostic> {
    let target = ground_signature(&gos.env, &gos.name)?.signature;
    let mut out = BTreeSet::new();
    for h in &universe.names {
        let anc = ancestors(&universe.env, h)?;
        if anc.contains(&gos.name) && conforms(&ground_signature(&universe.env, h)?.signature, &target) {
            out.insert(h.clone());
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremOptions {
    pub depth: usize,
    pub valid_only: bool,
    pub cap: usize,
}

impl Default for TheoremOptions {
    fn default() -> Self {
        TheoremOptions { depth: 2, valid_only: false, cap: DEFAULT_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub sub: TypeName,
    pub sup: TypeName,
    pub subsigns: bool,
    pub denotation_included: bool,
    /// A member of the sub side's denotation missing from the super side's,
    /// when inclusion fails.
    pub witness: Option<TypeName>,
}

#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub report: WfReport,
    pub universe_size: usize,
    pub pairs_checked: usize,
    pub violations: usize,
    /// The first violation by combined depth, then rendered names.
    pub counterexample: Option<Counterexample>,
}

/// Checks `g1 ⊴ g2 ⇔ denote(g1) ⊆ denote(g2)` for every ordered pair of
/// the universe. Well-formedness is not checked here, so ill-formed
/// environments can be fed in to exercise the check.
pub fn theorem_check_with(sce: &ConstructorEnvironment, opts: &TheoremOptions) -> TheoremReport {
    let failed = |d: Diagnostic| TheoremReport {
        report: WfReport::from_diagnostics(vec![d]),
        universe_size: 0,
        pairs_checked: 0,
        violations: 0,
        counterexample: None,
    };
    let u = match enumerate_ground_names_capped(sce, opts.depth, opts.valid_only, opts.cap) {
        Ok(u) => u,
        Err(d) => return failed(d),
    };
    let ev = match Evidence::gather(&u) {
        Ok(ev) => ev,
        Err(d) => return failed(d),
    };
    let n = u.len();
    let den: Vec<Vec<u64>> = (0..n).map(|i| ev.denote_bits(i, &ev.sigs[i], &u.names[i])).collect();
    let h = Hierarchy::new(sce);
    let rendered: Vec<String> = u.names.iter().map(|g| g.to_string()).collect();
    let key = |i: usize, j: usize| (u.names[i].depth() + u.names[j].depth(), &rendered[i], &rendered[j]);

    let mut violations = 0;
    let mut best: Option<(usize, usize, bool, bool)> = None;
    for i in 0..n {
        for j in 0..n {
            let lhs = h.is_subsign(&u.names[i], &u.names[j]);
            let rhs = den[i].iter().zip(&den[j]).all(|(a, b)| a & !b == 0);
            if lhs != rhs {
                violations += 1;
                let better = match best {
                    None => true,
                    Some((bi, bj, ..)) => key(i, j).cmp(&key(bi, bj)) == Ordering::Less,
                };
                if better {
                    best = Some((i, j, lhs, rhs));
                }
            }
        }
    }

    let counterexample = best.map(|(i, j, lhs, rhs)| {
        let witness = (0..n).find(|&k| den[i][k / 64] >> (k % 64) & 1 == 1 && den[j][k / 64] >> (k % 64) & 1 == 0);
        Counterexample {
            sub: u.names[i].clone(),
            sup: u.names[j].clone(),
            subsigns: lhs,
            denotation_included: rhs,
            witness: witness.map(|k| u.names[k].clone()),
        }
    });
    let diagnostics = counterexample
        .iter()
        .map(|c| {
            let mut related = vec![c.sub.to_string(), c.sup.to_string()];
            related.extend(c.witness.iter().map(|w| w.to_string()));
            let detail = match (&c.witness, c.subsigns) {
                (Some(w), true) => format!("`{w}` is denoted by `{}` but not by `{}`", c.sub, c.sup),
                _ => "the denotations are included but the names are not related".to_string(),
            };
            Diagnostic::error(
                Code::E230,
                format!(
                    "`{}` {} `{}` yet {}; {} violating pair(s) in total",
                    c.sub,
                    if c.subsigns { "subsigns" } else { "does not subsign" },
                    c.sup,
                    detail,
                    violations
                ),
            )
            .with_related(related)
        })
        .collect();
    TheoremReport {
        report: WfReport::from_diagnostics(diagnostics),
        universe_size: n,
        pairs_checked: n * n,
        violations,
        counterexample,
    }
}

pub fn theorem_check(sce: &ConstructorEnvironment, depth: usize) -> WfReport {
    theorem_check_with(sce, &TheoremOptions { depth, ..Default::default() }).report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::parser::parse_type_name;

    fn rendered(names: impl IntoIterator<Item = TypeName>) -> Vec<String> {
        names.into_iter().map(|g| g.to_string()).collect()
    }

    fn mini() -> ConstructorEnvironment {
        let pair = fixtures::pair();
        ConstructorEnvironment::from_constructors(
            ["Object", "Int", "Pair"].iter().map(|n| pair.get_str(n).unwrap().clone()),
        )
    }

    #[test]
    fn enumeration_counts() {
        let u = enumerate_ground_names(&mini(), 1, false).unwrap();
        assert_eq!(
            rendered(u.names.clone()),
            ["Int", "Object", "Pair<Int,Int>", "Pair<Int,Object>", "Pair<Object,Int>", "Pair<Object,Object>"]
        );
        let u0 = enumerate_ground_names(&mini(), 0, false).unwrap();
        assert_eq!(rendered(u0.names), ["Int", "Object"]);
        // 2 + 6 * 6 at depth 2.
        assert_eq!(enumerate_ground_names(&mini(), 2, false).unwrap().len(), 38);
        assert_eq!(universe_size_estimate(&mini(), 2), 38);
    }

    #[test]
    fn validity_filter() {
        let env = fixtures::enumeration();
        let all = enumerate_ground_names(&env, 1, false).unwrap();
        let valid = enumerate_ground_names(&env, 1, true).unwrap();
        let obj = parse_type_name("Enum<Object>", &env).unwrap();
        assert!(all.contains(&obj));
        assert!(!valid.contains(&obj));
        assert!(valid.contains(&parse_type_name("Enum<MyEnum>", &env).unwrap()));
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_ground_names_capped(&fixtures::pair(), 3, false, 100).unwrap_err();
        assert_eq!(err.code, Code::E231);
    }

    #[test]
    fn denotations() {
        let env = Arc::new(mini());
        let u = enumerate_ground_names(&env, 1, false).unwrap();
        let top = GenericObjectSignature::new(TypeName::con("Object"), env.clone()).unwrap();
        assert_eq!(denote(&top, &u).unwrap().len(), 6);
        let p = GenericObjectSignature::new(parse_type_name("Pair<Int,Int>", &env).unwrap(), env.clone()).unwrap();
        assert_eq!(rendered(denote(&p, &u).unwrap()), ["Pair<Int,Int>"]);

        let javac = Arc::new(fixtures::javac_with_top());
        let u = enumerate_ground_names(&javac, 2, false).unwrap();
        let a = GenericObjectSignature::new(parse_type_name("A<C<Int>>", &javac).unwrap(), javac.clone()).unwrap();
        assert!(denote(&a, &u).unwrap().contains(&parse_type_name("C<Int>", &javac).unwrap()));
    }

    #[test]
    fn theorem_holds_on_fixtures() {
        let r = theorem_check_with(&mini(), &TheoremOptions { depth: 1, ..Default::default() });
        assert!(r.report.ok);
        assert_eq!(r.pairs_checked, 36);
        assert!(theorem_check(&fixtures::pair(), 2).ok);
        assert!(theorem_check(&fixtures::javac_with_top(), 2).ok);
        let opts = TheoremOptions { valid_only: true, ..Default::default() };
        assert!(theorem_check_with(&fixtures::enumeration(), &opts).report.ok);
    }

    #[test]
    fn negative_control_is_caught() {
        let env = fixtures::broken();
        let r = theorem_check_with(&env, &TheoremOptions { depth: 1, ..Default::default() });
        assert_eq!(r.report.codes(), vec![Code::E230]);
        let c = r.counterexample.unwrap();
        assert_eq!((c.sub.to_string(), c.sup.to_string()), ("Broken<Int>".into(), "List<Int>".into()));
        assert!(c.subsigns && !c.denotation_included);
        assert_eq!(c.witness.unwrap().to_string(), "Broken<Int>");
    }
}
