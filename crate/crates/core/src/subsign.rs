//! Ground supersignature sets, subsigning between generic object
//! signatures, and validity of bounded instantiations.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::{Arc, RwLock};

use crate::diag::{Code, Diagnostic, Site, WfReport};
use crate::subst::{direct_supers, Substitution};
use crate::syntax::{ConstructorEnvironment, GenericObjectSignature, TypeName};
use crate::wellformed::sce_extends;

/// Subsigning queries over one environment, memoizing supersignature sets.
///
/// The memo table is behind a lock, so a `Hierarchy` can be shared between
/// threads; answers never depend on what was cached before.
pub struct Hierarchy<'a> {
    env: &'a ConstructorEnvironment,
    memo: RwLock<HashMap<TypeName, Arc<BTreeSet<TypeName>>>>,
}

impl<'a> Hierarchy<'a> {
    pub fn new(env: &'a ConstructorEnvironment) -> Self {
        Hierarchy { env, memo: RwLock::new(HashMap::new()) }
    }

    pub fn env(&self) -> &'a ConstructorEnvironment {
        self.env
    }

    /// All ground supersignature names of `g`, excluding `g` itself.
    pub fn gss(&self, g: &TypeName) -> Result<Arc<BTreeSet<TypeName>>, Diagnostic> {
        if let Some(hit) = self.memo.read().unwrap().get(g) {
            return Ok(hit.clone());
        }
        let mut set = BTreeSet::new();
        for s in direct_supers(self.env, g)? {
            set.extend(self.gss(&s)?.iter().cloned());
            set.insert(s);
        }
        let set = Arc::new(set);
        self.memo.write().unwrap().insert(g.clone(), set.clone());
        Ok(set)
    }

    /// `sub` equals `sup` or `sup` is one of its ground supersignatures.
    pub fn is_subsign(&self, sub: &TypeName, sup: &TypeName) -> bool {
        sub == sup || self.gss(sub).is_ok_and(|s| s.contains(sup))
    }

    /// A chain of direct supersignature steps from `sub` to `sup`, found
    /// breadth-first so that it is one of the shortest.
    pub fn chain(&self, sub: &TypeName, sup: &TypeName) -> Option<Vec<TypeName>> {
        let mut prev: HashMap<TypeName, TypeName> = HashMap::new();
        let mut seen = HashSet::from([sub.clone()]);
        let mut queue = VecDeque::from([sub.clone()]);
        while let Some(g) = queue.pop_front() {
            if &g == sup {
                let mut chain = vec![g.clone()];
                let mut cur = g;
                while let Some(p) = prev.get(&cur) {
                    chain.push(p.clone());
                    cur = p.clone();
                }
                chain.reverse();
                return Some(chain);
            }
            for s in direct_supers(self.env, &g).ok()? {
                if seen.insert(s.clone()) {
                    prev.insert(s.clone(), g.clone());
                    queue.push_back(s);
                }
            }
        }
        None
    }

    /// Validity of a well-formed ground name: arguments first, then each
    /// argument against its bound with all arguments substituted in.
    pub fn valid_ground_name(&self, g: &TypeName) -> WfReport {
        let mut out = Vec::new();
        self.check_valid(g, &mut out);
        WfReport::from_diagnostics(out)
    }

    fn check_valid(&self, g: &TypeName, out: &mut Vec<Diagnostic>) {
        let TypeName::App(head, args) = g else { return };
        for a in args {
            self.check_valid(a, out);
        }
        let Some(sc) = self.env.get(head) else { return };
        let Ok(s) = Substitution::for_constructor(sc, args.clone()) else { return };
        for (i, (tv, arg)) in sc.tvars.iter().zip(args).enumerate() {
            let Some(bound) = &tv.bound else { continue };
            let Ok(bound) = s.apply(bound) else { continue };
            if !self.is_subsign(arg, &bound) {
                out.push(
                    Diagnostic::error(
                        Code::E210,
                        format!(
                            "type argument {i} of `{g}` is `{arg}`, which is not a subsign of its bound `{bound}`"
                        ),
                    )
                    .with_related([g.to_string(), arg.to_string(), bound.to_string()]),
                );
            }
        }
    }
}

/// Ground supersignature names of `g` in `sce`.
pub fn gss(sce: &ConstructorEnvironment, g: &TypeName) -> Result<BTreeSet<TypeName>, Diagnostic> {
    Hierarchy::new(sce).gss(g).map(|s| (*s).clone())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsignVerdict {
    pub holds: bool,
    /// From the sub name to the super name; empty when the names are equal
    /// or the relation does not hold.
    pub chain: Vec<TypeName>,
}

/// Decides `sub ⊴ sup`: the sub-side environment must extend the
/// super-side one, and the super name must be the sub name or one of its
/// ground supersignatures.
pub fn subsigns(sub: &GenericObjectSignature, sup: &GenericObjectSignature) -> SubsignVerdict {
    let no = SubsignVerdict { holds: false, chain: Vec::new() };
    if !(Arc::ptr_eq(&sub.env, &sup.env) || sce_extends(&sub.env, &sup.env)) {
        return no;
    }
    if sub.name == sup.name {
        return SubsignVerdict { holds: true, chain: Vec::new() };
    }
    let h = Hierarchy::new(&sub.env);
    if !h.is_subsign(&sub.name, &sup.name) {
        return no;
    }
    let chain = h.chain(&sub.name, &sup.name).unwrap_or_default();
    SubsignVerdict { holds: true, chain }
}

pub fn valid_ground_name(sce: &ConstructorEnvironment, g: &TypeName) -> WfReport {
    Hierarchy::new(sce).valid_ground_name(g)
}

/// Checks every variable-free type occurring in the environment's
/// constructor bodies, including ground arguments nested in non-ground
/// types and in bounds.
pub fn validate_env_usage(sce: &ConstructorEnvironment) -> WfReport {
    let h = Hierarchy::new(sce);
    let mut out = Vec::new();
    for sc in sce.constructors() {
        let n = &sc.name;
        let mut sites: Vec<(Site, &TypeName)> = Vec::new();
        for (i, b) in sc.tvars.iter().enumerate() {
            if let Some(t) = &b.bound {
                sites.push((Site::TypeVar(n.clone(), i), t));
            }
        }
        for (i, t) in sc.supers.iter().enumerate() {
            sites.push((Site::Super(n.clone(), i), t));
        }
        for f in &sc.fields {
            sites.push((Site::Field(n.clone(), f.label.clone()), &f.ty));
        }
        for m in &sc.methods {
            let site = Site::Method(n.clone(), m.label.clone());
            for b in &m.mtvars {
                if let Some(t) = &b.bound {
                    sites.push((site.clone(), t));
                }
            }
            for t in m.types() {
                sites.push((site.clone(), t));
            }
        }
        for (site, t) in sites {
            for g in t.ground_subterms() {
                for d in h.valid_ground_name(g).diagnostics {
                    out.push(d.at(site.clone()));
                }
            }
        }
    }
    WfReport::from_diagnostics(out)
}
