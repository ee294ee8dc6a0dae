//! Seeded generation of small well-formed environments.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::denote::universe_size_estimate;
use crate::subst::Substitution;
use crate::syntax::{
    BoundedVar, ConstructorEnvironment, FieldSig, MethodSig, Name, SignatureConstructor, TypeName, TypeVarName,
};
use crate::wellformed::wf_env;

#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Including the top.
    pub max_constructors: usize,
    pub max_arity: usize,
    pub max_type_depth: usize,
    /// Environments whose depth-2 universe could exceed this are redrawn.
    pub universe_cap: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_constructors: 5, max_arity: 2, max_type_depth: 2, universe_cap: 400 }
    }
}

const CLASS_VARS: [&str; 2] = ["T", "U"];
const METHOD_VAR: &str = "M";

struct Plan {
    names: Vec<Name>,
    arities: Vec<usize>,
}

impl Plan {
    fn draw_type(&self, rng: &mut ChaCha8Rng, scope: &[TypeVarName], depth: usize) -> TypeName {
        if !scope.is_empty() && rng.gen_bool(0.45) {
            return TypeName::Var(scope.choose(rng).unwrap().clone());
        }
        let candidates: Vec<usize> = (0..self.names.len()).filter(|&i| depth > 0 || self.arities[i] == 0).collect();
        let i = *candidates.choose(rng).unwrap();
        let args = (0..self.arities[i]).map(|_| self.draw_type(rng, scope, depth - 1)).collect();
        TypeName::App(self.names[i].clone(), args)
    }

    fn draw_super(&self, rng: &mut ChaCha8Rng, upto: usize, scope: &[TypeVarName], depth: usize) -> TypeName {
        let i = rng.gen_range(0..upto);
        let args = (0..self.arities[i]).map(|_| self.draw_type(rng, scope, depth - 1)).collect();
        TypeName::App(self.names[i].clone(), args)
    }
}

fn try_generate(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> ConstructorEnvironment {
    let n = rng.gen_range(2..=cfg.max_constructors.max(2));
    let mut names = vec![Name::new("Object")];
    let mut arities = vec![0];
    for i in 1..n {
        names.push(Name::new(format!("K{i}")));
        arities.push(rng.gen_range(0..=cfg.max_arity.min(CLASS_VARS.len())));
    }
    // At least one zeroary name besides the top keeps universes interesting.
    if !arities[1..].contains(&0) {
        arities[1] = 0;
    }
    let plan = Plan { names, arities };
    let d = cfg.max_type_depth.max(1);

    let mut env = ConstructorEnvironment::new();
    env.insert(SignatureConstructor::new("Object"));
    for i in 1..n {
        let mut sc = SignatureConstructor::new(plan.names[i].as_str());
        let scope: Vec<TypeVarName> = CLASS_VARS[..plan.arities[i]].iter().map(TypeVarName::new).collect();
        for v in &scope {
            let bound = match rng.gen_range(0..10) {
                0 => Some(TypeName::con("Object")),
                1 => Some(TypeName::App(plan.names[i].clone(), scope.iter().cloned().map(TypeName::Var).collect())),
                2 => Some(plan.draw_super(rng, i, &scope, d)),
                _ => None,
            };
            sc.tvars.push(BoundedVar { var: v.clone(), bound });
        }

        let mut heads = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let s = plan.draw_super(rng, i, &scope, d);
            if !heads.contains(&s.head().cloned()) {
                heads.push(s.head().cloned());
                sc.supers.push(s);
            }
        }

        for s in &sc.supers.clone() {
            let TypeName::App(h, args) = s else { continue };
            let d_sc = env.get(h).expect("super head generated earlier");
            let Ok(sub) = Substitution::for_constructor(d_sc, args.clone()) else { continue };
            for f in &d_sc.fields {
                if let Ok(f) = sub.apply_field(f) {
                    if sc.field(&f.label).is_none() {
                        sc.fields.push(f);
                    }
                }
            }
            for m in &d_sc.methods {
                if let Ok(m) = sub.apply_method(m) {
                    if sc.method(&m.label).is_none() {
                        sc.methods.push(m);
                    }
                }
            }
        }

        for k in 0..rng.gen_range(0..=2) {
            sc.fields.push(FieldSig::new(format!("f{i}_{k}"), plan.draw_type(rng, &scope, d)));
        }
        for k in 0..rng.gen_range(0..=2) {
            let label = format!("m{i}_{k}");
            let m = if rng.gen_bool(0.25) {
                let mut inner = scope.clone();
                inner.push(TypeVarName::new(METHOD_VAR));
                let bound = rng.gen_bool(0.3).then(|| plan.draw_super(rng, i, &scope, d));
                let params = (0..rng.gen_range(0..=2)).map(|_| plan.draw_type(rng, &inner, d)).collect();
                MethodSig {
                    label: label.as_str().into(),
                    mtvars: vec![BoundedVar { var: TypeVarName::new(METHOD_VAR), bound }],
                    params,
                    ret: plan.draw_type(rng, &inner, d),
                }
            } else {
                let params = (0..rng.gen_range(0..=2)).map(|_| plan.draw_type(rng, &scope, d)).collect();
                MethodSig::new(label, params, plan.draw_type(rng, &scope, d))
            };
            sc.methods.push(m);
        }
        env.insert(sc);
    }
    env
}

/// Draws environments until one is well-formed and its depth-2 universe
/// fits the cap.
pub fn generate_env(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> ConstructorEnvironment {
    loop {
        let env = try_generate(rng, cfg);
        if universe_size_estimate(&env, 2) <= cfg.universe_cap && wf_env(&env).ok {
            return env;
        }
    }
}

/// `count` environments from one seed.
pub fn campaign(seed: u64, count: usize) -> Vec<ConstructorEnvironment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GenConfig::default();
    (0..count).map(|_| generate_env(&mut rng, &cfg)).collect()
}

/// Renames every class and method variable to a fresh name derived from
/// `salt`. The renaming is injective within each binder.
pub fn rename_type_vars(sce: &ConstructorEnvironment, salt: &str) -> ConstructorEnvironment {
    sce.map_constructors(|sc| {
        let class: HashMap<_, _> = sc
            .tvars
            .iter()
            .enumerate()
            .map(|(i, b)| (b.var.clone(), TypeVarName::new(format!("{salt}C{i}"))))
            .collect();
        sc.rename_vars(&class, |i| {
            sc.methods[i]
                .mtvars
                .iter()
                .enumerate()
                .map(|(j, b)| (b.var.clone(), TypeVarName::new(format!("{salt}M{i}_{j}"))))
                .collect()
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::sc_equal;

    #[test]
    fn campaign_is_deterministic_and_well_formed() {
        let a = campaign(7, 20);
        let b = campaign(7, 20);
        assert_eq!(a, b);
        for env in &a {
            assert!(wf_env(env).ok);
            assert!(env.len() <= 5);
            assert!(env.constructors().all(|sc| sc.arity() <= 2));
            assert_eq!(env.names().next().unwrap().as_str(), "Object");
        }
    }

    #[test]
    fn campaign_is_varied() {
        let envs = campaign(11, 50);
        assert!(envs.iter().any(|e| e.constructors().any(|sc| sc.tvars.iter().any(|b| b.bound.is_some()))));
        assert!(envs.iter().any(|e| e.constructors().any(|sc| sc.methods.iter().any(|m| m.is_polymorphic()))));
        assert!(envs.iter().any(|e| e.constructors().any(|sc| sc.supers.len() == 2)));
    }

    #[test]
    fn renaming_is_alpha_equivalent() {
        for env in campaign(3, 20) {
            let renamed = rename_type_vars(&env, "q");
            for (a, b) in env.constructors().zip(renamed.constructors()) {
                assert!(sc_equal(a, b));
            }
        }
    }
}
