//! Term representations for signature constructors, type names and the
//! environments that bind them.
//!
//! Everything here is an immutable value. Identifiers are reference-counted
//! so that type names can be cloned cheaply during enumeration.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

/// Returns true if `s` is a valid identifier token of the surface language.
pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

macro_rules! token_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(text: impl AsRef<str>) -> Self {
                $name(Arc::from(text.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }
    };
}

token_newtype!(
    /// Name of a signature constructor.
    Name
);
token_newtype!(
    /// A type variable, either class-level or method-level.
    TypeVarName
);
token_newtype!(
    /// Field or method label.
    Label
);

/// A type variable or a constructor name applied to type arguments.
///
/// Variables are always leaves; a non-generic name is the zeroary
/// application `App(n, [])`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeName {
    Var(TypeVarName),
    App(Name, Vec<TypeName>),
}

impl TypeName {
    pub fn var(v: impl AsRef<str>) -> Self {
        TypeName::Var(TypeVarName::new(v))
    }

    pub fn app(head: impl AsRef<str>, args: Vec<TypeName>) -> Self {
        TypeName::App(Name::new(head), args)
    }

    /// Zeroary application.
    pub fn con(head: impl AsRef<str>) -> Self {
        TypeName::App(Name::new(head), Vec::new())
    }

    pub fn head(&self) -> Option<&Name> {
        match self {
            TypeName::App(h, _) => Some(h),
            TypeName::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[TypeName] {
        match self {
            TypeName::App(_, args) => args,
            TypeName::Var(_) => &[],
        }
    }

    pub fn as_var(&self) -> Option<&TypeVarName> {
        match self {
            TypeName::Var(v) => Some(v),
            TypeName::App(..) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, TypeName::Var(_))
    }

    /// True iff no variable occurs anywhere in the term.
    pub fn is_ground(&self) -> bool {
        match self {
            TypeName::Var(_) => false,
            TypeName::App(_, args) => args.iter().all(TypeName::is_ground),
        }
    }

    /// Variables in left-to-right order of first occurrence.
    pub fn free_vars(&self) -> Vec<TypeVarName> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<TypeVarName>) {
        match self {
            TypeName::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            TypeName::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn mentions_var(&self, v: &TypeVarName) -> bool {
        match self {
            TypeName::Var(w) => w == v,
            TypeName::App(_, args) => args.iter().any(|a| a.mentions_var(v)),
        }
    }

    /// Nesting depth: variables and zeroary names are 0, an application is
    /// one more than its deepest argument.
    pub fn depth(&self) -> usize {
        match self {
            TypeName::Var(_) => 0,
            TypeName::App(_, args) if args.is_empty() => 0,
            TypeName::App(_, args) => 1 + args.iter().map(TypeName::depth).max().unwrap_or(0),
        }
    }

    /// Visits every `App` node, outermost first.
    pub fn for_each_app<'a>(&'a self, f: &mut impl FnMut(&'a Name, &'a [TypeName])) {
        if let TypeName::App(h, args) = self {
            f(h, args);
            for a in args {
                a.for_each_app(f);
            }
        }
    }

    /// Maximal variable-free subterms (the whole term if it is ground).
    pub fn ground_subterms(&self) -> Vec<&TypeName> {
        let mut out = Vec::new();
        self.collect_ground(&mut out);
        out
    }

    fn collect_ground<'a>(&'a self, out: &mut Vec<&'a TypeName>) {
        if self.is_ground() {
            out.push(self);
        } else if let TypeName::App(_, args) = self {
            args.iter().for_each(|a| a.collect_ground(out));
        }
    }

    /// Renames variables through `f`; variables it maps to `None` are kept.
    pub fn rename_vars(&self, f: &impl Fn(&TypeVarName) -> Option<TypeVarName>) -> TypeName {
        match self {
            TypeName::Var(v) => TypeName::Var(f(v).unwrap_or_else(|| v.clone())),
            TypeName::App(h, args) => {
                TypeName::App(h.clone(), args.iter().map(|a| a.rename_vars(f)).collect())
            }
        }
    }
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeName::Var(v) => f.write_str(v.as_str()),
            TypeName::App(h, args) => {
                f.write_str(h.as_str())?;
                if !args.is_empty() {
                    f.write_str("<")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(">")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeName::Var(v) => write!(f, "'{v}"),
            TypeName::App(..) => write!(f, "{self}"),
        }
    }
}

/// A declared type variable with its optional upper bound.
///
/// `bound == None` means the variable is bounded only by the designated top
/// name. An explicit bound must be an application; naked-variable bounds are
/// rejected by the well-formedness checker.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundedVar {
    pub var: TypeVarName,
    pub bound: Option<TypeName>,
}

impl BoundedVar {
    pub fn unbounded(var: impl AsRef<str>) -> Self {
        BoundedVar { var: TypeVarName::new(var), bound: None }
    }

    pub fn bounded(var: impl AsRef<str>, bound: TypeName) -> Self {
        BoundedVar { var: TypeVarName::new(var), bound: Some(bound) }
    }

    /// The bound, with an absent bound read as the zeroary `top`.
    pub fn effective_bound(&self, top: &Name) -> TypeName {
        self.bound.clone().unwrap_or_else(|| TypeName::App(top.clone(), Vec::new()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSig {
    pub label: Label,
    pub ty: TypeName,
}

impl FieldSig {
    pub fn new(label: impl AsRef<str>, ty: TypeName) -> Self {
        FieldSig { label: Label::new(label), ty }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MethodSig {
    pub label: Label,
    /// Method-level type variables; empty for monomorphic methods.
    pub mtvars: Vec<BoundedVar>,
    pub params: Vec<TypeName>,
    pub ret: TypeName,
}

impl MethodSig {
    pub fn new(label: impl AsRef<str>, params: Vec<TypeName>, ret: TypeName) -> Self {
        MethodSig { label: Label::new(label), mtvars: Vec::new(), params, ret }
    }

    pub fn polymorphic(
        label: impl AsRef<str>,
        mtvars: Vec<BoundedVar>,
        params: Vec<TypeName>,
        ret: TypeName,
    ) -> Self {
        MethodSig { label: Label::new(label), mtvars, params, ret }
    }

    pub fn mtvar_names(&self) -> Vec<TypeVarName> {
        self.mtvars.iter().map(|b| b.var.clone()).collect()
    }

    pub fn is_polymorphic(&self) -> bool {
        !self.mtvars.is_empty()
    }

    /// Parameter types followed by the return type.
    pub fn types(&self) -> impl Iterator<Item = &TypeName> {
        self.params.iter().chain(std::iter::once(&self.ret))
    }

    /// Renames the method's own variables to `%0, %1, …`.
    pub fn canonicalize_mtvars(&self) -> MethodSig {
        let map: HashMap<TypeVarName, TypeVarName> = self
            .mtvars
            .iter()
            .enumerate()
            .map(|(i, b)| (b.var.clone(), TypeVarName::new(format!("%{i}"))))
            .collect();
        self.rename_vars(&map)
    }

    fn rename_vars(&self, map: &HashMap<TypeVarName, TypeVarName>) -> MethodSig {
        let f = |v: &TypeVarName| map.get(v).cloned();
        MethodSig {
            label: self.label.clone(),
            mtvars: self
                .mtvars
                .iter()
                .map(|b| BoundedVar {
                    var: f(&b.var).unwrap_or_else(|| b.var.clone()),
                    bound: b.bound.as_ref().map(|t| t.rename_vars(&f)),
                })
                .collect(),
            params: self.params.iter().map(|t| t.rename_vars(&f)).collect(),
            ret: self.ret.rename_vars(&f),
        }
    }
}

/// A named, parameterised signature scheme.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignatureConstructor {
    pub name: Name,
    pub tvars: Vec<BoundedVar>,
    pub supers: Vec<TypeName>,
    pub fields: Vec<FieldSig>,
    pub methods: Vec<MethodSig>,
}

impl SignatureConstructor {
    pub fn new(name: impl AsRef<str>) -> Self {
        SignatureConstructor {
            name: Name::new(name),
            tvars: Vec::new(),
            supers: Vec::new(),
            fields: Vec::new(),
            methods: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.tvars.len()
    }

    pub fn tvar_names(&self) -> Vec<TypeVarName> {
        self.tvars.iter().map(|b| b.var.clone()).collect()
    }

    pub fn field(&self, label: &Label) -> Option<&FieldSig> {
        self.fields.iter().find(|f| &f.label == label)
    }

    pub fn method(&self, label: &Label) -> Option<&MethodSig> {
        self.methods.iter().find(|m| &m.label == label)
    }

    /// Looks up the declared bound of a class or method variable.
    pub fn bound_of(&self, v: &TypeVarName) -> Option<&BoundedVar> {
        self.tvars
            .iter()
            .chain(self.methods.iter().flat_map(|m| m.mtvars.iter()))
            .find(|b| &b.var == v)
    }

    /// Applies `class` to class-level variables everywhere, and `method(i, v)`
    /// to the variables declared by method `i` inside that method.
    pub fn rename_vars(
        &self,
        class: &HashMap<TypeVarName, TypeVarName>,
        method: impl Fn(usize) -> HashMap<TypeVarName, TypeVarName>,
    ) -> SignatureConstructor {
        let cf = |v: &TypeVarName| class.get(v).cloned();
        let rename_bv = |b: &BoundedVar, f: &dyn Fn(&TypeVarName) -> Option<TypeVarName>| BoundedVar {
            var: f(&b.var).unwrap_or_else(|| b.var.clone()),
            bound: b.bound.as_ref().map(|t| t.rename_vars(&f)),
        };
        SignatureConstructor {
            name: self.name.clone(),
            tvars: self.tvars.iter().map(|b| rename_bv(b, &cf)).collect(),
            supers: self.supers.iter().map(|t| t.rename_vars(&cf)).collect(),
            fields: self
                .fields
                .iter()
                .map(|f| FieldSig { label: f.label.clone(), ty: f.ty.rename_vars(&cf) })
                .collect(),
            methods: self
                .methods
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let local = method(i);
                    let mf = |v: &TypeVarName| local.get(v).cloned().or_else(|| class.get(v).cloned());
                    MethodSig {
                        label: m.label.clone(),
                        mtvars: m.mtvars.iter().map(|b| rename_bv(b, &mf)).collect(),
                        params: m.params.iter().map(|t| t.rename_vars(&mf)).collect(),
                        ret: m.ret.rename_vars(&mf),
                    }
                })
                .collect(),
        }
    }
}

/// Renames class variables to `#0, #1, …` and each method's own variables
/// to `%0, %1, …`. The canonical tokens lie outside the identifier class,
/// so they never collide with user-written names.
pub fn alpha_canonicalize(sc: &SignatureConstructor) -> SignatureConstructor {
    let class: HashMap<_, _> = sc
        .tvars
        .iter()
        .enumerate()
        .map(|(i, b)| (b.var.clone(), TypeVarName::new(format!("#{i}"))))
        .collect();
    sc.rename_vars(&class, |i| {
        sc.methods[i]
            .mtvars
            .iter()
            .enumerate()
            .map(|(j, b)| (b.var.clone(), TypeVarName::new(format!("%{j}"))))
            .collect()
    })
}

/// Equality modulo consistent renaming of type variables.
pub fn sc_equal(a: &SignatureConstructor, b: &SignatureConstructor) -> bool {
    a.name == b.name
        && a.tvars.len() == b.tvars.len()
        && a.methods.len() == b.methods.len()
        && alpha_canonicalize(a) == alpha_canonicalize(b)
}

/// Finite map from constructor names to constructors, in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstructorEnvironment {
    bindings: IndexMap<Name, SignatureConstructor>,
}

impl ConstructorEnvironment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an environment keyed by each constructor's own name; later
    /// duplicates replace earlier ones.
    pub fn from_constructors(scs: impl IntoIterator<Item = SignatureConstructor>) -> Self {
        let mut env = Self::new();
        for sc in scs {
            env.insert(sc);
        }
        env
    }

    pub fn insert(&mut self, sc: SignatureConstructor) -> Option<SignatureConstructor> {
        self.bindings.insert(sc.name.clone(), sc)
    }

    /// Binds `sc` under an arbitrary key, which need not be `sc.name`.
    /// Only useful for building deliberately inconsistent environments.
    pub fn insert_as(&mut self, key: Name, sc: SignatureConstructor) -> Option<SignatureConstructor> {
        self.bindings.insert(key, sc)
    }

    pub fn get(&self, name: &Name) -> Option<&SignatureConstructor> {
        self.bindings.get(name)
    }

    pub fn get_str(&self, name: &str) -> Option<&SignatureConstructor> {
        self.bindings.get(&Name::new(name))
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &SignatureConstructor)> {
        self.bindings.iter()
    }

    pub fn constructors(&self) -> impl Iterator<Item = &SignatureConstructor> {
        self.bindings.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.bindings.keys()
    }

    pub fn remove(&mut self, name: &Name) -> Option<SignatureConstructor> {
        self.bindings.shift_remove(name)
    }

    /// Applies `f` to every constructor, keeping keys and order.
    pub fn map_constructors(&self, mut f: impl FnMut(&SignatureConstructor) -> SignatureConstructor) -> Self {
        ConstructorEnvironment {
            bindings: self.bindings.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
        }
    }
}

/// The signature obtained by instantiating a constructor with ground
/// arguments. Methods carry their own variables only when instantiation was
/// done in relaxed mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundSignature {
    pub name: TypeName,
    pub supers: Vec<TypeName>,
    pub fields: Vec<FieldSig>,
    pub methods: Vec<MethodSig>,
}

impl GroundSignature {
    /// Every type occurring in the signature body, in declaration order.
    pub fn body_types(&self) -> impl Iterator<Item = &TypeName> {
        self.supers
            .iter()
            .chain(self.fields.iter().map(|f| &f.ty))
            .chain(self.methods.iter().flat_map(|m| m.types()))
    }

    pub fn field(&self, label: &Label) -> Option<&FieldSig> {
        self.fields.iter().find(|f| &f.label == label)
    }

    pub fn method(&self, label: &Label) -> Option<&MethodSig> {
        self.methods.iter().find(|m| &m.label == label)
    }
}

/// A ground name interpreted in a constructor environment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericObjectSignature {
    pub name: TypeName,
    pub env: Arc<ConstructorEnvironment>,
}

impl GenericObjectSignature {
    /// Accepts the pair only if `name` is ground and well-formed in `env`.
    pub fn new(
        name: TypeName,
        env: Arc<ConstructorEnvironment>,
    ) -> Result<Self, Vec<crate::diag::Diagnostic>> {
        if !name.is_ground() {
            return Err(vec![crate::diag::Diagnostic::error(
                crate::diag::Code::E202,
                format!("`{name}` is not a ground signature name"),
            )]);
        }
        let report = crate::wellformed::wf_type_name(&name, &env, &[]);
        if !report.ok {
            return Err(report.diagnostics);
        }
        Ok(GenericObjectSignature { name, env })
    }

    /// Builds the pair without checking well-formedness.
    pub fn new_unchecked(name: TypeName, env: Arc<ConstructorEnvironment>) -> Self {
        GenericObjectSignature { name, env }
    }
}
