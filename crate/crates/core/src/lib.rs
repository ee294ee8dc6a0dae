//! Generic nominal object signatures: parsing, well-formedness,
//! substitution, subsigning, erasure and a finite denotation oracle.
//!
//! ```
//! use gnoop_core::{parse_env, parse_type_name, wf_env, Hierarchy};
//!
//! let env = parse_env(
//!     "constructor Object<> extends {} {}
//!      constructor Int<> extends { Object } {}
//!      constructor Box<T> extends { Object } { field get: T; }",
//! )
//! .unwrap();
//! assert!(wf_env(&env).ok);
//! let boxed = parse_type_name("Box<Int>", &env).unwrap();
//! assert!(Hierarchy::new(&env).is_subsign(&boxed, &parse_type_name("Object", &env).unwrap()));
//! ```

pub mod denote;
pub mod diag;
pub mod erasure;
pub mod fixtures;
pub mod generate;
pub mod parser;
pub mod subsign;
pub mod subst;
pub mod syntax;
pub mod wellformed;

pub use denote::{
    denote, enumerate_ground_names, theorem_check, theorem_check_with, Counterexample, GroundUniverse,
    TheoremOptions, TheoremReport,
};
pub use diag::{Code, Diagnostic, Severity, Site, SourceMap, SourceSpan, WfReport};
pub use erasure::{check_erasure_theorem, erase_env, erase_gos, erase_name, inject_top, ErasureConfig};
pub use parser::{parse_env, parse_env_with_map, parse_type_name, parse_type_name_in, render_env, render_type};
pub use subsign::{gss, subsigns, valid_ground_name, validate_env_usage, Hierarchy, SubsignVerdict};
pub use subst::{
    expansiveness, ground_of, instantiate, instantiation_closure, substitute, ClosureResult, ExpansivenessReport,
    GroundingMode, Substitution,
};
pub use syntax::{
    alpha_canonicalize, sc_equal, BoundedVar, ConstructorEnvironment, FieldSig, GenericObjectSignature,
    GroundSignature, Label, MethodSig, Name, SignatureConstructor, TypeName, TypeVarName,
};
pub use wellformed::{wf_constructor, wf_env, wf_type_name};
