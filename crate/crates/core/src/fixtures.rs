//! Small environments shared by tests, benches and the CLI examples.

use crate::parser::parse_env;
use crate::syntax::ConstructorEnvironment;

pub const PAIR_SRC: &str = include_str!("../fixtures/pair.gnoop");
pub const JAVAC_SRC: &str = include_str!("../fixtures/javac.gnoop");
pub const JAVAC_TOP_SRC: &str = include_str!("../fixtures/javac_top.gnoop");
pub const RECUR_SRC: &str = include_str!("../fixtures/recur.gnoop");
pub const ENUM_SRC: &str = include_str!("../fixtures/enum.gnoop");
pub const BROKEN_SRC: &str = include_str!("../fixtures/broken.gnoop");

/// Every fixture by file stem, in a fixed order.
pub const ALL: &[(&str, &str)] = &[
    ("pair", PAIR_SRC),
    ("javac", JAVAC_SRC),
    ("javac_top", JAVAC_TOP_SRC),
    ("recur", RECUR_SRC),
    ("enum", ENUM_SRC),
    ("broken", BROKEN_SRC),
];

fn load(src: &str) -> ConstructorEnvironment {
    parse_env(src).expect("fixture parses")
}

/// Object, Int, Bool, List<T>, Pair<A,B>.
pub fn pair() -> ConstructorEnvironment {
    load(PAIR_SRC)
}

/// A<T>, B<T> extends A<C<T>>, C<T> extends B<T>; no top.
pub fn javac() -> ConstructorEnvironment {
    load(JAVAC_SRC)
}

/// The javac triple under an injected Object, plus Int.
pub fn javac_with_top() -> ConstructorEnvironment {
    load(JAVAC_TOP_SRC)
}

/// Int and C<T> { m(): C<C<T>> }; no top.
pub fn recur() -> ConstructorEnvironment {
    load(RECUR_SRC)
}

pub fn recur_with_top() -> ConstructorEnvironment {
    crate::erasure::inject_top(&recur(), &Default::default())
}

/// Object, Enum<E extends Enum<E>>, MyEnum extends Enum<MyEnum>.
pub fn enumeration() -> ConstructorEnvironment {
    load(ENUM_SRC)
}

/// List<T> and Broken<T> extends List<T> with a mismatched head().
pub fn broken() -> ConstructorEnvironment {
    load(BROKEN_SRC)
}

/// The well-formed fixtures that declare a top.
pub fn with_top() -> Vec<(&'static str, ConstructorEnvironment)> {
    vec![("pair", pair()), ("javac_top", javac_with_top()), ("enum", enumeration())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erasure::inject_top;
    use crate::wellformed::wf_env;

    #[test]
    fn all_parse() {
        for (name, src) in ALL {
            assert!(parse_env(src).is_ok(), "{name}");
        }
    }

    #[test]
    fn javac_top_is_the_injected_triple() {
        let with_int = parse_env(&format!("{JAVAC_SRC}\nconstructor Int<> extends {{}} {{}}")).unwrap();
        assert_eq!(inject_top(&with_int, &Default::default()), javac_with_top());
    }

    #[test]
    fn well_formedness() {
        for env in [pair(), javac(), javac_with_top(), recur(), recur_with_top(), enumeration()] {
            assert!(wf_env(&env).ok, "{:?}", wf_env(&env).diagnostics);
        }
        assert!(!wf_env(&broken()).ok);
    }
}
