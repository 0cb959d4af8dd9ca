use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

/// Independent variables a function atom depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Deps {
    pub t: bool,
    pub x: bool,
    pub v: bool,
}

impl Deps {
    pub const TX: Deps = Deps {
        t: true,
        x: true,
        v: false,
    };
    pub const T: Deps = Deps {
        t: true,
        x: false,
        v: false,
    };
    pub const V: Deps = Deps {
        t: false,
        x: false,
        v: true,
    };
    pub const TXV: Deps = Deps {
        t: true,
        x: true,
        v: true,
    };
}

/// Symbol table used by the parser: parameters and unknown functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbols {
    params: BTreeSet<String>,
    functions: BTreeMap<String, Deps>,
}

const PARAMS: [&str; 15] = [
    "p", "k", "n", "m", "lambda", "lambda0", "lambda1", "lambda2", "lambda3", "A", "A1", "A2",
    "A1star", "eps", "c",
];

impl Default for Symbols {
    fn default() -> Self {
        let mut functions = BTreeMap::new();
        for f in ["a", "f", "g", "h"] {
            functions.insert(f.to_string(), Deps::TX);
        }
        for f in ["alpha", "beta", "gamma"] {
            functions.insert(f.to_string(), Deps::T);
        }
        functions.insert("F".to_string(), Deps::V);
        functions.insert("xi".to_string(), Deps::TXV);
        functions.insert("eta".to_string(), Deps::TXV);
        Symbols {
            params: PARAMS.iter().map(|s| s.to_string()).collect(),
            functions,
        }
    }
}

impl Symbols {
    pub fn default_table() -> &'static Symbols {
        static TABLE: OnceLock<Symbols> = OnceLock::new();
        TABLE.get_or_init(Symbols::default)
    }

    pub fn declare_param(mut self, name: &str) -> Self {
        self.params.insert(name.to_string());
        self
    }

    pub fn declare_function(mut self, name: &str, deps: Deps) -> Self {
        self.functions.insert(name.to_string(), deps);
        self
    }

    /// Declared parameters, plus the fresh constants `C1`, `C2`, ...
    pub fn is_param(&self, name: &str) -> bool {
        self.params.contains(name)
            || (name.len() > 1
                && name.starts_with('C')
                && name[1..].chars().all(|c| c.is_ascii_digit()))
    }

    pub fn function_deps(&self, name: &str) -> Option<Deps> {
        self.functions.get(name).copied()
    }
}
