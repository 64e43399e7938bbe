use alloc::string::String;
use core::fmt;

/// An expression name (for factorized relations) or nonterminal (for grammars).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(String);

impl Name {
    pub fn new(s: impl Into<String>) -> Self {
        Name(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name(String::from(s))
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(s)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Returns `base` if unused, otherwise the first `base_k` (k = 1, 2, …) for
/// which `taken` returns false.
pub(crate) fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    if !taken(base) {
        return Name::from(base);
    }
    let mut k = 1usize;
    loop {
        let candidate = alloc::format!("{base}_{k}");
        if !taken(&candidate) {
            return Name::new(candidate);
        }
        k += 1;
    }
}
