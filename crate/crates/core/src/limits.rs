use thiserror::Error;

/// Caps on materialization. Operations that may blow up take a `Limits` and
/// fail with [`ResourceLimit`] instead of exhausting memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest relation (or word set) that may be materialized.
    pub max_tuples: usize,
    /// Largest automaton a construction may produce.
    pub max_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_tuples: 2_000_000,
            max_states: 200_000,
        }
    }
}

impl Limits {
    pub fn unbounded() -> Self {
        Limits {
            max_tuples: usize::MAX,
            max_states: usize::MAX,
        }
    }

    pub(crate) fn check_tuples(&self, n: usize) -> Result<(), ResourceLimit> {
        if n > self.max_tuples {
            Err(ResourceLimit::new("materialized tuples", self.max_tuples))
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_states(&self, n: usize) -> Result<(), ResourceLimit> {
        if n > self.max_states {
            Err(ResourceLimit::new("automaton states", self.max_states))
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("resource limit exceeded: {what} above cap {cap}")]
pub struct ResourceLimit {
    pub what: &'static str,
    pub cap: usize,
}

impl ResourceLimit {
    pub fn new(what: &'static str, cap: usize) -> Self {
        ResourceLimit { what, cap }
    }
}
