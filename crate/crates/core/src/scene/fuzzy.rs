use std::fmt;

use super::SceneError;

/// The connectives of the scene formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
    Implies,
    Not,
}

impl Connective {
    pub const ALL: [Connective; 4] = [Connective::And, Connective::Or, Connective::Implies, Connective::Not];

    pub fn name(self) -> &'static str {
        match self {
            Connective::And => "and",
            Connective::Or => "or",
            Connective::Implies => "implies",
            Connective::Not => "not",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Connective::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            Connective::Not => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Gödel connectives: `and = min`, `or = max`, `implies = max(1 − a, b)`,
/// `not = 1 − a`. Inputs are clamped to `[0, 1]`.
pub fn fuzzy_apply(c: Connective, args: &[f64]) -> Result<f64, SceneError> {
    if args.len() != c.arity() {
        return Err(SceneError::ArityMismatch { connective: c.name(), expected: c.arity(), found: args.len() });
    }
    let a = args[0].clamp(0.0, 1.0);
    Ok(match c {
        Connective::Not => 1.0 - a,
        Connective::And => a.min(args[1].clamp(0.0, 1.0)),
        Connective::Or => a.max(args[1].clamp(0.0, 1.0)),
        Connective::Implies => (1.0 - a).max(args[1].clamp(0.0, 1.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        assert_eq!(fuzzy_apply(Connective::And, &[0.3, 0.7]).unwrap(), 0.3);
        assert_eq!(fuzzy_apply(Connective::Not, &[0.2]).unwrap(), 0.8);
        assert_eq!(fuzzy_apply(Connective::Implies, &[0.9, 0.4]).unwrap(), 0.4);
        assert_eq!(fuzzy_apply(Connective::Or, &[0.3, 0.7]).unwrap(), 0.7);
    }

    #[test]
    fn arity_and_clamping() {
        assert!(matches!(fuzzy_apply(Connective::Not, &[0.1, 0.2]), Err(SceneError::ArityMismatch { .. })));
        assert_eq!(fuzzy_apply(Connective::Not, &[1.5]).unwrap(), 0.0);
        assert_eq!(Connective::from_name("implies"), Some(Connective::Implies));
    }
}
