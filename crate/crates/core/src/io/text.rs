use super::FormatError;
use crate::term::{typecheck_term, Alphabet, Term, VariableContext};

/// Character-level cursor over one line of text, reporting 1-based
/// columns.
pub(crate) struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col0: usize,
}

impl Cursor {
    pub fn new(src: &str, line: usize, col0: usize) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, line, col0 }
    }

    pub fn column(&self) -> usize {
        self.col0 + self.pos + 1
    }

    pub fn error(&self, message: impl Into<String>) -> FormatError {
        FormatError::Syntax { line: self.line, column: self.column(), message: message.into() }
    }

    pub fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    pub fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    pub fn expect(&mut self, c: char) -> Result<(), FormatError> {
        self.skip_ws();
        match self.peek() {
            Some(d) if d == c => {
                self.pos += 1;
                Ok(())
            }
            Some(d) => Err(self.error(format!("expected `{c}`, found `{d}`"))),
            None => Err(self.error(format!("expected `{c}`, found end of input"))),
        }
    }

    /// A name matching `[A-Za-z_][A-Za-z0-9_]*`.
    pub fn name(&mut self) -> Result<String, FormatError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            Some(c) => return Err(self.error(format!("expected a name, found `{c}`"))),
            None => return Err(self.error("expected a name, found end of input")),
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    /// A whitespace-delimited token.
    pub fn token(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| !c.is_whitespace()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    pub fn rest(&self) -> String {
        self.chars[self.pos..].iter().collect()
    }

    pub fn real(&mut self) -> Result<f64, FormatError> {
        self.skip_ws();
        let col = self.column();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+')) {
            self.pos += 1;
        }
        let tok: String = self.chars[start..self.pos].iter().collect();
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(FormatError::Syntax {
                line: self.line,
                column: col,
                message: if tok.is_empty() { "expected a number".into() } else { format!("`{tok}` is not a finite number") },
            }),
        }
    }
}

/// Parses bracket syntax without typechecking. Bare names declared in
/// `ctx` become variables; all other names are symbol applications.
pub(crate) fn parse_term_at(c: &mut Cursor, ctx: &VariableContext) -> Result<Term, FormatError> {
    let name = c.name()?;
    c.skip_ws();
    if c.peek() != Some('[') {
        return Ok(if ctx.type_of(&name).is_some() { Term::var(&name) } else { Term::constant(&name) });
    }
    c.bump();
    let mut args = vec![parse_term_at(c, ctx)?];
    loop {
        c.skip_ws();
        match c.peek() {
            Some(',') => {
                c.bump();
                args.push(parse_term_at(c, ctx)?);
            }
            Some(']') => {
                c.bump();
                return Ok(Term::apply(&name, args));
            }
            Some(d) => return Err(c.error(format!("expected `,` or `]`, found `{d}`"))),
            None => return Err(c.error("expected `,` or `]`, found end of input")),
        }
    }
}

/// Parses and typechecks a term written as `name` or `name[t1,…,tk]`.
pub fn parse_term(text: &str, alphabet: &Alphabet, ctx: &VariableContext) -> Result<Term, FormatError> {
    parse_term_line(text, 1, alphabet, ctx)
}

pub(crate) fn parse_term_line(
    text: &str,
    line: usize,
    alphabet: &Alphabet,
    ctx: &VariableContext,
) -> Result<Term, FormatError> {
    let mut c = Cursor::new(text, line, 0);
    let t = parse_term_at(&mut c, ctx)?;
    c.skip_ws();
    if !c.at_end() {
        return Err(c.error(format!("unexpected `{}` after the term", c.rest())));
    }
    typecheck_term(&t, alphabet, ctx).map_err(|source| FormatError::Type { line, source })?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfa::regular_signature;

    fn ctx() -> VariableContext {
        VariableContext::from_pairs([("x", "alpha"), ("y", "alpha")]).unwrap()
    }

    #[test]
    fn parses_applications() {
        let t = parse_term("equiv[x,y]", &regular_signature(), &ctx()).unwrap();
        assert_eq!(t, Term::apply("equiv", vec![Term::var("x"), Term::var("y")]));
        let t = parse_term(" not[ accept[x] ] ", &regular_signature(), &ctx()).unwrap();
        assert_eq!(t, Term::apply("not", vec![Term::apply("accept", vec![Term::var("x")])]));
        assert_eq!(t.to_string(), "not[accept[x]]");
    }

    #[test]
    fn positioned_errors() {
        match parse_term("equiv[x", &regular_signature(), &ctx()) {
            Err(FormatError::Syntax { line: 1, column: 8, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_term("equiv[x,]", &regular_signature(), &ctx()) {
            Err(FormatError::Syntax { column: 9, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_term("equiv[x] y", &regular_signature(), &ctx()), Err(FormatError::Syntax { .. })));
        assert!(matches!(parse_term("equiv[x]", &regular_signature(), &ctx()), Err(FormatError::Type { .. })));
        assert!(matches!(parse_term("1x", &regular_signature(), &ctx()), Err(FormatError::Syntax { column: 1, .. })));
    }
}
