use std::fmt::Write as _;

use super::text::Cursor;
use super::{content_lines, FormatError};
use crate::collage::{AffineTransform, Picture, Point, Polygon};
use crate::dfa::Dfa;
use crate::scene::{PredicateModel, PredicateSet};

fn invalid(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Invalid { line, message: message.into() }
}

/// Line-oriented automaton text: `alphabet`, `states`, `initial`, `final`
/// and one `trans q a r` line per defined transition.
pub fn write_dfa(m: &Dfa) -> String {
    let mut s = String::new();
    let alpha: Vec<String> = m.alphabet().iter().map(char::to_string).collect();
    let _ = writeln!(s, "alphabet {}", alpha.join(" "));
    let states: Vec<String> = (0..m.num_states()).map(|q| q.to_string()).collect();
    let _ = writeln!(s, "states {}", states.join(" "));
    let _ = writeln!(s, "initial {}", m.initial());
    let finals: Vec<String> = m.finals().map(|q| q.to_string()).collect();
    if finals.is_empty() {
        s.push_str("final\n");
    } else {
        let _ = writeln!(s, "final {}", finals.join(" "));
    }
    for (q, a, r) in m.transitions() {
        let _ = writeln!(s, "trans {q} {a} {r}");
    }
    s
}

pub fn parse_dfa(text: &str) -> Result<Dfa, FormatError> {
    let mut alphabet: Option<(usize, Vec<char>)> = None;
    let mut states: Option<(usize, usize)> = None;
    let mut initial: Option<(usize, usize)> = None;
    let mut finals: Vec<(usize, usize)> = Vec::new();
    let mut trans: Vec<(usize, usize, char, usize)> = Vec::new();
    for (line, body) in content_lines(text) {
        let mut c = Cursor::new(body, line, 0);
        let key = c.token().expect("content lines are nonempty");
        let mut tokens = Vec::new();
        loop {
            c.skip_ws();
            let col = c.column();
            match c.token() {
                Some(t) => tokens.push((col, t)),
                None => break,
            }
        }
        let state = |(col, t): &(usize, String)| -> Result<usize, FormatError> {
            t.parse().map_err(|_| FormatError::Syntax { line, column: *col, message: format!("`{t}` is not a state") })
        };
        let dup = |what: &str| invalid(line, format!("repeated `{what}` line"));
        match key.as_str() {
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(dup("alphabet"));
                }
                let mut syms = Vec::new();
                for (col, t) in &tokens {
                    let mut it = t.chars();
                    match (it.next(), it.next()) {
                        (Some(ch), None) => syms.push(ch),
                        _ => {
                            return Err(FormatError::Syntax {
                                line,
                                column: *col,
                                message: format!("symbol `{t}` is not a single character"),
                            })
                        }
                    }
                }
                alphabet = Some((line, syms));
            }
            "states" => {
                if states.is_some() {
                    return Err(dup("states"));
                }
                for (i, tok) in tokens.iter().enumerate() {
                    if state(tok)? != i {
                        return Err(invalid(line, "states must be listed as 0 1 … n-1"));
                    }
                }
                states = Some((line, tokens.len()));
            }
            "initial" => {
                if initial.is_some() {
                    return Err(dup("initial"));
                }
                if tokens.len() != 1 {
                    return Err(invalid(line, "`initial` takes one state"));
                }
                initial = Some((line, state(&tokens[0])?));
            }
            "final" => {
                for tok in &tokens {
                    finals.push((line, state(tok)?));
                }
            }
            "trans" => {
                if tokens.len() != 3 {
                    return Err(invalid(line, "`trans` takes a state, a symbol and a state"));
                }
                let mut it = tokens[1].1.chars();
                let sym = match (it.next(), it.next()) {
                    (Some(ch), None) => ch,
                    _ => {
                        return Err(FormatError::Syntax {
                            line,
                            column: tokens[1].0,
                            message: "symbol must be a single character".into(),
                        })
                    }
                };
                trans.push((line, state(&tokens[0])?, sym, state(&tokens[2])?));
            }
            other => {
                return Err(FormatError::Syntax { line, column: 1, message: format!("unknown keyword `{other}`") })
            }
        }
    }
    let (aline, alphabet) = alphabet.ok_or_else(|| invalid(0, "missing `alphabet` line"))?;
    let (_, n) = states.ok_or_else(|| invalid(0, "missing `states` line"))?;
    let (iline, q0) = initial.ok_or_else(|| invalid(0, "missing `initial` line"))?;
    let mut m = Dfa::new(&alphabet, n, q0).map_err(|e| invalid(if q0 >= n { iline } else { aline }, e.to_string()))?;
    for (line, q) in finals {
        m.set_final(q, true).map_err(|e| invalid(line, e.to_string()))?;
    }
    for (line, q, a, r) in trans {
        if matches!(m.step(q, a), Ok(Some(_))) {
            return Err(invalid(line, format!("transition from {q} on `{a}` defined twice")));
        }
        m.set_transition(q, a, r).map_err(|e| invalid(line, e.to_string()))?;
    }
    Ok(m)
}

/// One `polygon x1 y1 x2 y2 …` line per polygon.
pub fn write_picture(pic: &Picture) -> String {
    let mut s = String::new();
    for p in &pic.polygons {
        s.push_str("polygon");
        for v in p.vertices() {
            let _ = write!(s, " {} {}", v.x, v.y);
        }
        s.push('\n');
    }
    s
}

pub fn parse_picture(text: &str) -> Result<Picture, FormatError> {
    let mut polygons = Vec::new();
    for (line, body) in content_lines(text) {
        let mut c = Cursor::new(body, line, 0);
        if c.name()? != "polygon" {
            return Err(FormatError::Syntax { line, column: 1, message: "expected `polygon`".into() });
        }
        let mut coords = Vec::new();
        c.skip_ws();
        while !c.at_end() {
            coords.push(c.real()?);
            c.skip_ws();
        }
        if coords.len() % 2 != 0 {
            return Err(invalid(line, "odd number of coordinates"));
        }
        let pts = coords.chunks(2).map(|p| Point::new(p[0], p[1])).collect();
        polygons.push(Polygon::new(pts).map_err(|e| invalid(line, e.to_string()))?);
    }
    Ok(Picture::new(polygons))
}

/// One affine map `m11 m12 m21 m22 b1 b2` per line.
pub fn write_params(params: &[f64]) -> String {
    let mut s = String::new();
    for chunk in params.chunks(6) {
        let words: Vec<String> = chunk.iter().map(f64::to_string).collect();
        let _ = writeln!(s, "{}", words.join(" "));
    }
    s
}

/// Reals separated by whitespace, in any line layout.
pub fn parse_params(text: &str) -> Result<Vec<f64>, FormatError> {
    let mut out = Vec::new();
    for (line, body) in content_lines(text) {
        let mut c = Cursor::new(body, line, 0);
        c.skip_ws();
        while !c.at_end() {
            out.push(c.real()?);
            c.skip_ws();
        }
    }
    Ok(out)
}

pub fn transforms_of(params: &[f64]) -> Vec<AffineTransform> {
    params.chunks(6).map(AffineTransform::from_params).collect()
}

/// One line per predicate: its name, then the weights and the bias.
pub fn write_models(models: &PredicateSet) -> String {
    let mut s = String::new();
    for (name, m) in models.names().iter().zip(models.models()) {
        let words: Vec<String> = m.params().iter().map(f64::to_string).collect();
        let _ = writeln!(s, "{name} {}", words.join(" "));
    }
    s
}

pub fn parse_models(text: &str) -> Result<PredicateSet, FormatError> {
    let mut names = Vec::new();
    let mut models = Vec::new();
    let mut last_line = 0;
    for (line, body) in content_lines(text) {
        let mut c = Cursor::new(body, line, 0);
        names.push(c.name()?);
        let mut p = Vec::new();
        c.skip_ws();
        while !c.at_end() {
            p.push(c.real()?);
            c.skip_ws();
        }
        if p.len() < 2 {
            return Err(invalid(line, "a model needs at least one weight and a bias"));
        }
        models.push(PredicateModel::from_params(&p));
        last_line = line;
    }
    PredicateSet::new(names, models).map_err(|e| invalid(last_line, e.to_string()))
}
