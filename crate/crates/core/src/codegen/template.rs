//! `{placeholder}` substitution. `{{` and `}}` produce literal braces.

/// A piece of a parsed template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Piece<'a> {
    Text(&'a str),
    Brace(char),
    Placeholder(&'a str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SyntaxError {
    pub offset: usize,
    pub message: &'static str,
}

pub(crate) fn parse(template: &str) -> Result<Vec<Piece<'_>>, SyntaxError> {
    let bytes = template.as_bytes();
    let mut pieces = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' | b'}' if bytes.get(i + 1) == Some(&bytes[i]) => {
                if start < i {
                    pieces.push(Piece::Text(&template[start..i]));
                }
                pieces.push(Piece::Brace(bytes[i] as char));
                i += 2;
                start = i;
            }
            b'{' => {
                let close = template[i + 1..]
                    .find('}')
                    .ok_or(SyntaxError { offset: i, message: "unclosed placeholder" })?;
                let name = &template[i + 1..i + 1 + close];
                if name.is_empty() || !name.bytes().all(|b| b.is_ascii_lowercase() || b == b'_' || b.is_ascii_digit()) {
                    return Err(SyntaxError { offset: i, message: "placeholder names are lowercase identifiers" });
                }
                if start < i {
                    pieces.push(Piece::Text(&template[start..i]));
                }
                pieces.push(Piece::Placeholder(name));
                i += close + 2;
                start = i;
            }
            b'}' => return Err(SyntaxError { offset: i, message: "unmatched '}'" }),
            _ => i += 1,
        }
    }
    if start < bytes.len() {
        pieces.push(Piece::Text(&template[start..]));
    }
    Ok(pieces)
}

pub(crate) fn placeholders(template: &str) -> Result<Vec<&str>, SyntaxError> {
    Ok(parse(template)?
        .into_iter()
        .filter_map(|p| match p {
            Piece::Placeholder(n) => Some(n),
            _ => None,
        })
        .collect())
}

/// Substitutes `vars` into `template`. Returns the first placeholder with no
/// binding as the error.
pub(crate) fn fill<'t>(template: &'t str, vars: &[(&str, &str)]) -> Result<String, FillError<'t>> {
    let mut out = String::with_capacity(template.len() + 32);
    for piece in parse(template).map_err(FillError::Syntax)? {
        match piece {
            Piece::Text(t) => out.push_str(t),
            Piece::Brace(c) => out.push(c),
            Piece::Placeholder(name) => match vars.iter().find(|(k, _)| *k == name) {
                Some((_, v)) => out.push_str(v),
                None => return Err(FillError::Unbound(name)),
            },
        }
    }
    Ok(out)
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum FillError<'t> {
    Syntax(SyntaxError),
    Unbound(&'t str),
}
