use super::ast::Pos;
use super::error::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(u64),
    Sym(&'static str),
    Eof,
}

impl std::fmt::Display for TokenKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TokenKind::Ident(name) => write!(f, "identifier `{name}`"),
            TokenKind::Int(v) => write!(f, "integer `{v}`"),
            TokenKind::Sym(s) => write!(f, "`{s}`"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

// Longest symbols first so that maximal munch works with a linear scan.
const SYMBOLS: &[&str] = &[
    "=>", "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")", "[", "]", ";", ",", ".", "=",
    "<", ">", "+", "-", "*", "/", "!",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    while i < bytes.len() {
        let c = bytes[i];
        let pos = Pos { line, col };
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            col += (i - start) as u32;
            tokens.push(Token {
                kind: TokenKind::Ident(src[start..i].to_string()),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            col += (i - start) as u32;
            let text = &src[start..i];
            let value = text.parse::<u64>().map_err(|_| SyntaxError {
                pos,
                message: format!("invalid integer literal `{text}`"),
                expected: Vec::new(),
            })?;
            tokens.push(Token {
                kind: TokenKind::Int(value),
                pos,
            });
            continue;
        }
        let rest = &src[i..];
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len() as u32;
                tokens.push(Token {
                    kind: TokenKind::Sym(sym),
                    pos,
                });
            }
            None => {
                let ch = rest.chars().next().unwrap_or('?');
                return Err(SyntaxError {
                    pos,
                    message: format!("unexpected character `{ch}`"),
                    expected: Vec::new(),
                });
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        pos: Pos { line, col },
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn maximal_munch_on_operators() {
        assert_eq!(
            kinds("a=>b==c=d"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Sym("=>"),
                TokenKind::Ident("b".into()),
                TokenKind::Sym("=="),
                TokenKind::Ident("c".into()),
                TokenKind::Sym("="),
                TokenKind::Ident("d".into()),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn comments_are_skipped_and_lines_counted() {
        let toks = tokenize("// header\n  x // trailing\ny").unwrap();
        assert_eq!(toks[0].pos, Pos { line: 2, col: 3 });
        assert_eq!(toks[1].pos, Pos { line: 3, col: 1 });
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("x @ y").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 3 });
    }

    #[test]
    fn rejects_malformed_numbers() {
        assert!(tokenize("12ab").is_err());
        assert!(tokenize("99999999999999999999999").is_err());
    }
}
