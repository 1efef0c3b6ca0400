use super::SpecError;

const MAX_DEPTH: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum Sexpr {
    Atom {
        text: String,
        line: usize,
        col: usize,
    },
    List {
        items: Vec<Sexpr>,
        line: usize,
        col: usize,
    },
}

impl Sexpr {
    pub(super) fn pos(&self) -> (usize, usize) {
        match self {
            Sexpr::Atom { line, col, .. } | Sexpr::List { line, col, .. } => (*line, *col),
        }
    }

    pub(super) fn error(&self, message: impl Into<String>) -> SpecError {
        let (line, col) = self.pos();
        SpecError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    pub(super) fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom { text, .. } => Some(text),
            Sexpr::List { .. } => None,
        }
    }

    /// The items of a list whose head is an atom: `(head rest...)`.
    pub(super) fn form(&self) -> Option<(&str, &[Sexpr])> {
        match self {
            Sexpr::List { items, .. } => match items.split_first() {
                Some((h, rest)) => h.atom().map(|h| (h, rest)),
                None => None,
            },
            Sexpr::Atom { .. } => None,
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn error(&self, message: impl Into<String>) -> SpecError {
        SpecError::Syntax {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    /// Reads one expression; `None` at end of input.
    fn read(&mut self, depth: usize) -> Result<Option<Sexpr>, SpecError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        match self.chars.peek() {
            None => Ok(None),
            Some(')') => Err(self.error("unexpected `)`")),
            Some('(') => {
                if depth >= MAX_DEPTH {
                    return Err(self.error("expression nested too deeply"));
                }
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(SpecError::Syntax {
                                line,
                                col,
                                message: "unclosed `(`".into(),
                            })
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexpr::List { items, line, col }));
                        }
                        Some(_) => items.extend(self.read(depth + 1)?),
                    }
                }
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Some(Sexpr::Atom { text, line, col }))
            }
        }
    }
}

pub(super) fn read_all(text: &str) -> Result<Vec<Sexpr>, SpecError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(e) = r.read(0)? {
        out.push(e);
    }
    Ok(out)
}
