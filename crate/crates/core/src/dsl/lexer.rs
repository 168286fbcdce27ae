use super::{Diagnostic, Position};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Dec(f64),
    Colon,
    Comma,
    Semi,
    Eq,
    LBrace,
    RBrace,
    LParen,
    RParen,
    /// `-[`
    EdgeOpen,
    /// `]->`
    EdgeClose,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Int(v) => format!("number {v}"),
            Tok::Dec(v) => format!("number {v:?}"),
            Tok::Colon => "':'".into(),
            Tok::Comma => "','".into(),
            Tok::Semi => "';'".into(),
            Tok::Eq => "'='".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::EdgeOpen => "'-['".into(),
            Tok::EdgeClose => "']->'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Position,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }
}

fn syntax(pos: Position, expected: &[&str], found: impl Into<String>) -> Diagnostic {
    Diagnostic::syntax(
        pos,
        expected.iter().map(|s| s.to_string()).collect(),
        found.into(),
    )
}

/// Splits the input into tokens. Lexical errors are reported and skipped so
/// the parser still sees the rest of the file.
pub(crate) fn tokenize(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        let tok = match c {
            c if c.is_whitespace() => {
                cur.bump();
                continue;
            }
            '#' => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
                continue;
            }
            ':' | ',' | ';' | '=' | '{' | '}' | '(' | ')' => {
                cur.bump();
                match c {
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Eq,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                }
            }
            ']' => {
                cur.bump();
                if cur.eat('-') && cur.eat('>') {
                    Tok::EdgeClose
                } else {
                    errors.push(syntax(pos, &["']->'"], "']'"));
                    continue;
                }
            }
            '-' => {
                cur.bump();
                if cur.eat('[') {
                    Tok::EdgeOpen
                } else if cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    match number(&mut cur, true) {
                        Ok(tok) => tok,
                        Err(found) => {
                            errors.push(syntax(pos, &["number"], found));
                            continue;
                        }
                    }
                } else {
                    errors.push(syntax(pos, &["'-['", "number"], "'-'"));
                    continue;
                }
            }
            '"' => {
                cur.bump();
                match string(&mut cur) {
                    Ok(s) => Tok::Str(s),
                    Err((at, expected, found)) => {
                        errors.push(syntax(at, &[expected], found));
                        continue;
                    }
                }
            }
            c if c.is_ascii_digit() => match number(&mut cur, false) {
                Ok(tok) => tok,
                Err(found) => {
                    errors.push(syntax(pos, &["number"], found));
                    continue;
                }
            },
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                    ident.push(c);
                    cur.bump();
                }
                Tok::Ident(ident)
            }
            other => {
                cur.bump();
                errors.push(syntax(pos, &["declaration"], format!("character {other:?}")));
                continue;
            }
        };
        tokens.push(Token { tok, pos });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        pos: cur.pos(),
    });
    (tokens, errors)
}

type StringError = (Position, &'static str, String);

fn string(cur: &mut Cursor<'_>) -> Result<String, StringError> {
    let mut out = String::new();
    loop {
        let pos = cur.pos();
        match cur.bump() {
            None => return Err((pos, "closing '\"'", "end of input".into())),
            Some('\n') => return Err((pos, "closing '\"'", "end of line".into())),
            Some('"') => return Ok(out),
            Some('\\') => match cur.bump() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => {
                    // skip the rest of the literal so it is not re-lexed as code
                    while cur.peek().is_some_and(|c| c != '"' && c != '\n') {
                        cur.bump();
                    }
                    cur.eat('"');
                    return Err((pos, "escape sequence", format!("'\\{other}'")));
                }
                None => return Err((pos, "escape sequence", "end of input".into())),
            },
            Some(c) => out.push(c),
        }
    }
}

fn number(cur: &mut Cursor<'_>, negative: bool) -> Result<Tok, String> {
    let mut text = String::from(if negative { "-" } else { "" });
    let mut decimal = false;
    while let Some(c) = cur.peek() {
        match c {
            '0'..='9' => {}
            '.' if !decimal => decimal = true,
            'e' | 'E' => {
                decimal = true;
                text.push(c);
                cur.bump();
                if let Some(sign @ ('+' | '-')) = cur.peek() {
                    text.push(sign);
                    cur.bump();
                }
                continue;
            }
            _ => break,
        }
        text.push(c);
        cur.bump();
    }
    if cur.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
        while cur.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            text.push(cur.bump().unwrap_or_default());
        }
        return Err(format!("`{text}`"));
    }
    if decimal {
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Tok::Dec)
            .ok_or_else(|| format!("`{text}`"))
    } else {
        text.parse::<i64>().map(Tok::Int).map_err(|_| format!("`{text}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<Tok> {
        let (tokens, errors) = tokenize(text);
        assert!(errors.is_empty(), "{errors:?}");
        tokens.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn edge_arrows_and_numbers() {
        assert_eq!(
            toks("edge a -[HAS_ATTR]-> b -3 2.5 1e3"),
            vec![
                Tok::Ident("edge".into()),
                Tok::Ident("a".into()),
                Tok::EdgeOpen,
                Tok::Ident("HAS_ATTR".into()),
                Tok::EdgeClose,
                Tok::Ident("b".into()),
                Tok::Int(-3),
                Tok::Dec(2.5),
                Tok::Dec(1000.0),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn strings_and_comments() {
        assert_eq!(
            toks("# comment\n\"Peter's \\\"Clinic\\\"\" # trailing"),
            vec![Tok::Str("Peter's \"Clinic\"".into()), Tok::Eof]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let (tokens, _) = tokenize("node\n  x");
        assert_eq!(tokens[1].pos, Position { line: 2, column: 3 });
    }

    #[test]
    fn errors_are_positioned() {
        let (_, errors) = tokenize("node \"open\nnode $");
        assert_eq!(errors.len(), 2);
        assert_eq!(errors[0].position, Position { line: 1, column: 11 });
        assert_eq!(errors[1].position, Position { line: 2, column: 6 });
        let (_, errors) = tokenize("12abc 99999999999999999999");
        assert_eq!(errors.len(), 2);
    }
}
