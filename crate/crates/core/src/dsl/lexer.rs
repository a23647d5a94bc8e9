use super::ParseDiagnostic;
use crate::diagnostic::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Int(u64),
    LBrace,
    RBrace,
    At,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Int(n) => format!("number {n}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::At => "`@`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: (usize, usize),
    /// Position of the last character of the token.
    pub end: (usize, usize),
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let mut tokens = Vec::new();
    let mut chars = source.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let mut last = (1usize, 1usize);

    let error = |start: (usize, usize), end: (usize, usize), msg: String| {
        ParseDiagnostic::error(SourceSpan::new(file, start, end), msg)
    };

    while let Some(&c) = chars.peek() {
        let start = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '{' | '}' | '@' => {
                chars.next();
                col += 1;
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    _ => Tok::At,
                };
                tokens.push(Token { tok, start, end: start });
            }
            '"' => {
                chars.next();
                col += 1;
                let mut text = String::new();
                loop {
                    match chars.next() {
                        None | Some('\n') | Some('\r') => {
                            let end = (line, (col - 1).max(start.1));
                            return Err(error(start, end, "unterminated string".into()));
                        }
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\\') if chars.peek() == Some(&'"') => {
                            chars.next();
                            col += 2;
                            text.push('"');
                        }
                        Some(c) => {
                            col += 1;
                            text.push(c);
                        }
                    }
                }
                tokens.push(Token {
                    tok: Tok::Str(text),
                    start,
                    end: (line, col - 1),
                });
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    digits.push(d);
                    chars.next();
                    col += 1;
                }
                let end = (line, col - 1);
                let n = digits
                    .parse::<u64>()
                    .map_err(|_| error(start, end, format!("number `{digits}` is too large")))?;
                tokens.push(Token {
                    tok: Tok::Int(n),
                    start,
                    end,
                });
            }
            c if is_ident_start(c) => {
                let mut ident = String::new();
                while let Some(&d) = chars.peek() {
                    if !is_ident_continue(d) {
                        break;
                    }
                    ident.push(d);
                    chars.next();
                    col += 1;
                }
                tokens.push(Token {
                    tok: Tok::Ident(ident),
                    start,
                    end: (line, col - 1),
                });
            }
            other => {
                return Err(error(start, start, format!("unexpected character `{other}`")));
            }
        }
        if let Some(t) = tokens.last() {
            last = t.end;
        }
    }
    let eof = if tokens.is_empty() { (line, col) } else { last };
    tokens.push(Token {
        tok: Tok::Eof,
        start: eof,
        end: eof,
    });
    Ok(tokens)
}
