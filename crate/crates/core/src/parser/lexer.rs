use super::Diagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Dot,
    Caret,
    Dollar,
    Lt,
    Gt,
    Slash,
    /// `--`
    DashDash,
    /// `->`
    Arrow,
    /// `-/`
    NegArrow,
    /// `|-`
    Turnstile,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Dollar => "`$`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Slash => "`/`".into(),
            Tok::DashDash => "`--`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::NegArrow => "`-/`".into(),
            Tok::Turnstile => "`|-`".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLIC: &str = "+*&|!~@%=";

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Tokenize one source line (1-based `line`). Comments start at `#`.
pub(crate) fn lex_line(text: &str, line: usize) -> Result<Vec<Spanned>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let next = chars.get(i + 1).copied();
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line, col });
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        match (c, next) {
            ('-', Some('-')) => {
                push(&mut out, Tok::DashDash);
                i += 2;
            }
            ('-', Some('>')) => {
                push(&mut out, Tok::Arrow);
                i += 2;
            }
            ('-', Some('/')) => {
                push(&mut out, Tok::NegArrow);
                i += 2;
            }
            ('|', Some('-')) => {
                push(&mut out, Tok::Turnstile);
                i += 2;
            }
            _ => {
                let single = match c {
                    '(' => Some(Tok::LParen),
                    ')' => Some(Tok::RParen),
                    '{' => Some(Tok::LBrace),
                    '}' => Some(Tok::RBrace),
                    '[' => Some(Tok::LBracket),
                    ']' => Some(Tok::RBracket),
                    ',' => Some(Tok::Comma),
                    ':' => Some(Tok::Colon),
                    ';' => Some(Tok::Semi),
                    '.' => Some(Tok::Dot),
                    '^' => Some(Tok::Caret),
                    '$' => Some(Tok::Dollar),
                    '<' => Some(Tok::Lt),
                    '>' => Some(Tok::Gt),
                    '/' => Some(Tok::Slash),
                    _ => None,
                };
                if let Some(tok) = single {
                    push(&mut out, tok);
                    i += 1;
                } else if is_word(c) {
                    let start = i;
                    while i < chars.len() && is_word(chars[i]) {
                        i += 1;
                    }
                    push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
                } else if SYMBOLIC.contains(c) {
                    let start = i;
                    while i < chars.len()
                        && SYMBOLIC.contains(chars[i])
                        && !(chars[i] == '|' && chars.get(i + 1) == Some(&'-'))
                    {
                        i += 1;
                    }
                    push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
                } else {
                    return Err(Diagnostic::error(
                        line,
                        col,
                        format!("unexpected character `{c}`"),
                    ));
                }
            }
        }
    }
    Ok(out)
}
