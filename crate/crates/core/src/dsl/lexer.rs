use super::diag::{Diagnostic, DiagnosticKind, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Assign,
    EqEq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Eq,
    DotDot,
    At,
    AndAnd,
    OrOr,
    Bang,
    Newline,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Str(_) => "string".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::Assign => ":=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Eq => "=",
            Tok::DotDot => "..",
            Tok::At => "@",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Tokenize `text`. Newlines inside `{…}` are dropped; `#` starts a
/// comment running to the end of the line. Lexing never fails: bad characters
/// become diagnostics and are skipped.
pub fn lex(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut out = Vec::new();
    let mut diags = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut depth = 0usize;
    let mut last = Pos { line: 1, col: 1 };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        last = pos;
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        if c == '\n' {
            if depth == 0 {
                out.push(Token {
                    tok: Tok::Newline,
                    pos,
                });
            }
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i, &mut col);
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i, &mut col);
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(1, &mut i, &mut col);
            }
            let digits: String = chars[start..i].iter().collect();
            match digits.parse::<i64>() {
                Ok(v) => out.push(Token {
                    tok: Tok::Int(v),
                    pos,
                }),
                Err(_) => {
                    diags.push(Diagnostic::new(
                        DiagnosticKind::Syntax,
                        pos,
                        format!("integer literal {digits} is too large"),
                    ));
                    out.push(Token {
                        tok: Tok::Int(0),
                        pos,
                    });
                }
            }
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            advance(1, &mut i, &mut col);
            let mut closed = false;
            while i < chars.len() && chars[i] != '\n' {
                let ch = chars[i];
                advance(1, &mut i, &mut col);
                match ch {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' if i < chars.len() && matches!(chars[i], '"' | '\\') => {
                        s.push(chars[i]);
                        advance(1, &mut i, &mut col);
                    }
                    _ => s.push(ch),
                }
            }
            if !closed {
                diags.push(Diagnostic::new(
                    DiagnosticKind::Syntax,
                    pos,
                    "unterminated string".into(),
                ));
            }
            out.push(Token {
                tok: Tok::Str(s),
                pos,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            (':', Some('=')) => (Tok::Assign, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('=', _) => (Tok::Eq, 1),
            ('@', _) => (Tok::At, 1),
            ('!', _) => (Tok::Bang, 1),
            _ => {
                diags.push(Diagnostic::new(
                    DiagnosticKind::Syntax,
                    pos,
                    format!("unexpected character {c:?}"),
                ));
                advance(1, &mut i, &mut col);
                continue;
            }
        };
        match tok {
            Tok::LBrace => depth += 1,
            Tok::RBrace => depth = depth.saturating_sub(1),
            _ => {}
        }
        out.push(Token { tok, pos });
        advance(len, &mut i, &mut col);
    }
    // point end-of-input errors at the last character so positions stay inside the text
    out.push(Token {
        tok: Tok::Eof,
        pos: last,
    });
    (out, diags)
}
