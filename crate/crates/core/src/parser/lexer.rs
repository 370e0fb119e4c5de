use crate::diag::Diagnostic;
use crate::model::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Magnitude of an integer literal; the sign is a separate token.
    Int(u64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Assign,
    FatArrow,
    Arrow,
    Absent,
    Comma,
    Semi,
    Dot,
    Star,
    Slash,
    Plus,
    Minus,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Eof => "end of file".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Assign => "=",
            Tok::FatArrow => "=>",
            Tok::Arrow => "->",
            Tok::Absent => "--",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Ident(_) | Tok::Int(_) | Tok::Str(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
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

    fn span(&self) -> Span {
        Span::new(self.line, self.column)
    }
}

/// Splits `text` into tokens.  Lexical errors (P001) are reported and the
/// offending characters skipped, so lexing always reaches end of file.
pub fn lex(text: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor { chars: text.chars().peekable(), line: 1, column: 1 };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    while let Some(c) = cur.peek() {
        let span = cur.span();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '/' && cur.peek2() == Some('*') {
            cur.bump();
            cur.bump();
            let mut closed = false;
            while let Some(c) = cur.bump() {
                if c == '*' && cur.peek() == Some('/') {
                    cur.bump();
                    closed = true;
                    break;
                }
            }
            if !closed {
                diags.push(Diagnostic::error("P001", "unterminated block comment", file, span));
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            tokens.push(Token { tok: Tok::Ident(s), span });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            match s.parse::<u64>() {
                Ok(v) => tokens.push(Token { tok: Tok::Int(v), span }),
                Err(_) => diags.push(Diagnostic::error("P001", format!("integer literal `{s}` is too large"), file, span)),
            }
            continue;
        }
        if c == '"' {
            cur.bump();
            match lex_string(&mut cur) {
                Ok(s) => tokens.push(Token { tok: Tok::Str(s), span }),
                Err(msg) => diags.push(Diagnostic::error("P001", msg, file, span)),
            }
            continue;
        }
        cur.bump();
        let next = cur.peek();
        let two = |cur: &mut Cursor<'_>, tok: Tok| {
            cur.bump();
            tok
        };
        let tok = match (c, next) {
            ('-', Some('>')) => two(&mut cur, Tok::Arrow),
            ('-', Some('-')) => two(&mut cur, Tok::Absent),
            ('=', Some('=')) => two(&mut cur, Tok::EqEq),
            ('=', Some('>')) => two(&mut cur, Tok::FatArrow),
            ('!', Some('=')) => two(&mut cur, Tok::Ne),
            ('<', Some('=')) => two(&mut cur, Tok::Le),
            ('>', Some('=')) => two(&mut cur, Tok::Ge),
            ('-', _) => Tok::Minus,
            ('=', _) => Tok::Assign,
            ('<', _) => Tok::Lt,
            ('>', _) => Tok::Gt,
            ('{', _) => Tok::LBrace,
            ('}', _) => Tok::RBrace,
            ('(', _) => Tok::LParen,
            (')', _) => Tok::RParen,
            ('[', _) => Tok::LBracket,
            (']', _) => Tok::RBracket,
            (',', _) => Tok::Comma,
            (';', _) => Tok::Semi,
            ('.', _) => Tok::Dot,
            ('*', _) => Tok::Star,
            ('/', _) => Tok::Slash,
            ('+', _) => Tok::Plus,
            _ => {
                diags.push(Diagnostic::error("P001", format!("unexpected character {c:?}"), file, span));
                continue;
            }
        };
        tokens.push(Token { tok, span });
    }
    tokens.push(Token { tok: Tok::Eof, span: cur.span() });
    (tokens, diags)
}

fn lex_string(cur: &mut Cursor<'_>) -> Result<String, String> {
    let mut s = String::new();
    loop {
        match cur.bump() {
            None | Some('\n') => return Err("unterminated string literal".to_string()),
            Some('"') => return Ok(s),
            Some('\\') => match cur.bump() {
                Some('"') => s.push('"'),
                Some('\\') => s.push('\\'),
                Some('n') => s.push('\n'),
                Some('t') => s.push('\t'),
                Some(other) => return Err(format!("unknown escape `\\{other}` in string literal")),
                None => return Err("unterminated string literal".to_string()),
            },
            Some(c) => s.push(c),
        }
    }
}
