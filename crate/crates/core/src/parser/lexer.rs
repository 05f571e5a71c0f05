use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Bar,
    Eq,
    Caret,
    Plus,
    Minus,
    Star,
    Amp,
    Dot,
    FatArrow,
    LArrow,
    Arrow,
    Ge,
    Le,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Bar => "|",
            Tok::Eq => "=",
            Tok::Caret => "^",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Amp => "&",
            Tok::Dot => ".",
            Tok::FatArrow => "=>",
            Tok::LArrow => "<-",
            Tok::Arrow => "->",
            Tok::Ge => ">=",
            Tok::Le => "<=",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| ParseError::syntax(pos, format!("number `{s}` is too large")))?;
            col += i - start;
            out.push((Tok::Num(n), pos));
            continue;
        }
        let (tok, len) = match (c, next) {
            ('=', Some('>')) => (Tok::FatArrow, 2),
            ('<', Some('-')) => (Tok::LArrow, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            ('|', _) => (Tok::Bar, 1),
            ('=', _) => (Tok::Eq, 1),
            ('^', _) => (Tok::Caret, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('&', _) => (Tok::Amp, 1),
            ('.', _) => (Tok::Dot, 1),
            _ => return Err(ParseError::syntax(pos, format!("unexpected character `{c}`"))),
        };
        i += len;
        col += len;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_track_lines_and_columns() {
        let toks = lex("type a =\n  1^0 # note\n").unwrap();
        assert_eq!(toks[0], (Tok::Ident("type".into()), Pos { line: 1, col: 1 }));
        assert_eq!(toks[3], (Tok::Num(1), Pos { line: 2, col: 3 }));
        assert_eq!(toks.last().unwrap().0, Tok::Eof);
    }

    #[test]
    fn lolli_is_minus_then_o() {
        let toks: Vec<Tok> = lex("A -o^2 B").unwrap().into_iter().map(|t| t.0).collect();
        assert_eq!(toks[1], Tok::Minus);
        assert_eq!(toks[2], Tok::Ident("o".into()));
        assert_eq!(toks[3], Tok::Caret);
    }

    #[test]
    fn stray_character_is_positioned() {
        let err = lex("type a = @").unwrap_err();
        assert_eq!(err.position(), Some((1, 10)));
    }
}
