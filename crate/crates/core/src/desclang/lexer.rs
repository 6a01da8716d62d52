use std::fmt;

use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase-initial identifier: type, feature, relation or keyword.
    Atom(String),
    /// Uppercase- or underscore-initial identifier.
    Var(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    Arrow,
    Eq,
    NotEq,
    Hash(u32),
    Wedge,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Atom(s) | Tok::Var(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Arrow => f.write_str("`==>`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::NotEq => f.write_str("`=\\=`"),
            Tok::Hash(n) => write!(f, "`#{n}`"),
            Tok::Wedge => f.write_str("`/\\`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

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
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let rest = &chars[i..];
        let starts = |s: &str| s.chars().zip(rest.iter()).all(|(a, b)| a == *b) && rest.len() >= s.len();
        let (tok, width) = if starts("==>") {
            (Tok::Arrow, 3)
        } else if starts("=\\=") {
            (Tok::NotEq, 3)
        } else if starts("/\\") {
            (Tok::Wedge, 2)
        } else {
            match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '[' => (Tok::LBracket, 1),
                ']' => (Tok::RBracket, 1),
                ',' => (Tok::Comma, 1),
                ';' => (Tok::Semi, 1),
                ':' => (Tok::Colon, 1),
                '.' => (Tok::Dot, 1),
                '=' => (Tok::Eq, 1),
                '#' => {
                    let mut j = i + 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == i + 1 {
                        return Err(ParseError::new(pos, "expected digits after `#`"));
                    }
                    let n: String = chars[i + 1..j].iter().collect();
                    let n = n
                        .parse()
                        .map_err(|_| ParseError::new(pos, "tag number out of range"))?;
                    (Tok::Hash(n), j - i)
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut j = i;
                    while j < chars.len() && is_ident_char(chars[j]) {
                        j += 1;
                    }
                    let word: String = chars[i..j].iter().collect();
                    let tok = if c.is_ascii_uppercase() || c == '_' {
                        Tok::Var(word)
                    } else {
                        Tok::Atom(word)
                    };
                    (tok, j - i)
                }
                c if c.is_ascii_digit() => {
                    // numerals are usable as type names (e.g. person values)
                    let mut j = i;
                    while j < chars.len() && is_ident_char(chars[j]) {
                        j += 1;
                    }
                    (Tok::Atom(chars[i..j].iter().collect()), j - i)
                }
                other => {
                    return Err(ParseError::new(pos, format!("unexpected character `{other}`")));
                }
            }
        };
        out.push(Spanned { tok, pos });
        i += width;
        col += width;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}
