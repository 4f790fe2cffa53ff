use crate::error::{ParseError, Span};
use crate::rat::{parse_rat, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Identifier or number: `[A-Za-z0-9_]+`, or digits with a decimal part.
    Word(String),
    /// `p<>` with `p` a rational literal written without spaces.
    Choice(Rat),
    Semi,
    Comma,
    Colon,
    Assign,
    Slash,
    Minus,
    Equals,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Choice(p) => format!("`{p}<>`"),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Equals => "`=`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn is_word(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Length in chars of a `p<>` literal starting at `chars[i]`, if any.
fn choice_literal(chars: &[char], i: usize) -> Option<(usize, String)> {
    let mut j = i;
    let digits = |j: &mut usize| {
        let start = *j;
        while *j < chars.len() && chars[*j].is_ascii_digit() {
            *j += 1;
        }
        *j > start
    };
    if !digits(&mut j) {
        return None;
    }
    if j < chars.len() && (chars[j] == '.' || chars[j] == '/') {
        let save = j;
        j += 1;
        if !digits(&mut j) {
            j = save;
        }
    }
    if j + 1 < chars.len() && chars[j] == '<' && chars[j + 1] == '>' {
        Some((j + 2 - i, chars[i..j].iter().collect()))
    } else {
        None
    }
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
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
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if let Some((len, text)) = choice_literal(&chars, i) {
            let p = parse_rat(&text).ok_or_else(|| ParseError {
                span,
                message: format!("bad probability `{text}`"),
                expected: vec![],
            })?;
            out.push(Token {
                tok: Tok::Choice(p),
                span,
            });
            i += len;
            col += len;
            continue;
        }
        if is_word(c) {
            let start = i;
            while i < chars.len() && is_word(chars[i]) {
                i += 1;
            }
            // decimal part of a number
            let numeric = chars[start..i].iter().all(char::is_ascii_digit);
            if numeric && i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Word(text),
                span,
            });
            continue;
        }
        let (tok, len) = match c {
            ';' => (Tok::Semi, 1),
            ',' => (Tok::Comma, 1),
            ':' if chars.get(i + 1) == Some(&'=') => (Tok::Assign, 2),
            ':' => (Tok::Colon, 1),
            '/' => (Tok::Slash, 1),
            '-' => (Tok::Minus, 1),
            '=' => (Tok::Equals, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            other => {
                return Err(ParseError {
                    span,
                    message: format!("unexpected character `{other}`"),
                    expected: vec![],
                })
            }
        };
        out.push(Token { tok, span });
        i += len;
        col += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn choice_operator_is_one_token() {
        assert_eq!(
            toks("xs[0] 1/2<> xs[1]"),
            vec![
                Tok::Word("xs".into()),
                Tok::LBracket,
                Tok::Word("0".into()),
                Tok::RBracket,
                Tok::Choice(rat(1, 2)),
                Tok::Word("xs".into()),
                Tok::LBracket,
                Tok::Word("1".into()),
                Tok::RBracket,
                Tok::Eof,
            ]
        );
        assert_eq!(toks("0.25<>")[0], Tok::Choice(rat(1, 4)));
        assert_eq!(toks("1<>")[0], Tok::Choice(rat(1, 1)));
    }

    #[test]
    fn fractions_outside_choices_are_split() {
        assert_eq!(
            toks("1/2 0.5"),
            vec![
                Tok::Word("1".into()),
                Tok::Slash,
                Tok::Word("2".into()),
                Tok::Word("0.5".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = lex("// header\n  reveal oneBit; # trailing\n:=").unwrap();
        assert_eq!(t[0].span.line, 2);
        assert_eq!(t[0].span.col, 3);
        assert_eq!(t[3].tok, Tok::Assign);
        assert_eq!(t[3].span.line, 3);
    }

    #[test]
    fn bad_characters_are_errors() {
        let e = lex("reveal @").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (1, 8));
    }
}
