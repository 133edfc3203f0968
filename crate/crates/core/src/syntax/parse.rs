use thiserror::Error;

use super::{Formula, Program};

/// Parse failure; `column` is the 1-based character position.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    LParen,
    RParen,
    Semi,
    Amp,
    Plus,
    Star,
    Pipe,
    Arrow,
    DArrow,
    LAngle,
    RAngle,
    LBracket,
    RBracket,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(n) => format!("identifier `{n}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Star => "`*`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DArrow => "`<->`".into(),
            Tok::LAngle => "`<`".into(),
            Tok::RAngle => "`>`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            };
            out.push((tok, col));
            continue;
        }
        let rest = |s: &str| chars[i..].iter().take(s.chars().count()).copied().eq(s.chars());
        let (tok, len) = if rest("<->") {
            (Tok::DArrow, 3)
        } else if rest("->") {
            (Tok::Arrow, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ';' => Tok::Semi,
                '&' | '∩' | '∧' => Tok::Amp,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                '|' | '∨' => Tok::Pipe,
                '→' => Tok::Arrow,
                '↔' => Tok::DArrow,
                '<' | '⟨' => Tok::LAngle,
                '>' | '⟩' => Tok::RAngle,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '⊤' => Tok::True,
                '⊥' => Tok::False,
                _ => {
                    return Err(ParseError {
                        column: col,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            (t, 1)
        };
        out.push((tok, col));
        i += len;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            column: self.column(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn expect(&mut self, t: Tok, expected: &str) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(ParseError {
                column: self.column(),
                message: format!("unexpected {}", self.peek().describe()),
            })
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut lhs = self.program_par()?;
        while self.eat(&Tok::Plus) {
            lhs = Program::choice(lhs, self.program_par()?);
        }
        Ok(lhs)
    }

    fn program_par(&mut self) -> Result<Program, ParseError> {
        let mut lhs = self.program_seq()?;
        while self.eat(&Tok::Amp) {
            lhs = Program::par(lhs, self.program_seq()?);
        }
        Ok(lhs)
    }

    fn program_seq(&mut self) -> Result<Program, ParseError> {
        let mut lhs = self.program_postfix()?;
        while self.eat(&Tok::Semi) {
            lhs = Program::seq(lhs, self.program_postfix()?);
        }
        Ok(lhs)
    }

    fn program_postfix(&mut self) -> Result<Program, ParseError> {
        let mut p = match self.peek().clone() {
            Tok::Ident(n) => {
                self.bump();
                Program::Atomic(n)
            }
            Tok::LParen => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::RParen, "`)`")?;
                p
            }
            _ => return Err(self.error("a program")),
        };
        while self.eat(&Tok::Star) {
            p = Program::star(p);
        }
        Ok(p)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.formula_imp()?;
        while self.eat(&Tok::DArrow) {
            lhs = Formula::iff(lhs, self.formula_imp()?);
        }
        Ok(lhs)
    }

    fn formula_imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.formula_or()?;
        if self.eat(&Tok::Arrow) {
            Ok(Formula::implies(lhs, self.formula_imp()?))
        } else {
            Ok(lhs)
        }
    }

    fn formula_or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.formula_and()?;
        while self.eat(&Tok::Pipe) {
            lhs = Formula::or(lhs, self.formula_and()?);
        }
        Ok(lhs)
    }

    fn formula_and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.formula_unary()?;
        while self.eat(&Tok::Amp) {
            lhs = Formula::and(lhs, self.formula_unary()?);
        }
        Ok(lhs)
    }

    fn formula_unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LAngle => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::RAngle, "`>`")?;
                Ok(Formula::diamond(p, self.formula_unary()?))
            }
            Tok::LBracket => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Formula::boxed(p, self.formula_unary()?))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::Bot)
            }
            Tok::Ident(n) => {
                self.bump();
                Ok(Formula::Prop(n))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => Err(self.error("a formula")),
        }
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let prog = p.program()?;
    p.finish()?;
    Ok(prog)
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Program {
        Program::atomic(n)
    }

    fn p(n: &str) -> Formula {
        Formula::prop(n)
    }

    #[test]
    fn program_precedence() {
        assert_eq!(
            parse_program("a ; b + c").unwrap(),
            Program::choice(Program::seq(a("a"), a("b")), a("c"))
        );
        assert_eq!(
            parse_program("(a + b)*").unwrap(),
            Program::star(Program::choice(a("a"), a("b")))
        );
        assert_eq!(
            parse_program("a & b ; c").unwrap(),
            Program::par(a("a"), Program::seq(a("b"), a("c")))
        );
        assert_eq!(
            parse_program("a ; b ; c").unwrap(),
            Program::seq(Program::seq(a("a"), a("b")), a("c"))
        );
        assert_eq!(parse_program("a**").unwrap(), Program::star(Program::star(a("a"))));
    }

    #[test]
    fn formula_precedence() {
        assert_eq!(
            parse_formula("<a>p & <b>p").unwrap(),
            Formula::and(Formula::diamond(a("a"), p("p")), Formula::diamond(a("b"), p("p")))
        );
        assert_eq!(
            parse_formula("p -> q -> r").unwrap(),
            Formula::implies(p("p"), Formula::implies(p("q"), p("r")))
        );
        assert_eq!(
            parse_formula("[a + b]p <-> [a]p & [b]p").unwrap(),
            Formula::iff(
                Formula::boxed(Program::choice(a("a"), a("b")), p("p")),
                Formula::and(Formula::boxed(a("a"), p("p")), Formula::boxed(a("b"), p("p")))
            )
        );
        assert_eq!(
            parse_formula("p | q & r -> s").unwrap(),
            Formula::implies(Formula::or(p("p"), Formula::and(p("q"), p("r"))), p("s"))
        );
        assert_eq!(
            parse_formula("<a><b>p").unwrap(),
            Formula::diamond(a("a"), Formula::diamond(a("b"), p("p")))
        );
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(
            parse_formula("⟨a ∩ b⟩p ↔ ⟨a⟩p ∧ ⟨b⟩p").unwrap(),
            parse_formula("<a & b>p <-> <a>p & <b>p").unwrap()
        );
        assert_eq!(parse_formula("⊤ ∨ ⊥ → p").unwrap(), parse_formula("true | false -> p").unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_formula("<a>p &").unwrap_err();
        assert_eq!(e.column, 7);
        let e = parse_program("(a ; b").unwrap_err();
        assert_eq!(e.column, 7);
        assert!(e.message.contains("`)`"));
        let e = parse_formula("p $ q").unwrap_err();
        assert_eq!(e.column, 3);
        let e = parse_program("a +").unwrap_err();
        assert_eq!(e.column, 4);
        let e = parse_formula("p q").unwrap_err();
        assert_eq!(e.column, 3);
        let e = parse_formula("<a p").unwrap_err();
        assert_eq!(e.column, 4);
        assert!(parse_formula("").is_err());
        assert!(parse_program("true").is_err());
    }
}
