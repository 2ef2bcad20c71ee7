//! Model-file reader: a small hand-written lexer and a recursive-descent
//! parser for the `species` / `init` surface syntax.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::domain::{AbstractState, Interval, Upper};
use crate::model::{
    check_initial, validate_well_labeled, ActionKind, BasicAction, Diagnostic, Environment,
    InitialDecl, Label, Model, ModelError, Name, Prefix, Span, SpeciesDef,
};
use crate::multiset::Multiset;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    /// Digits with a fractional part, kept verbatim.
    Decimal(String),
    Sym(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(s) | Tok::Decimal(s) => format!("number `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn syntax(span: Span, message: impl Into<String>) -> Diagnostic {
    Diagnostic::Syntax {
        span,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
        } else if c.is_whitespace() {
            bump(&mut chars);
        } else if c.is_ascii_alphabetic() {
            let mut s = String::new();
            while chars
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
            {
                s.push(bump(&mut chars));
            }
            out.push((Tok::Ident(s), span));
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push(bump(&mut chars));
            }
            // a '.' only continues the number when a digit follows it
            let mut ahead = chars.clone();
            ahead.next();
            if chars.peek() == Some(&'.') && ahead.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push(bump(&mut chars));
                while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                    s.push(bump(&mut chars));
                }
                out.push((Tok::Decimal(s), span));
            } else {
                out.push((Tok::Int(s), span));
            }
        } else if "=+.()@?!|:,[]/".contains(c) {
            bump(&mut chars);
            out.push((Tok::Sym(c), span));
        } else {
            return Err(syntax(span, format!("unexpected character `{c}`")));
        }
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        Err(syntax(
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.unexpected(&format!("`{c}`"))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.span();
                self.next();
                Ok((s, span))
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn name(&mut self) -> PResult<(Name, Span)> {
        let (s, span) = self.ident()?;
        let name = Name::new(&s).map_err(|e| syntax(span, e.to_string()))?;
        Ok((name, span))
    }

    fn int(&mut self) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Int(s) => {
                let span = self.span();
                self.next();
                s.parse()
                    .map_err(|_| syntax(span, format!("integer `{s}` is too large")))
            }
            _ => self.unexpected("an integer"),
        }
    }

    fn rate(&mut self) -> PResult<BigRational> {
        let span = self.span();
        match self.next().0 {
            Tok::Int(n) => {
                let num: BigInt = n.parse().expect("lexer yields digits");
                if self.eat_sym('/') {
                    match self.next().0 {
                        Tok::Int(d) => {
                            let den: BigInt = d.parse().expect("lexer yields digits");
                            if den.is_zero() {
                                return Err(syntax(span, "zero denominator in rate"));
                            }
                            Ok(BigRational::new(num, den))
                        }
                        t => Err(syntax(
                            span,
                            format!("expected a denominator, found {}", t.describe()),
                        )),
                    }
                } else {
                    Ok(BigRational::from_integer(num))
                }
            }
            Tok::Decimal(s) => {
                let (int_part, frac) = s.split_once('.').expect("decimal has a point");
                let digits: BigInt = format!("{int_part}{frac}")
                    .parse()
                    .expect("lexer yields digits");
                let scale = num_traits::pow(BigInt::from(10), frac.len());
                Ok(BigRational::new(digits, scale))
            }
            t => Err(syntax(
                span,
                format!("expected a rate, found {}", t.describe()),
            )),
        }
    }

    fn product(&mut self) -> PResult<Multiset> {
        if let Tok::Int(s) = self.peek() {
            if s == "0" {
                self.next();
                return Ok(Multiset::new());
            }
            return self.unexpected("`0` or a species name");
        }
        let mut m = Multiset::new();
        loop {
            let (name, _) = self.name()?;
            m.add(&name, 1);
            if !self.eat_sym('|') {
                return Ok(m);
            }
        }
    }

    fn prefix(&mut self, species: &Name, index: usize) -> PResult<Prefix> {
        let span = self.span();
        let kind = if self.eat_sym('?') {
            ActionKind::Input(self.name()?.0)
        } else if self.eat_sym('!') {
            ActionKind::Output(self.name()?.0)
        } else {
            match self.peek() {
                Tok::Ident(s) if s == "tau" => {
                    self.next();
                    ActionKind::Delay
                }
                _ => return self.unexpected("`tau`, `?` or `!`"),
            }
        };
        self.expect_sym('(')?;
        let rate = self.rate()?;
        self.expect_sym(')')?;
        let label = if self.eat_sym('@') {
            Label::new(self.ident()?.0)
        } else {
            Label::auto(species, index)
        };
        self.expect_sym('.')?;
        let product = self.product()?;
        Ok(Prefix {
            action: BasicAction { kind, rate, label },
            product,
            span: Some(span),
        })
    }

    fn species(&mut self, span: Span) -> PResult<SpeciesDef> {
        let (name, _) = self.name()?;
        self.expect_sym('=')?;
        let mut summands = Vec::new();
        if *self.peek() == Tok::Int("0".into()) {
            self.next();
        } else {
            loop {
                summands.push(self.prefix(&name, summands.len())?);
                if !self.eat_sym('+') {
                    break;
                }
            }
        }
        Ok(SpeciesDef {
            name,
            summands,
            span: Some(span),
        })
    }

    fn count(&mut self) -> PResult<Interval> {
        if !self.eat_sym('[') {
            return Ok(Interval::exact(self.int()?));
        }
        let span = self.span();
        let lo = self.int()?;
        self.expect_sym(',')?;
        let hi = match self.peek() {
            Tok::Ident(s) if s == "inf" => {
                self.next();
                Upper::Infinity
            }
            _ => Upper::Finite(self.int()?),
        };
        self.expect_sym(']')?;
        Interval::new(lo, hi).map_err(|e| syntax(span, e.to_string()))
    }

    fn init(&mut self) -> PResult<InitialDecl> {
        let mut state = AbstractState::new();
        let mut all_exact = true;
        let mut seen = Vec::new();
        loop {
            let (name, span) = self.name()?;
            if seen.contains(&name) {
                return Err(syntax(
                    span,
                    format!("species `{name}` listed twice in `init`"),
                ));
            }
            self.expect_sym(':')?;
            let bracketed = *self.peek() == Tok::Sym('[');
            let count = self.count()?;
            all_exact &= !bracketed;
            state.set(name.clone(), count);
            seen.push(name);
            if !self.eat_sym(',') {
                break;
            }
        }
        Ok(if all_exact {
            InitialDecl::Concrete(state.as_exact().expect("integer counts are exact"))
        } else {
            InitialDecl::Abstract(state)
        })
    }
}

/// Parses and validates a model. Syntax errors stop at the first problem;
/// validation reports every problem found.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let fail = |d: Diagnostic| ModelError {
        diagnostics: vec![d],
    };
    let toks = lex(text).map_err(fail)?;
    let mut p = Parser { toks, pos: 0 };
    let mut defs = Vec::new();
    let mut init: Option<(InitialDecl, Span)> = None;
    let mut diagnostics = Vec::new();
    loop {
        let span = p.span();
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "species" => {
                p.next();
                defs.push(p.species(span).map_err(fail)?);
            }
            Tok::Ident(kw) if kw == "init" => {
                p.next();
                let decl = p.init().map_err(fail)?;
                if init.is_some() {
                    diagnostics.push(Diagnostic::DuplicateInit { span });
                } else {
                    init = Some((decl, span));
                }
            }
            _ => return Err(fail(p.unexpected::<()>("`species` or `init`").unwrap_err())),
        }
    }
    let env = Environment::new(defs);
    if let Err(ds) = validate_well_labeled(&env) {
        diagnostics.extend(ds);
    }
    match &init {
        None => diagnostics.push(Diagnostic::MissingInit),
        Some((decl, span)) => {
            if let Err(ds) = check_initial(&env, decl, Some(*span)) {
                diagnostics.extend(ds);
            }
        }
    }
    if !diagnostics.is_empty() {
        return Err(ModelError { diagnostics });
    }
    Ok(Model {
        env,
        init: init.expect("checked above").0,
    })
}

/// Exact rational from a rate literal (`2`, `1.5` or `3/2`).
pub fn parse_rate(text: &str) -> Result<BigRational, ModelError> {
    let fail = |d: Diagnostic| ModelError {
        diagnostics: vec![d],
    };
    let toks = lex(text).map_err(fail)?;
    let mut p = Parser { toks, pos: 0 };
    let r = p.rate().map_err(fail)?;
    if *p.peek() != Tok::Eof {
        return Err(fail(p.unexpected::<()>("end of input").unwrap_err()));
    }
    Ok(r)
}
