//! Recursive descent parser for the skillset specification language.
//!
//! The surface syntax is brace-structured and keyword-dispatched:
//!
//! ```text
//! skillset spot {
//!   resource { power_status { initial PowerOff  PowerOff -> PowerOn } }
//!   event { power_switchon { guard power_status == PowerOff  power_status -> PowerOn } }
//!   skill go_to {
//!     precondition { canmove { guard lease_status == AutoMode and control_mode == Idle } }
//!     start control_mode -> Busy
//!     invariant { is_auto { guard lease_status == AutoMode effect control_mode -> Idle } }
//!     interrupt control_mode -> Idle
//!     success is_arrived control_mode -> Idle
//!     failure not_arrived control_mode -> Idle
//!   }
//! }
//! ```
//!
//! Guards accept `==`, `!=` (sugar for a negated equality), `and`, `or`,
//! `not` and parentheses. `//` comments run to end of line. A named guard
//! block appearing directly in a skill body is treated as a precondition,
//! so both the braced `precondition { ... }` placement and the loose
//! placement are accepted.

use std::fmt;

use thiserror::Error;

use crate::model::{
    Effect, EffectSet, Event, Guard, NamedGuard, Resource, Skill, Skillset, Terminator,
};

/// Syntax error with 1-based source position.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Keyword(Keyword),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Arrow,
    EqEq,
    NotEq,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Keyword {
    Skillset,
    Resource,
    Event,
    Skill,
    Initial,
    Guard,
    Effect,
    Precondition,
    Start,
    Invariant,
    Interrupt,
    Success,
    Failure,
    And,
    Or,
    Not,
}

impl Keyword {
    fn from_str(s: &str) -> Option<Keyword> {
        Some(match s {
            "skillset" => Keyword::Skillset,
            "resource" => Keyword::Resource,
            "event" => Keyword::Event,
            "skill" => Keyword::Skill,
            "initial" => Keyword::Initial,
            "guard" => Keyword::Guard,
            "effect" => Keyword::Effect,
            "precondition" => Keyword::Precondition,
            "start" => Keyword::Start,
            "invariant" => Keyword::Invariant,
            "interrupt" => Keyword::Interrupt,
            "success" => Keyword::Success,
            "failure" => Keyword::Failure,
            "and" => Keyword::And,
            "or" => Keyword::Or,
            "not" => Keyword::Not,
            _ => return None,
        })
    }

    fn as_str(self) -> &'static str {
        match self {
            Keyword::Skillset => "skillset",
            Keyword::Resource => "resource",
            Keyword::Event => "event",
            Keyword::Skill => "skill",
            Keyword::Initial => "initial",
            Keyword::Guard => "guard",
            Keyword::Effect => "effect",
            Keyword::Precondition => "precondition",
            Keyword::Start => "start",
            Keyword::Invariant => "invariant",
            Keyword::Interrupt => "interrupt",
            Keyword::Success => "success",
            Keyword::Failure => "failure",
            Keyword::And => "and",
            Keyword::Or => "or",
            Keyword::Not => "not",
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(name) => write!(f, "identifier '{name}'"),
            Token::Keyword(kw) => write!(f, "'{}'", kw.as_str()),
            Token::LBrace => write!(f, "'{{'"),
            Token::RBrace => write!(f, "'}}'"),
            Token::LParen => write!(f, "'('"),
            Token::RParen => write!(f, "')'"),
            Token::Arrow => write!(f, "'->'"),
            Token::EqEq => write!(f, "'=='"),
            Token::NotEq => write!(f, "'!='"),
            Token::Eof => write!(f, "end of input"),
        }
    }
}

struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn lex(source: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = source.chars().peekable();
    let mut line = 1usize;
    let mut column = 1usize;

    macro_rules! push {
        ($tok:expr, $col:expr) => {
            tokens.push(Spanned {
                token: $tok,
                line,
                column: $col,
            })
        };
    }

    while let Some(&c) = chars.peek() {
        let start_col = column;
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '/' => {
                chars.next();
                column += 1;
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        chars.next();
                        column += 1;
                    }
                } else {
                    return Err(ParseError {
                        line,
                        column: start_col,
                        message: "unexpected character '/', expected '//' comment".into(),
                    });
                }
            }
            '{' => {
                chars.next();
                column += 1;
                push!(Token::LBrace, start_col);
            }
            '}' => {
                chars.next();
                column += 1;
                push!(Token::RBrace, start_col);
            }
            '(' => {
                chars.next();
                column += 1;
                push!(Token::LParen, start_col);
            }
            ')' => {
                chars.next();
                column += 1;
                push!(Token::RParen, start_col);
            }
            '-' => {
                chars.next();
                column += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    column += 1;
                    push!(Token::Arrow, start_col);
                } else {
                    return Err(ParseError {
                        line,
                        column: start_col,
                        message: "unexpected character '-', expected '->'".into(),
                    });
                }
            }
            '=' => {
                chars.next();
                column += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    column += 1;
                    push!(Token::EqEq, start_col);
                } else {
                    return Err(ParseError {
                        line,
                        column: start_col,
                        message: "unexpected character '=', expected '=='".into(),
                    });
                }
            }
            '!' => {
                chars.next();
                column += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    column += 1;
                    push!(Token::NotEq, start_col);
                } else {
                    return Err(ParseError {
                        line,
                        column: start_col,
                        message: "unexpected character '!', expected '!='".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        chars.next();
                        column += 1;
                    } else {
                        break;
                    }
                }
                let token = match Keyword::from_str(&ident) {
                    Some(kw) => Token::Keyword(kw),
                    None => Token::Ident(ident),
                };
                push!(token, start_col);
            }
            other => {
                return Err(ParseError {
                    line,
                    column: start_col,
                    message: format!("unexpected character '{other}'"),
                });
            }
        }
    }
    tokens.push(Spanned {
        token: Token::Eof,
        line,
        column,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Spanned>,
    cursor: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.cursor].token
    }

    fn peek_ahead(&self, n: usize) -> &Token {
        let idx = (self.cursor + n).min(self.tokens.len() - 1);
        &self.tokens[idx].token
    }

    fn advance(&mut self) -> &Token {
        let tok = &self.tokens[self.cursor].token;
        if self.cursor + 1 < self.tokens.len() {
            self.cursor += 1;
        }
        tok
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let spanned = &self.tokens[self.cursor];
        ParseError {
            line: spanned.line,
            column: spanned.column,
            message: message.into(),
        }
    }

    fn expected(&self, what: &str) -> ParseError {
        self.error(format!("expected {what}, found {}", self.peek()))
    }

    fn eat_keyword(&mut self, kw: Keyword) -> bool {
        if *self.peek() == Token::Keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: Keyword) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.expected(&format!("'{}'", kw.as_str())))
        }
    }

    fn expect_token(&mut self, token: Token, what: &str) -> Result<(), ParseError> {
        if *self.peek() == token {
            self.advance();
            Ok(())
        } else {
            Err(self.expected(what))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Token::Ident(name) => {
                let name = name.clone();
                self.advance();
                Ok(name)
            }
            _ => Err(self.expected(what)),
        }
    }

    fn parse_skillset(&mut self) -> Result<Skillset, ParseError> {
        self.expect_keyword(Keyword::Skillset)?;
        let name = self.expect_ident("skillset name")?;
        self.expect_token(Token::LBrace, "'{'")?;

        let mut skillset = Skillset {
            name,
            resources: Vec::new(),
            events: Vec::new(),
            skills: Vec::new(),
        };

        loop {
            match self.peek() {
                Token::Keyword(Keyword::Resource) => {
                    self.advance();
                    self.parse_resource_block(&mut skillset.resources)?;
                }
                Token::Keyword(Keyword::Event) => {
                    self.advance();
                    self.parse_event_block(&mut skillset.events)?;
                }
                Token::Keyword(Keyword::Skill) => {
                    self.advance();
                    skillset.skills.push(self.parse_skill()?);
                }
                Token::RBrace => {
                    self.advance();
                    break;
                }
                _ => return Err(self.expected("'resource', 'event', 'skill' or '}'")),
            }
        }
        self.expect_token(Token::Eof, "end of input")?;
        Ok(skillset)
    }

    fn parse_resource_block(&mut self, resources: &mut Vec<Resource>) -> Result<(), ParseError> {
        self.expect_token(Token::LBrace, "'{'")?;
        while let Token::Ident(_) = self.peek() {
            resources.push(self.parse_resource()?);
        }
        self.expect_token(Token::RBrace, "resource declaration or '}'")
    }

    fn parse_resource(&mut self) -> Result<Resource, ParseError> {
        let name = self.expect_ident("resource name")?;
        self.expect_token(Token::LBrace, "'{'")?;
        if *self.peek() != Token::Keyword(Keyword::Initial) {
            return Err(self.error(format!(
                "resource '{name}': expected 'initial', found {}",
                self.peek()
            )));
        }
        self.advance();
        let initial = self.expect_ident("initial state name")?;
        let mut states = vec![initial.clone()];
        let mut transitions = Vec::new();
        while let Token::Ident(_) = self.peek() {
            let from = self.expect_ident("state name")?;
            self.expect_token(Token::Arrow, "'->'")?;
            let to = self.expect_ident("state name")?;
            if !states.contains(&from) {
                states.push(from.clone());
            }
            if !states.contains(&to) {
                states.push(to.clone());
            }
            transitions.push((from, to));
        }
        self.expect_token(Token::RBrace, "state transition or '}'")?;
        Ok(Resource {
            name,
            states,
            initial,
            transitions,
        })
    }

    fn parse_event_block(&mut self, events: &mut Vec<Event>) -> Result<(), ParseError> {
        self.expect_token(Token::LBrace, "'{'")?;
        while let Token::Ident(_) = self.peek() {
            events.push(self.parse_event()?);
        }
        self.expect_token(Token::RBrace, "event declaration or '}'")
    }

    fn parse_event(&mut self) -> Result<Event, ParseError> {
        let name = self.expect_ident("event name")?;
        self.expect_token(Token::LBrace, "'{'")?;
        let guard = if self.eat_keyword(Keyword::Guard) {
            self.parse_guard_expr()?
        } else {
            Guard::True
        };
        let effects = self.parse_effects()?;
        self.expect_token(Token::RBrace, "effect or '}'")?;
        Ok(Event {
            name,
            guard,
            effects,
        })
    }

    fn parse_skill(&mut self) -> Result<Skill, ParseError> {
        let name = self.expect_ident("skill name")?;
        self.expect_token(Token::LBrace, "'{'")?;

        let mut skill = Skill {
            name,
            preconditions: Vec::new(),
            start_effects: EffectSet::default(),
            invariants: Vec::new(),
            successes: Vec::new(),
            failures: Vec::new(),
            interrupts: Vec::new(),
        };

        loop {
            match self.peek() {
                Token::Keyword(Keyword::Precondition) => {
                    self.advance();
                    self.parse_named_guard_block(&mut skill.preconditions)?;
                }
                Token::Keyword(Keyword::Invariant) => {
                    self.advance();
                    self.parse_named_guard_block(&mut skill.invariants)?;
                }
                Token::Keyword(Keyword::Start) => {
                    self.advance();
                    let effects = self.parse_effects()?;
                    skill.start_effects.effects.extend(effects.effects);
                }
                Token::Keyword(Keyword::Interrupt) => {
                    self.advance();
                    skill.interrupts.push(self.parse_effects()?);
                }
                Token::Keyword(Keyword::Success) => {
                    self.advance();
                    let name = self.expect_ident("success name")?;
                    let effects = self.parse_effects()?;
                    skill.successes.push(Terminator { name, effects });
                }
                Token::Keyword(Keyword::Failure) => {
                    self.advance();
                    let name = self.expect_ident("failure name")?;
                    let effects = self.parse_effects()?;
                    skill.failures.push(Terminator { name, effects });
                }
                // A loose named-guard block in the skill body is a
                // precondition; the braced placement is equivalent.
                Token::Ident(_) if *self.peek_ahead(1) == Token::LBrace => {
                    let named = self.parse_named_guard()?;
                    skill.preconditions.push(named);
                }
                Token::RBrace => {
                    self.advance();
                    break;
                }
                _ => {
                    return Err(self.expected(
                        "'precondition', 'start', 'invariant', 'interrupt', 'success', \
                         'failure', a named guard or '}'",
                    ))
                }
            }
        }
        Ok(skill)
    }

    fn parse_named_guard_block(&mut self, out: &mut Vec<NamedGuard>) -> Result<(), ParseError> {
        self.expect_token(Token::LBrace, "'{'")?;
        while let Token::Ident(_) = self.peek() {
            out.push(self.parse_named_guard()?);
        }
        self.expect_token(Token::RBrace, "named guard or '}'")
    }

    fn parse_named_guard(&mut self) -> Result<NamedGuard, ParseError> {
        let name = self.expect_ident("guard name")?;
        self.expect_token(Token::LBrace, "'{'")?;
        self.expect_keyword(Keyword::Guard)?;
        let guard = self.parse_guard_expr()?;
        let failure_effects = if self.eat_keyword(Keyword::Effect) {
            self.parse_effects()?
        } else {
            EffectSet::default()
        };
        self.expect_token(Token::RBrace, "'effect' or '}'")?;
        Ok(NamedGuard {
            name,
            guard,
            failure_effects,
        })
    }

    /// Effects are either a brace block of `resource -> state` entries or a
    /// loose run of them; a run ends at the first token that cannot start
    /// an effect.
    fn parse_effects(&mut self) -> Result<EffectSet, ParseError> {
        let mut effects = Vec::new();
        if *self.peek() == Token::LBrace {
            self.advance();
            while let Token::Ident(_) = self.peek() {
                effects.push(self.parse_effect()?);
            }
            self.expect_token(Token::RBrace, "effect or '}'")?;
        } else {
            while matches!(self.peek(), Token::Ident(_)) && *self.peek_ahead(1) == Token::Arrow {
                effects.push(self.parse_effect()?);
            }
        }
        Ok(EffectSet::new(effects))
    }

    fn parse_effect(&mut self) -> Result<Effect, ParseError> {
        let resource = self.expect_ident("resource name")?;
        self.expect_token(Token::Arrow, "'->'")?;
        let state = self.expect_ident("state name")?;
        Ok(Effect { resource, state })
    }

    fn parse_guard_expr(&mut self) -> Result<Guard, ParseError> {
        let mut left = self.parse_guard_conjunction()?;
        while self.eat_keyword(Keyword::Or) {
            let right = self.parse_guard_conjunction()?;
            left = left.or(right);
        }
        Ok(left)
    }

    fn parse_guard_conjunction(&mut self) -> Result<Guard, ParseError> {
        let mut left = self.parse_guard_unary()?;
        while self.eat_keyword(Keyword::And) {
            let right = self.parse_guard_unary()?;
            left = left.and(right);
        }
        Ok(left)
    }

    fn parse_guard_unary(&mut self) -> Result<Guard, ParseError> {
        if self.eat_keyword(Keyword::Not) {
            Ok(self.parse_guard_unary()?.negate())
        } else {
            self.parse_guard_atom()
        }
    }

    fn parse_guard_atom(&mut self) -> Result<Guard, ParseError> {
        if *self.peek() == Token::LParen {
            self.advance();
            let inner = self.parse_guard_expr()?;
            self.expect_token(Token::RParen, "')'")?;
            return Ok(inner);
        }
        let resource = self.expect_ident("resource name")?;
        match self.advance().clone() {
            Token::EqEq => {
                let state = self.expect_ident("state name")?;
                Ok(Guard::eq(resource, state))
            }
            Token::NotEq => {
                let state = self.expect_ident("state name")?;
                Ok(Guard::eq(resource, state).negate())
            }
            _ => {
                self.cursor -= 1;
                Err(self.expected("'==' or '!='"))
            }
        }
    }
}

/// Parse a complete skillset specification.
pub fn parse_skillset(source: &str) -> Result<Skillset, ParseError> {
    let tokens = lex(source)?;
    Parser { tokens, cursor: 0 }.parse_skillset()
}
