//! Tokenizer and recursive-descent parser for the `.scn` scenario language.
//!
//! ```text
//! level sos|internal
//! system <id> [stakeholder | subsystem of <id>]
//! event <owner>.<name>(<param>: string|int|bool, ...)
//! scenario <id> on [<sender> ->] <owner>.<name>[(<arg>=<literal>, ...)] {
//!     request|receive [<sender> ->] <owner>.<name>[(<arg>=<literal>, ...)]
//! }
//! ```
//!
//! Whitespace and newlines are insignificant; `#` and `//` start comments.

use std::fmt;

use thiserror::Error;

use super::model::{
    BodyStep, EventDecl, EventPattern, Level, ParamType, ProgramBuilder, ProgramError, ScenarioProgram, ScenarioRule,
    SystemDef, Value,
};

const RESERVED: &[&str] = &[
    "level",
    "system",
    "event",
    "scenario",
    "on",
    "request",
    "receive",
    "stakeholder",
    "subsystem",
    "of",
    "true",
    "false",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{error} (at {line}:{column})")]
    Semantic { line: usize, column: usize, error: ProgramError },
    #[error("{0}")]
    Program(ProgramError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Arrow,
    Dot,
    Comma,
    Colon,
    Eq,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> ScenarioParseError {
    ScenarioParseError::Syntax { line: pos.line, column: pos.column, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, ScenarioParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let single = match c {
            '.' => Some(Tok::Dot),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '=' => Some(Tok::Eq),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, pos));
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push((Tok::Arrow, pos));
            bump!();
            bump!();
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            bump!();
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<i64>().map_err(|_| syntax(pos, format!("integer `{s}` out of range")))?;
            out.push((Tok::Int(v), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(syntax(pos, "unterminated string")),
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        let esc = chars.get(i + 1).copied();
                        let ch = match esc {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            _ => return Err(syntax(Pos { line, column: col }, "bad escape sequence")),
                        };
                        s.push(ch);
                        bump!();
                        bump!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push((Tok::Str(s), pos));
            continue;
        }
        return Err(syntax(pos, format!("unexpected character `{c}`")));
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

enum Stmt {
    Level(Level),
    System(SystemDef, Pos),
    Event(EventDecl, Pos),
    Rule(ScenarioRule, Pos),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ScenarioParseError> {
        let (t, pos) = self.next();
        if t == want {
            Ok(())
        } else {
            Err(syntax(pos, format!("expected {want}, found {t}")))
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> Result<String, ScenarioParseError> {
        match self.next() {
            (Tok::Ident(s), pos) if RESERVED.contains(&s.as_str()) => {
                Err(syntax(pos, format!("reserved word `{s}` cannot be used as {what}")))
            }
            (Tok::Ident(s), _) => Ok(s),
            (t, pos) => Err(syntax(pos, format!("expected {what}, found {t}"))),
        }
    }

    fn literal(&mut self) -> Result<Value, ScenarioParseError> {
        match self.next() {
            (Tok::Int(i), _) => Ok(Value::Int(i)),
            (Tok::Str(s), _) => Ok(Value::Str(s)),
            (Tok::Ident(s), _) if s == "true" => Ok(Value::Bool(true)),
            (Tok::Ident(s), _) if s == "false" => Ok(Value::Bool(false)),
            (t, pos) => Err(syntax(pos, format!("expected literal, found {t}"))),
        }
    }

    fn pattern(&mut self) -> Result<EventPattern, ScenarioParseError> {
        let first = self.ident("system id")?;
        let (sender, owner) = if *self.peek() == Tok::Arrow {
            self.next();
            (Some(first), self.ident("system id")?)
        } else {
            (None, first)
        };
        self.expect(Tok::Dot)?;
        let name = self.ident("event name")?;
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            if *self.peek() != Tok::RParen {
                loop {
                    let k = self.ident("argument name")?;
                    self.expect(Tok::Eq)?;
                    args.push((k, self.literal()?));
                    if *self.peek() == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(EventPattern { sender, owner, name, args })
    }

    fn statement(&mut self) -> Result<Stmt, ScenarioParseError> {
        let (tok, pos) = self.next();
        let Tok::Ident(kw) = tok else {
            return Err(syntax(pos, format!("expected `system`, `event`, `scenario` or `level`, found {tok}")));
        };
        match kw.as_str() {
            "level" => match self.next() {
                (Tok::Ident(l), _) if l == "sos" => Ok(Stmt::Level(Level::SoS)),
                (Tok::Ident(l), _) if l == "internal" => Ok(Stmt::Level(Level::CSInternal)),
                (t, p) => Err(syntax(p, format!("expected `sos` or `internal`, found {t}"))),
            },
            "system" => {
                let id = self.ident("system id")?;
                let def = if self.keyword("stakeholder") {
                    self.next();
                    SystemDef::stakeholder(id)
                } else if self.keyword("subsystem") {
                    self.next();
                    if !self.keyword("of") {
                        let (t, p) = self.next();
                        return Err(syntax(p, format!("expected `of`, found {t}")));
                    }
                    self.next();
                    SystemDef::subsystem(id, self.ident("parent system id")?)
                } else {
                    SystemDef::constituent(id)
                };
                Ok(Stmt::System(def, pos))
            }
            "event" => {
                let owner = self.ident("system id")?;
                self.expect(Tok::Dot)?;
                let mut decl = EventDecl::new(owner, self.ident("event name")?);
                self.expect(Tok::LParen)?;
                if *self.peek() != Tok::RParen {
                    loop {
                        let name = self.ident("parameter name")?;
                        self.expect(Tok::Colon)?;
                        let ty = match self.next() {
                            (Tok::Ident(t), _) if t == "string" => ParamType::String,
                            (Tok::Ident(t), _) if t == "int" => ParamType::Int,
                            (Tok::Ident(t), _) if t == "bool" => ParamType::Bool,
                            (t, p) => return Err(syntax(p, format!("expected string, int or bool, found {t}"))),
                        };
                        decl.params.push((name, ty));
                        if *self.peek() == Tok::Comma {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(Stmt::Event(decl, pos))
            }
            "scenario" => {
                let id = self.ident("scenario id")?;
                if !self.keyword("on") {
                    let (t, p) = self.next();
                    return Err(syntax(p, format!("expected `on`, found {t}")));
                }
                self.next();
                let trigger = self.pattern()?;
                self.expect(Tok::LBrace)?;
                let mut body = Vec::new();
                loop {
                    match self.next() {
                        (Tok::RBrace, _) => break,
                        (Tok::Ident(k), _) if k == "request" => body.push(BodyStep::Request(self.pattern()?)),
                        (Tok::Ident(k), _) if k == "receive" => body.push(BodyStep::Receive(self.pattern()?)),
                        (t, p) => return Err(syntax(p, format!("expected `request`, `receive` or `}}`, found {t}"))),
                    }
                }
                Ok(Stmt::Rule(ScenarioRule::new(id, trigger, body), pos))
            }
            other => Err(syntax(pos, format!("unknown statement `{other}`"))),
        }
    }
}

fn semantic(pos: Pos) -> impl Fn(ProgramError) -> ScenarioParseError {
    move |error| ScenarioParseError::Semantic { line: pos.line, column: pos.column, error }
}

/// Parses a scenario specification. Declarations may appear in any order.
pub fn parse_scenario_spec(text: &str) -> Result<ScenarioProgram, ScenarioParseError> {
    let mut p = Parser { toks: tokenize(text)?, at: 0 };
    let mut stmts = Vec::new();
    while *p.peek() != Tok::Eof {
        stmts.push(p.statement()?);
    }

    let mut b = ProgramBuilder::new(Level::SoS);
    for s in &stmts {
        match s {
            Stmt::Level(l) => b.set_level(*l),
            Stmt::System(def, pos) => b.add_system(def.clone()).map_err(semantic(*pos))?,
            _ => {}
        }
    }
    b.check_parents().map_err(ScenarioParseError::Program)?;
    for s in &stmts {
        if let Stmt::Event(decl, pos) = s {
            b.add_event(decl.clone()).map_err(semantic(*pos))?;
        }
    }
    for s in stmts {
        if let Stmt::Rule(rule, pos) = s {
            b.add_rule(rule).map_err(semantic(pos))?;
        }
    }
    b.build().map_err(ScenarioParseError::Program)
}

/// Parses a single event expression such as `App -> EV.chargingPlan(kw=7)`.
pub fn parse_event_pattern(text: &str) -> Result<EventPattern, ScenarioParseError> {
    let mut p = Parser { toks: tokenize(text)?, at: 0 };
    let pattern = p.pattern()?;
    match p.next() {
        (Tok::Eof, _) => Ok(pattern),
        (t, pos) => Err(syntax(pos, format!("unexpected {t} after event"))),
    }
}
