//! Surface syntax for `.rsill` programs.
//!
//! ```text
//! program    ::= decl*
//! decl       ::= "type" NAME params? "=" type
//!              | "costfree"? "proc" NAME params? "|" pot "|" "(" chans? ")" "->" "(" chan ")" "=" proc
//! params     ::= "[" (NAME ("," NAME)*)? ("|" constraint ("," constraint)*)? "]"
//! constraint ::= pot (">=" | "<=") pot
//! pot        ::= term (("+" | "-") term)*          # "-" is truncated subtraction
//! term       ::= atom ("*" atom)*
//! atom       ::= NUM | NAME | "clog" "(" pot ")" | "(" pot ")"
//! annot      ::= "^" (NUM | NAME | "(" pot ")")     # omitted annotations are 0
//! type       ::= base (("*" | "-o") annot? type)?  # right-associative
//! base       ::= "1" annot? | ("+" | "&") "{" branch ("," branch)* "}"
//!              | NAME ("[" pot ("," pot)* "]")? | "(" type ")"
//! branch     ::= LABEL annot? ":" type
//! proc       ::= x "<-" "spawn" NAME idx? "(" names ")" ";" proc
//!              | x "<-" "recv" y ";" proc
//!              | "fwd" x y | x "." LABEL ";" proc | "send" x y ";" proc
//!              | "case" x "{" LABEL "=>" proc ("|" LABEL "=>" proc)* "}"
//!              | "close" x | "wait" x ";" proc
//!              | NAME idx? "(" names ")" "providing" x
//! ```
//!
//! `#` starts a line comment. A tail call `X[e](c) providing s` stands for
//! `__tcK <- spawn X[e](c); fwd s __tcK`.

mod lexer;
mod pretty;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use pretty::{pretty_proc, pretty_program};

use crate::lang::{Arm, Branch, Constraint, CostMode, PotExpr, ProcDef, ProcExpr, SType, Signature, TypeDef};
use lexer::{lex, Pos, Tok};

/// Prefix of channel names minted by tail-call desugaring.
pub const TAIL_CALL_PREFIX: &str = "__tc";

const KEYWORDS: &[&str] = &[
    "type", "proc", "costfree", "spawn", "recv", "fwd", "case", "send", "close", "wait", "providing", "clog",
];

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: arity error: {msg}")]
    Arity { line: usize, col: usize, msg: String },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

impl ParseError {
    fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            line: pos.line,
            col: pos.col,
            msg: msg.into(),
        }
    }

    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            ParseError::Syntax { line, col, .. } | ParseError::Arity { line, col, .. } => Some((*line, *col)),
            ParseError::Io { .. } => None,
        }
    }
}

/// A parsed program together with its origin.
#[derive(Clone, Debug)]
pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
    pub parsed: Signature,
    /// Processes that use no channels, in name order.
    pub main_candidates: Vec<String>,
}

impl SourceFile {
    pub fn from_text(path: impl Into<PathBuf>, text: String) -> Result<Self, ParseError> {
        let parsed = parse_program(&text)?;
        let main_candidates = parsed
            .proc_defs
            .values()
            .filter(|d| d.uses.is_empty())
            .map(|d| d.name.clone())
            .collect();
        Ok(SourceFile {
            path: path.into(),
            text,
            parsed,
            main_candidates,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path).map_err(|e| ParseError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::from_text(path, text)
    }
}

pub fn parse_program(text: &str) -> Result<Signature, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        i: 0,
        tail_calls: 0,
        refs: Vec::new(),
    };
    let mut sig = Signature::default();
    let mut positions = Vec::new();
    while p.peek() != &Tok::Eof {
        let pos = p.pos();
        match p.peek() {
            Tok::Ident(k) if k == "type" => {
                let def = p.type_def()?;
                if sig.type_defs.contains_key(&def.name) {
                    return Err(ParseError::syntax(pos, format!("duplicate type `{}`", def.name)));
                }
                sig.type_defs.insert(def.name.clone(), def);
            }
            Tok::Ident(k) if k == "proc" || k == "costfree" => {
                let def = p.proc_def()?;
                if sig.proc_defs.contains_key(&def.name) {
                    return Err(ParseError::syntax(pos, format!("duplicate process `{}`", def.name)));
                }
                positions.push((def.name.clone(), pos));
                sig.proc_defs.insert(def.name.clone(), def);
            }
            other => {
                return Err(ParseError::syntax(
                    pos,
                    format!("expected `type` or `proc`, found {}", other.describe()),
                ))
            }
        }
    }
    check_arities(&sig, &p.refs)?;
    Ok(sig)
}

enum RefKind {
    Type,
    Proc { chans: usize },
}

struct Ref {
    kind: RefKind,
    name: String,
    indices: usize,
    pos: Pos,
}

// Unresolved names are left to the checker; only counts are validated here.
fn check_arities(sig: &Signature, refs: &[Ref]) -> Result<(), ParseError> {
    let arity = |pos: Pos, msg: String| ParseError::Arity {
        line: pos.line,
        col: pos.col,
        msg,
    };
    for r in refs {
        match r.kind {
            RefKind::Type => {
                if let Some(def) = sig.type_defs.get(&r.name) {
                    if def.params.len() != r.indices {
                        return Err(arity(
                            r.pos,
                            format!("type `{}` takes {} index argument(s), got {}", r.name, def.params.len(), r.indices),
                        ));
                    }
                }
            }
            RefKind::Proc { chans } => {
                if let Some(def) = sig.proc_defs.get(&r.name) {
                    if def.params.len() != r.indices {
                        return Err(arity(
                            r.pos,
                            format!(
                                "process `{}` takes {} index argument(s), got {}",
                                r.name,
                                def.params.len(),
                                r.indices
                            ),
                        ));
                    }
                    if def.uses.len() != chans {
                        return Err(arity(
                            r.pos,
                            format!("process `{}` uses {} channel(s), got {}", r.name, def.uses.len(), chans),
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    tail_calls: usize,
    refs: Vec<Ref>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::syntax(
            self.pos(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(&tok.describe())
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    /// Any identifier that is not a keyword.
    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(what),
        }
    }

    /// A channel name introduced by the program text.
    fn binder(&mut self) -> PResult<String> {
        let pos = self.pos();
        let x = self.name("a channel name")?;
        if x.starts_with(TAIL_CALL_PREFIX) {
            return Err(ParseError::syntax(pos, format!("channel names starting with `{TAIL_CALL_PREFIX}` are reserved")));
        }
        Ok(x)
    }

    fn comma_list<T>(&mut self, close: Tok, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.eat(&close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(close)?;
            return Ok(out);
        }
    }

    // ---- potentials ----

    fn pot(&mut self) -> PResult<PotExpr> {
        let mut e = self.pot_term()?;
        loop {
            if self.eat(&Tok::Plus) {
                e = PotExpr::add(e, self.pot_term()?);
            } else if self.peek() == &Tok::Minus && !matches!(self.peek_at(1), Tok::Ident(s) if s == "o") {
                self.bump();
                e = PotExpr::sub(e, self.pot_term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn pot_term(&mut self) -> PResult<PotExpr> {
        let mut e = self.pot_atom()?;
        while self.peek() == &Tok::Star && self.peek_at(1) != &Tok::Caret {
            self.bump();
            e = PotExpr::mul(e, self.pot_atom()?);
        }
        Ok(e)
    }

    fn pot_atom(&mut self) -> PResult<PotExpr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(PotExpr::Const(n))
            }
            Tok::Ident(s) if s == "clog" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.pot()?;
                self.expect(Tok::RParen)?;
                Ok(PotExpr::clog(e))
            }
            Tok::LParen => {
                self.bump();
                let e = self.pot()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Ok(PotExpr::IVar(self.name("a potential expression")?)),
        }
    }

    fn annot(&mut self) -> PResult<PotExpr> {
        if !self.eat(&Tok::Caret) {
            return Ok(PotExpr::zero());
        }
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(PotExpr::Const(n))
            }
            Tok::LParen => {
                self.bump();
                let e = self.pot()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Ok(PotExpr::IVar(self.name("an annotation")?)),
        }
    }

    fn constraint(&mut self) -> PResult<Constraint> {
        let a = self.pot()?;
        if self.eat(&Tok::Ge) {
            Ok(Constraint { lhs: a, rhs: self.pot()? })
        } else if self.eat(&Tok::Le) {
            Ok(Constraint { lhs: self.pot()?, rhs: a })
        } else {
            self.error("`>=` or `<=`")
        }
    }

    fn params(&mut self) -> PResult<(Vec<String>, Vec<Constraint>)> {
        if !self.eat(&Tok::LBracket) {
            return Ok((Vec::new(), Vec::new()));
        }
        let mut params = Vec::new();
        let mut domain = Vec::new();
        if !matches!(self.peek(), Tok::RBracket | Tok::Bar) {
            loop {
                let pos = self.pos();
                let x = self.name("an index parameter")?;
                if params.contains(&x) {
                    return Err(ParseError::syntax(pos, format!("duplicate index parameter `{x}`")));
                }
                params.push(x);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        if self.eat(&Tok::Bar) {
            loop {
                domain.push(self.constraint()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBracket)?;
        Ok((params, domain))
    }

    fn index_args(&mut self) -> PResult<Vec<PotExpr>> {
        if self.eat(&Tok::LBracket) {
            self.comma_list(Tok::RBracket, |p| p.pot())
        } else {
            Ok(Vec::new())
        }
    }

    // ---- types ----

    fn stype(&mut self) -> PResult<SType> {
        let left = self.stype_base()?;
        if self.eat(&Tok::Star) {
            let q = self.annot()?;
            let right = self.stype()?;
            return Ok(SType::Tensor(q, Box::new(left), Box::new(right)));
        }
        if self.peek() == &Tok::Minus && matches!(self.peek_at(1), Tok::Ident(s) if s == "o") {
            self.bump();
            self.bump();
            let q = self.annot()?;
            let right = self.stype()?;
            return Ok(SType::Lolli(q, Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn stype_base(&mut self) -> PResult<SType> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(1) => {
                self.bump();
                Ok(SType::One(self.annot()?))
            }
            Tok::Plus => {
                self.bump();
                Ok(SType::IChoice(self.branches()?))
            }
            Tok::Amp => {
                self.bump();
                Ok(SType::EChoice(self.branches()?))
            }
            Tok::LParen => {
                self.bump();
                let t = self.stype()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(_) => {
                let name = self.name("a type")?;
                let args = self.index_args()?;
                self.refs.push(Ref {
                    kind: RefKind::Type,
                    name: name.clone(),
                    indices: args.len(),
                    pos,
                });
                Ok(SType::TVar(name, args))
            }
            _ => self.error("a session type"),
        }
    }

    fn branches(&mut self) -> PResult<Vec<Branch>> {
        self.expect(Tok::LBrace)?;
        let mut out: Vec<Branch> = Vec::new();
        loop {
            let pos = self.pos();
            let label = self.name("a label")?;
            if out.iter().any(|b| b.label == label) {
                return Err(ParseError::syntax(pos, format!("duplicate label `{label}`")));
            }
            let pot = self.annot()?;
            self.expect(Tok::Colon)?;
            let cont = self.stype()?;
            out.push(Branch { label, pot, cont });
            if self.eat(&Tok::Comma) && self.peek() != &Tok::RBrace {
                continue;
            }
            self.expect(Tok::RBrace)?;
            return Ok(out);
        }
    }

    // ---- declarations ----

    fn type_def(&mut self) -> PResult<TypeDef> {
        let start = self.pos();
        self.keyword("type")?;
        let name = self.name("a type name")?;
        let (params, domain) = self.params()?;
        self.expect(Tok::Eq)?;
        let body_pos = self.pos();
        let body = self.stype()?;
        if matches!(body, SType::TVar(..)) {
            return Err(ParseError::syntax(body_pos, format!("type `{name}` is not contractive")));
        }
        let mut fv = Vec::new();
        body.free_vars(&mut fv);
        domain.iter().for_each(|c| {
            c.lhs.free_vars(&mut fv);
            c.rhs.free_vars(&mut fv);
        });
        check_scope(start, &name, &params, &fv)?;
        Ok(TypeDef {
            name,
            params,
            domain,
            body,
        })
    }

    fn chan_decl(&mut self) -> PResult<(String, SType)> {
        let x = self.binder()?;
        self.expect(Tok::Colon)?;
        Ok((x, self.stype()?))
    }

    fn proc_def(&mut self) -> PResult<ProcDef> {
        let start = self.pos();
        let cost_mode = if self.is_kw("costfree") {
            self.bump();
            CostMode::Costfree
        } else {
            CostMode::Standard
        };
        self.keyword("proc")?;
        let name = self.name("a process name")?;
        let (params, domain) = self.params()?;
        self.expect(Tok::Bar)?;
        let potential = self.pot()?;
        self.expect(Tok::Bar)?;
        self.expect(Tok::LParen)?;
        let uses = self.comma_list(Tok::RParen, |p| p.chan_decl())?;
        self.expect(Tok::Arrow)?;
        self.expect(Tok::LParen)?;
        let provides = self.chan_decl()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Eq)?;
        self.tail_calls = 0;
        let body = self.proc_expr()?;

        let mut names = BTreeSet::new();
        for (x, _) in uses.iter().chain(std::iter::once(&provides)) {
            if !names.insert(x.clone()) {
                return Err(ParseError::syntax(start, format!("`{name}` declares channel `{x}` twice")));
            }
        }
        let mut fv = Vec::new();
        potential.free_vars(&mut fv);
        for (_, t) in uses.iter().chain(std::iter::once(&provides)) {
            t.free_vars(&mut fv);
        }
        domain.iter().for_each(|c| {
            c.lhs.free_vars(&mut fv);
            c.rhs.free_vars(&mut fv);
        });
        proc_index_vars(&body, &mut fv);
        check_scope(start, &name, &params, &fv)?;
        Ok(ProcDef {
            name,
            params,
            domain,
            potential,
            uses,
            provides,
            cost_mode,
            body,
        })
    }

    // ---- processes ----

    fn proc_expr(&mut self) -> PResult<ProcExpr> {
        let pos = self.pos();
        let head = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.error("a process"),
        };
        match head.as_str() {
            "fwd" => {
                self.bump();
                let provided = self.name("a channel")?;
                let used = self.name("a channel")?;
                Ok(ProcExpr::Fwd { provided, used })
            }
            "case" => {
                self.bump();
                let chan = self.name("a channel")?;
                self.expect(Tok::LBrace)?;
                let mut arms: Vec<Arm> = Vec::new();
                loop {
                    let lpos = self.pos();
                    let label = self.name("a label")?;
                    if arms.iter().any(|a| a.label == label) {
                        return Err(ParseError::syntax(lpos, format!("duplicate case arm `{label}`")));
                    }
                    self.expect(Tok::FatArrow)?;
                    let body = self.proc_expr()?;
                    arms.push(Arm { label, body });
                    if !self.eat(&Tok::Bar) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(ProcExpr::CaseRecv { chan, arms })
            }
            "send" => {
                self.bump();
                let chan = self.name("a channel")?;
                let payload = self.name("a channel")?;
                self.expect(Tok::Semi)?;
                let cont = Box::new(self.proc_expr()?);
                Ok(ProcExpr::SendChan { chan, payload, cont })
            }
            "close" => {
                self.bump();
                Ok(ProcExpr::Close {
                    chan: self.name("a channel")?,
                })
            }
            "wait" => {
                self.bump();
                let chan = self.name("a channel")?;
                self.expect(Tok::Semi)?;
                let cont = Box::new(self.proc_expr()?);
                Ok(ProcExpr::Wait { chan, cont })
            }
            _ if KEYWORDS.contains(&head.as_str()) => self.error("a process"),
            _ => match self.peek_at(1) {
                Tok::LArrow => {
                    let bind = self.binder()?;
                    self.bump();
                    if self.is_kw("spawn") {
                        self.bump();
                        let (def, index_args, chan_args) = self.call(pos)?;
                        self.expect(Tok::Semi)?;
                        let cont = Box::new(self.proc_expr()?);
                        Ok(ProcExpr::Spawn {
                            def,
                            index_args,
                            chan_args,
                            bind,
                            cont,
                        })
                    } else if self.is_kw("recv") {
                        self.bump();
                        let chan = self.name("a channel")?;
                        self.expect(Tok::Semi)?;
                        let cont = Box::new(self.proc_expr()?);
                        Ok(ProcExpr::RecvChan { chan, bind, cont })
                    } else {
                        self.error("`spawn` or `recv`")
                    }
                }
                Tok::Dot => {
                    let chan = self.name("a channel")?;
                    self.bump();
                    let label = self.name("a label")?;
                    self.expect(Tok::Semi)?;
                    let cont = Box::new(self.proc_expr()?);
                    Ok(ProcExpr::SendLabel { chan, label, cont })
                }
                Tok::LBracket | Tok::LParen => {
                    let (def, index_args, chan_args) = self.call(pos)?;
                    self.keyword("providing")?;
                    let provided = self.name("a channel")?;
                    let bind = format!("{TAIL_CALL_PREFIX}{}", self.tail_calls);
                    self.tail_calls += 1;
                    Ok(ProcExpr::Spawn {
                        def,
                        index_args,
                        chan_args,
                        bind: bind.clone(),
                        cont: Box::new(ProcExpr::Fwd { provided, used: bind }),
                    })
                }
                _ => {
                    self.bump();
                    self.error("`<-`, `.`, or a call")
                }
            },
        }
    }

    fn call(&mut self, pos: Pos) -> PResult<(String, Vec<PotExpr>, Vec<String>)> {
        let def = self.name("a process name")?;
        let index_args = self.index_args()?;
        self.expect(Tok::LParen)?;
        let chans = self.comma_list(Tok::RParen, |p| p.name("a channel"))?;
        self.refs.push(Ref {
            kind: RefKind::Proc { chans: chans.len() },
            name: def.clone(),
            indices: index_args.len(),
            pos,
        });
        Ok((def, index_args, chans))
    }
}

fn check_scope(pos: Pos, name: &str, params: &[String], free: &[String]) -> PResult<()> {
    match free.iter().find(|v| !params.contains(v)) {
        Some(v) => Err(ParseError::syntax(
            pos,
            format!("index variable `{v}` is not a parameter of `{name}`"),
        )),
        None => Ok(()),
    }
}

fn proc_index_vars(p: &ProcExpr, out: &mut Vec<String>) {
    match p {
        ProcExpr::Spawn { index_args, cont, .. } => {
            index_args.iter().for_each(|a| a.free_vars(out));
            proc_index_vars(cont, out);
        }
        ProcExpr::CaseRecv { arms, .. } => arms.iter().for_each(|a| proc_index_vars(&a.body, out)),
        ProcExpr::SendLabel { cont, .. }
        | ProcExpr::SendChan { cont, .. }
        | ProcExpr::RecvChan { cont, .. }
        | ProcExpr::Wait { cont, .. } => proc_index_vars(cont, out),
        ProcExpr::Fwd { .. } | ProcExpr::Close { .. } => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_has_three_zero_annotated_branches() {
        let sig = parse_program("type bits = +{ zero^0 : bits, one^0 : bits, dollar^0 : 1^0 }").unwrap();
        let SType::IChoice(bs) = &sig.type_defs["bits"].body else {
            panic!("expected internal choice");
        };
        let labels: Vec<_> = bs.iter().map(|b| b.label.as_str()).collect();
        assert_eq!(labels, ["zero", "one", "dollar"]);
        assert!(bs.iter().all(|b| b.pot == PotExpr::Const(0)));
        assert_eq!(bs[2].cont, SType::One(PotExpr::Const(0)));
    }

    #[test]
    fn proc_with_empty_uses() {
        let src = "type t = &{ a^1 : 1^0 }\nproc e [] |0| () -> (s : t) = case s { a => close s }";
        let sig = parse_program(src).unwrap();
        let e = &sig.proc_defs["e"];
        assert_eq!(e.potential, PotExpr::Const(0));
        assert!(e.uses.is_empty());
        assert_eq!(e.cost_mode, CostMode::Standard);
    }

    #[test]
    fn empty_input_gives_empty_signature() {
        assert_eq!(parse_program("  # nothing\n").unwrap(), Signature::default());
    }

    #[test]
    fn tail_call_desugars_to_spawn_and_forward() {
        let src = "proc f [n] |n| (t : 1^0) -> (s : 1^0) = f[n+1](t) providing s";
        let sig = parse_program(src).unwrap();
        match &sig.proc_defs["f"].body {
            ProcExpr::Spawn { bind, cont, index_args, .. } => {
                assert_eq!(bind, "__tc0");
                assert_eq!(index_args[0].to_string(), "n+1");
                assert_eq!(
                    **cont,
                    ProcExpr::Fwd {
                        provided: "s".into(),
                        used: "__tc0".into()
                    }
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_operators_are_right_associative() {
        let sig = parse_program("type a = 1^0 -o^2 1^0 *^1 1^3").unwrap();
        match &sig.type_defs["a"].body {
            SType::Lolli(q, _, right) => {
                assert_eq!(*q, PotExpr::Const(2));
                assert!(matches!(**right, SType::Tensor(..)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn annotation_expressions_and_domains() {
        let sig = parse_program("type ctr[n | n >= 0] = &{ inc^1 : ctr[n+1], val^(2*clog(n)+2) : 1^0 }").unwrap();
        let def = &sig.type_defs["ctr"];
        assert_eq!(def.params, ["n"]);
        assert_eq!(def.domain[0].to_string(), "n >= 0");
        let SType::EChoice(bs) = &def.body else { panic!() };
        assert_eq!(bs[1].pot.to_string(), "2*clog(n)+2");
    }

    #[test]
    fn monus_parses_in_index_position() {
        let sig = parse_program("type q[n] = &{ a^n : q[n-1] }").unwrap();
        let SType::EChoice(bs) = &sig.type_defs["q"].body else { panic!() };
        assert_eq!(bs[0].cont, SType::TVar("q".into(), vec![PotExpr::sub(PotExpr::var("n"), PotExpr::Const(1))]));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_program("type a =\n  +{ x^0 1^0 }").unwrap_err();
        assert_eq!(err.position(), Some((2, 10)));
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let err = parse_program("type c[n] = 1^n\ntype d = +{ a^0 : c }").unwrap_err();
        assert!(matches!(err, ParseError::Arity { line: 2, .. }), "{err}");
        let err = parse_program(
            "proc p [] |0| (x : 1^0) -> (y : 1^0) = wait x; close y\n\
             proc m [] |0| () -> (c : 1^0) = z <- spawn p[](); wait z; close c",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Arity { line: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_names_are_left_to_the_checker() {
        assert!(parse_program("type d = +{ a^0 : nowhere }").is_ok());
    }

    #[test]
    fn non_contractive_and_unscoped_definitions_are_rejected() {
        assert!(parse_program("type a = b\ntype b = 1^0").is_err());
        assert!(parse_program("type a = 1^m").is_err());
        assert!(parse_program("proc p [] |n| () -> (c : 1^0) = close c").is_err());
    }

    #[test]
    fn reserved_tail_call_names() {
        assert!(parse_program("proc p [] |0| () -> (__tc0 : 1^0) = close __tc0").is_err());
    }
}
