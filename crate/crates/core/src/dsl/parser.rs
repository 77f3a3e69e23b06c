use std::collections::{BTreeMap, HashMap};

use super::ast::*;
use super::diag::{Diagnostic, DiagnosticKind, Pos};
use super::lexer::{lex, Tok, Token};
use crate::bundle::IntegrationKind;
use crate::expr::{BinOp, Func, UnOp};
use crate::ids::MAX_LEVEL;
use crate::spatial::GridKind;

const MAX_DEPTH: usize = 128;
const RESERVED: &[&str] = &["and", "or", "not", "min", "max", "count", "alive"];
const CLAUSES: &[&str] = &[
    "model",
    "grid",
    "bdg",
    "identifiers",
    "component",
    "sigma",
    "rule",
    "die",
    "migrate",
    "divide",
    "edges",
    "init",
];

/// Marker for an error already reported as a diagnostic.
pub(super) struct Reported;

pub(super) type PResult<T> = Result<T, Reported>;

pub(super) struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
    depth: usize,
    pub(super) diags: Vec<Diagnostic>,
}

fn describe_expected(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl<'a> Parser<'a> {
    pub(super) fn new(toks: &'a [Token]) -> Self {
        Parser {
            toks,
            i: 0,
            depth: 0,
            diags: Vec::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> &Token {
        let t = &self.toks[self.i];
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn at_separator(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Semi | Tok::Eof)
    }

    fn error_expected(&mut self, expected: &[&str]) -> Reported {
        let found = self.peek().describe();
        let mut d = Diagnostic::new(
            DiagnosticKind::Syntax,
            self.pos(),
            format!("unexpected {found}"),
        );
        d.expected = describe_expected(expected);
        self.diags.push(d);
        Reported
    }

    fn error(&mut self, kind: DiagnosticKind, pos: Pos, message: String) -> Reported {
        self.diags.push(Diagnostic::new(kind, pos, message));
        Reported
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            let shown = match &tok {
                Tok::Ident(s) => format!("`{s}`"),
                t => t.describe(),
            };
            Err(self.error_expected(&[&shown]))
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<Pos> {
        self.expect(Tok::Ident(word.to_string()))
    }

    fn name(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => Err(self.error_expected(&["name"])),
        }
    }

    fn int(&mut self) -> PResult<(i64, Pos)> {
        match *self.peek() {
            Tok::Int(v) => {
                let pos = self.bump().pos;
                Ok((v, pos))
            }
            _ => Err(self.error_expected(&["integer"])),
        }
    }

    fn signed_int(&mut self) -> PResult<(i64, Pos)> {
        if *self.peek() == Tok::Minus {
            let pos = self.bump().pos;
            let (v, _) = self.int()?;
            Ok((-v, pos))
        } else {
            self.int()
        }
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek(), Tok::Newline | Tok::Semi) {
            self.bump();
        }
    }

    fn recover(&mut self) {
        while !self.at_separator() {
            self.bump();
        }
    }

    pub(super) fn document(&mut self) -> Document {
        let mut doc = Document {
            name: String::new(),
            pos: Pos { line: 1, col: 1 },
            backend: None,
            identifiers: None,
            components: Vec::new(),
            sigmas: Vec::new(),
            rules: Vec::new(),
            guards: Vec::new(),
            edges: None,
            inits: Vec::new(),
        };
        self.skip_separators();
        let mut need_separator = true;
        if self.is_ident("model") {
            if self.clause(&mut doc, true).is_err() {
                self.recover();
            }
        } else {
            let pos = self.pos();
            self.error(DiagnosticKind::Syntax, pos, "missing model header".into());
            doc.pos = pos;
            if *self.peek() == Tok::Eof {
                return doc;
            }
            need_separator = false;
        }
        loop {
            if need_separator && !self.at_separator() {
                self.error_expected(&["end of clause"]);
                self.recover();
            }
            self.skip_separators();
            if *self.peek() == Tok::Eof {
                break;
            }
            if self.clause(&mut doc, false).is_err() {
                self.recover();
            }
            need_separator = true;
        }
        doc
    }

    fn clause(&mut self, doc: &mut Document, first: bool) -> PResult<()> {
        let pos = self.pos();
        let word = match self.peek() {
            Tok::Ident(s) if CLAUSES.contains(&s.as_str()) => s.clone(),
            _ => return Err(self.error_expected(CLAUSES)),
        };
        self.bump();
        match word.as_str() {
            "model" => {
                let name = match self.peek().clone() {
                    Tok::Str(s) => {
                        self.bump();
                        s
                    }
                    _ => return Err(self.error_expected(&["string"])),
                };
                if first {
                    doc.name = name;
                    doc.pos = pos;
                } else {
                    self.error(
                        DiagnosticKind::Duplicate,
                        pos,
                        "model header must appear once, first".into(),
                    );
                }
            }
            "grid" => {
                let kind = if self.is_ident("square") {
                    GridKind::Square
                } else if self.is_ident("tri") {
                    GridKind::Triangular
                } else {
                    return Err(self.error_expected(&["`square`", "`tri`"]));
                };
                self.bump();
                let cutoff = if self.is_ident("cutoff") {
                    self.bump();
                    Some(self.int()?.0)
                } else {
                    None
                };
                self.set_backend(doc, Backend::Grid { kind, cutoff }, pos);
            }
            "bdg" => {
                self.keyword("degree")?;
                let (degree, _) = self.int()?;
                let mut strict = None;
                let mut forbid = false;
                let mut cutoff = None;
                while let Tok::Ident(w) = self.peek().clone() {
                    let at = self.pos();
                    let repeated = match w.as_str() {
                        "strict" | "lenient" => strict.replace(w == "strict").is_some(),
                        "forbid" => {
                            self.bump();
                            self.expect(Tok::Minus)?;
                            if !self.is_ident("disconnect") {
                                return Err(self.error_expected(&["`disconnect`"]));
                            }
                            std::mem::replace(&mut forbid, true)
                        }
                        "cutoff" => {
                            self.bump();
                            let (c, _) = self.int()?;
                            if cutoff.replace(c).is_some() {
                                self.error(DiagnosticKind::Duplicate, at, "repeated `cutoff`".into());
                            }
                            continue;
                        }
                        _ => {
                            return Err(self.error_expected(&[
                                "`strict`",
                                "`lenient`",
                                "`forbid-disconnect`",
                                "`cutoff`",
                            ]))
                        }
                    };
                    if repeated {
                        self.error(DiagnosticKind::Duplicate, at, format!("repeated `{w}` option"));
                    }
                    self.bump();
                }
                self.set_backend(
                    doc,
                    Backend::Bdg {
                        degree,
                        strict: strict.unwrap_or(true),
                        forbid_disconnect: forbid,
                        cutoff,
                    },
                    pos,
                );
            }
            "identifiers" => {
                let (n, _) = self.int()?;
                if doc.identifiers.is_some() {
                    self.error(DiagnosticKind::Duplicate, pos, "repeated `identifiers` clause".into());
                } else {
                    doc.identifiers = Some((n, pos));
                }
            }
            "component" => {
                let (name, _) = self.name()?;
                let (low, _) = self.signed_int()?;
                self.expect(Tok::DotDot)?;
                let (high, _) = self.signed_int()?;
                doc.components.push(ComponentDecl {
                    name,
                    low,
                    high,
                    pos,
                });
            }
            "sigma" => {
                let (name, _) = self.name()?;
                self.expect(Tok::Eq)?;
                let kind = match self.peek() {
                    Tok::Ident(s) if s == "max_round" => IntegrationKind::MaxRound,
                    Tok::Ident(s) if s == "min_round" => IntegrationKind::MinRound,
                    Tok::Ident(s) if s == "sum_clamp" => IntegrationKind::SumClamp,
                    _ => {
                        return Err(self.error_expected(&[
                            "`max_round`",
                            "`min_round`",
                            "`sum_clamp`",
                        ]))
                    }
                };
                self.bump();
                self.keyword("of")?;
                let (source, source_pos) = self.name()?;
                doc.sigmas.push(SigmaDecl {
                    name,
                    kind,
                    source,
                    source_pos,
                    pos,
                });
            }
            "rule" => {
                let (target, _) = self.name()?;
                self.expect(Tok::Assign)?;
                let body = self.expr()?;
                doc.rules.push(RuleDecl { target, body, pos });
            }
            "die" | "migrate" | "divide" => {
                let kind = match word.as_str() {
                    "die" => GuardKind::Die,
                    "migrate" => GuardKind::Migrate,
                    _ => GuardKind::Divide,
                };
                self.keyword("when")?;
                let expr = self.expr()?;
                let mut per_location = false;
                if kind != GuardKind::Die && self.is_ident("per") {
                    self.bump();
                    self.expect(Tok::Minus)?;
                    self.keyword("location")?;
                    per_location = true;
                }
                doc.guards.push(GuardDecl {
                    kind,
                    expr,
                    per_location,
                    pos,
                });
            }
            "edges" => {
                self.expect(Tok::LBrace)?;
                let mut edges = Vec::new();
                while *self.peek() != Tok::RBrace {
                    let (a, at) = self.int()?;
                    self.expect(Tok::Minus)?;
                    let (b, _) = self.int()?;
                    edges.push(EdgeDecl { a, b, pos: at });
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else if *self.peek() != Tok::RBrace {
                        return Err(self.error_expected(&["`,`", "`}`"]));
                    }
                }
                self.bump();
                match &mut doc.edges {
                    Some((all, _)) => all.extend(edges),
                    None => doc.edges = Some((edges, pos)),
                }
            }
            "init" => {
                let (id, _) = self.int()?;
                let at = if self.is_ident("at") {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let (a, _) = self.signed_int()?;
                    self.expect(Tok::Comma)?;
                    let (b, _) = self.signed_int()?;
                    self.expect(Tok::RParen)?;
                    Some((a, b))
                } else {
                    None
                };
                let mut levels = Vec::new();
                while let Tok::Ident(_) = self.peek() {
                    let (name, apos) = self.name()?;
                    self.expect(Tok::Eq)?;
                    let (level, _) = self.signed_int()?;
                    levels.push(Assignment {
                        name,
                        level,
                        pos: apos,
                    });
                }
                doc.inits.push(InitDecl {
                    id,
                    at,
                    levels,
                    pos,
                });
            }
            _ => unreachable!("clause keywords are listed in CLAUSES"),
        }
        Ok(())
    }

    fn set_backend(&mut self, doc: &mut Document, backend: Backend, pos: Pos) {
        if doc.backend.is_some() {
            self.error(DiagnosticKind::Duplicate, pos, "repeated backend clause".into());
        } else {
            doc.backend = Some(BackendDecl { backend, pos });
        }
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::Ident(s) if s == "or" => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::Ident(s) if s == "and" => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            _ => return None,
        })
    }

    pub(super) fn expr(&mut self) -> PResult<ExprAst> {
        self.binary(1)
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let pos = self.pos();
            return Err(self.error(
                DiagnosticKind::Syntax,
                pos,
                "expression nested too deeply".into(),
            ));
        }
        Ok(())
    }

    fn binary(&mut self, min_prec: u8) -> PResult<ExprAst> {
        self.enter()?;
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let pos = lhs.pos;
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = ExprAst {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<ExprAst> {
        let pos = self.pos();
        let op = match self.peek() {
            Tok::Minus => UnOp::Neg,
            Tok::Bang => UnOp::Not,
            Tok::Ident(s) if s == "not" => UnOp::Not,
            _ => return self.primary(),
        };
        self.bump();
        self.enter()?;
        let inner = self.unary()?;
        self.depth -= 1;
        Ok(ExprAst {
            kind: ExprKind::Unary(op, Box::new(inner)),
            pos,
        })
    }

    fn primary(&mut self) -> PResult<ExprAst> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                ExprKind::Int(v)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            Tok::Ident(s) if s == "min" || s == "max" => {
                self.bump();
                let f = if s == "min" { Func::Min } else { Func::Max };
                self.expect(Tok::LParen)?;
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                ExprKind::Call(f, args)
            }
            Tok::Ident(s) if s == "count" => {
                self.bump();
                self.expect(Tok::LParen)?;
                self.expect(Tok::RParen)?;
                ExprKind::Count
            }
            Tok::Ident(s) if s == "alive" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (m, _) = self.signed_int()?;
                self.expect(Tok::RParen)?;
                ExprKind::Alive(m)
            }
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                if *self.peek() == Tok::At {
                    self.bump();
                    let (m, _) = self.signed_int()?;
                    ExprKind::At(s, m)
                } else {
                    ExprKind::Name(s)
                }
            }
            _ => {
                return Err(self.error_expected(&[
                    "integer", "name", "`(`", "`-`", "`not`", "`min`", "`max`", "`count`",
                    "`alive`",
                ]))
            }
        };
        Ok(ExprAst { kind, pos })
    }

    pub(super) fn at_end(&mut self) -> bool {
        self.skip_separators();
        *self.peek() == Tok::Eof
    }
}

/// Names visible to expressions: components and integrations.
pub(super) struct Names {
    pub components: HashMap<String, usize>,
    pub sigmas: HashMap<String, usize>,
}

/// Check name resolution and predicate-only forms in an expression.
pub(super) fn check_expr(e: &ExprAst, names: &Names, allow_global: bool, out: &mut Vec<Diagnostic>) {
    let global_only = |what: &str, pos: Pos, out: &mut Vec<Diagnostic>| {
        out.push(Diagnostic::new(
            DiagnosticKind::Semantic,
            pos,
            format!("{what} is only allowed in queries"),
        ))
    };
    let module_range = |m: i64, pos: Pos, out: &mut Vec<Diagnostic>| {
        if !(0..=u16::MAX as i64).contains(&m) {
            out.push(Diagnostic::new(
                DiagnosticKind::Range,
                pos,
                format!("module identifier {m} is out of range"),
            ));
        }
    };
    match &e.kind {
        ExprKind::Int(_) => {}
        ExprKind::Name(n) => {
            if !names.components.contains_key(n) && !names.sigmas.contains_key(n) {
                out.push(Diagnostic::new(
                    DiagnosticKind::Unresolved,
                    e.pos,
                    format!("`{n}` is not a declared component or sigma"),
                ));
            }
        }
        ExprKind::At(n, m) => {
            if !allow_global {
                global_only(&format!("`{n}@{m}`"), e.pos, out);
            }
            if !names.components.contains_key(n) {
                out.push(Diagnostic::new(
                    DiagnosticKind::Unresolved,
                    e.pos,
                    format!("`{n}` is not a declared component"),
                ));
            }
            module_range(*m, e.pos, out);
        }
        ExprKind::Count => {
            if !allow_global {
                global_only("`count()`", e.pos, out);
            }
        }
        ExprKind::Alive(m) => {
            if !allow_global {
                global_only("`alive(..)`", e.pos, out);
            }
            module_range(*m, e.pos, out);
        }
        ExprKind::Unary(_, x) => check_expr(x, names, allow_global, out),
        ExprKind::Binary(_, l, r) => {
            check_expr(l, names, allow_global, out);
            check_expr(r, names, allow_global, out);
        }
        ExprKind::Call(_, args) => {
            for a in args {
                check_expr(a, names, allow_global, out);
            }
        }
    }
}

/// Declaration-level checks: duplicates, unresolved names, declared ranges.
fn check_document(doc: &Document, out: &mut Vec<Diagnostic>) {
    let mut names = Names {
        components: HashMap::new(),
        sigmas: HashMap::new(),
    };
    let duplicate = |what: String, pos: Pos, out: &mut Vec<Diagnostic>| {
        out.push(Diagnostic::new(DiagnosticKind::Duplicate, pos, what))
    };
    let range = |what: String, pos: Pos, out: &mut Vec<Diagnostic>| {
        out.push(Diagnostic::new(DiagnosticKind::Range, pos, what))
    };
    for (n, c) in doc.components.iter().enumerate() {
        if names.components.insert(c.name.clone(), n).is_some() {
            duplicate(format!("component `{}` is declared twice", c.name), c.pos, out);
        }
        if c.low != 0 {
            range(format!("component `{}` must start at 0 (got {})", c.name, c.low), c.pos, out);
        }
        if c.high < c.low || c.high > MAX_LEVEL as i64 {
            range(
                format!("component `{}` upper bound must be within 0..{MAX_LEVEL} (got {})", c.name, c.high),
                c.pos,
                out,
            );
        }
    }
    for (n, s) in doc.sigmas.iter().enumerate() {
        if names.components.contains_key(&s.name) || names.sigmas.insert(s.name.clone(), n).is_some() {
            duplicate(format!("name `{}` is declared twice", s.name), s.pos, out);
        }
        if !names.components.contains_key(&s.source) {
            out.push(Diagnostic::new(
                DiagnosticKind::Unresolved,
                s.source_pos,
                format!("`{}` is not a declared component", s.source),
            ));
        }
    }
    let mut ruled: BTreeMap<&str, Pos> = BTreeMap::new();
    for r in &doc.rules {
        if !names.components.contains_key(&r.target) {
            out.push(Diagnostic::new(
                DiagnosticKind::Unresolved,
                r.pos,
                format!("rule for undeclared component `{}`", r.target),
            ));
        } else if ruled.insert(&r.target, r.pos).is_some() {
            duplicate(format!("second rule for `{}`", r.target), r.pos, out);
        }
        check_expr(&r.body, &names, false, out);
    }
    let mut seen_guards = Vec::new();
    for g in &doc.guards {
        if seen_guards.contains(&g.kind) {
            duplicate(format!("second `{}` clause", g.kind.keyword()), g.pos, out);
        }
        seen_guards.push(g.kind);
        check_expr(&g.expr, &names, false, out);
    }
    if let Some((n, pos)) = doc.identifiers {
        if !(1..=u16::MAX as i64).contains(&n) {
            range(format!("identifiers must be within 1..{} (got {n})", u16::MAX), pos, out);
        }
    }
    if let Some(b) = &doc.backend {
        let cutoff = match &b.backend {
            Backend::Grid { cutoff, .. } => *cutoff,
            Backend::Bdg { degree, cutoff, .. } => {
                if !(1..=255).contains(degree) {
                    range(format!("degree bound must be within 1..255 (got {degree})"), b.pos, out);
                }
                *cutoff
            }
        };
        if let Some(c) = cutoff {
            if !(1..=u32::MAX as i64).contains(&c) {
                range(format!("cutoff must be positive (got {c})"), b.pos, out);
            }
        }
    }
    let mut ids: BTreeMap<i64, Pos> = BTreeMap::new();
    for init in &doc.inits {
        if ids.insert(init.id, init.pos).is_some() {
            duplicate(format!("module {} is initialized twice", init.id), init.pos, out);
        }
        let mut assigned = Vec::new();
        for a in &init.levels {
            if !names.components.contains_key(&a.name) {
                out.push(Diagnostic::new(
                    DiagnosticKind::Unresolved,
                    a.pos,
                    format!("`{}` is not a declared component", a.name),
                ));
            } else if assigned.contains(&&a.name) {
                duplicate(format!("`{}` is assigned twice", a.name), a.pos, out);
            }
            assigned.push(&a.name);
        }
    }
}

pub(super) fn names_of(doc: &Document) -> Names {
    Names {
        components: doc
            .components
            .iter()
            .enumerate()
            .map(|(n, c)| (c.name.clone(), n))
            .collect(),
        sigmas: doc
            .sigmas
            .iter()
            .enumerate()
            .map(|(n, s)| (s.name.clone(), n))
            .collect(),
    }
}

pub fn parse(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(text);
    let mut p = Parser::new(&toks);
    let doc = p.document();
    diags.append(&mut p.diags);
    if diags.iter().all(|d| d.kind != DiagnosticKind::Syntax) {
        check_document(&doc, &mut diags);
    }
    if diags.is_empty() {
        Ok(doc)
    } else {
        diags.sort_by_key(|d| d.pos);
        Err(diags)
    }
}

/// Parse a standalone expression (no names resolved).
pub(super) fn parse_expr(text: &str) -> Result<ExprAst, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(text);
    let mut p = Parser::new(&toks);
    p.skip_separators();
    let e = p.expr();
    if e.is_ok() && !p.at_end() {
        p.error_expected(&["operator", "end of input"]);
    }
    diags.append(&mut p.diags);
    match e {
        Ok(e) if diags.is_empty() => Ok(e),
        _ => {
            diags.sort_by_key(|d| d.pos);
            Err(diags)
        }
    }
}
