//! Syntax tree of a model document. Names are unresolved strings; positions
//! point at the first token of each construct.

use super::diag::Pos;
use crate::bundle::IntegrationKind;
use crate::expr::{BinOp, Func, UnOp};
use crate::spatial::GridKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Name(String),
    /// `X@i`
    At(String, i64),
    Count,
    Alive(i64),
    Unary(UnOp, Box<ExprAst>),
    Binary(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Vec<ExprAst>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprAst {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Grid {
        kind: GridKind,
        cutoff: Option<i64>,
    },
    Bdg {
        degree: i64,
        strict: bool,
        forbid_disconnect: bool,
        cutoff: Option<i64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendDecl {
    pub backend: Backend,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecl {
    pub name: String,
    pub low: i64,
    pub high: i64,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaDecl {
    pub name: String,
    pub kind: IntegrationKind,
    pub source: String,
    pub source_pos: Pos,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleDecl {
    pub target: String,
    pub body: ExprAst,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardKind {
    Die,
    Migrate,
    Divide,
}

impl GuardKind {
    pub fn keyword(self) -> &'static str {
        match self {
            GuardKind::Die => "die",
            GuardKind::Migrate => "migrate",
            GuardKind::Divide => "divide",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardDecl {
    pub kind: GuardKind,
    pub expr: ExprAst,
    pub per_location: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeDecl {
    pub a: i64,
    pub b: i64,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub name: String,
    pub level: i64,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitDecl {
    pub id: i64,
    pub at: Option<(i64, i64)>,
    pub levels: Vec<Assignment>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub name: String,
    pub pos: Pos,
    pub backend: Option<BackendDecl>,
    pub identifiers: Option<(i64, Pos)>,
    pub components: Vec<ComponentDecl>,
    pub sigmas: Vec<SigmaDecl>,
    pub rules: Vec<RuleDecl>,
    pub guards: Vec<GuardDecl>,
    /// `None` when the document has no `edges` clause.
    pub edges: Option<(Vec<EdgeDecl>, Pos)>,
    pub inits: Vec<InitDecl>,
}

pub const DEFAULT_IDENTIFIERS: i64 = 16;

impl Document {
    pub fn guard(&self, kind: GuardKind) -> Option<&GuardDecl> {
        self.guards.iter().find(|g| g.kind == kind)
    }

    /// Same document with every position reset, for structural comparison.
    pub fn strip_positions(&self) -> Document {
        let z = Pos::default();
        let mut d = self.clone();
        d.pos = z;
        if let Some(b) = &mut d.backend {
            b.pos = z;
        }
        if let Some((_, p)) = &mut d.identifiers {
            *p = z;
        }
        for c in &mut d.components {
            c.pos = z;
        }
        for s in &mut d.sigmas {
            s.pos = z;
            s.source_pos = z;
        }
        for r in &mut d.rules {
            r.pos = z;
            r.body.strip_positions();
        }
        for g in &mut d.guards {
            g.pos = z;
            g.expr.strip_positions();
        }
        if let Some((edges, p)) = &mut d.edges {
            *p = z;
            for e in edges {
                e.pos = z;
            }
        }
        for i in &mut d.inits {
            i.pos = z;
            for a in &mut i.levels {
                a.pos = z;
            }
        }
        d
    }
}

impl ExprAst {
    pub fn strip_positions(&mut self) {
        self.pos = Pos::default();
        match &mut self.kind {
            ExprKind::Unary(_, e) => e.strip_positions(),
            ExprKind::Binary(_, l, r) => {
                l.strip_positions();
                r.strip_positions();
            }
            ExprKind::Call(_, args) => args.iter_mut().for_each(ExprAst::strip_positions),
            _ => {}
        }
    }
}
