use std::fmt::Write as _;

use super::ast::*;
use crate::expr::UnOp;
use crate::spatial::GridKind;

const UNARY_PREC: u8 = 7;

fn write_expr(e: &ExprAst, ctx: u8, out: &mut String) {
    match &e.kind {
        ExprKind::Int(v) if *v < 0 => {
            let _ = write!(out, "({v})");
        }
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::At(n, m) => {
            let _ = write!(out, "{n}@{m}");
        }
        ExprKind::Count => out.push_str("count()"),
        ExprKind::Alive(m) => {
            let _ = write!(out, "alive({m})");
        }
        ExprKind::Unary(op, x) => {
            out.push_str(match op {
                UnOp::Neg => "-",
                UnOp::Not => "not ",
            });
            write_expr(x, UNARY_PREC, out);
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            let paren = p < ctx;
            if paren {
                out.push('(');
            }
            write_expr(l, p, out);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(r, p + 1, out);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (n, a) in args.iter().enumerate() {
                if n > 0 {
                    out.push_str(", ");
                }
                write_expr(a, 0, out);
            }
            out.push(')');
        }
    }
}

/// Minimal-parenthesis infix text of an expression.
pub fn print_expr(e: &ExprAst) -> String {
    let mut out = String::new();
    write_expr(e, 0, &mut out);
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Canonical text of a document: one clause per line, grouped by kind.
pub fn print_document(doc: &Document) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", quote(&doc.name));
    if let Some(b) = &doc.backend {
        match &b.backend {
            Backend::Grid { kind, cutoff } => {
                let kind = match kind {
                    GridKind::Square => "square",
                    GridKind::Triangular => "tri",
                };
                let _ = write!(out, "grid {kind}");
                if let Some(c) = cutoff {
                    let _ = write!(out, " cutoff {c}");
                }
            }
            Backend::Bdg {
                degree,
                strict,
                forbid_disconnect,
                cutoff,
            } => {
                let _ = write!(out, "bdg degree {degree} {}", if *strict { "strict" } else { "lenient" });
                if *forbid_disconnect {
                    out.push_str(" forbid-disconnect");
                }
                if let Some(c) = cutoff {
                    let _ = write!(out, " cutoff {c}");
                }
            }
        }
        out.push('\n');
    }
    if let Some((n, _)) = doc.identifiers {
        let _ = writeln!(out, "identifiers {n}");
    }
    for c in &doc.components {
        let _ = writeln!(out, "component {} {}..{}", c.name, c.low, c.high);
    }
    for s in &doc.sigmas {
        let _ = writeln!(out, "sigma {} = {} of {}", s.name, s.kind.keyword(), s.source);
    }
    for r in &doc.rules {
        let _ = writeln!(out, "rule {} := {}", r.target, print_expr(&r.body));
    }
    for g in &doc.guards {
        let _ = write!(out, "{} when {}", g.kind.keyword(), print_expr(&g.expr));
        if g.per_location {
            out.push_str(" per-location");
        }
        out.push('\n');
    }
    if let Some((edges, _)) = &doc.edges {
        let list: Vec<String> = edges.iter().map(|e| format!("{}-{}", e.a, e.b)).collect();
        let _ = writeln!(out, "edges {{ {} }}", list.join(", "));
    }
    for i in &doc.inits {
        let _ = write!(out, "init {}", i.id);
        if let Some((a, b)) = i.at {
            let _ = write!(out, " at ({a},{b})");
        }
        for a in &i.levels {
            let _ = write!(out, " {}={}", a.name, a.level);
        }
        out.push('\n');
    }
    out
}
