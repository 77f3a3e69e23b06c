//! Model file format.
//!
//! A model is a sequence of clauses separated by newlines or `;`, starting
//! with `model "name"`. `#` starts a comment. See `docs/model-format.md` for
//! the grammar.
//!
//! ```
//! let model = regbundle::dsl::load(
//!     "model \"toggle\"\n\
//!      grid square\n\
//!      component A 0..1\n\
//!      rule A := 1 - A\n\
//!      init 0 at (0,0) A=0\n",
//! )
//! .unwrap();
//! assert_eq!(model.initial().module_count(), 1);
//! ```

mod ast;
mod diag;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::*;
pub use diag::{render as render_diagnostics, Diagnostic, DiagnosticKind, Pos};
pub use parser::parse;
pub use printer::{print_document, print_expr};
pub use validate::validate;

use crate::bundle::Model;
use crate::expr::Expr;
use parser::Names;

/// Parse and validate in one step.
pub fn load(text: &str) -> Result<Model, Vec<Diagnostic>> {
    validate(&parse(text)?)
}

/// Parse a reachability predicate against a model's names.
///
/// Predicates may use `X@i` (component `X` of module `i`), `count()` and
/// `alive(i)` in addition to the rule language. A bare component or sigma
/// name holds if it holds for some allocated module.
pub fn parse_query(text: &str, model: &Model) -> Result<Expr, Vec<Diagnostic>> {
    let ast = parser::parse_expr(text)?;
    let names = Names {
        components: model
            .network()
            .components()
            .iter()
            .enumerate()
            .map(|(n, c)| (c.name.clone(), n))
            .collect(),
        sigmas: model
            .module()
            .integrations()
            .iter()
            .enumerate()
            .map(|(n, s)| (s.name.clone(), n))
            .collect(),
    };
    let mut diags = Vec::new();
    parser::check_expr(&ast, &names, true, &mut diags);
    if diags.is_empty() {
        Ok(validate::lower(&ast, &names))
    } else {
        Err(diags)
    }
}
