//! Integer expression language shared by regulation rules, transformation
//! guards and reachability predicates.
//!
//! Values are `i64`. Comparisons and boolean operators produce `0` or `1`;
//! any non-zero value is truthy.

use std::ops;

use crate::ids::ModuleId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength, C-like. Higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }

    fn apply(self, l: i64, r: i64) -> i64 {
        match self {
            BinOp::Add => l.saturating_add(r),
            BinOp::Sub => l.saturating_sub(r),
            BinOp::Mul => l.saturating_mul(r),
            BinOp::Eq => (l == r) as i64,
            BinOp::Ne => (l != r) as i64,
            BinOp::Lt => (l < r) as i64,
            BinOp::Le => (l <= r) as i64,
            BinOp::Gt => (l > r) as i64,
            BinOp::Ge => (l >= r) as i64,
            BinOp::And => (l != 0 && r != 0) as i64,
            BinOp::Or => (l != 0 || r != 0) as i64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Min,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
        }
    }
}

/// Resolved expression tree. Component and integration references are indices
/// into the owning module's declarations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(i64),
    /// Level of a component in the module being evaluated.
    Level(usize),
    /// Value of an integration function for the module being evaluated.
    Sigma(usize),
    /// Level of a component in a named module (predicates only).
    ModuleLevel { component: usize, module: ModuleId },
    /// Number of allocated modules (predicates only).
    Count,
    /// 1 if the module is allocated (predicates only).
    Alive(ModuleId),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Values an expression can read.
pub trait Scope {
    fn level(&self, component: usize) -> i64;

    fn sigma(&self, _index: usize) -> i64 {
        0
    }

    fn module_level(&self, _component: usize, _module: ModuleId) -> i64 {
        0
    }

    fn module_count(&self) -> i64 {
        0
    }

    fn alive(&self, _module: ModuleId) -> bool {
        false
    }
}

impl Expr {
    pub fn constant(v: i64) -> Expr {
        Expr::Const(v)
    }

    pub fn level(component: usize) -> Expr {
        Expr::Level(component)
    }

    pub fn sigma(index: usize) -> Expr {
        Expr::Sigma(index)
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn logical_not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn max(args: Vec<Expr>) -> Expr {
        Expr::Call(Func::Max, args)
    }

    pub fn min(args: Vec<Expr>) -> Expr {
        Expr::Call(Func::Min, args)
    }

    pub fn eq(self, r: Expr) -> Expr {
        Expr::binary(BinOp::Eq, self, r)
    }

    pub fn lt(self, r: Expr) -> Expr {
        Expr::binary(BinOp::Lt, self, r)
    }

    pub fn gt(self, r: Expr) -> Expr {
        Expr::binary(BinOp::Gt, self, r)
    }

    pub fn and(self, r: Expr) -> Expr {
        Expr::binary(BinOp::And, self, r)
    }

    pub fn or(self, r: Expr) -> Expr {
        Expr::binary(BinOp::Or, self, r)
    }

    pub fn eval<S: Scope + ?Sized>(&self, scope: &S) -> i64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Level(c) => scope.level(*c),
            Expr::Sigma(s) => scope.sigma(*s),
            Expr::ModuleLevel { component, module } => scope.module_level(*component, *module),
            Expr::Count => scope.module_count(),
            Expr::Alive(m) => scope.alive(*m) as i64,
            Expr::Unary(UnOp::Neg, e) => e.eval(scope).saturating_neg(),
            Expr::Unary(UnOp::Not, e) => (e.eval(scope) == 0) as i64,
            Expr::Binary(op, l, r) => {
                let l = l.eval(scope);
                let r = r.eval(scope);
                op.apply(l, r)
            }
            Expr::Call(f, args) => {
                let values = args.iter().map(|a| a.eval(scope));
                let folded = match f {
                    Func::Min => values.min(),
                    Func::Max => values.max(),
                };
                folded.unwrap_or(0)
            }
        }
    }

    pub fn holds<S: Scope + ?Sized>(&self, scope: &S) -> bool {
        self.eval(scope) != 0
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Unary(_, e) => e.walk(f),
            Expr::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            _ => {}
        }
    }

    pub fn uses_sigma(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Sigma(_)));
        found
    }

    /// True if the expression contains predicate-only forms (`C@i`, `count()`, `alive(i)`).
    pub fn uses_global_forms(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            found |= matches!(e, Expr::ModuleLevel { .. } | Expr::Count | Expr::Alive(_))
        });
        found
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, r: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, r)
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, r: Expr) -> Expr {
        Expr::binary(BinOp::Sub, self, r)
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, r: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, r)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Unary(UnOp::Neg, Box::new(self))
    }
}
