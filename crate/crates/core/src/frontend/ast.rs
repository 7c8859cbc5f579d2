use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense per-function statement index, assigned in source order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StatementId(pub u32);

impl StatementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Locus {
    pub line: u32,
    pub col: u32,
}

/// Token and byte range of a syntactic element within its translation unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub first_token: usize,
    /// Exclusive.
    pub end_token: usize,
    pub start_byte: usize,
    /// Exclusive.
    pub end_byte: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseType {
    Int,
    Char,
    Void,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeclType {
    pub base: BaseType,
    pub pointer: bool,
    /// `Some(n)` for `T name[n]`; parameters written `T name[]` are pointers.
    pub array: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declarator {
    pub name: String,
    pub ty: DeclType,
    pub init: Option<Expr>,
    pub locus: Locus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: DeclType,
    pub locus: Locus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
    Deref,
    AddrOf,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub locus: Locus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Ident(String),
    Constant(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Assign(AssignOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForInit {
    Decl(Vec<Declarator>),
    Expr(Expr),
}

/// Payload of one flat statement.
///
/// `for` headers are split into three statements (init, condition, step) so
/// every CFG node corresponds to exactly one statement.
#[derive(Debug, Clone, PartialEq)]
pub enum StatementKind {
    Decl(Vec<Declarator>),
    Expr(Expr),
    Return(Option<Expr>),
    Empty,
    IfCond(Expr),
    WhileCond(Expr),
    ForInit(Option<ForInit>),
    ForCond(Option<Expr>),
    ForStep(Option<Expr>),
}

impl StatementKind {
    pub fn is_branch(&self) -> bool {
        matches!(self, StatementKind::IfCond(_) | StatementKind::WhileCond(_) | StatementKind::ForCond(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            StatementKind::Decl(_) => "decl",
            StatementKind::Expr(_) => "expr",
            StatementKind::Return(_) => "return",
            StatementKind::Empty => "empty",
            StatementKind::IfCond(_) => "if",
            StatementKind::WhileCond(_) => "while",
            StatementKind::ForInit(_) => "for-init",
            StatementKind::ForCond(_) => "for-cond",
            StatementKind::ForStep(_) => "for-step",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub id: StatementId,
    pub kind: StatementKind,
    pub locus: Locus,
    pub span: Span,
}

/// Structured statement tree; leaves refer into the flat statement index.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Stmt(StatementId),
    If { cond: StatementId, then_branch: Block, else_branch: Option<Block> },
    While { cond: StatementId, body: Block },
    For { init: StatementId, cond: StatementId, step: StatementId, body: Block },
    Block(Block),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Block(pub Vec<Node>);

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionAst {
    pub name: String,
    pub ret: DeclType,
    pub params: Vec<Param>,
    pub body: Block,
    pub statements: Vec<Statement>,
    pub locus: Locus,
}

impl FunctionAst {
    pub fn statement(&self, id: StatementId) -> &Statement {
        &self.statements[id.index()]
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Global {
    pub decl: Vec<Declarator>,
    pub locus: Locus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prototype {
    pub name: String,
    pub ret: DeclType,
    pub params: Vec<Param>,
    pub locus: Locus,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TranslationUnit {
    pub functions: Vec<FunctionAst>,
    pub globals: Vec<Global>,
    pub prototypes: Vec<Prototype>,
}

impl TranslationUnit {
    pub fn function(&self, name: &str) -> Option<(usize, &FunctionAst)> {
        self.functions.iter().enumerate().find(|(_, f)| f.name == name)
    }
}

impl Expr {
    /// Pre-order traversal of the expression tree.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        match &self.kind {
            ExprKind::Ident(_) | ExprKind::Constant(_) => {}
            ExprKind::Unary(_, e) => e.walk(visit),
            ExprKind::Binary(_, l, r) | ExprKind::Assign(_, l, r) | ExprKind::Index(l, r) => {
                l.walk(visit);
                r.walk(visit);
            }
            ExprKind::Call(_, args) => {
                for a in args {
                    a.walk(visit);
                }
            }
        }
    }
}

impl StatementKind {
    /// Top-level expressions of the statement, in source order.
    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            StatementKind::Decl(ds) | StatementKind::ForInit(Some(ForInit::Decl(ds))) => {
                ds.iter().filter_map(|d| d.init.as_ref()).collect()
            }
            StatementKind::Expr(e)
            | StatementKind::IfCond(e)
            | StatementKind::WhileCond(e)
            | StatementKind::ForInit(Some(ForInit::Expr(e)))
            | StatementKind::ForCond(Some(e))
            | StatementKind::ForStep(Some(e))
            | StatementKind::Return(Some(e)) => vec![e],
            _ => Vec::new(),
        }
    }

    /// Names of functions called anywhere in the statement, in source order.
    pub fn callees(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for e in self.exprs() {
            e.walk(&mut |sub| {
                if let ExprKind::Call(name, _) = &sub.kind {
                    out.push(name.as_str());
                }
            });
        }
        out
    }
}
