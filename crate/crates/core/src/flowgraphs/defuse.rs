use std::collections::BTreeSet;
use std::fmt;

use crate::frontend::{AssignOp, BinaryOp, Declarator, Expr, ExprKind, ForInit, StatementKind, UnaryOp};

/// A storage location tracked by the dependence analysis.
///
/// There is no alias analysis: `*p` is the pseudo-location `deref(p)` and is
/// distinct from `deref(q)` even when `p == q` at run time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Plain(String),
    Deref(String),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Plain(n) => f.write_str(n),
            Var::Deref(n) => write!(f, "deref({n})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DefUse {
    pub defs: BTreeSet<Var>,
    pub uses: BTreeSet<Var>,
}

impl DefUse {
    pub fn of_statement(kind: &StatementKind) -> Self {
        let mut du = DefUse::default();
        match kind {
            StatementKind::Decl(ds) | StatementKind::ForInit(Some(ForInit::Decl(ds))) => du.decls(ds),
            StatementKind::Expr(e)
            | StatementKind::IfCond(e)
            | StatementKind::WhileCond(e)
            | StatementKind::ForInit(Some(ForInit::Expr(e)))
            | StatementKind::ForCond(Some(e))
            | StatementKind::ForStep(Some(e))
            | StatementKind::Return(Some(e)) => du.expr(e),
            StatementKind::Return(None)
            | StatementKind::Empty
            | StatementKind::ForInit(None)
            | StatementKind::ForCond(None)
            | StatementKind::ForStep(None) => {}
        }
        du
    }

    fn decls(&mut self, ds: &[Declarator]) {
        for d in ds {
            if let Some(init) = &d.init {
                self.expr(init);
            }
            self.defs.insert(Var::Plain(d.name.clone()));
        }
    }

    /// Records the effects of evaluating `e` as an rvalue.
    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Ident(n) => {
                self.uses.insert(Var::Plain(n.clone()));
            }
            ExprKind::Constant(_) => {}
            ExprKind::Unary(UnaryOp::Deref, inner) => {
                self.expr(inner);
                if let Some(base) = pointer_base(inner) {
                    self.uses.insert(Var::Deref(base.to_string()));
                }
            }
            ExprKind::Unary(UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec, target) => {
                self.store(target, true);
            }
            ExprKind::Unary(UnaryOp::Neg | UnaryOp::Not | UnaryOp::AddrOf, inner) => self.expr(inner),
            ExprKind::Binary(_, l, r) => {
                self.expr(l);
                self.expr(r);
            }
            ExprKind::Assign(op, lhs, rhs) => {
                self.expr(rhs);
                self.store(lhs, *op != AssignOp::Set);
            }
            ExprKind::Call(_, args) => {
                for a in args {
                    self.expr(a);
                }
            }
            ExprKind::Index(base, index) => {
                self.expr(base);
                self.expr(index);
            }
        }
    }

    /// Records a write to `target`; `reads` when the old value is also read.
    fn store(&mut self, target: &Expr, reads: bool) {
        match &target.kind {
            ExprKind::Ident(n) => {
                let v = Var::Plain(n.clone());
                if reads {
                    self.uses.insert(v.clone());
                }
                self.defs.insert(v);
            }
            ExprKind::Index(base, index) => {
                self.expr(index);
                match pointer_base(base) {
                    Some(name) => {
                        let v = Var::Plain(name.to_string());
                        if reads {
                            self.uses.insert(v.clone());
                        }
                        self.defs.insert(v);
                    }
                    None => self.expr(base),
                }
            }
            ExprKind::Unary(UnaryOp::Deref, inner) => {
                self.expr(inner);
                if let Some(name) = pointer_base(inner) {
                    let v = Var::Deref(name.to_string());
                    if reads {
                        self.uses.insert(v.clone());
                    }
                    self.defs.insert(v);
                }
            }
            _ => self.expr(target),
        }
    }
}

/// The variable a pointer expression is based on: `p`, `p + i`, `p - 1`.
fn pointer_base(e: &Expr) -> Option<&str> {
    match &e.kind {
        ExprKind::Ident(n) => Some(n),
        ExprKind::Binary(BinaryOp::Add | BinaryOp::Sub, l, _) => pointer_base(l),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::SourceFile;

    fn du(stmt: &str) -> (Vec<String>, Vec<String>) {
        let src = format!("int f(int *p, int *q, int a, int i, int e, int x, int y) {{ {stmt} }}");
        let file = SourceFile::parse("t.c", src).unwrap();
        let d = DefUse::of_statement(&file.unit.functions[0].statements[0].kind);
        (d.defs.iter().map(|v| v.to_string()).collect(), d.uses.iter().map(|v| v.to_string()).collect())
    }

    #[test]
    fn assignment_forms() {
        assert_eq!(du("x = e + y;"), (vec!["x".into()], vec!["e".into(), "y".into()]));
        assert_eq!(du("a[i] = e;"), (vec!["a".into()], vec!["e".into(), "i".into()]));
        assert_eq!(du("*p = e;"), (vec!["deref(p)".into()], vec!["e".into(), "p".into()]));
        assert_eq!(du("x += 1;"), (vec!["x".into()], vec!["x".into()]));
        assert_eq!(du("i++;"), (vec!["i".into()], vec!["i".into()]));
    }

    #[test]
    fn reads_use_base_and_index() {
        assert_eq!(du("x = a[i];"), (vec!["x".into()], vec!["a".into(), "i".into()]));
        assert_eq!(du("x = *q;"), (vec!["x".into()], vec!["q".into(), "deref(q)".into()]));
        assert_eq!(du("x = *(q + i);").1, ["i", "q", "deref(q)"]);
    }

    #[test]
    fn declarations_and_calls() {
        assert_eq!(du("int z = x * 2;"), (vec!["z".into()], vec!["x".into()]));
        assert_eq!(du("char buf[8];"), (vec!["buf".into()], vec![]));
        assert_eq!(du("copy(&x, y);"), (vec![], vec!["x".into(), "y".into()]));
        assert_eq!(du("return *p;"), (vec![], vec!["p".into(), "deref(p)".into()]));
    }
}
