use std::fmt::Write;

use super::ast::*;

/// Renders a translation unit as an indented tree, one node per line.
pub fn dump_unit(unit: &TranslationUnit) -> String {
    let mut out = String::new();
    for g in &unit.globals {
        for d in &g.decl {
            let _ = writeln!(out, "global {} {}", type_name(&d.ty), d.name);
        }
    }
    for p in &unit.prototypes {
        let _ = writeln!(out, "prototype {} {}({})", type_name(&p.ret), p.name, param_list(&p.params));
    }
    for f in &unit.functions {
        let _ = writeln!(
            out,
            "function {} {}({}) @{}:{}",
            type_name(&f.ret),
            f.name,
            param_list(&f.params),
            f.locus.line,
            f.locus.col
        );
        dump_block(&mut out, f, &f.body, 1);
    }
    out
}

fn type_name(ty: &DeclType) -> String {
    let base = match ty.base {
        BaseType::Int => "int",
        BaseType::Char => "char",
        BaseType::Void => "void",
    };
    let mut s = base.to_string();
    if ty.pointer {
        s.push('*');
    }
    if let Some(n) = ty.array {
        let _ = write!(s, "[{n}]");
    }
    s
}

fn param_list(params: &[Param]) -> String {
    params.iter().map(|p| format!("{} {}", type_name(&p.ty), p.name)).collect::<Vec<_>>().join(", ")
}

fn dump_block(out: &mut String, f: &FunctionAst, block: &Block, depth: usize) {
    for node in &block.0 {
        dump_node(out, f, node, depth);
    }
}

fn line(out: &mut String, f: &FunctionAst, id: StatementId, depth: usize) {
    let s = f.statement(id);
    let _ = writeln!(
        out,
        "{}{} {} @{}:{}  {}",
        "  ".repeat(depth),
        id,
        s.kind.label(),
        s.locus.line,
        s.locus.col,
        describe(&s.kind)
    );
}

fn dump_node(out: &mut String, f: &FunctionAst, node: &Node, depth: usize) {
    match node {
        Node::Stmt(id) => line(out, f, *id, depth),
        Node::If { cond, then_branch, else_branch } => {
            line(out, f, *cond, depth);
            let _ = writeln!(out, "{}then", "  ".repeat(depth + 1));
            dump_block(out, f, then_branch, depth + 2);
            if let Some(e) = else_branch {
                let _ = writeln!(out, "{}else", "  ".repeat(depth + 1));
                dump_block(out, f, e, depth + 2);
            }
        }
        Node::While { cond, body } => {
            line(out, f, *cond, depth);
            dump_block(out, f, body, depth + 1);
        }
        Node::For { init, cond, step, body } => {
            line(out, f, *init, depth);
            line(out, f, *cond, depth);
            line(out, f, *step, depth);
            dump_block(out, f, body, depth + 1);
        }
        Node::Block(b) => {
            let _ = writeln!(out, "{}block", "  ".repeat(depth));
            dump_block(out, f, b, depth + 1);
        }
    }
}

fn describe(kind: &StatementKind) -> String {
    match kind {
        StatementKind::Decl(ds) => decls(ds),
        StatementKind::Expr(e) | StatementKind::IfCond(e) | StatementKind::WhileCond(e) => expr(e),
        StatementKind::Return(e) | StatementKind::ForCond(e) | StatementKind::ForStep(e) => {
            e.as_ref().map(expr).unwrap_or_default()
        }
        StatementKind::ForInit(Some(ForInit::Decl(ds))) => decls(ds),
        StatementKind::ForInit(Some(ForInit::Expr(e))) => expr(e),
        StatementKind::ForInit(None) | StatementKind::Empty => String::new(),
    }
}

fn decls(ds: &[Declarator]) -> String {
    ds.iter()
        .map(|d| match &d.init {
            Some(init) => format!("{} {} = {}", type_name(&d.ty), d.name, expr(init)),
            None => format!("{} {}", type_name(&d.ty), d.name),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Fully parenthesized expression rendering.
pub(crate) fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Ident(n) | ExprKind::Constant(n) => n.clone(),
        ExprKind::Unary(op, inner) => {
            let inner = expr(inner);
            match op {
                UnaryOp::Neg => format!("(-{inner})"),
                UnaryOp::Not => format!("(!{inner})"),
                UnaryOp::Deref => format!("(*{inner})"),
                UnaryOp::AddrOf => format!("(&{inner})"),
                UnaryOp::PreInc => format!("(++{inner})"),
                UnaryOp::PreDec => format!("(--{inner})"),
                UnaryOp::PostInc => format!("({inner}++)"),
                UnaryOp::PostDec => format!("({inner}--)"),
            }
        }
        ExprKind::Binary(op, l, r) => {
            let op = match op {
                BinaryOp::Add => "+",
                BinaryOp::Sub => "-",
                BinaryOp::Mul => "*",
                BinaryOp::Div => "/",
                BinaryOp::Rem => "%",
                BinaryOp::Lt => "<",
                BinaryOp::Le => "<=",
                BinaryOp::Gt => ">",
                BinaryOp::Ge => ">=",
                BinaryOp::Eq => "==",
                BinaryOp::Ne => "!=",
                BinaryOp::And => "&&",
                BinaryOp::Or => "||",
            };
            format!("({} {op} {})", expr(l), expr(r))
        }
        ExprKind::Assign(op, l, r) => {
            let op = match op {
                AssignOp::Set => "=",
                AssignOp::Add => "+=",
                AssignOp::Sub => "-=",
                AssignOp::Mul => "*=",
                AssignOp::Div => "/=",
                AssignOp::Rem => "%=",
            };
            format!("{} {op} {}", expr(l), expr(r))
        }
        ExprKind::Call(name, args) => {
            format!("{name}({})", args.iter().map(expr).collect::<Vec<_>>().join(", "))
        }
        ExprKind::Index(b, i) => format!("{}[{}]", expr(b), expr(i)),
    }
}
