use thiserror::Error;

use super::ast::*;
use super::lexer::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub expected: String,
    pub found: String,
}

type PResult<T> = Result<T, ParseError>;

/// Parses a token stream produced by [`lex`](super::lex) into a translation unit.
pub fn parse(tokens: &[Token]) -> PResult<TranslationUnit> {
    let mut p = Parser { toks: tokens, pos: 0 };
    let mut unit = TranslationUnit::default();
    while !p.at_end() {
        p.top_level(&mut unit)?;
    }
    Ok(unit)
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
}

/// Per-function statement collector.
struct Body {
    statements: Vec<Statement>,
}

impl Body {
    fn reserve(&mut self, locus: Locus, first_token: usize) -> StatementId {
        let id = StatementId(self.statements.len() as u32);
        self.statements.push(Statement {
            id,
            kind: StatementKind::Empty,
            locus,
            span: Span { first_token, end_token: first_token, start_byte: 0, end_byte: 0 },
        });
        id
    }
}

impl<'t> Parser<'t> {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn peek_is(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text) && t.kind != TokenKind::Constant)
    }

    fn peek_nth_is(&self, n: usize, text: &str) -> bool {
        self.toks.get(self.pos + n).is_some_and(|t| t.is(text) && t.kind != TokenKind::Constant)
    }

    fn locus(&self) -> Locus {
        match self.peek() {
            Some(t) => Locus { line: t.line, col: t.col },
            None => self.eof_locus(),
        }
    }

    fn eof_locus(&self) -> Locus {
        match self.toks.last() {
            Some(t) => Locus { line: t.line, col: t.col + t.text.chars().count() as u32 },
            None => Locus { line: 1, col: 1 },
        }
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        let locus = self.locus();
        let found = match self.peek() {
            Some(t) => format!("`{}`", t.text),
            None => "end of input".to_string(),
        };
        Err(ParseError { line: locus.line, col: locus.col, expected: expected.into(), found })
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.toks[self.pos];
        self.pos += 1;
        t
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.peek_is(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, text: &str) -> PResult<&'t Token> {
        if self.peek_is(text) {
            Ok(self.bump())
        } else {
            self.error(format!("`{text}`"))
        }
    }

    fn ident(&mut self) -> PResult<&'t Token> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => Ok(self.bump()),
            _ => self.error("identifier"),
        }
    }

    fn peek_base_type(&self) -> Option<BaseType> {
        let t = self.peek()?;
        if t.kind != TokenKind::Keyword {
            return None;
        }
        match t.text.as_str() {
            "int" => Some(BaseType::Int),
            "char" => Some(BaseType::Char),
            "void" => Some(BaseType::Void),
            _ => None,
        }
    }

    fn base_type(&mut self) -> PResult<BaseType> {
        match self.peek_base_type() {
            Some(b) => {
                self.pos += 1;
                Ok(b)
            }
            None => self.error("type"),
        }
    }

    fn array_suffix(&mut self, allow_unsized: bool) -> PResult<Option<Option<u64>>> {
        if !self.eat("[") {
            return Ok(None);
        }
        if allow_unsized && self.eat("]") {
            return Ok(Some(None));
        }
        let size = match self.peek() {
            Some(t) if t.kind == TokenKind::Constant => parse_int(&t.text),
            _ => None,
        };
        let Some(size) = size else {
            return self.error("array size");
        };
        self.pos += 1;
        self.expect("]")?;
        Ok(Some(Some(size)))
    }

    fn span_from(&self, first_token: usize) -> Span {
        let end_token = self.pos;
        Span {
            first_token,
            end_token,
            start_byte: self.toks[first_token].offset,
            end_byte: self.toks[end_token - 1].end_offset(),
        }
    }

    fn top_level(&mut self, unit: &mut TranslationUnit) -> PResult<()> {
        let locus = self.locus();
        let base = self.base_type()?;
        let pointer = self.eat("*");
        let name = self.ident()?;
        if self.peek_is("(") {
            let params = self.params()?;
            let ret = DeclType { base, pointer, array: None };
            if self.eat(";") {
                unit.prototypes.push(Prototype { name: name.text.clone(), ret, params, locus });
                return Ok(());
            }
            if unit.functions.iter().any(|f| f.name == name.text) {
                return Err(ParseError {
                    line: name.line,
                    col: name.col,
                    expected: "unique function name".into(),
                    found: format!("redefinition of `{}`", name.text),
                });
            }
            let mut body = Body { statements: Vec::new() };
            let block = self.block(&mut body)?;
            unit.functions.push(FunctionAst {
                name: name.text.clone(),
                ret,
                params,
                body: block,
                statements: body.statements,
                locus,
            });
        } else {
            let first = self.declarator_rest(base, pointer, name)?;
            let decl = self.declarator_list(base, first)?;
            self.expect(";")?;
            unit.globals.push(Global { decl, locus });
        }
        Ok(())
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect("(")?;
        let mut params = Vec::new();
        if self.eat(")") {
            return Ok(params);
        }
        if self.peek_base_type() == Some(BaseType::Void) && self.peek_nth_is(1, ")") {
            self.pos += 2;
            return Ok(params);
        }
        loop {
            let locus = self.locus();
            let base = self.base_type()?;
            let mut pointer = self.eat("*");
            let name = self.ident()?;
            if self.array_suffix(true)?.is_some() {
                pointer = true;
            }
            params.push(Param { name: name.text.clone(), ty: DeclType { base, pointer, array: None }, locus });
            if self.eat(")") {
                return Ok(params);
            }
            if !self.peek_is(",") {
                return self.error("`,` or `)`");
            }
            self.pos += 1;
        }
    }

    fn declarator_rest(&mut self, base: BaseType, pointer: bool, name: &Token) -> PResult<Declarator> {
        let array = self.array_suffix(false)?.flatten();
        let init = if self.eat("=") { Some(self.assignment()?) } else { None };
        Ok(Declarator {
            name: name.text.clone(),
            ty: DeclType { base, pointer, array },
            init,
            locus: Locus { line: name.line, col: name.col },
        })
    }

    fn declarator_list(&mut self, base: BaseType, first: Declarator) -> PResult<Vec<Declarator>> {
        let mut decls = vec![first];
        while self.eat(",") {
            let pointer = self.eat("*");
            let name = self.ident()?;
            decls.push(self.declarator_rest(base, pointer, name)?);
        }
        Ok(decls)
    }

    fn declaration(&mut self) -> PResult<Vec<Declarator>> {
        let base = self.base_type()?;
        let pointer = self.eat("*");
        let name = self.ident()?;
        let first = self.declarator_rest(base, pointer, name)?;
        self.declarator_list(base, first)
    }

    fn block(&mut self, body: &mut Body) -> PResult<Block> {
        self.expect("{")?;
        let mut nodes = Vec::new();
        while !self.peek_is("}") {
            if self.at_end() {
                return self.error("`}`");
            }
            nodes.push(self.statement(body)?);
        }
        self.pos += 1;
        Ok(Block(nodes))
    }

    fn sub_block(&mut self, body: &mut Body) -> PResult<Block> {
        Ok(match self.statement(body)? {
            Node::Block(b) => b,
            other => Block(vec![other]),
        })
    }

    fn simple(&mut self, body: &mut Body, first: usize, locus: Locus, kind: StatementKind) -> Node {
        let id = body.reserve(locus, first);
        let span = self.span_from(first);
        let stmt = &mut body.statements[id.index()];
        stmt.kind = kind;
        stmt.span = span;
        Node::Stmt(id)
    }

    fn statement(&mut self, body: &mut Body) -> PResult<Node> {
        let first = self.pos;
        let locus = self.locus();
        if self.peek_is("{") {
            return Ok(Node::Block(self.block(body)?));
        }
        if self.peek_is("if") {
            let id = body.reserve(locus, first);
            self.pos += 1;
            self.expect("(")?;
            let cond = self.expression()?;
            self.expect(")")?;
            self.finish(body, id, first, StatementKind::IfCond(cond));
            let then_branch = self.sub_block(body)?;
            let else_branch = if self.eat("else") { Some(self.sub_block(body)?) } else { None };
            return Ok(Node::If { cond: id, then_branch, else_branch });
        }
        if self.peek_is("while") {
            let id = body.reserve(locus, first);
            self.pos += 1;
            self.expect("(")?;
            let cond = self.expression()?;
            self.expect(")")?;
            self.finish(body, id, first, StatementKind::WhileCond(cond));
            let block = self.sub_block(body)?;
            return Ok(Node::While { cond: id, body: block });
        }
        if self.peek_is("for") {
            return self.for_loop(body);
        }
        if self.peek_is("return") {
            self.pos += 1;
            let value = if self.peek_is(";") { None } else { Some(self.expression()?) };
            self.expect(";")?;
            return Ok(self.simple(body, first, locus, StatementKind::Return(value)));
        }
        if self.eat(";") {
            return Ok(self.simple(body, first, locus, StatementKind::Empty));
        }
        if self.peek_base_type().is_some() {
            let decl = self.declaration()?;
            self.expect(";")?;
            return Ok(self.simple(body, first, locus, StatementKind::Decl(decl)));
        }
        if self.at_end() {
            return self.error("statement");
        }
        let expr = self.expression()?;
        self.expect(";")?;
        Ok(self.simple(body, first, locus, StatementKind::Expr(expr)))
    }

    fn finish(&self, body: &mut Body, id: StatementId, first: usize, kind: StatementKind) {
        let span = self.span_from(first);
        let stmt = &mut body.statements[id.index()];
        stmt.kind = kind;
        stmt.span = span;
    }

    fn for_loop(&mut self, body: &mut Body) -> PResult<Node> {
        let first = self.pos;
        let init_id = body.reserve(self.locus(), first);
        self.pos += 1;
        self.expect("(")?;
        let init = if self.peek_is(";") {
            None
        } else if self.peek_base_type().is_some() {
            Some(ForInit::Decl(self.declaration()?))
        } else {
            Some(ForInit::Expr(self.expression()?))
        };
        self.expect(";")?;
        self.finish(body, init_id, first, StatementKind::ForInit(init));

        let first = self.pos;
        let cond_id = body.reserve(self.locus(), first);
        let cond = if self.peek_is(";") { None } else { Some(self.expression()?) };
        self.expect(";")?;
        self.finish(body, cond_id, first, StatementKind::ForCond(cond));

        let first = self.pos;
        let step_id = body.reserve(self.locus(), first);
        let step = if self.peek_is(")") { None } else { Some(self.expression()?) };
        self.expect(")")?;
        self.finish(body, step_id, first, StatementKind::ForStep(step));

        let block = self.sub_block(body)?;
        Ok(Node::For { init: init_id, cond: cond_id, step: step_id, body: block })
    }

    pub(crate) fn expression(&mut self) -> PResult<Expr> {
        self.assignment()
    }

    fn assignment(&mut self) -> PResult<Expr> {
        let lhs = self.logical_or()?;
        let op = match self.peek().map(|t| t.text.as_str()) {
            Some("=") => AssignOp::Set,
            Some("+=") => AssignOp::Add,
            Some("-=") => AssignOp::Sub,
            Some("*=") => AssignOp::Mul,
            Some("/=") => AssignOp::Div,
            Some("%=") => AssignOp::Rem,
            _ => return Ok(lhs),
        };
        if !is_lvalue(&lhs) {
            return self.error("assignable expression before assignment operator");
        }
        self.pos += 1;
        let rhs = self.assignment()?;
        let locus = lhs.locus;
        Ok(Expr { kind: ExprKind::Assign(op, Box::new(lhs), Box::new(rhs)), locus })
    }

    fn binary_level(
        &mut self,
        ops: &[(&str, BinaryOp)],
        next: fn(&mut Self) -> PResult<Expr>,
    ) -> PResult<Expr> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (text, op) in ops {
                if self.peek().is_some_and(|t| t.kind == TokenKind::Operator && t.is(text)) {
                    self.pos += 1;
                    let rhs = next(self)?;
                    let locus = lhs.locus;
                    lhs = Expr { kind: ExprKind::Binary(*op, Box::new(lhs), Box::new(rhs)), locus };
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn logical_or(&mut self) -> PResult<Expr> {
        self.binary_level(&[("||", BinaryOp::Or)], Self::logical_and)
    }

    fn logical_and(&mut self) -> PResult<Expr> {
        self.binary_level(&[("&&", BinaryOp::And)], Self::equality)
    }

    fn equality(&mut self) -> PResult<Expr> {
        self.binary_level(&[("==", BinaryOp::Eq), ("!=", BinaryOp::Ne)], Self::relational)
    }

    fn relational(&mut self) -> PResult<Expr> {
        self.binary_level(
            &[("<", BinaryOp::Lt), ("<=", BinaryOp::Le), (">", BinaryOp::Gt), (">=", BinaryOp::Ge)],
            Self::additive,
        )
    }

    fn additive(&mut self) -> PResult<Expr> {
        self.binary_level(&[("+", BinaryOp::Add), ("-", BinaryOp::Sub)], Self::multiplicative)
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        self.binary_level(
            &[("*", BinaryOp::Mul), ("/", BinaryOp::Div), ("%", BinaryOp::Rem)],
            Self::unary,
        )
    }

    fn unary(&mut self) -> PResult<Expr> {
        let locus = self.locus();
        let op = match self.peek() {
            Some(t) if t.kind == TokenKind::Operator => match t.text.as_str() {
                "-" => Some(UnaryOp::Neg),
                "!" => Some(UnaryOp::Not),
                "*" => Some(UnaryOp::Deref),
                "&" => Some(UnaryOp::AddrOf),
                "++" => Some(UnaryOp::PreInc),
                "--" => Some(UnaryOp::PreDec),
                _ => None,
            },
            _ => None,
        };
        let Some(op) = op else {
            return self.postfix();
        };
        self.pos += 1;
        let operand = self.unary()?;
        if matches!(op, UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::AddrOf) && !is_lvalue(&operand) {
            return Err(ParseError {
                line: operand.locus.line,
                col: operand.locus.col,
                expected: "assignable operand".into(),
                found: "expression".into(),
            });
        }
        Ok(Expr { kind: ExprKind::Unary(op, Box::new(operand)), locus })
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.primary()?;
        loop {
            if self.eat("[") {
                let index = self.expression()?;
                self.expect("]")?;
                let locus = expr.locus;
                expr = Expr { kind: ExprKind::Index(Box::new(expr), Box::new(index)), locus };
            } else if self.peek_is("++") || self.peek_is("--") {
                if !is_lvalue(&expr) {
                    return self.error("end of expression");
                }
                let op = if self.bump().is("++") { UnaryOp::PostInc } else { UnaryOp::PostDec };
                let locus = expr.locus;
                expr = Expr { kind: ExprKind::Unary(op, Box::new(expr)), locus };
            } else {
                return Ok(expr);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let locus = self.locus();
        let Some(tok) = self.peek() else {
            return self.error("expression");
        };
        match tok.kind {
            TokenKind::Identifier => {
                self.pos += 1;
                if self.eat("(") {
                    let mut args = Vec::new();
                    if !self.eat(")") {
                        loop {
                            args.push(self.assignment()?);
                            if self.eat(")") {
                                break;
                            }
                            if !self.peek_is(",") {
                                return self.error("`,` or `)`");
                            }
                            self.pos += 1;
                        }
                    }
                    Ok(Expr { kind: ExprKind::Call(tok.text.clone(), args), locus })
                } else {
                    Ok(Expr { kind: ExprKind::Ident(tok.text.clone()), locus })
                }
            }
            TokenKind::Constant => {
                self.pos += 1;
                Ok(Expr { kind: ExprKind::Constant(tok.text.clone()), locus })
            }
            _ if tok.is("(") => {
                self.pos += 1;
                let inner = self.expression()?;
                self.expect(")")?;
                Ok(inner)
            }
            _ => self.error("expression"),
        }
    }
}

fn is_lvalue(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Ident(_) | ExprKind::Index(..) | ExprKind::Unary(UnaryOp::Deref, _))
}

fn parse_int(text: &str) -> Option<u64> {
    if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok()
    } else {
        text.parse().ok()
    }
}
