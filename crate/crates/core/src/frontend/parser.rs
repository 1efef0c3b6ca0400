//! Recursive-descent parser for MicroSol.
//!
//! Operator precedence follows Solidity: `!` binds tightest, then `* /`,
//! `+ -`, `< >`, `== !=`, `&&`, `||`. All binary operators associate left.

use super::ast::*;
use super::error::SyntaxError;
use super::lexer::{tokenize, Token, TokenKind};

pub const KEYWORDS: &[&str] = &[
    "contract",
    "constructor",
    "function",
    "public",
    "mapping",
    "address",
    "uint",
    "bool",
    "true",
    "false",
    "require",
    "assert",
    "return",
    "if",
    "else",
    "while",
    "new",
    "this",
    "msg",
];

const MAX_DEPTH: usize = 128;

pub fn parse(src: &str) -> Result<SourceUnit, SyntaxError> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        at: 0,
        depth: 0,
    };
    parser.source_unit()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let idx = (self.at + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        tok
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Sym(s) if *s == sym)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == kw)
    }

    fn error(&self, message: impl Into<String>, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            pos: self.peek().pos,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> SyntaxError {
        let found = &self.peek().kind;
        let message = match found {
            TokenKind::Sym(s @ ("<=" | ">=")) => {
                format!("operator `{s}` is not part of MicroSol")
            }
            other => format!("unexpected {other}"),
        };
        self.error(message, expected)
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<Pos, SyntaxError> {
        if self.is_sym(sym) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&[sym]))
        }
    }

    fn expect_kw(&mut self, kw: &'static str) -> Result<Pos, SyntaxError> {
        if self.is_kw(kw) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&[kw]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), SyntaxError> {
        match &self.peek().kind {
            TokenKind::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let name = name.clone();
                let pos = self.bump().pos;
                Ok((name, pos))
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn enter(&mut self) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("nesting too deep", &[]));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn source_unit(&mut self) -> Result<SourceUnit, SyntaxError> {
        let mut contracts = vec![self.contract()?];
        while !matches!(self.peek().kind, TokenKind::Eof) {
            contracts.push(self.contract()?);
        }
        Ok(SourceUnit { contracts })
    }

    fn contract(&mut self) -> Result<ContractDecl, SyntaxError> {
        let pos = self.expect_kw("contract")?;
        let (name, _) = self.ident("contract name")?;
        self.expect_sym("{")?;
        let mut state_vars = Vec::new();
        while !self.is_kw("constructor") {
            if self.is_kw("function") || self.is_sym("}") {
                return Err(self.unexpected(&["constructor"]));
            }
            state_vars.push(self.var_decl()?);
            self.expect_sym(";")?;
        }
        let constructor = self.function(true)?;
        let mut functions = Vec::new();
        while !self.is_sym("}") {
            if !self.is_kw("function") {
                return Err(self.unexpected(&["function", "}"]));
            }
            functions.push(self.function(false)?);
        }
        self.expect_sym("}")?;
        Ok(ContractDecl {
            name,
            pos,
            state_vars,
            constructor,
            functions,
        })
    }

    fn function(&mut self, is_ctor: bool) -> Result<FunctionDecl, SyntaxError> {
        let (name, pos) = if is_ctor {
            ("constructor".to_string(), self.expect_kw("constructor")?)
        } else {
            self.expect_kw("function")?;
            self.ident("function name")?
        };
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            params.push(self.var_decl()?);
            while self.is_sym(",") {
                self.bump();
                params.push(self.var_decl()?);
            }
        }
        self.expect_sym(")")?;
        self.expect_kw("public")?;
        let body = self.block()?;
        Ok(FunctionDecl {
            name,
            pos,
            params,
            body,
        })
    }

    fn ty(&mut self) -> Result<Type, SyntaxError> {
        self.enter()?;
        let tok = self.peek().clone();
        let ty = match &tok.kind {
            TokenKind::Ident(kw) if kw == "uint" => {
                self.bump();
                Type::Uint
            }
            TokenKind::Ident(kw) if kw == "bool" => {
                self.bump();
                Type::Bool
            }
            TokenKind::Ident(kw) if kw == "address" => {
                self.bump();
                Type::Address
            }
            TokenKind::Ident(kw) if kw == "mapping" => {
                self.bump();
                self.expect_sym("(")?;
                let key = self.ty()?;
                self.expect_sym("=>")?;
                let value = self.ty()?;
                self.expect_sym(")")?;
                Type::Mapping {
                    key: Box::new(key),
                    value: Box::new(value),
                }
            }
            TokenKind::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.bump();
                Type::Contract { name: name.clone() }
            }
            _ => {
                return Err(self.unexpected(&[
                    "uint",
                    "bool",
                    "address",
                    "mapping",
                    "contract name",
                ]))
            }
        };
        self.leave();
        Ok(ty)
    }

    fn var_decl(&mut self) -> Result<VarDecl, SyntaxError> {
        let pos = self.peek().pos;
        let ty = self.ty()?;
        let (name, _) = self.ident("variable name")?;
        Ok(VarDecl { ty, name, pos })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect_sym("{")?;
        self.enter()?;
        let mut stmts = Vec::new();
        while !self.is_sym("}") {
            let stmt = self.stmt()?;
            let compound = matches!(stmt, Stmt::If { .. } | Stmt::While { .. });
            stmts.push(stmt);
            if self.is_sym(";") {
                self.bump();
            } else if !compound && !self.is_sym("}") {
                return Err(self.unexpected(&[";", "}"]));
            }
        }
        self.leave();
        self.expect_sym("}")?;
        Ok(stmts)
    }

    fn starts_decl(&self) -> bool {
        match &self.peek().kind {
            TokenKind::Ident(kw) if kw == "uint" || kw == "bool" || kw == "mapping" => true,
            TokenKind::Ident(kw) if kw == "address" => {
                matches!(self.peek_at(1), TokenKind::Ident(_))
            }
            TokenKind::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                matches!(self.peek_at(1), TokenKind::Ident(_))
            }
            _ => false,
        }
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let pos = self.peek().pos;
        if self.is_kw("require") || self.is_kw("assert") {
            let is_require = self.is_kw("require");
            self.bump();
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            return Ok(if is_require {
                Stmt::Require { cond, pos }
            } else {
                Stmt::Assert { cond, pos }
            });
        }
        if self.is_kw("return") {
            self.bump();
            return Ok(Stmt::Return { pos });
        }
        if self.is_kw("if") || self.is_kw("while") {
            let is_if = self.is_kw("if");
            self.bump();
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            let body = self.block()?;
            return Ok(if is_if {
                Stmt::If { cond, body, pos }
            } else {
                Stmt::While { cond, body, pos }
            });
        }
        if self.starts_decl() {
            return Ok(Stmt::Decl {
                decl: self.var_decl()?,
            });
        }

        let lhs = self.expr()?;
        if self.is_sym("=") {
            self.bump();
            if self.is_kw("new") {
                self.bump();
                let (contract, _) = self.ident("contract name")?;
                let args = self.call_args()?;
                return Ok(Stmt::New {
                    target: lhs,
                    contract,
                    args,
                    pos,
                });
            }
            let value = self.expr()?;
            return match lhs.kind {
                ExprKind::Var { name } => Ok(Stmt::Assign {
                    target: name,
                    value,
                    pos,
                }),
                ExprKind::Index { base, indices } => Ok(Stmt::IndexAssign {
                    base: *base,
                    indices,
                    value,
                    pos,
                }),
                _ => Err(SyntaxError {
                    pos,
                    message: "invalid assignment target".into(),
                    expected: Vec::new(),
                }),
            };
        }
        match lhs.kind {
            ExprKind::ExternalCall { .. } | ExprKind::InternalCall { .. } => {
                Ok(Stmt::Call { call: lhs, pos })
            }
            _ => Err(self.unexpected(&["="])),
        }
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if !self.is_sym(")") {
            args.push(self.expr()?);
            while self.is_sym(",") {
                self.bump();
                args.push(self.expr()?);
            }
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    pub fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.enter()?;
        let e = self.binary(0);
        self.leave();
        e
    }

    fn binary(&mut self, level: usize) -> Result<Expr, SyntaxError> {
        const LEVELS: &[&[(&str, BinOp)]] = &[
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("==", BinOp::Eq), ("!=", BinOp::Ne)],
            &[("<", BinOp::Lt), (">", BinOp::Gt)],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
            &[("*", BinOp::Mul), ("/", BinOp::Div)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = LEVELS[level]
                .iter()
                .find(|(sym, _)| self.is_sym(sym))
                .map(|(_, op)| *op);
            let Some(op) = op else { break };
            let pos = self.bump().pos;
            let rhs = self.binary(level + 1)?;
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                pos,
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.is_sym("!") {
            let pos = self.bump().pos;
            self.enter()?;
            let operand = self.unary()?;
            self.leave();
            return Ok(Expr::new(
                ExprKind::Not {
                    operand: Box::new(operand),
                },
                pos,
            ));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.primary()?;
        loop {
            if self.is_sym(".") {
                let pos = self.bump().pos;
                let (function, _) = self.ident("function name")?;
                let args = self.call_args()?;
                e = Expr::new(
                    ExprKind::ExternalCall {
                        target: Box::new(e),
                        function,
                        args,
                    },
                    pos,
                );
            } else if self.is_sym("[") {
                let pos = self.bump().pos;
                let index = self.expr()?;
                self.expect_sym("]")?;
                e = match e.kind {
                    ExprKind::Index { base, mut indices } => {
                        indices.push(index);
                        Expr::new(ExprKind::Index { base, indices }, e.pos)
                    }
                    kind => Expr::new(
                        ExprKind::Index {
                            base: Box::new(Expr::new(kind, e.pos)),
                            indices: vec![index],
                        },
                        pos,
                    ),
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let tok = self.peek().clone();
        let pos = tok.pos;
        match &tok.kind {
            TokenKind::Int(value) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int { value: *value }, pos))
            }
            TokenKind::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            TokenKind::Ident(word) => match word.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(Expr::new(
                        ExprKind::Bool {
                            value: word == "true",
                        },
                        pos,
                    ))
                }
                "this" => {
                    self.bump();
                    Ok(Expr::new(ExprKind::This, pos))
                }
                "msg" => {
                    self.bump();
                    self.expect_sym(".")?;
                    self.expect_kw_sender()?;
                    Ok(Expr::new(ExprKind::MsgSender, pos))
                }
                "address" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let operand = self.expr()?;
                    self.expect_sym(")")?;
                    Ok(Expr::new(
                        ExprKind::AddressCast {
                            operand: Box::new(operand),
                        },
                        pos,
                    ))
                }
                w if KEYWORDS.contains(&w) => Err(self.unexpected(&["expression"])),
                _ => {
                    let name = word.clone();
                    self.bump();
                    if self.is_sym("(") {
                        let args = self.call_args()?;
                        Ok(Expr::new(
                            ExprKind::InternalCall {
                                function: name,
                                args,
                            },
                            pos,
                        ))
                    } else {
                        Ok(Expr::new(ExprKind::Var { name }, pos))
                    }
                }
            },
            _ => Err(self.unexpected(&["expression"])),
        }
    }

    fn expect_kw_sender(&mut self) -> Result<(), SyntaxError> {
        match &self.peek().kind {
            TokenKind::Ident(s) if s == "sender" => {
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected(&["sender"])),
        }
    }
}
