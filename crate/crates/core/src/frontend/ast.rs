//! Syntax tree for MicroSol bundles.
//!
//! Node shapes follow the MicroSol grammar one-to-one. Every node that can
//! be the subject of a diagnostic carries a [`Pos`].

use serde::Serialize;

/// 1-based line/column position in the source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceUnit {
    pub contracts: Vec<ContractDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractDecl {
    pub name: String,
    pub pos: Pos,
    pub state_vars: Vec<VarDecl>,
    pub constructor: FunctionDecl,
    pub functions: Vec<FunctionDecl>,
}

impl ContractDecl {
    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        if name == "constructor" {
            return Some(&self.constructor);
        }
        self.functions.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Type {
    Uint,
    Bool,
    Address,
    /// Parsed for any key/value pair; validation admits only `address => uint`.
    Mapping {
        key: Box<Type>,
        value: Box<Type>,
    },
    Contract {
        name: String,
    },
}

impl std::fmt::Display for Type {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Type::Uint => f.write_str("uint"),
            Type::Bool => f.write_str("bool"),
            Type::Address => f.write_str("address"),
            Type::Mapping { key, value } => write!(f, "mapping({key} => {value})"),
            Type::Contract { name } => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarDecl {
    pub ty: Type,
    pub name: String,
    pub pos: Pos,
}

/// A constructor or a function. Constructors are named `constructor`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionDecl {
    pub name: String,
    pub pos: Pos,
    pub params: Vec<VarDecl>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stmt {
    Decl {
        decl: VarDecl,
    },
    /// `VName = Expr`
    Assign {
        target: String,
        value: Expr,
        pos: Pos,
    },
    /// `Expr[Expr]...[Expr] = Expr`
    IndexAssign {
        base: Expr,
        indices: Vec<Expr>,
        value: Expr,
        pos: Pos,
    },
    /// `Expr = new CName(Expr, ...)`
    New {
        target: Expr,
        contract: String,
        args: Vec<Expr>,
        pos: Pos,
    },
    Require {
        cond: Expr,
        pos: Pos,
    },
    Assert {
        cond: Expr,
        pos: Pos,
    },
    Return {
        pos: Pos,
    },
    If {
        cond: Expr,
        body: Vec<Stmt>,
        pos: Pos,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
        pos: Pos,
    },
    /// A call evaluated for its effect. MicroSol functions return nothing.
    Call {
        call: Expr,
        pos: Pos,
    },
}

impl Stmt {
    pub fn pos(&self) -> Pos {
        match self {
            Stmt::Decl { decl } => decl.pos,
            Stmt::Assign { pos, .. }
            | Stmt::IndexAssign { pos, .. }
            | Stmt::New { pos, .. }
            | Stmt::Require { pos, .. }
            | Stmt::Assert { pos, .. }
            | Stmt::Return { pos }
            | Stmt::If { pos, .. }
            | Stmt::While { pos, .. }
            | Stmt::Call { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BinOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExprKind {
    Int {
        value: u64,
    },
    Bool {
        value: bool,
    },
    Var {
        name: String,
    },
    This,
    MsgSender,
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not {
        operand: Box<Expr>,
    },
    /// `address(Expr)`. Validation admits integer literals and
    /// address-valued or contract-valued operands only.
    AddressCast {
        operand: Box<Expr>,
    },
    /// `Expr.FName(...)`
    ExternalCall {
        target: Box<Expr>,
        function: String,
        args: Vec<Expr>,
    },
    /// `FName(...)`
    InternalCall {
        function: String,
        args: Vec<Expr>,
    },
    /// `Expr[Expr]...[Expr]`
    Index {
        base: Box<Expr>,
        indices: Vec<Expr>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Self { kind, pos }
    }
}

/// Resets every position in the tree to the default, so that trees produced
/// from differently formatted sources can be compared structurally.
pub trait ClearPositions {
    fn clear_positions(&mut self);
}

impl ClearPositions for SourceUnit {
    fn clear_positions(&mut self) {
        for c in &mut self.contracts {
            c.clear_positions();
        }
    }
}

impl ClearPositions for ContractDecl {
    fn clear_positions(&mut self) {
        self.pos = Pos::default();
        for v in &mut self.state_vars {
            v.pos = Pos::default();
        }
        self.constructor.clear_positions();
        for f in &mut self.functions {
            f.clear_positions();
        }
    }
}

impl ClearPositions for FunctionDecl {
    fn clear_positions(&mut self) {
        self.pos = Pos::default();
        for p in &mut self.params {
            p.pos = Pos::default();
        }
        for s in &mut self.body {
            s.clear_positions();
        }
    }
}

impl ClearPositions for Stmt {
    fn clear_positions(&mut self) {
        match self {
            Stmt::Decl { decl } => decl.pos = Pos::default(),
            Stmt::Assign { value, pos, .. } => {
                *pos = Pos::default();
                value.clear_positions();
            }
            Stmt::IndexAssign {
                base,
                indices,
                value,
                pos,
            } => {
                *pos = Pos::default();
                base.clear_positions();
                indices.iter_mut().for_each(ClearPositions::clear_positions);
                value.clear_positions();
            }
            Stmt::New {
                target, args, pos, ..
            } => {
                *pos = Pos::default();
                target.clear_positions();
                args.iter_mut().for_each(ClearPositions::clear_positions);
            }
            Stmt::Require { cond, pos } | Stmt::Assert { cond, pos } => {
                *pos = Pos::default();
                cond.clear_positions();
            }
            Stmt::Return { pos } => *pos = Pos::default(),
            Stmt::If { cond, body, pos } | Stmt::While { cond, body, pos } => {
                *pos = Pos::default();
                cond.clear_positions();
                body.iter_mut().for_each(ClearPositions::clear_positions);
            }
            Stmt::Call { call, pos } => {
                *pos = Pos::default();
                call.clear_positions();
            }
        }
    }
}

impl ClearPositions for Expr {
    fn clear_positions(&mut self) {
        self.pos = Pos::default();
        match &mut self.kind {
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.clear_positions();
                rhs.clear_positions();
            }
            ExprKind::Not { operand } | ExprKind::AddressCast { operand } => {
                operand.clear_positions()
            }
            ExprKind::ExternalCall { target, args, .. } => {
                target.clear_positions();
                args.iter_mut().for_each(ClearPositions::clear_positions);
            }
            ExprKind::InternalCall { args, .. } => {
                args.iter_mut().for_each(ClearPositions::clear_positions);
            }
            ExprKind::Index { base, indices } => {
                base.clear_positions();
                indices.iter_mut().for_each(ClearPositions::clear_positions);
            }
            ExprKind::Int { .. }
            | ExprKind::Bool { .. }
            | ExprKind::Var { .. }
            | ExprKind::This
            | ExprKind::MsgSender => {}
        }
    }
}
