//! Static checks, variable layout and lowering to [`Program`].

use std::collections::HashMap;

use serde::Serialize;

use super::ast::*;
use super::error::{FrontendError, Rule, ValidationError};
use super::ir::*;

/// Address of the root contract account.
pub const ROOT_ADDRESS: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateSlot {
    pub name: String,
    pub ty: Type,
    pub instance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArgSlot {
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TxLayout {
    pub name: String,
    /// Client names; slot 0 is always `msg.sender`.
    pub clients: Vec<String>,
    pub args: Vec<ArgSlot>,
    /// For each declared parameter, its client or argument slot.
    #[serde(skip)]
    pub params: Vec<ParamSlot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSlot {
    Client(usize),
    Arg(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceInfo {
    pub contract: String,
    pub address: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariableLayout {
    pub roles: Vec<StateSlot>,
    pub data: Vec<StateSlot>,
    pub maps: Vec<StateSlot>,
    pub transactions: Vec<TxLayout>,
    pub instances: Vec<InstanceInfo>,
}

impl VariableLayout {
    pub fn tx_index(&self, name: &str) -> Option<usize> {
        self.transactions.iter().position(|t| t.name == name)
    }

    pub fn role_index(&self, name: &str) -> Option<usize> {
        self.roles.iter().position(|s| s.name == name)
    }

    pub fn data_index(&self, name: &str) -> Option<usize> {
        self.data.iter().position(|s| s.name == name)
    }

    pub fn map_index(&self, name: &str) -> Option<usize> {
        self.maps.iter().position(|s| s.name == name)
    }

    /// Whether datum `i` only ranges over `{0, 1}`.
    pub fn data_is_bool(&self, i: usize) -> bool {
        self.data[i].ty == Type::Bool
    }

    /// Addresses of every contract account, root first.
    pub fn contract_addresses(&self) -> Vec<u64> {
        self.instances.iter().map(|i| i.address).collect()
    }
}

/// A validated bundle: syntax tree, variable layout and lowered program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractBundle {
    pub ast: SourceUnit,
    pub layout: VariableLayout,
    pub program: Program,
}

impl ContractBundle {
    pub fn from_source(src: &str) -> Result<Self, FrontendError> {
        let ast = super::parser::parse(src)?;
        Ok(validate(ast)?)
    }

    pub fn tx_name(&self, tx: usize) -> &str {
        &self.layout.transactions[tx].name
    }

    /// `(clients, args)` counts of a root transaction. Clients include
    /// `msg.sender`.
    pub fn arity(&self, function: &str) -> Result<(usize, usize), FrontendError> {
        let tx = self
            .layout
            .tx_index(function)
            .ok_or_else(|| FrontendError::UnknownFunction(function.to_string()))?;
        let t = &self.layout.transactions[tx];
        Ok((t.clients.len(), t.args.len()))
    }
}

#[derive(Debug, Clone, Copy)]
enum StateRef {
    Role(usize),
    Data(usize),
    Map(usize),
}

struct ContractInfo {
    state: HashMap<String, (StateRef, ValType)>,
    /// Function name to (index, parameter types).
    functions: HashMap<String, (usize, Vec<ValType>)>,
    ctor_params: Vec<ValType>,
    n_roles: usize,
    n_data: usize,
    n_maps: usize,
}

pub fn validate(ast: SourceUnit) -> Result<ContractBundle, ValidationError> {
    let mut contract_idx: HashMap<&str, usize> = HashMap::new();
    for (i, c) in ast.contracts.iter().enumerate() {
        if contract_idx.insert(&c.name, i).is_some() {
            return Err(ValidationError::new(
                Rule::DuplicateContract,
                c.pos,
                format!("contract `{}` is declared twice", c.name),
            ));
        }
    }

    let resolve_ty = |ty: &Type, pos: Pos| -> Result<ValType, ValidationError> {
        match ty {
            Type::Uint => Ok(ValType::Uint),
            Type::Bool => Ok(ValType::Bool),
            Type::Address => Ok(ValType::Address),
            Type::Contract { name } => contract_idx
                .get(name.as_str())
                .map(|&i| ValType::Contract(i))
                .ok_or_else(|| {
                    ValidationError::new(
                        Rule::UnknownContract,
                        pos,
                        format!("unknown contract `{name}`"),
                    )
                }),
            Type::Mapping { .. } => Err(ValidationError::new(
                Rule::MappingNotState,
                pos,
                "mappings may only be state variables",
            )),
        }
    };

    let mut infos = Vec::with_capacity(ast.contracts.len());
    for c in &ast.contracts {
        let mut state = HashMap::new();
        let (mut n_roles, mut n_data, mut n_maps) = (0, 0, 0);
        for v in &c.state_vars {
            let entry = match &v.ty {
                Type::Mapping { key, value } => {
                    if **key != Type::Address || **value != Type::Uint {
                        return Err(ValidationError::new(
                            Rule::MappingShape,
                            v.pos,
                            format!(
                                "mapping `{}` must have type mapping(address => uint)",
                                v.name
                            ),
                        ));
                    }
                    n_maps += 1;
                    (StateRef::Map(n_maps - 1), ValType::Uint)
                }
                ty => {
                    let vt = resolve_ty(ty, v.pos)?;
                    if vt.is_address_like() {
                        n_roles += 1;
                        (StateRef::Role(n_roles - 1), vt)
                    } else {
                        n_data += 1;
                        (StateRef::Data(n_data - 1), vt)
                    }
                }
            };
            if state.insert(v.name.clone(), entry).is_some() {
                return Err(ValidationError::new(
                    Rule::DuplicateStateVar,
                    v.pos,
                    format!("state variable `{}` is declared twice", v.name),
                ));
            }
        }
        let param_types = |f: &FunctionDecl| -> Result<Vec<ValType>, ValidationError> {
            f.params
                .iter()
                .map(|p| {
                    let vt = resolve_ty(&p.ty, p.pos)?;
                    if let ValType::Contract(_) = vt {
                        return Err(ValidationError::new(
                            Rule::ContractParam,
                            p.pos,
                            "contract references cannot be passed as parameters",
                        ));
                    }
                    Ok(vt)
                })
                .collect()
        };
        let mut functions = HashMap::new();
        for (i, f) in c.functions.iter().enumerate() {
            let params = param_types(f)?;
            if functions.insert(f.name.clone(), (i, params)).is_some() {
                return Err(ValidationError::new(
                    Rule::DuplicateFunction,
                    f.pos,
                    format!("function `{}` is declared twice", f.name),
                ));
            }
        }
        infos.push(ContractInfo {
            state,
            functions,
            ctor_params: param_types(&c.constructor)?,
            n_roles,
            n_data,
            n_maps,
        });
    }

    let mut contracts = Vec::with_capacity(ast.contracts.len());
    for (ci, c) in ast.contracts.iter().enumerate() {
        let mut sites = Vec::new();
        let ctor = lower_function(&c.constructor, ci, true, &infos, &contract_idx, &mut sites)?;
        let functions = c
            .functions
            .iter()
            .map(|f| lower_function(f, ci, false, &infos, &contract_idx, &mut sites))
            .collect::<Result<Vec<_>, _>>()?;
        contracts.push(ContractIr {
            name: c.name.clone(),
            ctor,
            functions,
            n_roles: infos[ci].n_roles,
            n_data: infos[ci].n_data,
            n_maps: infos[ci].n_maps,
            sites,
        });
    }

    let instances = allocate_instances(&ast, &contracts)?;
    let layout = build_layout(&ast, &instances);
    Ok(ContractBundle {
        ast,
        layout,
        program: Program {
            contracts,
            instances,
        },
    })
}

fn allocate_instances(
    ast: &SourceUnit,
    contracts: &[ContractIr],
) -> Result<Vec<Instance>, ValidationError> {
    fn visit(
        contract: usize,
        ast: &SourceUnit,
        contracts: &[ContractIr],
        stack: &mut Vec<usize>,
        out: &mut Vec<Instance>,
        bases: &mut (usize, usize, usize),
    ) -> Result<usize, ValidationError> {
        if stack.contains(&contract) {
            return Err(ValidationError::new(
                Rule::RecursiveInstantiation,
                ast.contracts[contract].pos,
                format!(
                    "contract `{}` transitively instantiates itself",
                    ast.contracts[contract].name
                ),
            ));
        }
        let c = &contracts[contract];
        let id = out.len();
        out.push(Instance {
            contract,
            address: ROOT_ADDRESS + id as u64,
            role_base: bases.0,
            data_base: bases.1,
            map_base: bases.2,
            children: Vec::new(),
        });
        bases.0 += c.n_roles;
        bases.1 += c.n_data;
        bases.2 += c.n_maps;
        stack.push(contract);
        let mut children = Vec::with_capacity(c.sites.len());
        for &child in &c.sites {
            children.push(visit(child, ast, contracts, stack, out, bases)?);
        }
        stack.pop();
        out[id].children = children;
        Ok(id)
    }

    let mut out = Vec::new();
    visit(0, ast, contracts, &mut Vec::new(), &mut out, &mut (0, 0, 0))?;
    Ok(out)
}

fn build_layout(ast: &SourceUnit, instances: &[Instance]) -> VariableLayout {
    let mut roles = Vec::new();
    let mut data = Vec::new();
    let mut maps = Vec::new();
    for (ii, inst) in instances.iter().enumerate() {
        let c = &ast.contracts[inst.contract];
        for v in &c.state_vars {
            let name = if ii == 0 {
                v.name.clone()
            } else {
                format!("{}@{}.{}", c.name, inst.address, v.name)
            };
            let slot = StateSlot {
                name,
                ty: v.ty.clone(),
                instance: ii,
            };
            match v.ty {
                Type::Mapping { .. } => maps.push(slot),
                Type::Address | Type::Contract { .. } => roles.push(slot),
                Type::Uint | Type::Bool => data.push(slot),
            }
        }
    }

    let root = &ast.contracts[0];
    let transactions = std::iter::once(&root.constructor)
        .chain(root.functions.iter())
        .map(|f| {
            let mut clients = vec!["msg.sender".to_string()];
            let mut args = Vec::new();
            let mut params = Vec::new();
            for p in &f.params {
                if p.ty == Type::Address {
                    params.push(ParamSlot::Client(clients.len()));
                    clients.push(p.name.clone());
                } else {
                    params.push(ParamSlot::Arg(args.len()));
                    args.push(ArgSlot {
                        name: p.name.clone(),
                        ty: p.ty.clone(),
                    });
                }
            }
            TxLayout {
                name: f.name.clone(),
                clients,
                args,
                params,
            }
        })
        .collect();

    VariableLayout {
        roles,
        data,
        maps,
        transactions,
        instances: instances
            .iter()
            .map(|i| InstanceInfo {
                contract: ast.contracts[i.contract].name.clone(),
                address: i.address,
            })
            .collect(),
    }
}

struct Lowerer<'a> {
    contract: usize,
    infos: &'a [ContractInfo],
    contract_idx: &'a HashMap<&'a str, usize>,
    scopes: Vec<HashMap<String, (usize, ValType)>>,
    n_locals: usize,
    in_ctor: bool,
    loop_depth: usize,
    sites: &'a mut Vec<usize>,
}

fn lower_function(
    f: &FunctionDecl,
    contract: usize,
    in_ctor: bool,
    infos: &[ContractInfo],
    contract_idx: &HashMap<&str, usize>,
    sites: &mut Vec<usize>,
) -> Result<IrFunction, ValidationError> {
    let params = if in_ctor {
        infos[contract].ctor_params.clone()
    } else {
        infos[contract].functions[&f.name].1.clone()
    };
    let mut lw = Lowerer {
        contract,
        infos,
        contract_idx,
        scopes: vec![HashMap::new()],
        n_locals: 0,
        in_ctor,
        loop_depth: 0,
        sites,
    };
    for (p, &ty) in f.params.iter().zip(&params) {
        lw.declare(&p.name, ty, p.pos)?;
    }
    let body = lw.block(&f.body)?;
    Ok(IrFunction {
        name: f.name.clone(),
        params,
        n_locals: lw.n_locals,
        body,
    })
}

fn type_name(ty: ValType, infos_names: &HashMap<&str, usize>) -> String {
    match ty {
        ValType::Uint => "uint".into(),
        ValType::Bool => "bool".into(),
        ValType::Address => "address".into(),
        ValType::Contract(i) => infos_names
            .iter()
            .find(|(_, &v)| v == i)
            .map(|(k, _)| k.to_string())
            .unwrap_or_else(|| format!("contract#{i}")),
    }
}

impl Lowerer<'_> {
    fn info(&self) -> &ContractInfo {
        &self.infos[self.contract]
    }

    fn tn(&self, ty: ValType) -> String {
        type_name(ty, self.contract_idx)
    }

    fn declare(&mut self, name: &str, ty: ValType, pos: Pos) -> Result<usize, ValidationError> {
        if self.lookup_local(name).is_some() {
            return Err(ValidationError::new(
                Rule::DuplicateLocal,
                pos,
                format!("`{name}` is already declared in this scope"),
            ));
        }
        let slot = self.n_locals;
        self.n_locals += 1;
        self.scopes
            .last_mut()
            .expect("scope stack is never empty")
            .insert(name.to_string(), (slot, ty));
        Ok(slot)
    }

    fn lookup_local(&self, name: &str) -> Option<(usize, ValType)> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<Vec<IStmt>, ValidationError> {
        self.scopes.push(HashMap::new());
        let out = stmts
            .iter()
            .map(|s| self.stmt(s))
            .collect::<Result<Vec<_>, _>>();
        self.scopes.pop();
        out
    }

    fn expect_type(
        &self,
        got: ValType,
        want: ValType,
        pos: Pos,
        what: &str,
    ) -> Result<(), ValidationError> {
        if got == want {
            Ok(())
        } else {
            Err(ValidationError::new(
                Rule::TypeMismatch,
                pos,
                format!(
                    "{what} has type {}, expected {}",
                    self.tn(got),
                    self.tn(want)
                ),
            ))
        }
    }

    fn cond(&self, e: &Expr) -> Result<IExpr, ValidationError> {
        let (ie, ty) = self.expr(e)?;
        self.expect_type(ty, ValType::Bool, e.pos, "condition")?;
        Ok(ie)
    }

    fn args(
        &self,
        args: &[Expr],
        params: &[ValType],
        pos: Pos,
        callee: &str,
    ) -> Result<Vec<IExpr>, ValidationError> {
        if args.len() != params.len() {
            return Err(ValidationError::new(
                Rule::ArityMismatch,
                pos,
                format!(
                    "`{callee}` takes {} argument(s), {} given",
                    params.len(),
                    args.len()
                ),
            ));
        }
        args.iter()
            .zip(params)
            .map(|(a, &want)| {
                let (ie, ty) = self.expr(a)?;
                self.expect_type(ty, want, a.pos, "argument")?;
                Ok(ie)
            })
            .collect()
    }

    fn stmt(&mut self, s: &Stmt) -> Result<IStmt, ValidationError> {
        match s {
            Stmt::Decl { decl } => {
                if let Type::Mapping { .. } = decl.ty {
                    return Err(ValidationError::new(
                        Rule::MappingNotState,
                        decl.pos,
                        "mappings may only be state variables",
                    ));
                }
                let ty = match &decl.ty {
                    Type::Uint => ValType::Uint,
                    Type::Bool => ValType::Bool,
                    Type::Address => ValType::Address,
                    Type::Contract { name } => self
                        .contract_idx
                        .get(name.as_str())
                        .map(|&i| ValType::Contract(i))
                        .ok_or_else(|| {
                            ValidationError::new(
                                Rule::UnknownContract,
                                decl.pos,
                                format!("unknown contract `{name}`"),
                            )
                        })?,
                    Type::Mapping { .. } => unreachable!("rejected above"),
                };
                let slot = self.declare(&decl.name, ty, decl.pos)?;
                Ok(IStmt::SetLocal(slot, IExpr::Num(0)))
            }
            Stmt::Assign { target, value, pos } => {
                let (ie, vty) = self.expr(value)?;
                if let Some((slot, ty)) = self.lookup_local(target) {
                    self.expect_type(vty, ty, value.pos, "assigned value")?;
                    return Ok(IStmt::SetLocal(slot, ie));
                }
                match self.info().state.get(target) {
                    Some(&(StateRef::Role(i), ty)) => {
                        self.expect_type(vty, ty, value.pos, "assigned value")?;
                        Ok(IStmt::SetRole(i, ie))
                    }
                    Some(&(StateRef::Data(i), ty)) => {
                        self.expect_type(vty, ty, value.pos, "assigned value")?;
                        Ok(IStmt::SetData(i, ie))
                    }
                    Some(&(StateRef::Map(_), _)) => Err(ValidationError::new(
                        Rule::InvalidAssignTarget,
                        *pos,
                        format!("mapping `{target}` cannot be assigned as a whole"),
                    )),
                    None => Err(ValidationError::new(
                        Rule::UnknownVariable,
                        *pos,
                        format!("unknown variable `{target}`"),
                    )),
                }
            }
            Stmt::IndexAssign {
                base,
                indices,
                value,
                pos,
            } => {
                let (map, key) = self.index(base, indices, *pos)?;
                let (ie, vty) = self.expr(value)?;
                self.expect_type(vty, ValType::Uint, value.pos, "mapping value")?;
                Ok(IStmt::SetMap {
                    map,
                    key,
                    value: ie,
                })
            }
            Stmt::New {
                target,
                contract,
                args,
                pos,
            } => {
                if !self.in_ctor {
                    return Err(ValidationError::new(
                        Rule::NewInConstructorOnly,
                        *pos,
                        "`new` may only appear in constructors",
                    ));
                }
                if self.loop_depth > 0 {
                    return Err(ValidationError::new(
                        Rule::NewInLoop,
                        *pos,
                        "`new` inside a loop cannot be allocated statically",
                    ));
                }
                let &callee = self.contract_idx.get(contract.as_str()).ok_or_else(|| {
                    ValidationError::new(
                        Rule::UnknownContract,
                        *pos,
                        format!("unknown contract `{contract}`"),
                    )
                })?;
                let ExprKind::Var { name } = &target.kind else {
                    return Err(ValidationError::new(
                        Rule::InvalidAssignTarget,
                        target.pos,
                        "the result of `new` must be stored in a variable",
                    ));
                };
                let (place, ty) = if let Some((slot, ty)) = self.lookup_local(name) {
                    (Place::Local(slot), ty)
                } else {
                    match self.info().state.get(name) {
                        Some(&(StateRef::Role(i), ty)) => (Place::Role(i), ty),
                        Some(&(_, ty)) => (Place::Role(usize::MAX), ty),
                        None => {
                            return Err(ValidationError::new(
                                Rule::UnknownVariable,
                                target.pos,
                                format!("unknown variable `{name}`"),
                            ))
                        }
                    }
                };
                self.expect_type(ValType::Contract(callee), ty, target.pos, "new instance")?;
                let args = self.args(args, &self.infos[callee].ctor_params, *pos, contract)?;
                let site = self.sites.len();
                self.sites.push(callee);
                Ok(IStmt::New {
                    site,
                    args,
                    target: place,
                })
            }
            Stmt::Require { cond, .. } => Ok(IStmt::Require(self.cond(cond)?)),
            Stmt::Assert { cond, .. } => Ok(IStmt::Assert(self.cond(cond)?)),
            Stmt::Return { .. } => Ok(IStmt::Return),
            Stmt::If { cond, body, .. } => {
                let c = self.cond(cond)?;
                Ok(IStmt::If(c, self.block(body)?))
            }
            Stmt::While { cond, body, .. } => {
                let c = self.cond(cond)?;
                self.loop_depth += 1;
                let body = self.block(body);
                self.loop_depth -= 1;
                Ok(IStmt::While(c, body?))
            }
            Stmt::Call { call, pos } => match &call.kind {
                ExprKind::InternalCall { function, args } => {
                    let (idx, params) =
                        self.info()
                            .functions
                            .get(function)
                            .cloned()
                            .ok_or_else(|| {
                                ValidationError::new(
                                    Rule::UnknownFunction,
                                    *pos,
                                    format!("unknown function `{function}`"),
                                )
                            })?;
                    let args = self.args(args, &params, *pos, function)?;
                    Ok(IStmt::CallInternal {
                        function: idx,
                        args,
                    })
                }
                ExprKind::ExternalCall {
                    target,
                    function,
                    args,
                } => {
                    let (t, ty) = self.expr(target)?;
                    let ValType::Contract(callee) = ty else {
                        return Err(ValidationError::new(
                            Rule::TypeMismatch,
                            target.pos,
                            "call target must be a contract reference",
                        ));
                    };
                    let (idx, params) = self.infos[callee]
                        .functions
                        .get(function)
                        .cloned()
                        .ok_or_else(|| {
                            ValidationError::new(
                                Rule::UnknownFunction,
                                *pos,
                                format!("unknown function `{function}`"),
                            )
                        })?;
                    let args = self.args(args, &params, *pos, function)?;
                    Ok(IStmt::CallExternal {
                        target: t,
                        contract: callee,
                        function: idx,
                        args,
                    })
                }
                _ => unreachable!("the parser only builds call statements from calls"),
            },
        }
    }

    fn index(
        &self,
        base: &Expr,
        indices: &[Expr],
        pos: Pos,
    ) -> Result<(usize, IExpr), ValidationError> {
        let map = match &base.kind {
            ExprKind::Var { name } if self.lookup_local(name).is_none() => {
                match self.info().state.get(name) {
                    Some(&(StateRef::Map(i), _)) => Some(i),
                    _ => None,
                }
            }
            _ => None,
        };
        let map = map.ok_or_else(|| {
            ValidationError::new(
                Rule::IndexNonMapping,
                base.pos,
                "only mapping state variables can be indexed",
            )
        })?;
        if indices.len() != 1 {
            return Err(ValidationError::new(
                Rule::IndexArity,
                pos,
                "mappings take exactly one index",
            ));
        }
        let (key, kty) = self.expr(&indices[0])?;
        if kty != ValType::Address {
            return Err(ValidationError::new(
                Rule::TypeMismatch,
                indices[0].pos,
                format!("mapping keys are addresses, found {}", self.tn(kty)),
            ));
        }
        Ok((map, key))
    }

    fn expr(&self, e: &Expr) -> Result<(IExpr, ValType), ValidationError> {
        match &e.kind {
            ExprKind::Int { value } => Ok((IExpr::Num(*value), ValType::Uint)),
            ExprKind::Bool { value } => Ok((IExpr::Num(*value as u64), ValType::Bool)),
            ExprKind::Var { name } => {
                if let Some((slot, ty)) = self.lookup_local(name) {
                    return Ok((IExpr::Local(slot), ty));
                }
                match self.info().state.get(name) {
                    Some(&(StateRef::Role(i), ty)) => Ok((IExpr::Role(i), ty)),
                    Some(&(StateRef::Data(i), ty)) => Ok((IExpr::Data(i), ty)),
                    Some(&(StateRef::Map(_), _)) => Err(ValidationError::new(
                        Rule::TypeMismatch,
                        e.pos,
                        format!("mapping `{name}` cannot be used as a value"),
                    )),
                    None => Err(ValidationError::new(
                        Rule::UnknownVariable,
                        e.pos,
                        format!("unknown variable `{name}`"),
                    )),
                }
            }
            ExprKind::This => Ok((IExpr::This, ValType::Address)),
            ExprKind::MsgSender => Ok((IExpr::Sender, ValType::Address)),
            ExprKind::Binary { op, lhs, rhs } => {
                let (l, lt) = self.expr(lhs)?;
                let (r, rt) = self.expr(rhs)?;
                let arith = |aop| -> Result<(IExpr, ValType), ValidationError> {
                    self.numeric_operands(lt, rt, e.pos, op.symbol())?;
                    Ok((
                        IExpr::Arith(aop, Box::new(l.clone()), Box::new(r.clone())),
                        ValType::Uint,
                    ))
                };
                match op {
                    BinOp::Add => arith(ArithOp::Add),
                    BinOp::Sub => arith(ArithOp::Sub),
                    BinOp::Mul => arith(ArithOp::Mul),
                    BinOp::Div => arith(ArithOp::Div),
                    BinOp::Lt | BinOp::Gt => {
                        self.numeric_operands(lt, rt, e.pos, op.symbol())?;
                        let c = if *op == BinOp::Lt {
                            CmpOp::Lt
                        } else {
                            CmpOp::Gt
                        };
                        Ok((IExpr::Cmp(c, Box::new(l), Box::new(r)), ValType::Bool))
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if lt != rt {
                            return Err(ValidationError::new(
                                Rule::TypeMismatch,
                                e.pos,
                                format!("cannot compare {} with {}", self.tn(lt), self.tn(rt)),
                            ));
                        }
                        let c = if *op == BinOp::Eq {
                            CmpOp::Eq
                        } else {
                            CmpOp::Ne
                        };
                        Ok((IExpr::Cmp(c, Box::new(l), Box::new(r)), ValType::Bool))
                    }
                    BinOp::And | BinOp::Or => {
                        self.expect_type(lt, ValType::Bool, lhs.pos, "operand")?;
                        self.expect_type(rt, ValType::Bool, rhs.pos, "operand")?;
                        let ie = if *op == BinOp::And {
                            IExpr::And(Box::new(l), Box::new(r))
                        } else {
                            IExpr::Or(Box::new(l), Box::new(r))
                        };
                        Ok((ie, ValType::Bool))
                    }
                }
            }
            ExprKind::Not { operand } => {
                let (o, ot) = self.expr(operand)?;
                self.expect_type(ot, ValType::Bool, operand.pos, "operand")?;
                Ok((IExpr::Not(Box::new(o)), ValType::Bool))
            }
            ExprKind::AddressCast { operand } => {
                if let ExprKind::Int { value } = operand.kind {
                    return Ok((IExpr::Addr(value), ValType::Address));
                }
                let (o, ot) = self.expr(operand)?;
                if ot.is_address_like() {
                    Ok((o, ValType::Address))
                } else {
                    Err(ValidationError::new(
                        Rule::NoNumericCast,
                        e.pos,
                        "numeric values cannot be cast to addresses",
                    ))
                }
            }
            ExprKind::ExternalCall { .. } | ExprKind::InternalCall { .. } => {
                Err(ValidationError::new(
                    Rule::CallAsValue,
                    e.pos,
                    "functions return no value; calls may only be statements",
                ))
            }
            ExprKind::Index { base, indices } => {
                let (map, key) = self.index(base, indices, e.pos)?;
                Ok((
                    IExpr::MapRead {
                        map,
                        key: Box::new(key),
                    },
                    ValType::Uint,
                ))
            }
        }
    }

    fn numeric_operands(
        &self,
        lt: ValType,
        rt: ValType,
        pos: Pos,
        op: &str,
    ) -> Result<(), ValidationError> {
        if lt.is_address_like() || rt.is_address_like() {
            return Err(ValidationError::new(
                Rule::AddressArithmetic,
                pos,
                format!("operator `{op}` is not defined on addresses"),
            ));
        }
        if lt != ValType::Uint || rt != ValType::Uint {
            return Err(ValidationError::new(
                Rule::TypeMismatch,
                pos,
                format!("operator `{op}` requires uint operands"),
            ));
        }
        Ok(())
    }
}
