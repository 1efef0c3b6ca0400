//! Name-resolved, type-checked form of a bundle that the interpreter and the
//! taint analysis walk instead of the syntax tree.
//!
//! State accesses use indices relative to the owning contract; each
//! [`Instance`] supplies the offsets into the global control state.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValType {
    Uint,
    Bool,
    Address,
    /// Reference to an instance of the contract with this index.
    Contract(usize),
}

impl ValType {
    pub fn is_address_like(self) -> bool {
        matches!(self, ValType::Address | ValType::Contract(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IExpr {
    Num(u64),
    /// A literal address; resolved through the address map at run time.
    Addr(u64),
    /// The executing instance's own address, resolved like a literal.
    This,
    Sender,
    Local(usize),
    Role(usize),
    Data(usize),
    MapRead {
        map: usize,
        key: Box<IExpr>,
    },
    Arith(ArithOp, Box<IExpr>, Box<IExpr>),
    Cmp(CmpOp, Box<IExpr>, Box<IExpr>),
    And(Box<IExpr>, Box<IExpr>),
    Or(Box<IExpr>, Box<IExpr>),
    Not(Box<IExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Local(usize),
    Role(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IStmt {
    SetLocal(usize, IExpr),
    SetRole(usize, IExpr),
    SetData(usize, IExpr),
    SetMap {
        map: usize,
        key: IExpr,
        value: IExpr,
    },
    Require(IExpr),
    Assert(IExpr),
    Return,
    If(IExpr, Vec<IStmt>),
    While(IExpr, Vec<IStmt>),
    CallInternal {
        function: usize,
        args: Vec<IExpr>,
    },
    CallExternal {
        target: IExpr,
        contract: usize,
        function: usize,
        args: Vec<IExpr>,
    },
    /// Runs the constructor of the instance statically allocated for `site`
    /// and stores its address in `target`.
    New {
        site: usize,
        args: Vec<IExpr>,
        target: Place,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrFunction {
    pub name: String,
    pub params: Vec<ValType>,
    pub n_locals: usize,
    pub body: Vec<IStmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractIr {
    pub name: String,
    pub ctor: IrFunction,
    pub functions: Vec<IrFunction>,
    pub n_roles: usize,
    pub n_data: usize,
    pub n_maps: usize,
    /// Contract index instantiated at each `new` site, in source order.
    pub sites: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub contract: usize,
    pub address: u64,
    pub role_base: usize,
    pub data_base: usize,
    pub map_base: usize,
    /// Instance index created by each `new` site of this instance's contract.
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub contracts: Vec<ContractIr>,
    /// Instance 0 is the root contract account.
    pub instances: Vec<Instance>,
}

impl Program {
    pub fn root(&self) -> &ContractIr {
        &self.contracts[self.instances[0].contract]
    }

    /// The transactions a user can invoke: the root constructor followed by
    /// the root functions in declaration order.
    pub fn tx_function(&self, tx: usize) -> Option<&IrFunction> {
        let root = self.root();
        if tx == 0 {
            Some(&root.ctor)
        } else {
            root.functions.get(tx - 1)
        }
    }

    pub fn instance_at(&self, address: u64) -> Option<usize> {
        self.instances.iter().position(|i| i.address == address)
    }
}
