use crate::frontend::ir::*;
use crate::frontend::ParamSlot;

use super::{Action, BundleState, Control, ControlState, Machine, Overflow, SemanticsError};

const MAX_CALL_DEPTH: usize = 64;

/// Set of user slots, used to record which users' pre-state map values a
/// transaction depended on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReadSet {
    words: Vec<u64>,
}

impl ReadSet {
    pub fn insert(&mut self, slot: usize) {
        let (w, b) = (slot / 64, slot % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn contains(&self, slot: usize) -> bool {
        self.words
            .get(slot / 64)
            .is_some_and(|w| w & (1 << (slot % 64)) != 0)
    }

    pub fn clear(&mut self) {
        self.words.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64)
                .filter(move |b| w & (1 << b) != 0)
                .map(move |b| wi * 64 + b)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MapWrite {
    pub user: usize,
    pub map: usize,
    pub value: u64,
}

/// Net effect of a committed transaction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Commit {
    pub control: ControlState,
    /// Final value of every written map cell, at most one entry per cell,
    /// in first-write order.
    pub writes: Vec<MapWrite>,
}

impl Commit {
    pub fn apply_users(&self, users: &mut [super::UserRecord]) {
        for w in &self.writes {
            users[w.user].maps[w.map] = w.value;
        }
    }

    pub fn writes_user(&self, slot: usize) -> bool {
        self.writes.iter().any(|w| w.user == slot)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Effect {
    /// Reverted, guarded, or otherwise without observable change.
    Unchanged,
    /// The error state `s⊥`.
    Error,
    Commit(Commit),
}

impl Effect {
    pub fn apply(&self, pre: &BundleState) -> BundleState {
        match self {
            Effect::Unchanged => pre.clone(),
            Effect::Error => BundleState {
                control: Control::Error,
                users: pre.users.clone(),
            },
            Effect::Commit(c) => {
                let mut users = pre.users.clone();
                c.apply_users(&mut users);
                BundleState {
                    control: Control::Live(c.control.clone()),
                    users,
                }
            }
        }
    }
}

enum Abort {
    Revert,
    Error,
    Tool(SemanticsError),
}

impl From<SemanticsError> for Abort {
    fn from(e: SemanticsError) -> Self {
        Abort::Tool(e)
    }
}

enum Flow {
    Next,
    Return,
}

struct Frame {
    instance: usize,
    sender: u64,
    locals: Vec<u64>,
}

struct Exec<'m, 's, 'r> {
    m: &'m Machine<'m>,
    program: &'m Program,
    pre: &'s BundleState,
    control: ControlState,
    writes: Vec<MapWrite>,
    reads: &'r mut ReadSet,
    fuel: u64,
    depth: usize,
}

pub(super) fn execute(
    m: &Machine<'_>,
    state: &BundleState,
    action: &Action,
    reads: &mut ReadSet,
) -> Result<Effect, SemanticsError> {
    let bundle = m.bundle();
    let layout = &bundle.layout;
    let Control::Live(control) = &state.control else {
        return Err(SemanticsError::ErrorState);
    };
    if control.roles.len() != layout.roles.len()
        || control.data.len() != layout.data.len()
        || state.users.len() != m.addresses().len()
        || state
            .users
            .iter()
            .any(|u| u.maps.len() != layout.maps.len())
    {
        return Err(SemanticsError::BadState(format!(
            "expected {} roles, {} data, {} users with {} maps each",
            layout.roles.len(),
            layout.data.len(),
            m.addresses().len(),
            layout.maps.len()
        )));
    }
    let tx = layout
        .transactions
        .get(action.tx)
        .ok_or_else(|| SemanticsError::BadAction(format!("unknown transaction {}", action.tx)))?;
    if action.clients.len() != tx.clients.len() || action.args.len() != tx.args.len() {
        return Err(SemanticsError::BadAction(format!(
            "`{}` takes {} client(s) and {} argument(s)",
            tx.name,
            tx.clients.len(),
            tx.args.len()
        )));
    }
    for (slot, &v) in tx.args.iter().zip(&action.args) {
        let max = if slot.ty == crate::frontend::ast::Type::Bool {
            1
        } else {
            m.domain().max()
        };
        if v > max {
            return Err(SemanticsError::BadAction(format!(
                "argument `{}` = {v} is outside its domain",
                slot.name
            )));
        }
    }

    if action.clients.iter().any(|&c| m.slot_of(c).is_none()) {
        return Ok(Effect::Error);
    }
    let sender = action.sender();
    if state.users[..2].iter().any(|u| u.id == sender) {
        return Ok(Effect::Unchanged);
    }
    let is_ctor = action.tx == 0;
    if is_ctor == control.ctor_done {
        return Ok(Effect::Unchanged);
    }

    let program = &bundle.program;
    let function = program
        .tx_function(action.tx)
        .expect("layout and program agree on transactions");
    let mut locals = vec![0; function.n_locals];
    for (i, p) in tx.params.iter().enumerate() {
        locals[i] = match *p {
            ParamSlot::Client(c) => action.clients[c],
            ParamSlot::Arg(a) => action.args[a],
        };
    }
    let mut exec = Exec {
        m,
        program,
        pre: state,
        control: control.clone(),
        writes: Vec::new(),
        reads,
        fuel: m.fuel(),
        depth: 0,
    };
    let frame = Frame {
        instance: 0,
        sender,
        locals,
    };
    match exec.run(function, frame) {
        Ok(()) => {}
        Err(Abort::Revert) => return Ok(Effect::Unchanged),
        Err(Abort::Error) => return Ok(Effect::Error),
        Err(Abort::Tool(e)) => return Err(e),
    }
    if is_ctor {
        exec.control.ctor_done = true;
    }
    let Exec {
        control: post,
        writes,
        reads,
        ..
    } = exec;
    // Dropping no-op writes depends on the pre-state value, so it counts
    // as a read.
    for w in &writes {
        reads.insert(w.user);
    }
    let writes: Vec<_> = writes
        .into_iter()
        .filter(|w| state.users[w.user].maps[w.map] != w.value)
        .collect();
    if &post == control && writes.is_empty() {
        return Ok(Effect::Unchanged);
    }
    Ok(Effect::Commit(Commit {
        control: post,
        writes,
    }))
}

impl Exec<'_, '_, '_> {
    fn tick(&mut self) -> Result<(), Abort> {
        if self.fuel == 0 {
            return Err(Abort::Tool(SemanticsError::ResourceExhausted(
                self.m.fuel(),
            )));
        }
        self.fuel -= 1;
        Ok(())
    }

    fn instance(&self, frame: &Frame) -> &Instance {
        &self.program.instances[frame.instance]
    }

    fn run(&mut self, function: &IrFunction, mut frame: Frame) -> Result<(), Abort> {
        self.depth += 1;
        if self.depth > MAX_CALL_DEPTH {
            return Err(Abort::Tool(SemanticsError::CallDepth(MAX_CALL_DEPTH)));
        }
        self.block(&function.body, &mut frame)?;
        self.depth -= 1;
        Ok(())
    }

    fn block(&mut self, body: &[IStmt], frame: &mut Frame) -> Result<Flow, Abort> {
        for s in body {
            if let Flow::Return = self.stmt(s, frame)? {
                return Ok(Flow::Return);
            }
        }
        Ok(Flow::Next)
    }

    /// Resolves a literal address to the id of the user it maps to.
    fn literal(&self, address: u64) -> Result<u64, Abort> {
        match self.m.slot_of(address) {
            Some(slot) => Ok(self.pre.users[slot].id),
            None => Err(Abort::Error),
        }
    }

    /// Finds the user slot holding `address`.
    fn user_slot(&self, address: u64) -> Result<usize, Abort> {
        let users = &self.pre.users;
        if let Some(slot) = self.m.slot_of(address) {
            if users[slot].id == address {
                return Ok(slot);
            }
        }
        users
            .iter()
            .position(|u| u.id == address)
            .ok_or(Abort::Error)
    }

    fn arith(&self, op: ArithOp, a: u64, b: u64) -> Result<u64, Abort> {
        let domain = self.m.domain();
        let max = domain.max();
        let wide = match op {
            ArithOp::Add => a as u128 + b as u128,
            ArithOp::Mul => a as u128 * b as u128,
            ArithOp::Div => {
                if b == 0 {
                    return Err(Abort::Revert);
                }
                (a / b) as u128
            }
            ArithOp::Sub => {
                if a >= b {
                    (a - b) as u128
                } else {
                    match domain.overflow() {
                        Overflow::Checked => return Err(Abort::Revert),
                        Overflow::Wrap => return Ok(a.wrapping_sub(b) & max),
                    }
                }
            }
        };
        if wide > max as u128 {
            match domain.overflow() {
                Overflow::Checked => Err(Abort::Revert),
                Overflow::Wrap => Ok((wide as u64) & max),
            }
        } else {
            Ok(wide as u64)
        }
    }

    fn eval(&mut self, e: &IExpr, frame: &Frame) -> Result<u64, Abort> {
        Ok(match e {
            IExpr::Num(v) => v & self.m.domain().max(),
            IExpr::Addr(a) => self.literal(*a)?,
            IExpr::This => self.literal(self.instance(frame).address)?,
            IExpr::Sender => frame.sender,
            IExpr::Local(i) => frame.locals[*i],
            IExpr::Role(i) => self.control.roles[self.instance(frame).role_base + i],
            IExpr::Data(i) => self.control.data[self.instance(frame).data_base + i],
            IExpr::MapRead { map, key } => {
                let address = self.eval(key, frame)?;
                let user = self.user_slot(address)?;
                let map = self.instance(frame).map_base + map;
                match self
                    .writes
                    .iter()
                    .rev()
                    .find(|w| w.user == user && w.map == map)
                {
                    Some(w) => w.value,
                    None => {
                        self.reads.insert(user);
                        self.pre.users[user].maps[map]
                    }
                }
            }
            IExpr::Arith(op, a, b) => {
                let a = self.eval(a, frame)?;
                let b = self.eval(b, frame)?;
                self.arith(*op, a, b)?
            }
            IExpr::Cmp(op, a, b) => {
                let a = self.eval(a, frame)?;
                let b = self.eval(b, frame)?;
                let r = match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => a < b,
                    CmpOp::Gt => a > b,
                };
                r as u64
            }
            IExpr::And(a, b) => {
                if self.eval(a, frame)? == 0 {
                    0
                } else {
                    (self.eval(b, frame)? != 0) as u64
                }
            }
            IExpr::Or(a, b) => {
                if self.eval(a, frame)? != 0 {
                    1
                } else {
                    (self.eval(b, frame)? != 0) as u64
                }
            }
            IExpr::Not(a) => (self.eval(a, frame)? == 0) as u64,
        })
    }

    fn eval_args(
        &mut self,
        args: &[IExpr],
        frame: &Frame,
        n_locals: usize,
    ) -> Result<Vec<u64>, Abort> {
        let mut locals = Vec::with_capacity(n_locals);
        for a in args {
            let v = self.eval(a, frame)?;
            locals.push(v);
        }
        locals.resize(n_locals, 0);
        Ok(locals)
    }

    fn stmt(&mut self, s: &IStmt, frame: &mut Frame) -> Result<Flow, Abort> {
        self.tick()?;
        match s {
            IStmt::SetLocal(i, e) => {
                frame.locals[*i] = self.eval(e, frame)?;
            }
            IStmt::SetRole(i, e) => {
                let v = self.eval(e, frame)?;
                let base = self.instance(frame).role_base;
                self.control.roles[base + i] = v;
            }
            IStmt::SetData(i, e) => {
                let v = self.eval(e, frame)?;
                let base = self.instance(frame).data_base;
                self.control.data[base + i] = v;
            }
            IStmt::SetMap { map, key, value } => {
                let address = self.eval(key, frame)?;
                let user = self.user_slot(address)?;
                let value = self.eval(value, frame)?;
                let map = self.instance(frame).map_base + map;
                match self
                    .writes
                    .iter_mut()
                    .find(|w| w.user == user && w.map == map)
                {
                    Some(w) => w.value = value,
                    None => self.writes.push(MapWrite { user, map, value }),
                }
            }
            IStmt::Require(c) => {
                if self.eval(c, frame)? == 0 {
                    return Err(Abort::Revert);
                }
            }
            IStmt::Assert(c) => {
                if self.eval(c, frame)? == 0 {
                    return Err(Abort::Error);
                }
            }
            IStmt::Return => return Ok(Flow::Return),
            IStmt::If(c, body) => {
                if self.eval(c, frame)? != 0 {
                    return self.block(body, frame);
                }
            }
            IStmt::While(c, body) => {
                while self.eval(c, frame)? != 0 {
                    self.tick()?;
                    if let Flow::Return = self.block(body, frame)? {
                        return Ok(Flow::Return);
                    }
                }
            }
            IStmt::CallInternal { function, args } => {
                let program = self.program;
                let callee = &program.contracts[self.instance(frame).contract].functions[*function];
                let locals = self.eval_args(args, frame, callee.n_locals)?;
                let callee_frame = Frame {
                    instance: frame.instance,
                    sender: frame.sender,
                    locals,
                };
                self.run(callee, callee_frame)?;
            }
            IStmt::CallExternal {
                target,
                contract,
                function,
                args,
            } => {
                let address = self.eval(target, frame)?;
                let program = self.program;
                let Some(instance) = program.instances.iter().position(|i| {
                    i.contract == *contract && self.literal(i.address).ok() == Some(address)
                }) else {
                    return Err(Abort::Revert);
                };
                let callee = &program.contracts[*contract].functions[*function];
                let locals = self.eval_args(args, frame, callee.n_locals)?;
                let callee_frame = Frame {
                    instance,
                    sender: self.literal(self.instance(frame).address)?,
                    locals,
                };
                self.run(callee, callee_frame)?;
            }
            IStmt::New { site, args, target } => {
                let program = self.program;
                let child = self.instance(frame).children[*site];
                let child_inst = &program.instances[child];
                let child_address = self.literal(child_inst.address)?;
                let ctor = &program.contracts[child_inst.contract].ctor;
                let locals = self.eval_args(args, frame, ctor.n_locals)?;
                let child_frame = Frame {
                    instance: child,
                    sender: self.literal(self.instance(frame).address)?,
                    locals,
                };
                self.run(ctor, child_frame)?;
                match *target {
                    Place::Local(i) => frame.locals[i] = child_address,
                    Place::Role(i) => {
                        let base = self.instance(frame).role_base;
                        self.control.roles[base + i] = child_address;
                    }
                }
            }
        }
        Ok(Flow::Next)
    }
}
