use std::collections::BTreeSet;

use crate::frontend::ir::*;
use crate::frontend::{ContractBundle, ParamSlot};

use super::TaintSummary;

/// Where an address value may have come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Origin {
    Client(usize),
    Role(usize),
    Lit(u64),
}

type Taint = BTreeSet<Origin>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FnRef {
    Ctor,
    Func(usize),
}

#[derive(Debug, Default, Clone)]
struct FnTaint {
    reached: bool,
    sender: Taint,
    locals: Vec<Taint>,
}

struct Analysis<'p> {
    program: &'p Program,
    /// Indexed by instance, then constructor followed by functions.
    fns: Vec<Vec<FnTaint>>,
    sinks: Taint,
    changed: bool,
}

fn slot(f: FnRef) -> usize {
    match f {
        FnRef::Ctor => 0,
        FnRef::Func(i) => i + 1,
    }
}

/// Flow-insensitive taint analysis of address values into sinks: address
/// comparisons, mapping keys and call targets.
///
/// Every bundle also reports client 0 and literals 0 and 1, because the
/// semantics compares each sender against the zero and contract accounts.
pub fn taint_summary(bundle: &ContractBundle) -> TaintSummary {
    let program = &bundle.program;
    let fns = program
        .instances
        .iter()
        .map(|inst| {
            let c = &program.contracts[inst.contract];
            std::iter::once(&c.ctor)
                .chain(&c.functions)
                .map(|f| FnTaint {
                    locals: vec![Taint::new(); f.n_locals],
                    ..FnTaint::default()
                })
                .collect()
        })
        .collect();
    let mut a = Analysis {
        program,
        fns,
        sinks: Taint::new(),
        changed: false,
    };

    for (tx, layout) in bundle.layout.transactions.iter().enumerate() {
        let f = if tx == 0 {
            FnRef::Ctor
        } else {
            FnRef::Func(tx - 1)
        };
        let entry = &mut a.fns[0][slot(f)];
        entry.reached = true;
        entry.sender.insert(Origin::Client(0));
        for (i, p) in layout.params.iter().enumerate() {
            if let ParamSlot::Client(c) = *p {
                entry.locals[i].insert(Origin::Client(c));
            }
        }
    }

    loop {
        a.changed = false;
        for inst in 0..program.instances.len() {
            let c = &program.contracts[program.instances[inst].contract];
            let bodies = std::iter::once((FnRef::Ctor, &c.ctor)).chain(
                c.functions
                    .iter()
                    .enumerate()
                    .map(|(i, f)| (FnRef::Func(i), f)),
            );
            for (f, ir) in bodies {
                if a.fns[inst][slot(f)].reached {
                    a.block(inst, f, &ir.body);
                }
            }
        }
        if !a.changed {
            break;
        }
    }

    let mut summary = TaintSummary::default();
    summary.args.insert(0);
    summary.lits.extend([0, 1]);
    summary
        .lits
        .extend(program.instances.iter().skip(1).map(|i| i.address));
    for o in a.sinks {
        match o {
            Origin::Client(i) => summary.args.insert(i),
            Origin::Role(r) => summary.roles.insert(r),
            Origin::Lit(l) => summary.lits.insert(l),
        };
    }
    summary
}

impl Analysis<'_> {
    fn join(&mut self, inst: usize, f: FnRef, local: Option<usize>, t: &Taint) {
        let target = &mut self.fns[inst][slot(f)];
        if !target.reached {
            target.reached = true;
            self.changed = true;
        }
        let set = match local {
            Some(i) => &mut target.locals[i],
            None => &mut target.sender,
        };
        for o in t {
            self.changed |= set.insert(*o);
        }
    }

    fn sink(&mut self, t: Taint) {
        self.sinks.extend(t);
    }

    fn block(&mut self, inst: usize, f: FnRef, body: &[IStmt]) {
        for s in body {
            self.stmt(inst, f, s);
        }
    }

    fn stmt(&mut self, inst: usize, f: FnRef, s: &IStmt) {
        let instance = &self.program.instances[inst];
        match s {
            IStmt::SetLocal(i, e) => {
                let t = self.expr(inst, f, e);
                self.join(inst, f, Some(*i), &t);
            }
            IStmt::SetRole(_, e) | IStmt::SetData(_, e) | IStmt::Require(e) | IStmt::Assert(e) => {
                self.expr(inst, f, e);
            }
            IStmt::SetMap { key, value, .. } => {
                let k = self.expr(inst, f, key);
                self.sink(k);
                self.expr(inst, f, value);
            }
            IStmt::Return => {}
            IStmt::If(c, body) | IStmt::While(c, body) => {
                self.expr(inst, f, c);
                self.block(inst, f, body);
            }
            IStmt::CallInternal { function, args } => {
                let callee = FnRef::Func(*function);
                let sender = self.fns[inst][slot(f)].sender.clone();
                self.join(inst, callee, None, &sender);
                self.pass_args(inst, f, inst, callee, args);
            }
            IStmt::CallExternal {
                target,
                contract,
                function,
                args,
            } => {
                let t = self.expr(inst, f, target);
                self.sink(t);
                let sender = Taint::from([Origin::Lit(instance.address)]);
                let callee = FnRef::Func(*function);
                let targets: Vec<_> = (0..self.program.instances.len())
                    .filter(|&i| self.program.instances[i].contract == *contract)
                    .collect();
                for target in targets {
                    self.join(target, callee, None, &sender);
                    self.pass_args(inst, f, target, callee, args);
                }
            }
            IStmt::New { site, args, target } => {
                let child = instance.children[*site];
                let sender = Taint::from([Origin::Lit(instance.address)]);
                self.join(child, FnRef::Ctor, None, &sender);
                self.pass_args(inst, f, child, FnRef::Ctor, args);
                if let Place::Local(i) = *target {
                    let addr = Taint::from([Origin::Lit(self.program.instances[child].address)]);
                    self.join(inst, f, Some(i), &addr);
                }
            }
        }
    }

    fn pass_args(
        &mut self,
        inst: usize,
        f: FnRef,
        callee_inst: usize,
        callee: FnRef,
        args: &[IExpr],
    ) {
        for (i, e) in args.iter().enumerate() {
            let t = self.expr(inst, f, e);
            self.join(callee_inst, callee, Some(i), &t);
        }
    }

    /// Taint of an expression's value; sinks inside it are recorded.
    fn expr(&mut self, inst: usize, f: FnRef, e: &IExpr) -> Taint {
        let instance = &self.program.instances[inst];
        match e {
            IExpr::Num(_) | IExpr::Data(_) => Taint::new(),
            IExpr::Addr(a) => Taint::from([Origin::Lit(*a)]),
            IExpr::This => Taint::from([Origin::Lit(instance.address)]),
            IExpr::Sender => self.fns[inst][slot(f)].sender.clone(),
            IExpr::Local(i) => self.fns[inst][slot(f)].locals[*i].clone(),
            IExpr::Role(r) => Taint::from([Origin::Role(instance.role_base + r)]),
            IExpr::MapRead { key, .. } => {
                let k = self.expr(inst, f, key);
                self.sink(k);
                Taint::new()
            }
            IExpr::Cmp(op, a, b) => {
                let ta = self.expr(inst, f, a);
                let tb = self.expr(inst, f, b);
                if matches!(op, CmpOp::Eq | CmpOp::Ne) {
                    self.sink(ta);
                    self.sink(tb);
                }
                Taint::new()
            }
            IExpr::Arith(_, a, b) | IExpr::And(a, b) | IExpr::Or(a, b) => {
                self.expr(inst, f, a);
                self.expr(inst, f, b);
                Taint::new()
            }
            IExpr::Not(a) => {
                self.expr(inst, f, a);
                Taint::new()
            }
        }
    }
}
