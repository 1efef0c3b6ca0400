//! Executable N-user bundle semantics.
//!
//! A [`Machine`] fixes a bundle, an address set `A` and a data domain. User
//! slot `i` belongs to the `i`-th smallest address of `A`, which is the
//! address-to-user bijection used for literal addresses.

mod actions;
mod interp;
mod swap;
mod trace_file;

use serde::Serialize;
use thiserror::Error;

use crate::frontend::ContractBundle;

pub use actions::ActionIter;
pub use interp::{Commit, Effect, MapWrite, ReadSet};
pub use swap::{swap_action, swap_state};
pub use trace_file::{decode_trace, TraceFileError};

/// Default per-transaction fuel: statements plus loop iterations.
pub const DEFAULT_FUEL: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Overflow {
    /// Arithmetic that leaves the domain reverts the transaction.
    Checked,
    /// Arithmetic wraps modulo `2^w`.
    Wrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DataDomain {
    width: u32,
    overflow: Overflow,
}

impl DataDomain {
    pub fn new(width: u32) -> Result<Self, SemanticsError> {
        if !(1..=64).contains(&width) {
            return Err(SemanticsError::InvalidWidth(width));
        }
        Ok(Self {
            width,
            overflow: Overflow::Checked,
        })
    }

    pub fn with_overflow(self, overflow: Overflow) -> Self {
        Self { overflow, ..self }
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn overflow(self) -> Overflow {
        self.overflow
    }

    /// Largest value in the domain.
    pub fn max(self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    pub fn contains(self, v: u64) -> bool {
        v <= self.max()
    }

    /// Number of values, saturating at `u64::MAX` for the 64-bit domain.
    pub fn size(self) -> u64 {
        self.max().saturating_add(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ControlState {
    pub roles: Vec<u64>,
    pub data: Vec<u64>,
    pub ctor_done: bool,
}

impl ControlState {
    pub fn zero(n_roles: usize, n_data: usize) -> Self {
        Self {
            roles: vec![0; n_roles],
            data: vec![0; n_data],
            ctor_done: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct UserRecord {
    pub id: u64,
    pub maps: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    Live(ControlState),
    /// The absorbing error state reached by a failed `assert` or an address
    /// outside the address set.
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BundleState {
    pub control: Control,
    pub users: Vec<UserRecord>,
}

impl BundleState {
    pub fn is_error(&self) -> bool {
        matches!(self.control, Control::Error)
    }

    pub fn live(&self) -> Option<&ControlState> {
        match &self.control {
            Control::Live(c) => Some(c),
            Control::Error => None,
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.users.iter().map(|u| u.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Action {
    /// Transaction index: 0 is the constructor, then functions in order.
    pub tx: usize,
    /// Client addresses; slot 0 is `msg.sender`.
    pub clients: Vec<u64>,
    pub args: Vec<u64>,
}

impl Action {
    pub fn sender(&self) -> u64 {
        self.clients[0]
    }

    /// `name(sender=.., client=.., arg=..)` using the bundle's parameter names.
    pub fn describe(&self, bundle: &ContractBundle) -> String {
        let t = &bundle.layout.transactions[self.tx];
        let mut parts = Vec::new();
        for (name, v) in t.clients.iter().zip(&self.clients) {
            let name = if name == "msg.sender" { "sender" } else { name };
            parts.push(format!("{name}={v}"));
        }
        for (slot, v) in t.args.iter().zip(&self.args) {
            parts.push(format!("{}={v}", slot.name));
        }
        format!("{}({})", t.name, parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("at least 2 users are required (zero account and contract account), got {0}")]
    TooFewUsers(usize),
    #[error("address {0} appears twice in the address set")]
    DuplicateAddress(u64),
    #[error("data width must be between 1 and 64 bits, got {0}")]
    InvalidWidth(u32),
    #[error("transaction ran out of fuel after {0} steps")]
    ResourceExhausted(u64),
    #[error("call depth limit of {0} exceeded")]
    CallDepth(usize),
    #[error("invalid action: {0}")]
    BadAction(String),
    #[error("state does not match the bundle layout: {0}")]
    BadState(String),
    #[error("no transition leaves the error state")]
    ErrorState,
}

/// A bundle instantiated over a concrete address set and data domain.
#[derive(Debug, Clone)]
pub struct Machine<'b> {
    bundle: &'b ContractBundle,
    addresses: Vec<u64>,
    domain: DataDomain,
    fuel: u64,
}

impl<'b> Machine<'b> {
    /// Builds a machine over `addresses`, which are sorted ascending to form
    /// the address-to-slot bijection.
    pub fn new(
        bundle: &'b ContractBundle,
        addresses: &[u64],
        domain: DataDomain,
    ) -> Result<Self, SemanticsError> {
        let mut sorted = addresses.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(SemanticsError::DuplicateAddress(w[0]));
        }
        if sorted.len() < 2 {
            return Err(SemanticsError::TooFewUsers(sorted.len()));
        }
        Ok(Self {
            bundle,
            addresses: sorted,
            domain,
            fuel: DEFAULT_FUEL,
        })
    }

    /// The machine of `lts(C, N)`: addresses `0..N`.
    pub fn network(
        bundle: &'b ContractBundle,
        n: usize,
        domain: DataDomain,
    ) -> Result<Self, SemanticsError> {
        let addrs: Vec<u64> = (0..n as u64).collect();
        Self::new(bundle, &addrs, domain)
    }

    pub fn with_fuel(self, fuel: u64) -> Self {
        Self { fuel, ..self }
    }

    pub fn bundle(&self) -> &'b ContractBundle {
        self.bundle
    }

    pub fn addresses(&self) -> &[u64] {
        &self.addresses
    }

    pub fn domain(&self) -> DataDomain {
        self.domain
    }

    pub fn fuel(&self) -> u64 {
        self.fuel
    }

    /// User slot owning `address` under the bijection, if any.
    pub fn slot_of(&self, address: u64) -> Option<usize> {
        self.addresses.binary_search(&address).ok()
    }

    /// Zero-initialized state with one user per address, in ascending order.
    pub fn init_state(&self) -> BundleState {
        let layout = &self.bundle.layout;
        BundleState {
            control: Control::Live(ControlState::zero(layout.roles.len(), layout.data.len())),
            users: self
                .addresses
                .iter()
                .map(|&id| UserRecord {
                    id,
                    maps: vec![0; layout.maps.len()],
                })
                .collect(),
        }
    }

    /// Every action over this machine's addresses and domain, in
    /// deterministic order: by transaction, then clients, then arguments,
    /// each lexicographically.
    pub fn actions(&self) -> ActionIter {
        ActionIter::new(self.bundle, &self.addresses, self.domain)
    }

    /// Applies `action` and returns the successor state.
    pub fn step(
        &self,
        state: &BundleState,
        action: &Action,
    ) -> Result<BundleState, SemanticsError> {
        let effect = self.execute(state, action, &mut ReadSet::default())?;
        Ok(effect.apply(state))
    }

    /// Runs `action` and reports its effect without building the successor.
    /// Every user slot whose pre-state map values the effect depends on is
    /// added to `reads`: slots read, and slots written.
    pub fn execute(
        &self,
        state: &BundleState,
        action: &Action,
        reads: &mut ReadSet,
    ) -> Result<Effect, SemanticsError> {
        interp::execute(self, state, action, reads)
    }
}

/// Initial state of a bundle over `addresses`.
pub fn init_state(
    bundle: &ContractBundle,
    addresses: &[u64],
    domain: DataDomain,
) -> Result<BundleState, SemanticsError> {
    Ok(Machine::new(bundle, addresses, domain)?.init_state())
}
