use crate::frontend::ast::Type;
use crate::frontend::ContractBundle;

use super::{Action, DataDomain};

/// Odometer over every action of a bundle: transactions in order, then
/// clients over `A^q` with the first client most significant, then
/// arguments likewise over their domains.
#[derive(Debug, Clone)]
pub struct ActionIter {
    addresses: Vec<u64>,
    /// Per transaction: client count and per-argument maximum.
    shapes: Vec<(usize, Vec<u64>)>,
    tx: usize,
    /// Client address indices, then argument values.
    digits: Vec<u64>,
    done: bool,
}

impl ActionIter {
    pub fn new(bundle: &ContractBundle, addresses: &[u64], domain: DataDomain) -> Self {
        let shapes = bundle
            .layout
            .transactions
            .iter()
            .map(|t| {
                let maxes = t
                    .args
                    .iter()
                    .map(|a| if a.ty == Type::Bool { 1 } else { domain.max() })
                    .collect();
                (t.clients.len(), maxes)
            })
            .collect();
        let mut it = Self {
            addresses: addresses.to_vec(),
            shapes,
            tx: 0,
            digits: Vec::new(),
            done: addresses.is_empty(),
        };
        it.start_tx();
        it
    }

    fn start_tx(&mut self) {
        match self.shapes.get(self.tx) {
            Some((q, maxes)) => self.digits = vec![0; q + maxes.len()],
            None => self.done = true,
        }
    }

    fn current(&self) -> Action {
        let q = self.shapes[self.tx].0;
        Action {
            tx: self.tx,
            clients: self.digits[..q]
                .iter()
                .map(|&i| self.addresses[i as usize])
                .collect(),
            args: self.digits[q..].to_vec(),
        }
    }

    fn advance(&mut self) {
        let (q, maxes) = &self.shapes[self.tx];
        let top = self.addresses.len() as u64 - 1;
        for pos in (0..self.digits.len()).rev() {
            let max = if pos < *q { top } else { maxes[pos - q] };
            if self.digits[pos] < max {
                self.digits[pos] += 1;
                return;
            }
            self.digits[pos] = 0;
        }
        self.tx += 1;
        self.start_tx();
    }
}

impl Iterator for ActionIter {
    type Item = Action;

    fn next(&mut self) -> Option<Action> {
        if self.done {
            return None;
        }
        let a = self.current();
        self.advance();
        Some(a)
    }
}
