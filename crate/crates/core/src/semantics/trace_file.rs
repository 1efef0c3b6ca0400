use serde::Deserialize;
use thiserror::Error;

use crate::frontend::ContractBundle;

use super::Action;

#[derive(Debug, Error)]
pub enum TraceFileError {
    #[error("malformed trace: {0}")]
    Json(#[from] serde_json::Error),
    #[error("step {step}: no transaction named `{name}`")]
    UnknownTransaction { step: usize, name: String },
    #[error("step {step}: `{name}` takes {expected} {what}, got {got}")]
    Arity {
        step: usize,
        name: String,
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    tx: String,
    clients: Vec<u64>,
    #[serde(default)]
    args: Vec<u64>,
}

/// Decodes a JSON list of `{"tx": name, "clients": [..], "args": [..]}`
/// steps into actions of `bundle`. Values are not range checked here.
pub fn decode_trace(bundle: &ContractBundle, text: &str) -> Result<Vec<Action>, TraceFileError> {
    let raw: Vec<RawStep> = serde_json::from_str(text)?;
    raw.into_iter()
        .enumerate()
        .map(|(step, r)| {
            let tx = bundle.layout.tx_index(&r.tx).ok_or_else(|| {
                TraceFileError::UnknownTransaction {
                    step,
                    name: r.tx.clone(),
                }
            })?;
            let t = &bundle.layout.transactions[tx];
            let check = |what, expected: usize, got: usize| {
                if expected == got {
                    Ok(())
                } else {
                    Err(TraceFileError::Arity {
                        step,
                        name: r.tx.clone(),
                        what,
                        expected,
                        got,
                    })
                }
            };
            check("client(s)", t.clients.len(), r.clients.len())?;
            check("argument(s)", t.args.len(), r.args.len())?;
            Ok(Action {
                tx,
                clients: r.clients,
                args: r.args,
            })
        })
        .collect()
}
