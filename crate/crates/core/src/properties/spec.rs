use crate::frontend::VariableLayout;

use super::pred::{Formula, Rel, Term};
use super::sexpr::{read_all, Sexpr};
use super::{GuardedProperty, Spec, SpecError, SplitInvariant};

struct Binder<'l> {
    layout: &'l VariableLayout,
}

fn int<T: std::str::FromStr>(e: &Sexpr, what: &str) -> Result<T, SpecError> {
    e.atom()
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| e.error(format!("expected {what}")))
}

fn arity(e: &Sexpr, head: &str, args: &[Sexpr], n: usize) -> Result<(), SpecError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(e.error(format!("`{head}` takes {n} operand(s), got {}", args.len())))
    }
}

impl Binder<'_> {
    fn index(&self, e: &Sexpr, kind: &str, names: &[String]) -> Result<usize, SpecError> {
        let text = e
            .atom()
            .ok_or_else(|| e.error(format!("expected a {kind} name or index")))?;
        if let Ok(i) = text.parse::<usize>() {
            if i < names.len() {
                return Ok(i);
            }
            return Err(SpecError::Binding(format!(
                "{kind} index {i} is out of range (the bundle has {})",
                names.len()
            )));
        }
        names
            .iter()
            .position(|n| n == text)
            .ok_or_else(|| SpecError::Binding(format!("no {kind} named `{text}`")))
    }

    fn names(slots: &[crate::frontend::StateSlot]) -> Vec<String> {
        slots.iter().map(|s| s.name.clone()).collect()
    }

    fn term(&self, e: &Sexpr, depth_slots: usize) -> Result<Term, SpecError> {
        if let Some(a) = e.atom() {
            return a
                .parse::<i128>()
                .map(Term::Const)
                .map_err(|_| e.error(format!("expected an integer term, found `{a}`")));
        }
        let (head, args) = e.form().ok_or_else(|| e.error("expected a term"))?;
        Ok(match head {
            "data" => {
                arity(e, head, args, 1)?;
                Term::Data(self.index(
                    &args[0],
                    "data variable",
                    &Self::names(&self.layout.data),
                )?)
            }
            "map" => {
                arity(e, head, args, 2)?;
                let slot: usize = int(&args[0], "a slot number")?;
                if slot >= depth_slots {
                    return Err(SpecError::Binding(format!(
                        "slot {slot} is out of range for {depth_slots} user(s)"
                    )));
                }
                let map = self.index(&args[1], "mapping", &Self::names(&self.layout.maps))?;
                Term::Map { slot, map }
            }
            "+" | "*" => {
                if args.is_empty() {
                    return Err(e.error(format!("`{head}` needs operands")));
                }
                let ts = args
                    .iter()
                    .map(|a| self.term(a, depth_slots))
                    .collect::<Result<_, _>>()?;
                if head == "+" {
                    Term::Add(ts)
                } else {
                    Term::Mul(ts)
                }
            }
            "-" | "/" => {
                arity(e, head, args, 2)?;
                let a = Box::new(self.term(&args[0], depth_slots)?);
                let b = Box::new(self.term(&args[1], depth_slots)?);
                if head == "-" {
                    Term::Sub(a, b)
                } else {
                    Term::Div(a, b)
                }
            }
            _ => return Err(e.error(format!("unknown term operator `{head}`"))),
        })
    }

    fn formula(&self, e: &Sexpr, slots: usize) -> Result<Formula, SpecError> {
        if let Some(a) = e.atom() {
            return match a {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                _ => Err(e.error(format!("expected a formula, found `{a}`"))),
            };
        }
        let (head, args) = e.form().ok_or_else(|| e.error("expected a formula"))?;
        if let Some(rel) = Rel::from_symbol(head) {
            arity(e, head, args, 2)?;
            return Ok(Formula::Cmp(
                rel,
                self.term(&args[0], slots)?,
                self.term(&args[1], slots)?,
            ));
        }
        let all = |this: &Self| {
            args.iter()
                .map(|a| this.formula(a, slots))
                .collect::<Result<Vec<_>, _>>()
        };
        Ok(match head {
            "and" => Formula::And(all(self)?),
            "or" => Formula::Or(all(self)?),
            "not" => {
                arity(e, head, args, 1)?;
                Formula::Not(Box::new(self.formula(&args[0], slots)?))
            }
            "=>" => {
                arity(e, head, args, 2)?;
                Formula::Implies(
                    Box::new(self.formula(&args[0], slots)?),
                    Box::new(self.formula(&args[1], slots)?),
                )
            }
            _ => return Err(e.error(format!("unknown formula operator `{head}`"))),
        })
    }

    fn role(&self, e: &Sexpr) -> Result<usize, SpecError> {
        self.index(e, "role", &Self::names(&self.layout.roles))
    }

    fn property(
        &self,
        e: &Sexpr,
        args: &[Sexpr],
        warnings: &mut Vec<String>,
    ) -> Result<GuardedProperty, SpecError> {
        let mut it = args.iter();
        let k = match it.next().and_then(Sexpr::form) {
            Some(("k", [n])) => int::<usize>(n, "an arity")?,
            _ => return Err(e.error("a property starts with `(k N)`")),
        };
        if k == 0 {
            return Err(e.error("a property quantifies over at least one user"));
        }
        let mut lits = Vec::new();
        let mut roles = Vec::new();
        let mut xi = None;
        for item in it {
            if xi.is_some() {
                return Err(item.error("nothing may follow `(xi ..)`"));
            }
            let slot_of = |s: &Sexpr, kw: &Sexpr| -> Result<usize, SpecError> {
                if kw.atom() != Some("slot") {
                    return Err(kw.error("expected `slot`"));
                }
                let slot: usize = int(s, "a slot number")?;
                if slot >= k {
                    return Err(SpecError::Binding(format!(
                        "guard slot {slot} is out of range for k={k}"
                    )));
                }
                Ok(slot)
            };
            match item.form() {
                Some(("guard-lit", [a, kw, s])) => {
                    lits.push((int::<u64>(a, "an address")?, slot_of(s, kw)?))
                }
                Some(("guard-role", [r, kw, s])) => roles.push((self.role(r)?, slot_of(s, kw)?)),
                Some(("xi", [body])) => xi = Some(self.formula(body, k)?),
                _ => {
                    return Err(
                        item.error("expected `(guard-lit ..)`, `(guard-role ..)` or `(xi ..)`")
                    )
                }
            }
        }
        let xi = xi.ok_or_else(|| e.error("a property needs `(xi ..)`"))?;
        let property = GuardedProperty { k, lits, roles, xi };
        for slot in 0..k {
            let mut lit_guards: Vec<u64> = property
                .lits
                .iter()
                .filter(|g| g.1 == slot)
                .map(|g| g.0)
                .collect();
            lit_guards.sort_unstable();
            lit_guards.dedup();
            if lit_guards.len() > 1 {
                warnings.push(format!(
                    "slot {slot} is guarded by distinct literals {lit_guards:?}; the property holds vacuously"
                ));
            }
        }
        Ok(property)
    }

    fn invariant(&self, e: &Sexpr, args: &[Sexpr]) -> Result<SplitInvariant, SpecError> {
        let mut lits = Vec::new();
        let mut roles = Vec::new();
        let mut else_pred = None;
        for item in args {
            if else_pred.is_some() {
                return Err(item.error("nothing may follow `(else ..)`"));
            }
            match item.form() {
                Some(("lit", [a, body])) => {
                    lits.push((int::<u64>(a, "an address")?, self.formula(body, 1)?))
                }
                Some(("role", [r, body])) => roles.push((self.role(r)?, self.formula(body, 1)?)),
                Some(("else", [body])) => else_pred = Some(self.formula(body, 1)?),
                _ => return Err(item.error("expected `(lit ..)`, `(role ..)` or `(else ..)`")),
            }
        }
        let else_pred = else_pred.ok_or_else(|| e.error("an invariant ends with `(else ..)`"))?;
        Ok(SplitInvariant {
            lits,
            roles,
            else_pred,
        })
    }
}

pub fn parse_spec(text: &str, layout: &VariableLayout) -> Result<Spec, SpecError> {
    let b = Binder { layout };
    let mut properties = Vec::new();
    let mut invariant = None;
    let mut warnings = Vec::new();
    for item in read_all(text)? {
        match item.form() {
            Some(("property", args)) => properties.push(b.property(&item, args, &mut warnings)?),
            Some(("invariant", args)) => {
                if invariant.is_some() {
                    return Err(item.error("a spec holds at most one invariant"));
                }
                invariant = Some(b.invariant(&item, args)?);
            }
            _ => return Err(item.error("expected `(property ..)` or `(invariant ..)`")),
        }
    }
    Ok(Spec {
        properties,
        invariant: invariant.unwrap_or_default(),
        warnings,
    })
}
