//! Canonical pretty-printer. `parse(print(ast))` reproduces `ast` up to
//! source positions.

use super::ast::*;
use std::fmt::Write;

pub fn print(unit: &SourceUnit) -> String {
    let mut out = String::new();
    for (i, c) in unit.contracts.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_contract(&mut out, c);
    }
    out
}

fn print_contract(out: &mut String, c: &ContractDecl) {
    let _ = writeln!(out, "contract {} {{", c.name);
    for v in &c.state_vars {
        let _ = writeln!(out, "    {} {};", v.ty, v.name);
    }
    print_function(out, &c.constructor, true);
    for f in &c.functions {
        print_function(out, f, false);
    }
    out.push_str("}\n");
}

fn print_function(out: &mut String, f: &FunctionDecl, is_ctor: bool) {
    let params = f
        .params
        .iter()
        .map(|p| format!("{} {}", p.ty, p.name))
        .collect::<Vec<_>>()
        .join(", ");
    if is_ctor {
        let _ = write!(out, "    constructor({params}) public ");
    } else {
        let _ = write!(out, "    function {}({params}) public ", f.name);
    }
    print_block(out, &f.body, 1);
    out.push('\n');
}

fn print_block(out: &mut String, body: &[Stmt], depth: usize) {
    if body.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for s in body {
        indent(out, depth + 1);
        print_stmt(out, s, depth + 1);
        out.push('\n');
    }
    indent(out, depth);
    out.push('}');
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    match s {
        Stmt::Decl { decl } => {
            let _ = write!(out, "{} {};", decl.ty, decl.name);
        }
        Stmt::Assign { target, value, .. } => {
            let _ = write!(out, "{target} = {};", expr_to_string(value));
        }
        Stmt::IndexAssign {
            base,
            indices,
            value,
            ..
        } => {
            let _ = write!(
                out,
                "{}{} = {};",
                postfix_operand(base),
                indices_to_string(indices),
                expr_to_string(value)
            );
        }
        Stmt::New {
            target,
            contract,
            args,
            ..
        } => {
            let _ = write!(
                out,
                "{} = new {contract}({});",
                expr_to_string(target),
                args_to_string(args)
            );
        }
        Stmt::Require { cond, .. } => {
            let _ = write!(out, "require({});", expr_to_string(cond));
        }
        Stmt::Assert { cond, .. } => {
            let _ = write!(out, "assert({});", expr_to_string(cond));
        }
        Stmt::Return { .. } => out.push_str("return;"),
        Stmt::If { cond, body, .. } | Stmt::While { cond, body, .. } => {
            let kw = if matches!(s, Stmt::If { .. }) {
                "if"
            } else {
                "while"
            };
            let _ = write!(out, "{kw} ({}) ", expr_to_string(cond));
            print_block(out, body, depth);
        }
        Stmt::Call { call, .. } => {
            let _ = write!(out, "{};", expr_to_string(call));
        }
    }
}

fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne => 3,
        BinOp::Lt | BinOp::Gt => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul | BinOp::Div => 6,
    }
}

const UNARY_PREC: u8 = 7;
const POSTFIX_PREC: u8 = 8;

fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => precedence(*op),
        ExprKind::Not { .. } => UNARY_PREC,
        _ => POSTFIX_PREC,
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_child(out: &mut String, e: &Expr, min_prec: u8) {
    if expr_prec(e) < min_prec {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn postfix_operand(e: &Expr) -> String {
    let mut out = String::new();
    // An index base that is itself an index would merge on reparse.
    let needs_parens = expr_prec(e) < POSTFIX_PREC || matches!(e.kind, ExprKind::Index { .. });
    if needs_parens {
        out.push('(');
        write_expr(&mut out, e);
        out.push(')');
    } else {
        write_expr(&mut out, e);
    }
    out
}

fn indices_to_string(indices: &[Expr]) -> String {
    indices
        .iter()
        .map(|i| format!("[{}]", expr_to_string(i)))
        .collect()
}

fn args_to_string(args: &[Expr]) -> String {
    args.iter()
        .map(expr_to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int { value } => {
            let _ = write!(out, "{value}");
        }
        ExprKind::Bool { value } => {
            let _ = write!(out, "{value}");
        }
        ExprKind::Var { name } => out.push_str(name),
        ExprKind::This => out.push_str("this"),
        ExprKind::MsgSender => out.push_str("msg.sender"),
        ExprKind::Binary { op, lhs, rhs } => {
            let p = precedence(*op);
            write_child(out, lhs, p);
            let _ = write!(out, " {} ", op.symbol());
            write_child(out, rhs, p + 1);
        }
        ExprKind::Not { operand } => {
            out.push('!');
            write_child(out, operand, UNARY_PREC);
        }
        ExprKind::AddressCast { operand } => {
            let _ = write!(out, "address({})", expr_to_string(operand));
        }
        ExprKind::ExternalCall {
            target,
            function,
            args,
        } => {
            let base = if matches!(target.kind, ExprKind::Index { .. }) {
                // `a[i].f()` reparses the same way, so no parentheses needed.
                expr_to_string(target)
            } else {
                postfix_operand(target)
            };
            let _ = write!(out, "{base}.{function}({})", args_to_string(args));
        }
        ExprKind::InternalCall { function, args } => {
            let _ = write!(out, "{function}({})", args_to_string(args));
        }
        ExprKind::Index { base, indices } => {
            out.push_str(&postfix_operand(base));
            out.push_str(&indices_to_string(indices));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn roundtrip(src: &str) {
        let mut a = parse(src).unwrap();
        let printed = print(&a);
        let mut b = parse(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        a.clear_positions();
        b.clear_positions();
        assert_eq!(a, b, "printed:\n{printed}");
    }

    #[test]
    fn parenthesizes_only_where_needed() {
        let src = "contract C { uint x; constructor() public { x = (1 - 2) - (3 - 4) * 5; } }";
        let printed = print(&parse(src).unwrap());
        assert!(printed.contains("x = 1 - 2 - (3 - 4) * 5;"), "{printed}");
        roundtrip(src);
    }

    #[test]
    fn roundtrips_statement_forms() {
        roundtrip(
            "contract D { uint v; constructor(uint a) public { v = a; } function f() public {} }
             contract C {
                 D d; address owner; mapping(address => uint) m; bool flag;
                 constructor(address o) public {
                     d = new D(3); owner = o;
                     if (!(flag || owner == address(0))) { m[msg.sender] = 1; }
                     while (flag) { flag = false; return }
                 }
                 function g(address x) public { d.f(); h(); assert(m[x] > 0 && !flag) }
                 function h() public { uint t; t = m[address(this)]; }
             }",
        );
    }
}
