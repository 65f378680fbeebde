//! Pretty-printer. Binary expressions are always parenthesized so the output
//! re-parses to the same tree.

use std::fmt::Write as _;

use super::ast::*;

pub fn print(ast: &SpecAst) -> String {
    let mut out = String::new();
    for item in &ast.items {
        match item {
            Item::Const(c) => {
                let _ = writeln!(out, "const {} = {}", c.name, expr(&c.value));
            }
            Item::Range(r) => {
                let _ = writeln!(out, "range {} = {}..{}", r.name, expr(&r.lo), expr(&r.hi));
            }
            Item::Process(p) => process(&mut out, p),
            Item::Composite(c) => {
                let _ = writeln!(out, "||{} = {}.", c.name, terms(&c.terms));
            }
            Item::Directive(d) => {
                let _ = match d {
                    Directive::Controllable(l) => writeln!(out, "controllable {}", patterns(l)),
                    Directive::Reach(l) => writeln!(out, "reach {}", patterns(l)),
                    Directive::Avoid(l) => writeln!(out, "avoid {}", patterns(l)),
                    Directive::Target(t) => writeln!(out, "target {t}"),
                };
            }
        }
        out.push('\n');
    }
    out
}

fn process(out: &mut String, p: &ProcessDef) {
    out.push_str(&p.name);
    if !p.params.is_empty() {
        let ps: Vec<String> = p
            .params
            .iter()
            .map(|(n, e)| format!("{n}={}", expr(e)))
            .collect();
        let _ = write!(out, "({})", ps.join(", "));
    }
    let _ = write!(out, " = {}", body(&p.body));
    for l in &p.locals {
        let _ = write!(out, ",\n  {}", l.name);
        for d in &l.indices {
            let _ = write!(out, "[{}:{}]", d.var, range(&d.range));
        }
        let _ = write!(out, " = {}", body(&l.body));
    }
    if let Some(ext) = &p.alphabet_ext {
        let _ = write!(out, "\n  +{}", patterns(ext));
    }
    out.push_str(".\n");
}

fn range(r: &RangeExpr) -> String {
    match r {
        RangeExpr::Bounds(lo, hi) => format!("{}..{}", expr(lo), expr(hi)),
        RangeExpr::Named(n) => n.clone(),
    }
}

fn body(b: &Body) -> String {
    match b {
        Body::Ref(r) => proc_ref(r),
        Body::Choice(branches) => {
            let bs: Vec<String> = branches.iter().map(branch).collect();
            format!("({})", bs.join("\n    | "))
        }
    }
}

fn branch(b: &Branch) -> String {
    let mut s = String::new();
    if let Some(g) = &b.guard {
        let _ = write!(s, "when {} ", expr(g));
    }
    for a in &b.actions {
        s.push_str(&a.name);
        for i in &a.indices {
            let _ = write!(s, "[{}]", expr(i));
        }
        s.push_str(" -> ");
    }
    s.push_str(&body(&b.then));
    s
}

fn proc_ref(r: &ProcRef) -> String {
    match r {
        ProcRef::Stop => "STOP".into(),
        ProcRef::Error => "ERROR".into(),
        ProcRef::Named { name, indices } => {
            let mut s = name.clone();
            for i in indices {
                let _ = write!(s, "[{}]", expr(i));
            }
            s
        }
    }
}

fn patterns(ps: &[LabelPattern]) -> String {
    let items: Vec<String> = ps
        .iter()
        .map(|p| {
            let mut s = p.name.clone();
            for i in &p.indices {
                let _ = match i {
                    IndexPattern::Value(e) => write!(s, "[{}]", expr(e)),
                    IndexPattern::Range(lo, hi) => write!(s, "[{}..{}]", expr(lo), expr(hi)),
                };
            }
            s
        })
        .collect();
    format!("{{{}}}", items.join(", "))
}

fn terms(ts: &[CompTerm]) -> String {
    ts.iter().map(term).collect::<Vec<_>>().join(" || ")
}

fn term(t: &CompTerm) -> String {
    match t {
        CompTerm::Instance { name, args } if args.is_empty() => name.clone(),
        CompTerm::Instance { name, args } => {
            let a: Vec<String> = args.iter().map(expr).collect();
            format!("{name}({})", a.join(", "))
        }
        CompTerm::Forall {
            var,
            range: r,
            term: inner,
        } => {
            format!("forall [{var}:{}] {}", range(r), term(inner))
        }
        CompTerm::Group(ts) => format!("({})", terms(ts)),
    }
}

pub(crate) fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(v) => v.to_string(),
        Expr::Var(v) => v.clone(),
        Expr::Neg(inner) => format!("-({})", expr(inner)),
        Expr::Binary(op, l, r) => format!("({} {} {})", expr(l), op.symbol(), expr(r)),
    }
}
