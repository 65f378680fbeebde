//! Elaboration: instantiate processes over concrete parameter values and
//! enumerate their reachable states.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::ast::*;
use super::FspError;
use crate::label::Label;
use crate::lts::{Lts, LtsBuilder};
use crate::model::ControlProblem;

/// Constant overrides, e.g. from `--param M=2`.
pub type Bindings = BTreeMap<String, i64>;

/// Components of the target composite, in composition order, and the
/// problem declared by the directives.
#[derive(Debug, Clone)]
pub struct Elaborated {
    pub components: Vec<Lts>,
    pub problem: ControlProblem,
}

type Env = HashMap<String, i64>;

type Result<T> = std::result::Result<T, FspError>;

fn eval(e: &Expr, env: &Env) -> Result<i64> {
    Ok(match e {
        Expr::Int(v) => *v,
        Expr::Var(v) => *env
            .get(v)
            .ok_or_else(|| FspError::UnboundConstant(v.clone()))?,
        Expr::Neg(inner) => -eval(inner, env)?,
        Expr::Binary(op, l, r) => {
            let (a, b) = (eval(l, env)?, eval(r, env)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Lt => (a < b) as i64,
                BinOp::Le => (a <= b) as i64,
                BinOp::Gt => (a > b) as i64,
                BinOp::Ge => (a >= b) as i64,
                BinOp::Eq => (a == b) as i64,
                BinOp::Ne => (a != b) as i64,
            }
        }
    })
}

/// Global scope: constants (overridable) and named ranges.
struct Globals {
    env: Env,
    ranges: HashMap<String, (i64, i64)>,
}

impl Globals {
    fn new(ast: &SpecAst, bindings: &Bindings) -> Result<Self> {
        let mut env: Env = bindings.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for c in ast.constants() {
            if !bindings.contains_key(&c.name) {
                let v = eval(&c.value, &env)?;
                env.insert(c.name.clone(), v);
            }
        }
        let mut ranges = HashMap::new();
        for r in ast.ranges() {
            ranges.insert(r.name.clone(), (eval(&r.lo, &env)?, eval(&r.hi, &env)?));
        }
        Ok(Self { env, ranges })
    }

    fn range(&self, r: &RangeExpr, env: &Env) -> Result<(i64, i64)> {
        match r {
            RangeExpr::Bounds(lo, hi) => Ok((eval(lo, env)?, eval(hi, env)?)),
            RangeExpr::Named(n) => {
                self.ranges
                    .get(n)
                    .copied()
                    .ok_or_else(|| FspError::UnknownReference {
                        name: n.clone(),
                        context: "range".into(),
                    })
            }
        }
    }
}

// Processes are lowered to equations whose branches carry exactly one action.
// Longer prefix chains and nested choices become synthetic equations that
// inherit the index variables of the equation they appear in.

struct Eqn {
    name: String,
    vars: Vec<String>,
    ranges: Vec<RangeExpr>,
    body: LBody,
}

enum LBody {
    Alias(LRef),
    Choice(Vec<LBranch>),
}

struct LBranch {
    guard: Option<Expr>,
    action: ActionExpr,
    target: LRef,
}

#[derive(Clone)]
enum LRef {
    Eq(usize, Vec<Expr>),
    Stop,
    Error,
}

struct Lowering<'a> {
    process: &'a ProcessDef,
    eqs: Vec<Eqn>,
    names: HashMap<&'a str, usize>,
}

impl<'a> Lowering<'a> {
    fn run(process: &'a ProcessDef) -> Result<Vec<Eqn>> {
        let mut lw = Lowering {
            process,
            eqs: Vec::new(),
            names: HashMap::new(),
        };
        lw.register(&process.name, Vec::new());
        for l in &process.locals {
            lw.register(&l.name, l.indices.clone());
        }
        let mut bodies = vec![&process.body];
        bodies.extend(process.locals.iter().map(|l| &l.body));
        for (i, b) in bodies.into_iter().enumerate() {
            let body = lw.body(b, i)?;
            lw.eqs[i].body = body;
        }
        Ok(lw.eqs)
    }

    fn register(&mut self, name: &'a str, indices: Vec<IndexDecl>) {
        self.names.insert(name, self.eqs.len());
        self.eqs.push(Eqn {
            name: name.to_string(),
            vars: indices.iter().map(|d| d.var.clone()).collect(),
            ranges: indices.into_iter().map(|d| d.range).collect(),
            body: LBody::Choice(Vec::new()),
        });
    }

    fn synthetic(&mut self, owner: usize) -> usize {
        let base = &self.eqs[owner];
        let root = base
            .name
            .split('.')
            .next()
            .unwrap_or(&base.name)
            .to_string();
        let count = self
            .eqs
            .iter()
            .filter(|e| e.name.starts_with(&format!("{root}.")))
            .count();
        let eq = Eqn {
            name: format!("{root}.{}", count + 1),
            vars: base.vars.clone(),
            ranges: base.ranges.clone(),
            body: LBody::Choice(Vec::new()),
        };
        self.eqs.push(eq);
        self.eqs.len() - 1
    }

    fn self_ref(&self, owner: usize, eq: usize) -> LRef {
        LRef::Eq(
            eq,
            self.eqs[owner]
                .vars
                .iter()
                .map(|v| Expr::Var(v.clone()))
                .collect(),
        )
    }

    fn body(&mut self, body: &Body, owner: usize) -> Result<LBody> {
        match body {
            Body::Ref(r) => Ok(LBody::Alias(self.proc_ref(r)?)),
            Body::Choice(branches) => {
                let mut out = Vec::new();
                for b in branches {
                    out.push(self.chain(b.guard.clone(), &b.actions, &b.then, owner)?);
                }
                Ok(LBody::Choice(out))
            }
        }
    }

    fn chain(
        &mut self,
        guard: Option<Expr>,
        actions: &[ActionExpr],
        then: &Body,
        owner: usize,
    ) -> Result<LBranch> {
        let target = match (actions.len(), then) {
            (1, Body::Ref(r)) => self.proc_ref(r)?,
            (1, choice) => {
                let syn = self.synthetic(owner);
                let body = self.body(choice, syn)?;
                self.eqs[syn].body = body;
                self.self_ref(owner, syn)
            }
            _ => {
                let syn = self.synthetic(owner);
                let next = self.chain(None, &actions[1..], then, syn)?;
                self.eqs[syn].body = LBody::Choice(vec![next]);
                self.self_ref(owner, syn)
            }
        };
        Ok(LBranch {
            guard,
            action: actions[0].clone(),
            target,
        })
    }

    fn proc_ref(&self, r: &ProcRef) -> Result<LRef> {
        match r {
            ProcRef::Stop => Ok(LRef::Stop),
            ProcRef::Error => Ok(LRef::Error),
            ProcRef::Named { name, indices } => {
                let &eq =
                    self.names
                        .get(name.as_str())
                        .ok_or_else(|| FspError::UnknownReference {
                            name: name.clone(),
                            context: self.process.name.clone(),
                        })?;
                let expected = self.eqs[eq].vars.len();
                if expected != indices.len() {
                    return Err(FspError::Arity {
                        name: name.clone(),
                        expected,
                        found: indices.len(),
                    });
                }
                Ok(LRef::Eq(eq, indices.clone()))
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Target {
    State(usize, Vec<i64>),
    Stop,
    Error,
}

struct Instance<'a> {
    globals: &'a Globals,
    base: Env,
    eqs: Vec<Eqn>,
}

impl Instance<'_> {
    fn env_for(&self, eq: usize, args: &[i64]) -> Env {
        let mut env = self.base.clone();
        for (v, a) in self.eqs[eq].vars.iter().zip(args) {
            env.insert(v.clone(), *a);
        }
        env
    }

    fn resolve(&self, r: &LRef, env: &Env) -> Result<Target> {
        let mut r = r.clone();
        let mut env = env.clone();
        for _ in 0..=self.eqs.len() {
            let (eq, exprs) = match r {
                LRef::Stop => return Ok(Target::Stop),
                LRef::Error => return Ok(Target::Error),
                LRef::Eq(eq, exprs) => (eq, exprs),
            };
            let mut args = Vec::with_capacity(exprs.len());
            for (e, range) in exprs.iter().zip(&self.eqs[eq].ranges) {
                let v = eval(e, &env)?;
                let (lo, hi) = self.globals.range(range, &self.base)?;
                if v < lo || v > hi {
                    return Err(FspError::IndexOutOfRange {
                        name: self.eqs[eq].name.clone(),
                        value: v,
                        lo,
                        hi,
                    });
                }
                args.push(v);
            }
            match &self.eqs[eq].body {
                LBody::Choice(_) => return Ok(Target::State(eq, args)),
                LBody::Alias(next) => {
                    env = self.env_for(eq, &args);
                    r = next.clone();
                }
            }
        }
        Err(FspError::UnguardedRecursion(self.eqs[0].name.clone()))
    }

    fn state_name(&self, t: &Target) -> String {
        match t {
            Target::Stop => "STOP".into(),
            Target::Error => "ERROR".into(),
            Target::State(eq, args) => {
                let mut s = self.eqs[*eq].name.clone();
                for a in args {
                    s.push_str(&format!("[{a}]"));
                }
                s
            }
        }
    }
}

fn make_label(a: &ActionExpr, env: &Env) -> Result<Label> {
    let mut indices = Vec::with_capacity(a.indices.len());
    for e in &a.indices {
        let v = eval(e, env)?;
        if v < 0 {
            return Err(FspError::NegativeIndex {
                label: a.name.clone(),
                value: v,
            });
        }
        indices.push(v as u32);
    }
    Ok(Label::new(a.name.clone(), indices))
}

fn instance_name(p: &ProcessDef, args: &[i64]) -> String {
    if p.params.is_empty() {
        p.name.clone()
    } else {
        let a: Vec<String> = args.iter().map(i64::to_string).collect();
        format!("{}({})", p.name, a.join(","))
    }
}

fn build_process(globals: &Globals, p: &ProcessDef, args: &[i64]) -> Result<Lts> {
    if args.len() > p.params.len() {
        return Err(FspError::Arity {
            name: p.name.clone(),
            expected: p.params.len(),
            found: args.len(),
        });
    }
    let mut base = globals.env.clone();
    for (i, (name, default)) in p.params.iter().enumerate() {
        let v = match args.get(i) {
            Some(&v) => v,
            None => eval(default, &globals.env)?,
        };
        base.insert(name.clone(), v);
    }
    let full_args: Vec<i64> = p.params.iter().map(|(n, _)| base[n]).collect();
    let inst = Instance {
        globals,
        base,
        eqs: Lowering::run(p)?,
    };
    let name = instance_name(p, &full_args);

    let mut b = LtsBuilder::new(name.clone());
    let mut ids: HashMap<Target, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |t: Target, b: &mut LtsBuilder, queue: &mut VecDeque<Target>| {
        *ids.entry(t.clone()).or_insert_with(|| {
            let sname = inst.state_name(&t);
            let id = if t == Target::Error {
                b.add_error_state(sname)
            } else {
                b.add_state(sname)
            };
            queue.push_back(t);
            id
        })
    };
    let init = inst.resolve(&LRef::Eq(0, Vec::new()), &inst.base)?;
    let init_id = intern(init, &mut b, &mut queue);
    b.set_initial(init_id);

    let mut alphabet = BTreeSet::new();
    while let Some(t) = queue.pop_front() {
        let Target::State(eq, args) = &t else {
            continue;
        };
        let LBody::Choice(branches) = &inst.eqs[*eq].body else {
            unreachable!("aliases are resolved before interning");
        };
        let env = inst.env_for(*eq, args);
        let from = intern(t.clone(), &mut b, &mut queue);
        let mut seen: BTreeMap<Label, Target> = BTreeMap::new();
        for br in branches {
            let enabled = match &br.guard {
                Some(g) => eval(g, &env)? != 0,
                None => true,
            };
            let label = match make_label(&br.action, &env) {
                Ok(l) => l,
                Err(_) if !enabled => continue,
                Err(e) => return Err(e),
            };
            alphabet.insert(label.clone());
            if !enabled {
                continue;
            }
            let target = inst.resolve(&br.target, &env)?;
            if let Some(prev) = seen.get(&label) {
                if *prev != target {
                    return Err(FspError::Nondeterministic {
                        process: name,
                        state: inst.state_name(&t),
                        label: label.to_string(),
                    });
                }
                continue;
            }
            seen.insert(label.clone(), target.clone());
            let to = intern(target, &mut b, &mut queue);
            b.add_transition(from, label, to);
        }
    }
    if let Some(ext) = &p.alphabet_ext {
        alphabet.extend(expand_with(globals, ext, &inst.base)?);
    }
    b.extend_alphabet(alphabet);
    Ok(b.build()
        .expect("elaborated transitions are closed and deterministic"))
}

fn expand_with(globals: &Globals, patterns: &[LabelPattern], env: &Env) -> Result<BTreeSet<Label>> {
    let mut out = BTreeSet::new();
    for p in patterns {
        let mut choices: Vec<Vec<i64>> = Vec::new();
        for idx in &p.indices {
            let (lo, hi) = match idx {
                IndexPattern::Range(lo, hi) => (eval(lo, env)?, eval(hi, env)?),
                IndexPattern::Value(Expr::Var(v)) if !env.contains_key(v) => globals
                    .ranges
                    .get(v)
                    .copied()
                    .ok_or_else(|| FspError::UnboundConstant(v.clone()))?,
                IndexPattern::Value(e) => {
                    let v = eval(e, env)?;
                    (v, v)
                }
            };
            if lo < 0 {
                return Err(FspError::NegativeIndex {
                    label: p.name.clone(),
                    value: lo,
                });
            }
            choices.push((lo..=hi).collect());
        }
        let mut combos: Vec<Vec<u32>> = vec![Vec::new()];
        for c in &choices {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    c.iter().map(move |&v| {
                        let mut next = prefix.clone();
                        next.push(v as u32);
                        next
                    })
                })
                .collect();
        }
        out.extend(combos.into_iter().map(|ix| Label::new(p.name.clone(), ix)));
    }
    Ok(out)
}

/// Expands label patterns such as `get[0..M]` with the given overrides.
pub fn expand_labels(
    ast: &SpecAst,
    patterns: &[LabelPattern],
    bindings: &Bindings,
) -> Result<BTreeSet<Label>> {
    let globals = Globals::new(ast, bindings)?;
    expand_with(&globals, patterns, &globals.env)
}

/// Elaborates a single instance of process `name` with positional arguments;
/// missing arguments take their declared defaults.
pub fn elaborate_process(
    ast: &SpecAst,
    name: &str,
    args: &[i64],
    bindings: &Bindings,
) -> Result<Lts> {
    let globals = Globals::new(ast, bindings)?;
    let p = ast
        .process(name)
        .ok_or_else(|| FspError::UnknownReference {
            name: name.to_string(),
            context: "elaboration".into(),
        })?;
    build_process(&globals, p, args)
}

fn flatten(
    ast: &SpecAst,
    globals: &Globals,
    term: &CompTerm,
    env: &Env,
    depth: usize,
    out: &mut Vec<(String, Vec<i64>)>,
) -> Result<()> {
    match term {
        CompTerm::Instance { name, args } => {
            if let Some(c) = ast.composite(name) {
                if !args.is_empty() {
                    return Err(FspError::Arity {
                        name: name.clone(),
                        expected: 0,
                        found: args.len(),
                    });
                }
                if depth > ast.items.len() {
                    return Err(FspError::UnguardedRecursion(name.clone()));
                }
                for t in &c.terms {
                    flatten(ast, globals, t, env, depth + 1, out)?;
                }
            } else {
                let vals = args
                    .iter()
                    .map(|a| eval(a, env))
                    .collect::<Result<Vec<_>>>()?;
                out.push((name.clone(), vals));
            }
        }
        CompTerm::Forall { var, range, term } => {
            let (lo, hi) = globals.range(range, env)?;
            if lo > hi {
                return Err(FspError::EmptyRange { lo, hi });
            }
            for v in lo..=hi {
                let mut inner = env.clone();
                inner.insert(var.clone(), v);
                flatten(ast, globals, term, &inner, depth, out)?;
            }
        }
        CompTerm::Group(ts) => {
            for t in ts {
                flatten(ast, globals, t, env, depth, out)?;
            }
        }
    }
    Ok(())
}

fn target_name(ast: &SpecAst) -> Result<Option<String>> {
    let declared = ast.directives().find_map(|d| match d {
        Directive::Target(t) => Some(t.clone()),
        _ => None,
    });
    if declared.is_some() {
        return Ok(declared);
    }
    let composites: Vec<&CompositeDef> = ast.composites().collect();
    match composites.len() {
        1 => Ok(Some(composites[0].name.clone())),
        0 if ast.processes().count() == 1 => Ok(None),
        _ => Err(FspError::NoTarget),
    }
}

/// Elaborates the target composite into its components, in composition order.
/// Without composites, a lone process definition is elaborated on its own.
pub fn elaborate_components(ast: &SpecAst, bindings: &Bindings) -> Result<Vec<Lts>> {
    let globals = Globals::new(ast, bindings)?;
    let Some(target) = target_name(ast)? else {
        let p = ast.processes().next().expect("checked by target_name");
        return Ok(vec![build_process(&globals, p, &[])?]);
    };
    let mut instances = Vec::new();
    let term = CompTerm::Instance {
        name: target,
        args: Vec::new(),
    };
    flatten(ast, &globals, &term, &globals.env, 0, &mut instances)?;
    let mut components: Vec<Lts> = Vec::with_capacity(instances.len());
    for (name, args) in instances {
        let p = ast
            .process(&name)
            .expect("references are checked by the parser");
        let lts = build_process(&globals, p, &args)?;
        if components.iter().any(|c| c.name() == lts.name()) {
            return Err(FspError::Duplicate(lts.name().to_string()));
        }
        components.push(lts);
    }
    Ok(components)
}

/// Elaborates the target composite and the control problem declared by the
/// `controllable`, `reach` and `avoid` directives.
pub fn elaborate(ast: &SpecAst, bindings: &Bindings) -> Result<Elaborated> {
    let components = elaborate_components(ast, bindings)?;
    let globals = Globals::new(ast, bindings)?;
    let alphabet: BTreeSet<&Label> = components.iter().flat_map(|c| c.alphabet()).collect();
    let (mut controllable, mut reach, mut avoid) =
        (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
    for d in ast.directives() {
        let (set, patterns) = match d {
            Directive::Controllable(p) => (&mut controllable, p),
            Directive::Reach(p) => (&mut reach, p),
            Directive::Avoid(p) => (&mut avoid, p),
            Directive::Target(_) => continue,
        };
        for l in expand_with(&globals, patterns, &globals.env)? {
            if !alphabet.contains(&l) {
                return Err(FspError::UnknownLabel(l.to_string()));
            }
            set.insert(l);
        }
    }
    let problem = ControlProblem::new(components.clone(), &controllable, &reach, &avoid)?;
    Ok(Elaborated {
        components,
        problem,
    })
}
