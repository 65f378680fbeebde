//! Syntax tree of the FSP subset. No source positions are kept, so two trees
//! compare equal iff they have the same structure.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecAst {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Const(ConstDef),
    Range(RangeDef),
    Process(ProcessDef),
    Composite(CompositeDef),
    Directive(Directive),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstDef {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeDef {
    pub name: String,
    pub lo: Expr,
    pub hi: Expr,
}

/// `Name(P=e, ...) = body, Local[i:lo..hi] = body, ... +{labels}.`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessDef {
    pub name: String,
    pub params: Vec<(String, Expr)>,
    pub body: Body,
    pub locals: Vec<LocalDef>,
    pub alphabet_ext: Option<Vec<LabelPattern>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDef {
    pub name: String,
    pub indices: Vec<IndexDecl>,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexDecl {
    pub var: String,
    pub range: RangeExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RangeExpr {
    Bounds(Expr, Expr),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    Choice(Vec<Branch>),
    Ref(ProcRef),
}

/// `when guard a -> b -> ... -> then`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub guard: Option<Expr>,
    pub actions: Vec<ActionExpr>,
    pub then: Body,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcRef {
    Named { name: String, indices: Vec<Expr> },
    Stop,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionExpr {
    pub name: String,
    pub indices: Vec<Expr>,
}

/// A label set element such as `get[0..M]` or `accept`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelPattern {
    pub name: String,
    pub indices: Vec<IndexPattern>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexPattern {
    /// A single value, or a named range when the expression is a bare range name.
    Value(Expr),
    Range(Expr, Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeDef {
    pub name: String,
    pub terms: Vec<CompTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompTerm {
    Instance {
        name: String,
        args: Vec<Expr>,
    },
    Forall {
        var: String,
        range: RangeExpr,
        term: Box<CompTerm>,
    },
    Group(Vec<CompTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    Controllable(Vec<LabelPattern>),
    Reach(Vec<LabelPattern>),
    Avoid(Vec<LabelPattern>),
    Target(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl SpecAst {
    pub fn processes(&self) -> impl Iterator<Item = &ProcessDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Process(p) => Some(p),
            _ => None,
        })
    }

    pub fn composites(&self) -> impl Iterator<Item = &CompositeDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Composite(c) => Some(c),
            _ => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &ConstDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Const(c) => Some(c),
            _ => None,
        })
    }

    pub fn ranges(&self) -> impl Iterator<Item = &RangeDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Range(r) => Some(r),
            _ => None,
        })
    }

    pub fn directives(&self) -> impl Iterator<Item = &Directive> {
        self.items.iter().filter_map(|i| match i {
            Item::Directive(d) => Some(d),
            _ => None,
        })
    }

    pub fn process(&self, name: &str) -> Option<&ProcessDef> {
        self.processes().find(|p| p.name == name)
    }

    pub fn composite(&self, name: &str) -> Option<&CompositeDef> {
        self.composites().find(|c| c.name == name)
    }
}
