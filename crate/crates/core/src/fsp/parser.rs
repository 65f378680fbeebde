//! Lexer and recursive-descent parser for the FSP subset.

use std::collections::BTreeSet;
use std::fmt;

use super::ast::*;
use super::FspError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Arrow,
    Par,
    Bar,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Dot,
    DotDot,
    Colon,
    Assign,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    /// Recognized so it can be rejected with a precise diagnostic.
    Unsupported(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(i) => return write!(f, "`{i}`"),
            Tok::Unsupported(s) => return write!(f, "`{s}`"),
            Tok::Arrow => "->",
            Tok::Par => "||",
            Tok::Bar => "|",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Colon => ":",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, FspError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && next == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c == '/' && next == Some('*') {
            let (sl, sc) = (line, col);
            advance(&mut i, &mut line, &mut col, 2);
            loop {
                if i + 1 >= chars.len() {
                    return Err(FspError::Syntax {
                        line: sl,
                        col: sc,
                        expected: vec!["`*/`".into()],
                        found: "end of input".into(),
                    });
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance(&mut i, &mut line, &mut col, 2);
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let (tl, tc) = (line, col);
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let v = s.parse::<i64>().map_err(|_| FspError::Syntax {
                line: tl,
                col: tc,
                expected: vec!["integer literal".into()],
                found: s.clone(),
            })?;
            (Tok::Int(v), j - i)
        } else {
            match (c, next) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('|', Some('|')) => (Tok::Par, 2),
                ('.', Some('.')) => (Tok::DotDot, 2),
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('!', Some('=')) => (Tok::Ne, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('&', Some('&')) => (Tok::Unsupported("&&"), 2),
                ('|', _) => (Tok::Bar, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBrack, 1),
                (']', _) => (Tok::RBrack, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                (':', _) => (Tok::Colon, 1),
                ('=', _) => (Tok::Assign, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Unsupported("*"), 1),
                ('/', _) => (Tok::Unsupported("/"), 1),
                ('%', _) => (Tok::Unsupported("%"), 1),
                ('!', _) => (Tok::Unsupported("!"), 1),
                ('\\', _) => (Tok::Unsupported("\\"), 1),
                ('@', _) => (Tok::Unsupported("@"), 1),
                ('?', _) => (Tok::Unsupported("?"), 1),
                _ => {
                    return Err(FspError::Syntax {
                        line: tl,
                        col: tc,
                        expected: vec!["a token".into()],
                        found: format!("`{c}`"),
                    })
                }
            }
        };
        advance(&mut i, &mut line, &mut col, len);
        out.push(Token {
            tok,
            line: tl,
            col: tc,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

const KEYWORDS: &[&str] = &["const", "range", "when", "forall", "STOP", "ERROR"];

fn is_process_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase()) && !KEYWORDS.contains(&s)
}

fn is_action_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_lowercase() || c == '_') && !KEYWORDS.contains(&s)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, FspError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = &self.toks[self.pos];
        if let Tok::Unsupported(op) = t.tok {
            return Err(FspError::Unsupported {
                line: t.line,
                col: t.col,
                what: format!("operator `{op}`"),
            });
        }
        Err(FspError::Syntax {
            line: t.line,
            col: t.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.to_string(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(&[&tok.to_string()])
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&[what]),
        }
    }

    fn process_name(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if is_process_name(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&["process name"]),
        }
    }

    fn spec(&mut self) -> PResult<SpecAst> {
        let mut items = Vec::new();
        loop {
            let item = match self.peek().clone() {
                Tok::Eof => break,
                Tok::Par => Item::Composite(self.composite()?),
                Tok::Ident(s) => match s.as_str() {
                    "const" => {
                        self.bump();
                        let name = self.ident("constant name")?;
                        self.expect(Tok::Assign)?;
                        Item::Const(ConstDef {
                            name,
                            value: self.expr()?,
                        })
                    }
                    "range" => {
                        self.bump();
                        let name = self.ident("range name")?;
                        self.expect(Tok::Assign)?;
                        let lo = self.expr()?;
                        self.expect(Tok::DotDot)?;
                        Item::Range(RangeDef {
                            name,
                            lo,
                            hi: self.expr()?,
                        })
                    }
                    "controllable" => {
                        self.bump();
                        Item::Directive(Directive::Controllable(self.label_set()?))
                    }
                    "reach" => {
                        self.bump();
                        Item::Directive(Directive::Reach(self.label_set()?))
                    }
                    "avoid" => {
                        self.bump();
                        Item::Directive(Directive::Avoid(self.label_set()?))
                    }
                    "target" => {
                        self.bump();
                        Item::Directive(Directive::Target(self.process_name()?))
                    }
                    _ if is_process_name(&s) => Item::Process(self.process()?),
                    _ => return self.definition_expected(),
                },
                _ => return self.definition_expected(),
            };
            items.push(item);
        }
        Ok(SpecAst { items })
    }

    fn definition_expected<T>(&self) -> PResult<T> {
        self.error(&[
            "process name",
            "`||`",
            "`const`",
            "`range`",
            "`controllable`",
            "`reach`",
            "`avoid`",
            "`target`",
        ])
    }

    fn process(&mut self) -> PResult<ProcessDef> {
        let name = self.process_name()?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                let p = self.ident("parameter name")?;
                self.expect(Tok::Assign)?;
                params.push((p, self.expr()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        self.expect(Tok::Assign)?;
        let body = self.body()?;
        let mut locals = Vec::new();
        while self.eat(&Tok::Comma) {
            let lname = self.process_name()?;
            let mut indices = Vec::new();
            while self.eat(&Tok::LBrack) {
                let var = self.ident("index variable")?;
                self.expect(Tok::Colon)?;
                indices.push(IndexDecl {
                    var,
                    range: self.range_expr()?,
                });
                self.expect(Tok::RBrack)?;
            }
            self.expect(Tok::Assign)?;
            locals.push(LocalDef {
                name: lname,
                indices,
                body: self.body()?,
            });
        }
        let alphabet_ext = if self.eat(&Tok::Plus) {
            Some(self.label_set()?)
        } else {
            None
        };
        if !self.eat(&Tok::Dot) {
            return self.error(&["`,`", "`+`", "`.`"]);
        }
        Ok(ProcessDef {
            name,
            params,
            body,
            locals,
            alphabet_ext,
        })
    }

    fn range_expr(&mut self) -> PResult<RangeExpr> {
        let lo = self.expr()?;
        if self.eat(&Tok::DotDot) {
            return Ok(RangeExpr::Bounds(lo, self.expr()?));
        }
        match lo {
            Expr::Var(name) => Ok(RangeExpr::Named(name)),
            _ => self.error(&["`..`"]),
        }
    }

    fn body(&mut self) -> PResult<Body> {
        if self.eat(&Tok::LParen) {
            let mut branches = vec![self.branch()?];
            while self.eat(&Tok::Bar) {
                branches.push(self.branch()?);
            }
            if !self.eat(&Tok::RParen) {
                return self.error(&["`|`", "`)`"]);
            }
            Ok(Body::Choice(branches))
        } else {
            Ok(Body::Ref(self.proc_ref()?))
        }
    }

    fn proc_ref(&mut self) -> PResult<ProcRef> {
        if self.is_kw("STOP") {
            self.bump();
            return Ok(ProcRef::Stop);
        }
        if self.is_kw("ERROR") {
            self.bump();
            return Ok(ProcRef::Error);
        }
        let name = match self.peek() {
            Tok::Ident(s) if is_process_name(s) => s.clone(),
            _ => return self.error(&["`(`", "process name", "`STOP`", "`ERROR`"]),
        };
        self.bump();
        let mut indices = Vec::new();
        while self.eat(&Tok::LBrack) {
            indices.push(self.expr()?);
            self.expect(Tok::RBrack)?;
        }
        Ok(ProcRef::Named { name, indices })
    }

    fn branch(&mut self) -> PResult<Branch> {
        let guard = if self.is_kw("when") {
            self.bump();
            Some(self.expr()?)
        } else {
            None
        };
        let mut actions = vec![self.action()?];
        self.expect(Tok::Arrow)?;
        while matches!(self.peek(), Tok::Ident(s) if is_action_name(s)) {
            actions.push(self.action()?);
            self.expect(Tok::Arrow)?;
        }
        Ok(Branch {
            guard,
            actions,
            then: self.body()?,
        })
    }

    fn action(&mut self) -> PResult<ActionExpr> {
        let name = match self.peek() {
            Tok::Ident(s) if is_action_name(s) => s.clone(),
            _ => return self.error(&["action name", "`when`"]),
        };
        self.bump();
        let mut indices = Vec::new();
        while self.eat(&Tok::LBrack) {
            indices.push(self.expr()?);
            self.expect(Tok::RBrack)?;
        }
        Ok(ActionExpr { name, indices })
    }

    fn label_set(&mut self) -> PResult<Vec<LabelPattern>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            let name = match self.peek() {
                Tok::Ident(s) if is_action_name(s) => s.clone(),
                _ => return self.error(&["action name"]),
            };
            self.bump();
            let mut indices = Vec::new();
            while self.eat(&Tok::LBrack) {
                let lo = self.expr()?;
                let idx = if self.eat(&Tok::DotDot) {
                    IndexPattern::Range(lo, self.expr()?)
                } else {
                    IndexPattern::Value(lo)
                };
                indices.push(idx);
                self.expect(Tok::RBrack)?;
            }
            out.push(LabelPattern { name, indices });
            if self.eat(&Tok::Comma) {
                continue;
            }
            if self.eat(&Tok::RBrace) {
                return Ok(out);
            }
            return self.error(&["`,`", "`}`"]);
        }
    }

    fn composite(&mut self) -> PResult<CompositeDef> {
        self.expect(Tok::Par)?;
        let name = self.process_name()?;
        self.expect(Tok::Assign)?;
        let terms = self.comp_terms()?;
        if !self.eat(&Tok::Dot) {
            return self.error(&["`||`", "`.`"]);
        }
        Ok(CompositeDef { name, terms })
    }

    fn comp_terms(&mut self) -> PResult<Vec<CompTerm>> {
        let mut terms = vec![self.comp_term()?];
        while self.eat(&Tok::Par) {
            terms.push(self.comp_term()?);
        }
        Ok(terms)
    }

    fn comp_term(&mut self) -> PResult<CompTerm> {
        if self.is_kw("forall") {
            self.bump();
            self.expect(Tok::LBrack)?;
            let var = self.ident("index variable")?;
            self.expect(Tok::Colon)?;
            let range = self.range_expr()?;
            self.expect(Tok::RBrack)?;
            return Ok(CompTerm::Forall {
                var,
                range,
                term: Box::new(self.comp_term()?),
            });
        }
        if self.eat(&Tok::LParen) {
            let terms = self.comp_terms()?;
            if !self.eat(&Tok::RParen) {
                return self.error(&["`||`", "`)`"]);
            }
            return Ok(CompTerm::Group(terms));
        }
        let name = match self.peek() {
            Tok::Ident(s) if is_process_name(s) => s.clone(),
            _ => return self.error(&["process name", "`forall`", "`(`"]),
        };
        self.bump();
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(CompTerm::Instance { name, args })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::EqEq | Tok::Assign => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            _ => return Ok(lhs),
        };
        // `=` doubles as equality inside guards, but in `Name(P=e)` and `const`
        // it is consumed by the caller before an expression starts.
        self.bump();
        let rhs = self.additive()?;
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Plus if !matches!(self.peek_at(1), Tok::LBrace) => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                Tok::Unsupported(_) => return self.error(&[]),
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Expr::Var(s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return self.error(&["`)`"]);
                }
                Ok(e)
            }
            _ => self.error(&["integer", "identifier", "`(`", "`-`"]),
        }
    }
}

/// Parses FSP text and checks that every name it references is defined.
pub fn parse(text: &str) -> Result<SpecAst, FspError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let ast = p.spec()?;
    check(&ast)?;
    Ok(ast)
}

fn check(ast: &SpecAst) -> Result<(), FspError> {
    if !ast
        .items
        .iter()
        .any(|i| matches!(i, Item::Process(_) | Item::Composite(_)))
    {
        return Err(FspError::NoDefinitions);
    }
    let mut seen = BTreeSet::new();
    let mut dup = |name: &str| -> Result<(), FspError> {
        if seen.insert(name.to_string()) {
            Ok(())
        } else {
            Err(FspError::Duplicate(name.to_string()))
        }
    };
    for item in &ast.items {
        match item {
            Item::Const(c) => dup(&c.name)?,
            Item::Range(r) => dup(&r.name)?,
            Item::Process(p) => dup(&p.name)?,
            Item::Composite(c) => dup(&c.name)?,
            Item::Directive(_) => {}
        }
    }
    let targets: Vec<&String> = ast
        .directives()
        .filter_map(|d| match d {
            Directive::Target(t) => Some(t),
            _ => None,
        })
        .collect();
    if targets.len() > 1 {
        return Err(FspError::Duplicate("target".into()));
    }
    for t in targets {
        if ast.composite(t).is_none() {
            return Err(FspError::UnknownReference {
                name: t.clone(),
                context: "target".into(),
            });
        }
    }
    for p in ast.processes() {
        let mut locals = BTreeSet::from([p.name.as_str()]);
        let mut params = BTreeSet::new();
        for (name, _) in &p.params {
            if !params.insert(name.as_str()) {
                return Err(FspError::Duplicate(format!("{}.{}", p.name, name)));
            }
        }
        for l in &p.locals {
            if !locals.insert(l.name.as_str()) {
                return Err(FspError::Duplicate(format!("{}.{}", p.name, l.name)));
            }
        }
        let bodies = std::iter::once(&p.body).chain(p.locals.iter().map(|l| &l.body));
        for b in bodies {
            check_body(b, &locals, &p.name)?;
        }
    }
    for c in ast.composites() {
        for t in &c.terms {
            check_term(ast, t, &c.name)?;
        }
    }
    Ok(())
}

fn check_body(body: &Body, locals: &BTreeSet<&str>, process: &str) -> Result<(), FspError> {
    match body {
        Body::Ref(ProcRef::Named { name, .. }) if !locals.contains(name.as_str()) => {
            Err(FspError::UnknownReference {
                name: name.clone(),
                context: process.to_string(),
            })
        }
        Body::Ref(_) => Ok(()),
        Body::Choice(branches) => branches
            .iter()
            .try_for_each(|b| check_body(&b.then, locals, process)),
    }
}

fn check_term(ast: &SpecAst, term: &CompTerm, composite: &str) -> Result<(), FspError> {
    match term {
        CompTerm::Instance { name, .. } => {
            if name == composite || (ast.process(name).is_none() && ast.composite(name).is_none()) {
                return Err(FspError::UnknownReference {
                    name: name.clone(),
                    context: composite.to_string(),
                });
            }
            Ok(())
        }
        CompTerm::Forall { term, .. } => check_term(ast, term, composite),
        CompTerm::Group(ts) => ts.iter().try_for_each(|t| check_term(ast, t, composite)),
    }
}
