use std::collections::HashMap;

use super::lexer::{Tok, Token};
use super::{FrontendError, MAX_LOOP_ITERATIONS, MAX_NESTING};
use crate::program::{
    ActivationGuard, CmpOp, EventKind, EventSpec, GuardLiteral, ModifyOp, Order, Program,
    ProgramBuilder, DEFAULT_BLOCK_SIZE,
};
use crate::value::{Literal, ViewKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone)]
enum Expr {
    Lit(Literal),
    Var(String, Pos),
}

#[derive(Debug, Clone, Copy, Default)]
struct Prefix {
    atomic: bool,
    tear: bool,
}

#[derive(Debug, Clone)]
struct Access {
    block: String,
    view: ViewKind,
    index: Expr,
    pos: Pos,
}

#[derive(Debug, Clone)]
enum Stmt {
    Write(Prefix, Access, Expr),
    Modify(Prefix, Access, ModifyOp, Expr),
    Print(Prefix, Access),
    If {
        prefix: Prefix,
        access: Access,
        cmp: CmpOp,
        constant: Expr,
        then: Vec<Stmt>,
        els: Vec<Stmt>,
    },
    For {
        var: String,
        lo: Expr,
        hi: Expr,
        body: Vec<Stmt>,
        pos: Pos,
    },
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        let t = &self.toks[self.at];
        Pos {
            line: t.line,
            col: t.col,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FrontendError> {
        let p = self.pos();
        Err(FrontendError::syntax(p.line, p.col, msg))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) | Tok::Number(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect(&mut self, sym: &'static str) -> Result<(), FrontendError> {
        if *self.peek() == Tok::Sym(sym) {
            self.bump();
            Ok(())
        } else {
            self.err(format!(
                "expected `{sym}`, found {}",
                Self::describe(self.peek())
            ))
        }
    }

    fn eat_sym(&mut self, sym: &'static str) -> bool {
        if *self.peek() == Tok::Sym(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), FrontendError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.err(format!(
                "expected `{kw}`, found {}",
                Self::describe(self.peek())
            ))
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!(
                "expected identifier, found {}",
                Self::describe(&other)
            )),
        }
    }

    fn number(&mut self) -> Result<Literal, FrontendError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let lit = s.parse::<Literal>();
                match lit {
                    Ok(l) => {
                        self.bump();
                        Ok(l)
                    }
                    Err(e) => self.err(e),
                }
            }
            other => self.err(format!("expected number, found {}", Self::describe(&other))),
        }
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        if self.eat_sym("-") {
            let inner = self.expr()?;
            return match inner {
                Expr::Lit(Literal::Int(v)) => Ok(Expr::Lit(Literal::Int(-v))),
                Expr::Lit(Literal::Float(x)) => Ok(Expr::Lit(Literal::Float(-x))),
                Expr::Var(..) => self.err("negated variables are not supported"),
            };
        }
        match self.peek().clone() {
            Tok::Number(_) => Ok(Expr::Lit(self.number()?)),
            Tok::Ident(s) if s == "NaN" => {
                self.bump();
                Ok(Expr::Lit(Literal::Float(f64::NAN)))
            }
            Tok::Ident(s) if s == "Infinity" => {
                self.bump();
                Ok(Expr::Lit(Literal::Float(f64::INFINITY)))
            }
            Tok::Ident(s) => {
                let pos = self.pos();
                self.bump();
                Ok(Expr::Var(s, pos))
            }
            other => self.err(format!(
                "expected a constant, found {}",
                Self::describe(&other)
            )),
        }
    }

    fn prefix(&mut self) -> Prefix {
        let mut p = Prefix::default();
        loop {
            if self.is_keyword("atomic") {
                self.bump();
                p.atomic = true;
            } else if self.is_keyword("tear") {
                self.bump();
                p.tear = true;
            } else {
                return p;
            }
        }
    }

    fn access(&mut self) -> Result<Access, FrontendError> {
        let pos = self.pos();
        let block = self.ident()?;
        self.expect("-")?;
        let view_pos = self.pos();
        let view_name = self.ident()?;
        let view = view_name
            .parse::<ViewKind>()
            .map_err(|e| FrontendError::syntax(view_pos.line, view_pos.col, e))?;
        self.expect("[")?;
        let index = self.expr()?;
        self.expect("]")?;
        Ok(Access {
            block,
            view,
            index,
            pos,
        })
    }

    fn block_body(&mut self, depth: usize) -> Result<Vec<Stmt>, FrontendError> {
        self.expect("{")?;
        let mut out = Vec::new();
        while !self.eat_sym("}") {
            if *self.peek() == Tok::Eof {
                return self.err("unexpected end of input, expected `}`");
            }
            out.push(self.stmt(depth)?);
        }
        Ok(out)
    }

    fn stmt(&mut self, depth: usize) -> Result<Stmt, FrontendError> {
        let pos = self.pos();
        if self.is_keyword("if") || self.is_keyword("for") {
            if depth >= MAX_NESTING {
                return Err(FrontendError::NestingTooDeep {
                    line: pos.line,
                    col: pos.col,
                    limit: MAX_NESTING,
                });
            }
        }
        if self.is_keyword("while") {
            return Err(FrontendError::UnboundedLoop {
                line: pos.line,
                col: pos.col,
            });
        }
        if self.is_keyword("if") {
            self.bump();
            self.expect("(")?;
            let prefix = self.prefix();
            let access = self.access()?;
            let cmp = if self.eat_sym("==") {
                CmpOp::Eq
            } else if self.eat_sym("!=") {
                CmpOp::Ne
            } else {
                return self.err("expected `==` or `!=` in condition");
            };
            let constant = self.expr()?;
            self.expect(")")?;
            let then = self.block_body(depth + 1)?;
            let els = if self.is_keyword("else") {
                self.bump();
                self.block_body(depth + 1)?
            } else {
                Vec::new()
            };
            return Ok(Stmt::If {
                prefix,
                access,
                cmp,
                constant,
                then,
                els,
            });
        }
        if self.is_keyword("for") {
            self.bump();
            self.expect("(")?;
            let var = self.ident()?;
            self.keyword("in")?;
            let lo = self.expr()?;
            self.expect("..")?;
            if *self.peek() == Tok::Sym(")") {
                return Err(FrontendError::UnboundedLoop {
                    line: pos.line,
                    col: pos.col,
                });
            }
            let hi = self.expr()?;
            self.expect(")")?;
            let body = self.block_body(depth + 1)?;
            return Ok(Stmt::For {
                var,
                lo,
                hi,
                body,
                pos,
            });
        }
        let prefix = self.prefix();
        if self.is_keyword("print") {
            self.bump();
            self.expect("(")?;
            let inner = self.prefix();
            let access = self.access()?;
            self.expect(")")?;
            self.expect(";")?;
            let prefix = Prefix {
                atomic: prefix.atomic || inner.atomic,
                tear: prefix.tear || inner.tear,
            };
            return Ok(Stmt::Print(prefix, access));
        }
        let access = self.access()?;
        let op = match self.bump() {
            Tok::Sym("=") => None,
            Tok::Sym("+=") => Some(ModifyOp::Add),
            Tok::Sym("-=") => Some(ModifyOp::Sub),
            Tok::Sym("&=") => Some(ModifyOp::And),
            Tok::Sym("|=") => Some(ModifyOp::Or),
            Tok::Sym("^=") => Some(ModifyOp::Xor),
            other => {
                return Err(FrontendError::syntax(
                    access.pos.line,
                    access.pos.col,
                    format!(
                        "expected an assignment after the access, found {}",
                        Self::describe(&other)
                    ),
                ))
            }
        };
        let value = self.expr()?;
        self.expect(";")?;
        Ok(match op {
            None => Stmt::Write(prefix, access, value),
            Some(op) => Stmt::Modify(prefix, access, op, value),
        })
    }
}

struct Elaborator {
    builder: ProgramBuilder,
    blocks: HashMap<String, usize>,
}

impl Elaborator {
    fn eval(&self, e: &Expr, env: &HashMap<String, i128>) -> Result<Literal, FrontendError> {
        match e {
            Expr::Lit(l) => Ok(*l),
            Expr::Var(name, pos) => env.get(name).map(|v| Literal::Int(*v)).ok_or_else(|| {
                FrontendError::syntax(pos.line, pos.col, format!("unknown name `{name}`"))
            }),
        }
    }

    fn eval_int(
        &self,
        e: &Expr,
        env: &HashMap<String, i128>,
        pos: Pos,
        what: &str,
    ) -> Result<i128, FrontendError> {
        match self.eval(e, env)? {
            Literal::Int(v) => Ok(v),
            Literal::Float(_) => Err(FrontendError::syntax(
                pos.line,
                pos.col,
                format!("{what} must be an integer"),
            )),
        }
    }

    fn spec(
        &self,
        kind: EventKind,
        prefix: Prefix,
        access: &Access,
        env: &HashMap<String, i128>,
        guard: &ActivationGuard,
    ) -> Result<EventSpec, FrontendError> {
        let block = *self
            .blocks
            .get(&access.block)
            .ok_or_else(|| FrontendError::UnknownBlock {
                name: access.block.clone(),
                line: access.pos.line,
                col: access.pos.col,
            })?;
        let index = self.eval_int(&access.index, env, access.pos, "an index")?;
        let index = u32::try_from(index).map_err(|_| {
            FrontendError::syntax(access.pos.line, access.pos.col, "index out of range")
        })?;
        let order = if prefix.atomic || kind == EventKind::ReadModifyWrite {
            Order::SeqCst
        } else {
            Order::Unordered
        };
        Ok(EventSpec {
            kind,
            order,
            tear: prefix.tear,
            block,
            byte_index: index,
            view: access.view,
            guard: guard.clone(),
            payload: None,
            modify: None,
        })
    }

    fn stmts(
        &mut self,
        thread: usize,
        body: &[Stmt],
        env: &mut HashMap<String, i128>,
        guard: &ActivationGuard,
    ) -> Result<(), FrontendError> {
        for s in body {
            match s {
                Stmt::Write(prefix, access, value) => {
                    let mut spec = self.spec(EventKind::Write, *prefix, access, env, guard)?;
                    spec.payload = Some(self.eval(value, env)?);
                    self.builder.push(thread, spec);
                }
                Stmt::Modify(prefix, access, op, value) => {
                    let mut spec =
                        self.spec(EventKind::ReadModifyWrite, *prefix, access, env, guard)?;
                    spec.payload = Some(self.eval(value, env)?);
                    spec.modify = Some(*op);
                    self.builder.push(thread, spec);
                }
                Stmt::Print(prefix, access) => {
                    let spec = self.spec(EventKind::Read, *prefix, access, env, guard)?;
                    self.builder.push(thread, spec);
                }
                Stmt::If {
                    prefix,
                    access,
                    cmp,
                    constant,
                    then,
                    els,
                } => {
                    let spec = self.spec(EventKind::Read, *prefix, access, env, guard)?;
                    let read = self.builder.push(thread, spec);
                    let constant = self.eval(constant, env)?;
                    let var = self.builder.condition(read, *cmp, constant);
                    self.stmts(
                        thread,
                        then,
                        env,
                        &guard.with(GuardLiteral { var, value: true }),
                    )?;
                    self.stmts(
                        thread,
                        els,
                        env,
                        &guard.with(GuardLiteral { var, value: false }),
                    )?;
                }
                Stmt::For {
                    var,
                    lo,
                    hi,
                    body,
                    pos,
                } => {
                    let lo = self.eval_int(lo, env, *pos, "a loop bound")?;
                    let hi = self.eval_int(hi, env, *pos, "a loop bound")?;
                    if hi - lo > MAX_LOOP_ITERATIONS as i128 {
                        return Err(FrontendError::LoopTooLong {
                            line: pos.line,
                            col: pos.col,
                            limit: MAX_LOOP_ITERATIONS,
                        });
                    }
                    let shadowed = env.get(var).copied();
                    for i in lo..hi {
                        env.insert(var.clone(), i);
                        self.stmts(thread, body, env, guard)?;
                    }
                    match shadowed {
                        Some(v) => env.insert(var.clone(), v),
                        None => env.remove(var),
                    };
                }
            }
        }
        Ok(())
    }
}

/// Parses parameter-free source text into an (unvalidated) program.
pub(crate) fn parse_text(text: &str) -> Result<Program, FrontendError> {
    let toks = super::lexer::tokenize(text)?;
    let mut p = Parser { toks, at: 0 };
    let mut el = Elaborator {
        builder: ProgramBuilder::new(),
        blocks: HashMap::new(),
    };
    let mut threads: Vec<(String, Vec<Stmt>)> = Vec::new();

    while *p.peek() != Tok::Eof {
        if p.is_keyword("var") {
            p.bump();
            let pos = p.pos();
            let name = p.ident()?;
            p.expect("=")?;
            p.keyword("new")?;
            p.keyword("SharedArrayBuffer")?;
            p.expect("(")?;
            let size = if *p.peek() == Tok::Sym(")") {
                DEFAULT_BLOCK_SIZE
            } else {
                let size_pos = p.pos();
                match p.number()? {
                    Literal::Int(v) if v > 0 && v <= u32::MAX as i128 => v as u32,
                    _ => {
                        return Err(FrontendError::syntax(
                            size_pos.line,
                            size_pos.col,
                            "block size must be a positive integer",
                        ))
                    }
                }
            };
            p.expect(")")?;
            p.expect(";")?;
            if el.blocks.contains_key(&name) {
                return Err(FrontendError::syntax(
                    pos.line,
                    pos.col,
                    format!("block `{name}` declared twice"),
                ));
            }
            let idx = el.builder.block(name.clone(), size);
            el.blocks.insert(name, idx);
        } else if p.is_keyword("Thread") {
            p.bump();
            let pos = p.pos();
            let name = p.ident()?;
            if threads.iter().any(|(n, _)| *n == name) {
                return Err(FrontendError::syntax(
                    pos.line,
                    pos.col,
                    format!("thread `{name}` declared twice"),
                ));
            }
            let body = p.block_body(0)?;
            threads.push((name, body));
        } else {
            return p.err(format!(
                "expected `var` or `Thread`, found {}",
                Parser::describe(p.peek())
            ));
        }
    }

    for (name, body) in &threads {
        let t = el.builder.thread(name.clone());
        el.stmts(t, body, &mut HashMap::new(), &ActivationGuard::always())?;
    }
    Ok(el.builder.finish())
}
