use num_rational::Rational64;

use super::diagnostic::{Diagnostic, DiagnosticKind, Span};
use super::lexer::{lex, Tok, Token};
use crate::scm::{
    build_model_with_limits, Arm, Body, CausalFormula, Context, Event, Expr, Formula, Intervention, Limits, Model,
    ModelError, ModelSpec, Utility, Value, VariableSpec,
};

/// A named exogenous assignment as written in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedContext {
    pub name: String,
    pub values: Vec<(String, Value)>,
}

/// A parsed and validated `.hcm` document.
#[derive(Debug, Clone)]
pub struct ModelDocument {
    spec: ModelSpec,
    contexts: Vec<NamedContext>,
    model: Model,
}

impl PartialEq for ModelDocument {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.contexts == other.contexts
    }
}

impl Eq for ModelDocument {}

impl ModelDocument {
    /// Builds a document from declarations, validating the model and every context.
    pub fn new(spec: ModelSpec, contexts: Vec<NamedContext>) -> Result<Self, ModelError> {
        let model = crate::scm::build_model(&spec)?;
        for c in &contexts {
            resolve_context(&model, c)?;
        }
        Ok(ModelDocument { spec, contexts, model })
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn contexts(&self) -> &[NamedContext] {
        &self.contexts
    }

    pub fn context(&self, name: &str) -> Option<Context> {
        let c = self.contexts.iter().find(|c| c.name == name)?;
        Some(resolve_context(&self.model, c).expect("contexts are validated on construction"))
    }

    /// The context called `main`, or the only context when there is exactly one.
    pub fn default_context(&self) -> Option<(&str, Context)> {
        let c = match self.contexts.iter().find(|c| c.name == "main") {
            Some(c) => c,
            None if self.contexts.len() == 1 => &self.contexts[0],
            None => return None,
        };
        Some((&c.name, self.context(&c.name)?))
    }

    /// Same document with the default utility replaced.
    pub fn with_default(&self, default: Utility) -> Result<Self, ModelError> {
        let mut spec = self.spec.clone();
        spec.default = Some(default);
        let model = self.model.with_default(default)?;
        Ok(ModelDocument {
            spec,
            contexts: self.contexts.clone(),
            model,
        })
    }
}

fn resolve_context(m: &Model, c: &NamedContext) -> Result<Context, ModelError> {
    Context::from_pairs(m, c.values.iter().map(|(n, v)| (n.as_str(), v.clone())))
}

/// Source positions recorded while parsing, used to place semantic errors.
#[derive(Default)]
struct Spans {
    model_name: Span,
    decls: Vec<(String, Span)>,
    refs: Vec<(String, Span)>,
    utility: Option<Span>,
    utility_entries: Vec<(Value, Span)>,
    default: Option<Span>,
    context_names: Vec<(String, Span)>,
    context_entries: Vec<(usize, String, Span)>,
}

/// Deepest expression nesting accepted.
const MAX_DEPTH: usize = 200;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
    spans: Spans,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            depth: 0,
            spans: Spans::default(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &[&str]) -> Diagnostic {
        let found = self.peek().to_string();
        let mut d = Diagnostic::new(
            DiagnosticKind::Parse,
            format!("expected {}, found {found}", expected.join(" or ")),
            self.span(),
        );
        d.found = Some(found);
        d.expected = expected.iter().map(|s| s.to_string()).collect();
        d
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[&tok.to_string()]))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn value(&mut self) -> PResult<(Value, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((Value::Sym(s), self.bump().span)),
            Tok::Int(v) => Ok((Value::Int(v), self.bump().span)),
            _ => Err(self.unexpected(&["value"])),
        }
    }

    fn rational(&mut self) -> PResult<(Utility, Span)> {
        let start = self.span();
        let numer = match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                v
            }
            _ => return Err(self.unexpected(&["rational"])),
        };
        let mut end = start;
        let denom = if self.eat(&Tok::Slash) {
            end = self.span();
            match *self.peek() {
                Tok::Int(d) if d > 0 => {
                    self.bump();
                    d
                }
                Tok::Int(_) => {
                    return Err(Diagnostic::new(
                        DiagnosticKind::Parse,
                        "denominator must be a positive integer",
                        self.span(),
                    ))
                }
                _ => return Err(self.unexpected(&["positive integer"])),
            }
        } else {
            1
        };
        let span = Span { end: end.end, ..start };
        Ok((Rational64::new(numer, denom), span))
    }

    fn opt_semi(&mut self) {
        self.eat(&Tok::Semi);
    }

    // --- expressions ---

    fn expr(&mut self) -> PResult<Expr> {
        let first = self.conj()?;
        if *self.peek() != Tok::Pipe {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(&Tok::Pipe) {
            items.push(self.conj()?);
        }
        Ok(Expr::Or(items))
    }

    fn conj(&mut self) -> PResult<Expr> {
        let first = self.unary()?;
        if *self.peek() != Tok::Amp {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(&Tok::Amp) {
            items.push(self.unary()?);
        }
        Ok(Expr::And(items))
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.depth >= MAX_DEPTH {
            return Err(Diagnostic::new(DiagnosticKind::Parse, "expression nested too deeply", self.span()));
        }
        self.depth += 1;
        let e = if self.eat(&Tok::Bang) {
            self.unary().map(Expr::negate)
        } else {
            self.atom()
        };
        self.depth -= 1;
        e
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Int(0) => {
                self.bump();
                Ok(Expr::Const(false))
            }
            Tok::Int(1) => {
                self.bump();
                Ok(Expr::Const(true))
            }
            Tok::Ident(name) => {
                let span = self.bump().span;
                self.spans.refs.push((name.clone(), span));
                let negated = match self.peek() {
                    Tok::Eq => false,
                    Tok::NotEq => true,
                    _ => return Ok(Expr::Truthy(name)),
                };
                self.bump();
                let (value, _) = self.value()?;
                Ok(Expr::Is {
                    var: name,
                    value,
                    negated,
                })
            }
            _ => Err(self.unexpected(&["`(`", "`!`", "`0`", "`1`", "identifier"])),
        }
    }

    fn body(&mut self) -> PResult<Body> {
        if !self.eat(&Tok::Case) {
            return Ok(Body::Bool(self.expr()?));
        }
        self.expect(Tok::LBrace)?;
        let mut arms = Vec::new();
        let mut otherwise = None;
        loop {
            match self.peek() {
                Tok::When => {
                    self.bump();
                    let guard = self.expr()?;
                    self.expect(Tok::Arrow)?;
                    let (value, _) = self.value()?;
                    self.opt_semi();
                    arms.push(Arm { guard, value });
                }
                Tok::Else => {
                    self.bump();
                    self.expect(Tok::Arrow)?;
                    otherwise = Some(self.value()?.0);
                    self.opt_semi();
                    self.expect(Tok::RBrace)?;
                    break;
                }
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                _ => return Err(self.unexpected(&["`when`", "`else`", "`}`"])),
            }
        }
        Ok(Body::Case { arms, otherwise })
    }

    // --- documents ---

    fn range(&mut self) -> PResult<Vec<Value>> {
        self.expect(Tok::LBrace)?;
        let mut values = vec![self.value()?.0];
        while self.eat(&Tok::Comma) {
            if *self.peek() == Tok::RBrace {
                break;
            }
            values.push(self.value()?.0);
        }
        self.expect(Tok::RBrace)?;
        Ok(values)
    }

    fn document(&mut self) -> PResult<(ModelSpec, Vec<NamedContext>)> {
        if self.eat(&Tok::Version) {
            let span = self.span();
            match *self.peek() {
                Tok::Int(1) => {
                    self.bump();
                }
                Tok::Int(v) => {
                    let mut d = Diagnostic::new(DiagnosticKind::Parse, format!("unsupported format version {v}"), span);
                    d.found = Some(v.to_string());
                    d.expected = vec!["`1`".into()];
                    return Err(d);
                }
                _ => return Err(self.unexpected(&["`1`"])),
            }
            self.opt_semi();
        }
        self.expect(Tok::Model)?;
        let (name, name_span) = self.ident()?;
        self.spans.model_name = name_span;
        self.expect(Tok::LBrace)?;
        let mut spec = ModelSpec {
            name,
            ..ModelSpec::default()
        };
        loop {
            let kw = self.peek().clone();
            match kw {
                Tok::Exo | Tok::Var | Tok::Outcome => {
                    self.bump();
                    let (var, span) = self.ident()?;
                    self.spans.decls.push((var.clone(), span));
                    self.expect(Tok::Colon)?;
                    let range = self.range()?;
                    let decl = if kw == Tok::Exo {
                        VariableSpec::exogenous(var, range)
                    } else {
                        self.expect(Tok::Eq)?;
                        let body = self.body()?;
                        if kw == Tok::Var {
                            VariableSpec::endogenous(var, range, body)
                        } else {
                            VariableSpec::outcome(var, range, body)
                        }
                    };
                    self.opt_semi();
                    spec.variables.push(decl);
                }
                Tok::Utility => {
                    let span = self.bump().span;
                    if self.spans.utility.is_some() {
                        return Err(Diagnostic::new(DiagnosticKind::Parse, "utility declared twice", span));
                    }
                    self.spans.utility = Some(span);
                    self.expect(Tok::LBrace)?;
                    while *self.peek() != Tok::RBrace {
                        let (value, vspan) = self.value()?;
                        self.expect(Tok::Colon)?;
                        let (u, _) = self.rational()?;
                        self.spans.utility_entries.push((value.clone(), vspan));
                        spec.utility.push((value, u));
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBrace)?;
                    self.opt_semi();
                }
                Tok::Default => {
                    let span = self.bump().span;
                    if self.spans.default.is_some() {
                        return Err(Diagnostic::new(DiagnosticKind::Parse, "default declared twice", span));
                    }
                    let (d, dspan) = self.rational()?;
                    self.spans.default = Some(dspan);
                    spec.default = Some(d);
                    self.opt_semi();
                }
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                _ => {
                    return Err(self.unexpected(&["`exo`", "`var`", "`outcome`", "`utility`", "`default`", "`}`"]));
                }
            }
        }

        let mut contexts = Vec::new();
        while self.eat(&Tok::Context) {
            let (name, span) = self.ident()?;
            self.spans.context_names.push((name.clone(), span));
            self.expect(Tok::LBrace)?;
            let mut values = Vec::new();
            while *self.peek() != Tok::RBrace {
                let (var, vspan) = self.ident()?;
                self.expect(Tok::Eq)?;
                let (value, _) = self.value()?;
                self.spans.context_entries.push((contexts.len(), var.clone(), vspan));
                values.push((var, value));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
            self.opt_semi();
            contexts.push(NamedContext { name, values });
        }
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected(&["`context`", "end of input"]));
        }
        Ok((spec, contexts))
    }
}

impl Spans {
    fn decl(&self, name: &str) -> Option<Span> {
        self.decls.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    fn place(&self, err: &ModelError) -> Span {
        let fallback = self.model_name;
        match err {
            ModelError::DuplicateVariable(n) => self
                .decls
                .iter()
                .filter(|(d, _)| d == n)
                .nth(1)
                .map(|(_, s)| *s)
                .unwrap_or(fallback),
            ModelError::UndefinedVariable { name, .. } => self
                .refs
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, s)| *s)
                .unwrap_or(fallback),
            ModelError::CyclicModel(cycle) => cycle.first().and_then(|n| self.decl(n)).unwrap_or(fallback),
            ModelError::EquationNotTotal(n)
            | ModelError::DuplicateOutcome(n)
            | ModelError::EmptyRange(n)
            | ModelError::DuplicateValue { variable: n, .. } => self.decl(n).unwrap_or(fallback),
            ModelError::ValueOutOfRange { variable, .. } => self.decl(variable).unwrap_or(fallback),
            ModelError::UtilityOutOfRange { value, .. } | ModelError::DuplicateUtility(value) => self
                .utility_entries
                .iter()
                .find(|(v, _)| v.to_string() == *value)
                .map(|(_, s)| *s)
                .or(self.utility)
                .unwrap_or(fallback),
            ModelError::UtilityIncomplete(_) => self.utility.unwrap_or(fallback),
            ModelError::DefaultOutOfRange(_) => self.default.unwrap_or(fallback),
            _ => fallback,
        }
    }
}

fn semantic(message: String, span: Span) -> Diagnostic {
    Diagnostic::new(DiagnosticKind::Semantic, message, span)
}

/// Parses declarations without building the model.
#[cfg(test)]
pub(crate) fn parse_spec(src: &str) -> Result<(ModelSpec, Vec<NamedContext>), Diagnostic> {
    Parser::new(src)?.document()
}

/// Parses and validates a `.hcm` document under the default size limits.
pub fn parse_model(src: &str) -> Result<ModelDocument, Diagnostic> {
    parse_model_with_limits(src, &Limits::default())
}

pub fn parse_model_with_limits(src: &str, limits: &Limits) -> Result<ModelDocument, Diagnostic> {
    let mut p = Parser::new(src)?;
    let (spec, contexts) = p.document()?;
    let spans = p.spans;
    let model = build_model_with_limits(&spec, limits).map_err(|e| semantic(e.to_string(), spans.place(&e)))?;
    for (i, c) in contexts.iter().enumerate() {
        if spans.context_names[..i].iter().any(|(n, _)| *n == c.name) {
            return Err(semantic(
                format!("context `{}` declared twice", c.name),
                spans.context_names[i].1,
            ));
        }
        resolve_context(&model, c).map_err(|e| {
            let span = match &e {
                ModelError::UndefinedVariable { name: n, .. }
                | ModelError::NotExogenous(n)
                | ModelError::ValueOutOfRange { variable: n, .. }
                | ModelError::DuplicateAssignment(n) => spans
                    .context_entries
                    .iter()
                    .rfind(|(ci, v, _)| *ci == i && v == n)
                    .map(|(_, _, s)| *s),
                _ => None,
            };
            semantic(
                format!("in context `{}`: {e}", c.name),
                span.unwrap_or(spans.context_names[i].1),
            )
        })?;
    }
    Ok(ModelDocument { spec, contexts, model })
}

/// A query formula `[Y1 <- y1, ...] phi` with names not yet resolved against a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaAst {
    pub prefix: Vec<(String, Value)>,
    pub body: Expr,
    refs: Vec<(String, Span)>,
    whole: Span,
}

/// Parses a formula; `[]` is accepted as an empty prefix.
pub fn parse_formula(src: &str) -> Result<FormulaAst, Diagnostic> {
    let mut p = Parser::new(src)?;
    let mut prefix = Vec::new();
    if p.eat(&Tok::LBracket) {
        while *p.peek() != Tok::RBracket {
            let (var, span) = p.ident()?;
            p.spans.refs.push((var.clone(), span));
            p.expect(Tok::LeftArrow)?;
            let (value, _) = p.value()?;
            prefix.push((var, value));
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
        p.expect(Tok::RBracket)?;
    }
    let body = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected(&["`&`", "`|`", "end of input"]));
    }
    let whole = Span {
        start: 0,
        end: src.len(),
        line: 1,
        col: 1,
    };
    Ok(FormulaAst {
        prefix,
        body,
        refs: p.spans.refs,
        whole,
    })
}

impl FormulaAst {
    fn span_of(&self, name: &str) -> Span {
        self.refs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .unwrap_or(self.whole)
    }

    fn lookup(&self, m: &Model, name: &str, value: &Value) -> PResult<(crate::scm::VarId, usize)> {
        let id = m
            .var(name)
            .ok_or_else(|| semantic(format!("unknown variable `{name}`"), self.span_of(name)))?;
        let idx = m.value_index(id, value).ok_or_else(|| {
            semantic(
                format!("value `{value}` is not in the range of `{name}`"),
                self.span_of(name),
            )
        })?;
        Ok((id, idx))
    }

    fn convert(&self, m: &Model, e: &Expr) -> PResult<Formula> {
        Ok(match e {
            Expr::Const(b) => Formula::Const(*b),
            Expr::Truthy(name) => {
                let (id, idx) = self.lookup(m, name, &Value::Int(1))?;
                Formula::Is(id, idx)
            }
            Expr::Is { var, value, negated } => {
                let (id, idx) = self.lookup(m, var, value)?;
                if *negated {
                    Formula::negate(Formula::Is(id, idx))
                } else {
                    Formula::Is(id, idx)
                }
            }
            Expr::Not(inner) => Formula::negate(self.convert(m, inner)?),
            Expr::And(es) => Formula::And(es.iter().map(|e| self.convert(m, e)).collect::<PResult<_>>()?),
            Expr::Or(es) => Formula::Or(es.iter().map(|e| self.convert(m, e)).collect::<PResult<_>>()?),
        })
    }

    /// Resolves the body alone; fails if there is a non-empty prefix.
    pub fn resolve_body(&self, m: &Model) -> Result<Formula, Diagnostic> {
        if !self.prefix.is_empty() {
            return Err(semantic("an intervention prefix is not allowed here".into(), self.whole));
        }
        self.convert(m, &self.body)
    }

    pub fn resolve(&self, m: &Model) -> Result<CausalFormula, Diagnostic> {
        let body = self.convert(m, &self.body)?;
        if self.prefix.is_empty() {
            return Ok(CausalFormula::plain(body));
        }
        let targets = self
            .prefix
            .iter()
            .map(|(n, v)| self.lookup(m, n, v))
            .collect::<PResult<Vec<_>>>()?;
        let iv = Intervention::new(m, targets).map_err(|e| semantic(e.to_string(), self.whole))?;
        Ok(CausalFormula {
            prefix: Some(iv),
            body,
        })
    }
}

fn flatten_conjuncts<'e>(e: &'e Expr, out: &mut Vec<&'e Expr>) {
    match e {
        Expr::And(es) => es.iter().for_each(|e| flatten_conjuncts(e, out)),
        e => out.push(e),
    }
}

/// Parses `X1 = x1 & ... & Xk = xk` over distinct variables; a bare `X` means `X = 1`.
pub fn parse_event(m: &Model, src: &str) -> Result<Event, Diagnostic> {
    let ast = parse_formula(src)?;
    if !ast.prefix.is_empty() {
        return Err(semantic("an event cannot carry an intervention prefix".into(), ast.whole));
    }
    let mut conjuncts = Vec::new();
    flatten_conjuncts(&ast.body, &mut conjuncts);
    let mut pairs = Vec::new();
    for c in conjuncts {
        let (name, value) = match c {
            Expr::Truthy(n) => (n, Value::Int(1)),
            Expr::Is {
                var,
                value,
                negated: false,
            } => (var, value.clone()),
            _ => {
                return Err(semantic(
                    "an event is a conjunction of `X = v` terms".into(),
                    ast.whole,
                ))
            }
        };
        let pair = ast.lookup(m, name, &value)?;
        if pairs.iter().any(|(v, _)| *v == pair.0) {
            return Err(semantic(format!("variable `{name}` appears twice in the event"), ast.span_of(name)));
        }
        pairs.push(pair);
    }
    Event::new(pairs).ok_or_else(|| semantic("empty event".into(), ast.whole))
}

/// Parses an assignment to exactly the variables of `event`, returned in the event's order.
pub fn parse_contrast(m: &Model, event: &Event, src: &str) -> Result<Vec<usize>, Diagnostic> {
    let other = parse_event(m, src)?;
    let whole = Span {
        start: 0,
        end: src.len(),
        line: 1,
        col: 1,
    };
    if other.len() != event.len() {
        return Err(semantic(
            format!("contrast assigns {} variables but the event has {}", other.len(), event.len()),
            whole,
        ));
    }
    event
        .vars()
        .map(|v| {
            other.pairs().iter().find(|(w, _)| *w == v).map(|(_, x)| *x).ok_or_else(|| {
                semantic(
                    format!("contrast does not assign `{}`", m.variable(v).name),
                    whole,
                )
            })
        })
        .collect()
}
