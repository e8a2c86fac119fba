//! Recursive-descent parser and evaluator for session files.
//!
//! Expressions evaluate directly into algebra values; `^` is the wedge on
//! forms, multivectors and fields, and integer exponentiation on scalars.
//! Division is allowed by nonzero constants only.

use std::collections::BTreeMap;

use bigiso::big_tangent::BigSection;
use bigiso::chart::Chart;
use bigiso::exterior::{KForm, KMultivector, VectorField};
use bigiso::polarization::PolarizationSpec;
use bigiso::scalar::{Rat, Scalar};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::lexer::{lex, Pos, Tok, Token};
use crate::session::*;
use crate::ParseError;

/// Names that may not be declared: DSL primitives and the fibre coordinate.
const RESERVED: [&str; 5] = ["i", "c", "t", "d", "D"];

const KEYWORDS: [&str; 12] = [
    "manifold",
    "scalar",
    "vfield",
    "form",
    "bivector",
    "section",
    "structure",
    "gpdata",
    "polarization",
    "foliation",
    "check",
    "dim",
];

pub struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek2(&self) -> &Token {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek().tok, Tok::Newline) {
            self.next();
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == tok {
            Ok(t)
        } else {
            Err(ParseError::syntax(t.pos, format!("expected {tok}, found {}", t.tok)))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Pos), ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            other => Err(ParseError::syntax(t.pos, format!("expected a name, found {other}"))),
        }
    }

    fn expect_int(&mut self) -> Result<(u64, Pos), ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok((n, t.pos)),
            other => Err(ParseError::syntax(t.pos, format!("expected an integer, found {other}"))),
        }
    }

    fn end_statement(&mut self) -> Result<(), ParseError> {
        match &self.peek().tok {
            Tok::Newline => {
                self.next();
                Ok(())
            }
            Tok::Eof => Ok(()),
            other => {
                let pos = self.peek().pos;
                Err(ParseError::syntax(pos, format!("expected end of line, found {other}")))
            }
        }
    }
}

/// Evaluation context: the chart plus declared values.
struct Ctx<'s> {
    chart: Chart,
    values: &'s BTreeMap<String, Value>,
}

impl Ctx<'_> {
    fn lookup(&self, name: &str, pos: Pos) -> Result<Value, ParseError> {
        if let Some(i) = self.chart.index(name) {
            return Ok(Value::Scalar(Scalar::coord(&self.chart, i)));
        }
        self.values
            .get(name)
            .cloned()
            .ok_or_else(|| ParseError::unknown(pos, name))
    }
}

fn value_add(a: Value, b: Value, pos: Pos) -> Result<Value, ParseError> {
    match (a, b) {
        (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(&a + &b)),
        (Value::Field(a), Value::Field(b)) => Ok(Value::Field(&a + &b)),
        (Value::Form(a), Value::Form(b)) if a.degree() == b.degree() => {
            Ok(Value::Form(&a + &b))
        }
        (Value::Multivector(a), Value::Multivector(b)) if a.degree() == b.degree() => {
            Ok(Value::Multivector(&a + &b))
        }
        (Value::Section(a), Value::Section(b)) => Ok(Value::Section(&a + &b)),
        (Value::Field(a), Value::Multivector(b)) | (Value::Multivector(b), Value::Field(a))
            if b.degree() == 1 =>
        {
            Ok(Value::Multivector(&KMultivector::from_vector(&a) + &b))
        }
        (a, b) => Err(ParseError::syntax(
            pos,
            format!("cannot add {} and {}", a.kind(), b.kind()),
        )),
    }
}

fn value_neg(a: Value) -> Value {
    match a {
        Value::Scalar(s) => Value::Scalar(-&s),
        Value::Form(w) => Value::Form(-&w),
        Value::Multivector(p) => Value::Multivector(-&p),
        Value::Field(x) => Value::Field(-&x),
        Value::Section(s) => Value::Section(-&s),
    }
}

fn value_mul(a: Value, b: Value, pos: Pos) -> Result<Value, ParseError> {
    match (a, b) {
        (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(&a * &b)),
        (Value::Scalar(s), Value::Form(w)) | (Value::Form(w), Value::Scalar(s)) => {
            Ok(Value::Form(w.scale(&s)))
        }
        (Value::Scalar(s), Value::Multivector(p)) | (Value::Multivector(p), Value::Scalar(s)) => {
            Ok(Value::Multivector(p.scale(&s)))
        }
        (Value::Scalar(s), Value::Field(x)) | (Value::Field(x), Value::Scalar(s)) => {
            Ok(Value::Field(x.scale(&s)))
        }
        (Value::Scalar(s), Value::Section(x)) | (Value::Section(x), Value::Scalar(s)) => {
            Ok(Value::Section(x.scale(&s)))
        }
        (a, b) => Err(ParseError::syntax(
            pos,
            format!("cannot multiply {} by {}", a.kind(), b.kind()),
        )),
    }
}

fn value_div(a: Value, b: Value, pos: Pos) -> Result<Value, ParseError> {
    let Value::Scalar(ref s) = b else {
        return Err(ParseError::syntax(pos, "division requires a constant divisor"));
    };
    let Some(c) = s.as_constant() else {
        return Err(ParseError::syntax(pos, "division by a non-constant scalar"));
    };
    if c.is_zero() {
        return Err(ParseError::syntax(pos, "division by zero"));
    }
    let chart = s.chart().clone();
    value_mul(a, Value::Scalar(Scalar::constant(&chart, c.inv())), pos)
}

fn value_pow(a: Value, b: Value, pos: Pos) -> Result<Value, ParseError> {
    match (&a, &b) {
        (Value::Scalar(base), Value::Scalar(e)) => {
            let Some(c) = e.as_constant() else {
                return Err(ParseError::syntax(pos, "exponent must be a constant integer"));
            };
            if !c.im.is_zero() || !c.re.denom().eq(&BigInt::from(1)) || c.re.is_negative() {
                return Err(ParseError::syntax(pos, "exponent must be a nonnegative integer"));
            }
            let n = c.re.numer().to_u32().ok_or_else(|| {
                ParseError::syntax(pos, "exponent is too large")
            })?;
            Ok(Value::Scalar(base.pow(n)))
        }
        (Value::Form(x), Value::Form(y)) => Ok(Value::Form(x.wedge(y))),
        (Value::Field(x), Value::Field(y)) => Ok(Value::Multivector(
            KMultivector::from_vector(x).wedge(&KMultivector::from_vector(y)),
        )),
        (Value::Multivector(x), Value::Field(y)) => {
            Ok(Value::Multivector(x.wedge(&KMultivector::from_vector(y))))
        }
        (Value::Field(x), Value::Multivector(y)) => {
            Ok(Value::Multivector(KMultivector::from_vector(x).wedge(y)))
        }
        (Value::Multivector(x), Value::Multivector(y)) => Ok(Value::Multivector(x.wedge(y))),
        (a, b) => Err(ParseError::syntax(
            pos,
            format!("cannot raise {} to {}", a.kind(), b.kind()),
        )),
    }
}

impl<'a> Parser<'a> {
    fn parse_expr(&mut self, ctx: &Ctx) -> Result<Value, ParseError> {
        let mut lhs = self.parse_term(ctx)?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    let pos = self.next().pos;
                    let rhs = self.parse_term(ctx)?;
                    lhs = value_add(lhs, rhs, pos)?;
                }
                Tok::Minus => {
                    let pos = self.next().pos;
                    let rhs = self.parse_term(ctx)?;
                    lhs = value_add(lhs, value_neg(rhs), pos)?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self, ctx: &Ctx) -> Result<Value, ParseError> {
        let mut lhs = self.parse_power(ctx)?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    let pos = self.next().pos;
                    let rhs = self.parse_power(ctx)?;
                    lhs = value_mul(lhs, rhs, pos)?;
                }
                Tok::Slash => {
                    let pos = self.next().pos;
                    let rhs = self.parse_power(ctx)?;
                    lhs = value_div(lhs, rhs, pos)?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_power(&mut self, ctx: &Ctx) -> Result<Value, ParseError> {
        let mut lhs = self.parse_atom(ctx)?;
        while self.peek().tok == Tok::Caret {
            let pos = self.next().pos;
            let rhs = self.parse_atom(ctx)?;
            lhs = value_pow(lhs, rhs, pos)?;
        }
        Ok(lhs)
    }

    fn parse_atom(&mut self, ctx: &Ctx) -> Result<Value, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok(Value::Scalar(Scalar::rational(
                &ctx.chart,
                Rat::from_integer(BigInt::from(n)),
            ))),
            Tok::Minus => Ok(value_neg(self.parse_atom(ctx)?)),
            Tok::LParen => {
                let v = self.parse_expr(ctx)?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            Tok::Ident(name) => match name.as_str() {
                "i" => Ok(Value::Scalar(Scalar::imag(&ctx.chart))),
                "c" => Ok(Value::Scalar(Scalar::formal_c(&ctx.chart))),
                "d" | "D" => {
                    self.expect(Tok::LBracket)?;
                    let (coord, cpos) = self.expect_ident()?;
                    self.expect(Tok::RBracket)?;
                    let idx = ctx
                        .chart
                        .index(&coord)
                        .ok_or_else(|| ParseError::unknown(cpos, &coord))?;
                    if name == "d" {
                        Ok(Value::Form(KForm::coordinate(&ctx.chart, idx)))
                    } else {
                        Ok(Value::Field(VectorField::coordinate(&ctx.chart, idx)))
                    }
                }
                _ => ctx.lookup(&name, t.pos),
            },
            other => Err(ParseError::syntax(t.pos, format!("unexpected {other}"))),
        }
    }

    /// `( vexpr , fexpr )` as a big-tangent section.
    fn parse_section(&mut self, ctx: &Ctx) -> Result<BigSection, ParseError> {
        self.expect(Tok::LParen)?;
        let vpos = self.peek().pos;
        let v = self.parse_expr(ctx)?;
        self.expect(Tok::Comma)?;
        let fpos = self.peek().pos;
        let f = self.parse_expr(ctx)?;
        self.expect(Tok::RParen)?;
        let vf = match v {
            Value::Field(x) => x,
            Value::Scalar(s) if s.is_zero() => VectorField::zero(&ctx.chart),
            other => {
                return Err(ParseError::syntax(
                    vpos,
                    format!("section vector slot needs a vfield, found {}", other.kind()),
                ))
            }
        };
        let form = match f {
            Value::Form(w) if w.degree() == 1 => w,
            Value::Scalar(s) if s.is_zero() => KForm::zero(&ctx.chart, 1),
            other => {
                return Err(ParseError::syntax(
                    fpos,
                    format!("section form slot needs a 1-form, found {}", other.kind()),
                ))
            }
        };
        Ok(BigSection::new(vf, form))
    }

    /// A section reference: a declared name or an inline pair.
    fn parse_secref(&mut self, ctx: &Ctx) -> Result<BigSection, ParseError> {
        if self.peek().tok == Tok::LParen {
            return self.parse_section(ctx);
        }
        let (name, pos) = self.expect_ident()?;
        match ctx.lookup(&name, pos)? {
            Value::Section(s) => Ok(s),
            other => Err(ParseError::syntax(
                pos,
                format!("`{name}` is a {}, expected a section", other.kind()),
            )),
        }
    }

    /// Comma-separated section references, ending at a key or brace.
    fn parse_seclist(&mut self, ctx: &Ctx) -> Result<Vec<BigSection>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_newlines();
            match &self.peek().tok {
                Tok::RBrace => break,
                Tok::Ident(s) if self.is_block_key(s) => break,
                _ => {}
            }
            out.push(self.parse_secref(ctx)?);
            self.skip_newlines();
            if self.peek().tok == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn is_block_key(&self, s: &str) -> bool {
        matches!(s, "E" | "E'" | "P" | "P'" | "TME" | "TME'" | "S" | "annS" | "Sigma" | "annSigma" | "Qframe")
            && self.peek2().tok == Tok::Colon
    }

    fn parse_field_list(&mut self, ctx: &Ctx) -> Result<Vec<VectorField>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_newlines();
            match &self.peek().tok {
                Tok::RBrace | Tok::Semi => break,
                Tok::Ident(s) if self.is_block_key(s) => break,
                _ => {}
            }
            let pos = self.peek().pos;
            match self.parse_expr(ctx)? {
                Value::Field(x) => out.push(x),
                other => {
                    return Err(ParseError::syntax(
                        pos,
                        format!("expected a vfield, found {}", other.kind()),
                    ))
                }
            }
            self.skip_newlines();
            if self.peek().tok == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn parse_form_list(&mut self, ctx: &Ctx) -> Result<Vec<KForm>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_newlines();
            match &self.peek().tok {
                Tok::RBrace | Tok::Semi => break,
                Tok::Ident(s) if self.is_block_key(s) => break,
                _ => {}
            }
            let pos = self.peek().pos;
            match self.parse_expr(ctx)? {
                Value::Form(w) if w.degree() == 1 => out.push(w),
                other => {
                    return Err(ParseError::syntax(
                        pos,
                        format!("expected a 1-form, found {}", other.kind()),
                    ))
                }
            }
            self.skip_newlines();
            if self.peek().tok == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn expect_key(&mut self, key: &str) -> Result<(), ParseError> {
        self.skip_newlines();
        let (name, pos) = self.expect_ident()?;
        if name != key {
            return Err(ParseError::syntax(pos, format!("expected `{key}:`, found `{name}`")));
        }
        self.expect(Tok::Colon)?;
        Ok(())
    }
}

fn check_name_free(session: &Session, name: &str, pos: Pos) -> Result<(), ParseError> {
    if RESERVED.contains(&name) {
        return Err(ParseError::Reserved { pos, name: name.to_string() });
    }
    if KEYWORDS.contains(&name) {
        return Err(ParseError::syntax(pos, format!("`{name}` is a keyword")));
    }
    if session.chart.index(name).is_some()
        || session.values.contains_key(name)
        || session.structures.contains_key(name)
        || session.gpdatas.contains_key(name)
        || session.polarizations.contains_key(name)
        || session.foliations.contains_key(name)
    {
        return Err(ParseError::syntax(pos, format!("name `{name}` is already defined")));
    }
    Ok(())
}

/// Parse a full session file.
pub fn parse_session(input: &str) -> Result<Session, ParseError> {
    let toks = lex(input)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    p.skip_newlines();

    // manifold line first
    let (kw, kw_pos) = p.expect_ident()?;
    if kw != "manifold" {
        return Err(ParseError::syntax(kw_pos, "a session starts with a `manifold` line"));
    }
    let (mname, mpos) = p.expect_ident()?;
    if RESERVED.contains(&mname.as_str()) {
        return Err(ParseError::Reserved { pos: mpos, name: mname });
    }
    let (dim_kw, dim_pos) = p.expect_ident()?;
    if dim_kw != "dim" {
        return Err(ParseError::syntax(dim_pos, "expected `dim`"));
    }
    let (dim, _) = p.expect_int()?;
    let (coords_kw, cpos) = p.expect_ident()?;
    if coords_kw != "coords" {
        return Err(ParseError::syntax(cpos, "expected `coords`"));
    }
    let mut coords = Vec::new();
    let mut coord_pos = cpos;
    while let Tok::Ident(_) = p.peek().tok {
        let (c, pos) = p.expect_ident()?;
        coord_pos = pos;
        coords.push(c);
    }
    if coords.len() != dim as usize {
        return Err(ParseError::syntax(
            coord_pos,
            format!("dim {dim} but {} coordinates given", coords.len()),
        ));
    }
    let chart = Chart::new(&coords).map_err(|e| match e {
        bigiso::chart::ChartError::ReservedSymbol(name) => {
            ParseError::Reserved { pos: coord_pos, name }
        }
        other => ParseError::syntax(coord_pos, other.to_string()),
    })?;
    p.end_statement()?;

    let mut session = Session {
        manifold_name: mname,
        chart: chart.clone(),
        order: Vec::new(),
        values: BTreeMap::new(),
        structures: BTreeMap::new(),
        gpdatas: BTreeMap::new(),
        polarizations: BTreeMap::new(),
        foliations: BTreeMap::new(),
        checks: Vec::new(),
    };

    loop {
        p.skip_newlines();
        if p.peek().tok == Tok::Eof {
            break;
        }
        let (kw, kw_pos) = p.expect_ident()?;
        match kw.as_str() {
            "manifold" => {
                return Err(ParseError::ChartMismatch {
                    pos: kw_pos,
                    msg: "a session has a single manifold".into(),
                })
            }
            "scalar" | "vfield" | "form" | "bivector" | "section" => {
                let (name, npos) = p.expect_ident()?;
                check_name_free(&session, &name, npos)?;
                p.expect(Tok::Eq)?;
                let ctx = Ctx { chart: chart.clone(), values: &session.values };
                let value = if kw == "section" {
                    Value::Section(p.parse_section(&ctx)?)
                } else {
                    let vpos = p.peek().pos;
                    let v = p.parse_expr(&ctx)?;
                    coerce_decl(&kw, v, vpos, &chart)?
                };
                p.end_statement()?;
                session.order.push((name.clone(), DeclKind::Value));
                session.values.insert(name, value);
            }
            "structure" => {
                let (name, npos) = p.expect_ident()?;
                check_name_free(&session, &name, npos)?;
                p.expect(Tok::LBrace)?;
                p.skip_newlines();
                let ctx = Ctx { chart: chart.clone(), values: &session.values };
                let decl = match &p.peek().tok {
                    Tok::Ident(s) if s == "graph2" => {
                        p.expect_key("graph2")?;
                        let lpos = p.peek().pos;
                        let lambda = match p.parse_expr(&ctx)? {
                            Value::Form(w) if w.degree() == 2 => w,
                            Value::Scalar(s) if s.is_zero() => KForm::zero(&chart, 2),
                            other => {
                                return Err(ParseError::syntax(
                                    lpos,
                                    format!("graph2 needs a 2-form, found {}", other.kind()),
                                ))
                            }
                        };
                        p.skip_newlines();
                        p.expect(Tok::Semi)?;
                        p.expect_key("S")?;
                        let gens_s = p.parse_field_list(&ctx)?;
                        p.skip_newlines();
                        p.expect(Tok::Semi)?;
                        p.expect_key("annS")?;
                        let ann = p.parse_form_list(&ctx)?;
                        StructureDecl::GraphTwoForm { lambda, gens_s, ann }
                    }
                    Tok::Ident(s) if s == "graphP" => {
                        p.expect_key("graphP")?;
                        let ppos = p.peek().pos;
                        let biv = match p.parse_expr(&ctx)? {
                            Value::Multivector(m) if m.degree() == 2 => m,
                            Value::Scalar(s) if s.is_zero() => KMultivector::zero(&chart, 2),
                            other => {
                                return Err(ParseError::syntax(
                                    ppos,
                                    format!("graphP needs a bivector, found {}", other.kind()),
                                ))
                            }
                        };
                        p.skip_newlines();
                        p.expect(Tok::Semi)?;
                        p.expect_key("Sigma")?;
                        let sigma = p.parse_form_list(&ctx)?;
                        p.skip_newlines();
                        p.expect(Tok::Semi)?;
                        p.expect_key("annSigma")?;
                        let ann = p.parse_field_list(&ctx)?;
                        StructureDecl::GraphBivector { p: biv, sigma, ann }
                    }
                    _ => {
                        p.expect_key("E")?;
                        let gens_e = p.parse_seclist(&ctx)?;
                        p.expect_key("E'")?;
                        let gens_ep = p.parse_seclist(&ctx)?;
                        StructureDecl::Explicit { gens_e, gens_ep }
                    }
                };
                p.skip_newlines();
                p.expect(Tok::RBrace)?;
                p.end_statement()?;
                session.order.push((name.clone(), DeclKind::Structure));
                session.structures.insert(name, decl);
            }
            "gpdata" => {
                let (name, npos) = p.expect_ident()?;
                check_name_free(&session, &name, npos)?;
                p.expect(Tok::LBrace)?;
                p.skip_newlines();
                let ctx = Ctx { chart: chart.clone(), values: &session.values };
                let (vk, vkp) = p.expect_ident()?;
                if vk != "varpi" {
                    return Err(ParseError::syntax(vkp, "expected `varpi`"));
                }
                p.expect(Tok::Eq)?;
                let wpos = p.peek().pos;
                let varpi = expect_one_form(p.parse_expr(&ctx)?, wpos, &chart)?;
                p.skip_newlines();
                p.expect(Tok::Semi)?;
                p.skip_newlines();
                let (uk, ukp) = p.expect_ident()?;
                if uk != "U" {
                    return Err(ParseError::syntax(ukp, "expected `U`"));
                }
                p.expect(Tok::Eq)?;
                let upos = p.peek().pos;
                let u = match p.parse_expr(&ctx)? {
                    Value::Field(x) => x,
                    Value::Scalar(s) if s.is_zero() => VectorField::zero(&chart),
                    other => {
                        return Err(ParseError::syntax(
                            upos,
                            format!("U needs a vfield, found {}", other.kind()),
                        ))
                    }
                };
                p.skip_newlines();
                p.expect(Tok::Semi)?;
                p.skip_newlines();
                let (nk, nkp) = p.expect_ident()?;
                if nk != "nu" {
                    return Err(ParseError::syntax(nkp, "expected `nu`"));
                }
                p.expect(Tok::Eq)?;
                let npos2 = p.peek().pos;
                let nu = expect_one_form(p.parse_expr(&ctx)?, npos2, &chart)?;
                p.skip_newlines();
                p.expect(Tok::RBrace)?;
                p.end_statement()?;
                if !varpi.is_real() {
                    return Err(ParseError::syntax(
                        wpos,
                        "varpi must be a real 1-form (no `i`, no `c`)",
                    ));
                }
                session.order.push((name.clone(), DeclKind::Gp));
                session.gpdatas.insert(name, GpDecl { varpi, u, nu });
            }
            "polarization" => {
                let (name, npos) = p.expect_ident()?;
                check_name_free(&session, &name, npos)?;
                p.expect(Tok::LBrace)?;
                let ctx = Ctx { chart: chart.clone(), values: &session.values };
                p.expect_key("P")?;
                let gens_p = p.parse_seclist(&ctx)?;
                p.expect_key("P'")?;
                let gens_pp = p.parse_seclist(&ctx)?;
                p.expect_key("TME")?;
                let tm_cap_e = p.parse_field_list(&ctx)?;
                p.expect_key("TME'")?;
                let tm_cap_ep = p.parse_field_list(&ctx)?;
                p.skip_newlines();
                p.expect(Tok::RBrace)?;
                p.end_statement()?;
                session.order.push((name.clone(), DeclKind::Polarization));
                session.polarizations.insert(
                    name,
                    PolarizationSpec { gens_p, gens_pp, tm_cap_e, tm_cap_ep },
                );
            }
            "foliation" => {
                let (name, npos) = p.expect_ident()?;
                check_name_free(&session, &name, npos)?;
                p.expect(Tok::LBrace)?;
                p.skip_newlines();
                let (dk, dkp) = p.expect_ident()?;
                if dk != "dimF" {
                    return Err(ParseError::syntax(dkp, "expected `dimF`"));
                }
                let (leaf_dim, ldpos) = p.expect_int()?;
                if leaf_dim as usize > chart.dim() {
                    return Err(ParseError::syntax(ldpos, "dimF exceeds the chart dimension"));
                }
                p.skip_newlines();
                p.expect(Tok::Semi)?;
                p.expect_key("Qframe")?;
                let ctx = Ctx { chart: chart.clone(), values: &session.values };
                let frames = p.parse_field_list(&ctx)?;
                p.skip_newlines();
                p.expect(Tok::RBrace)?;
                p.end_statement()?;
                session.order.push((name.clone(), DeclKind::Foliation));
                session
                    .foliations
                    .insert(name, FoliationDecl { leaf_dim: leaf_dim as usize, frames });
            }
            "check" => {
                let req = parse_check(&mut p, &session)?;
                p.end_statement()?;
                session.checks.push(req);
            }
            other => {
                return Err(ParseError::syntax(
                    kw_pos,
                    format!("unknown statement `{other}`"),
                ))
            }
        }
    }
    Ok(session)
}

fn coerce_decl(kw: &str, v: Value, pos: Pos, chart: &Chart) -> Result<Value, ParseError> {
    match (kw, v) {
        ("scalar", Value::Scalar(s)) => Ok(Value::Scalar(s)),
        ("vfield", Value::Field(x)) => Ok(Value::Field(x)),
        ("vfield", Value::Scalar(s)) if s.is_zero() => {
            Ok(Value::Field(VectorField::zero(chart)))
        }
        ("form", Value::Form(w)) => Ok(Value::Form(w)),
        ("form", Value::Scalar(s)) if s.is_zero() => Ok(Value::Form(KForm::zero(chart, 1))),
        ("bivector", Value::Multivector(m)) if m.degree() == 2 => Ok(Value::Multivector(m)),
        ("bivector", Value::Scalar(s)) if s.is_zero() => {
            Ok(Value::Multivector(KMultivector::zero(chart, 2)))
        }
        (kw, v) => Err(ParseError::syntax(
            pos,
            format!("a `{kw}` declaration got a {}", v.kind()),
        )),
    }
}

fn expect_one_form(v: Value, pos: Pos, chart: &Chart) -> Result<KForm, ParseError> {
    match v {
        Value::Form(w) if w.degree() == 1 => Ok(w),
        Value::Scalar(s) if s.is_zero() => Ok(KForm::zero(chart, 1)),
        other => Err(ParseError::syntax(
            pos,
            format!("expected a 1-form, found {}", other.kind()),
        )),
    }
}

fn name_of_kind<'s>(
    session: &'s Session,
    p: &mut Parser,
    kind: &str,
) -> Result<String, ParseError> {
    let (name, pos) = p.expect_ident()?;
    let ok = match kind {
        "structure" => session.structures.contains_key(&name),
        "gpdata" => session.gpdatas.contains_key(&name),
        "polarization" => session.polarizations.contains_key(&name),
        "foliation" => session.foliations.contains_key(&name),
        "scalar" => matches!(session.values.get(&name), Some(Value::Scalar(_))),
        "vfield" => matches!(session.values.get(&name), Some(Value::Field(_))),
        "form" => matches!(session.values.get(&name), Some(Value::Form(_))),
        "bivector" => matches!(session.values.get(&name), Some(Value::Multivector(_))),
        "section" => matches!(session.values.get(&name), Some(Value::Section(_))),
        _ => unreachable!(),
    };
    if !ok {
        return Err(ParseError::unknown_kind(pos, &name, kind));
    }
    Ok(name)
}

fn parse_mode(p: &mut Parser) -> Result<ModeArg, ParseError> {
    let (m, pos) = p.expect_ident()?;
    match m.as_str() {
        "ham" => Ok(ModeArg::Ham),
        "wham" => Ok(ModeArg::WHam),
        other => Err(ParseError::syntax(pos, format!("expected `ham` or `wham`, found `{other}`"))),
    }
}

fn parse_check(p: &mut Parser, session: &Session) -> Result<CheckRequest, ParseError> {
    let (kind, kpos) = p.expect_ident()?;
    // hyphenated check names arrive as ident '-' ident
    let mut kind = kind;
    while p.peek().tok == Tok::Minus {
        p.next();
        let (rest, _) = p.expect_ident()?;
        kind.push('-');
        kind.push_str(&rest);
    }
    let ctx = Ctx { chart: session.chart.clone(), values: &session.values };
    match kind.as_str() {
        "structure" => Ok(CheckRequest::Structure {
            structure: name_of_kind(session, p, "structure")?,
        }),
        "integrable" => Ok(CheckRequest::Integrable {
            structure: name_of_kind(session, p, "structure")?,
        }),
        "member" => {
            let structure = name_of_kind(session, p, "structure")?;
            let (fam, fpos) = p.expect_ident()?;
            let family = match fam.as_str() {
                "E" => FamilyArg::E,
                "E'" => FamilyArg::EPrime,
                other => {
                    return Err(ParseError::syntax(
                        fpos,
                        format!("expected `E` or `E'`, found `{other}`"),
                    ))
                }
            };
            let (section, label) = if p.peek().tok == Tok::LParen {
                (p.parse_section(&ctx)?, "inline".to_string())
            } else {
                let name = name_of_kind(session, p, "section")?;
                let Some(Value::Section(s)) = session.values.get(&name) else {
                    unreachable!()
                };
                (s.clone(), name)
            };
            Ok(CheckRequest::Member { structure, family, section, label })
        }
        "poisson" => Ok(CheckRequest::Poisson {
            bivector: name_of_kind(session, p, "bivector")?,
        }),
        "sigma-closed" => {
            let bivector = name_of_kind(session, p, "bivector")?;
            let mut forms = vec![name_of_kind(session, p, "form")?];
            while p.peek().tok == Tok::Comma {
                p.next();
                forms.push(name_of_kind(session, p, "form")?);
            }
            Ok(CheckRequest::SigmaClosed { bivector, forms })
        }
        "hamiltonian" => {
            let structure = name_of_kind(session, p, "structure")?;
            let mode = parse_mode(p)?;
            let f = name_of_kind(session, p, "scalar")?;
            let xf = name_of_kind(session, p, "vfield")?;
            Ok(CheckRequest::Hamiltonian { structure, mode, f, xf })
        }
        "representative" => {
            let structure = name_of_kind(session, p, "structure")?;
            let mode = parse_mode(p)?;
            let f = name_of_kind(session, p, "scalar")?;
            Ok(CheckRequest::Representative { structure, mode, f })
        }
        "leibniz" => {
            let structure = name_of_kind(session, p, "structure")?;
            let l = name_of_kind(session, p, "scalar")?;
            let f = name_of_kind(session, p, "scalar")?;
            let h = name_of_kind(session, p, "scalar")?;
            Ok(CheckRequest::Leibniz { structure, l, f, h })
        }
        "dtr-complex" => Ok(CheckRequest::DtrComplex {
            structure: name_of_kind(session, p, "structure")?,
        }),
        "j-morphism" => {
            let structure = name_of_kind(session, p, "structure")?;
            let form = name_of_kind(session, p, "form")?;
            Ok(CheckRequest::JMorphism { structure, form })
        }
        "gp-condition" => {
            let gp = name_of_kind(session, p, "gpdata")?;
            let structure = name_of_kind(session, p, "structure")?;
            Ok(CheckRequest::GpCondition { gp, structure })
        }
        "integrality" => {
            let structure = name_of_kind(session, p, "structure")?;
            let u = name_of_kind(session, p, "vfield")?;
            let xi = name_of_kind(session, p, "form")?;
            let (v, vpos) = p.expect_ident()?;
            let variant = match v.as_str() {
                "direct" => VariantArg::Direct,
                "lie" => VariantArg::Lie,
                "both" => VariantArg::Both,
                other => {
                    return Err(ParseError::syntax(
                        vpos,
                        format!("expected `direct`, `lie` or `both`, found `{other}`"),
                    ))
                }
            };
            Ok(CheckRequest::Integrality { structure, u, xi, variant })
        }
        "commutator" => {
            let gp = name_of_kind(session, p, "gpdata")?;
            let structure = name_of_kind(session, p, "structure")?;
            let f = name_of_kind(session, p, "scalar")?;
            let h = name_of_kind(session, p, "scalar")?;
            Ok(CheckRequest::Commutator { gp, structure, f, h })
        }
        "gauge-invariance" => {
            let gp = name_of_kind(session, p, "gpdata")?;
            let structure = name_of_kind(session, p, "structure")?;
            let nu = name_of_kind(session, p, "form")?;
            let f = name_of_kind(session, p, "scalar")?;
            let h = name_of_kind(session, p, "scalar")?;
            Ok(CheckRequest::GaugeInvariance { gp, structure, nu, f, h })
        }
        "curvature-relation" => Ok(CheckRequest::CurvatureRelation {
            gp: name_of_kind(session, p, "gpdata")?,
        }),
        "comutant" => {
            let gp = name_of_kind(session, p, "gpdata")?;
            let structure = name_of_kind(session, p, "structure")?;
            let f = name_of_kind(session, p, "scalar")?;
            let h = name_of_kind(session, p, "scalar")?;
            Ok(CheckRequest::Comutant { gp, structure, f, h })
        }
        "lift" => {
            let gp = name_of_kind(session, p, "gpdata")?;
            let structure = name_of_kind(session, p, "structure")?;
            Ok(CheckRequest::Lift { gp, structure })
        }
        "lift-graph" => {
            let gp = name_of_kind(session, p, "gpdata")?;
            let structure = name_of_kind(session, p, "structure")?;
            Ok(CheckRequest::LiftGraph { gp, structure })
        }
        "polarization" => {
            let structure = name_of_kind(session, p, "structure")?;
            let pol = name_of_kind(session, p, "polarization")?;
            Ok(CheckRequest::Polarization { structure, pol })
        }
        "polarized-section" => {
            let gp = name_of_kind(session, p, "gpdata")?;
            let pol = name_of_kind(session, p, "polarization")?;
            let (fam, fpos) = p.expect_ident()?;
            let family = match fam.as_str() {
                "P" => PolFamilyArg::P,
                "P'" => PolFamilyArg::PPrime,
                other => {
                    return Err(ParseError::syntax(
                        fpos,
                        format!("expected `P` or `P'`, found `{other}`"),
                    ))
                }
            };
            let phi = name_of_kind(session, p, "scalar")?;
            Ok(CheckRequest::PolarizedSection { gp, pol, family, phi })
        }
        "polarized-function" => {
            let structure = name_of_kind(session, p, "structure")?;
            let pol = name_of_kind(session, p, "polarization")?;
            let mode = parse_mode(p)?;
            let f = name_of_kind(session, p, "scalar")?;
            Ok(CheckRequest::PolarizedFunction { structure, pol, mode, f })
        }
        "operator-restriction" => {
            let gp = name_of_kind(session, p, "gpdata")?;
            let structure = name_of_kind(session, p, "structure")?;
            let pol = name_of_kind(session, p, "polarization")?;
            let f = name_of_kind(session, p, "scalar")?;
            let phi = name_of_kind(session, p, "scalar")?;
            Ok(CheckRequest::OperatorRestriction { gp, structure, pol, f, phi })
        }
        "leaf-bracket" => {
            let structure = name_of_kind(session, p, "structure")?;
            let a = name_of_kind(session, p, "section")?;
            let b = name_of_kind(session, p, "section")?;
            let mut fixed = Vec::new();
            while let Tok::Ident(_) = p.peek().tok {
                let (coord, cpos) = p.expect_ident()?;
                let idx = session
                    .chart
                    .index(&coord)
                    .ok_or_else(|| ParseError::unknown(cpos, &coord))?;
                p.expect(Tok::Eq)?;
                let neg = if p.peek().tok == Tok::Minus {
                    p.next();
                    true
                } else {
                    false
                };
                let (n, _) = p.expect_int()?;
                let d = if p.peek().tok == Tok::Slash {
                    p.next();
                    p.expect_int()?.0
                } else {
                    1
                };
                let mut r = Rat::new(BigInt::from(n), BigInt::from(d));
                if neg {
                    r = -r;
                }
                fixed.push((idx, r));
            }
            Ok(CheckRequest::LeafBracket { structure, a, b, fixed })
        }
        "foliation-relations" => Ok(CheckRequest::FoliationRelations {
            foliation: name_of_kind(session, p, "foliation")?,
        }),
        "ds-squared" => {
            let foliation = name_of_kind(session, p, "foliation")?;
            let (s, _) = p.expect_int()?;
            Ok(CheckRequest::DsSquared { foliation, s: s as usize })
        }
        "poincare" => {
            let foliation = name_of_kind(session, p, "foliation")?;
            let (s, _) = p.expect_int()?;
            let form = name_of_kind(session, p, "form")?;
            Ok(CheckRequest::Poincare { foliation, s: s as usize, form })
        }
        "decompose" => {
            let foliation = name_of_kind(session, p, "foliation")?;
            let form = name_of_kind(session, p, "form")?;
            Ok(CheckRequest::Decompose { foliation, form })
        }
        other => Err(ParseError::syntax(kpos, format!("unknown check kind `{other}`"))),
    }
}
