//! Text grammar for partitioned formulas.
//!
//! ```text
//! top     := decl | formula
//! decl    := IDENT '(' vars? (';' vars?)? ')' ':=' formula
//! vars    := IDENT (':' SORT)? (',' IDENT (':' SORT)?)*
//! formula := quant | disj
//! quant   := ('E' | 'A') IDENT (',' IDENT)* ':' SORT (',' SORT)* '.' formula
//! disj    := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '!' unary | '(' formula ')' | 'true' | 'false' | quant
//!          | REL '(' args ')' | IDENT '=' IDENT
//! ```
//!
//! Without a declaration, the first atom whose argument list contains `;`
//! fixes the left variables; all other free variables form the right part in
//! order of first occurrence.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formula::{Formula, PartitionedFormula, Var};
use crate::signature::{Signature, SortId};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Define,
    Dot,
    Bang,
    Amp,
    Bar,
    Equals,
    End,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '#' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (off, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < bytes.len() && is_ident_char(bytes[i].1) {
                i += 1;
            }
            let end = bytes.get(i).map(|b| b.0).unwrap_or(text.len());
            out.push((Tok::Ident(text[bytes[start].0..end].to_string()), off));
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' if bytes.get(i + 1).map(|b| b.1) == Some('=') => {
                i += 1;
                Tok::Define
            }
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Bar,
            '=' => Tok::Equals,
            other => {
                return Err(Error::Syntax {
                    offset: off,
                    message: format!("unexpected character '{other}'"),
                })
            }
        };
        out.push((tok, off));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

type Name = (String, usize);

#[derive(Debug)]
enum Raw {
    Const(bool),
    Atom {
        rel: Name,
        args: Vec<Name>,
        semi: Option<usize>,
    },
    Eq(Name, Name),
    Not(Box<Raw>),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Quant {
        exists: bool,
        vars: Vec<Name>,
        sorts: Vec<Name>,
        body: Box<Raw>,
    },
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let off = self.offset();
                self.bump();
                Ok((s, off))
            }
            _ => self.fail(format!("expected {what}")),
        }
    }

    fn at_quantifier(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "E" || s == "A")
            && matches!(self.peek_at(1), Tok::Ident(_))
    }

    fn formula(&mut self) -> Result<Raw> {
        if self.at_quantifier() {
            self.quantifier()
        } else {
            self.disjunction()
        }
    }

    fn quantifier(&mut self) -> Result<Raw> {
        let (q, _) = self.ident("quantifier")?;
        let exists = q == "E";
        let mut vars = vec![self.ident("variable")?];
        while *self.peek() == Tok::Comma {
            self.bump();
            vars.push(self.ident("variable")?);
        }
        self.expect(Tok::Colon, "':'")?;
        let mut sorts = vec![self.ident("sort name")?];
        while *self.peek() == Tok::Comma {
            self.bump();
            sorts.push(self.ident("sort name")?);
        }
        if sorts.len() != vars.len() && sorts.len() != 1 {
            return Err(Error::Syntax {
                offset: sorts[0].1,
                message: format!("{} variables but {} sorts", vars.len(), sorts.len()),
            });
        }
        self.expect(Tok::Dot, "'.'")?;
        let body = self.formula()?;
        Ok(Raw::Quant {
            exists,
            vars,
            sorts,
            body: Box::new(body),
        })
    }

    fn disjunction(&mut self) -> Result<Raw> {
        let mut left = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let right = self.conjunction()?;
            left = Raw::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Raw> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let right = self.unary()?;
            left = Raw::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Raw> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Raw::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Raw::Const(s == "true"))
            }
            Tok::Ident(_) if self.at_quantifier() => self.quantifier(),
            Tok::Ident(_) => {
                let first = self.ident("identifier")?;
                match self.peek() {
                    Tok::LParen => {
                        self.bump();
                        self.atom_args(first)
                    }
                    Tok::Equals => {
                        self.bump();
                        let second = self.ident("variable")?;
                        Ok(Raw::Eq(first, second))
                    }
                    _ => self.fail("expected '(' or '='"),
                }
            }
            _ => self.fail("expected a formula"),
        }
    }

    fn atom_args(&mut self, rel: Name) -> Result<Raw> {
        let mut args = Vec::new();
        let mut semi = None;
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(Raw::Atom { rel, args, semi });
        }
        loop {
            args.push(self.ident("variable")?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::Semi => {
                    self.bump();
                    semi.get_or_insert(args.len());
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(Raw::Atom { rel, args, semi });
                }
                _ => return self.fail("expected ',', ';' or ')'"),
            }
        }
    }

    /// `name(...) :=` ahead?
    fn at_declaration(&self) -> bool {
        if !matches!(self.peek_at(0), Tok::Ident(_)) || *self.peek_at(1) != Tok::LParen {
            return false;
        }
        let mut depth = 0usize;
        let mut k = 1;
        loop {
            match self.peek_at(k) {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return *self.peek_at(k + 1) == Tok::Define;
                    }
                }
                Tok::End => return false,
                _ => {}
            }
            k += 1;
        }
    }

    fn declared_vars(&mut self) -> Result<Vec<(Name, Option<Name>)>> {
        let mut out = Vec::new();
        if matches!(self.peek(), Tok::Semi | Tok::RParen) {
            return Ok(out);
        }
        loop {
            let v = self.ident("variable")?;
            let sort = if *self.peek() == Tok::Colon {
                self.bump();
                Some(self.ident("sort name")?)
            } else {
                None
            };
            out.push((v, sort));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }
}

struct Typer<'a> {
    sig: &'a Signature,
    scope: Vec<(String, SortId)>,
    free: BTreeMap<String, Option<SortId>>,
    order: Vec<String>,
    pending: Vec<(Name, Name)>,
    first_semi: Option<Vec<Name>>,
}

impl<'a> Typer<'a> {
    fn new(sig: &'a Signature) -> Self {
        Typer {
            sig,
            scope: Vec::new(),
            free: BTreeMap::new(),
            order: Vec::new(),
            pending: Vec::new(),
            first_semi: None,
        }
    }

    fn sort(&self, name: &Name) -> Result<SortId> {
        self.sig
            .sort_id(&name.0)
            .ok_or_else(|| Error::UnknownSort(name.0.clone()))
    }

    fn bound(&self, name: &str) -> Option<SortId> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|b| b.1)
    }

    fn touch_free(&mut self, name: &str) {
        if !self.free.contains_key(name) {
            self.free.insert(name.to_string(), None);
            self.order.push(name.to_string());
        }
    }

    fn current(&self, name: &str) -> Option<SortId> {
        self.bound(name).or_else(|| self.free.get(name).copied().flatten())
    }

    /// Records that `name` is used at `sort`.
    fn assign(&mut self, name: &str, sort: SortId, context: &dyn Fn() -> String) -> Result<()> {
        match self.current(name) {
            Some(s) if s != sort => Err(Error::SortMismatch {
                context: context(),
                message: format!(
                    "variable {name} has sort {} but is used at sort {}",
                    self.sig.sort_name(s),
                    self.sig.sort_name(sort)
                ),
            }),
            Some(_) => Ok(()),
            None => {
                self.free.insert(name.to_string(), Some(sort));
                Ok(())
            }
        }
    }

    fn infer(&mut self, raw: &Raw) -> Result<()> {
        match raw {
            Raw::Const(_) => Ok(()),
            Raw::Atom { rel, args, semi } => {
                let id = self
                    .sig
                    .relation_id(&rel.0)
                    .ok_or_else(|| Error::UnknownRelation(rel.0.clone()))?;
                let ty = self.sig.relation(id).ty.clone();
                let text = format!(
                    "atom {}({})",
                    rel.0,
                    args.iter().map(|a| a.0.as_str()).collect::<Vec<_>>().join(",")
                );
                if ty.len() != args.len() {
                    return Err(Error::SortMismatch {
                        context: text,
                        message: format!("expected {} arguments, got {}", ty.len(), args.len()),
                    });
                }
                if let (Some(k), None) = (semi, &self.first_semi) {
                    self.first_semi = Some(args[..*k].to_vec());
                }
                for (a, s) in args.iter().zip(ty.sorts()) {
                    if self.bound(&a.0).is_none() {
                        self.touch_free(&a.0);
                    }
                    self.assign(&a.0, *s, &|| text.clone())?;
                }
                Ok(())
            }
            Raw::Eq(a, b) => {
                for n in [a, b] {
                    if self.bound(&n.0).is_none() {
                        self.touch_free(&n.0);
                    }
                }
                let text = format!("equality {} = {}", a.0, b.0);
                match (self.current(&a.0), self.current(&b.0)) {
                    (Some(s), _) => self.assign(&b.0, s, &|| text.clone()),
                    (None, Some(s)) => self.assign(&a.0, s, &|| text.clone()),
                    (None, None) => {
                        self.pending.push((a.clone(), b.clone()));
                        Ok(())
                    }
                }
            }
            Raw::Not(f) => self.infer(f),
            Raw::And(a, b) | Raw::Or(a, b) => {
                self.infer(a)?;
                self.infer(b)
            }
            Raw::Quant {
                vars, sorts, body, ..
            } => {
                let mark = self.scope.len();
                for (i, v) in vars.iter().enumerate() {
                    let s = self.sort(sorts.get(i).unwrap_or(&sorts[0]))?;
                    self.scope.push((v.0.clone(), s));
                }
                let r = self.infer(body);
                self.scope.truncate(mark);
                r
            }
        }
    }

    /// Propagates sorts through equalities between free variables, then
    /// falls back to the only sort of a one-sorted signature.
    fn resolve(&mut self) -> Result<()> {
        loop {
            let mut changed = false;
            let pending = std::mem::take(&mut self.pending);
            for (a, b) in pending {
                let text = format!("equality {} = {}", a.0, b.0);
                match (self.current(&a.0), self.current(&b.0)) {
                    (Some(s), _) => {
                        self.assign(&b.0, s, &|| text.clone())?;
                        changed = true;
                    }
                    (None, Some(s)) => {
                        self.assign(&a.0, s, &|| text.clone())?;
                        changed = true;
                    }
                    (None, None) => self.pending.push((a, b)),
                }
            }
            if !changed || self.pending.is_empty() {
                break;
            }
        }
        let unresolved: Vec<String> = self
            .free
            .iter()
            .filter(|(_, s)| s.is_none())
            .map(|(n, _)| n.clone())
            .collect();
        for name in unresolved {
            if self.sig.num_sorts() == 1 {
                self.free.insert(name, Some(SortId(0)));
            } else {
                return Err(Error::SortMismatch {
                    context: format!("variable {name}"),
                    message: "cannot infer sort; annotate it in a declaration".into(),
                });
            }
        }
        Ok(())
    }

    fn var(&self, name: &str) -> Var {
        let sort = self
            .current(name)
            .expect("every variable is typed after resolve");
        Var::new(name, sort)
    }

    fn build(&mut self, raw: &Raw) -> Result<Formula> {
        Ok(match raw {
            Raw::Const(b) => Formula::Const(*b),
            Raw::Atom { rel, args, .. } => {
                let id = self.sig.relation_id(&rel.0).expect("checked in infer");
                Formula::Atom(id, args.iter().map(|a| self.var(&a.0)).collect())
            }
            Raw::Eq(a, b) => Formula::Eq(self.var(&a.0), self.var(&b.0)),
            Raw::Not(f) => Formula::not(self.build(f)?),
            Raw::And(a, b) => Formula::and(self.build(a)?, self.build(b)?),
            Raw::Or(a, b) => Formula::or(self.build(a)?, self.build(b)?),
            Raw::Quant {
                exists,
                vars,
                sorts,
                body,
            } => {
                let mark = self.scope.len();
                let mut typed = Vec::with_capacity(vars.len());
                for (i, v) in vars.iter().enumerate() {
                    let s = self.sort(sorts.get(i).unwrap_or(&sorts[0]))?;
                    self.scope.push((v.0.clone(), s));
                    typed.push(Var::new(v.0.clone(), s));
                }
                let body = self.build(body)?;
                self.scope.truncate(mark);
                if *exists {
                    Formula::Exists(typed, Box::new(body))
                } else {
                    Formula::Forall(typed, Box::new(body))
                }
            }
        })
    }
}

/// Parses a partitioned formula over `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<PartitionedFormula> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut typer = Typer::new(sig);
    let declaration = if p.at_declaration() {
        p.bump();
        p.bump();
        let left = p.declared_vars()?;
        let right = if *p.peek() == Tok::Semi {
            p.bump();
            p.declared_vars()?
        } else {
            Vec::new()
        };
        p.expect(Tok::RParen, "')'")?;
        p.expect(Tok::Define, "':='")?;
        for (v, s) in left.iter().chain(&right) {
            if typer.free.contains_key(&v.0) {
                return Err(Error::DuplicateName(v.0.clone()));
            }
            typer.touch_free(&v.0);
            if let Some(s) = s {
                let sort = typer.sort(s)?;
                typer.free.insert(v.0.clone(), Some(sort));
            }
        }
        Some((left, right))
    } else {
        None
    };
    let raw = p.formula()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input");
    }
    typer.infer(&raw)?;
    typer.resolve()?;
    let formula = typer.build(&raw)?;
    let (left, right) = match declaration {
        Some((l, r)) => (
            l.iter().map(|(v, _)| typer.var(&v.0)).collect(),
            r.iter().map(|(v, _)| typer.var(&v.0)).collect(),
        ),
        None => {
            let mut left: Vec<Var> = Vec::new();
            if let Some(names) = &typer.first_semi {
                for n in names {
                    if typer.bound(&n.0).is_some() || !typer.free.contains_key(&n.0) {
                        return Err(Error::Syntax {
                            offset: n.1,
                            message: format!("partition variable {} is not free", n.0),
                        });
                    }
                    if !left.iter().any(|l| l.name == n.0) {
                        left.push(typer.var(&n.0));
                    }
                }
            }
            let free = formula.free_vars();
            let right = typer
                .order
                .iter()
                .filter(|n| !left.iter().any(|l| &l.name == *n))
                .filter(|n| free.iter().any(|f| &f.name == *n))
                .map(|n| typer.var(n))
                .collect();
            (left, right)
        }
    };
    PartitionedFormula::new(sig, formula, left, right)
}

/// Fully annotated declaration form accepted by [`parse_formula`].
pub fn print_formula(pf: &PartitionedFormula, sig: &Signature) -> String {
    pf.display(sig).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_sig() -> Signature {
        let mut sig = Signature::new();
        let x = sig.add_sort("X").unwrap();
        sig.add_relation("E", vec![x, x]).unwrap();
        sig.add_relation("F", vec![x, x, x]).unwrap();
        sig
    }

    #[test]
    fn single_atom_split() {
        let sig = graph_sig();
        let pf = parse_formula("E(x;y)", &sig).unwrap();
        let x = SortId(0);
        assert_eq!(pf.left, vec![Var::new("x", x)]);
        assert_eq!(pf.right, vec![Var::new("y", x)]);
        assert!(matches!(pf.formula, Formula::Atom(..)));
    }

    #[test]
    fn conjunction_with_negated_atom() {
        let sig = graph_sig();
        let pf = parse_formula("F(x,y;z) & !F(x,z;y)", &sig).unwrap();
        let names = |vs: &[Var]| vs.iter().map(|v| v.name.clone()).collect::<Vec<_>>();
        assert_eq!(names(&pf.left), ["x", "y"]);
        assert_eq!(names(&pf.right), ["z"]);
        match &pf.formula {
            Formula::And(a, b) => {
                assert!(matches!(**a, Formula::Atom(..)));
                assert!(matches!(**b, Formula::Not(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_input_reports_offset() {
        let sig = graph_sig();
        match parse_formula("E(x;", &sig) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sort_mismatch_names_atom() {
        let mut sig = Signature::new();
        let x = sig.add_sort("X").unwrap();
        let y = sig.add_sort("Y").unwrap();
        sig.add_relation("R", vec![x, y]).unwrap();
        match parse_formula("R(a;b) & R(b;a)", &sig) {
            Err(Error::SortMismatch { context, .. }) => assert_eq!(context, "atom R(b,a)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn declaration_allows_unused_left_variable() {
        let sig = graph_sig();
        let pf = parse_formula("phi(x ; y) := y = y", &sig).unwrap();
        assert_eq!(pf.left.len(), 1);
        assert_eq!(pf.right.len(), 1);
    }

    #[test]
    fn quantifier_and_precedence() {
        let sig = graph_sig();
        let pf = parse_formula("E(x;y) | !E(y,x) & E z : X . E(y,z)", &sig).unwrap();
        // | binds loosest, the quantifier body extends to the end
        let printed = print_formula(&pf, &sig);
        assert_eq!(
            printed,
            "phi(x:X ; y:X) := E(x,y) | !E(y,x) & (E z : X . E(y,z))"
        );
        assert_eq!(parse_formula(&printed, &sig).unwrap(), pf);
    }

    #[test]
    fn relation_named_like_a_quantifier() {
        let mut sig = Signature::new();
        let x = sig.add_sort("X").unwrap();
        sig.add_relation("A", vec![x]).unwrap();
        let pf = parse_formula("A(x) & A y : X . A(y)", &sig).unwrap();
        assert_eq!(pf.formula.quantifier_rank(), 1);
    }

    #[test]
    fn unknown_relation_and_sort() {
        let sig = graph_sig();
        assert_eq!(
            parse_formula("Q(x;y)", &sig),
            Err(Error::UnknownRelation("Q".into()))
        );
        assert_eq!(
            parse_formula("E y : W . E(x,y)", &sig),
            Err(Error::UnknownSort("W".into()))
        );
    }
}
