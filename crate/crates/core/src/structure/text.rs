//! Text format for finite structures:
//!
//! ```text
//! language { sort X; rel E : X*X; }
//! structure { X = {0,1,2}; E = {(0,1),(1,2)}; }
//! ```
//!
//! Unary relations may list bare ordinals. Sorts that are not mentioned in
//! the structure block are empty. `//` starts a line comment.

use std::collections::BTreeSet;

use super::{FiniteTables, StructureSpec};
use crate::error::{Error, Result};
use crate::signature::Signature;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(u64),
    Sym(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (off, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1).map(|x| x.1) == Some('/') {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let end = chars.get(i).map_or(text.len(), |x| x.0);
            let n = text[chars[start].0..end].parse().map_err(|_| Error::Syntax {
                offset: off,
                message: "number too large".into(),
            })?;
            out.push((Tok::Num(n), off));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || "_#'".contains(chars[i].1)) {
                i += 1;
            }
            let end = chars.get(i).map_or(text.len(), |x| x.0);
            out.push((Tok::Ident(text[chars[start].0..end].to_string()), off));
        } else if "{}();:*=,".contains(c) {
            out.push((Tok::Sym(c), off));
            i += 1;
        } else {
            return Err(Error::Syntax {
                offset: off,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Cursor {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
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

    fn sym(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected '{c}'"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            _ => {
                self.pos -= 1;
                self.fail("expected a name")
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => self.fail(format!("expected `{kw}`")),
        }
    }

    fn num(&mut self) -> Result<u64> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.fail("expected a natural number"),
        }
    }
}

fn parse_language(c: &mut Cursor) -> Result<Signature> {
    c.keyword("language")?;
    c.sym('{')?;
    let mut sig = Signature::new();
    while !c.eat('}') {
        let off = c.offset();
        let kw = c.ident()?;
        let with_offset = |e: Error| match e {
            Error::DuplicateName(_) | Error::UnknownSort(_) => Error::Syntax {
                offset: off,
                message: e.to_string(),
            },
            other => other,
        };
        match kw.as_str() {
            "sort" => {
                let name = c.ident()?;
                sig.add_sort(name).map_err(with_offset)?;
            }
            "rel" => {
                let name = c.ident()?;
                let mut ty = Vec::new();
                if c.eat(':') {
                    loop {
                        let s = c.ident()?;
                        ty.push(sig.sort_id(&s).ok_or(Error::UnknownSort(s)).map_err(with_offset)?);
                        if !c.eat('*') {
                            break;
                        }
                    }
                }
                sig.add_relation(name, ty).map_err(with_offset)?;
            }
            _ => {
                return Err(Error::Syntax {
                    offset: off,
                    message: "expected `sort` or `rel`".into(),
                })
            }
        }
        c.sym(';')?;
    }
    Ok(sig)
}

fn parse_item(c: &mut Cursor) -> Result<Vec<u64>> {
    if c.eat('(') {
        let mut t = Vec::new();
        if c.eat(')') {
            return Ok(t);
        }
        loop {
            t.push(c.num()?);
            if c.eat(')') {
                return Ok(t);
            }
            c.sym(',')?;
        }
    }
    Ok(vec![c.num()?])
}

/// Parses the two-block text format into a finite structure.
pub fn parse_structure(text: &str) -> Result<StructureSpec> {
    let mut c = Cursor {
        toks: lex(text)?,
        pos: 0,
    };
    let sig = parse_language(&mut c)?;
    c.keyword("structure")?;
    c.sym('{')?;
    let mut tables = FiniteTables {
        elements: vec![BTreeSet::new(); sig.num_sorts()],
        relations: vec![BTreeSet::new(); sig.num_relations()],
    };
    let mut seen = BTreeSet::new();
    while !c.eat('}') {
        let off = c.offset();
        let name = c.ident()?;
        if !seen.insert(name.clone()) {
            return Err(Error::Syntax {
                offset: off,
                message: format!("`{name}` assigned twice"),
            });
        }
        c.sym('=')?;
        c.sym('{')?;
        let mut items = Vec::new();
        if !c.eat('}') {
            loop {
                items.push(parse_item(&mut c)?);
                if c.eat('}') {
                    break;
                }
                c.sym(',')?;
            }
        }
        c.sym(';')?;
        if let Some(s) = sig.sort_id(&name) {
            for item in items {
                if item.len() != 1 || !tables.elements[s.0].insert(item[0]) {
                    return Err(Error::DuplicateTuple {
                        relation: name.clone(),
                        tuple: format!("{item:?}"),
                    });
                }
            }
        } else if let Some(r) = sig.relation_id(&name) {
            for item in items {
                let text = format!(
                    "({})",
                    item.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
                );
                if item.len() != sig.relation(r).ty.len() {
                    return Err(Error::TypeMismatch(format!("tuple {text} in {name}")));
                }
                if !tables.relations[r.0].insert(item) {
                    return Err(Error::DuplicateTuple {
                        relation: name.clone(),
                        tuple: text,
                    });
                }
            }
        } else {
            return Err(Error::Syntax {
                offset: off,
                message: format!("`{name}` is neither a sort nor a relation"),
            });
        }
    }
    if *c.peek() != Tok::End {
        return c.fail("unexpected trailing input");
    }
    StructureSpec::finite(sig, tables)
}

/// Prints a finite structure in the format read by [`parse_structure`].
pub fn print_structure(s: &StructureSpec) -> Result<String> {
    let t = s.tables().ok_or(Error::WrongStructureKind { expected: "finite" })?;
    let mut out = String::from("language {\n");
    for sort in s.sig.sort_ids() {
        out.push_str(&format!("  sort {};\n", s.sig.sort_name(sort)));
    }
    for r in s.sig.relation_ids() {
        let rel = s.sig.relation(r);
        if rel.ty.is_empty() {
            out.push_str(&format!("  rel {};\n", rel.name));
        } else {
            out.push_str(&format!("  rel {} : {};\n", rel.name, s.sig.type_string(&rel.ty)));
        }
    }
    out.push_str("}\nstructure {\n");
    for sort in s.sig.sort_ids() {
        let items: Vec<String> = t.elements[sort.0].iter().map(u64::to_string).collect();
        out.push_str(&format!("  {} = {{{}}};\n", s.sig.sort_name(sort), items.join(",")));
    }
    for r in s.sig.relation_ids() {
        let items: Vec<String> = t.relations[r.0]
            .iter()
            .map(|tuple| {
                format!(
                    "({})",
                    tuple.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
                )
            })
            .collect();
        out.push_str(&format!("  {} = {{{}}};\n", s.sig.relation(r).name, items.join(",")));
    }
    out.push_str("}\n");
    Ok(out)
}
