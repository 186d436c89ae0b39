//! Parser and serializer for the BIF (Bayesian interchange format) subset
//! used by the benchmark networks, plus the conversion to a causal Bayesian
//! network model.
//!
//! Supported grammar:
//!
//! ```text
//! document    := network variable* probability*
//! network     := "network" ident "{" "}"
//! variable    := "variable" ident "{"
//!                  "type" "discrete" "[" int "]" "{" ident ("," ident)* "}" ";"
//!                "}"
//! probability := "probability" "(" ident ("|" ident ("," ident)*)? ")" "{"
//!                  ( "table" number ("," number)* ";" )
//!                | ( "(" ident ("," ident)* ")" number ("," number)* ";" )*
//!                "}"
//! ```
//!
//! `table` entries enumerate parent configurations in mixed-radix order with
//! the first parent most significant, one child simplex per configuration.

use crate::{IoError, Result};
use causal_core::graph::Dag;
use causal_core::scm::{CptTable, Mechanism, ModelKind, NoiseSpec, Scm, VariableDomain};

#[derive(Debug, Clone, PartialEq)]
pub struct BifVariable {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifProbability {
    pub child: String,
    pub parents: Vec<String>,
    /// One simplex over child states per parent configuration, flattened in
    /// mixed-radix order (first parent most significant).
    pub entries: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifDocument {
    pub name: String,
    pub variables: Vec<BifVariable>,
    pub probabilities: Vec<BifProbability>,
}

impl BifDocument {
    pub fn variable(&self, name: &str) -> Option<&BifVariable> {
        self.variables.iter().find(|v| v.name == name)
    }

    fn validate(&self) -> Result<()> {
        for (i, v) in self.variables.iter().enumerate() {
            if v.states.len() < 2 {
                return Err(IoError::Semantic(format!(
                    "variable {} needs at least two states",
                    v.name
                )));
            }
            if self.variables[..i].iter().any(|u| u.name == v.name) {
                return Err(IoError::Semantic(format!("duplicate variable {}", v.name)));
            }
        }
        let mut seen = Vec::new();
        for p in &self.probabilities {
            if seen.contains(&&p.child) {
                return Err(IoError::Semantic(format!(
                    "multiple probability blocks for {}",
                    p.child
                )));
            }
            seen.push(&p.child);
            let child = self.variable(&p.child).ok_or_else(|| {
                IoError::Semantic(format!("probability block for undeclared {}", p.child))
            })?;
            let mut rows = 1usize;
            for parent in &p.parents {
                let pv = self.variable(parent).ok_or_else(|| {
                    IoError::Semantic(format!(
                        "block for {} references undeclared parent {parent}",
                        p.child
                    ))
                })?;
                rows *= pv.states.len();
            }
            if p.entries.len() != rows * child.states.len() {
                return Err(IoError::Semantic(format!(
                    "block for {} needs {} probabilities, found {}",
                    p.child,
                    rows * child.states.len(),
                    p.entries.len()
                )));
            }
            for r in 0..rows {
                let row = &p.entries[r * child.states.len()..(r + 1) * child.states.len()];
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > 1e-6 || row.iter().any(|&x| x < 0.0) {
                    return Err(IoError::Semantic(format!(
                        "block for {}: row {r} sums to {total}",
                        p.child
                    )));
                }
            }
        }
        for v in &self.variables {
            if !self.probabilities.iter().any(|p| p.child == v.name) {
                return Err(IoError::Semantic(format!(
                    "variable {} has no probability block",
                    v.name
                )));
            }
        }
        Ok(())
    }
}

// ---- lexer ----

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Punct(char),
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '/' {
            // line comment
            let start_col = col;
            chars.next();
            col += 1;
            if chars.peek() == Some(&'/') {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        col = 1;
                        break;
                    }
                }
                continue;
            }
            return Err(IoError::Parse {
                line,
                col: start_col,
                message: "unexpected '/'".into(),
            });
        }
        let start_col = col;
        if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() || "+-.eE".contains(c) {
                    s.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            let n: f64 = s.parse().map_err(|_| IoError::Parse {
                line,
                col: start_col,
                message: format!("bad number {s}"),
            })?;
            toks.push((Tok::Number(n), line, start_col));
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' || c == '-' || c == '.' {
                    s.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            toks.push((Tok::Ident(s), line, start_col));
            continue;
        }
        if "{}()[]|,;".contains(c) {
            chars.next();
            col += 1;
            toks.push((Tok::Punct(c), line, start_col));
            continue;
        }
        return Err(IoError::Parse {
            line,
            col,
            message: format!("unexpected character {c:?}"),
        });
    }
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|&(_, l, c)| (l, c))
            .unwrap_or_else(|| {
                self.toks
                    .last()
                    .map(|&(_, l, c)| (l, c + 1))
                    .unwrap_or((1, 1))
            })
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(IoError::Parse {
            line,
            col,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_punct(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(Tok::Punct(p)) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            other => self.err(format!("expected {c:?}, found {other:?}")),
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {other:?}")),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            other => self.err(format!("expected {kw:?}, found {other:?}")),
        }
    }

    fn expect_number(&mut self) -> Result<f64> {
        match self.peek() {
            Some(Tok::Number(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            // state names can be numeric-looking; accept integers as idents
            other => self.err(format!("expected number, found {other:?}")),
        }
    }

    fn at_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Tok::Punct(p)) if *p == c)
    }
}

/// Parses a BIF document, with line/column positions on syntax errors and
/// named blocks on semantic ones.
pub fn parse_bif(text: &str) -> Result<BifDocument> {
    let mut lx = lex(text)?;
    lx.expect_keyword("network")?;
    let name = lx.expect_ident()?;
    lx.expect_punct('{')?;
    lx.expect_punct('}')?;
    let mut variables = Vec::new();
    let mut probabilities = Vec::new();
    while let Some(tok) = lx.peek() {
        match tok {
            Tok::Ident(kw) if kw == "variable" => {
                lx.next();
                let vname = lx.expect_ident()?;
                lx.expect_punct('{')?;
                lx.expect_keyword("type")?;
                lx.expect_keyword("discrete")?;
                lx.expect_punct('[')?;
                let n = lx.expect_number()? as usize;
                lx.expect_punct(']')?;
                lx.expect_punct('{')?;
                let mut states = Vec::new();
                loop {
                    match lx.next() {
                        Some(Tok::Ident(s)) => states.push(s),
                        Some(Tok::Number(x)) => states.push(format_number(x)),
                        other => return lx.err(format!("expected state name, found {other:?}")),
                    }
                    if lx.at_punct(',') {
                        lx.next();
                    } else {
                        break;
                    }
                }
                lx.expect_punct('}')?;
                lx.expect_punct(';')?;
                lx.expect_punct('}')?;
                if states.len() != n {
                    return Err(IoError::Semantic(format!(
                        "variable {vname} declares {n} states but lists {}",
                        states.len()
                    )));
                }
                variables.push(BifVariable {
                    name: vname,
                    states,
                });
            }
            Tok::Ident(kw) if kw == "probability" => {
                lx.next();
                lx.expect_punct('(')?;
                let child = lx.expect_ident()?;
                let mut parents = Vec::new();
                if lx.at_punct('|') {
                    lx.next();
                    loop {
                        parents.push(lx.expect_ident()?);
                        if lx.at_punct(',') {
                            lx.next();
                        } else {
                            break;
                        }
                    }
                }
                lx.expect_punct(')')?;
                lx.expect_punct('{')?;
                let entries =
                    parse_probability_body(&mut lx, &child, &parents, &variables)?;
                lx.expect_punct('}')?;
                probabilities.push(BifProbability {
                    child,
                    parents,
                    entries,
                });
            }
            other => return lx.err(format!("expected 'variable' or 'probability', found {other:?}")),
        }
    }
    let doc = BifDocument {
        name,
        variables,
        probabilities,
    };
    doc.validate()?;
    Ok(doc)
}

fn format_number(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn parse_probability_body(
    lx: &mut Lexer,
    child: &str,
    parents: &[String],
    variables: &[BifVariable],
) -> Result<Vec<f64>> {
    let find = |name: &str| -> Result<&BifVariable> {
        variables
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| IoError::Semantic(format!("undeclared variable {name}")))
    };
    let child_card = find(child)?.states.len();
    let parent_cards: Vec<usize> = parents
        .iter()
        .map(|p| find(p).map(|v| v.states.len()))
        .collect::<Result<_>>()?;
    let n_rows: usize = parent_cards.iter().product();

    if matches!(lx.peek(), Some(Tok::Ident(kw)) if kw == "table") {
        lx.next();
        let mut entries = Vec::new();
        loop {
            entries.push(lx.expect_number()?);
            if lx.at_punct(',') {
                lx.next();
            } else {
                break;
            }
        }
        lx.expect_punct(';')?;
        return Ok(entries);
    }

    // per-row syntax: ( state, ... ) p1, ..., pk;
    let mut entries = vec![f64::NAN; n_rows * child_card];
    while lx.at_punct('(') {
        lx.next();
        let mut states = Vec::new();
        loop {
            match lx.next() {
                Some(Tok::Ident(s)) => states.push(s),
                Some(Tok::Number(x)) => states.push(format_number(x)),
                other => return lx.err(format!("expected state name, found {other:?}")),
            }
            if lx.at_punct(',') {
                lx.next();
            } else {
                break;
            }
        }
        lx.expect_punct(')')?;
        if states.len() != parents.len() {
            return Err(IoError::Semantic(format!(
                "block for {child}: row names {} states for {} parents",
                states.len(),
                parents.len()
            )));
        }
        let mut row = 0usize;
        for (s, p) in states.iter().zip(parents.iter()) {
            let pv = find(p)?;
            let idx = pv.states.iter().position(|st| st == s).ok_or_else(|| {
                IoError::Semantic(format!("block for {child}: unknown state {s} of {p}"))
            })?;
            row = row * pv.states.len() + idx;
        }
        for slot in 0..child_card {
            entries[row * child_card + slot] = lx.expect_number()?;
            if slot + 1 < child_card {
                lx.expect_punct(',')?;
            }
        }
        lx.expect_punct(';')?;
    }
    if entries.iter().any(|e| e.is_nan()) {
        return Err(IoError::Semantic(format!(
            "block for {child}: not all parent configurations are covered"
        )));
    }
    Ok(entries)
}

/// Canonical serialization; `parse_bif(serialize_bif(doc)) == doc`.
pub fn serialize_bif(doc: &BifDocument) -> String {
    let mut out = String::new();
    out.push_str(&format!("network {} {{\n}}\n", doc.name));
    for v in &doc.variables {
        out.push_str(&format!(
            "variable {} {{\n  type discrete [ {} ] {{ {} }};\n}}\n",
            v.name,
            v.states.len(),
            v.states.join(", ")
        ));
    }
    for p in &doc.probabilities {
        let child = doc.variable(&p.child).expect("validated");
        let card = child.states.len();
        if p.parents.is_empty() {
            out.push_str(&format!(
                "probability ( {} ) {{\n  table {};\n}}\n",
                p.child,
                p.entries
                    .iter()
                    .map(|x| format!("{x}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        } else {
            out.push_str(&format!(
                "probability ( {} | {} ) {{\n",
                p.child,
                p.parents.join(", ")
            ));
            let cards: Vec<usize> = p
                .parents
                .iter()
                .map(|q| doc.variable(q).expect("validated").states.len())
                .collect();
            let n_rows: usize = cards.iter().product();
            for row in 0..n_rows {
                let mut rem = row;
                let mut names = vec![String::new(); cards.len()];
                for i in (0..cards.len()).rev() {
                    let idx = rem % cards[i];
                    rem /= cards[i];
                    names[i] = doc.variable(&p.parents[i]).expect("validated").states[idx].clone();
                }
                let probs = &p.entries[row * card..(row + 1) * card];
                out.push_str(&format!(
                    "  ( {} ) {};\n",
                    names.join(", "),
                    probs
                        .iter()
                        .map(|x| format!("{x}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
            out.push_str("}\n");
        }
    }
    out
}

/// Builds the causal-Bayesian-network model: CPT mechanisms with
/// uniform-variate noise. Interventional and observational machinery work on
/// the result; counterfactuals are refused by construction.
pub fn bif_to_scm(doc: &BifDocument) -> Result<Scm> {
    doc.validate()?;
    let labels: Vec<String> = doc.variables.iter().map(|v| v.name.clone()).collect();
    let index = |name: &str| labels.iter().position(|l| l == name).unwrap();
    let mut edges = Vec::new();
    for p in &doc.probabilities {
        let c = index(&p.child);
        for parent in &p.parents {
            edges.push((index(parent), c));
        }
    }
    let graph = Dag::new(labels.clone(), &edges)?;
    let domains: Vec<VariableDomain> = doc
        .variables
        .iter()
        .map(|v| VariableDomain::Discrete { states: v.states.clone() })
        .collect();
    let mut mechanisms: Vec<Option<Mechanism>> = vec![None; labels.len()];
    for p in &doc.probabilities {
        let c = index(&p.child);
        let child_card = doc.variable(&p.child).unwrap().states.len();
        let block_parents: Vec<usize> = p.parents.iter().map(|q| index(q)).collect();
        let block_cards: Vec<usize> = p
            .parents
            .iter()
            .map(|q| doc.variable(q).unwrap().states.len())
            .collect();
        // the graph sorts parents by index; remap the block's row order
        let graph_parents = graph.parents(c);
        let slot_of: Vec<usize> = graph_parents
            .iter()
            .map(|gp| block_parents.iter().position(|bp| bp == gp).unwrap())
            .collect();
        let sorted_cards: Vec<usize> = slot_of.iter().map(|&s| block_cards[s]).collect();
        let n_rows: usize = block_cards.iter().product();
        let mut rows = vec![0.0; n_rows.max(1) * child_card];
        for brow in 0..n_rows.max(1) {
            // decode the block row into per-parent states
            let mut rem = brow;
            let mut bstates = vec![0usize; block_cards.len()];
            for i in (0..block_cards.len()).rev() {
                bstates[i] = rem % block_cards[i];
                rem /= block_cards[i];
            }
            // re-encode under sorted parent order
            let mut srow = 0usize;
            for (sorted_slot, &bslot) in slot_of.iter().enumerate() {
                srow = srow * sorted_cards[sorted_slot] + bstates[bslot];
            }
            rows[srow * child_card..(srow + 1) * child_card]
                .copy_from_slice(&p.entries[brow * child_card..(brow + 1) * child_card]);
        }
        mechanisms[c] = Some(Mechanism::Cpt(CptTable::new(
            child_card,
            sorted_cards,
            rows,
        )?));
    }
    let mechanisms: Vec<Mechanism> = mechanisms.into_iter().map(Option::unwrap).collect();
    let noises = vec![NoiseSpec::Uniform01; labels.len()];
    Ok(Scm::new(
        graph,
        domains,
        mechanisms,
        noises,
        ModelKind::BayesNetOnly,
    )?)
}
