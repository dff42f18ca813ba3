//! Conformance checking of documents against a [`DtdTable`].
//!
//! Each composite content model is compiled into a position automaton
//! (one state per element reference plus a start state). A grammar whose
//! automata have two transitions with the same label out of one state is
//! refused, so matching needs a single child of lookahead.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::dtd::{ContentModel, DtdError, DtdTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub children: Vec<Node>,
}

impl Element {
    pub fn new(name: impl Into<String>, children: Vec<Node>) -> Self {
        Self {
            name: name.into(),
            children,
        }
    }

    pub fn leaf(name: impl Into<String>, text: impl Into<String>) -> Self {
        Self::new(name, vec![Node::Text(text.into())])
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    pub fn child(&self, name: &str) -> Option<&Element> {
        self.elements().find(|e| e.name == name)
    }

    pub fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.elements().filter(move |e| e.name == name)
    }

    /// Concatenation of the direct text children.
    pub fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|n| match n {
                Node::Text(t) => Some(t.as_str()),
                Node::Element(_) => None,
            })
            .collect()
    }

    pub fn child_text(&self, name: &str) -> Option<String> {
        self.child(name).map(Element::text)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("document is not well-formed at line {line}: {detail}")]
pub struct NotWellFormed {
    pub line: usize,
    pub detail: String,
}

/// Minimal well-formedness parse; attributes are checked for shape and dropped.
pub fn parse_document(text: &str) -> Result<Element, NotWellFormed> {
    XmlReader::new(text).document()
}

struct XmlReader<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> XmlReader<'a> {
    fn new(src: &'a str) -> Self {
        let src = src.strip_prefix('\u{feff}').unwrap_or(src);
        Self { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn line(&self) -> usize {
        1 + self.src[..self.pos].matches('\n').count()
    }

    fn fail<T>(&self, detail: impl Into<String>) -> Result<T, NotWellFormed> {
        Err(NotWellFormed {
            line: self.line(),
            detail: detail.into(),
        })
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn skip_past(&mut self, terminator: &str, what: &str) -> Result<&'a str, NotWellFormed> {
        match self.rest().find(terminator) {
            Some(i) => {
                let body = &self.rest()[..i];
                self.pos += i + terminator.len();
                Ok(body)
            }
            None => self.fail(format!("unterminated {what}")),
        }
    }

    // Comments, processing instructions and whitespace outside the root.
    fn misc(&mut self) -> Result<(), NotWellFormed> {
        loop {
            self.skip_ws();
            if self.eat("<!--") {
                self.skip_past("-->", "comment")?;
            } else if self.eat("<?") {
                self.skip_past("?>", "processing instruction")?;
            } else {
                return Ok(());
            }
        }
    }

    fn document(&mut self) -> Result<Element, NotWellFormed> {
        self.misc()?;
        if self.eat("<!DOCTYPE") {
            let mut depth = 0usize;
            loop {
                match self.rest().chars().next() {
                    None => return self.fail("unterminated doctype"),
                    Some(c) => {
                        self.pos += c.len_utf8();
                        match c {
                            '[' => depth += 1,
                            ']' => depth = depth.saturating_sub(1),
                            '>' if depth == 0 => break,
                            _ => {}
                        }
                    }
                }
            }
            self.misc()?;
        }
        if !self.rest().starts_with('<') {
            return self.fail("expected root element");
        }
        let root = self.element()?;
        self.misc()?;
        if !self.rest().is_empty() {
            return self.fail("content after the root element");
        }
        Ok(root)
    }

    fn name(&mut self) -> Result<&'a str, NotWellFormed> {
        let rest = self.rest();
        let end = rest
            .find(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | ':' | '-' | '.')))
            .unwrap_or(rest.len());
        if end == 0 || !rest.starts_with(|c: char| c.is_alphabetic() || c == '_' || c == ':') {
            return self.fail("expected a name");
        }
        self.pos += end;
        Ok(&rest[..end])
    }

    // Positioned at '<' of a start tag.
    fn element(&mut self) -> Result<Element, NotWellFormed> {
        self.pos += 1;
        let name = self.name()?.to_string();
        loop {
            self.skip_ws();
            if self.eat("/>") {
                return Ok(Element::new(name, Vec::new()));
            }
            if self.eat(">") {
                break;
            }
            self.name()?;
            self.skip_ws();
            if !self.eat("=") {
                return self.fail("expected '=' in attribute");
            }
            self.skip_ws();
            let quote = match self.rest().chars().next() {
                Some(q @ ('"' | '\'')) => q,
                _ => return self.fail("expected quoted attribute value"),
            };
            self.pos += 1;
            let value = self.skip_past(&quote.to_string(), "attribute value")?;
            if value.contains('<') {
                return self.fail("'<' in attribute value");
            }
        }

        let mut children = Vec::new();
        let mut text = String::new();
        loop {
            if self.rest().is_empty() {
                return self.fail(format!("element {name} is not closed"));
            }
            if self.eat("</") {
                let close = self.name()?;
                if close != name {
                    return self.fail(format!("expected </{name}>, found </{close}>"));
                }
                self.skip_ws();
                if !self.eat(">") {
                    return self.fail("expected '>'");
                }
                break;
            } else if self.eat("<![CDATA[") {
                text.push_str(self.skip_past("]]>", "CDATA section")?);
            } else if self.eat("<!--") {
                self.skip_past("-->", "comment")?;
            } else if self.eat("<?") {
                self.skip_past("?>", "processing instruction")?;
            } else if self.rest().starts_with('<') {
                if !text.is_empty() {
                    children.push(Node::Text(std::mem::take(&mut text)));
                }
                children.push(Node::Element(self.element()?));
            } else {
                let end = self.rest().find('<').unwrap_or(self.rest().len());
                let raw = &self.rest()[..end];
                let decoded = self.decode(raw)?;
                text.push_str(&decoded);
                self.pos += end;
            }
        }
        if !text.is_empty() {
            children.push(Node::Text(text));
        }
        Ok(Element::new(name, children))
    }

    fn decode(&self, raw: &str) -> Result<String, NotWellFormed> {
        let mut out = String::with_capacity(raw.len());
        let mut rest = raw;
        while let Some(i) = rest.find('&') {
            out.push_str(&rest[..i]);
            rest = &rest[i + 1..];
            let Some(end) = rest.find(';') else {
                return self.fail("unterminated entity reference");
            };
            let entity = &rest[..end];
            let c = match entity {
                "amp" => '&',
                "lt" => '<',
                "gt" => '>',
                "quot" => '"',
                "apos" => '\'',
                _ => {
                    let code = if let Some(hex) = entity.strip_prefix("#x") {
                        u32::from_str_radix(hex, 16).ok()
                    } else if let Some(dec) = entity.strip_prefix('#') {
                        dec.parse().ok()
                    } else {
                        None
                    };
                    match code.and_then(char::from_u32) {
                        Some(c) => c,
                        None => return self.fail(format!("unknown entity &{entity};")),
                    }
                }
            };
            out.push(c);
            rest = &rest[end + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    UnknownElement,
    UnexpectedChild,
    MissingChild,
    TextInComposite,
    ChildInAtomic,
    TrailingChildren,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::UnknownElement => "UnknownElement",
            Self::UnexpectedChild => "UnexpectedChild",
            Self::MissingChild => "MissingChild",
            Self::TextInComposite => "TextInComposite",
            Self::ChildInAtomic => "ChildInAtomic",
            Self::TrailingChildren => "TrailingChildren",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub code: ViolationCode,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.path, self.code, self.detail)
    }
}

/// Violations in document order; empty means the document conforms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    /// One `PATH<TAB>CODE<TAB>DETAIL` line per violation.
    pub fn render(&self) -> String {
        self.violations.iter().map(|v| format!("{v}\n")).collect()
    }
}

/// Position automaton for one content model.
#[derive(Debug, Clone)]
pub struct ContentAutomaton {
    labels: Vec<String>,
    start: Vec<usize>,
    follow: Vec<Vec<usize>>,
    last: Vec<bool>,
    nullable: bool,
}

/// Automaton state: `None` before any child, `Some(p)` after matching position `p`.
type State = Option<usize>;

struct Fragment {
    first: Vec<usize>,
    last: Vec<usize>,
    nullable: bool,
}

impl ContentAutomaton {
    pub fn compile(model: &ContentModel) -> Self {
        let mut labels = Vec::new();
        let mut follow = Vec::new();
        let frag = Self::build(model, &mut labels, &mut follow);
        let mut last = vec![false; labels.len()];
        for p in frag.last {
            last[p] = true;
        }
        Self {
            labels,
            start: frag.first,
            follow,
            last,
            nullable: frag.nullable,
        }
    }

    fn build(
        model: &ContentModel,
        labels: &mut Vec<String>,
        follow: &mut Vec<Vec<usize>>,
    ) -> Fragment {
        let (mut frag, card) = match model {
            ContentModel::Text(_) => {
                return Fragment {
                    first: Vec::new(),
                    last: Vec::new(),
                    nullable: true,
                }
            }
            ContentModel::Ref(name, card) => {
                let p = labels.len();
                labels.push(name.clone());
                follow.push(Vec::new());
                (
                    Fragment {
                        first: vec![p],
                        last: vec![p],
                        nullable: false,
                    },
                    *card,
                )
            }
            ContentModel::Sequence(items, card) => {
                let mut acc = Fragment {
                    first: Vec::new(),
                    last: Vec::new(),
                    nullable: true,
                };
                for item in items {
                    let next = Self::build(item, labels, follow);
                    for &l in &acc.last {
                        union_into(&mut follow[l], &next.first);
                    }
                    if acc.nullable {
                        union_into(&mut acc.first, &next.first);
                    }
                    acc.last = if next.nullable {
                        let mut l = acc.last;
                        union_into(&mut l, &next.last);
                        l
                    } else {
                        next.last
                    };
                    acc.nullable &= next.nullable;
                }
                (acc, *card)
            }
            ContentModel::Choice(alts, card) => {
                let mut acc = Fragment {
                    first: Vec::new(),
                    last: Vec::new(),
                    nullable: false,
                };
                for alt in alts {
                    let next = Self::build(alt, labels, follow);
                    union_into(&mut acc.first, &next.first);
                    union_into(&mut acc.last, &next.last);
                    acc.nullable |= next.nullable;
                }
                (acc, *card)
            }
        };
        if card.is_repeatable() {
            for &l in &frag.last {
                union_into(&mut follow[l], &frag.first);
            }
        }
        frag.nullable |= card.is_nullable();
        frag
    }

    fn transitions(&self, state: State) -> &[usize] {
        match state {
            None => &self.start,
            Some(p) => &self.follow[p],
        }
    }

    pub fn step(&self, state: State, name: &str) -> Option<State> {
        self.transitions(state)
            .iter()
            .find(|&&p| self.labels[p] == name)
            .map(|&p| Some(p))
    }

    pub fn is_final(&self, state: State) -> bool {
        match state {
            None => self.nullable,
            Some(p) => self.last[p],
        }
    }

    /// The first pair of same-labelled transitions out of any state.
    pub fn ambiguity(&self) -> Option<&str> {
        let states = std::iter::once(&self.start).chain(self.follow.iter());
        for targets in states {
            for (i, &a) in targets.iter().enumerate() {
                if targets[i + 1..]
                    .iter()
                    .any(|&b| self.labels[b] == self.labels[a])
                {
                    return Some(&self.labels[a]);
                }
            }
        }
        None
    }

    pub fn accepts<S: AsRef<str>>(&self, names: &[S]) -> bool {
        let mut state = None;
        for name in names {
            match self.step(state, name.as_ref()) {
                Some(next) => state = next,
                None => return false,
            }
        }
        self.is_final(state)
    }

    fn expected(&self, state: State) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for &p in self.transitions(state) {
            if !out.contains(&self.labels[p].as_str()) {
                out.push(&self.labels[p]);
            }
        }
        out
    }

    /// Shortest run of skipped children after which `name` is accepted;
    /// returns the first skipped label and the state reached on `name`.
    fn recover(&self, state: State, name: &str) -> Option<(&str, State)> {
        let mut seen = vec![false; self.labels.len()];
        let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
        for &p in self.transitions(state) {
            if !seen[p] {
                seen[p] = true;
                queue.push_back((p, p));
            }
        }
        while let Some((p, origin)) = queue.pop_front() {
            if let Some(next) = self.step(Some(p), name) {
                return Some((&self.labels[origin], next));
            }
            for &q in &self.follow[p] {
                if !seen[q] {
                    seen[q] = true;
                    queue.push_back((q, origin));
                }
            }
        }
        None
    }

    /// Labels along a shortest path from `state` to a final state.
    fn completion(&self, state: State) -> Vec<&str> {
        if self.is_final(state) {
            return Vec::new();
        }
        let mut prev: Vec<Option<State>> = vec![None; self.labels.len()];
        let mut queue = VecDeque::new();
        for &p in self.transitions(state) {
            if prev[p].is_none() {
                prev[p] = Some(state);
                queue.push_back(p);
            }
        }
        while let Some(p) = queue.pop_front() {
            if self.last[p] {
                let mut path = vec![self.labels[p].as_str()];
                let mut cur = prev[p].flatten();
                while let Some(q) = cur {
                    if Some(q) == state {
                        break;
                    }
                    path.push(&self.labels[q]);
                    cur = prev[q].flatten();
                }
                path.reverse();
                return path;
            }
            for &q in &self.follow[p] {
                if prev[q].is_none() {
                    prev[q] = Some(Some(p));
                    queue.push_back(q);
                }
            }
        }
        Vec::new()
    }
}

fn union_into(dst: &mut Vec<usize>, src: &[usize]) {
    for &p in src {
        if !dst.contains(&p) {
            dst.push(p);
        }
    }
}

/// A grammar compiled for validation.
#[derive(Debug, Clone)]
pub struct Validator<'t> {
    table: &'t DtdTable,
    automata: Vec<Option<ContentAutomaton>>,
}

impl<'t> Validator<'t> {
    /// Compiles every composite declaration; refuses nondeterministic models.
    pub fn new(table: &'t DtdTable) -> Result<Self, DtdError> {
        table.check_choices_disjoint()?;
        let mut automata = Vec::with_capacity(table.len());
        for (element, model) in table.declarations() {
            if model.is_atomic() {
                automata.push(None);
                continue;
            }
            let automaton = ContentAutomaton::compile(model);
            if let Some(label) = automaton.ambiguity() {
                return Err(DtdError::Nondeterministic {
                    element: element.to_string(),
                    detail: format!("{label} can be matched by more than one position of {model}"),
                });
            }
            automata.push(Some(automaton));
        }
        Ok(Self { table, automata })
    }

    pub fn table(&self) -> &'t DtdTable {
        self.table
    }

    pub fn automaton(&self, element: &str) -> Option<&ContentAutomaton> {
        let (index, _, _) = self.table_index(element)?;
        self.automata[index].as_ref()
    }

    fn table_index(&self, element: &str) -> Option<(usize, &str, &ContentModel)> {
        self.table
            .declarations()
            .enumerate()
            .find(|(_, (n, _))| *n == element)
            .map(|(i, (n, m))| (i, n, m))
    }

    pub fn validate(&self, root: &Element) -> ValidationReport {
        let mut report = ValidationReport::default();
        if root.name != self.table.root() {
            let (code, detail) = if self.table.contains(&root.name) {
                (
                    ViolationCode::UnexpectedChild,
                    format!("root must be {}", self.table.root()),
                )
            } else {
                (
                    ViolationCode::UnknownElement,
                    format!("{} is not declared", root.name),
                )
            };
            report.violations.push(Violation {
                path: root.name.clone(),
                code,
                detail,
            });
            if code == ViolationCode::UnknownElement {
                return report;
            }
        }
        self.check_element(root, &root.name, &mut report);
        report
    }

    /// Violations for a child-name sequence under `element`, ignoring the
    /// children's own content.
    pub fn check_children<S: AsRef<str>>(&self, element: &str, names: &[S]) -> Vec<Violation> {
        let node = Element::new(
            element,
            names
                .iter()
                .map(|n| Node::Element(Element::new(n.as_ref(), Vec::new())))
                .collect(),
        );
        let mut parent = Vec::new();
        let mut per_child = vec![Vec::new(); names.len()];
        self.match_children(&node, element, &mut parent, &mut per_child);
        parent
            .into_iter()
            .chain(per_child.into_iter().flatten())
            .collect()
    }

    fn check_element(&self, element: &Element, path: &str, report: &mut ValidationReport) {
        let Some(model) = self.table.get(&element.name) else {
            return;
        };
        let children: Vec<&Element> = element.elements().collect();
        let paths = sibling_paths(path, &children);

        if model.is_atomic() {
            for (child_path, child) in paths.iter().zip(&children) {
                report.violations.push(Violation {
                    path: child_path.clone(),
                    code: ViolationCode::ChildInAtomic,
                    detail: format!(
                        "{} only holds text, found element {}",
                        element.name, child.name
                    ),
                });
            }
            return;
        }

        let mut parent = Vec::new();
        let stray_text = element.children.iter().any(|n| match n {
            Node::Text(t) => !t.trim().is_empty(),
            Node::Element(_) => false,
        });
        if stray_text {
            parent.push(Violation {
                path: path.to_string(),
                code: ViolationCode::TextInComposite,
                detail: format!("{} holds elements only", element.name),
            });
        }
        let mut per_child = vec![Vec::new(); children.len()];
        self.match_children(element, path, &mut parent, &mut per_child);
        report.violations.extend(parent);
        for ((child, child_path), found) in children.iter().zip(&paths).zip(per_child) {
            report.violations.extend(found);
            self.check_element(child, child_path, report);
        }
    }

    fn match_children(
        &self,
        element: &Element,
        path: &str,
        parent: &mut Vec<Violation>,
        per_child: &mut [Vec<Violation>],
    ) {
        let Some(automaton) = self.automaton(&element.name) else {
            return;
        };
        let children: Vec<&Element> = element.elements().collect();
        let paths = sibling_paths(path, &children);
        let mut missing: Vec<String> = Vec::new();
        let mut state: State = None;

        for (i, child) in children.iter().enumerate() {
            if !self.table.contains(&child.name) {
                per_child[i].push(Violation {
                    path: paths[i].clone(),
                    code: ViolationCode::UnknownElement,
                    detail: format!("{} is not declared", child.name),
                });
                continue;
            }
            if let Some(next) = automaton.step(state, &child.name) {
                state = next;
                continue;
            }
            if let Some((skipped, next)) = automaton.recover(state, &child.name) {
                if !missing.iter().any(|m| m == skipped) {
                    missing.push(skipped.to_string());
                }
                state = next;
                continue;
            }
            let (code, detail) = if automaton.is_final(state) {
                (
                    ViolationCode::TrailingChildren,
                    format!("{} after complete content of {}", child.name, element.name),
                )
            } else {
                (
                    ViolationCode::UnexpectedChild,
                    format!(
                        "{} not allowed here, expected {}",
                        child.name,
                        automaton.expected(state).join(" | ")
                    ),
                )
            };
            per_child[i].push(Violation {
                path: paths[i].clone(),
                code,
                detail,
            });
        }
        for label in automaton.completion(state) {
            if !missing.iter().any(|m| m == label) {
                missing.push(label.to_string());
            }
        }
        if !automaton.is_final(state) && missing.is_empty() {
            missing.extend(automaton.expected(state).iter().map(|s| s.to_string()));
        }
        if !missing.is_empty() {
            parent.push(Violation {
                path: path.to_string(),
                code: ViolationCode::MissingChild,
                detail: format!("expected {}", missing.join(", ")),
            });
        }
    }
}

/// Checks `tree` against `table`. Fails only when the grammar itself is not
/// deterministic.
pub fn validate(tree: &Element, table: &DtdTable) -> Result<ValidationReport, DtdError> {
    Ok(Validator::new(table)?.validate(tree))
}

/// Every `ATT_NAME_REF` inside a `RELATIONAL_VIEW` must name one of the
/// view's `ATTRIBUTE/ATT_NAME` values.
pub fn validate_semantics(tree: &Element) -> ValidationReport {
    let mut report = ValidationReport::default();
    semantics(tree, &tree.name, &mut report);
    report
}

fn semantics(element: &Element, path: &str, report: &mut ValidationReport) {
    let children: Vec<&Element> = element.elements().collect();
    let paths = sibling_paths(path, &children);
    if element.name == "RELATIONAL_VIEW" {
        let names: Vec<String> = element
            .children_named("ATTRIBUTE")
            .filter_map(|a| a.child_text("ATT_NAME"))
            .collect();
        for (tuple, tuple_path) in children
            .iter()
            .zip(&paths)
            .filter(|(c, _)| c.name == "TUPLE")
        {
            let cells: Vec<&Element> = tuple.elements().collect();
            let cell_paths = sibling_paths(tuple_path, &cells);
            for (cell, cell_path) in cells.iter().zip(cell_paths) {
                if cell.name != "ATT_NAME_REF" {
                    continue;
                }
                let reference = cell.text();
                if !names.contains(&reference) {
                    report.violations.push(Violation {
                        path: cell_path,
                        code: ViolationCode::UnknownElement,
                        detail: format!(
                            "ATT_NAME_REF {reference:?} names no attribute of the view"
                        ),
                    });
                }
            }
        }
        return;
    }
    for (child, child_path) in children.iter().zip(&paths) {
        semantics(child, child_path, report);
    }
}

/// Paths of `children` under `parent`, indexing same-name siblings from 0.
pub fn sibling_paths(parent: &str, children: &[&Element]) -> Vec<String> {
    let mut counts: Vec<(&str, usize)> = Vec::new();
    children
        .iter()
        .map(|c| {
            let index = match counts.iter_mut().find(|(n, _)| *n == c.name) {
                Some((_, n)) => {
                    *n += 1;
                    *n - 1
                }
                None => {
                    counts.push((&c.name, 1));
                    0
                }
            };
            format!("{parent}/{}[{index}]", c.name)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtd::parse_dtd;

    fn canonical() -> Validator<'static> {
        Validator::new(DtdTable::canonical()).unwrap()
    }

    #[test]
    fn parses_nested_elements() {
        let doc = parse_document("<A><B>x</B></A>").unwrap();
        assert_eq!(
            doc,
            Element::new("A", vec![Node::Element(Element::leaf("B", "x"))])
        );
    }

    #[test]
    fn rejects_unbalanced_tags() {
        assert!(parse_document("<A><B></A>").is_err());
        assert!(parse_document("<A>").is_err());
        assert!(parse_document("not xml").is_err());
        assert!(parse_document("<A/><B/>").is_err());
        assert!(parse_document("<A>&bogus;</A>").is_err());
    }

    #[test]
    fn decodes_entities_and_cdata() {
        let doc = parse_document(
            "<?xml version=\"1.0\"?>\n<!DOCTYPE A SYSTEM \"a.dtd\">\n<A k='v'>x &amp; y &lt;&#65;&#x42;<![CDATA[<raw>&amp;]]></A>\n",
        )
        .unwrap();
        assert_eq!(doc.text(), "x & y <AB<raw>&amp;");
    }

    #[test]
    fn line_numbers_in_errors() {
        let err = parse_document("<A>\n<B>\n</C>\n</A>").unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn canonical_automata_are_deterministic() {
        let v = canonical();
        let sub = v.automaton("SUBDOCUMENT").unwrap();
        assert!(sub.accepts(&["DOC_NAME", "TYPE", "SIZE", "LOCATION", "IMAGE"]));
        assert!(sub.accepts(&[
            "DOC_NAME", "TYPE", "SIZE", "LOCATION", "LANGUAGE", "KEYWORD", "KEYWORD", "TEXT"
        ]));
        assert!(!sub.accepts(&["DOC_NAME", "TYPE", "SIZE", "LOCATION"]));
        assert!(!sub.accepts(&["DOC_NAME", "TYPE", "SIZE", "LOCATION", "TEXT", "IMAGE"]));
        let tuple = v.automaton("TUPLE").unwrap();
        assert!(tuple.accepts(&["ATT_NAME_REF", "VALUE", "ATT_NAME_REF", "VALUE"]));
        assert!(!tuple.accepts::<&str>(&[]));
    }

    #[test]
    fn nondeterministic_grammar_is_refused() {
        let t = parse_dtd("<!ELEMENT A (B?, B)><!ELEMENT B (#PCDATA)>").unwrap();
        assert!(matches!(
            Validator::new(&t),
            Err(DtdError::Nondeterministic { .. })
        ));
    }

    #[test]
    fn missing_type_is_reported_on_parent() {
        let v = canonical();
        let found = v.check_children("SUBDOCUMENT", &["DOC_NAME", "SIZE", "LOCATION", "IMAGE"]);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].code, ViolationCode::MissingChild);
        assert_eq!(found[0].detail, "expected TYPE");
    }

    #[test]
    fn missing_at_end_and_trailing() {
        let v = canonical();
        let found = v.check_children("IMAGE", &["COMPRESSION", "FORMAT"]);
        assert_eq!(found[0].detail, "expected RESOLUTION, LENGTH, WIDTH");
        let found = v.check_children("ATTRIBUTE", &["ATT_NAME", "DOMAIN", "DOMAIN"]);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].code, ViolationCode::TrailingChildren);
        let found = v.check_children("ATTRIBUTE", &["DOMAIN", "ATT_NAME"]);
        assert!(found.iter().any(|f| f.code == ViolationCode::MissingChild));
        assert!(found
            .iter()
            .any(|f| f.code == ViolationCode::TrailingChildren));
        let found = v.check_children("IMAGE", &["VALUE"]);
        assert_eq!(found[0].code, ViolationCode::MissingChild);
        assert_eq!(found[1].code, ViolationCode::UnexpectedChild);
    }

    #[test]
    fn text_and_child_placement() {
        let v = canonical();
        let doc = parse_document(
            "<COMPLEX_OBJECT><OBJ_NAME>n<B/></OBJ_NAME><DATE>d</DATE><SOURCE>s</SOURCE>stray\
             <SUBDOCUMENT><DOC_NAME>a</DOC_NAME><TYPE>t</TYPE><SIZE>1 Bytes</SIZE><LOCATION>l</LOCATION>\
             <RELATIONAL_VIEW>oops<ATTRIBUTE><ATT_NAME>id</ATT_NAME><DOMAIN>integer</DOMAIN></ATTRIBUTE></RELATIONAL_VIEW>\
             </SUBDOCUMENT></COMPLEX_OBJECT>",
        )
        .unwrap();
        let report = v.validate(&doc);
        let codes: Vec<_> = report
            .violations
            .iter()
            .map(|v| (v.path.as_str(), v.code))
            .collect();
        assert_eq!(
            codes,
            vec![
                ("COMPLEX_OBJECT", ViolationCode::TextInComposite),
                (
                    "COMPLEX_OBJECT/OBJ_NAME[0]/B[0]",
                    ViolationCode::ChildInAtomic
                ),
                (
                    "COMPLEX_OBJECT/SUBDOCUMENT[0]/RELATIONAL_VIEW[0]",
                    ViolationCode::TextInComposite
                ),
            ]
        );
    }

    #[test]
    fn semantics_flags_dangling_references() {
        let doc = parse_document(
            "<RELATIONAL_VIEW><ATTRIBUTE><ATT_NAME>id</ATT_NAME><DOMAIN>integer</DOMAIN></ATTRIBUTE>\
             <TUPLE><ATT_NAME_REF>idd</ATT_NAME_REF><VALUE>1</VALUE></TUPLE></RELATIONAL_VIEW>",
        )
        .unwrap();
        let report = validate_semantics(&doc);
        assert_eq!(report.len(), 1);
        assert_eq!(
            report.violations[0].path,
            "RELATIONAL_VIEW/TUPLE[0]/ATT_NAME_REF[0]"
        );
        assert_eq!(report.violations[0].code, ViolationCode::UnknownElement);
        let ok = parse_document(
            "<RELATIONAL_VIEW><ATTRIBUTE><ATT_NAME>id</ATT_NAME><DOMAIN>integer</DOMAIN></ATTRIBUTE>\
             <TUPLE><ATT_NAME_REF>id</ATT_NAME_REF><VALUE>1</VALUE></TUPLE></RELATIONAL_VIEW>",
        )
        .unwrap();
        assert!(validate_semantics(&ok).is_empty());
    }

    #[test]
    fn render_is_tab_separated() {
        let report = ValidationReport {
            violations: vec![Violation {
                path: "A/B[0]".into(),
                code: ViolationCode::MissingChild,
                detail: "expected C".into(),
            }],
        };
        assert_eq!(report.render(), "A/B[0]\tMissingChild\texpected C\n");
    }
}
