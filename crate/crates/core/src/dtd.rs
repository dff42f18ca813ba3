//! Element-declaration grammar for multiform documents.
//!
//! Two notations are accepted for atomic elements:
//!
//! - the dialect used by the canonical grammar, `<!ELEMENT NAME PCDATA #REQUIRED>`
//!   or `<!ELEMENT NAME PCDATA #IMPLIED>`, where the presence flag states whether
//!   the emitter must be given a value;
//! - standard `<!ELEMENT NAME (#PCDATA)>`, which is treated as `#IMPLIED`.
//!
//! Composite elements use the usual group syntax with `,` (sequence), `|`
//! (choice) and the `?`, `*`, `+` suffixes. Attribute lists, entities and mixed
//! content are rejected.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use indexmap::IndexMap;
use thiserror::Error;

/// Text of the shipped canonical grammar (`assets/mlfd.dtd`).
pub const CANONICAL_DTD: &str = include_str!("../../../assets/mlfd.dtd");

/// File name the canonical grammar is published under.
pub const CANONICAL_SYSTEM_ID: &str = "mlfd.dtd";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DtdError {
    #[error("element {0} is declared more than once")]
    DuplicateDeclaration(String),
    #[error("syntax error at line {line}, column {column}: expected {expected}")]
    SyntaxError {
        line: usize,
        column: usize,
        expected: String,
    },
    #[error("no element declarations found")]
    EmptyDtd,
    #[error("content model of {element} is not deterministic: {detail}")]
    Nondeterministic { element: String, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cardinality {
    ExactlyOne,
    Optional,
    ZeroOrMore,
    OneOrMore,
}

impl Cardinality {
    pub fn from_suffix(c: char) -> Option<Self> {
        match c {
            '?' => Some(Self::Optional),
            '*' => Some(Self::ZeroOrMore),
            '+' => Some(Self::OneOrMore),
            _ => None,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Self::ExactlyOne => "",
            Self::Optional => "?",
            Self::ZeroOrMore => "*",
            Self::OneOrMore => "+",
        }
    }

    pub fn is_nullable(self) -> bool {
        matches!(self, Self::Optional | Self::ZeroOrMore)
    }

    pub fn is_repeatable(self) -> bool {
        matches!(self, Self::ZeroOrMore | Self::OneOrMore)
    }

    fn from_flags(nullable: bool, repeatable: bool) -> Self {
        match (nullable, repeatable) {
            (false, false) => Self::ExactlyOne,
            (true, false) => Self::Optional,
            (true, true) => Self::ZeroOrMore,
            (false, true) => Self::OneOrMore,
        }
    }

    /// Cardinality of `(x<self>)<outer>` expressed on `x` alone.
    pub fn compose(self, outer: Cardinality) -> Self {
        Self::from_flags(
            self.is_nullable() || outer.is_nullable(),
            self.is_repeatable() || outer.is_repeatable(),
        )
    }

    /// Whether `n` consecutive occurrences satisfy this cardinality.
    pub fn admits(self, n: usize) -> bool {
        match self {
            Self::ExactlyOne => n == 1,
            Self::Optional => n <= 1,
            Self::ZeroOrMore => true,
            Self::OneOrMore => n >= 1,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Self::ExactlyOne => "exactly one",
            Self::Optional => "at most one",
            Self::ZeroOrMore => "any number",
            Self::OneOrMore => "at least one",
        }
    }
}

/// Whether an atomic element must receive a value when emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Presence {
    Required,
    Implied,
}

/// Right-hand side of an element declaration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ContentModel {
    Text(Presence),
    Ref(String, Cardinality),
    Sequence(Vec<ContentModel>, Cardinality),
    Choice(Vec<ContentModel>, Cardinality),
}

impl ContentModel {
    pub fn cardinality(&self) -> Cardinality {
        match self {
            Self::Text(_) => Cardinality::ExactlyOne,
            Self::Ref(_, c) | Self::Sequence(_, c) | Self::Choice(_, c) => *c,
        }
    }

    fn with_cardinality(self, card: Cardinality) -> Self {
        match self {
            Self::Text(p) => Self::Text(p),
            Self::Ref(n, _) => Self::Ref(n, card),
            Self::Sequence(c, _) => Self::Sequence(c, card),
            Self::Choice(c, _) => Self::Choice(c, card),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Self::Text(_))
    }

    /// Whether the model matches an empty child list.
    pub fn is_nullable(&self) -> bool {
        match self {
            Self::Text(_) => true,
            Self::Ref(_, c) => c.is_nullable(),
            Self::Sequence(items, c) => c.is_nullable() || items.iter().all(Self::is_nullable),
            Self::Choice(alts, c) => c.is_nullable() || alts.iter().any(Self::is_nullable),
        }
    }

    /// Every element name referenced by the model, in textual order.
    pub fn references(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Self::Text(_) => {}
            Self::Ref(name, _) => out.push(name),
            Self::Sequence(items, _) | Self::Choice(items, _) => {
                for item in items {
                    item.collect_refs(out);
                }
            }
        }
    }

    /// The same model with every cardinality set to `ExactlyOne`, i.e. the
    /// body matched by a single repetition.
    pub fn body(&self) -> ContentModel {
        self.clone().with_cardinality(Cardinality::ExactlyOne)
    }
}

impl fmt::Display for ContentModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Text(Presence::Required) => f.write_str("PCDATA #REQUIRED"),
            Self::Text(Presence::Implied) => f.write_str("PCDATA #IMPLIED"),
            Self::Ref(name, c) => write!(f, "{name}{}", c.suffix()),
            Self::Sequence(items, c) | Self::Choice(items, c) => {
                let sep = if matches!(self, Self::Sequence(..)) {
                    ", "
                } else {
                    " | "
                };
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, "){}", c.suffix())
            }
        }
    }
}

/// A token that can begin a match of a content model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FirstToken {
    Text,
    Element(String),
}

/// The set of tokens that can start a match of `model`.
pub fn first_set(model: &ContentModel) -> BTreeSet<FirstToken> {
    let mut out = BTreeSet::new();
    collect_first(model, &mut out);
    out
}

// Returns whether `model` is nullable while adding its FIRST tokens to `out`.
fn collect_first(model: &ContentModel, out: &mut BTreeSet<FirstToken>) -> bool {
    match model {
        ContentModel::Text(_) => {
            out.insert(FirstToken::Text);
            true
        }
        ContentModel::Ref(name, c) => {
            out.insert(FirstToken::Element(name.clone()));
            c.is_nullable()
        }
        ContentModel::Sequence(items, c) => {
            let mut all_nullable = true;
            for item in items {
                if !collect_first(item, out) {
                    all_nullable = false;
                    break;
                }
            }
            all_nullable || c.is_nullable()
        }
        ContentModel::Choice(alts, c) => {
            let mut any_nullable = false;
            for alt in alts {
                any_nullable |= collect_first(alt, out);
            }
            any_nullable || c.is_nullable()
        }
    }
}

/// Immutable table of element declarations in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtdTable {
    declarations: IndexMap<String, ContentModel>,
}

impl DtdTable {
    /// Builds a table from declarations in order; the first one is the root.
    pub fn from_declarations<I>(decls: I) -> Result<Self, DtdError>
    where
        I: IntoIterator<Item = (String, ContentModel)>,
    {
        let mut declarations = IndexMap::new();
        for (name, model) in decls {
            if declarations.contains_key(&name) {
                return Err(DtdError::DuplicateDeclaration(name));
            }
            declarations.insert(name, model);
        }
        if declarations.is_empty() {
            return Err(DtdError::EmptyDtd);
        }
        Ok(Self { declarations })
    }

    /// The parsed canonical grammar, shared process-wide.
    pub fn canonical() -> &'static DtdTable {
        static TABLE: OnceLock<DtdTable> = OnceLock::new();
        TABLE.get_or_init(|| parse_dtd(CANONICAL_DTD).expect("canonical DTD parses"))
    }

    pub fn root(&self) -> &str {
        self.declarations
            .get_index(0)
            .map(|(name, _)| name.as_str())
            .expect("table is never empty")
    }

    pub fn get(&self, name: &str) -> Option<&ContentModel> {
        self.declarations.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.declarations.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.declarations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.declarations.is_empty()
    }

    pub fn is_atomic(&self, name: &str) -> bool {
        self.get(name).is_some_and(ContentModel::is_atomic)
    }

    pub fn declaration_order(&self) -> impl Iterator<Item = &str> {
        self.declarations.keys().map(String::as_str)
    }

    pub fn declarations(&self) -> impl Iterator<Item = (&str, &ContentModel)> {
        self.declarations.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Reference targets that have no declaration, each reported once in
    /// order of first occurrence.
    pub fn link_check(&self) -> Vec<String> {
        let mut missing: Vec<String> = Vec::new();
        for model in self.declarations.values() {
            for name in model.references() {
                if !self.contains(name) && !missing.iter().any(|m| m == name) {
                    missing.push(name.to_string());
                }
            }
        }
        missing
    }

    /// Checks that the alternatives of every choice group start with
    /// pairwise-disjoint tokens.
    pub fn check_choices_disjoint(&self) -> Result<(), DtdError> {
        for (element, model) in self.declarations() {
            check_choice(element, model)?;
        }
        Ok(())
    }
}

fn check_choice(element: &str, model: &ContentModel) -> Result<(), DtdError> {
    match model {
        ContentModel::Text(_) | ContentModel::Ref(..) => Ok(()),
        ContentModel::Sequence(items, _) => items.iter().try_for_each(|m| check_choice(element, m)),
        ContentModel::Choice(alts, _) => {
            let firsts: Vec<_> = alts.iter().map(first_set).collect();
            for (i, a) in firsts.iter().enumerate() {
                for b in &firsts[i + 1..] {
                    if let Some(shared) = a.intersection(b).next() {
                        let token = match shared {
                            FirstToken::Text => "#PCDATA".to_string(),
                            FirstToken::Element(n) => n.clone(),
                        };
                        return Err(DtdError::Nondeterministic {
                            element: element.to_string(),
                            detail: format!("{token} starts more than one alternative of {model}"),
                        });
                    }
                }
            }
            alts.iter().try_for_each(|m| check_choice(element, m))
        }
    }
}

/// Canonical printer; its output parses back to an identical table.
pub fn render_dtd(table: &DtdTable) -> String {
    let mut out = String::new();
    for (name, model) in table.declarations() {
        let rhs = match model {
            // A bare reference needs a group around it.
            ContentModel::Ref(..) => format!("({model})"),
            _ => model.to_string(),
        };
        out.push_str(&format!("<!ELEMENT {name} {rhs}>\n"));
    }
    out
}

pub fn parse_dtd(text: &str) -> Result<DtdTable, DtdError> {
    let mut parser = Parser::new(text);
    let decls = parser.declarations()?;
    if decls.is_empty() {
        return Err(DtdError::EmptyDtd);
    }
    DtdTable::from_declarations(decls)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        let src = src.strip_prefix('\u{feff}').unwrap_or(src);
        Self {
            src,
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            for _ in s.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
        self.pos > start
    }

    fn error<T>(&self, expected: impl Into<String>) -> Result<T, DtdError> {
        Err(DtdError::SyntaxError {
            line: self.line,
            column: self.column,
            expected: expected.into(),
        })
    }

    fn expect(&mut self, s: &str) -> Result<(), DtdError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.error(format!("'{s}'"))
        }
    }

    fn skip_past(&mut self, terminator: &str) -> Result<(), DtdError> {
        while !self.rest().is_empty() {
            if self.eat(terminator) {
                return Ok(());
            }
            self.bump();
        }
        self.error(format!("'{terminator}'"))
    }

    fn declarations(&mut self) -> Result<Vec<(String, ContentModel)>, DtdError> {
        let mut decls = Vec::new();
        let mut in_subset = false;
        loop {
            self.skip_ws();
            if self.rest().is_empty() {
                break;
            }
            if self.eat("<!--") {
                self.skip_past("-->")?;
            } else if self.eat("<?") {
                self.skip_past("?>")?;
            } else if self.eat("<!DOCTYPE") {
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some('[') => {
                            in_subset = true;
                            break;
                        }
                        Some(_) => {}
                        None => return self.error("'>'"),
                    }
                }
            } else if in_subset && self.eat("]") {
                self.skip_ws();
                self.expect(">")?;
                in_subset = false;
            } else if self.eat("<!ELEMENT") {
                decls.push(self.element_decl()?);
            } else {
                return self.error("<!ELEMENT declaration");
            }
        }
        Ok(decls)
    }

    fn element_decl(&mut self) -> Result<(String, ContentModel), DtdError> {
        if !self.skip_ws() {
            return self.error("whitespace after <!ELEMENT");
        }
        let name = self.name()?;
        if !self.skip_ws() {
            return self.error("whitespace after element name");
        }
        let model = if self.eat("(") {
            self.skip_ws();
            if self.eat("#PCDATA") {
                self.skip_ws();
                if self.peek() == Some('|') {
                    return self.error("')' (mixed content is not supported)");
                }
                self.expect(")")?;
                self.eat("*");
                ContentModel::Text(Presence::Implied)
            } else {
                self.group()?
            }
        } else if self.eat("#PCDATA") || self.eat("PCDATA") {
            self.skip_ws();
            if self.eat("#REQUIRED") {
                ContentModel::Text(Presence::Required)
            } else if self.eat("#IMPLIED") {
                ContentModel::Text(Presence::Implied)
            } else {
                return self.error("#REQUIRED or #IMPLIED");
            }
        } else {
            return self.error("content model");
        };
        self.skip_ws();
        self.expect(">")?;
        Ok((name, model))
    }

    fn name(&mut self) -> Result<String, DtdError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_alphabetic() || c == '_' || c == ':' => {
                self.bump();
            }
            _ => return self.error("element name"),
        }
        while self
            .peek()
            .is_some_and(|c| c.is_alphanumeric() || matches!(c, '_' | ':' | '-' | '.'))
        {
            self.bump();
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn suffix(&mut self) -> Cardinality {
        match self.peek().and_then(Cardinality::from_suffix) {
            Some(card) => {
                self.bump();
                card
            }
            None => Cardinality::ExactlyOne,
        }
    }

    // Called with the opening parenthesis consumed.
    fn group(&mut self) -> Result<ContentModel, DtdError> {
        let mut items = vec![self.particle()?];
        let mut separator = None;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(')') => {
                    self.bump();
                    break;
                }
                Some(c @ (',' | '|')) if separator.is_none() || separator == Some(c) => {
                    self.bump();
                    separator = Some(c);
                    items.push(self.particle()?);
                }
                _ => {
                    return match separator {
                        Some(sep) => self.error(format!("'{sep}' or ')'")),
                        None => self.error("',', '|' or ')'"),
                    };
                }
            }
        }
        let card = self.suffix();
        Ok(match separator {
            None => {
                let child = items.pop().expect("one particle");
                let merged = child.cardinality().compose(card);
                child.with_cardinality(merged)
            }
            Some(',') => ContentModel::Sequence(items, card),
            Some(_) => ContentModel::Choice(items, card),
        })
    }

    fn particle(&mut self) -> Result<ContentModel, DtdError> {
        self.skip_ws();
        if self.eat("(") {
            self.skip_ws();
            self.group()
        } else if self.rest().starts_with("#PCDATA") {
            self.error("element name (mixed content is not supported)")
        } else {
            let name = self.name()?;
            let card = self.suffix();
            Ok(ContentModel::Ref(name, card))
        }
    }
}
