//! DTD-driven XML emission.
//!
//! The emitter walks the grammar with an explicit frame stack. Popping an
//! `Open` frame for an atomic element writes the element and its value on one
//! line; popping one for a composite element writes the start tag, pushes a
//! `Close` frame, then pushes the bound sub-elements in reverse so that they
//! pop in declaration order. Popping a `Close` frame writes the end tag.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::dtd::{
    first_set, Cardinality, ContentModel, DtdTable, FirstToken, Presence, CANONICAL_SYSTEM_ID,
};

/// The only element whose value is written as a CDATA section.
pub const CDATA_ELEMENT: &str = "CONTENT";

const INDENT: &str = "  ";

/// Concrete values aligned to grammar element names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueBinding {
    pub element: String,
    pub payload: BindingPayload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BindingPayload {
    Value(Option<String>),
    Children(Vec<ValueBinding>),
}

impl ValueBinding {
    pub fn value(element: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            element: element.into(),
            payload: BindingPayload::Value(Some(value.into())),
        }
    }

    pub fn optional(element: impl Into<String>, value: Option<String>) -> Self {
        Self {
            element: element.into(),
            payload: BindingPayload::Value(value),
        }
    }

    pub fn children(element: impl Into<String>, children: Vec<ValueBinding>) -> Self {
        Self {
            element: element.into(),
            payload: BindingPayload::Children(children),
        }
    }

    pub fn child_bindings(&self) -> &[ValueBinding] {
        match &self.payload {
            BindingPayload::Children(c) => c,
            BindingPayload::Value(_) => &[],
        }
    }

    pub fn value_text(&self) -> Option<&str> {
        match &self.payload {
            BindingPayload::Value(v) => v.as_deref(),
            BindingPayload::Children(_) => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmitError {
    #[error("{path}: required value is missing")]
    MissingRequired { path: String },
    #[error("{path}: expected {expected} {element}, got {got}")]
    CardinalityViolation {
        path: String,
        element: String,
        expected: String,
        got: usize,
    },
    #[error("{path}: exactly one alternative must be bound, got {got}")]
    ChoiceViolation { path: String, got: usize },
    #[error("element {0} is not declared")]
    UnknownElement(String),
    #[error("{path}: atomic elements bind a value and composite elements bind children")]
    ShapeMismatch { path: String },
    #[error("binding root is {got}, expected {expected}")]
    RootMismatch { expected: String, got: String },
}

/// Replaces `&`, `<` and `>` with entity references.
pub fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
    out
}

/// Wraps `s` in a CDATA section, splitting any embedded `]]>`.
pub fn wrap_cdata(s: &str) -> String {
    format!("<![CDATA[{}]]>", s.replace("]]>", "]]]]><![CDATA[>"))
}

/// Serialized form of an atomic element's value.
pub fn render_value(element: &str, value: &str) -> String {
    if element == CDATA_ELEMENT {
        wrap_cdata(value)
    } else {
        escape_text(value)
    }
}

/// XML prolog and doctype line preceding the document element.
pub fn prolog(root: &str, system_id: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!DOCTYPE {root} SYSTEM \"{system_id}\">\n"
    )
}

/// Emits `binding` against `table`, naming the canonical DTD file in the doctype.
pub fn emit(table: &DtdTable, binding: &ValueBinding) -> Result<String, EmitError> {
    Emitter::new(table).emit(binding)
}

enum Frame<'b> {
    Open {
        binding: &'b ValueBinding,
        path: String,
        depth: usize,
    },
    Close {
        element: &'b str,
        depth: usize,
    },
}

pub struct Emitter<'t> {
    table: &'t DtdTable,
    system_id: String,
}

impl<'t> Emitter<'t> {
    pub fn new(table: &'t DtdTable) -> Self {
        Self {
            table,
            system_id: CANONICAL_SYSTEM_ID.to_string(),
        }
    }

    pub fn with_system_id(mut self, system_id: impl Into<String>) -> Self {
        self.system_id = system_id.into();
        self
    }

    pub fn emit(&self, binding: &ValueBinding) -> Result<String, EmitError> {
        let root = self.table.root();
        if binding.element != root {
            if !self.table.contains(&binding.element) {
                return Err(EmitError::UnknownElement(binding.element.clone()));
            }
            return Err(EmitError::RootMismatch {
                expected: root.to_string(),
                got: binding.element.clone(),
            });
        }

        let mut out = prolog(root, &self.system_id);
        let mut stack = vec![Frame::Open {
            binding,
            path: binding.element.clone(),
            depth: 0,
        }];

        while let Some(frame) = stack.pop() {
            match frame {
                Frame::Close { element, depth } => {
                    push_indent(&mut out, depth);
                    out.push_str(&format!("</{element}>\n"));
                }
                Frame::Open {
                    binding,
                    path,
                    depth,
                } => {
                    let model = self
                        .table
                        .get(&binding.element)
                        .ok_or_else(|| EmitError::UnknownElement(binding.element.clone()))?;
                    push_indent(&mut out, depth);
                    match (model, &binding.payload) {
                        (ContentModel::Text(presence), BindingPayload::Value(value)) => {
                            let e = &binding.element;
                            match value {
                                Some(v) => {
                                    out.push_str(&format!("<{e}>{}</{e}>\n", render_value(e, v)))
                                }
                                None if *presence == Presence::Required => {
                                    return Err(EmitError::MissingRequired { path });
                                }
                                // Missing implied values become empty elements.
                                None => out.push_str(&format!("<{e}></{e}>\n")),
                            }
                        }
                        (ContentModel::Text(_), BindingPayload::Children(_))
                        | (_, BindingPayload::Value(_)) => {
                            return Err(EmitError::ShapeMismatch { path });
                        }
                        (model, BindingPayload::Children(children)) => {
                            let planned = self.plan(model, children, &path)?;
                            out.push_str(&format!("<{}>\n", binding.element));
                            stack.push(Frame::Close {
                                element: &binding.element,
                                depth,
                            });
                            let paths = child_paths(&path, &planned);
                            for (child, child_path) in planned.into_iter().zip(paths).rev() {
                                stack.push(Frame::Open {
                                    binding: child,
                                    path: child_path,
                                    depth: depth + 1,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matches `children` against `model` and returns them in emission order.
    fn plan<'b>(
        &self,
        model: &ContentModel,
        children: &'b [ValueBinding],
        path: &str,
    ) -> Result<Vec<&'b ValueBinding>, EmitError> {
        if let Some(unknown) = children.iter().find(|c| !self.table.contains(&c.element)) {
            return Err(EmitError::UnknownElement(unknown.element.clone()));
        }
        let mut planner = Planner {
            children,
            pos: 0,
            out: Vec::with_capacity(children.len()),
            path,
            bound_choices: Vec::new(),
        };
        planner.model(model)?;
        if let Some(extra) = children.get(planner.pos) {
            let token = FirstToken::Element(extra.element.clone());
            if let Some(firsts) = planner.bound_choices.iter().find(|f| f.contains(&token)) {
                let got = 1 + children[planner.pos..]
                    .iter()
                    .filter(|c| firsts.contains(&FirstToken::Element(c.element.clone())))
                    .count();
                return Err(EmitError::ChoiceViolation {
                    path: path.to_string(),
                    got,
                });
            }
            let got = children[planner.pos..]
                .iter()
                .take_while(|c| c.element == extra.element)
                .count();
            return Err(EmitError::CardinalityViolation {
                path: path.to_string(),
                element: extra.element.clone(),
                expected: "none at this position".to_string(),
                got,
            });
        }
        Ok(planner.out)
    }
}

struct Planner<'b, 'p> {
    children: &'b [ValueBinding],
    pos: usize,
    out: Vec<&'b ValueBinding>,
    path: &'p str,
    // FIRST sets of non-repeatable choices that already consumed an alternative.
    bound_choices: Vec<BTreeSet<FirstToken>>,
}

impl<'b> Planner<'b, '_> {
    fn next_token(&self) -> Option<FirstToken> {
        self.children
            .get(self.pos)
            .map(|c| FirstToken::Element(c.element.clone()))
    }

    fn starts(&self, first: &BTreeSet<FirstToken>) -> bool {
        self.next_token().is_some_and(|t| first.contains(&t))
    }

    fn model(&mut self, model: &ContentModel) -> Result<(), EmitError> {
        match model {
            // Text never appears nested inside a composite model.
            ContentModel::Text(_) => Ok(()),
            ContentModel::Ref(name, card) => {
                let run = self.children[self.pos..]
                    .iter()
                    .take_while(|c| &c.element == name)
                    .count();
                if !card.admits(run) {
                    return Err(EmitError::CardinalityViolation {
                        path: self.path.to_string(),
                        element: name.clone(),
                        expected: card.describe().to_string(),
                        got: run,
                    });
                }
                self.out.extend(&self.children[self.pos..self.pos + run]);
                self.pos += run;
                Ok(())
            }
            ContentModel::Sequence(items, card) => {
                let first = first_set(&model.body());
                self.repeat(*card, &first, |p| {
                    items.iter().try_for_each(|item| p.model(item))
                })
            }
            ContentModel::Choice(alts, card) => {
                let first = first_set(&model.body());
                let alt_firsts: Vec<_> = alts.iter().map(first_set).collect();
                self.repeat(*card, &first, |p| {
                    match alt_firsts.iter().position(|f| p.starts(f)) {
                        Some(i) => p.model(&alts[i]),
                        None => match alts.iter().position(ContentModel::is_nullable) {
                            Some(i) => p.model(&alts[i]),
                            None => Err(EmitError::ChoiceViolation {
                                path: p.path.to_string(),
                                got: 0,
                            }),
                        },
                    }
                })?;
                if !card.is_repeatable() {
                    self.bound_choices.push(first);
                }
                Ok(())
            }
        }
    }

    fn repeat(
        &mut self,
        card: Cardinality,
        first: &BTreeSet<FirstToken>,
        mut body: impl FnMut(&mut Self) -> Result<(), EmitError>,
    ) -> Result<(), EmitError> {
        let mut reps = 0;
        loop {
            let required = reps == 0 && !card.is_nullable();
            if !required && (!self.starts(first) || (reps > 0 && !card.is_repeatable())) {
                return Ok(());
            }
            let before = self.pos;
            body(self)?;
            reps += 1;
            if self.pos == before || !card.is_repeatable() {
                return Ok(());
            }
        }
    }
}

fn push_indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

/// Paths of `children` under `parent`, indexing same-name siblings from 0.
pub(crate) fn child_paths(parent: &str, children: &[&ValueBinding]) -> Vec<String> {
    let mut seen: Vec<(&str, usize)> = Vec::new();
    children
        .iter()
        .map(|c| {
            let index = match seen.iter_mut().find(|(n, _)| *n == c.element) {
                Some((_, count)) => {
                    *count += 1;
                    *count - 1
                }
                None => {
                    seen.push((&c.element, 1));
                    0
                }
            };
            format!("{parent}/{}[{index}]", c.element)
        })
        .collect()
}
