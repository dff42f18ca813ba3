//! Unification of heterogeneous sources into complex-object XML documents.
//!
//! A complex object is a named, dated, sourced container of subdocuments
//! (plain or tagged text, relational views, images, sound and video). The
//! crate builds subdocuments from raw bytes ([`extract`]), maps the object
//! onto a grammar-aligned value tree ([`model`]), serializes it with a
//! stack-driven emitter ([`emit`]) and checks the result against the grammar
//! ([`validate`]).

pub mod cli;
pub mod dtd;
pub mod emit;
pub mod extract;
pub mod model;
pub mod validate;

pub use dtd::{parse_dtd, render_dtd, Cardinality, ContentModel, DtdError, DtdTable, Presence};
pub use emit::{emit, escape_text, wrap_cdata, BindingPayload, EmitError, Emitter, ValueBinding};
pub use model::{ComplexObject, ModelError, Subdocument};
pub use validate::{parse_document, validate, validate_semantics, ValidationReport, Validator};
