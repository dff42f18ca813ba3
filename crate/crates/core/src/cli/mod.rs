//! The `mlfd` command-line front end.
//!
//! Exit statuses: 0 success, 1 manifest or input error, 2 source fetch or
//! extraction error, 3 emission error, 4 validation failure.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use manifest::{parse_manifest, Manifest, ManifestError};

use crate::dtd::{parse_dtd, DtdTable};
use crate::emit::Emitter;
use crate::extract::{basename, build_subdocument, SourceSpec};
use crate::model::ComplexObject;
use crate::validate::{parse_document, validate_semantics, Element, ValidationReport, Validator};

pub const TIMEOUT_ENV: &str = "MLFD_TIMEOUT_SECS";
const DEFAULT_TIMEOUT_SECS: u64 = 30;
const MAX_REDIRECTS: u32 = 5;
const MAX_BODY_BYTES: u64 = 1 << 30;

#[derive(Debug, Parser)]
#[command(
    name = "mlfd",
    version,
    about = "Integrate multiform sources into complex-object XML documents"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a complex object from a manifest and write it as XML.
    Integrate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        dtd: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a document against a DTD.
    Validate {
        #[arg(long)]
        dtd: PathBuf,
        doc: PathBuf,
    },
    /// Summarize the subdocuments of a conforming document.
    Inspect { doc: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Manifest(String),
    #[error("{0}")]
    Input(String),
    #[error("{location}: {message}")]
    Source { location: String, message: String },
    #[error("{0}")]
    Emit(String),
    #[error("document failed self-validation")]
    SelfValidation(ValidationReport),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Manifest(_) | CliError::Input(_) => 1,
            CliError::Source { .. } => 2,
            CliError::Emit(_) => 3,
            CliError::SelfValidation(_) => 4,
        }
    }
}

fn read_text(path: &Path, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {what} {}: {e}", path.display())))
}

fn load_dtd(path: &Path) -> Result<DtdTable, CliError> {
    let text = read_text(path, "DTD")?;
    parse_dtd(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn is_url(location: &str) -> bool {
    let lower = location.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://")
}

fn fetch_timeout() -> Duration {
    let secs = std::env::var(TIMEOUT_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_TIMEOUT_SECS);
    Duration::from_secs(secs)
}

fn fetch_url(url: &str) -> Result<Vec<u8>, String> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(fetch_timeout()))
        .max_redirects(MAX_REDIRECTS)
        .build()
        .into();
    let mut response = agent.get(url).call().map_err(|e| e.to_string())?;
    response
        .body_mut()
        .with_config()
        .limit(MAX_BODY_BYTES)
        .read_to_vec()
        .map_err(|e| e.to_string())
}

/// Reads a source: URLs are fetched, relative paths resolve against `base`.
pub fn read_source(location: &str, base: &Path) -> Result<Vec<u8>, CliError> {
    let result = if is_url(location) {
        fetch_url(location)
    } else {
        fs::read(base.join(location)).map_err(|e| e.to_string())
    };
    result.map_err(|message| CliError::Source {
        location: location.to_string(),
        message,
    })
}

fn integrate_source(spec: &SourceSpec, base: &Path) -> Result<crate::model::Subdocument, CliError> {
    let bytes = read_source(&spec.location, base)?;
    build_subdocument(spec, &bytes).map_err(|e| CliError::Source {
        location: spec.location.clone(),
        message: e.to_string(),
    })
}

/// Validates document text structurally and, when it conforms, semantically.
pub fn check_document(text: &str, validator: &Validator<'_>) -> Result<ValidationReport, CliError> {
    let tree = parse_document(text).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(check_tree(&tree, validator))
}

fn check_tree(tree: &Element, validator: &Validator<'_>) -> ValidationReport {
    let mut report = validator.validate(tree);
    if report.is_empty() {
        report.extend(validate_semantics(tree));
    }
    report
}

/// Builds, emits, writes and re-validates the object described by `manifest_path`.
pub fn run_integrate(
    manifest_path: &Path,
    dtd_path: &Path,
    out_path: &Path,
) -> Result<(), CliError> {
    let text = fs::read_to_string(manifest_path).map_err(|e| {
        CliError::Manifest(format!(
            "cannot read manifest {}: {e}",
            manifest_path.display()
        ))
    })?;
    let manifest = parse_manifest(&text).map_err(|e| CliError::Manifest(e.to_string()))?;
    let table = load_dtd(dtd_path)?;
    let validator = Validator::new(&table).map_err(|e| CliError::Input(e.to_string()))?;

    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let subdocuments = std::thread::scope(|scope| {
        let handles: Vec<_> = manifest
            .subdocuments
            .iter()
            .map(|spec| scope.spawn(move || integrate_source(spec, base)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("extraction thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let object = ComplexObject {
        name: manifest.name,
        date: manifest.date,
        source: manifest.source,
        subdocuments,
    };
    let binding = object
        .to_binding()
        .map_err(|e| CliError::Emit(e.to_string()))?;
    let system_id = basename(&dtd_path.to_string_lossy()).to_string();
    let xml = Emitter::new(&table)
        .with_system_id(system_id)
        .emit(&binding)
        .map_err(|e| CliError::Emit(e.to_string()))?;

    fs::write(out_path, &xml)
        .map_err(|e| CliError::Emit(format!("cannot write {}: {e}", out_path.display())))?;
    let written = fs::read_to_string(out_path)
        .map_err(|e| CliError::Emit(format!("cannot re-read {}: {e}", out_path.display())));
    let verdict = written.and_then(|text| match check_document(&text, &validator) {
        Ok(report) if report.is_empty() => Ok(()),
        Ok(report) => Err(CliError::SelfValidation(report)),
        Err(e) => Err(CliError::SelfValidation(ValidationReport {
            violations: vec![crate::validate::Violation {
                path: table.root().to_string(),
                code: crate::validate::ViolationCode::UnexpectedChild,
                detail: e.to_string(),
            }],
        })),
    });
    if let Err(e) = verdict {
        let _ = fs::remove_file(out_path);
        return Err(e);
    }
    Ok(())
}

pub fn run_validate(doc_path: &Path, dtd_path: &Path) -> Result<ValidationReport, CliError> {
    let table = load_dtd(dtd_path)?;
    let validator = Validator::new(&table).map_err(|e| CliError::Input(e.to_string()))?;
    let text = read_text(doc_path, "document")?;
    check_document(&text, &validator)
}

/// One summary line per subdocument of a document conforming to the
/// canonical grammar.
pub fn run_inspect(doc_path: &Path) -> Result<Vec<String>, CliError> {
    let text = read_text(doc_path, "document")?;
    let tree = parse_document(&text).map_err(|e| CliError::Input(e.to_string()))?;
    let validator = Validator::new(DtdTable::canonical()).expect("canonical DTD is deterministic");
    let report = check_tree(&tree, &validator);
    if !report.is_empty() {
        return Err(CliError::Input(format!(
            "{} does not conform:\n{}",
            doc_path.display(),
            report.render().trim_end()
        )));
    }
    Ok(tree.children_named("SUBDOCUMENT").map(summarize).collect())
}

fn summarize(sub: &Element) -> String {
    let field = |name: &str| sub.child_text(name).unwrap_or_default();
    let keywords = sub.children_named("KEYWORD").count();
    let kind = if let Some(text) = sub.child("TEXT") {
        if text.child("TAGGED_TEXT").is_some() {
            "tagged-text"
        } else {
            "plain-text"
        }
    } else if sub.child("RELATIONAL_VIEW").is_some() {
        "relational-view"
    } else if sub.child("IMAGE").is_some() {
        "image"
    } else if sub
        .child("TEMPORAL")
        .is_some_and(|t| t.child("VIDEO").is_some())
    {
        "video"
    } else {
        "sound"
    };
    format!(
        "{}  {}  {}  {keywords} keywords  {kind}",
        field("DOC_NAME"),
        field("TYPE"),
        field("SIZE")
    )
}

fn fail(e: CliError) -> ExitCode {
    match &e {
        CliError::SelfValidation(report) => {
            eprintln!("error: {e}");
            for v in &report.violations {
                eprintln!("{v}");
            }
        }
        _ => eprintln!("error: {e}"),
    }
    ExitCode::from(e.exit_code())
}

/// Parses `args` and runs the selected command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Integrate { manifest, dtd, out } => match run_integrate(&manifest, &dtd, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::Validate { dtd, doc } => match run_validate(&doc, &dtd) {
            Ok(report) => {
                print!("{}", report.render());
                if report.is_empty() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(4)
                }
            }
            Err(e) => fail(e),
        },
        Command::Inspect { doc } => match run_inspect(&doc) {
            Ok(lines) => {
                for line in lines {
                    println!("{line}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
