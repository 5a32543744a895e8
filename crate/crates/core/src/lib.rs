//! Turn OpenAPI 2/3 documents into GraphQL schemas whose resolvers call the
//! described REST API.

pub mod error;
pub mod eval;
pub mod exec;
pub mod ingest;
pub mod preprocess;
pub mod report;
pub mod runtime;
pub mod schema;

use std::path::Path;

use error::{ErrorKind, GenerateError};
use ingest::{load_document, normalize, validate, OasDocument, Severity};
use preprocess::{build_types_dictionary, Casing};
use report::{Mode, Report};
use schema::{assemble_schema, SchemaIR, SchemaOptions};

#[derive(Debug, Clone, Default)]
pub struct GenerateOptions {
    pub strict: bool,
    pub casing: Casing,
    /// JsonPath of the bearer token inside the execution context.
    pub token_path: Option<String>,
}

#[derive(Debug)]
pub struct Generated {
    pub schema: SchemaIR,
    pub report: Report,
}

#[derive(Debug)]
pub struct Failure {
    pub error: GenerateError,
    pub report: Report,
}

fn mode(options: &GenerateOptions) -> Mode {
    if options.strict {
        Mode::Strict
    } else {
        Mode::NonStrict
    }
}

fn fail(error: GenerateError, mut report: Report) -> Failure {
    report.fail(&error);
    Failure { error, report }
}

/// Run the pipeline on an already normalized document.
pub fn generate(doc: &OasDocument, source: &str, options: &GenerateOptions) -> Result<Generated, Failure> {
    generate_with_report(doc, Report::new(source, mode(options)), options)
}

fn generate_with_report(doc: &OasDocument, mut report: Report, options: &GenerateOptions) -> Result<Generated, Failure> {
    let fatal: Vec<_> = validate(doc)
        .into_iter()
        .filter(|i| i.severity == Severity::Fatal)
        .collect();
    if let Some(first) = fatal.first() {
        let message = fatal.iter().map(|i| i.message.as_str()).collect::<Vec<_>>().join("; ");
        return Err(fail(
            GenerateError::new(ErrorKind::InvalidOas, message).at(&first.location),
            report,
        ));
    }
    let dict = match build_types_dictionary(doc, &mut report, options.casing) {
        Ok(dict) => dict,
        Err(e) => return Err(fail(e, report)),
    };
    let schema_options = SchemaOptions {
        token_path: options.token_path.clone(),
    };
    match assemble_schema(doc, dict, &mut report, &schema_options) {
        Ok(schema) => Ok(Generated { schema, report }),
        Err(e) => Err(fail(e, report)),
    }
}

/// Parse, normalize and generate from raw JSON or YAML bytes.
pub fn generate_from_bytes(bytes: &[u8], source: &str, options: &GenerateOptions) -> Result<Generated, Failure> {
    let mut report = Report::new(source, mode(options));
    let doc = load_document(bytes, None, source).and_then(|raw| normalize(&raw, &mut report.notes));
    match doc {
        Ok(doc) => generate_with_report(&doc, report, options),
        Err(e) => Err(fail(e.into(), report)),
    }
}

/// Read a file and generate from it. Unreadable files are `InvalidOas`.
pub fn generate_from_path(path: &Path, options: &GenerateOptions) -> Result<Generated, Failure> {
    let source = path.display().to_string();
    match std::fs::read(path) {
        Ok(bytes) => generate_from_bytes(&bytes, &source, options),
        Err(e) => Err(fail(
            GenerateError::new(ErrorKind::InvalidOas, format!("cannot read {source}: {e}")),
            Report::new(&source, mode(options)),
        )),
    }
}
