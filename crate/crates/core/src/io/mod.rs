//! Instance files, the instance generator, solution documents and SVG output.
//!
//! JSON is the canonical instance format; the line-oriented text format
//! covers the same data except objective weights.

pub mod generate;
pub mod solution;
pub mod svg;
pub mod txt;

use std::path::Path;

use thiserror::Error;

use crate::model::{Instance, InstanceError, InstanceSpec};

pub use generate::{generate_instance, GeneratorSpec};
pub use solution::{read_solution, write_solution, SolutionDocument};
pub use svg::render_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Txt,
}

impl Format {
    /// `.txt` files are text instances, everything else is JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("txt") => Format::Txt,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Semantic(#[from] InstanceError),
    #[error("invalid generator settings: {0}")]
    Generator(String),
    #[error("invalid solution document: {0}")]
    Solution(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub fn parse_instance(bytes: &[u8], format: Format) -> Result<Instance, IoError> {
    let spec = match format {
        Format::Json => serde_json::from_slice::<InstanceSpec>(bytes)?,
        Format::Txt => {
            let text = std::str::from_utf8(bytes).map_err(|e| IoError::Syntax {
                line: 1,
                column: e.valid_up_to() + 1,
                message: "input is not UTF-8".into(),
            })?;
            txt::parse(text)?
        }
    };
    Ok(Instance::new(spec)?)
}

pub fn write_instance(instance: &Instance, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&instance.to_spec()).expect("spec serializes");
            out.push(b'\n');
            out
        }
        Format::Txt => txt::write(&instance.to_spec()).into_bytes(),
    }
}

pub fn read_instance_file(path: &Path) -> Result<Instance, IoError> {
    parse_instance(&std::fs::read(path)?, Format::from_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json() {
        let inst = parse_instance(
            br#"{"dimensionality": 1, "bins": [{"dims": [10]}], "items": [{"category": 0, "dims": [3]}]}"#,
            Format::Json,
        )
        .unwrap();
        assert_eq!(inst.item_count(), 1);
        assert_eq!(inst.items()[0].weight, 0);
    }

    #[test]
    fn json_syntax_error_has_position() {
        let err =
            parse_instance(b"{\n  \"dimensionality\": 1,\n  oops\n}", Format::Json).unwrap_err();
        match err {
            IoError::Syntax { line, column, .. } => assert_eq!((line, column), (3, 3)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn semantic_error_names_field() {
        let err = parse_instance(
            br#"{"dimensionality": 2, "bins": [{"dims": [10]}], "items": [{"category": 0, "dims": [3, 3]}]}"#,
            Format::Json,
        )
        .unwrap_err();
        assert!(matches!(err, IoError::Semantic(_)));
        assert!(err.to_string().contains("bins[0]"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"dimensionality": 3, "bins": [{"dims": [10, 8, 6], "capacity": 50}],
            "items": [{"category": 4, "quantity": 2, "dims": [2, 3, 4], "weight": 7}],
            "heavy": [4], "center_of_mass": [5.0, 4.0]}"#;
        let inst = parse_instance(text.as_bytes(), Format::Json).unwrap();
        let again = parse_instance(&write_instance(&inst, Format::Json), Format::Json).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(Format::from_path(Path::new("a.bpp.txt")), Format::Txt);
        assert_eq!(Format::from_path(Path::new("a.bpp.json")), Format::Json);
    }
}
