//! Table spec files.
//!
//! ```toml
//! curvature = 0
//! model = "plane"
//! outer = [[0, 0], [1, 0], [1, 1], [0, 1]]
//! holes = [[[0.4, 0.4], [0.4, 0.6], [0.6, 0.6], [0.6, 0.4]]]
//! ```
//!
//! `model` is one of `plane`, `poincare-disc` (coordinates in the unit disc)
//! or `unit-sphere` (three coordinates, normalized on load).

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use crate::geometry::Curvature;
use crate::polygon::{Model, Polygon, PolygonError};

type SpannedVertex = Spanned<Vec<f64>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    curvature: Spanned<i32>,
    model: Spanned<Model>,
    outer: Spanned<Vec<SpannedVertex>>,
    #[serde(default)]
    holes: Option<Spanned<Vec<Spanned<Vec<SpannedVertex>>>>>,
}

/// A parse or validation failure, located in the source text.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = self.path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<input>".into());
        write!(f, "{path}")?;
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
        }
        if let Some(field) = &self.field {
            write!(f, ": field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for SpecError {}

fn line_of(src: &str, span: &Range<usize>) -> usize {
    src[..span.start.min(src.len())].matches('\n').count() + 1
}

/// Parsed spec with the source lines of its vertices.
#[derive(Debug, Clone)]
pub struct TableSpec {
    pub curvature: Curvature,
    pub model: Model,
    pub outer: Vec<Vec<f64>>,
    pub holes: Vec<Vec<Vec<f64>>>,
    vertex_lines: Vec<usize>,
    outer_line: usize,
    model_line: usize,
}

impl TableSpec {
    pub fn parse(src: &str) -> Result<Self, SpecError> {
        let err = |line: Option<usize>, field: Option<&str>, message: String| SpecError {
            path: None,
            line,
            field: field.map(str::to_string),
            message,
        };
        let raw: RawSpec = toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| line_of(src, &s));
            let field =
                ["curvature", "model", "outer", "holes"].into_iter().find(|f| e.message().contains(&format!("`{f}`")));
            err(line, field, e.message().trim().to_string())
        })?;
        let curvature = Curvature::try_from(*raw.curvature.get_ref()).map_err(|_| {
            err(
                Some(line_of(src, &raw.curvature.span())),
                Some("curvature"),
                format!("must be -1, 0 or 1, got {}", raw.curvature.get_ref()),
            )
        })?;
        let mut vertex_lines = Vec::new();
        let outer_line = line_of(src, &raw.outer.span());
        let outer: Vec<Vec<f64>> = raw
            .outer
            .into_inner()
            .into_iter()
            .map(|v| {
                vertex_lines.push(line_of(src, &v.span()));
                v.into_inner()
            })
            .collect();
        let holes: Vec<Vec<Vec<f64>>> = raw
            .holes
            .map(|h| h.into_inner())
            .unwrap_or_default()
            .into_iter()
            .map(|lp| {
                lp.into_inner()
                    .into_iter()
                    .map(|v| {
                        vertex_lines.push(line_of(src, &v.span()));
                        v.into_inner()
                    })
                    .collect()
            })
            .collect();
        Ok(TableSpec {
            curvature,
            model: *raw.model.get_ref(),
            outer,
            holes,
            vertex_lines,
            outer_line,
            model_line: line_of(src, &raw.model.span()),
        })
    }

    /// Builds and validates the polygon.
    pub fn build(&self) -> Result<Polygon, SpecError> {
        Polygon::from_coords(self.model, self.curvature, &self.outer, &self.holes).map_err(|e| {
            let (line, field) = match &e {
                PolygonError::ModelMismatch { .. } => (self.model_line, "model"),
                PolygonError::CoordinateArity { index, .. } | PolygonError::Coordinate { index, .. } => {
                    let field = if *index < self.outer.len() { "outer" } else { "holes" };
                    (self.vertex_lines.get(*index).copied().unwrap_or(self.outer_line), field)
                }
                _ => (self.outer_line, "outer"),
            };
            SpecError { path: None, line: Some(line), field: Some(field.to_string()), message: e.to_string() }
        })
    }
}

pub fn parse_table(src: &str) -> Result<Polygon, SpecError> {
    TableSpec::parse(src)?.build()
}

/// Reads and builds a table spec file; every error names the path.
pub fn load_table(path: &Path) -> Result<Polygon, SpecError> {
    let with_path = |mut e: SpecError| {
        e.path = Some(path.to_path_buf());
        e
    };
    let src = std::fs::read_to_string(path).map_err(|e| SpecError {
        path: Some(path.to_path_buf()),
        line: None,
        field: None,
        message: format!("cannot read file: {e}"),
    })?;
    parse_table(&src).map_err(with_path)
}
