//! Source files: a term in concrete syntax, optionally preceded by an
//! `# expect:` line stating the expected outcome.
//!
//! ```text
//! # expect: 5            the program evaluates to 5
//! # expect: zero         every branch halts on zero
//! # expect: diverge      the program does not terminate
//! # expect-type: Nat -> D Nat
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::syntax::{parse_term, parse_type, ParseError, Term, Ty};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Value(u64),
    Zero,
    Diverge,
    Type(Ty),
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Value(v) => write!(f, "{v}"),
            Expectation::Zero => write!(f, "zero"),
            Expectation::Diverge => write!(f, "diverge"),
            Expectation::Type(a) => write!(f, "type {a}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SourceProgram {
    pub name: String,
    pub text: String,
    pub term: Term,
    pub expect: Option<Expectation>,
}

#[derive(Debug, Error)]
pub enum ProgramError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{name}:{0}", name = .1)]
    Parse(ParseError, String),
    #[error("{name}:{line}: malformed expectation `{text}`")]
    BadExpectation { name: String, line: usize, text: String },
}

impl SourceProgram {
    pub fn parse(name: &str, text: &str) -> Result<SourceProgram, ProgramError> {
        let mut expect = None;
        for (i, line) in text.lines().enumerate() {
            let Some(comment) = line.trim_start().strip_prefix('#') else {
                continue;
            };
            let comment = comment.trim();
            let bad = || ProgramError::BadExpectation {
                name: name.to_string(),
                line: i + 1,
                text: comment.to_string(),
            };
            if let Some(ty) = comment.strip_prefix("expect-type:") {
                expect = Some(Expectation::Type(parse_type(ty.trim()).map_err(|_| bad())?));
            } else if let Some(v) = comment.strip_prefix("expect:") {
                expect = Some(match v.trim() {
                    "zero" => Expectation::Zero,
                    "diverge" => Expectation::Diverge,
                    n => Expectation::Value(n.parse().map_err(|_| bad())?),
                });
            }
        }
        let term = parse_term(text).map_err(|e| ProgramError::Parse(e, name.to_string()))?;
        Ok(SourceProgram {
            name: name.to_string(),
            text: text.to_string(),
            term,
            expect,
        })
    }

    pub fn load(path: &Path) -> Result<SourceProgram, ProgramError> {
        let text = fs::read_to_string(path).map_err(|source| ProgramError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        SourceProgram::parse(&name, &text)
    }

    /// Whether the program is expected to run to a ground result.
    pub fn is_runnable(&self) -> bool {
        !matches!(self.expect, Some(Expectation::Type(_)) | None)
    }
}

/// The corpus shipped with the workspace.
pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every `.cdpcf` file of `dir`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<SourceProgram>, ProgramError> {
    let io = |source| ProgramError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cdpcf"))
        .collect();
    paths.sort();
    paths.iter().map(|p| SourceProgram::load(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectations_are_read_from_comments() {
        let p = SourceProgram::parse("x", "# expect: 4\nsucc[0] 3").unwrap();
        assert_eq!(p.expect, Some(Expectation::Value(4)));
        let z = SourceProgram::parse("x", "# expect: zero\nproj[0,0] (inj[1,0] 4)").unwrap();
        assert_eq!(z.expect, Some(Expectation::Zero));
        let t = SourceProgram::parse("x", "# expect-type: Nat -> Nat\n\\x:Nat. x").unwrap();
        assert_eq!(t.expect, Some(Expectation::Type(Ty::arrow(Ty::nat(), Ty::nat()))));
        assert!(!t.is_runnable());
    }

    #[test]
    fn malformed_expectation() {
        assert!(matches!(
            SourceProgram::parse("x", "# expect: lots\n3"),
            Err(ProgramError::BadExpectation { line: 1, .. })
        ));
    }

    #[test]
    fn corpus_loads() {
        let progs = load_corpus(&corpus_dir()).unwrap();
        assert!(progs.len() >= 10);
        assert!(progs.iter().all(|p| p.expect.is_some()));
    }
}
