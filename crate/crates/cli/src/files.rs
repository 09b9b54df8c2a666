//! Reading inputs, validating them, and writing outputs atomically.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use btdiv_core::treebank::{parse_bracketed, ParseTree};
use btdiv_core::CandidateGroup;
use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

/// An input file held in memory with its digest.
#[derive(Debug, Clone)]
pub struct Input {
    pub path: PathBuf,
    pub text: String,
    pub sha256: String,
}

impl Input {
    pub fn read(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::read(path, e))?;
        let sha256 = hex(&Sha256::digest(&bytes));
        let text = String::from_utf8(bytes)
            .map_err(|e| CliError::validation(format!("{} is not UTF-8: {e}", path.display())))?;
        Ok(Self {
            path: path.to_owned(),
            text,
            sha256,
        })
    }

    /// Lines without their terminators. A trailing newline does not start an
    /// extra empty line; `\r\n` endings are accepted.
    pub fn lines(&self) -> Vec<&str> {
        self.text.lines().collect()
    }

    pub fn digest(&self) -> InputDigest {
        InputDigest {
            file: self
                .path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: self.sha256.clone(),
        }
    }
}

/// How a report names an input: base name only, so reports do not depend
/// on where the files were staged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub file: String,
    pub sha256: String,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Parses a candidate-group JSONL file: unique ids and the same number of
/// candidates in every group.
pub fn parse_groups(input: &Input) -> CliResult<Vec<CandidateGroup>> {
    let name = input.path.display();
    let mut groups = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in input.lines().into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let group: CandidateGroup =
            serde_json::from_str(line).map_err(|e| CliError::validation(format!("{name}:{}: {e}", i + 1)))?;
        if !seen.insert(group.group_id.clone()) {
            return Err(CliError::validation(format!(
                "{name}:{}: duplicate group id {:?}",
                i + 1,
                group.group_id
            )));
        }
        if let Some(first) = groups.first().map(CandidateGroup::k) {
            if group.k() != first {
                return Err(CliError::validation(format!(
                    "{name}:{}: group {:?} has {} candidates, earlier groups have {first}",
                    i + 1,
                    group.group_id,
                    group.k()
                )));
            }
        }
        groups.push(group);
    }
    if groups.is_empty() {
        return Err(CliError::validation(format!("{name}: no candidate groups")));
    }
    Ok(groups)
}

/// Parses a tree file line by line. Blank lines are missing parses and come
/// back as `None`; a malformed line is a validation error.
pub fn parse_tree_lines(input: &Input) -> CliResult<Vec<Option<ParseTree>>> {
    input
        .lines()
        .into_iter()
        .enumerate()
        .map(|(i, line)| {
            if line.trim().is_empty() {
                return Ok(None);
            }
            parse_bracketed(line)
                .map(Some)
                .map_err(|e| CliError::validation(format!("{}:{}: {e}", input.path.display(), i + 1)))
        })
        .collect()
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let staged = stage(path, contents)?;
    commit(staged)
}

/// A written temporary file waiting to be renamed over its target.
pub struct Staged {
    file: NamedTempFile,
    target: PathBuf,
}

pub fn stage(path: &Path, contents: &[u8]) -> CliResult<Staged> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut file = NamedTempFile::new_in(dir).map_err(|e| CliError::write(path, e))?;
    file.write_all(contents).map_err(|e| CliError::write(path, e))?;
    file.as_file().sync_all().map_err(|e| CliError::write(path, e))?;
    Ok(Staged {
        file,
        target: path.to_owned(),
    })
}

pub fn commit(staged: Staged) -> CliResult<()> {
    let target = staged.target;
    staged
        .file
        .persist(&target)
        .map_err(|e| CliError::write(&target, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(text: &str) -> Input {
        Input {
            path: PathBuf::from("mem.jsonl"),
            text: text.to_owned(),
            sha256: sha256_hex(text.as_bytes()),
        }
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn groups_parse_with_optional_source() {
        let g = parse_groups(&input(
            "{\"id\":\"a\",\"candidates\":[\"x\",\"y\"]}\n\n{\"id\":\"b\",\"source\":\"s\",\"candidates\":[\"x\",\"z\"]}\n",
        ))
        .unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[1].source.as_deref(), Some("s"));
    }

    #[test]
    fn duplicate_ids_and_ragged_groups_are_rejected() {
        let dup = parse_groups(&input(
            "{\"id\":\"a\",\"candidates\":[\"x\"]}\n{\"id\":\"a\",\"candidates\":[\"y\"]}\n",
        ))
        .unwrap_err();
        assert!(dup.message.contains("mem.jsonl:2: duplicate"), "{dup}");
        let ragged = parse_groups(&input(
            "{\"id\":\"a\",\"candidates\":[\"x\",\"y\"]}\n{\"id\":\"b\",\"candidates\":[\"y\"]}\n",
        ))
        .unwrap_err();
        assert!(
            ragged.message.contains("1 candidates, earlier groups have 2"),
            "{ragged}"
        );
        assert!(parse_groups(&input("\n")).is_err());
        assert!(parse_groups(&input("{\"id\":1}\n")).is_err());
    }

    #[test]
    fn tree_lines_keep_blanks_as_missing() {
        let t = parse_tree_lines(&input("(S (NP x))\n\n(S (VP y))\n")).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t[1].is_none());
        let err = parse_tree_lines(&input("(S (NP x))\n(S (NP\n")).unwrap_err();
        assert!(err.message.starts_with("mem.jsonl:2:"), "{err}");
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
