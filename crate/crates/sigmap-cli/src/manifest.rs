//! Corpus manifests: one image path per line, `#` comments allowed.
//! Relative paths resolve against the manifest's directory.

use std::path::{Path, PathBuf};

use crate::{CliError, CliResult};

pub fn load_manifest(path: &Path) -> CliResult<Vec<PathBuf>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = PathBuf::from(line);
        let resolved = if p.is_absolute() { p } else { base.join(p) };
        if !resolved.is_file() {
            return Err(CliError::Io(format!(
                "manifest entry does not exist: {}",
                resolved.display()
            )));
        }
        entries.push(resolved);
    }
    if entries.is_empty() {
        return Err(CliError::Usage(format!("manifest {} lists no images", path.display())));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn resolves_relative_paths_and_skips_comments() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.pgm"), b"x").unwrap();
        let mpath = dir.path().join("list.txt");
        fs::write(&mpath, "# corpus\n\na.pgm\n").unwrap();
        let entries = load_manifest(&mpath).unwrap();
        assert_eq!(entries, vec![dir.path().join("a.pgm")]);
    }

    #[test]
    fn missing_entries_and_empty_manifests_error() {
        let dir = tempfile::tempdir().unwrap();
        let mpath = dir.path().join("list.txt");
        fs::write(&mpath, "ghost.png\n").unwrap();
        assert!(matches!(load_manifest(&mpath).unwrap_err(), CliError::Io(_)));
        fs::write(&mpath, "# nothing\n").unwrap();
        assert!(matches!(load_manifest(&mpath).unwrap_err(), CliError::Usage(_)));
    }
}
