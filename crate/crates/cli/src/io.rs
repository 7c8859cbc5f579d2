//! File formats: JSON-lines warning sets, corpus directories, ranked CSV.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use vulnrank_core::context::Warning;
use vulnrank_eval::{Corpus, CorpusFile};

use crate::CliError;

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// One JSON object per line; blank lines are skipped. A warning's id is its
/// record index.
pub fn parse_warnings(text: &str, origin: &str) -> Result<Vec<Warning>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, l)| serde_json::from_str(l).map_err(|e| CliError::Input(format!("{origin}:{}: {e}", no + 1))))
        .collect()
}

pub fn read_warnings(path: &Path) -> Result<Vec<Warning>, CliError> {
    parse_warnings(&read_to_string(path)?, &path.display().to_string())
}

pub fn warnings_jsonl(ws: &[Warning]) -> String {
    ws.iter().map(|w| serde_json::to_string(w).expect("warning serializes") + "\n").collect()
}

/// Reads every source file referenced by `warnings`, relative to `root`.
pub fn load_corpus(root: &Path, warnings: Vec<Warning>) -> Result<Corpus, CliError> {
    let mut files = Vec::new();
    let paths: BTreeSet<&str> = warnings.iter().map(|w| w.file.as_str()).collect();
    for p in paths {
        let project = warnings.iter().find(|w| w.file == p).map(|w| w.project.clone()).unwrap_or_default();
        files.push(CorpusFile { project, path: p.to_string(), text: read_to_string(&root.join(p))? });
    }
    Ok(Corpus { files, warnings })
}

/// `<dir>/src/<path>` for every file and `<dir>/warnings.jsonl`.
pub fn save_corpus(dir: &Path, corpus: &Corpus) -> Result<(), CliError> {
    for f in &corpus.files {
        write(&dir.join("src").join(&f.path), &f.text)?;
    }
    write(&dir.join("warnings.jsonl"), warnings_jsonl(&corpus.warnings))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedRow {
    pub id: usize,
    pub score: f64,
    pub rank: usize,
}

pub fn ranked_csv(rows: &[RankedRow]) -> String {
    let mut out = String::from("id,score,rank\n");
    for r in rows {
        out.push_str(&format!("{},{:.9},{}\n", r.id, r.score, r.rank));
    }
    out
}

pub fn parse_ranked_csv(text: &str, origin: &str) -> Result<Vec<RankedRow>, CliError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "id,score,rank" => {}
        _ => return Err(CliError::Input(format!("{origin}: expected header id,score,rank"))),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, l)| {
            let bad = |m: &str| CliError::Input(format!("{origin}:{}: {m}", no + 1));
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 3 {
                return Err(bad("expected 3 fields"));
            }
            Ok(RankedRow {
                id: f[0].trim().parse().map_err(|_| bad("bad id"))?,
                score: f[1].trim().parse().map_err(|_| bad("bad score"))?,
                rank: f[2].trim().parse().map_err(|_| bad("bad rank"))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use vulnrank_core::context::{Label, VulnKind};

    #[test]
    fn warnings_round_trip() {
        let ws = vec![
            Warning { project: "p".into(), file: "a.c".into(), line: 3, kind: VulnKind::Bo, label: Some(Label::Tp) },
            Warning { project: "p".into(), file: "b.c".into(), line: 9, kind: VulnKind::Npd, label: None },
        ];
        let text = warnings_jsonl(&ws);
        assert!(text.lines().next().unwrap().contains("\"kind\":\"BO\""));
        assert_eq!(parse_warnings(&text, "w").unwrap(), ws);
        let err = parse_warnings("{\"project\":1}\n", "w.jsonl").unwrap_err();
        assert!(matches!(err, CliError::Input(m) if m.starts_with("w.jsonl:1:")));
    }

    #[test]
    fn ranked_round_trip() {
        let rows = [RankedRow { id: 2, score: 0.75, rank: 1 }, RankedRow { id: 0, score: 0.25, rank: 2 }];
        assert_eq!(parse_ranked_csv(&ranked_csv(&rows), "r").unwrap(), rows);
        assert!(parse_ranked_csv("x\n", "r").is_err());
        assert!(parse_ranked_csv("id,score,rank\n1,2\n", "r").is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_to_string(Path::new("/nonexistent/x.jsonl")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.jsonl"));
        assert_eq!(err.exit_code(), 2);
    }
}
