//! Per-warning context extraction: the dependence slice around the reported
//! statement and the control-flow-ordered code gadget of its function.

mod slice;
mod warning;

pub use slice::{backward_slice, forward_slice};
pub use warning::{Label, VulnKind, Warning};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flowgraphs::{PointKind, ProgramAnalysis, ProgramGraph};
use crate::frontend::{FrontendError, SourceFile, StatementId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("no statement starts at {file}:{line}")]
    UnresolvedLocus { file: String, line: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Slice,
    Gadget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextStatement {
    pub function: String,
    pub id: StatementId,
    pub line: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextDocument {
    pub variant: Variant,
    pub statements: Vec<ContextStatement>,
    /// Index into `statements` of the reported statement.
    pub warned: usize,
    pub origin: Warning,
}

impl ContextDocument {
    /// One statement per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.statements.iter().enumerate() {
            let mark = if i == self.warned { '>' } else { ' ' };
            out.push_str(&format!("{mark} {}:{} {}\n", s.function, s.line, s.text));
        }
        out
    }
}

/// A parsed file with its dependence graphs, ready for extraction.
#[derive(Debug, Clone)]
pub struct AnalyzedFile {
    pub source: SourceFile,
    pub analysis: ProgramAnalysis,
    pub graph: ProgramGraph,
}

impl AnalyzedFile {
    pub fn new(source: SourceFile) -> Self {
        let analysis = ProgramAnalysis::build(&source.unit);
        let graph = ProgramGraph::build(&source.unit, &analysis);
        AnalyzedFile { source, analysis, graph }
    }

    pub fn parse(path: impl Into<String>, text: impl Into<String>) -> Result<Self, FrontendError> {
        Ok(Self::new(SourceFile::parse(path, text)?))
    }

    /// The first statement (lowest id) that starts on `line`.
    pub fn resolve(&self, line: u32) -> Result<(usize, StatementId), ContextError> {
        self.source
            .unit
            .functions
            .iter()
            .enumerate()
            .find_map(|(fi, f)| f.statements.iter().find(|s| s.locus.line == line).map(|s| (fi, s.id)))
            .ok_or_else(|| ContextError::UnresolvedLocus { file: self.source.path.clone(), line })
    }

    fn render(&self, function: usize, id: StatementId) -> ContextStatement {
        let f = &self.source.unit.functions[function];
        let s = f.statement(id);
        ContextStatement {
            function: f.name.clone(),
            id,
            line: s.locus.line,
            text: self.source.statement_text(s).to_string(),
        }
    }

    /// Backward and forward slice of the reported statement, deduplicated and
    /// in source order.
    pub fn extract_slice_context(&self, w: &Warning) -> Result<ContextDocument, ContextError> {
        let (function, id) = self.resolve(w.line)?;
        let criterion = self.graph.stmt(function, id);
        let g = self.graph.graph();
        let mut members: Vec<(u32, u32, usize, StatementId)> = backward_slice(g, criterion)
            .union(&forward_slice(g, criterion))
            .filter_map(|&n| {
                let p = self.graph.point(n);
                match p.kind {
                    PointKind::Entry => None,
                    PointKind::Stmt(s) => {
                        let locus = self.source.unit.functions[p.function].statement(s).locus;
                        Some((locus.line, locus.col, p.function, s))
                    }
                }
            })
            .collect();
        members.sort();
        let warned = members.iter().position(|&(_, _, f, s)| f == function && s == id).expect("criterion in slice");
        Ok(ContextDocument {
            variant: Variant::Slice,
            statements: members.into_iter().map(|(_, _, f, s)| self.render(f, s)).collect(),
            warned,
            origin: w.clone(),
        })
    }

    /// Every statement of the enclosing function in reverse post-order of its
    /// CFG; statements unreachable from entry follow in source order.
    pub fn extract_gadget(&self, w: &Warning) -> Result<ContextDocument, ContextError> {
        let (function, id) = self.resolve(w.line)?;
        let cfg = &self.analysis.cfgs[function];
        let mut order: Vec<usize> = cfg.reverse_post_order().into_iter().filter(|&n| cfg.is_statement(n)).collect();
        order.extend(cfg.unreachable().iter().map(|s| s.index()));
        let warned = order.iter().position(|&n| n == id.index()).expect("warned statement in function");
        Ok(ContextDocument {
            variant: Variant::Gadget,
            statements: order.into_iter().map(|n| self.render(function, StatementId(n as u32))).collect(),
            warned,
            origin: w.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warning(line: u32) -> Warning {
        Warning { project: "p".into(), file: "t.c".into(), line, kind: VulnKind::Bo, label: Some(Label::Tp) }
    }

    const PROGRAM: &str = "\
void put(char *d, int i) {
  d[i] = 65;
}
int main(int n) {
  char buf[8];
  int k = n + 1;
  int unrelated = 3;
  if (k > 2) {
    put(buf, k);
  } else {
    unrelated = 4;
  }
  return 0;
}
";

    #[test]
    fn isolated_statement() {
        let file = AnalyzedFile::parse("t.c", "int f() {\n int a = 1;\n int b = 2;\n return 0;\n}").unwrap();
        let doc = file.extract_slice_context(&warning(3)).unwrap();
        assert_eq!(doc.statements.len(), 1);
        assert_eq!(doc.statements[doc.warned].text, "int b = 2;");
    }

    #[test]
    fn slice_crosses_call_into_callee() {
        let file = AnalyzedFile::parse("t.c", PROGRAM).unwrap();
        let doc = file.extract_slice_context(&warning(2)).unwrap();
        let lines: Vec<u32> = doc.statements.iter().map(|s| s.line).collect();
        assert_eq!(lines, [2, 5, 6, 8, 9]);
        assert_eq!(doc.statements[doc.warned].line, 2);
    }

    #[test]
    fn gadget_is_whole_function_in_flow_order() {
        let file = AnalyzedFile::parse("t.c", PROGRAM).unwrap();
        let doc = file.extract_gadget(&warning(9)).unwrap();
        let lines: Vec<u32> = doc.statements.iter().map(|s| s.line).collect();
        assert_eq!(lines, [5, 6, 7, 8, 9, 11, 13]);
        assert_eq!(doc.statements[doc.warned].text, "put(buf, k);");
        assert_eq!(doc.statements[3].text, "if (k > 2)");
    }

    #[test]
    fn loop_body_once_and_unreachable_last() {
        let src = "int f(int c) {\n while (c) {\n  c = c - 1;\n }\n return c;\n c = 9;\n}";
        let file = AnalyzedFile::parse("t.c", src).unwrap();
        let doc = file.extract_gadget(&warning(3)).unwrap();
        let lines: Vec<u32> = doc.statements.iter().map(|s| s.line).collect();
        assert_eq!(lines, [2, 3, 5, 6]);
    }

    #[test]
    fn unresolved_locus() {
        let file = AnalyzedFile::parse("t.c", PROGRAM).unwrap();
        assert_eq!(
            file.extract_slice_context(&warning(99)),
            Err(ContextError::UnresolvedLocus { file: "t.c".into(), line: 99 })
        );
        assert!(file.extract_gadget(&warning(1)).is_err());
    }

    #[test]
    fn extraction_is_deterministic() {
        let a = AnalyzedFile::parse("t.c", PROGRAM).unwrap();
        let b = AnalyzedFile::parse("t.c", PROGRAM).unwrap();
        for line in [2, 6, 9, 11] {
            assert_eq!(a.extract_slice_context(&warning(line)), b.extract_slice_context(&warning(line)));
            assert_eq!(a.extract_gadget(&warning(line)).ok(), b.extract_gadget(&warning(line)).ok());
        }
    }
}
