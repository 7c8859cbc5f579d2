use std::fmt::Write;

use super::cfg::{Cfg, EdgeKind};
use super::pdg::{DefSite, Pdg};
use crate::frontend::SourceFile;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ")
}

fn stmt_label(file: &SourceFile, function: usize, node: usize) -> String {
    let f = &file.unit.functions[function];
    let s = &f.statements[node];
    format!("{}: {}", s.id, escape(file.statement_text(s)))
}

pub fn cfg_dot(file: &SourceFile, function: usize, cfg: &Cfg) -> String {
    let f = &file.unit.functions[function];
    let mut out = format!("digraph \"cfg_{}\" {{\n  node [shape=box];\n", f.name);
    for n in 0..cfg.node_count() {
        let label = if n == cfg.entry() {
            "ENTRY".to_string()
        } else if n == cfg.exit() {
            "EXIT".to_string()
        } else {
            stmt_label(file, function, n)
        };
        let _ = writeln!(out, "  n{n} [label=\"{label}\"];");
    }
    for (a, b, kind) in cfg.edges() {
        let attr = match kind {
            EdgeKind::Seq => "",
            EdgeKind::True => " [label=\"T\"]",
            EdgeKind::False => " [label=\"F\"]",
            EdgeKind::Synthetic => " [style=dotted]",
        };
        let _ = writeln!(out, "  n{a} -> n{b}{attr};");
    }
    out.push_str("}\n");
    out
}

pub fn pdg_dot(file: &SourceFile, pdg: &Pdg) -> String {
    let f = &file.unit.functions[pdg.function];
    let mut out = format!("digraph \"pdg_{}\" {{\n  node [shape=box];\n  entry [label=\"ENTRY {}\"];\n", f.name, f.name);
    for id in pdg.nodes() {
        let _ = writeln!(out, "  s{} [label=\"{}\"];", id.0, stmt_label(file, pdg.function, id.index()));
    }
    for (a, b) in &pdg.cdeps {
        let _ = writeln!(out, "  s{} -> s{} [style=bold];", a.0, b.0);
    }
    for d in &pdg.ddeps {
        let from = match d.from {
            DefSite::Entry => "entry".to_string(),
            DefSite::Stmt(s) => format!("s{}", s.0),
        };
        let _ = writeln!(out, "  {from} -> s{} [style=dashed, label=\"{}\"];", d.to.0, escape(&d.var.to_string()));
    }
    for c in &pdg.calls {
        let callee = &file.unit.functions[c.callee].name;
        let _ = writeln!(out, "  s{} -> \"call {callee}\" [color=blue];", c.site.0);
    }
    for r in &pdg.returns {
        let callee = &file.unit.functions[r.callee].name;
        let _ = writeln!(out, "  \"{callee}:s{}\" -> s{} [color=red];", r.ret.0, r.site.0);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowgraphs::ProgramAnalysis;

    #[test]
    fn dot_mentions_every_node_and_tag() {
        let file = SourceFile::parse("t.c", "int f(int c) { if (c) c = \"x\"; return c; }").unwrap();
        let pa = ProgramAnalysis::build(&file.unit);
        let dot = cfg_dot(&file, 0, &pa.cfgs[0]);
        assert!(dot.contains("ENTRY") && dot.contains("EXIT"));
        assert!(dot.contains("[label=\"T\"]") && dot.contains("[label=\"F\"]"));
        assert!(dot.contains("c = \\\"x\\\";"));
        let dot = pdg_dot(&file, &pa.pdgs[0]);
        assert!(dot.contains("s0 -> s1 [style=bold]"));
        assert!(dot.contains("entry -> s0 [style=dashed, label=\"c\"]"));
    }
}
