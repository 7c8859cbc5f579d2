//! Seeded generator of mini-C files with planted buffer-overflow and
//! null-dereference warnings. A TP file reaches the warned statement with an
//! unchecked index or pointer; the matching FP file guards it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vulnrank_core::context::{Label, VulnKind, Warning};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// One warned target function per file.
    pub files: usize,
    pub tp_rate: f64,
    pub projects: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { files: 600, tp_rate: 0.17, projects: 3, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub project: String,
    pub path: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub files: Vec<CorpusFile>,
    pub warnings: Vec<Warning>,
}

impl Corpus {
    pub fn file(&self, path: &str) -> Option<&CorpusFile> {
        self.files.iter().find(|f| f.path == path)
    }
}

const VAR_POOL: &[&str] = &[
    "len", "idx", "off", "pos", "cnt", "n", "k", "base", "val", "tmp", "acc", "res", "flag", "size", "step",
    "cur", "lim", "mark", "width", "depth", "row", "col", "src_len", "nbytes", "slot", "cursor", "total", "hi",
    "lo", "mid", "code", "state", "ch", "bits", "mask", "shift",
];
const BUF_POOL: &[&str] = &["buf", "line", "name", "out", "hdr", "path", "tbl", "scratch", "frame", "block"];
const PTR_POOL: &[&str] = &["p", "node", "ent", "cfg", "ctx", "item", "rec", "ref", "obj", "slotp"];
const EXT_POOL: &[&str] = &["lookup", "find_entry", "get_node", "table_get", "cache_fetch", "map_find", "alloc_int", "open_ref"];
const SINK_POOL: &[&str] = &["log_value", "emit", "trace_int", "consume", "report"];
const VERB_POOL: &[&str] = &["parse", "read", "copy", "decode", "load", "scan", "fill", "pack", "store", "handle"];
const NOUN_POOL: &[&str] = &["header", "packet", "record", "field", "chunk", "token", "entry", "frame", "table", "str"];

struct Names {
    used: Vec<String>,
}

impl Names {
    fn pick(&mut self, rng: &mut impl Rng, pool: &[&str]) -> String {
        loop {
            let base = pool.choose(rng).unwrap();
            let name = if rng.gen_bool(0.3) { format!("{base}{}", rng.gen_range(0..10)) } else { base.to_string() };
            if !self.used.contains(&name) {
                self.used.push(name.clone());
                return name;
            }
        }
    }
}

/// Source under construction; tracks the line of the warned statement.
struct Src {
    text: String,
    line: u32,
    warned: Option<u32>,
}

impl Src {
    fn emit(&mut self, indent: usize, s: &str) {
        self.text.push_str(&"  ".repeat(indent));
        self.text.push_str(s);
        self.text.push('\n');
        self.line += 1;
    }

    fn warn(&mut self, indent: usize, s: &str) {
        self.warned = Some(self.line);
        self.emit(indent, s);
    }
}

struct Ctx<'a, R> {
    rng: &'a mut R,
    names: Names,
    /// Scalar locals available to filler code.
    locals: Vec<String>,
}

impl<R: Rng> Ctx<'_, R> {
    fn var(&mut self) -> String {
        self.names.pick(self.rng, VAR_POOL)
    }

    fn local(&mut self) -> String {
        self.locals.choose(self.rng).unwrap().clone()
    }

    fn filler(&mut self, src: &mut Src, indent: usize) {
        let t = self.local();
        let u = self.local();
        let c = self.rng.gen_range(1..64);
        match self.rng.gen_range(0..7) {
            0 => src.emit(indent, &format!("{t} = {t} + {c};")),
            1 => src.emit(indent, &format!("{t} = {u} * {c};")),
            2 => {
                src.emit(indent, &format!("while ({t} > {c}) {{"));
                src.emit(indent + 1, &format!("{t} = {t} - {};", self.rng.gen_range(1..4)));
                src.emit(indent, "}");
            }
            3 => {
                src.emit(indent, &format!("if ({t} == {c}) {{"));
                src.emit(indent + 1, &format!("{u} = 0;"));
                src.emit(indent, "}");
            }
            4 => src.emit(indent, &format!("{}({t});", SINK_POOL.choose(self.rng).unwrap())),
            5 => src.emit(indent, &format!("{t} = {u} - {t} / {c}; // adjust")),
            _ => {
                let i = self.var();
                src.emit(indent, &format!("int {i};"));
                src.emit(indent, &format!("for ({i} = 0; {i} < {c}; {i}++) {{"));
                src.emit(indent + 1, &format!("{t} += {i};"));
                src.emit(indent, "}");
                self.locals.push(i);
            }
        }
    }

    fn fillers(&mut self, src: &mut Src, indent: usize, max: usize) {
        for _ in 0..self.rng.gen_range(0..=max) {
            self.filler(src, indent);
        }
    }

    /// A check on an unrelated local, emitted into TP functions so that the
    /// mere presence of an `if` is not a label.
    fn decoy(&mut self, src: &mut Src, indent: usize, size: u32) {
        let t = self.local();
        match self.rng.gen_range(0..3) {
            0 => {
                src.emit(indent, &format!("if ({t} < {size}) {{"));
                src.emit(indent + 1, &format!("{t} = {t} + 1;"));
                src.emit(indent, "}");
            }
            1 => {
                src.emit(indent, &format!("if ({t} >= {size}) {{"));
                src.emit(indent + 1, "return -1;");
                src.emit(indent, "}");
            }
            _ => src.emit(indent, &format!("{t} = {t} % {size};")),
        }
    }

    fn fn_name(&mut self) -> String {
        let v = VERB_POOL.choose(self.rng).unwrap();
        let n = NOUN_POOL.choose(self.rng).unwrap();
        let name = format!("{v}_{n}_{}", self.rng.gen_range(0..1000));
        self.names.used.push(name.clone());
        name
    }

    fn declare_locals(&mut self, src: &mut Src, indent: usize) {
        for _ in 0..self.rng.gen_range(1..=3) {
            let v = self.var();
            src.emit(indent, &format!("int {v} = {};", self.rng.gen_range(0..32)));
            self.locals.push(v);
        }
    }
}

/// Buffer write whose index derives from a parameter.
fn buffer_overflow(ctx: &mut Ctx<impl Rng>, src: &mut Src, tp: bool) {
    let size = *[8u32, 16, 32, 64, 128].choose(ctx.rng).unwrap();
    let interproc = ctx.rng.gen_bool(0.35);
    let fname = ctx.fn_name();
    let (a, b) = (ctx.var(), ctx.var());
    let (buf, idx) = (ctx.names.pick(ctx.rng, BUF_POOL), ctx.var());
    let helper = interproc.then(|| ctx.fn_name());
    if let Some(h) = &helper {
        let (d, p, v) = (ctx.names.pick(ctx.rng, BUF_POOL), ctx.var(), ctx.var());
        src.emit(0, &format!("int {h}(char *{d}, int {p}, int {v}) {{"));
        src.warn(1, &format!("{d}[{p}] = {v};"));
        src.emit(1, "return 0;");
        src.emit(0, "}");
        src.emit(0, "");
    }
    src.emit(0, &format!("int {fname}(int {a}, int {b}) {{"));
    src.emit(1, &format!("char {buf}[{size}];"));
    ctx.locals = vec![b.clone()];
    ctx.declare_locals(src, 1);
    let hop = ctx.rng.gen_range(1..16);
    src.emit(1, &format!("int {idx} = {a} + {hop};"));
    ctx.fillers(src, 1, 3);
    let loop_form = !interproc && ctx.rng.gen_bool(0.25);
    let write = |src: &mut Src, indent: usize, i: &str| match &helper {
        Some(h) => src.emit(indent, &format!("{h}({buf}, {i}, {b});")),
        None => src.warn(indent, &format!("{buf}[{i}] = {b};")),
    };
    if loop_form {
        let i = ctx.var();
        src.emit(1, &format!("int {i};"));
        let bound = if tp { idx.clone() } else { size.to_string() };
        if tp && ctx.rng.gen_bool(0.5) {
            ctx.decoy(src, 1, size);
        }
        src.emit(1, &format!("for ({i} = 0; {i} < {bound}; {i}++) {{"));
        write(src, 2, &i);
        src.emit(1, "}");
    } else if tp {
        if ctx.rng.gen_bool(0.6) {
            ctx.decoy(src, 1, size);
        }
        ctx.fillers(src, 1, 1);
        write(src, 1, &idx);
    } else {
        match ctx.rng.gen_range(0..4) {
            0 => {
                src.emit(1, &format!("if ({idx} < {size}) {{"));
                write(src, 2, &idx);
                src.emit(1, "}");
            }
            1 => {
                src.emit(1, &format!("if ({idx} >= {size}) {{"));
                src.emit(2, "return -1;");
                src.emit(1, "}");
                ctx.fillers(src, 1, 1);
                write(src, 1, &idx);
            }
            2 => {
                src.emit(1, &format!("{idx} = {idx} % {size};"));
                ctx.fillers(src, 1, 1);
                write(src, 1, &idx);
            }
            _ => {
                src.emit(1, &format!("if ({idx} > {}) {{", size - 1));
                src.emit(2, &format!("{idx} = {};", size - 1));
                src.emit(1, "}");
                write(src, 1, &idx);
            }
        }
    }
    ctx.fillers(src, 1, 2);
    let ret = ctx.local();
    src.emit(1, &format!("return {ret};"));
    src.emit(0, "}");
}

/// Dereference of a pointer returned by an external lookup.
fn null_deref(ctx: &mut Ctx<impl Rng>, src: &mut Src, tp: bool) {
    let interproc = ctx.rng.gen_bool(0.35);
    let fname = ctx.fn_name();
    let a = ctx.var();
    let (p, v) = (ctx.names.pick(ctx.rng, PTR_POOL), ctx.var());
    let ext = EXT_POOL.choose(ctx.rng).unwrap();
    let helper = interproc.then(|| ctx.fn_name());
    if let Some(h) = &helper {
        let q = ctx.names.pick(ctx.rng, PTR_POOL);
        src.emit(0, &format!("int {h}(int *{q}) {{"));
        src.warn(1, &format!("return *{q};"));
        src.emit(0, "}");
        src.emit(0, "");
    }
    src.emit(0, &format!("int {fname}(int {a}) {{"));
    ctx.locals = vec![a.clone()];
    ctx.declare_locals(src, 1);
    src.emit(1, &format!("int {v} = 0;"));
    ctx.locals.push(v.clone());
    src.emit(1, &format!("int *{p} = {ext}({a});"));
    ctx.fillers(src, 1, 3);
    let store = ctx.rng.gen_bool(0.3);
    let deref = |src: &mut Src, indent: usize| match (&helper, store) {
        (Some(h), _) => src.emit(indent, &format!("{v} = {h}({p});")),
        (None, false) => src.warn(indent, &format!("{v} = *{p};")),
        (None, true) => src.warn(indent, &format!("*{p} = {v};")),
    };
    if tp {
        if ctx.rng.gen_bool(0.6) {
            ctx.decoy(src, 1, 16);
        }
        ctx.fillers(src, 1, 1);
        deref(src, 1);
        if ctx.rng.gen_bool(0.3) {
            // Check after the fact does not protect the dereference.
            src.emit(1, &format!("if ({p} == 0) {{"));
            src.emit(2, "return -1;");
            src.emit(1, "}");
        }
    } else {
        match ctx.rng.gen_range(0..3) {
            0 => {
                src.emit(1, &format!("if ({p} != 0) {{"));
                deref(src, 2);
                src.emit(1, "}");
            }
            1 => {
                src.emit(1, &format!("if (!{p}) {{"));
                src.emit(2, "return -1;");
                src.emit(1, "}");
                ctx.fillers(src, 1, 1);
                deref(src, 1);
            }
            _ => {
                src.emit(1, &format!("if ({p} == 0) {{"));
                src.emit(2, "return 0;");
                src.emit(1, "}");
                deref(src, 1);
            }
        }
    }
    ctx.fillers(src, 1, 2);
    src.emit(1, &format!("return {v};"));
    src.emit(0, "}");
}

/// Files and warnings; exactly `round(files · tp_rate)` warnings are TPs.
pub fn generate_synthetic_corpus(cfg: &SynthConfig) -> Corpus {
    assert!(cfg.tp_rate > 0.0 && cfg.tp_rate < 1.0, "tp_rate must be in (0, 1)");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_tp = (cfg.files as f64 * cfg.tp_rate).round() as usize;
    let mut labels: Vec<bool> = (0..cfg.files).map(|i| i < n_tp).collect();
    labels.shuffle(&mut rng);
    let mut files = Vec::with_capacity(cfg.files);
    let mut warnings = Vec::with_capacity(cfg.files);
    for (i, &tp) in labels.iter().enumerate() {
        let project = format!("proj{}", i % cfg.projects.max(1));
        let path = format!("{project}/f{i:04}.c");
        let kind = if rng.gen_bool(0.5) { VulnKind::Bo } else { VulnKind::Npd };
        let mut src = Src { text: String::new(), line: 1, warned: None };
        let mut ctx = Ctx { rng: &mut rng, names: Names { used: Vec::new() }, locals: Vec::new() };
        match kind {
            VulnKind::Bo => buffer_overflow(&mut ctx, &mut src, tp),
            VulnKind::Npd => null_deref(&mut ctx, &mut src, tp),
        }
        warnings.push(Warning {
            project: project.clone(),
            file: path.clone(),
            line: src.warned.expect("template marks a warned statement"),
            kind,
            label: Some(if tp { Label::Tp } else { Label::Fp }),
        });
        files.push(CorpusFile { project, path, text: src.text });
    }
    Corpus { files, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vulnrank_core::context::AnalyzedFile;

    #[test]
    fn files_parse_and_warnings_resolve() {
        let c = generate_synthetic_corpus(&SynthConfig { files: 300, seed: 4, ..SynthConfig::default() });
        for (f, w) in c.files.iter().zip(&c.warnings) {
            let a = AnalyzedFile::parse(f.path.clone(), f.text.clone()).unwrap_or_else(|e| panic!("{e}\n{}", f.text));
            let (func, id) = a.resolve(w.line).unwrap();
            let stmt = a.source.statement_text(a.source.unit.functions[func].statement(id));
            match w.kind {
                VulnKind::Bo => assert!(stmt.contains('['), "{stmt}"),
                VulnKind::Npd => assert!(stmt.contains('*'), "{stmt}"),
            }
        }
    }

    #[test]
    fn tp_fraction_and_determinism() {
        let cfg = SynthConfig { files: 500, ..SynthConfig::default() };
        let a = generate_synthetic_corpus(&cfg);
        let tps = a.warnings.iter().filter(|w| w.label == Some(Label::Tp)).count();
        assert_eq!(tps, 85);
        assert!((tps as f64 / 500.0 - 0.17).abs() <= 0.03);
        assert_eq!(a, generate_synthetic_corpus(&cfg));
        assert_ne!(a, generate_synthetic_corpus(&SynthConfig { seed: 1, ..cfg }));
        let kinds: Vec<_> = a.warnings.iter().map(|w| w.kind).collect();
        assert!(kinds.contains(&VulnKind::Bo) && kinds.contains(&VulnKind::Npd));
    }
}
