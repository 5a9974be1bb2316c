//! The line-oriented system file format.
//!
//! ```text
//! # comment
//! name: academic
//! states: [x1, x2, x3]
//! params: [k]
//! drift: [x2, k*x3, 0]
//! input b1: [0, 0, 1]
//! input b2: [0, 1, 0]
//! flat_output: [x1, x3]
//! coord_change: [y1 := x1 + x3 @ x1]
//! ```
//!
//! Arrays may span several lines. A line holding only `---` separates
//! documents; transcripts are written as one document per stage.

use std::fmt::{self, Write as _};
use std::path::Path;

use flatri_core::flatness::AffineSystem;
use flatri_core::geom::{states, VectorField};
use flatri_core::symx::{parse, Expr, Symbol, Vocabulary, ZeroTestConfig};
use flatri_core::transform::{CoordChange, TranscriptEntry};

/// A parse or validation error with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.msg)
        } else {
            write!(f, "line {}, column {}: {}", self.line, self.col, self.msg)
        }
    }
}

impl std::error::Error for LoadError {}

fn err(line: usize, col: usize, msg: impl Into<String>) -> LoadError {
    LoadError {
        line,
        col,
        msg: msg.into(),
    }
}

/// One `new := def @ replaced` entry of a coordinate change.
#[derive(Clone, Debug, PartialEq)]
pub struct ChangeEntry {
    pub new: Symbol,
    pub def: Expr,
    /// The coordinate replaced; chosen automatically when absent.
    pub replaced: Option<Symbol>,
}

/// A loaded system with its optional extras.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemFile {
    pub system: AffineSystem,
    pub flat_output: Vec<Expr>,
    pub coord_change: Vec<ChangeEntry>,
}

impl SystemFile {
    /// The coordinate change as a composition of elementary steps.
    pub fn step1(&self, cfg: &ZeroTestConfig) -> flatri_core::Result<Option<CoordChange>> {
        if self.coord_change.is_empty() {
            return Ok(None);
        }
        let mut c = CoordChange::identity();
        let mut cur = self.system.states().to_vec();
        for e in &self.coord_change {
            match &e.replaced {
                Some(r) => c.push(&cur, e.new.clone(), e.def.clone(), r, cfg)?,
                None => c.push_auto(&cur, e.new.clone(), e.def.clone(), cfg)?,
            };
            cur = c.final_states(self.system.states())?;
        }
        Ok(Some(c))
    }
}

/// Text with a source position for every byte.
struct Located {
    text: String,
    pos: Vec<(usize, usize)>,
}

impl Located {
    fn new() -> Self {
        Located {
            text: String::new(),
            pos: Vec::new(),
        }
    }

    fn push(&mut self, s: &str, line: usize, col: usize) {
        let mut c = col;
        for ch in s.chars() {
            self.text.push(ch);
            for _ in 0..ch.len_utf8() {
                self.pos.push((line, c));
            }
            c += 1;
        }
    }

    fn at(&self, byte: usize) -> (usize, usize) {
        self.pos
            .get(byte)
            .or(self.pos.last())
            .copied()
            .unwrap_or((0, 0))
    }

    fn slice(&self, a: usize, b: usize) -> Located {
        Located {
            text: self.text[a..b].to_string(),
            pos: self.pos[a..b].to_vec(),
        }
    }

    fn trimmed(&self) -> Located {
        let start = self.text.len() - self.text.trim_start().len();
        let end = self.text.trim_end().len().max(start);
        self.slice(start, end)
    }
}

struct Entry {
    key: String,
    line: usize,
    value: Located,
}

fn strip_comment(s: &str) -> &str {
    s.split('#').next().unwrap_or("")
}

fn depth_change(s: &str) -> i64 {
    s.chars()
        .map(|c| match c {
            '[' => 1,
            ']' => -1,
            _ => 0,
        })
        .sum()
}

/// Split a document into `key: value` entries, joining multi-line arrays.
fn entries(lines: &[(usize, &str)]) -> Result<Vec<Entry>, LoadError> {
    let mut out: Vec<Entry> = Vec::new();
    let mut open: Option<(Entry, i64)> = None;
    for &(no, raw) in lines {
        let body = strip_comment(raw);
        if let Some((mut e, depth)) = open.take() {
            e.value.push(" ", no, 1);
            e.value.push(body, no, 1);
            let d = depth + depth_change(body);
            if d > 0 {
                open = Some((e, d));
            } else {
                out.push(e);
            }
            continue;
        }
        if body.trim().is_empty() {
            continue;
        }
        let Some(colon) = body.find(':') else {
            return Err(err(
                no,
                1,
                format!("expected `key: value`, found `{}`", body.trim()),
            ));
        };
        let key = body[..colon]
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        let mut value = Located::new();
        value.push(&body[colon + 1..], no, colon + 2);
        let e = Entry {
            key,
            line: no,
            value,
        };
        let d = depth_change(body);
        if d > 0 {
            open = Some((e, d));
        } else {
            out.push(e);
        }
    }
    if let Some((e, _)) = open {
        return Err(err(e.line, 1, format!("unterminated `[` in `{}`", e.key)));
    }
    Ok(out)
}

/// The items of a bracketed, comma-separated array.
fn items(e: &Entry) -> Result<Vec<Located>, LoadError> {
    let v = e.value.trimmed();
    let (l, c) = v.at(0);
    if !v.text.starts_with('[') || !v.text.ends_with(']') {
        return Err(err(l, c, format!("`{}` expects a bracketed list", e.key)));
    }
    let inner = v.slice(1, v.text.len() - 1);
    let mut out = Vec::new();
    let mut depth = 0i64;
    let mut start = 0;
    for (i, ch) in inner.text.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth <= 0 => {
                out.push(inner.slice(start, i).trimmed());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = inner.slice(start, inner.text.len()).trimmed();
    if !(out.is_empty() && last.text.is_empty()) {
        out.push(last);
    }
    for it in &out {
        if it.text.is_empty() {
            let (l, c) = it.at(0);
            return Err(err(l, c, format!("empty item in `{}`", e.key)));
        }
    }
    Ok(out)
}

fn expr(it: &Located, vocab: &Vocabulary) -> Result<Expr, LoadError> {
    parse(&it.text, vocab).map_err(|e| {
        let (l, c) = match &e {
            flatri_core::Error::Syntax { pos, .. } => it.at(*pos),
            _ => it.at(0),
        };
        err(l, c, e.to_string())
    })
}

fn name(it: &Located) -> Result<Symbol, LoadError> {
    let ok = it
        .text
        .chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && it
            .text
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '^');
    if !ok {
        let (l, c) = it.at(0);
        return Err(err(l, c, format!("`{}` is not a valid name", it.text)));
    }
    Ok(Symbol::from(it.text.as_str()))
}

const KEYS: [&str; 8] = [
    "name",
    "states",
    "params",
    "drift",
    "input b1",
    "input b2",
    "flat_output",
    "coord_change",
];

fn document(lines: &[(usize, &str)], default_name: &str) -> Result<SystemFile, LoadError> {
    let es = entries(lines)?;
    let mut seen: Vec<&str> = Vec::new();
    for e in &es {
        if e.key.starts_with("input ") && !KEYS.contains(&e.key.as_str()) {
            return Err(err(
                e.line,
                1,
                format!("`{}`: exactly two inputs (b1, b2) are supported", e.key),
            ));
        }
        let Some(k) = KEYS.iter().find(|k| **k == e.key) else {
            return Err(err(e.line, 1, format!("unknown key `{}`", e.key)));
        };
        if seen.contains(k) {
            return Err(err(e.line, 1, format!("`{}` given twice", e.key)));
        }
        seen.push(k);
    }
    let get = |k: &str| es.iter().find(|e| e.key == k);
    let first = lines.first().map_or(0, |l| l.0);
    let need = |k: &str| get(k).ok_or_else(|| err(first.max(1), 1, format!("missing `{}`", k)));

    let sys_name = match get("name") {
        Some(e) => e.value.trimmed().text,
        None => default_name.to_string(),
    };
    let st: Vec<Symbol> = items(need("states")?)?
        .iter()
        .map(name)
        .collect::<Result<_, _>>()?;
    let ps: Vec<Symbol> = match get("params") {
        Some(e) => items(e)?.iter().map(name).collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let vocab = Vocabulary::new(st.iter().chain(&ps).map(|s| &**s));
    let field = |k: &str| -> Result<VectorField, LoadError> {
        let e = need(k)?;
        let its = items(e)?;
        if its.len() != st.len() {
            return Err(err(
                e.line,
                1,
                format!(
                    "`{}` has {} components for {} states",
                    k,
                    its.len(),
                    st.len()
                ),
            ));
        }
        Ok(VectorField(
            its.iter()
                .map(|it| expr(it, &vocab))
                .collect::<Result<_, _>>()?,
        ))
    };
    let drift = field("drift")?;
    let b1 = field("input b1")?;
    let b2 = field("input b2")?;
    let system = AffineSystem::new(
        sys_name,
        states(st.iter().map(|s| &**s)),
        ps.clone(),
        drift,
        b1,
        b2,
    )
    .map_err(|e| err(need("states").map_or(0, |e| e.line), 1, e.to_string()))?;

    let flat_output = match get("flat_output") {
        Some(e) => {
            let its = items(e)?;
            if its.len() > 2 {
                return Err(err(e.line, 1, "`flat_output` takes at most two functions"));
            }
            its.iter()
                .map(|it| expr(it, &vocab))
                .collect::<Result<_, _>>()?
        }
        None => Vec::new(),
    };

    let mut coord_change = Vec::new();
    if let Some(e) = get("coord_change") {
        let mut vocab = vocab.clone();
        for it in items(e)? {
            let (l, c) = it.at(0);
            let Some(eq) = it.text.find(":=") else {
                return Err(err(l, c, "expected `new := definition [@ replaced]`"));
            };
            let new = name(&it.slice(0, eq).trimmed())?;
            let rest = it.slice(eq + 2, it.text.len());
            let (def, replaced) = match rest.text.find('@') {
                Some(at) => {
                    let r = name(&rest.slice(at + 1, rest.text.len()).trimmed())?;
                    (rest.slice(0, at).trimmed(), Some(r))
                }
                None => (rest.trimmed(), None),
            };
            let def = expr(&def, &vocab)?;
            vocab.insert(&new);
            coord_change.push(ChangeEntry { new, def, replaced });
        }
    }
    Ok(SystemFile {
        system,
        flat_output,
        coord_change,
    })
}

/// Parse every document of a file.
pub fn parse_documents(text: &str, default_name: &str) -> Result<Vec<SystemFile>, LoadError> {
    let mut docs = Vec::new();
    let mut cur: Vec<(usize, &str)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim() == "---" {
            if cur.iter().any(|(_, l)| !strip_comment(l).trim().is_empty()) {
                docs.push(document(&cur, default_name)?);
            }
            cur.clear();
        } else {
            cur.push((i + 1, line));
        }
    }
    if cur.iter().any(|(_, l)| !strip_comment(l).trim().is_empty()) {
        docs.push(document(&cur, default_name)?);
    }
    if docs.is_empty() {
        return Err(err(0, 0, "no system definition found"));
    }
    Ok(docs)
}

/// Parse the last document of `text` (for transcripts: the final system).
pub fn parse_system(text: &str, default_name: &str) -> Result<SystemFile, LoadError> {
    Ok(parse_documents(text, default_name)?.pop().unwrap())
}

/// Read `path`; `entry` selects a document (0-based), the last by default.
pub fn load(path: &Path, entry: Option<usize>) -> Result<SystemFile, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(0, 0, format!("cannot read {}: {}", path.display(), e)))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("system");
    let mut docs = parse_documents(&text, stem)?;
    match entry {
        None => Ok(docs.pop().unwrap()),
        Some(k) if k < docs.len() => Ok(docs.swap_remove(k)),
        Some(k) => Err(err(
            0,
            0,
            format!("entry {} requested, file has {}", k, docs.len()),
        )),
    }
}

fn list<T: fmt::Display>(out: &mut String, key: &str, xs: &[T]) {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    if parts.iter().map(String::len).sum::<usize>() < 60 {
        let _ = writeln!(out, "{}: [{}]", key, parts.join(", "));
    } else {
        let _ = writeln!(out, "{}: [", key);
        for (i, p) in parts.iter().enumerate() {
            let sep = if i + 1 < parts.len() { "," } else { "" };
            let _ = writeln!(out, "  {}{}", p, sep);
        }
        let _ = writeln!(out, "]");
    }
}

/// Render a system (and optional flat output) in the file format.
pub fn write_system(sys: &AffineSystem, flat_output: &[Expr]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name: {}", sys.name());
    list(&mut out, "states", sys.states());
    if !sys.params().is_empty() {
        list(&mut out, "params", sys.params());
    }
    list(&mut out, "drift", sys.drift().components());
    list(&mut out, "input b1", sys.input(0).components());
    list(&mut out, "input b2", sys.input(1).components());
    if !flat_output.is_empty() {
        list(&mut out, "flat_output", flat_output);
    }
    out
}

/// One document per transcript stage, the actions as comments.
pub fn write_transcript(entries: &[TranscriptEntry]) -> String {
    let mut out = String::new();
    for (i, e) in entries.iter().enumerate() {
        if i > 0 {
            out.push_str("---\n");
        }
        let _ = writeln!(out, "# stage {}: {}", i, e.label);
        for a in &e.actions {
            let _ = writeln!(out, "#   {}", a);
        }
        out.push_str(&write_system(&e.system, &[]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "# two states\nname: demo\nstates: [x, y]\nparams: [k]\ndrift: [\n  k*y,   # spring\n  0\n]\ninput b1: [0, 1]\ninput b2: [1, 0]\nflat_output: [x]\n";

    #[test]
    fn round_trip() {
        let f = parse_system(TEXT, "x").unwrap();
        assert_eq!(f.system.name(), "demo");
        assert_eq!(f.system.n(), 2);
        assert_eq!(f.flat_output.len(), 1);
        let again = parse_system(&write_system(&f.system, &f.flat_output), "x").unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn errors_carry_positions() {
        let bad = TEXT.replace("k*y", "k*)y");
        let e = parse_system(&bad, "x").unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.col >= 3, "{}", e);
        let e = parse_system(&TEXT.replace("k*y", "q*y"), "x").unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.msg.contains("q"), "{}", e);
    }

    #[test]
    fn three_inputs_rejected() {
        let e = parse_system(&format!("{}input b3: [1, 1]\n", TEXT), "x").unwrap_err();
        assert!(e.msg.contains("two inputs"), "{}", e);
        assert_eq!(e.line, 12);
    }

    #[test]
    fn coord_change_entries() {
        let t = format!("{}coord_change: [z := x + y @ x, w := y**3]\n", TEXT);
        let f = parse_system(&t, "x").unwrap();
        assert_eq!(f.coord_change.len(), 2);
        assert_eq!(f.coord_change[0].replaced.as_deref(), Some("x"));
        let c = f.step1(&ZeroTestConfig::default()).unwrap().unwrap();
        assert_eq!(
            c.final_states(f.system.states()).unwrap(),
            vec![Symbol::from("z"), Symbol::from("w")]
        );
    }

    #[test]
    fn last_document_wins() {
        let t = format!("{}---\n{}", TEXT, TEXT.replace("demo", "second"));
        assert_eq!(parse_system(&t, "x").unwrap().system.name(), "second");
        assert_eq!(parse_documents(&t, "x").unwrap().len(), 2);
    }
}
