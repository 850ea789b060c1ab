//! Synthetic source files and posts dumps for fixtures, demos and
//! benchmarks. Everything is a pure function of the seed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use quick_xml::escape::escape;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lang::Language;

const WORDS: &[&str] = &[
    "count", "index", "buffer", "total", "node", "value", "left", "right", "size", "cache", "item",
    "key", "offset", "limit", "result", "queue", "stack", "parent", "child", "weight", "score",
    "delta", "head", "tail", "path", "name", "width", "height", "level", "depth", "flag", "token",
    "price", "rate", "ratio", "sum", "peak", "hash", "seed", "step", "mask", "shift", "port",
    "host", "user", "frame", "pixel", "color", "row", "col", "cell", "grid", "block", "chunk",
    "page", "file", "line", "word", "letter", "graph", "edge", "vertex", "range", "bound",
    "socket", "packet", "stream", "timer", "clock", "budget",
];

const OPS: &[&str] = &["+", "-", "*", "/", "%", "^", "&", "|"];

const POSITIVE: &[&str] = &[
    "Thanks, works great!",
    "Excellent answer, clean and efficient.",
    "Perfect, solved, thanks!",
    "Great, correct and much improved.",
];

const NEGATIVE: &[&str] = &[
    "Crashes with an error.",
    "Broken: fails with an exception, wrong output.",
    "Terrible bug, corrupted result.",
    "Error again, crash, annoying.",
];

const NEUTRAL: &[&str] = &[
    "I am trying to compute the value inside this method.",
    "Here is the function that reads the buffer and returns the total.",
    "The following snippet shows the loop over the input array.",
    "Consider the code below which walks the list of nodes.",
];

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

fn ident(rng: &mut impl Rng, language: Language) -> String {
    let a = WORDS.choose(rng).unwrap();
    let b = WORDS.choose(rng).unwrap();
    if language == Language::Python {
        format!("{a}_{b}")
    } else {
        format!("{a}{}", capitalize(b))
    }
}

fn function_name(rng: &mut impl Rng, language: Language) -> String {
    const VERBS: &[&str] = &[
        "compute", "update", "find", "merge", "scan", "apply", "build", "check", "reduce", "split",
    ];
    let verb = VERBS.choose(rng).unwrap();
    let noun = WORDS.choose(rng).unwrap();
    match language {
        Language::Python => format!("{verb}_{noun}"),
        Language::CSharp => format!("{}{}", capitalize(verb), capitalize(noun)),
        _ => format!("{verb}{}", capitalize(noun)),
    }
}

/// One function built from a few random statements over a private set of
/// identifiers, so different functions share little vocabulary.
pub fn synth_function(rng: &mut impl Rng, language: Language, name: &str) -> String {
    let names: Vec<String> = (0..6).map(|_| ident(rng, language)).collect();
    let (p0, p1, v) = (&names[0], &names[1], &names[2]);
    let callee = function_name(rng, language);
    let statements = rng.gen_range(3..8);
    let mut out = String::new();
    if language == Language::Python {
        let _ = writeln!(out, "def {name}({p0}, {p1}):");
        let _ = writeln!(out, "    {v} = {p0} {} {p1}", OPS.choose(rng).unwrap());
        for _ in 0..statements {
            let a = names.choose(rng).unwrap();
            let n = rng.gen_range(1..100);
            let op = OPS.choose(rng).unwrap();
            match rng.gen_range(0..5) {
                0 => {
                    let _ = writeln!(out, "    {a} = {v} {op} {n}");
                }
                1 => {
                    let _ = writeln!(
                        out,
                        "    for i in range({p0}):\n        {v} += {callee}(i, {a})"
                    );
                }
                2 => {
                    let _ = writeln!(
                        out,
                        "    if {a} > {n}:\n        {v} = {v} {op} {a}\n    else:\n        {v} -= {p1}"
                    );
                }
                3 => {
                    let _ = writeln!(out, "    while {v} > {n}:\n        {v} = {v} // 2");
                }
                _ => {
                    let _ = writeln!(out, "    {v} = {callee}({a}, {n})");
                }
            }
        }
        let _ = writeln!(out, "    return {v}");
        return out;
    }

    let (decl, loop_decl) = match language {
        Language::JavaScript => ("let", "let"),
        _ => ("int", "int"),
    };
    let header = match language {
        Language::C => format!("int {name}(int {p0}, int {p1})"),
        Language::Java => format!("public static int {name}(int {p0}, int {p1})"),
        Language::CSharp => format!("public static int {name}(int {p0}, int {p1})"),
        Language::JavaScript => format!("function {name}({p0}, {p1})"),
        Language::Python => unreachable!(),
    };
    let _ = writeln!(out, "{header} {{");
    let _ = writeln!(
        out,
        "    {decl} {v} = {p0} {} {p1};",
        OPS.choose(rng).unwrap()
    );
    for extra in &names[3..] {
        let _ = writeln!(out, "    {decl} {extra} = {};", rng.gen_range(0..50));
    }
    for _ in 0..statements {
        let a = names.choose(rng).unwrap();
        let n = rng.gen_range(1..100);
        let op = OPS.choose(rng).unwrap();
        match rng.gen_range(0..5) {
            0 => {
                let _ = writeln!(out, "    {a} = {v} {op} {n};");
            }
            1 => {
                let _ = writeln!(
                    out,
                    "    for ({loop_decl} i = 0; i < {p0}; i++) {{\n        {v} += {callee}(i, {a});\n    }}"
                );
            }
            2 => {
                let _ = writeln!(
                    out,
                    "    if ({a} > {n}) {{\n        {v} = {v} {op} {a};\n    }} else {{\n        {v} -= {p1};\n    }}"
                );
            }
            3 => {
                let _ = writeln!(
                    out,
                    "    while ({v} > {n}) {{\n        {v} = {v} / 2;\n    }}"
                );
            }
            _ => {
                let _ = writeln!(out, "    {v} = {callee}({a}, {n});");
            }
        }
    }
    let _ = writeln!(out, "    return {v};\n}}");
    out
}

fn indent(text: &str, prefix: &str) -> String {
    text.lines()
        .map(|l| {
            if l.is_empty() {
                String::new()
            } else {
                format!("{prefix}{l}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// A compilable-looking source file with `functions` functions.
pub fn synth_source_file(rng: &mut impl Rng, language: Language, functions: usize) -> String {
    let bodies: Vec<String> = (0..functions)
        .map(|_| {
            let name = function_name(rng, language);
            synth_function(rng, language, &name)
        })
        .collect();
    let joined = bodies.join("\n");
    let class = capitalize(WORDS.choose(rng).unwrap()) + "Util";
    match language {
        Language::Java => format!("public class {class} {{\n{}\n}}\n", indent(&joined, "    ")),
        Language::CSharp => format!(
            "namespace Synthetic\n{{\n    public static class {class}\n    {{\n{}\n    }}\n}}\n",
            indent(&joined, "        ")
        ),
        Language::C => format!("#include <stdio.h>\n\n{joined}"),
        _ => joined,
    }
}

/// Source text of roughly `chars` characters.
pub fn synth_code(rng: &mut impl Rng, language: Language, chars: usize) -> String {
    let mut out = String::new();
    while out.len() < chars {
        let name = function_name(rng, language);
        out.push_str(&synth_function(rng, language, &name));
    }
    out
}

/// Write `files` source files under `dir`; returns their paths.
pub fn write_corpus(
    dir: &Path,
    language: Language,
    files: usize,
    functions: usize,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ext = language.extensions()[0];
    (0..files)
        .map(|i| {
            let path = dir.join(format!("file_{i:05}.{ext}"));
            let text = synth_source_file(&mut rng, language, functions);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DumpShape {
    pub questions: usize,
    pub max_answers: usize,
}

fn row(out: &mut String, attrs: &[(&str, String)]) {
    out.push_str("  <row");
    for (name, value) in attrs {
        let v = escape(value.as_str()).replace('\n', "&#xA;");
        let _ = write!(out, " {name}=\"{v}\"");
    }
    out.push_str(" />\n");
}

fn post_body(rng: &mut impl Rng, language: Language) -> String {
    let narrative = [POSITIVE, NEGATIVE, NEUTRAL]
        .choose(rng)
        .unwrap()
        .choose(rng)
        .unwrap();
    let name = function_name(rng, language);
    let code = synth_function(rng, language, &name);
    format!(
        "<p>{narrative}</p>\n<pre><code>{}</code></pre>\n",
        escape(code.as_str())
    )
}

/// A posts dump in the public data-dump row format: questions with ids
/// 10, 20, ..., each followed by its answers.
pub fn synth_posts_dump(language: Language, shape: DumpShape, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n");
    let tag = format!("<{}>", language.tag());
    for q in 1..=shape.questions {
        let qid = (q * 10) as u64;
        let title = format!(
            "Why does my {} {} return the wrong {}?",
            WORDS.choose(&mut rng).unwrap(),
            WORDS.choose(&mut rng).unwrap(),
            WORDS.choose(&mut rng).unwrap()
        );
        let answers = rng.gen_range(0..=shape.max_answers.min(9));
        row(
            &mut out,
            &[
                ("Id", qid.to_string()),
                ("PostTypeId", "1".into()),
                ("Score", rng.gen_range(-3..12).to_string()),
                ("Title", title),
                ("Tags", tag.clone()),
                ("AnswerCount", answers.to_string()),
                ("Body", post_body(&mut rng, language)),
            ],
        );
        for a in 1..=answers {
            row(
                &mut out,
                &[
                    ("Id", (qid + a as u64).to_string()),
                    ("PostTypeId", "2".into()),
                    ("ParentId", qid.to_string()),
                    ("Score", rng.gen_range(-3..12).to_string()),
                    ("Body", post_body(&mut rng, language)),
                ],
            );
        }
    }
    out.push_str("</posts>\n");
    out
}
