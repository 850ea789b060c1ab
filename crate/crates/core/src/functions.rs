//! Split source files into function-definition units.
//!
//! C and Java use brace matching behind a signature pattern; Python uses
//! `def` blocks delimited by indentation. C# and JavaScript files are taken
//! whole. Any file in which nothing is found also comes back whole, so a
//! non-empty input always yields at least one unit.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::lang::Language;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionUnit {
    /// Empty for whole-file units.
    pub name: String,
    pub body_text: String,
    /// 1-based, inclusive.
    pub start_line: usize,
    pub end_line: usize,
    /// Byte range of `body_text` within the source.
    pub byte_range: (usize, usize),
}

pub fn extract_functions(source: &str, language: Language) -> Vec<FunctionUnit> {
    if source.is_empty() {
        return Vec::new();
    }
    let units = match language {
        Language::C | Language::Java => match brace_units(source, language) {
            Ok(units) => units,
            Err(pos) => {
                log::warn!("unbalanced braces near byte {pos}; reviewing the whole file");
                Vec::new()
            }
        },
        Language::Python => indent_units(source),
        Language::CSharp | Language::JavaScript => Vec::new(),
    };
    if units.is_empty() {
        vec![whole_file(source)]
    } else {
        units
    }
}

fn whole_file(source: &str) -> FunctionUnit {
    unit(source, String::new(), 0, source.len())
}

fn unit(source: &str, name: String, start: usize, end: usize) -> FunctionUnit {
    FunctionUnit {
        name,
        body_text: source[start..end].to_string(),
        start_line: line_of(source, start),
        end_line: line_of(source, end.saturating_sub(1).max(start)),
        byte_range: (start, end),
    }
}

fn line_of(source: &str, byte: usize) -> usize {
    source.as_bytes()[..byte]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

/// Per-byte flag: true where the byte is inside a comment, string or char
/// literal, or (for C) a preprocessor line.
fn code_mask(source: &str, language: Language) -> Vec<bool> {
    let b = source.as_bytes();
    let mut masked = vec![false; b.len()];
    let mut i = 0;
    let mut line_start = true;
    while i < b.len() {
        let start = i;
        match b[i] {
            b'/' if b.get(i + 1) == Some(&b'/') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                i += 2;
                while i < b.len() && !(b[i] == b'*' && b.get(i + 1) == Some(&b'/')) {
                    i += 1;
                }
                i = (i + 2).min(b.len());
            }
            b'#' if language == Language::C && line_start => {
                // directives continue across backslash-newlines
                while i < b.len() && !(b[i] == b'\n' && (i == 0 || b[i - 1] != b'\\')) {
                    i += 1;
                }
            }
            q @ (b'"' | b'\'') => {
                i += 1;
                while i < b.len() && b[i] != q && b[i] != b'\n' {
                    i += if b[i] == b'\\' { 2 } else { 1 };
                }
                i = (i + 1).min(b.len());
            }
            c => {
                if c == b'\n' {
                    line_start = true;
                } else if !c.is_ascii_whitespace() {
                    line_start = false;
                }
                i += 1;
                continue;
            }
        }
        masked[start..i].iter_mut().for_each(|m| *m = true);
        line_start = false;
    }
    masked
}

static SIGNATURE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?s)([A-Za-z_$][\w$]*)\s*\((?:[^()]|\([^()]*\))*\)\s*(?:(?:const|noexcept|override|final)\s*|throws\s+[\w.$<>,\s]+)*$",
    )
    .unwrap()
});

const NOT_FUNCTIONS: &[&str] = &[
    "if",
    "for",
    "while",
    "switch",
    "catch",
    "synchronized",
    "do",
    "else",
    "try",
    "return",
    "sizeof",
    "new",
    "foreach",
    "using",
    "lock",
    "with",
    "elif",
    "when",
];

/// The function name if `header` (masked text before a `{`) is a signature.
fn signature_name(header: &str) -> Option<String> {
    let caps = SIGNATURE_RE.captures(header)?;
    let name = caps.get(1)?;
    if NOT_FUNCTIONS.contains(&name.as_str()) {
        return None;
    }
    let prefix = header[..name.start()].trim_end();
    if prefix.ends_with("new")
        && !prefix[..prefix.len() - 3].ends_with(|c: char| c.is_alphanumeric() || c == '_')
    {
        return None;
    }
    if prefix.ends_with(['.', '=', '>', '(', ',', '?', ':']) && !prefix.ends_with("::") {
        return None;
    }
    let mut depth = 0i32;
    for c in prefix.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '=' if depth == 0 => return None,
            _ => {}
        }
    }
    Some(name.as_str().to_string())
}

/// Top-level and class-member functions. `Err(pos)` on unbalanced braces.
fn brace_units(source: &str, language: Language) -> Result<Vec<FunctionUnit>, usize> {
    let mask = code_mask(source, language);
    let bytes = source.as_bytes();
    let significant = |i: usize| !mask[i];
    let mut units = Vec::new();
    let mut depth = 0usize;
    let mut stmt_start = 0usize;
    let mut i = 0;

    while i < bytes.len() {
        if !significant(i) {
            i += 1;
            continue;
        }
        match bytes[i] {
            b'{' => {
                let header: String = source[stmt_start..i]
                    .char_indices()
                    .map(|(off, c)| if mask[stmt_start + off] { ' ' } else { c })
                    .collect();
                if let Some(name) = signature_name(&header) {
                    let close = matching_brace(bytes, &mask, i).ok_or(i)?;
                    let start = (stmt_start..i)
                        .find(|&j| significant(j) && !bytes[j].is_ascii_whitespace())
                        .unwrap_or(i);
                    units.push(unit(source, name, start, close + 1));
                    i = close + 1;
                    stmt_start = i;
                    continue;
                }
                depth += 1;
                stmt_start = i + 1;
            }
            b'}' => {
                depth = depth.checked_sub(1).ok_or(i)?;
                stmt_start = i + 1;
            }
            b';' => stmt_start = i + 1,
            _ => {}
        }
        i += 1;
    }
    if depth != 0 {
        return Err(bytes.len());
    }
    Ok(units)
}

fn matching_brace(bytes: &[u8], mask: &[bool], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for i in open..bytes.len() {
        if mask[i] {
            continue;
        }
        match bytes[i] {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

static DEF_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(?:async\s+)?def\s+([A-Za-z_]\w*)").unwrap());

struct Line<'a> {
    start: usize,
    end: usize,
    text: &'a str,
    /// Blank, comment-only, or inside a multi-line string.
    ignorable: bool,
}

fn indent_width(text: &str) -> usize {
    let mut width = 0;
    for c in text.chars() {
        match c {
            ' ' => width += 1,
            '\t' => width = (width / 8 + 1) * 8,
            _ => break,
        }
    }
    width
}

fn python_lines(source: &str) -> Vec<Line<'_>> {
    let mut lines = Vec::new();
    let mut open_string: Option<&str> = None;
    let mut offset = 0;
    for raw in source.split_inclusive('\n') {
        let text = raw.trim_end_matches(['\n', '\r']);
        let trimmed = text.trim_start();
        let inside = open_string.is_some();
        let mut rest = text;
        loop {
            let next = match open_string {
                Some(delim) => rest.find(delim).map(|p| (p, delim)),
                None => ["\"\"\"", "'''"]
                    .iter()
                    .filter_map(|d| rest.find(d).map(|p| (p, *d)))
                    .min_by_key(|&(p, _)| p),
            };
            let Some((pos, delim)) = next else { break };
            if open_string.is_none() && rest[..pos].contains('#') {
                break;
            }
            open_string = if open_string.is_some() {
                None
            } else {
                Some(delim)
            };
            rest = &rest[pos + 3..];
        }
        lines.push(Line {
            start: offset,
            end: offset + text.len(),
            text,
            ignorable: inside || trimmed.is_empty() || trimmed.starts_with('#'),
        });
        offset += raw.len();
    }
    lines
}

fn indent_units(source: &str) -> Vec<FunctionUnit> {
    let lines = python_lines(source);
    let mut units = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line = &lines[i];
        let Some(caps) = (!line.ignorable)
            .then(|| DEF_RE.captures(line.text))
            .flatten()
        else {
            i += 1;
            continue;
        };
        let indent = indent_width(line.text);
        let mut first = i;
        while first > 0 {
            let prev = &lines[first - 1];
            if !prev.ignorable
                && prev.text.trim_start().starts_with('@')
                && indent_width(prev.text) == indent
            {
                first -= 1;
            } else {
                break;
            }
        }
        let mut last = i;
        let mut j = i + 1;
        while j < lines.len() {
            let l = &lines[j];
            if !l.ignorable && indent_width(l.text) <= indent {
                break;
            }
            if !l.text.trim().is_empty() {
                last = j;
            }
            j += 1;
        }
        units.push(unit(
            source,
            caps[1].to_string(),
            lines[first].start,
            lines[last].end,
        ));
        i = j;
    }
    units
}
