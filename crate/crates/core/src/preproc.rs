//! Source normalization and tokenization shared by training, inference and
//! fingerprinting.

use serde::{Deserialize, Serialize};

use crate::lang::{CommentStyle, Language};

/// Sentinel that replaces the contents of every string or char literal.
pub const STRING_SENTINEL: &str = "STR";

/// An ordered list of non-empty tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenSequence(tokens.into_iter().filter(|t| !t.is_empty()).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Strip comments and collapse whitespace runs to a single space.
///
/// String literals are copied verbatim so comment markers inside them
/// survive. An unterminated block comment swallows the rest of the input.
pub fn normalize(code: &str, language: Language) -> String {
    let style = language.comment_style();
    let chars: Vec<char> = code.chars().collect();
    let mut out = String::with_capacity(code.len());
    let mut pending_space = false;
    let mut i = 0;

    let push = |out: &mut String, pending: &mut bool, c: char| {
        if *pending && !out.is_empty() {
            out.push(' ');
        }
        *pending = false;
        out.push(c);
    };

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();

        if c.is_whitespace() {
            pending_space = true;
            i += 1;
            continue;
        }

        match style {
            CommentStyle::CFamily if c == '/' && next == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                pending_space = true;
                continue;
            }
            CommentStyle::CFamily if c == '/' && next == Some('*') => {
                i += 2;
                while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                    i += 1;
                }
                i = (i + 2).min(chars.len());
                pending_space = true;
                continue;
            }
            CommentStyle::Hash if c == '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                pending_space = true;
                continue;
            }
            _ => {}
        }

        if is_quote(c, language) {
            let end = literal_end(&chars, i, language);
            for &ch in &chars[i..end] {
                push(&mut out, &mut pending_space, ch);
            }
            i = end;
            continue;
        }

        push(&mut out, &mut pending_space, c);
        i += 1;
    }
    out
}

/// Split code into identifier, number, literal-sentinel and punctuation
/// tokens. Every punctuation character is its own token.
pub fn tokenize(code: &str, language: Language) -> TokenSequence {
    let chars: Vec<char> = code.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if is_quote(c, language) {
            i = literal_end(&chars, i, language);
            tokens.push(STRING_SENTINEL.to_string());
        } else if c.is_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < chars.len() && is_ident_continue(chars[i]) {
                i += 1;
            }
            tokens.push(chars[start..i].iter().collect());
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (is_ident_continue(chars[i]) || number_dot(&chars, i)) {
                i += 1;
            }
            tokens.push(chars[start..i].iter().collect());
        } else {
            tokens.push(c.to_string());
            i += 1;
        }
    }
    TokenSequence(tokens)
}

/// `tokenize(normalize(code))`, the form every pipeline stage consumes.
pub fn preprocess(code: &str, language: Language) -> TokenSequence {
    tokenize(&normalize(code, language), language)
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

fn number_dot(chars: &[char], i: usize) -> bool {
    chars[i] == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())
}

fn is_quote(c: char, language: Language) -> bool {
    c == '"' || c == '\'' || (c == '`' && language == Language::JavaScript)
}

/// Index one past the end of the literal opening at `start`.
fn literal_end(chars: &[char], start: usize, language: Language) -> usize {
    let quote = chars[start];
    let triple = language == Language::Python
        && chars.get(start + 1) == Some(&quote)
        && chars.get(start + 2) == Some(&quote);
    if triple {
        let mut i = start + 3;
        while i < chars.len() {
            if chars[i] == '\\' {
                i += 2;
                continue;
            }
            if chars[i] == quote
                && chars.get(i + 1) == Some(&quote)
                && chars.get(i + 2) == Some(&quote)
            {
                return i + 3;
            }
            i += 1;
        }
        return chars.len();
    }

    let multiline = quote == '`';
    let mut i = start + 1;
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 2,
            '\n' if !multiline => return i,
            c if c == quote => return i + 1,
            _ => i += 1,
        }
    }
    chars.len()
}
