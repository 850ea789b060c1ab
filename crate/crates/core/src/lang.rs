//! The closed set of supported programming languages.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A supported source language. Serialized with its Q&A tag name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "c")]
    C,
    #[serde(rename = "c#")]
    CSharp,
    #[serde(rename = "java")]
    Java,
    #[serde(rename = "javascript")]
    JavaScript,
    #[serde(rename = "python")]
    Python,
}

/// How line and block comments are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommentStyle {
    /// `//` and `/* */`
    CFamily,
    /// `#`
    Hash,
}

impl Language {
    pub const ALL: [Language; 5] = [
        Language::C,
        Language::CSharp,
        Language::Java,
        Language::JavaScript,
        Language::Python,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Language::C => "c",
            Language::CSharp => "c#",
            Language::Java => "java",
            Language::JavaScript => "javascript",
            Language::Python => "python",
        }
    }

    /// Map a post tag onto a language. Only exact tag names match.
    pub fn from_tag(tag: &str) -> Option<Language> {
        Language::ALL
            .into_iter()
            .find(|l| l.tag().eq_ignore_ascii_case(tag.trim()))
    }

    pub fn extensions(self) -> &'static [&'static str] {
        match self {
            Language::C => &["c", "h"],
            Language::CSharp => &["cs"],
            Language::Java => &["java"],
            Language::JavaScript => &["js", "mjs", "cjs"],
            Language::Python => &["py"],
        }
    }

    pub fn comment_style(self) -> CommentStyle {
        match self {
            Language::Python => CommentStyle::Hash,
            _ => CommentStyle::CFamily,
        }
    }

    /// Stable one-byte code used by binary artifacts.
    pub(crate) fn code(self) -> u8 {
        match self {
            Language::C => 0,
            Language::CSharp => 1,
            Language::Java => 2,
            Language::JavaScript => 3,
            Language::Python => 4,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Language> {
        Language::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Language::C => "C",
            Language::CSharp => "C#",
            Language::Java => "Java",
            Language::JavaScript => "JavaScript",
            Language::Python => "Python",
        })
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let lang = match lower.as_str() {
            "c" => Language::C,
            "c#" | "csharp" | "cs" => Language::CSharp,
            "java" => Language::Java,
            "javascript" | "js" => Language::JavaScript,
            "python" | "py" => Language::Python,
            _ => return Err(Error::UnsupportedLanguage(s.to_string())),
        };
        Ok(lang)
    }
}
