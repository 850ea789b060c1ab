use std::borrow::Cow;
use std::sync::LazyLock;

use regex::Regex;

use super::{CodeFragment, SoPost, MIN_FRAGMENT_CHARS};

// Group 1: a <pre><code> block. Group 2: an inline <code> span.
static CODE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?is)<pre[^>]*>\s*<code[^>]*>(.*?)</code>\s*</pre>|<code[^>]*>(.*?)</code>")
        .unwrap()
});
static TAG_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)<[^>]*>").unwrap());

/// Count of characters that are not Unicode whitespace.
pub fn non_whitespace_len(text: &str) -> usize {
    text.chars().filter(|c| !c.is_whitespace()).count()
}

/// Split a post body into code fragments, each paired with the narrative
/// between the previous code block (or the start of the body) and itself.
///
/// Block code (`<pre><code>`) always forms a fragment. An inline `<code>`
/// span forms one only when it is large enough to pass the size filter;
/// otherwise it is narrative. Posts without a supported language tag yield
/// nothing.
pub fn extract_fragments(post: &SoPost) -> Vec<CodeFragment> {
    let Some(language) = post.language() else {
        return Vec::new();
    };

    let mut fragments = Vec::new();
    let mut narrative_start = 0;
    for caps in CODE_RE.captures_iter(&post.body) {
        let whole = caps.get(0).unwrap();
        let code = match (caps.get(1), caps.get(2)) {
            (Some(block), _) => unescape_html(block.as_str()),
            (None, Some(inline)) => {
                let text = unescape_html(inline.as_str());
                if non_whitespace_len(&text) <= MIN_FRAGMENT_CHARS {
                    continue;
                }
                text
            }
            (None, None) => unreachable!("one alternative always matches"),
        };
        if code.trim().is_empty() {
            continue;
        }
        let preceding = narrative(&post.body[narrative_start..whole.start()]);
        fragments.push(CodeFragment {
            post_id: post.post_id,
            frag_id: fragments.len() as u32,
            language,
            preceding_text: preceding,
            code: code.into_owned(),
        });
        narrative_start = whole.end();
    }
    fragments
}

/// True iff the fragment passes the size constraint. The language
/// constraint already holds for every extracted fragment.
pub fn accept_fragment(fragment: &CodeFragment) -> bool {
    non_whitespace_len(&fragment.code) > MIN_FRAGMENT_CHARS
}

/// Extract and filter in one step.
pub fn select_fragments(post: &SoPost) -> Vec<CodeFragment> {
    extract_fragments(post)
        .into_iter()
        .filter(accept_fragment)
        .collect()
}

fn narrative(html: &str) -> String {
    let text = TAG_RE.replace_all(html, " ");
    let text = unescape_html(&text);
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn unescape_html(text: &str) -> Cow<'_, str> {
    quick_xml::escape::unescape_with(text, |entity| match entity {
        "nbsp" => Some(" "),
        "lt" => Some("<"),
        "gt" => Some(">"),
        "amp" => Some("&"),
        "quot" => Some("\""),
        "apos" => Some("'"),
        _ => None,
    })
    .unwrap_or(Cow::Borrowed(text))
}
