use std::collections::HashMap;
use std::io::BufRead;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::{PostType, SoPost};
use crate::error::Result;

/// Streaming reader over a row-per-line posts dump.
///
/// Rows that fail to parse, or lack a required attribute, are skipped and
/// counted. Rows whose `PostTypeId` is neither question nor answer are
/// skipped without being counted. An I/O failure ends the stream with an
/// error.
pub struct PostReader<R> {
    input: R,
    line: String,
    skipped: usize,
    failed: bool,
}

pub fn parse_posts_dump<R: BufRead>(input: R) -> PostReader<R> {
    PostReader {
        input,
        line: String::new(),
        skipped: 0,
        failed: false,
    }
}

impl<R: BufRead> PostReader<R> {
    /// Number of malformed rows skipped so far.
    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

impl<R: BufRead> Iterator for PostReader<R> {
    type Item = Result<SoPost>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.line.clear();
            match self.input.read_line(&mut self.line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            }
            let trimmed = self.line.trim();
            if !trimmed.starts_with("<row") {
                continue;
            }
            match parse_row(trimmed) {
                Ok(Some(post)) => return Some(Ok(post)),
                Ok(None) => continue,
                Err(reason) => {
                    log::debug!("skipping malformed row: {reason}");
                    self.skipped += 1;
                }
            }
        }
    }
}

fn parse_row(line: &str) -> Result<Option<SoPost>, String> {
    let mut reader = Reader::from_str(line);
    let start = match reader.read_event() {
        Ok(Event::Empty(e)) | Ok(Event::Start(e)) if e.name().as_ref() == b"row" => e,
        Ok(other) => return Err(format!("unexpected event {other:?}")),
        Err(e) => return Err(e.to_string()),
    };
    if !line.ends_with("/>") && !line.ends_with("</row>") {
        return Err("unterminated row".into());
    }

    let mut id = None;
    let mut type_id = None;
    let mut parent_id = None;
    let mut score = None;
    let mut tags = Vec::new();
    let mut title = String::new();
    let mut body = String::new();

    for attr in start.attributes() {
        let attr = attr.map_err(|e| e.to_string())?;
        let value = attr.unescape_value().map_err(|e| e.to_string())?;
        match attr.key.as_ref() {
            b"Id" => id = Some(value.parse::<u64>().map_err(|e| format!("Id: {e}"))?),
            b"PostTypeId" => {
                type_id = Some(
                    value
                        .parse::<u32>()
                        .map_err(|e| format!("PostTypeId: {e}"))?,
                )
            }
            b"ParentId" => {
                parent_id = Some(value.parse::<u64>().map_err(|e| format!("ParentId: {e}"))?)
            }
            b"Score" => score = Some(value.parse::<i64>().map_err(|e| format!("Score: {e}"))?),
            b"Tags" => tags = parse_tags(&value),
            b"Title" => title = value.into_owned(),
            b"Body" => body = value.into_owned(),
            _ => {}
        }
    }

    let type_id = type_id.ok_or("missing PostTypeId")?;
    let Some(post_type) = PostType::from_type_id(type_id) else {
        return Ok(None);
    };
    let post_id = id.ok_or("missing Id")?;
    if post_id == 0 {
        return Err("Id must be positive".into());
    }
    Ok(Some(SoPost {
        post_id,
        post_type,
        parent_id,
        score: score.ok_or("missing Score")?,
        tags,
        title,
        body,
    }))
}

/// Accepts both `<a><b>` and `|a|b|` tag encodings.
fn parse_tags(raw: &str) -> Vec<String> {
    raw.split(['<', '>', '|'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_ascii_lowercase)
        .collect()
}

/// Give answers their parent question's tags, and its title when they have
/// none. Answers whose parent is not
/// in `posts` keep empty tags and so yield no fragments. Returns the number
/// of such orphans.
pub fn inherit_answer_tags(posts: &mut [SoPost]) -> usize {
    let questions: HashMap<u64, (Vec<String>, String)> = posts
        .iter()
        .filter(|p| p.post_type == PostType::Question)
        .map(|p| (p.post_id, (p.tags.clone(), p.title.clone())))
        .collect();
    let mut orphans = 0;
    for post in posts.iter_mut().filter(|p| p.post_type == PostType::Answer) {
        match post.parent_id.and_then(|id| questions.get(&id)) {
            Some((tags, title)) => {
                post.tags = tags.clone();
                if post.title.is_empty() {
                    post.title = title.clone();
                }
            }
            None if post.tags.is_empty() => orphans += 1,
            None => {}
        }
    }
    orphans
}
