use crate::error::{Error, Result};

/// Paragraphs shorter than this (in characters, after trimming) are merged
/// into the paragraph that follows.
pub const MIN_PARAGRAPH_CHARS: usize = 20;

/// Record separator line used by paragraph dump files.
pub const RECORD_SEPARATOR: &str = "\u{1e}";

/// Splits on blank-line runs, trims, and merges short fragments forward.
pub fn split_paragraphs(text: &str) -> Result<Vec<String>> {
    if text.trim().is_empty() {
        return Err(Error::EmptyText);
    }
    let normalized = text.replace("\r\n", "\n").replace('\r', "\n");

    let mut raw: Vec<String> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in normalized.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                raw.push(current.join("\n").trim().to_string());
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        raw.push(current.join("\n").trim().to_string());
    }

    let mut out = Vec::with_capacity(raw.len());
    let mut pending: Option<String> = None;
    let last = raw.len().saturating_sub(1);
    for (i, para) in raw.into_iter().enumerate() {
        let para = match pending.take() {
            Some(prefix) => format!("{prefix}\n{para}"),
            None => para,
        };
        if para.chars().count() < MIN_PARAGRAPH_CHARS && i < last {
            pending = Some(para);
        } else {
            out.push(para);
        }
    }
    Ok(out)
}

/// Paragraphs separated by lines containing only the record separator.
pub fn parse_paragraph_records(text: &str) -> Vec<String> {
    let normalized = text.replace("\r\n", "\n");
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in normalized.split('\n') {
        if line == RECORD_SEPARATOR {
            out.push(current.join("\n"));
            current.clear();
        } else {
            current.push(line);
        }
    }
    let tail = current.join("\n");
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

pub fn format_paragraph_records(paragraphs: &[String]) -> String {
    let mut out = String::new();
    for (i, p) in paragraphs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
            out.push_str(RECORD_SEPARATOR);
            out.push('\n');
        }
        out.push_str(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_paragraphs_merge_forward() {
        assert_eq!(split_paragraphs("A.\n\nB.").unwrap(), vec!["A.\nB."]);
        assert_eq!(
            split_paragraphs("CHAPTER I\n\nIt was a dark and stormy night.").unwrap(),
            vec!["CHAPTER I\nIt was a dark and stormy night."]
        );
    }

    #[test]
    fn canonical_split() {
        let text = "The first paragraph is long enough.\nIt wraps.\n\n\n\
                    The second paragraph is also long.\n  \t\n\
                    And a third one closes the text.\n";
        let p = split_paragraphs(text).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p[0], "The first paragraph is long enough.\nIt wraps.");
        assert_eq!(p[2], "And a third one closes the text.");
    }

    #[test]
    fn crlf_matches_lf() {
        let lf = "One paragraph of adequate length.\n\nAnother paragraph of adequate length.\n";
        let crlf = lf.replace('\n', "\r\n");
        assert_eq!(
            split_paragraphs(lf).unwrap(),
            split_paragraphs(&crlf).unwrap()
        );
    }

    #[test]
    fn empty_text() {
        assert!(matches!(split_paragraphs("  \n\n "), Err(Error::EmptyText)));
    }

    #[test]
    fn record_round_trip() {
        let paras = vec![
            "first\nline two".to_string(),
            String::new(),
            "third".to_string(),
        ];
        assert_eq!(
            parse_paragraph_records(&format_paragraph_records(&paras)),
            paras
        );
    }
}
