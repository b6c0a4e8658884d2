use std::sync::LazyLock;

use regex::Regex;

/// A case-folded word with its byte span in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{L}\p{N}]+").unwrap());

pub fn tokenize(text: &str) -> Vec<Token> {
    WORD.find_iter(text)
        .map(|m| Token {
            text: m.as_str().to_lowercase(),
            start: m.start(),
            end: m.end(),
        })
        .collect()
}

/// Case-folded word sequence of a surface form.
pub fn fold_words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

static BOUNDARY: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[.!?]+\s+\p{Lu}").unwrap());

/// Splits on terminal punctuation followed by whitespace and a capital.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut from = 0;
    for m in BOUNDARY.find_iter(text) {
        let capital = m.end() - m.as_str().chars().last().map_or(0, char::len_utf8);
        let end = m.start() + m.as_str().find(char::is_whitespace).unwrap_or(0);
        out.push(text[from..end].trim());
        from = capital;
    }
    out.push(text[from..].trim());
    out.retain(|s| !s.is_empty());
    out
}

/// The title as sentence 0 followed by the body sentences.
pub fn document_sentences<'a>(title: &'a str, body: &'a str) -> Vec<&'a str> {
    let mut v = vec![title.trim()];
    v.extend(split_sentences(body));
    v
}
