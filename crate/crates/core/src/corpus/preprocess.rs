use std::collections::HashSet;
use std::path::Path;

/// The shipped English stopword list, one token per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

pub const URL_TOKEN: &str = "<url>";
pub const USER_TOKEN: &str = "<user>";
pub const HASHTAG_TOKEN: &str = "<hashtag>";

#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub lowercase: bool,
    pub replace_urls: bool,
    pub replace_mentions: bool,
    pub replace_hashtags: bool,
    pub stopwords: HashSet<String>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            lowercase: true,
            replace_urls: true,
            replace_mentions: true,
            replace_hashtags: true,
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
        }
    }
}

impl PreprocessOptions {
    pub fn without_stopwords(mut self) -> Self {
        self.stopwords.clear();
        self
    }

    /// Replaces the stopword list with the contents of a one-token-per-line file.
    pub fn with_stopwords_file(mut self, path: &Path) -> std::io::Result<Self> {
        self.stopwords = parse_stopwords(&std::fs::read_to_string(path)?);
        Ok(self)
    }
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_owned).collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn is_url(chunk: &str) -> bool {
    let lower = chunk.trim_start_matches(|c: char| !c.is_alphanumeric()).to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

fn prefixed_word(chunk: &str, sigil: char) -> bool {
    let mut chars = chunk.chars();
    chars.next() == Some(sigil) && chars.next().is_some_and(|c| c.is_alphanumeric() || c == '_')
}

/// Tokenizes `text`: whitespace then punctuation splitting, optional lowercasing,
/// placeholder substitution for URLs, mentions and hashtags, and finally
/// stopword removal. Placeholders are ordinary tokens afterwards.
pub fn preprocess(text: &str, options: &PreprocessOptions) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        if options.replace_urls && is_url(chunk) {
            out.push(URL_TOKEN.to_owned());
            continue;
        }
        if options.replace_mentions && prefixed_word(chunk, '@') {
            out.push(USER_TOKEN.to_owned());
            continue;
        }
        if options.replace_hashtags && prefixed_word(chunk, '#') {
            out.push(HASHTAG_TOKEN.to_owned());
            continue;
        }
        for word in chunk.split(|c: char| !is_word_char(c)) {
            let word = word.trim_matches('\'');
            if word.is_empty() {
                continue;
            }
            out.push(if options.lowercase { word.to_lowercase() } else { word.to_owned() });
        }
    }
    out.retain(|t| !options.stopwords.contains(t));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_replace_urls_users_hashtags() {
        let toks = preprocess("Check http://x.co @bob #win", &PreprocessOptions::default());
        assert_eq!(toks, vec!["check", "<url>", "<user>", "<hashtag>"]);
    }

    #[test]
    fn default_stopwords_are_removed() {
        let toks = preprocess("the movie was the best", &PreprocessOptions::default());
        assert_eq!(toks, vec!["movie", "best"]);
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert!(preprocess("", &PreprocessOptions::default()).is_empty());
    }

    #[test]
    fn punctuation_splits_and_apostrophes_survive() {
        let opts = PreprocessOptions::default().without_stopwords();
        assert_eq!(
            preprocess("Don't stop, it's GREAT!!! (really)", &opts),
            vec!["don't", "stop", "it's", "great", "really"]
        );
    }

    #[test]
    fn flags_can_be_turned_off() {
        let opts = PreprocessOptions {
            lowercase: false,
            replace_urls: false,
            replace_mentions: false,
            replace_hashtags: false,
            stopwords: HashSet::new(),
        };
        assert_eq!(preprocess("Go @Bob #Win", &opts), vec!["Go", "Bob", "Win"]);
    }

    #[test]
    fn bare_sigils_are_not_placeholders() {
        let opts = PreprocessOptions::default().without_stopwords();
        assert_eq!(preprocess("@ # www.example.org", &opts), vec!["<url>"]);
    }

    #[test]
    fn shipped_list_keeps_negations() {
        let opts = PreprocessOptions::default();
        assert!(opts.stopwords.contains("the"));
        assert!(!opts.stopwords.contains("not"));
    }
}
