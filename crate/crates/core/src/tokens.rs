//! Offline token estimate: every run of word characters and every other
//! non-whitespace character counts as one token.

use std::sync::OnceLock;

use regex::Regex;

fn pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\w+|[^\w\s]").expect("token pattern compiles"))
}

pub fn count_tokens(text: &str) -> usize {
    pattern().find_iter(text).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_words_and_punctuation() {
        assert_eq!(count_tokens(""), 0);
        assert_eq!(count_tokens("   \n\t"), 0);
        assert_eq!(count_tokens("Article 6(1)(a)"), 8);
        assert_eq!(count_tokens("\"yes\" or \"no\""), 7);
        assert_eq!(count_tokens("snake_case"), 1);
    }
}
