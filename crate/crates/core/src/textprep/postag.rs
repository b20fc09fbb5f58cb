//! Rule-based part-of-speech tagging.
//!
//! The bundled [`BaselineTagger`] covers English with a word lexicon
//! (closed-class words plus common open-class vocabulary) and suffix rules;
//! anything with a digit is a numeral and anything unmatched is `Unknown`.
//! A stronger tagger can be plugged in through the [`Tagger`] trait.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Lexical categories counted by the FTNP features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosTag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Conjunction,
    Numeral,
    Pronoun,
    Determiner,
    Postposition,
    Punctuation,
    Unknown,
}

impl PosTag {
    /// Every tag, in the order feature slots use.
    pub const ALL: [PosTag; 11] = [
        PosTag::Noun,
        PosTag::Verb,
        PosTag::Adjective,
        PosTag::Adverb,
        PosTag::Conjunction,
        PosTag::Numeral,
        PosTag::Pronoun,
        PosTag::Determiner,
        PosTag::Postposition,
        PosTag::Punctuation,
        PosTag::Unknown,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PosTag::Noun => "Noun",
            PosTag::Verb => "Verb",
            PosTag::Adjective => "Adjective",
            PosTag::Adverb => "Adverb",
            PosTag::Conjunction => "Conjunction",
            PosTag::Numeral => "Numeral",
            PosTag::Pronoun => "Pronoun",
            PosTag::Determiner => "Determiner",
            PosTag::Postposition => "Postposition",
            PosTag::Punctuation => "Punctuation",
            PosTag::Unknown => "Unknown",
        }
    }

    /// Index into [`PosTag::ALL`].
    pub fn slot(&self) -> usize {
        Self::ALL.iter().position(|t| t == self).expect("tag listed")
    }
}

/// A tagger failure for one token; [`pos_tag`] falls back to `Unknown`.
#[derive(Debug, Clone)]
pub struct TagError(pub String);

impl std::fmt::Display for TagError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "tagger failure: {}", self.0)
    }
}

impl std::error::Error for TagError {}

/// Pluggable single-token tagger.
pub trait Tagger: Send + Sync {
    fn tag(&self, token: &str) -> Result<PosTag, TagError>;

    /// Stable name stored in model files; only bundled taggers can be
    /// restored by name.
    fn name(&self) -> &str;
}

/// Tags every token; a failing tagger yields `Unknown` for that token.
pub fn pos_tag(tokens: &[String], tagger: &dyn Tagger) -> Vec<(String, PosTag)> {
    tokens
        .iter()
        .map(|t| (t.clone(), tagger.tag(t).unwrap_or(PosTag::Unknown)))
        .collect()
}

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any", "all",
    "both", "either", "neither", "another", "such",
];

const PRONOUNS: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "my", "your",
    "his", "its", "our", "their", "mine", "yours", "ours", "theirs", "myself", "itself", "who",
    "whom", "whose", "which", "what", "someone", "something", "anyone", "anything", "everyone",
    "everything", "nobody", "nothing",
];

const CONJUNCTIONS: &[&str] = &[
    "and", "or", "but", "nor", "so", "yet", "because", "if", "while", "although", "though",
    "unless", "since", "whereas", "when", "whenever", "after", "before", "until", "as",
];

const POSTPOSITIONS: &[&str] = &[
    "in", "on", "at", "by", "with", "without", "from", "to", "of", "for", "into", "onto", "over",
    "under", "between", "through", "during", "against", "about", "above", "below", "across",
    "behind", "beside", "near", "via", "within", "upon",
];

const VERBS: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "being", "am", "have", "has", "had", "do", "does",
    "did", "can", "could", "will", "would", "should", "shall", "must", "may", "might", "need",
    "needs", "want", "wants", "make", "makes", "made", "get", "gets", "got", "go", "goes", "went",
    "come", "comes", "came", "see", "sees", "seen", "show", "shows", "shown", "use", "uses",
    "used", "work", "works", "worked", "fail", "fails", "failed", "break", "breaks", "broke",
    "broken", "fix", "fixes", "fixed", "add", "adds", "added", "remove", "removes", "removed",
    "change", "changes", "changed", "open", "opens", "opened", "close", "closes", "closed",
    "create", "creates", "created", "delete", "deletes", "deleted", "send", "sends", "sent",
    "receive", "receives", "received", "check", "checks", "checked", "test", "tests", "tested",
    "run", "runs", "ran", "load", "loads", "loaded", "save", "saves", "saved", "click", "clicks",
    "clicked", "display", "displays", "displayed", "appear", "appears", "appeared", "occur",
    "occurs", "occurred", "happen", "happens", "happened", "update", "updates", "updated",
    "write", "writes", "wrote", "written", "read", "reads", "please", "try", "tries", "tried",
    "verify", "verifies", "verified", "review", "reviews", "reviewed", "crash", "crashes",
    "crashed", "freeze", "freezes", "froze", "frozen", "synchronize", "synchronizes", "support",
    "supports", "supported", "don't", "doesn't", "didn't", "can't", "cannot", "won't",
    "wouldn't", "shouldn't", "isn't", "aren't", "wasn't", "weren't",
];

const NOUNS: &[&str] = &[
    "order", "orders", "server", "servers", "page", "pages", "room", "rooms", "service",
    "services", "e-mail", "email", "emails", "mail", "message", "messages", "screen", "screens",
    "user", "users", "customer", "customers", "guest", "guests", "hotel", "hotels", "hospital",
    "system", "systems", "version", "versions", "request", "requests", "problem", "problems",
    "issue", "issues", "error", "errors", "bug", "bugs", "crash", "report", "reports", "button",
    "buttons", "menu", "menus", "list", "lists", "panel", "panels", "design", "designs", "icon",
    "icons", "logo", "logos", "image", "images", "video", "videos", "wall", "walls", "record",
    "records", "data", "database", "databases", "table", "tables", "column", "columns", "filter",
    "filters", "address", "addresses", "connection", "connections", "network", "networks",
    "device", "devices", "television", "televisions", "tv", "channel", "channels", "content",
    "contents", "theme", "themes", "language", "languages", "setting", "settings", "login",
    "logout", "password", "passwords", "account", "accounts", "application", "applications",
    "app", "apps", "interface", "interfaces", "feature", "features", "task", "tasks", "plan",
    "plans", "meeting", "meetings", "release", "releases", "schedule", "schedules", "document",
    "documents", "documentation", "test", "protocol", "protocols", "number", "numbers", "code",
    "codes", "file", "files", "folder", "folders", "backup", "backups", "log", "logs", "module",
    "modules", "component", "components", "layout", "layouts", "color", "colors", "font",
    "fonts", "text", "texts", "title", "titles", "label", "labels", "sync", "synchronization",
    "player", "players", "media", "screenshot", "screenshots", "api", "endpoint", "endpoints",
    "proxy", "cache", "memory", "cpu", "browser", "browsers", "wifi", "ethernet", "cable",
    "signal", "signals", "remote", "control", "controls", "checkout", "mode", "modes", "baby",
    "mother", "distinction", "support", "steps", "regression", "scenario", "scenarios", "case",
    "cases", "web", "cloud", "admin", "management", "info", "information", "detail", "details",
    "time", "date", "day", "week", "month", "year", "status", "state", "queue", "job", "jobs",
    "team", "member", "members", "developer", "developers", "tester", "testers", "designer",
    "designers", "leader", "leaders", "null",
];

const ADJECTIVES: &[&str] = &[
    "new", "old", "good", "bad", "wrong", "correct", "incorrect", "broken", "slow", "fast",
    "empty", "full", "big", "small", "large", "long", "short", "high", "low", "same", "different",
    "multiple", "single", "main", "major", "minor", "critical", "urgent", "important", "missing",
    "invalid", "valid", "visible", "invisible", "active", "inactive", "available", "unavailable",
    "undefined", "unexpected", "random", "blank", "current", "previous", "next", "last", "first",
    "second", "third", "successful", "unsuccessful", "ready", "possible", "impossible",
];

const ADVERBS: &[&str] = &[
    "not", "very", "too", "also", "again", "always", "never", "sometimes", "often", "usually",
    "here", "there", "now", "then", "already", "still", "just", "only", "even", "once", "twice",
    "together", "independently", "automatically", "manually", "properly", "correctly",
    "immediately",
];

/// Bundled English tagger: word lexicon, then digit test, then suffix
/// rules, then `Unknown`.
pub struct BaselineTagger {
    lexicon: BTreeMap<&'static str, PosTag>,
}

impl Default for BaselineTagger {
    fn default() -> Self {
        Self::new()
    }
}

impl BaselineTagger {
    pub const NAME: &'static str = "baseline-en";

    pub fn new() -> Self {
        let mut lexicon = BTreeMap::new();
        // Later inserts win; order the open classes first so the
        // closed-class reading of an ambiguous word is kept.
        for (words, tag) in [
            (NOUNS, PosTag::Noun),
            (ADJECTIVES, PosTag::Adjective),
            (ADVERBS, PosTag::Adverb),
            (VERBS, PosTag::Verb),
            (POSTPOSITIONS, PosTag::Postposition),
            (CONJUNCTIONS, PosTag::Conjunction),
            (PRONOUNS, PosTag::Pronoun),
            (DETERMINERS, PosTag::Determiner),
        ] {
            for w in words {
                lexicon.insert(*w, tag);
            }
        }
        BaselineTagger { lexicon }
    }

    fn suffix_rule(word: &str) -> Option<PosTag> {
        let n = word.chars().count();
        let ends = |s: &str| word.ends_with(s);
        if ends("n't") {
            return Some(PosTag::Verb);
        }
        if n >= 5 && ends("ing") {
            return Some(PosTag::Verb);
        }
        if n >= 4 && ends("ed") {
            return Some(PosTag::Verb);
        }
        if n >= 4 && ends("ly") {
            return Some(PosTag::Adverb);
        }
        if n >= 5 && (ends("tion") || ends("sion") || ends("ment") || ends("ness")) {
            return Some(PosTag::Noun);
        }
        if n >= 4 && ends("s") && !ends("ss") && !ends("us") && !ends("is") {
            return Some(PosTag::Verb);
        }
        None
    }
}

impl Tagger for BaselineTagger {
    fn tag(&self, token: &str) -> Result<PosTag, TagError> {
        if !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric()) {
            return Ok(PosTag::Punctuation);
        }
        // Look the token up with edge punctuation trimmed so "it." and
        // "(error)" still resolve.
        let trimmed = token.trim_matches(|c: char| !c.is_alphanumeric());
        if trimmed.is_empty() {
            return Ok(PosTag::Punctuation);
        }
        if let Some(tag) = self.lexicon.get(trimmed) {
            return Ok(*tag);
        }
        if trimmed.chars().any(|c| c.is_ascii_digit()) {
            return Ok(PosTag::Numeral);
        }
        Ok(Self::suffix_rule(trimmed).unwrap_or(PosTag::Unknown))
    }

    fn name(&self) -> &str {
        Self::NAME
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag_all(words: &[&str]) -> Vec<PosTag> {
        let tagger = BaselineTagger::new();
        words.iter().map(|w| tagger.tag(w).unwrap()).collect()
    }

    #[test]
    fn empty_input_tags_to_nothing() {
        let tagger = BaselineTagger::new();
        assert!(pos_tag(&[], &tagger).is_empty());
    }

    #[test]
    fn baseline_lexicon_and_suffix_rules() {
        assert_eq!(
            tag_all(&["the", "order", "fails"]),
            vec![PosTag::Determiner, PosTag::Noun, PosTag::Verb]
        );
    }

    #[test]
    fn out_of_lexicon_word_is_unknown() {
        assert_eq!(tag_all(&["xqzzy"]), vec![PosTag::Unknown]);
    }

    #[test]
    fn digits_are_numerals() {
        assert_eq!(
            tag_all(&["v1.0.9", "42", "2021-03-01"]),
            vec![PosTag::Numeral, PosTag::Numeral, PosTag::Numeral]
        );
    }

    #[test]
    fn punctuation_and_edge_trimming() {
        assert_eq!(
            tag_all(&["...", "it.", "(error)"]),
            vec![PosTag::Punctuation, PosTag::Pronoun, PosTag::Noun]
        );
    }

    #[test]
    fn suffix_cues() {
        assert_eq!(tag_all(&["loading"]), vec![PosTag::Verb]);
        assert_eq!(tag_all(&["configured"]), vec![PosTag::Verb]);
        assert_eq!(tag_all(&["suddenly"]), vec![PosTag::Adverb]);
        assert_eq!(tag_all(&["rotation"]), vec![PosTag::Noun]);
        assert_eq!(tag_all(&["refreshment"]), vec![PosTag::Noun]);
        assert_eq!(tag_all(&["reboots"]), vec![PosTag::Verb]);
    }

    #[test]
    fn output_length_matches_input_length() {
        let tagger = BaselineTagger::new();
        let tokens = normalize_fixture();
        let tagged = pos_tag(&tokens, &tagger);
        assert_eq!(tagged.len(), tokens.len());
    }

    fn normalize_fixture() -> Vec<String> {
        crate::textprep::normalize_tokenize("Server v1.0.9 Test Request Please test it.")
    }

    struct FailingTagger;
    impl Tagger for FailingTagger {
        fn tag(&self, _token: &str) -> Result<PosTag, TagError> {
            Err(TagError("boom".into()))
        }
        fn name(&self) -> &str {
            "failing"
        }
    }

    #[test]
    fn tagger_failure_falls_back_to_unknown() {
        let tagged = pos_tag(&["anything".to_string()], &FailingTagger);
        assert_eq!(tagged[0].1, PosTag::Unknown);
    }
}
