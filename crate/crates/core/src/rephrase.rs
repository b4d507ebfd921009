//! Caption paraphrasing: a deterministic offline rewrite bank and an
//! interchangeable remote chat-completion client.
//!
//! Both paths are guarded by numeral validation: every number in the source
//! text must survive verbatim in the paraphrase, or the paraphrase is
//! rejected.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RephraseError {
    #[error("rephrase request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("rephrase endpoint returned status {code}: {body}")]
    Status { code: u16, body: String },
    #[error("malformed rephrase response: {0}")]
    Protocol(String),
    #[error("paraphrase dropped or altered numerals: missing {missing:?}")]
    NumeralMismatch { missing: Vec<String> },
}

impl RephraseError {
    /// Transient failures worth retrying; validation and protocol errors
    /// are not.
    pub fn is_retryable(&self) -> bool {
        match self {
            RephraseError::Transport(_) => true,
            RephraseError::Status { code, .. } => *code == 429 || *code >= 500,
            _ => false,
        }
    }
}

/// Instruction block sent ahead of the text to paraphrase.
pub const PARAPHRASE_INSTRUCTIONS: &str = "Paraphrase the following sentences while preserving all factual details, numbers, and structure of the events. Do not add any new information or descriptions. Ensure the paraphrase sounds natural and fluent, but all temporal, spatial, and entity-related details (time, azimuth, elevation, distance, source ID) must remain exactly the same.";

/// Full prompt for paraphrasing one caption.
pub fn build_caption_prompt(text: &str) -> String {
    format!("{PARAPHRASE_INSTRUCTIONS}\nSentence:\n{text}")
}

fn numeral_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"-?\d+(?:\.\d+)?").unwrap())
}

/// All numeral tokens of a text, in order of appearance.
pub fn extract_numerals(text: &str) -> Vec<String> {
    numeral_re()
        .find_iter(text)
        .map(|m| m.as_str().to_string())
        .collect()
}

/// Check that every numeral of `original` appears in `paraphrase` at least
/// as many times (multiset inclusion; extra numerals are allowed, lost or
/// altered ones are not).
pub fn validate_numerals(original: &str, paraphrase: &str) -> Result<(), RephraseError> {
    let mut available: HashMap<String, usize> = HashMap::new();
    for n in extract_numerals(paraphrase) {
        *available.entry(n).or_insert(0) += 1;
    }
    let mut missing = Vec::new();
    for n in extract_numerals(original) {
        match available.get_mut(&n) {
            Some(count) if *count > 0 => *count -= 1,
            _ => missing.push(n),
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(RephraseError::NumeralMismatch { missing })
    }
}

struct RewriteRule {
    pattern: Regex,
    replacement: &'static str,
}

fn rewrite_rules() -> &'static [RewriteRule] {
    static RULES: OnceLock<Vec<RewriteRule>> = OnceLock::new();
    RULES.get_or_init(|| {
        let rule = |pattern: &str, replacement: &'static str| RewriteRule {
            pattern: Regex::new(pattern).unwrap(),
            replacement,
        };
        vec![
            rule(r"^From (\S+) to (\S+),", "Between $1 and $2,"),
            rule(r", (.+?) is heard\.", ", the sound of a $1 is heard."),
            rule(
                r"It is initially at (an azimuth angle|an elevation angle|a distance) of (-?\d+(?:\.\d+)? ?(?:degrees|cm)) and moved finally to (?:an azimuth|an elevation|a distance) of (-?\d+(?:\.\d+)? ?(?:degrees|cm))\.",
                "The source starts at $1 of $2 and ends at $3.",
            ),
            rule(
                r"During this time, the sound source moved to a maximum (azimuth|elevation|distance)(?: angle)? of (-?\d+(?:\.\d+)? ?(?:degrees|cm)) at (\S+) and to a minimum (?:azimuth|elevation|distance)(?: angle)? of (-?\d+(?:\.\d+)? ?(?:degrees|cm)) at (\S+?)\.",
                "During this interval, it reaches its highest $1 of $2 at $3 and its lowest of $4 at $5.",
            ),
            rule(
                r"The sound was coming throughout from an (azimuth|elevation) angle of approximately (-?\d+(?:\.\d+)?) degrees\.",
                "The $1 angle remains steady at approximately $2 degrees throughout.",
            ),
            rule(
                r"The sound was coming throughout from a distance of approximately (-?\d+(?:\.\d+)?cm)\.",
                "The sound is continuously perceived from a distance of around $1.",
            ),
            rule(r"Source id: (\d+)\.", "Source ID: $1."),
        ]
    })
}

/// Deterministic rule-based paraphrase: a fixed table of clause rewrites.
/// Preserves every numeral by construction.
pub fn offline_paraphrase(text: &str) -> String {
    let mut out = text.to_string();
    for rule in rewrite_rules() {
        out = rule
            .pattern
            .replace_all(&out, rule.replacement)
            .into_owned();
    }
    out
}

/// A remote paraphrase backend; one implementation speaks HTTP, tests plug
/// in fakes.
pub trait RemoteRephrase: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, RephraseError>;
    fn provider(&self) -> &str;
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: String,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

/// Chat-completion-style HTTP backend. One POST per paraphrase:
/// `{"model", "messages": [{"role": "user", "content": prompt}]}` with a
/// bearer token, answered by `{"choices": [{"message": {"content"}}]}`.
pub struct HttpRephraseClient {
    endpoint: String,
    model: String,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl HttpRephraseClient {
    pub fn new(endpoint: String, model: String, api_key: String) -> Result<Self, RephraseError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(60))
            .build()?;
        Ok(Self {
            endpoint,
            model,
            api_key,
            client,
        })
    }
}

impl RemoteRephrase for HttpRephraseClient {
    fn complete(&self, prompt: &str) -> Result<String, RephraseError> {
        let request = ChatRequest {
            model: &self.model,
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
        };
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&request)
            .send()?;
        let status = response.status();
        if !status.is_success() {
            return Err(RephraseError::Status {
                code: status.as_u16(),
                body: response.text().unwrap_or_default(),
            });
        }
        let parsed: ChatResponse = response
            .json()
            .map_err(|e| RephraseError::Protocol(e.to_string()))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| RephraseError::Protocol("response has no choices".into()))?;
        Ok(choice.message.content.trim().to_string())
    }

    fn provider(&self) -> &str {
        &self.model
    }
}

/// Paraphrase dispatcher: offline rewrite bank or a remote backend, both
/// behind numeral validation.
pub enum Rephraser {
    Offline,
    Remote(Box<dyn RemoteRephrase>),
}

impl Rephraser {
    pub fn is_offline(&self) -> bool {
        matches!(self, Rephraser::Offline)
    }

    pub fn provider(&self) -> &str {
        match self {
            Rephraser::Offline => "offline",
            Rephraser::Remote(client) => client.provider(),
        }
    }

    /// Paraphrase one caption, rejecting any result that loses a numeral.
    pub fn rephrase(&self, text: &str) -> Result<String, RephraseError> {
        let paraphrase = match self {
            Rephraser::Offline => offline_paraphrase(text),
            Rephraser::Remote(client) => client.complete(&build_caption_prompt(text))?,
        };
        validate_numerals(text, &paraphrase)?;
        Ok(paraphrase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RULE_CAPTION: &str = "From 0.2s to 1.4s, man speaking is heard. It is initially at an azimuth angle of -70 degrees and moved finally to an azimuth of -95 degrees. During this time, the sound source moved to a maximum azimuth angle of -70 degrees at 0.2s and to a minimum azimuth angle of -95 degrees at 1.4s. The sound was coming throughout from an elevation angle of approximately -46 degrees. The sound was coming throughout from a distance of approximately 97cm. Source id: 2.";

    #[test]
    fn offline_paraphrase_rewrites_every_clause() {
        let p = offline_paraphrase(RULE_CAPTION);
        assert!(
            p.starts_with("Between 0.2s and 1.4s, the sound of a man speaking is heard."),
            "{p}"
        );
        assert!(
            p.contains(
                "The source starts at an azimuth angle of -70 degrees and ends at -95 degrees."
            ),
            "{p}"
        );
        assert!(p.contains("it reaches its highest azimuth of -70 degrees at 0.2s and its lowest of -95 degrees at 1.4s."), "{p}");
        assert!(
            p.contains(
                "The elevation angle remains steady at approximately -46 degrees throughout."
            ),
            "{p}"
        );
        assert!(
            p.contains("The sound is continuously perceived from a distance of around 97cm."),
            "{p}"
        );
        assert!(p.ends_with("Source ID: 2."), "{p}");
    }

    #[test]
    fn offline_paraphrase_preserves_numerals() {
        let p = offline_paraphrase(RULE_CAPTION);
        assert!(validate_numerals(RULE_CAPTION, &p).is_ok());
    }

    #[test]
    fn offline_rephraser_is_deterministic() {
        let r = Rephraser::Offline;
        assert_eq!(
            r.rephrase(RULE_CAPTION).unwrap(),
            r.rephrase(RULE_CAPTION).unwrap()
        );
    }

    #[test]
    fn numeral_extraction_handles_signs_and_decimals() {
        assert_eq!(
            extract_numerals("at -70 degrees at 0.3s, 97cm"),
            vec!["-70", "0.3", "97"]
        );
    }

    #[test]
    fn altered_numeral_is_rejected() {
        let err =
            validate_numerals("minimum of -95 degrees", "minimum of -96 degrees").unwrap_err();
        match err {
            RephraseError::NumeralMismatch { missing } => assert_eq!(missing, vec!["-95"]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn text_without_numerals_always_validates() {
        assert!(validate_numerals("no numbers here", "completely different").is_ok());
    }

    #[test]
    fn repeated_numerals_need_matching_multiplicity() {
        assert!(validate_numerals("5 and 5", "5 and 5").is_ok());
        assert!(validate_numerals("5 and 5", "just 5").is_err());
        assert!(validate_numerals("just 5", "5 and 5").is_ok());
    }

    #[test]
    fn prompt_embeds_sentence() {
        let prompt = build_caption_prompt("Hello.");
        assert!(prompt.contains(PARAPHRASE_INSTRUCTIONS));
        assert!(prompt.ends_with("Sentence:\nHello."));
    }

    #[test]
    fn retryability_classification() {
        assert!(RephraseError::Status {
            code: 503,
            body: String::new()
        }
        .is_retryable());
        assert!(RephraseError::Status {
            code: 429,
            body: String::new()
        }
        .is_retryable());
        assert!(!RephraseError::Status {
            code: 400,
            body: String::new()
        }
        .is_retryable());
        assert!(!RephraseError::NumeralMismatch { missing: vec![] }.is_retryable());
    }
}
