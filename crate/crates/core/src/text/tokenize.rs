use super::TokenSeq;

const CLITICS: [&str; 6] = ["s", "re", "ve", "ll", "d", "m"];

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits text into word, clitic, punctuation and single-digit tokens.
///
/// Rules, applied per whitespace-separated chunk:
/// - every numeric character is its own token;
/// - every character that is neither alphabetic nor numeric is its own token,
///   except apostrophes inside a word;
/// - the English clitics `n't 's 're 've 'll 'd 'm` are split off the word
///   they end.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        tokenize_chunk(chunk, &mut out);
    }
    TokenSeq::from_vec_unchecked(out)
}

fn tokenize_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let n = chars.len();
    let mut i = 0;
    while i < n {
        let c = chars[i];
        if c.is_numeric() {
            out.push(c.to_string());
            i += 1;
        } else if c.is_alphabetic() {
            let mut j = i;
            while j < n
                && (chars[j].is_alphabetic()
                    || (is_apostrophe(chars[j]) && j + 1 < n && chars[j + 1].is_alphabetic()))
            {
                j += 1;
            }
            split_clitics(&chars[i..j], out);
            i = j;
        } else if is_apostrophe(c) && i + 1 < n && chars[i + 1].is_alphabetic() {
            let mut j = i + 1;
            while j < n && chars[j].is_alphabetic() {
                j += 1;
            }
            let rest: String = chars[i + 1..j].iter().collect::<String>().to_lowercase();
            if CLITICS.contains(&rest.as_str()) {
                out.push(chars[i..j].iter().collect());
                i = j;
            } else {
                out.push(c.to_string());
                i += 1;
            }
        } else {
            out.push(c.to_string());
            i += 1;
        }
    }
}

fn split_clitics(word: &[char], out: &mut Vec<String>) {
    if let Some(p) = word.iter().rposition(|&c| is_apostrophe(c)) {
        let suffix: String = word[p + 1..].iter().collect::<String>().to_lowercase();
        if suffix == "t" && p >= 2 && matches!(word[p - 1], 'n' | 'N') {
            split_clitics(&word[..p - 1], out);
            out.push(word[p - 1..].iter().collect());
            return;
        }
        if p > 0 && CLITICS.contains(&suffix.as_str()) {
            split_clitics(&word[..p], out);
            out.push(word[p..].iter().collect());
            return;
        }
    }
    if !word.is_empty() {
        out.push(word.iter().collect());
    }
}

/// True when no character of the token is alphanumeric.
pub fn is_punctuation(token: &str) -> bool {
    !token.chars().any(char::is_alphanumeric)
}

/// True for non-empty tokens made only of lowercase alphabetic characters.
pub fn is_lower_alpha(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| c.is_alphabetic() && c.is_lowercase())
}

/// Lowercases every token and drops punctuation-only tokens.
pub fn normalize_for_eval(s: &TokenSeq) -> TokenSeq {
    TokenSeq::from_vec_unchecked(
        s.iter()
            .filter(|t| !is_punctuation(t))
            .map(|t| t.to_lowercase())
            .collect(),
    )
}
