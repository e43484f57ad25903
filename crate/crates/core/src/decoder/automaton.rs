use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::scorer::{Segmentation, Vocab, EOS, UNK};
use crate::text::{BpeModel, TokenSeq, END_OF_WORD};

/// Symbol fed to the positive matcher at every word boundary.
const BOUNDARY: u32 = u32::MAX - 1;
/// Word id for words that appear in no negative or positional constraint.
const OTHER_WORD: u32 = u32::MAX;
const MAX_POSITIVE: usize = 64;

/// Aho-Corasick automaton over `u32` symbols.
#[derive(Clone, Debug, Default)]
struct Matcher {
    goto: Vec<BTreeMap<u32, u32>>,
    fail: Vec<u32>,
    depth: Vec<u32>,
    /// Bitmask of patterns ending at this node or any suffix of it.
    out: Vec<u64>,
}

impl Matcher {
    /// `mark(i)` is the output bit set recorded for pattern `i`.
    fn build(patterns: &[Vec<u32>], mark: impl Fn(usize) -> u64) -> (Matcher, Vec<Vec<u32>>) {
        let mut m = Matcher {
            goto: vec![BTreeMap::new()],
            fail: vec![0],
            depth: vec![0],
            out: vec![0],
        };
        let mut paths = Vec::with_capacity(patterns.len());
        for (pi, p) in patterns.iter().enumerate() {
            let mut node = 0u32;
            let mut path = vec![0u32];
            for &sym in p {
                node = match m.goto[node as usize].get(&sym) {
                    Some(&n) => n,
                    None => {
                        let n = m.goto.len() as u32;
                        m.goto.push(BTreeMap::new());
                        m.fail.push(0);
                        m.depth.push(m.depth[node as usize] + 1);
                        m.out.push(0);
                        m.goto[node as usize].insert(sym, n);
                        n
                    }
                };
                path.push(node);
            }
            m.out[node as usize] |= mark(pi);
            paths.push(path);
        }
        let mut queue: VecDeque<u32> = m.goto[0].values().copied().collect();
        while let Some(node) = queue.pop_front() {
            let edges: Vec<(u32, u32)> = m.goto[node as usize].iter().map(|(&s, &n)| (s, n)).collect();
            for (sym, child) in edges {
                let mut f = m.fail[node as usize];
                let target = loop {
                    if let Some(&n) = m.goto[f as usize].get(&sym) {
                        break n;
                    }
                    if f == 0 {
                        break 0;
                    }
                    f = m.fail[f as usize];
                };
                m.fail[child as usize] = target;
                m.out[child as usize] |= m.out[target as usize];
                queue.push_back(child);
            }
        }
        (m, paths)
    }

    fn next(&self, mut node: u32, sym: u32) -> u32 {
        loop {
            if let Some(&n) = self.goto[node as usize].get(&sym) {
                return n;
            }
            if node == 0 {
                return 0;
            }
            node = self.fail[node as usize];
        }
    }
}

/// Per-hypothesis constraint state. Reconstructible from the token prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct CursorState {
    pos_node: u32,
    met: u64,
    pub(crate) met_count: u32,
    /// `met_count` plus the tokens of the longest partial match of an unmet
    /// phrase. Used to pick the hypothesis's bank.
    pub(crate) progress: u32,
    neg_node: u32,
    /// Index into the prefix (BOS at 0) where the current word starts.
    pub(crate) word_start: u32,
    words_done: u32,
    prefix_alive: u64,
    pub(crate) at_boundary: bool,
}

/// Constraints compiled against a scorer vocabulary.
#[derive(Clone, Debug)]
pub struct ConstraintAutomaton {
    segmentation: Segmentation,
    positive: Matcher,
    positive_paths: Vec<Vec<u32>>,
    positive_patterns: Vec<Vec<u32>>,
    /// Token count (boundaries excluded) of each pattern prefix, by depth.
    positive_tokens_upto: Vec<Vec<u32>>,
    positive_len: Vec<u32>,
    total: u32,
    negative: Matcher,
    words: HashMap<String, u32>,
    positional: BTreeSet<(u32, u32)>,
    prefix_bans: Vec<Vec<u32>>,
    needs_words: bool,
    source: ConstraintSet,
}

fn pieces(word: &str, vocab: &Vocab, bpe: Option<&BpeModel>) -> Result<Vec<String>> {
    match vocab.segmentation() {
        Segmentation::Words => Ok(vec![word.to_string()]),
        Segmentation::Bpe => match bpe {
            Some(model) => Ok(model.segment_word(word)),
            None => Err(Error::InvalidParameter(
                "scorer vocabulary is BPE-segmented but no BPE model was given".into(),
            )),
        },
    }
}

/// Compiles `cs` against `vocab`. Positive words are segmented with `bpe`
/// when the vocabulary is subword-based.
pub fn compile(cs: &ConstraintSet, vocab: &Vocab, bpe: Option<&BpeModel>) -> Result<ConstraintAutomaton> {
    let mut positives: Vec<&TokenSeq> = Vec::new();
    for p in &cs.positive {
        if p.is_empty() {
            return Err(Error::InvalidParameter("empty positive phrase".into()));
        }
        if !positives.contains(&p) {
            positives.push(p);
        }
    }
    if positives.len() > MAX_POSITIVE {
        return Err(Error::InvalidParameter(format!(
            "at most {MAX_POSITIVE} positive phrases are supported"
        )));
    }
    for p in &positives {
        for n in cs.negative.iter().filter(|n| !n.is_empty()) {
            if p.contains_phrase(n) {
                return Err(Error::Unsatisfiable(format!("positive {p} contains negative {n}")));
            }
        }
    }
    if cs.prefix_bans.len() > 64 {
        return Err(Error::InvalidParameter("at most 64 prefix bans are supported".into()));
    }

    let mut patterns = Vec::new();
    let mut lens = Vec::new();
    for p in &positives {
        let mut pat = Vec::new();
        let mut n = 0;
        for w in p.iter() {
            pat.push(BOUNDARY);
            for piece in pieces(w, vocab, bpe)? {
                match vocab.id(&piece) {
                    Some(id) if id != EOS && id != UNK => pat.push(id),
                    _ => {
                        return Err(Error::OutOfVocabulary(format!(
                            "positive constraint {p}: {piece:?} is not in the scorer vocabulary"
                        )))
                    }
                }
                n += 1;
            }
        }
        patterns.push(pat);
        lens.push(n);
    }
    let (positive, positive_paths) = Matcher::build(&patterns, |i| 1 << i);

    let mut words: HashMap<String, u32> = HashMap::new();
    let mut intern = |w: &str| {
        let next = words.len() as u32;
        *words.entry(w.to_string()).or_insert(next)
    };
    let neg_patterns: Vec<Vec<u32>> = cs
        .negative
        .iter()
        .filter(|n| !n.is_empty())
        .map(|n| n.iter().map(|w| intern(w)).collect())
        .collect();
    let positional = cs
        .positional
        .iter()
        .map(|b| (b.pos as u32, intern(&b.token)))
        .collect();
    let prefix_bans: Vec<Vec<u32>> = cs
        .prefix_bans
        .iter()
        .filter(|p| !p.is_empty())
        .map(|p| p.iter().map(|w| intern(w)).collect())
        .collect();
    let negative = Matcher::build(&neg_patterns, |_| 1).0;
    let needs_words = !neg_patterns.is_empty() || !cs.positional.is_empty() || !prefix_bans.is_empty();

    let positive_tokens_upto = patterns
        .iter()
        .map(|p| {
            let mut acc = vec![0u32];
            for &sym in p {
                acc.push(acc.last().unwrap() + u32::from(sym != BOUNDARY));
            }
            acc
        })
        .collect();
    Ok(ConstraintAutomaton {
        positive_tokens_upto,
        segmentation: vocab.segmentation(),
        positive,
        positive_paths,
        positive_patterns: patterns,
        total: lens.iter().sum(),
        positive_len: lens,
        negative,
        words,
        positional,
        prefix_bans,
        needs_words,
        source: cs.clone(),
    })
}

impl ConstraintAutomaton {
    /// Total number of positive constraint tokens, in scorer token space.
    pub fn total_positive_tokens(&self) -> usize {
        self.total as usize
    }

    pub fn positive_phrase_count(&self) -> usize {
        self.positive_len.len()
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.source
    }

    pub(crate) fn initial(&self) -> CursorState {
        let mut s = CursorState {
            pos_node: 0,
            met: 0,
            met_count: 0,
            progress: 0,
            neg_node: 0,
            word_start: 1,
            words_done: 0,
            prefix_alive: if self.prefix_bans.len() >= 64 {
                u64::MAX
            } else {
                (1u64 << self.prefix_bans.len()) - 1
            },
            at_boundary: true,
        };
        s.pos_node = self.positive.next(0, BOUNDARY);
        self.absorb(&mut s);
        s
    }

    fn absorb(&self, s: &mut CursorState) {
        let hit = self.positive.out[s.pos_node as usize] & !s.met;
        if hit != 0 {
            s.met |= hit;
            s.met_count = (0..self.positive_len.len())
                .filter(|&i| s.met >> i & 1 == 1)
                .map(|i| self.positive_len[i])
                .sum();
        }
        let partial = (0..self.positive_len.len())
            .filter(|&i| s.met >> i & 1 == 0)
            .filter_map(|i| self.partial_depth(i, s.pos_node).map(|d| self.positive_tokens_upto[i][d]))
            .max()
            .unwrap_or(0);
        s.progress = s.met_count + partial;
    }

    /// Depth of the longest prefix of pattern `i` that is a suffix of the
    /// input read so far.
    fn partial_depth(&self, i: usize, mut node: u32) -> Option<usize> {
        let path = &self.positive_paths[i];
        let len = self.positive_patterns[i].len();
        loop {
            let d = self.positive.depth[node as usize] as usize;
            if d < len && path[d] == node {
                return Some(d);
            }
            if node == 0 {
                return None;
            }
            node = self.positive.fail[node as usize];
        }
    }

    fn word_id(&self, prefix: &[u32], start: usize, token: u32, vocab: &Vocab) -> u32 {
        let key = match self.segmentation {
            Segmentation::Words => return self.words.get(vocab.token(token)).copied().unwrap_or(OTHER_WORD),
            Segmentation::Bpe => {
                let mut w = String::new();
                for &t in prefix[start..].iter().chain(std::iter::once(&token)) {
                    w.push_str(vocab.token(t));
                }
                w.truncate(w.len() - END_OF_WORD.len());
                w
            }
        };
        self.words.get(&key).copied().unwrap_or(OTHER_WORD)
    }

    /// Advances `state` by `token`, the next symbol after `prefix`. Returns
    /// `None` if the extension violates a negative or positional constraint.
    pub(crate) fn advance(&self, state: &CursorState, prefix: &[u32], token: u32, vocab: &Vocab) -> Option<CursorState> {
        let mut s = state.clone();
        if token == EOS {
            return Some(s);
        }
        s.pos_node = self.positive.next(s.pos_node, token);
        self.absorb(&mut s);
        let final_piece = vocab.is_word_final(token);
        if final_piece {
            if self.needs_words {
                let w = self.word_id(prefix, s.word_start as usize, token, vocab);
                s.neg_node = self.negative.next(s.neg_node, w);
                if self.negative.out[s.neg_node as usize] != 0 {
                    return None;
                }
                if self.positional.contains(&(s.words_done, w)) {
                    return None;
                }
                if s.prefix_alive != 0 {
                    let i = s.words_done as usize;
                    for (b, ban) in self.prefix_bans.iter().enumerate().take(64) {
                        if s.prefix_alive >> b & 1 == 0 {
                            continue;
                        }
                        if ban.get(i) == Some(&w) {
                            if i + 1 == ban.len() {
                                return None;
                            }
                        } else {
                            s.prefix_alive &= !(1 << b);
                        }
                    }
                }
            }
            s.words_done += 1;
            s.word_start = prefix.len() as u32 + 1;
            s.pos_node = self.positive.next(s.pos_node, BOUNDARY);
            self.absorb(&mut s);
        }
        s.at_boundary = final_piece;
        Some(s)
    }

    pub(crate) fn eos_allowed(&self, s: &CursorState) -> bool {
        s.at_boundary && s.met_count == self.total
    }

    /// Next token of each unmet positive phrase, continuing the longest
    /// partial match available from the current state.
    pub(crate) fn forced(&self, s: &CursorState, out: &mut Vec<u32>) {
        out.clear();
        for (i, pattern) in self.positive_patterns.iter().enumerate() {
            if s.met >> i & 1 == 1 {
                continue;
            }
            if let Some(d) = self.partial_depth(i, s.pos_node) {
                let sym = pattern[d];
                if sym != BOUNDARY && !out.contains(&sym) {
                    out.push(sym);
                }
            }
        }
    }
}
