//! Labeled corpora with controlled label, intention and field statistics.
//!
//! Labels and intentions follow a 2×2 conditional table. Categorical values
//! come from a Zipf distribution over each field's values; a non-bug report
//! draws from the reversed distribution with probability `label_skew`, so
//! frequent values lean towards bugs. Summaries mix a shared vocabulary with
//! a per-label vocabulary, the latter chosen per token with probability
//! `signal_rate`.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{BugReport, Dataset, Intention, Label};
use crate::error::{Error, Result};
use crate::preprocess::{stem, StopwordList};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub name: String,
    pub total: usize,
    pub bug_fraction: f64,
    pub seed: u64,
    /// Round the intention counts per label instead of sampling them.
    #[serde(default)]
    pub exact_counts: bool,
    pub intention: IntentionTable,
    pub fields: FieldSpec,
    pub summary: SummarySpec,
}

/// `[P(explanation | label), P(suggestion | label)]` per label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntentionTable {
    pub bug: [f64; 2],
    pub non_bug: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub products: usize,
    pub components: usize,
    pub reporters: usize,
    pub severities: usize,
    pub zipf_exponent: f64,
    pub label_skew: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummarySpec {
    pub shared_vocab: usize,
    pub label_vocab: usize,
    pub signal_rate: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(format!("synthetic spec: {}", msg.into()))
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {p} is not a probability")))
    }
}

impl SynthSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SynthSpec = toml::from_str(text).map_err(|e| Error::Format {
            what: "synthetic spec",
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SynthSpec { seed, ..self.clone() }
    }

    pub fn bug_count(&self) -> usize {
        (self.total as f64 * self.bug_fraction).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.total == 0 {
            return Err(invalid("total must be positive"));
        }
        check_probability("bug_fraction", self.bug_fraction)?;
        for (name, row) in [("bug", self.intention.bug), ("non_bug", self.intention.non_bug)] {
            for p in row {
                check_probability(name, p)?;
            }
            if (row[0] + row[1] - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("intention.{name} does not sum to 1")));
            }
        }
        let f = &self.fields;
        if [f.products, f.components, f.reporters, f.severities].contains(&0) {
            return Err(invalid("field cardinalities must be positive"));
        }
        if !(f.zipf_exponent >= 0.0 && f.zipf_exponent.is_finite()) {
            return Err(invalid("zipf_exponent must be non-negative"));
        }
        check_probability("label_skew", f.label_skew)?;
        let s = &self.summary;
        check_probability("signal_rate", s.signal_rate)?;
        if s.min_tokens > s.max_tokens {
            return Err(invalid("min_tokens exceeds max_tokens"));
        }
        if s.max_tokens > 0 && (s.shared_vocab == 0 || (s.signal_rate > 0.0 && s.label_vocab == 0)) {
            return Err(invalid("summary vocabularies must be non-empty"));
        }
        Ok(())
    }
}

const SEVERITIES: [&str; 7] = [
    "blocker",
    "critical",
    "major",
    "normal",
    "minor",
    "trivial",
    "enhancement",
];
const ONSETS: [&str; 16] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr",
];
const NUCLEI: [&str; 5] = ["a", "e", "i", "o", "u"];

/// Deterministic pseudo-words whose stems are distinct, non-stopword and
/// unchanged by stemming, so each survives preprocessing as one token.
pub fn pseudo_words(count: usize) -> Vec<String> {
    let stopwords = StopwordList::bundled();
    let mut seen = BTreeSet::new();
    let mut words = Vec::with_capacity(count);
    let mut index = 0u64;
    while words.len() < count {
        let mut h = derive_seed(0x7379_6e74, index);
        index += 1;
        let syllables = 2 + (h % 2) as usize;
        h /= 2;
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS[(h % ONSETS.len() as u64) as usize]);
            h /= ONSETS.len() as u64;
            w.push_str(NUCLEI[(h % NUCLEI.len() as u64) as usize]);
            h /= NUCLEI.len() as u64;
        }
        w.push_str(["k", "n", "x", "m", "t"][(h % 5) as usize]);
        if stem(&w) == w && !stopwords.contains(&w) && seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

struct Zipf {
    cumulative: Vec<f64>,
}

impl Zipf {
    fn new(n: usize, exponent: f64) -> Self {
        let mut acc = 0.0;
        let cumulative = (0..n)
            .map(|i| {
                acc += 1.0 / ((i + 1) as f64).powf(exponent);
                acc
            })
            .collect();
        Zipf { cumulative }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Assigns `Explanation` to `count(label)` positions chosen without replacement.
fn exact_flags<R: Rng>(n: usize, positives: usize, rng: &mut R) -> Vec<bool> {
    let mut flags: Vec<bool> = (0..n).map(|i| i < positives).collect();
    flags.shuffle(rng);
    flags
}

pub fn generate_synthetic(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.total;
    let bugs = spec.bug_count();

    let mut labels: Vec<Label> = (0..n)
        .map(|i| if i < bugs { Label::Bug } else { Label::NonBug })
        .collect();
    labels.shuffle(&mut rng);

    let table = |l: Label| match l {
        Label::Bug => spec.intention.bug,
        Label::NonBug => spec.intention.non_bug,
    };
    let intentions: Vec<Intention> = if spec.exact_counts {
        let mut per_label = Label::ALL.map(|l| {
            let size = labels.iter().filter(|&&x| x == l).count();
            let expl = (size as f64 * table(l)[0]).round() as usize;
            exact_flags(size, expl, &mut rng).into_iter()
        });
        labels
            .iter()
            .map(|l| {
                let explanation = per_label[l.index()].next().unwrap();
                if explanation {
                    Intention::Explanation
                } else {
                    Intention::Suggestion
                }
            })
            .collect()
    } else {
        labels
            .iter()
            .map(|&l| {
                if rng.gen::<f64>() < table(l)[0] {
                    Intention::Explanation
                } else {
                    Intention::Suggestion
                }
            })
            .collect()
    };

    let f = &spec.fields;
    let cards = [f.products, f.components, f.reporters, f.severities];
    let zipfs = cards.map(|c| Zipf::new(c, f.zipf_exponent));
    let s = &spec.summary;
    let vocab = pseudo_words(s.shared_vocab + 2 * s.label_vocab);
    let (shared, label_words) = vocab.split_at(s.shared_vocab);
    let shared_zipf = Zipf::new(s.shared_vocab.max(1), 1.0);

    let mut reports = Vec::with_capacity(n);
    for (i, (&label, &intention)) in labels.iter().zip(&intentions).enumerate() {
        let mut values = [0usize; 4];
        for (v, (z, &card)) in values.iter_mut().zip(zipfs.iter().zip(&cards)) {
            let draw = z.sample(&mut rng);
            let reversed = label == Label::NonBug && rng.gen::<f64>() < f.label_skew;
            *v = if reversed { card - 1 - draw } else { draw };
        }
        let len = rng.gen_range(s.min_tokens..=s.max_tokens);
        let own = &label_words[label.index() * s.label_vocab..(label.index() + 1) * s.label_vocab];
        let tokens: Vec<&str> = (0..len)
            .map(|_| {
                if rng.gen::<f64>() < s.signal_rate {
                    own[rng.gen_range(0..own.len())].as_str()
                } else {
                    shared[shared_zipf.sample(&mut rng)].as_str()
                }
            })
            .collect();
        let severity = match SEVERITIES.get(values[3]) {
            Some(s) if f.severities <= SEVERITIES.len() => s.to_string(),
            _ => format!("severity-{}", values[3] + 1),
        };
        reports.push(BugReport {
            id: (i + 1).to_string(),
            product: format!("product-{}", values[0] + 1),
            component: format!("component-{}", values[1] + 1),
            reporter: format!("user{}@example.org", values[2] + 1),
            severity,
            summary: tokens.join(" "),
            intention,
            label,
        });
    }
    Ok(Dataset::new(reports, format!("synthetic:{}:{}", spec.name, spec.seed)))
}

/// Empirical mutual information between label and intention, in nats.
pub fn intention_label_mi(ds: &Dataset) -> f64 {
    let stats = ds.stats();
    let n = stats.total as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for l in Label::ALL {
        let pl = Intention::ALL.iter().map(|&i| stats.cell(l, i)).sum::<usize>() as f64 / n;
        for i in Intention::ALL {
            let pi = Label::ALL.iter().map(|&x| stats.cell(x, i)).sum::<usize>() as f64 / n;
            let pj = stats.cell(l, i) as f64 / n;
            if pj > 0.0 {
                mi += pj * (pj / (pl * pi)).ln();
            }
        }
    }
    mi
}
