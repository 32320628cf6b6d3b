//! Seeded synthetic labeled corpora for exercising the weighting schemes.
//!
//! Each document mixes three kinds of words: keywords drawn from a small set
//! owned by its class, rare noise words shared by every class, and common
//! filler words that appear almost everywhere. Noise words are rarer than
//! keywords, so plain TF-IDF gives them the larger weight even though they
//! carry no class signal.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, TokenizerConfig};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub documents: usize,
    pub classes: usize,
    pub keywords_per_class: usize,
    pub noise_words: usize,
    pub filler_words: usize,
    /// Tokens per document drawn from the document's class keywords.
    pub keyword_tokens: usize,
    pub noise_tokens: usize,
    pub filler_tokens: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            documents: 200,
            classes: 4,
            keywords_per_class: 5,
            noise_words: 50,
            filler_words: 20,
            keyword_tokens: 2,
            noise_tokens: 2,
            filler_tokens: 4,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    /// `(label, text)` pairs; classes are assigned round-robin.
    pub fn generate(&self) -> Vec<(String, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise: Vec<String> = (0..self.noise_words).map(|i| format!("noise{i}")).collect();
        let filler: Vec<String> = (0..self.filler_words)
            .map(|i| format!("filler{i}"))
            .collect();
        let keywords: Vec<Vec<String>> = (0..self.classes)
            .map(|c| {
                (0..self.keywords_per_class)
                    .map(|j| format!("key{c}x{j}"))
                    .collect()
            })
            .collect();

        (0..self.documents)
            .map(|i| {
                let class = i % self.classes;
                let mut words: Vec<&str> = Vec::new();
                for (pool, n) in [
                    (&keywords[class], self.keyword_tokens),
                    (&noise, self.noise_tokens),
                    (&filler, self.filler_tokens),
                ] {
                    for _ in 0..n {
                        if let Some(w) = pool.choose(&mut rng) {
                            words.push(w);
                        }
                    }
                }
                (format!("class{class}"), words.join(" "))
            })
            .collect()
    }

    pub fn corpus(&self) -> Result<Corpus> {
        let docs = self.generate();
        Corpus::from_labeled(
            docs.iter().map(|(l, t)| (l.as_str(), t.as_str())),
            &TokenizerConfig::default(),
        )
    }

    /// The corpus as TSV text (`label<TAB>text` per line).
    pub fn to_tsv(&self) -> String {
        self.generate()
            .into_iter()
            .map(|(l, t)| format!("{l}\t{t}\n"))
            .collect()
    }
}
