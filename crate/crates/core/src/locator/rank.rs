use serde::{Deserialize, Serialize};

const WORDS_PER_BLOCK: usize = 8;

/// Bit vector with a one-level rank directory (one counter every 512 bits).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankBits {
    words: Vec<u64>,
    blocks: Vec<u64>,
    len: usize,
}

impl RankBits {
    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut words: Vec<u64> = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                *words.last_mut().unwrap() |= 1 << (len % 64);
            }
            len += 1;
        }
        let mut blocks = Vec::with_capacity(words.len() / WORDS_PER_BLOCK + 1);
        let mut acc = 0u64;
        for chunk in words.chunks(WORDS_PER_BLOCK) {
            blocks.push(acc);
            acc += chunk.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        }
        blocks.push(acc);
        Self { words, blocks, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Number of ones in positions `[0..i)`; `i` is clamped to the length.
    #[inline]
    pub fn rank1(&self, i: usize) -> usize {
        let i = i.min(self.len);
        let w = i / 64;
        let block = w / WORDS_PER_BLOCK;
        let mut r = self.blocks[block];
        for word in &self.words[block * WORDS_PER_BLOCK..w] {
            r += word.count_ones() as u64;
        }
        if !i.is_multiple_of(64) {
            r += (self.words[w] & ((1u64 << (i % 64)) - 1)).count_ones() as u64;
        }
        r as usize
    }

    pub fn space_bits(&self) -> u64 {
        (self.words.len() * 64 + self.blocks.len() * 64) as u64
    }
}
