//! Alphabets, signed letters, free-group words and the two length functions
//! (word length and free product / syllable length).

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Index of a generator inside its [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen(pub usize);

/// A partition of the generators into the free factors of a free product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: usize,
}

impl Partition {
    pub fn block_of(&self, g: Gen) -> usize {
        self.block_of[g.0]
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }
}

/// An ordered set of generator names together with a partition `Π`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, Gen>,
    blocks: Vec<Vec<Gen>>,
    partition: Partition,
}

fn valid_symbol(name: &str) -> bool {
    !name.is_empty()
        && name != "1"
        && !name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '^' | '{' | '}' | ',' | '#'))
}

impl Alphabet {
    /// Builds an alphabet whose partition has one block per generator.
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let blocks: Vec<Vec<usize>> = (0..names.len()).map(|i| vec![i]).collect();
        Self::with_blocks(names, &blocks)
    }

    /// Builds an alphabet with an explicit partition given as generator indices.
    pub fn with_blocks<S: AsRef<str>>(names: &[S], blocks: &[Vec<usize>]) -> Result<Self> {
        let mut index = HashMap::new();
        let mut owned = Vec::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            let n = n.as_ref();
            if !valid_symbol(n) {
                return Err(Error::InvalidAlphabet(format!("bad generator name `{n}`")));
            }
            if index.insert(n.to_string(), Gen(i)).is_some() {
                return Err(Error::InvalidAlphabet(format!("duplicate generator `{n}`")));
            }
            owned.push(n.to_string());
        }
        let mut block_of = vec![usize::MAX; names.len()];
        let mut gblocks = Vec::with_capacity(blocks.len());
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidAlphabet("empty partition block".into()));
            }
            let mut gb = Vec::with_capacity(block.len());
            for &g in block {
                if g >= names.len() {
                    return Err(Error::InvalidAlphabet(format!(
                        "block member {g} out of range"
                    )));
                }
                if block_of[g] != usize::MAX {
                    return Err(Error::InvalidAlphabet(format!(
                        "generator `{}` lies in two blocks",
                        owned[g]
                    )));
                }
                block_of[g] = b;
                gb.push(Gen(g));
            }
            gblocks.push(gb);
        }
        if let Some(g) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidAlphabet(format!(
                "generator `{}` is in no block",
                owned[g]
            )));
        }
        Ok(Alphabet {
            names: owned,
            index,
            partition: Partition {
                block_of,
                blocks: gblocks.len(),
            },
            blocks: gblocks,
        })
    }

    /// Builds an alphabet from names and blocks given by name.
    pub fn with_named_blocks<S: AsRef<str>>(names: &[S], blocks: &[Vec<String>]) -> Result<Self> {
        let pos: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_ref(), i))
            .collect();
        let idx = blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|n| {
                        pos.get(n.as_str())
                            .copied()
                            .ok_or_else(|| Error::UnknownGenerator(n.clone()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_blocks(names, &idx)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, g: Gen) -> &str {
        &self.names[g.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn gen(&self, name: &str) -> Result<Gen> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> {
        (0..self.names.len()).map(Gen)
    }

    pub fn blocks(&self) -> &[Vec<Gen>] {
        &self.blocks
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }
}

/// A generator with exponent `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub inverse: bool,
}

impl Letter {
    pub fn pos(g: Gen) -> Self {
        Letter {
            gen: g,
            inverse: false,
        }
    }

    pub fn neg(g: Gen) -> Self {
        Letter {
            gen: g,
            inverse: true,
        }
    }

    pub fn inv(self) -> Self {
        Letter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }

    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.inverse != other.inverse
    }
}

/// A word in the free monoid on `S ⊔ S⁻¹`. Words are kept as written;
/// reduction is always explicit.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    /// `g^e` as a word of `|e|` letters.
    pub fn power_of(g: Gen, e: i64) -> Self {
        let l = if e < 0 {
            Letter::neg(g)
        } else {
            Letter::pos(g)
        };
        Word(vec![l; e.unsigned_abs() as usize])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    /// Formal inverse: reversed, each letter inverted.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Concatenation without reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `self^n` for `n ≥ 0` (concatenation, no reduction).
    pub fn pow(&self, n: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len() * n);
        for _ in 0..n {
            v.extend_from_slice(&self.0);
        }
        Word(v)
    }

    pub fn is_freely_reduced(&self) -> bool {
        self.0.windows(2).all(|w| !w[0].cancels(w[1]))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_freely_reduced()
            && (self.0.len() < 2 || !self.0[0].cancels(self.0[self.0.len() - 1]))
    }

    /// The unique freely reduced representative.
    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            match out.last() {
                Some(&last) if last.cancels(l) => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word(out)
    }

    /// Free reduction followed by stripping mutually inverse ends.
    pub fn cyclic_reduce(&self) -> Word {
        let r = self.free_reduce();
        let n = r.0.len();
        let mut i = 0;
        while i < n / 2 && r.0[i].cancels(r.0[n - 1 - i]) {
            i += 1;
        }
        Word(r.0[i..n - i].to_vec())
    }

    /// Cyclic rotation starting at letter `k`.
    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return Word::empty();
        }
        let k = k % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    /// Exponent sum of each generator.
    pub fn exponent_sums(&self, num_gens: usize) -> Vec<i64> {
        let mut v = vec![0i64; num_gens];
        for l in &self.0 {
            v[l.gen.0] += l.sign();
        }
        v
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> WordDisplay<'a> {
        WordDisplay {
            word: self,
            alphabet,
        }
    }

    /// Parses `s^2 t^-1 s`; `1` (or an empty string) is the empty word.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Word> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let e: i64 = e.parse().map_err(|_| {
                        Error::InvalidAlphabet(format!("bad exponent in syllable `{tok}`"))
                    })?;
                    (n, e)
                }
                None => (tok, 1),
            };
            let g = alphabet.gen(name)?;
            letters.extend(Word::power_of(g, exp).0);
        }
        Ok(Word(letters))
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    alphabet: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ls = self.word.letters();
        if ls.is_empty() {
            return f.write_str("1");
        }
        let mut i = 0;
        let mut first = true;
        while i < ls.len() {
            let mut j = i;
            while j < ls.len() && ls[j] == ls[i] {
                j += 1;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            let name = self.alphabet.name(ls[i].gen);
            let e = (j - i) as i64 * ls[i].sign();
            if e == 1 {
                f.write_str(name)?;
            } else {
                write!(f, "{name}^{e}")?;
            }
            i = j;
        }
        Ok(())
    }
}

/// A length function on the free group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LengthFunction {
    /// Number of letters of the reduced word.
    WordLength,
    /// Number of syllables of the reduced word with respect to a partition.
    FreeProduct(Partition),
}

impl LengthFunction {
    pub fn free_product(alphabet: &Alphabet) -> Self {
        LengthFunction::FreeProduct(alphabet.partition().clone())
    }

    /// Length of the element represented by `word`.
    pub fn length(&self, word: &Word) -> usize {
        match self {
            LengthFunction::WordLength => word_length(word),
            LengthFunction::FreeProduct(p) => free_product_length(word, p),
        }
    }

    /// Length of the conjugacy class of a cyclically reduced closed label:
    /// minimised over rotations, so syllables merge across the seam.
    pub fn cyclic_length(&self, word: &Word) -> usize {
        let w = word.cyclic_reduce();
        match self {
            LengthFunction::WordLength => w.len(),
            LengthFunction::FreeProduct(p) => cyclic_syllables(w.letters(), p),
        }
    }

    pub(crate) fn block(&self, g: Gen) -> usize {
        match self {
            LengthFunction::WordLength => 0,
            LengthFunction::FreeProduct(p) => p.block_of(g),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LengthFunction::WordLength => "word",
            LengthFunction::FreeProduct(_) => "free-product",
        }
    }
}

pub fn word_length(word: &Word) -> usize {
    word.free_reduce().len()
}

pub fn free_product_length(word: &Word, partition: &Partition) -> usize {
    syllables(word.free_reduce().letters(), partition)
}

fn syllables(ls: &[Letter], p: &Partition) -> usize {
    if ls.is_empty() {
        return 0;
    }
    1 + ls
        .windows(2)
        .filter(|w| p.block_of(w[0].gen) != p.block_of(w[1].gen))
        .count()
}

fn cyclic_syllables(ls: &[Letter], p: &Partition) -> usize {
    let n = ls.len();
    if n == 0 {
        return 0;
    }
    let changes = (0..n)
        .filter(|&i| p.block_of(ls[i].gen) != p.block_of(ls[(i + 1) % n].gen))
        .count();
    changes.max(1)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_word() -> impl Strategy<Value = Word> {
        prop::collection::vec((0usize..3, any::<bool>()), 0..24).prop_map(|v| {
            Word::from_letters(
                v.into_iter()
                    .map(|(g, inv)| Letter {
                        gen: Gen(g),
                        inverse: inv,
                    })
                    .collect(),
            )
        })
    }

    fn alpha() -> Alphabet {
        Alphabet::with_blocks(&["s", "t", "u"], &[vec![0], vec![1, 2]]).unwrap()
    }

    proptest! {
        #[test]
        fn free_reduce_idempotent(x in arb_word()) {
            let r = x.free_reduce();
            prop_assert!(r.is_freely_reduced());
            prop_assert_eq!(r.free_reduce(), r);
        }

        #[test]
        fn lengths_are_compatible(x in arb_word(), y in arb_word()) {
            let a = alpha();
            let p = a.partition();
            prop_assert!(free_product_length(&x, p) <= word_length(&x));
            prop_assert_eq!(word_length(&x), word_length(&x.free_reduce()));
            prop_assert_eq!(free_product_length(&x, p), free_product_length(&x.free_reduce(), p));
            prop_assert_eq!(word_length(&x), word_length(&x.inverse()));
            prop_assert_eq!(free_product_length(&x, p), free_product_length(&x.inverse(), p));
            let xy = x.concat(&y);
            prop_assert!(word_length(&xy) <= word_length(&x) + word_length(&y));
            prop_assert!(free_product_length(&xy, p) <= free_product_length(&x, p) + free_product_length(&y, p));
        }

        #[test]
        fn cyclic_reduce_is_cyclically_reduced(x in arb_word()) {
            prop_assert!(x.cyclic_reduce().is_cyclically_reduced());
        }

        #[test]
        fn display_parse_round_trip(x in arb_word()) {
            let a = alpha();
            let text = x.display(&a).to_string();
            prop_assert_eq!(Word::parse(&text, &a).unwrap(), x);
        }
    }
}
