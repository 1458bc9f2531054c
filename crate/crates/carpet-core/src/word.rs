//! Symbol sequences indexing cylinders.
//!
//! Finite words address construction rectangles; eventually periodic words
//! (prefix followed by a repeating cycle) address single attractor points
//! with exactly computable coordinates.

use std::fmt;

/// A finite word over {1..N}. Symbols are stored 1-based; validation
/// against a particular system's N happens at the point of use.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    symbols: Vec<u8>,
}

impl Word {
    pub fn empty() -> Self {
        Self { symbols: Vec::new() }
    }

    pub fn new(symbols: impl IntoIterator<Item = usize>) -> Self {
        Self {
            symbols: symbols.into_iter().map(|s| s as u8).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = usize> + '_ {
        self.symbols.iter().map(|&s| s as usize)
    }

    /// The word with the last symbol dropped. Identity on the empty word.
    pub fn parent(&self) -> Word {
        let mut s = self.symbols.clone();
        s.pop();
        Word { symbols: s }
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word {
            symbols: self.symbols[..n.min(self.symbols.len())].to_vec(),
        }
    }

    pub fn child(&self, symbol: usize) -> Word {
        let mut s = self.symbols.clone();
        s.push(symbol as u8);
        Word { symbols: s }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut s = self.symbols.clone();
        s.extend_from_slice(&other.symbols);
        Word { symbols: s }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.is_empty() {
            return write!(f, "()");
        }
        for (k, s) in self.symbols.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// An infinite word prefix . cycle cycle cycle ... The cycle must be
/// nonempty; the prefix may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodicWord {
    pub prefix: Word,
    pub cycle: Word,
}

impl PeriodicWord {
    pub fn new(prefix: Word, cycle: Word) -> Self {
        assert!(!cycle.is_empty(), "periodic word needs a nonempty cycle");
        Self { prefix, cycle }
    }

    pub fn symbol_at(&self, k: usize) -> usize {
        if k < self.prefix.len() {
            self.prefix.symbols[k] as usize
        } else {
            let j = (k - self.prefix.len()) % self.cycle.len();
            self.cycle.symbols[j] as usize
        }
    }

    pub fn prefix_of(&self, n: usize) -> Word {
        Word {
            symbols: (0..n).map(|k| self.symbol_at(k) as u8).collect(),
        }
    }
}

impl fmt::Display for PeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})*", self.prefix, self.cycle)
    }
}
