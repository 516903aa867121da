use std::fmt;

/// A binary letter, used both as a projection/injection index and as a
/// letter of access words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn from_u8(v: u8) -> Option<Bit> {
        match v {
            0 => Some(Bit::Zero),
            1 => Some(Bit::One),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn other(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// A finite word over bits. Index 0 is the leftmost letter.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<Bit>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn from_bits(bits: &[u8]) -> Word {
        Word(
            bits.iter()
                .map(|&b| Bit::from_u8(b).expect("bit must be 0 or 1"))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn rev(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn rcycle(&self) -> Word {
        Word(rcycle(&self.0))
    }

    pub fn lcycle(&self) -> Word {
        Word(lcycle(&self.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// `Rcycle(i1 … ik) = (ik, i1, …, ik-1)`.
pub fn rcycle<T: Clone>(s: &[T]) -> Vec<T> {
    match s.split_last() {
        None => Vec::new(),
        Some((last, init)) => {
            let mut v = Vec::with_capacity(s.len());
            v.push(last.clone());
            v.extend_from_slice(init);
            v
        }
    }
}

/// `Lcycle(i1 … ik) = (i2, …, ik, i1)`.
pub fn lcycle<T: Clone>(s: &[T]) -> Vec<T> {
    match s.split_first() {
        None => Vec::new(),
        Some((first, rest)) => {
            let mut v = Vec::with_capacity(s.len());
            v.extend_from_slice(rest);
            v.push(first.clone());
            v
        }
    }
}
