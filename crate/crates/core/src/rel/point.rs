//! Points of the relational web of a type, the action of access words on
//! them, and the relation `S∂` between tagged and untagged multisets.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Bit, Multiset, Ty, Word};

/// An element of `⟦A⟧`. `Nat(δ, ν)` lives in `⟦D^{|δ|} ι⟧` and
/// `Arrow(m, b)` in `⟦A → B⟧`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Nat(Word, u64),
    Arrow(Multiset<Point>, Box<Point>),
}

impl Point {
    pub fn nat(v: u64) -> Point {
        Point::Nat(Word::empty(), v)
    }

    pub fn arrow(m: impl IntoIterator<Item = Point>, b: Point) -> Point {
        Point::Arrow(m.into_iter().collect(), Box::new(b))
    }

    /// The access word at the ground leaf, below every arrow codomain.
    pub fn leaf_word(&self) -> &Word {
        match self {
            Point::Nat(w, _) => w,
            Point::Arrow(_, b) => b.leaf_word(),
        }
    }

    pub fn has_type(&self, a: &Ty) -> bool {
        match (self, a) {
            (Point::Nat(w, _), Ty::Ground(d)) => w.len() == *d,
            (Point::Arrow(m, b), Ty::Arrow(dom, cod)) => {
                m.support().all(|p| p.has_type(dom)) && b.has_type(cod)
            }
            _ => false,
        }
    }

    /// Writes `a` as `δ·f` with `|δ| = d`.
    pub fn decompose(&self, d: usize) -> Option<(Word, Point)> {
        match self {
            Point::Nat(w, v) if w.len() >= d => Some((
                Word(w.0[..d].to_vec()),
                Point::Nat(Word(w.0[d..].to_vec()), *v),
            )),
            Point::Nat(..) => None,
            Point::Arrow(m, b) => {
                let (delta, f) = b.decompose(d)?;
                Some((delta, Point::Arrow(m.clone(), Box::new(f))))
            }
        }
    }
}

/// `δ·a`: prepends `δ` to the word at the ground leaf.
pub fn point_act(delta: &Word, a: &Point) -> Point {
    match a {
        Point::Nat(w, v) => Point::Nat(delta.concat(w), *v),
        Point::Arrow(m, b) => Point::Arrow(m.clone(), Box::new(point_act(delta, b))),
    }
}

fn tag(r: Bit, a: &Point) -> Point {
    point_act(&Word(vec![r]), a)
}

/// All `m'` with `(m', (r, m)) ∈ S∂`: each element of `m` is tagged with a
/// bit and the tags add up to `r`.
pub fn sdiff_expand(r: Bit, m: &Multiset<Point>) -> BTreeSet<Multiset<Point>> {
    let zeros = |m: &Multiset<Point>| m.map(|a| tag(Bit::Zero, a));
    match r {
        Bit::Zero => BTreeSet::from([zeros(m)]),
        Bit::One => m
            .support()
            .map(|a| {
                let mut rest = m.clone();
                rest.remove_one(a);
                let mut out = zeros(&rest);
                out.insert(tag(Bit::One, a));
                out
            })
            .collect(),
    }
}

/// Membership in `S∂`.
pub fn sdiff_rel(tagged: &Multiset<Point>, r: Bit, m: &Multiset<Point>) -> bool {
    sdiff_expand(r, m).contains(tagged)
}

/// Every way of distributing `r` over the parts of `m` and tagging each
/// part accordingly: the tuples `(r_i, m'_i)` with `r = Σ r_i` and
/// `(m'_i, (r_i, m_i)) ∈ S∂`. Empty when the parts do not add up to `m`.
pub fn sdiff_split(
    r: Bit,
    m: &Multiset<Point>,
    parts: &[Multiset<Point>],
) -> BTreeSet<(Vec<Bit>, Vec<Multiset<Point>>)> {
    let total = parts
        .iter()
        .fold(Multiset::new(), |acc: Multiset<Point>, p| acc.sum(p));
    if &total != m {
        return BTreeSet::new();
    }
    let mut distributions: Vec<Vec<Bit>> = Vec::new();
    match r {
        Bit::Zero => distributions.push(vec![Bit::Zero; parts.len()]),
        Bit::One => {
            for i in 0..parts.len() {
                let mut bits = vec![Bit::Zero; parts.len()];
                bits[i] = Bit::One;
                distributions.push(bits);
            }
        }
    }
    let mut out = BTreeSet::new();
    for bits in distributions {
        let mut acc: Vec<Vec<Multiset<Point>>> = vec![Vec::new()];
        for (b, part) in bits.iter().zip(parts) {
            let options = sdiff_expand(*b, part);
            acc = acc
                .into_iter()
                .flat_map(|prefix| {
                    options.iter().map(move |o| {
                        let mut next = prefix.clone();
                        next.push(o.clone());
                        next
                    })
                })
                .collect();
        }
        for tagged in acc {
            out.insert((bits.clone(), tagged));
        }
    }
    out
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Nat(w, v) if w.is_empty() => write!(f, "{v}"),
            Point::Nat(w, v) => {
                write!(f, "<")?;
                for b in &w.0 {
                    write!(f, "{b}")?;
                }
                write!(f, ">·{v}")
            }
            Point::Arrow(m, b) => write!(f, "({m}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("point syntax error at offset {pos}: {msg}")]
pub struct PointParseError {
    pub pos: usize,
    pub msg: String,
}

/// Reads the textual form printed by `Display`. Also accepts `ε·5`,
/// `<>·5`, `.` in place of `·`, and nested actions such as `<1>·(ε·5)`.
pub fn parse_point(s: &str) -> Result<Point, PointParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut p = PointParser { chars, pos: 0 };
    let pt = p.point()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(p.err("trailing input"));
    }
    Ok(pt)
}

struct PointParser {
    chars: Vec<char>,
    pos: usize,
}

impl PointParser {
    fn err(&self, msg: &str) -> PointParseError {
        PointParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), PointParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn point(&mut self) -> Result<Point, PointParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(Point::nat(self.number()?)),
            Some('ε') => {
                self.pos += 1;
                self.act(Word::empty())
            }
            Some('<') => {
                self.pos += 1;
                let mut bits = Vec::new();
                loop {
                    match self.peek() {
                        Some('0') => bits.push(Bit::Zero),
                        Some('1') => bits.push(Bit::One),
                        Some('>') => break,
                        _ => return Err(self.err("expected a bit or '>'")),
                    }
                    self.pos += 1;
                }
                self.pos += 1;
                self.act(Word(bits))
            }
            Some('(') => {
                self.pos += 1;
                if self.peek() == Some('[') {
                    let m = self.multiset()?;
                    self.expect(',')?;
                    let b = self.point()?;
                    self.expect(')')?;
                    Ok(Point::Arrow(m, Box::new(b)))
                } else {
                    let p = self.point()?;
                    self.expect(')')?;
                    Ok(p)
                }
            }
            _ => Err(self.err("expected a point")),
        }
    }

    fn act(&mut self, w: Word) -> Result<Point, PointParseError> {
        match self.peek() {
            Some('·') | Some('.') => self.pos += 1,
            _ => return Err(self.err("expected '·' after a word")),
        }
        let p = self.point()?;
        Ok(point_act(&w, &p))
    }

    fn number(&mut self) -> Result<u64, PointParseError> {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| self.err("numeral out of range"))
    }

    fn multiset(&mut self) -> Result<Multiset<Point>, PointParseError> {
        self.expect('[')?;
        let mut m = Multiset::new();
        if self.peek() == Some(']') {
            self.pos += 1;
            return Ok(m);
        }
        loop {
            m.insert(self.point()?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    return Ok(m);
                }
                _ => return Err(self.err("expected ',' or ']'")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Point {
        parse_point(s).unwrap()
    }

    #[test]
    fn action_on_ground_and_arrow_points() {
        assert_eq!(point_act(&Word::empty(), &p("7")), p("7"));
        assert_eq!(point_act(&Word::from_bits(&[0]), &p("7")), p("<0>·7"));
        assert_eq!(
            point_act(&Word::from_bits(&[1]), &p("([2], 3)")),
            p("([2], <1>·3)")
        );
    }

    #[test]
    fn printing_round_trips() {
        for s in ["5", "<01>·5", "([<0>·3], <1>·5)", "([], ([1, 1], 0))"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("([<0>·3], <1>·(ε·5))"), p("([<0>·3], <1>·5)"));
        assert_eq!(p("<>·5"), p("5"));
        assert_eq!(p("ε.5"), p("5"));
    }

    #[test]
    fn sdiff_expansions() {
        let m: Multiset<Point> = [p("1"), p("2")].into_iter().collect();
        let zero = sdiff_expand(Bit::Zero, &m);
        assert_eq!(zero.len(), 1);
        assert!(zero.contains(&[p("<0>·1"), p("<0>·2")].into_iter().collect()));
        assert_eq!(sdiff_expand(Bit::One, &m).len(), 2);
        assert!(sdiff_expand(Bit::One, &Multiset::new()).is_empty());
        let twice: Multiset<Point> = [p("1"), p("1")].into_iter().collect();
        assert_eq!(sdiff_expand(Bit::One, &twice).len(), 1);
    }

    #[test]
    fn sdiff_splits() {
        let a: Multiset<Point> = [p("1")].into_iter().collect();
        let b: Multiset<Point> = [p("2")].into_iter().collect();
        let m = a.sum(&b);
        let splits = sdiff_split(Bit::One, &m, &[a.clone(), b.clone()]);
        assert_eq!(splits.len(), 2);
        assert_eq!(sdiff_split(Bit::Zero, &m, &[a.clone(), b.clone()]).len(), 1);
        assert_eq!(sdiff_split(Bit::One, &m, &[m.clone()]).len(), 2);
        assert!(sdiff_split(Bit::Zero, &m, &[a]).is_empty());
    }

    #[test]
    fn decomposition() {
        let a = p("([1], <10>·4)");
        let (d, f) = a.decompose(1).unwrap();
        assert_eq!(d, Word::from_bits(&[1]));
        assert_eq!(point_act(&d, &f), a);
        assert!(a.has_type(&Ty::arrow(Ty::nat(), Ty::Ground(2))));
    }
}
