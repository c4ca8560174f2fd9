//! Normal forms and word lengths for the supported group classes.
//!
//! Every supported class has a closed-form geodesic normal form, so the word
//! length with respect to the standard symmetric generating set is read off
//! the normal form directly.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GroupError;

/// Letters used for free generators and free-product factors. `e` is
/// reserved for the identity.
const LETTERS: &[u8] = b"abcdfghijklmnopqrstuvwxyz";

/// A finitely generated group with a closed-form geodesic normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum GroupSpec {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    Cyclic { order: u64 },
    FreeProduct { factors: Vec<GroupSpec> },
}

/// A group element in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Element {
    /// Freely reduced word; letter `i` (1-based) or its inverse `-i`.
    Free(Vec<i32>),
    /// Exponent vector.
    Abelian(Vec<i64>),
    /// Residue in `0..order`.
    Cyclic(u64),
    /// Alternating syllables from distinct consecutive factors.
    Product(Vec<Syllable>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syllable {
    pub factor: usize,
    pub elem: Element,
}

impl GroupSpec {
    pub fn free_product(factors: Vec<GroupSpec>) -> Self {
        GroupSpec::FreeProduct { factors }
    }

    /// Checks structural restrictions: nested free products are not supported.
    pub fn validate(&self) -> Result<(), GroupError> {
        match self {
            GroupSpec::Free { rank } if *rank > LETTERS.len() => {
                Err(GroupError::UnsupportedSpec(format!("free rank {rank} too large")))
            }
            GroupSpec::Cyclic { order: 0 } => {
                Err(GroupError::UnsupportedSpec("cyclic order must be positive".into()))
            }
            GroupSpec::FreeProduct { factors } => {
                if factors.len() > LETTERS.len() {
                    return Err(GroupError::UnsupportedSpec("too many factors".into()));
                }
                for f in factors {
                    if matches!(f, GroupSpec::FreeProduct { .. }) {
                        return Err(GroupError::UnsupportedSpec(
                            "nested free products are not supported".into(),
                        ));
                    }
                    f.validate()?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Peripheral subgroups: the factors of a free product, nothing otherwise.
    pub fn peripheral_count(&self) -> usize {
        match self {
            GroupSpec::FreeProduct { factors } => factors.len(),
            _ => 0,
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            GroupSpec::Free { .. } => Element::Free(Vec::new()),
            GroupSpec::FreeAbelian { rank } => Element::Abelian(vec![0; *rank]),
            GroupSpec::Cyclic { .. } => Element::Cyclic(0),
            GroupSpec::FreeProduct { .. } => Element::Product(Vec::new()),
        }
    }

    pub fn is_identity(&self, g: &Element) -> bool {
        match g {
            Element::Free(w) => w.is_empty(),
            Element::Abelian(v) => v.iter().all(|&x| x == 0),
            Element::Cyclic(k) => *k == 0,
            Element::Product(s) => s.is_empty(),
        }
    }

    /// The standard finite symmetric generating set, deduplicated and sorted.
    pub fn generators(&self) -> Vec<Element> {
        let mut gens = match self {
            GroupSpec::Free { rank } => (1..=*rank as i32)
                .flat_map(|i| [Element::Free(vec![i]), Element::Free(vec![-i])])
                .collect::<Vec<_>>(),
            GroupSpec::FreeAbelian { rank } => {
                let mut out = Vec::new();
                for i in 0..*rank {
                    for sign in [1, -1] {
                        let mut v = vec![0; *rank];
                        v[i] = sign;
                        out.push(Element::Abelian(v));
                    }
                }
                out
            }
            GroupSpec::Cyclic { order } => {
                if *order == 1 {
                    Vec::new()
                } else {
                    vec![Element::Cyclic(1), Element::Cyclic(order - 1)]
                }
            }
            GroupSpec::FreeProduct { factors } => factors
                .iter()
                .enumerate()
                .flat_map(|(i, f)| {
                    f.generators().into_iter().map(move |elem| {
                        Element::Product(vec![Syllable { factor: i, elem }])
                    })
                })
                .collect(),
        };
        gens.sort();
        gens.dedup();
        gens
    }

    /// Checks that `g` is a normal form of this group.
    pub fn check(&self, g: &Element) -> Result<(), GroupError> {
        let bad = |why: &str| Err(GroupError::MalformedElement(format!("{g}: {why}")));
        match (self, g) {
            (GroupSpec::Free { rank }, Element::Free(w)) => {
                for (i, &x) in w.iter().enumerate() {
                    if x == 0 || x.unsigned_abs() as usize > *rank {
                        return bad("letter out of range");
                    }
                    if i > 0 && w[i - 1] == -x {
                        return bad("word is not freely reduced");
                    }
                }
                Ok(())
            }
            (GroupSpec::FreeAbelian { rank }, Element::Abelian(v)) => {
                if v.len() != *rank {
                    return bad("exponent vector has wrong length");
                }
                Ok(())
            }
            (GroupSpec::Cyclic { order }, Element::Cyclic(k)) => {
                if k >= order {
                    return bad("residue out of range");
                }
                Ok(())
            }
            (GroupSpec::FreeProduct { factors }, Element::Product(s)) => {
                for (i, syl) in s.iter().enumerate() {
                    let Some(f) = factors.get(syl.factor) else {
                        return bad("unknown factor");
                    };
                    if i > 0 && s[i - 1].factor == syl.factor {
                        return bad("adjacent syllables from the same factor");
                    }
                    if f.is_identity(&syl.elem) {
                        return bad("trivial syllable");
                    }
                    f.check(&syl.elem)?;
                }
                Ok(())
            }
            _ => bad("element does not belong to this group class"),
        }
    }

    /// Exact word length with respect to the standard generators.
    pub fn word_length(&self, g: &Element) -> Result<u64, GroupError> {
        self.check(g)?;
        Ok(self.length_unchecked(g))
    }

    pub(crate) fn length_unchecked(&self, g: &Element) -> u64 {
        match (self, g) {
            (_, Element::Free(w)) => w.len() as u64,
            (_, Element::Abelian(v)) => v.iter().map(|x| x.unsigned_abs()).sum(),
            (GroupSpec::Cyclic { order }, Element::Cyclic(k)) => (*k).min(order - k),
            (GroupSpec::FreeProduct { factors }, Element::Product(s)) => s
                .iter()
                .map(|syl| factors[syl.factor].length_unchecked(&syl.elem))
                .sum(),
            _ => unreachable!("length of mismatched element"),
        }
    }

    pub fn inverse(&self, g: &Element) -> Element {
        match (self, g) {
            (_, Element::Free(w)) => Element::Free(w.iter().rev().map(|x| -x).collect()),
            (_, Element::Abelian(v)) => Element::Abelian(v.iter().map(|x| -x).collect()),
            (GroupSpec::Cyclic { order }, Element::Cyclic(k)) => Element::Cyclic((order - k) % order),
            (GroupSpec::FreeProduct { factors }, Element::Product(s)) => Element::Product(
                s.iter()
                    .rev()
                    .map(|syl| Syllable {
                        factor: syl.factor,
                        elem: factors[syl.factor].inverse(&syl.elem),
                    })
                    .collect(),
            ),
            _ => unreachable!("inverse of mismatched element"),
        }
    }

    /// Product `g * h` in normal form.
    pub fn multiply(&self, g: &Element, h: &Element) -> Element {
        match (self, g, h) {
            (_, Element::Free(a), Element::Free(b)) => {
                let mut out = a.clone();
                for &x in b {
                    if out.last() == Some(&-x) {
                        out.pop();
                    } else {
                        out.push(x);
                    }
                }
                Element::Free(out)
            }
            (_, Element::Abelian(a), Element::Abelian(b)) => {
                Element::Abelian(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (GroupSpec::Cyclic { order }, Element::Cyclic(a), Element::Cyclic(b)) => {
                Element::Cyclic((a + b) % order)
            }
            (GroupSpec::FreeProduct { factors }, Element::Product(a), Element::Product(b)) => {
                let mut out = a.clone();
                for syl in b {
                    match out.last() {
                        Some(last) if last.factor == syl.factor => {
                            let f = &factors[syl.factor];
                            let merged = f.multiply(&last.elem, &syl.elem);
                            out.pop();
                            if !f.is_identity(&merged) {
                                out.push(Syllable { factor: syl.factor, elem: merged });
                            }
                        }
                        _ => out.push(syl.clone()),
                    }
                }
                Element::Product(out)
            }
            _ => unreachable!("product of mismatched elements"),
        }
    }

    /// `d_S(g, h) = |g⁻¹h|`.
    pub fn distance(&self, g: &Element, h: &Element) -> u64 {
        self.length_unchecked(&self.multiply(&self.inverse(g), h))
    }

    /// Key identifying the left coset `g H_i`: `g` with a trailing syllable
    /// from factor `i` removed. `None` when the spec has no such factor.
    pub fn coset_key(&self, g: &Element, i: usize) -> Option<Element> {
        match (self, g) {
            (GroupSpec::FreeProduct { factors }, Element::Product(s)) if i < factors.len() => {
                let mut s = s.clone();
                if s.last().map(|l| l.factor) == Some(i) {
                    s.pop();
                }
                Some(Element::Product(s))
            }
            _ => None,
        }
    }

    /// Whether `g` is a nontrivial element of the single factor `i`.
    pub fn in_factor(&self, g: &Element, i: usize) -> bool {
        matches!(g, Element::Product(s) if s.len() == 1 && s[0].factor == i)
    }

    /// Compares by word length, then by normal form.
    pub fn shortlex(&self, g: &Element, h: &Element) -> Ordering {
        self.length_unchecked(g)
            .cmp(&self.length_unchecked(h))
            .then_with(|| g.cmp(h))
    }

    pub fn format(&self, g: &Element) -> String {
        if self.is_identity(g) {
            return "e".to_string();
        }
        match (self, g) {
            (_, Element::Free(w)) => w.iter().map(|&x| free_letter(x)).collect(),
            (_, Element::Abelian(v)) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("({})", parts.join(","))
            }
            (_, Element::Cyclic(k)) => {
                if *k == 1 {
                    "t".into()
                } else {
                    format!("t^{k}")
                }
            }
            (GroupSpec::FreeProduct { factors }, Element::Product(s)) => {
                let mut out = String::new();
                for syl in s {
                    let letter = LETTERS[syl.factor] as char;
                    let f = &factors[syl.factor];
                    match f.single_exponent(&syl.elem) {
                        Some(1) => out.push(letter),
                        Some(e) => out.push_str(&format!("{letter}^{e}")),
                        None => out.push_str(&format!("[{letter}:{}]", f.format(&syl.elem))),
                    }
                }
                out
            }
            _ => format!("{g:?}"),
        }
    }

    /// Exponent form for rank-one factors.
    fn single_exponent(&self, g: &Element) -> Option<i64> {
        match (self, g) {
            (GroupSpec::Free { rank: 1 }, Element::Free(w)) => {
                Some(w.iter().map(|&x| x as i64).sum())
            }
            (GroupSpec::FreeAbelian { rank: 1 }, Element::Abelian(v)) => Some(v[0]),
            (GroupSpec::Cyclic { .. }, Element::Cyclic(k)) => Some(*k as i64),
            _ => None,
        }
    }

    fn exponent_element(&self, e: i64) -> Option<Element> {
        match self {
            GroupSpec::Free { rank: 1 } => {
                let letter = if e >= 0 { 1 } else { -1 };
                Some(Element::Free(vec![letter; e.unsigned_abs() as usize]))
            }
            GroupSpec::FreeAbelian { rank: 1 } => Some(Element::Abelian(vec![e])),
            GroupSpec::Cyclic { order } => {
                Some(Element::Cyclic(e.rem_euclid(*order as i64) as u64))
            }
            _ => None,
        }
    }

    /// Parses the textual form produced by [`GroupSpec::format`]. The result
    /// is normalized, so non-reduced input such as `abB` is accepted.
    pub fn parse(&self, text: &str) -> Result<Element, GroupError> {
        let text = text.trim();
        let bad = |why: &str| Err(GroupError::MalformedElement(format!("{text}: {why}")));
        if text == "e" {
            return Ok(self.identity());
        }
        match self {
            GroupSpec::Free { rank } => {
                let mut g = self.identity();
                for c in text.chars() {
                    let Some(pos) = letter_index(c.to_ascii_lowercase()) else {
                        return bad("unknown letter");
                    };
                    if pos >= *rank {
                        return bad("letter out of range");
                    }
                    let x = pos as i32 + 1;
                    let x = if c.is_ascii_uppercase() { -x } else { x };
                    g = self.multiply(&g, &Element::Free(vec![x]));
                }
                Ok(g)
            }
            GroupSpec::FreeAbelian { rank } => {
                let inner = text
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| GroupError::MalformedElement(text.into()))?;
                let v: Result<Vec<i64>, _> = inner.split(',').map(|p| p.trim().parse()).collect();
                match v {
                    Ok(v) if v.len() == *rank => Ok(Element::Abelian(v)),
                    _ => bad("bad exponent vector"),
                }
            }
            GroupSpec::Cyclic { .. } => {
                let rest = text
                    .strip_prefix('t')
                    .ok_or_else(|| GroupError::MalformedElement(text.into()))?;
                let e = if rest.is_empty() {
                    1
                } else {
                    match rest.strip_prefix('^').map(str::parse::<i64>) {
                        Some(Ok(e)) => e,
                        _ => return bad("bad exponent"),
                    }
                };
                Ok(self.exponent_element(e).expect("cyclic exponent"))
            }
            GroupSpec::FreeProduct { factors } => {
                let bytes = text.as_bytes();
                let mut pos = 0;
                let mut g = self.identity();
                while pos < bytes.len() {
                    let syl = if bytes[pos] == b'[' {
                        let close = match text[pos..].find(']') {
                            Some(c) => pos + c,
                            None => return bad("unterminated syllable"),
                        };
                        let body = &text[pos + 1..close];
                        let Some((l, inner)) = body.split_once(':') else {
                            return bad("syllable lacks factor tag");
                        };
                        let Some(fi) = l.chars().next().and_then(letter_index) else {
                            return bad("unknown factor letter");
                        };
                        let Some(f) = factors.get(fi) else {
                            return bad("factor out of range");
                        };
                        pos = close + 1;
                        Syllable { factor: fi, elem: f.parse(inner)? }
                    } else {
                        let Some(fi) = letter_index(bytes[pos] as char) else {
                            return bad("unknown factor letter");
                        };
                        let Some(f) = factors.get(fi) else {
                            return bad("factor out of range");
                        };
                        pos += 1;
                        let mut e = 1i64;
                        if pos < bytes.len() && bytes[pos] == b'^' {
                            let start = pos + 1;
                            let mut end = start;
                            if end < bytes.len() && bytes[end] == b'-' {
                                end += 1;
                            }
                            while end < bytes.len() && bytes[end].is_ascii_digit() {
                                end += 1;
                            }
                            e = match text[start..end].parse() {
                                Ok(e) => e,
                                Err(_) => return bad("bad exponent"),
                            };
                            pos = end;
                        }
                        let Some(elem) = f.exponent_element(e) else {
                            return bad("factor needs bracketed syllables");
                        };
                        Syllable { factor: fi, elem }
                    };
                    if !factors[syl.factor].is_identity(&syl.elem) {
                        g = self.multiply(&g, &Element::Product(vec![syl]));
                    }
                }
                Ok(g)
            }
        }
    }
}

fn letter_index(c: char) -> Option<usize> {
    LETTERS.iter().position(|&l| l as char == c)
}

fn free_letter(x: i32) -> char {
    let c = LETTERS[(x.unsigned_abs() - 1) as usize] as char;
    if x < 0 {
        c.to_ascii_uppercase()
    } else {
        c
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Free(w) if w.is_empty() => write!(f, "e"),
            Element::Free(w) => {
                for &x in w {
                    write!(f, "{}", free_letter(x))?;
                }
                Ok(())
            }
            Element::Abelian(v) => write!(f, "{v:?}"),
            Element::Cyclic(k) => write!(f, "t^{k}"),
            Element::Product(s) if s.is_empty() => write!(f, "e"),
            Element::Product(s) => {
                for syl in s {
                    write!(f, "[{}:{}]", LETTERS[syl.factor] as char, syl.elem)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupSpec {
        GroupSpec::FreeAbelian { rank: 1 }
    }

    fn zz() -> GroupSpec {
        GroupSpec::free_product(vec![z(), z()])
    }

    #[test]
    fn free_word_length() {
        let f2 = GroupSpec::Free { rank: 2 };
        let g = f2.parse("abA").unwrap();
        assert_eq!(f2.word_length(&g).unwrap(), 3);
        assert_eq!(f2.parse("abB").unwrap(), Element::Free(vec![1]));
    }

    #[test]
    fn abelian_word_length() {
        let z2 = GroupSpec::FreeAbelian { rank: 2 };
        assert_eq!(z2.word_length(&Element::Abelian(vec![3, -2])).unwrap(), 5);
    }

    #[test]
    fn product_syllable_lengths() {
        let g = zz().parse("a^2b^-1").unwrap();
        assert_eq!(zz().word_length(&g).unwrap(), 3);
        assert_eq!(zz().format(&g), "a^2b^-1");
    }

    #[test]
    fn malformed_elements_rejected() {
        let f2 = GroupSpec::Free { rank: 2 };
        assert!(f2.word_length(&Element::Free(vec![1, -1])).is_err());
        assert!(f2.word_length(&Element::Free(vec![3])).is_err());
        let c3 = GroupSpec::Cyclic { order: 3 };
        assert!(c3.word_length(&Element::Cyclic(3)).is_err());
        let bad = Element::Product(vec![
            Syllable { factor: 0, elem: Element::Abelian(vec![1]) },
            Syllable { factor: 0, elem: Element::Abelian(vec![1]) },
        ]);
        assert!(zz().word_length(&bad).is_err());
        assert!(zz().word_length(&Element::Cyclic(0)).is_err());
    }

    #[test]
    fn product_multiplication_cancels_across_syllables() {
        let g = zz();
        let x = g.parse("a^2b").unwrap();
        let y = g.parse("b^-1a^-2").unwrap();
        assert!(g.is_identity(&g.multiply(&x, &y)));
        let c = GroupSpec::free_product(vec![
            GroupSpec::Cyclic { order: 2 },
            GroupSpec::Cyclic { order: 3 },
        ]);
        let b = c.parse("b").unwrap();
        let b3 = c.multiply(&c.multiply(&b, &b), &b);
        assert!(c.is_identity(&b3));
        assert_eq!(c.word_length(&c.multiply(&b, &b)).unwrap(), 1);
    }

    #[test]
    fn format_parse_round_trip() {
        let specs = [
            GroupSpec::Free { rank: 3 },
            GroupSpec::FreeAbelian { rank: 2 },
            GroupSpec::Cyclic { order: 5 },
            zz(),
            GroupSpec::free_product(vec![GroupSpec::Free { rank: 2 }, GroupSpec::Cyclic { order: 4 }]),
        ];
        for spec in &specs {
            let mut frontier = vec![spec.identity()];
            for _ in 0..3 {
                let mut next = Vec::new();
                for g in &frontier {
                    for s in spec.generators() {
                        next.push(spec.multiply(g, &s));
                    }
                }
                frontier = next;
            }
            for g in frontier {
                assert_eq!(spec.parse(&spec.format(&g)).unwrap(), g, "{spec:?}");
            }
        }
    }

    #[test]
    fn coset_keys() {
        let g = zz();
        let x = g.parse("ba^3").unwrap();
        assert_eq!(g.coset_key(&x, 0), Some(g.parse("b").unwrap()));
        assert_eq!(g.coset_key(&x, 1), Some(x.clone()));
    }

    #[test]
    fn nested_products_rejected() {
        let bad = GroupSpec::free_product(vec![zz(), z()]);
        assert!(bad.validate().is_err());
    }
}
