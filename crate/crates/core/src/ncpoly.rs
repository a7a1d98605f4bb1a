//! Noncommutative *-polynomials over indexed generators `T1, T2, ...`.
//!
//! The algebra is free: monomials are words in letters `Tj` and `Tj*` and are
//! never rewritten. Coefficients are `Complex64`; after every arithmetic
//! operation terms whose modulus falls below `1e-15 · max|coeff|` are dropped.
//!
//! Text syntax: generators `T<n>` (n ≥ 1), postfix adjoint `'`, binary
//! `+ - *`, juxtaposition as product, integer powers `^p`, scalars `2`,
//! `0.5`, `3i`, `(1+2i)`, parentheses. Whitespace is insignificant.
//! Monomials are written as space-separated letters, e.g. `T1 T2' T1`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::linalg::{CMat, C64, ONE, ZERO};
use crate::{Error, Result};

/// Relative modulus below which coefficients are pruned.
pub const PRUNE_RELATIVE: f64 = 1e-15;

/// A generator `T_index` or its adjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub index: usize,
    pub starred: bool,
}

impl Letter {
    pub fn new(index: usize, starred: bool) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidArgument("generator index must be ≥ 1".into()));
        }
        Ok(Self { index, starred })
    }

    pub fn generator(index: usize) -> Self {
        assert!(index >= 1, "generator index must be ≥ 1");
        Self { index, starred: false }
    }

    pub fn adjoint(self) -> Self {
        Self { index: self.index, starred: !self.starred }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}{}", self.index, if self.starred { "'" } else { "" })
    }
}

/// A word in letters; the empty word is the unit.
///
/// Ordered length-lexicographically on `(index, starred)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<Letter>);

impl Monomial {
    pub fn unit() -> Self {
        Self(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.0.iter().map(|l| l.index).max().unwrap_or(0)
    }

    /// Reverse the word and flip every star.
    pub fn adjoint(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.adjoint()).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut w = Vec::with_capacity(self.0.len() + other.0.len());
        w.extend_from_slice(&self.0);
        w.extend_from_slice(&other.0);
        Self(w)
    }

    /// Cyclic rotation moving the first `shift` letters to the end.
    pub fn rotate(&self, shift: usize) -> Self {
        let mut w = self.0.clone();
        if !w.is_empty() {
            let n = w.len();
            w.rotate_left(shift % n);
        }
        Self(w)
    }

    /// All *-monomials in generators `1..=n_gens` of degree ≤ `max_degree`,
    /// in canonical order.
    pub fn enumerate(n_gens: usize, max_degree: usize) -> Vec<Monomial> {
        let alphabet: Vec<Letter> = (1..=n_gens)
            .flat_map(|i| [Letter::generator(i), Letter::generator(i).adjoint()])
            .collect();
        let mut out = vec![Monomial::unit()];
        let mut layer = vec![Monomial::unit()];
        for _ in 0..max_degree {
            let mut next = Vec::with_capacity(layer.len() * alphabet.len());
            for w in &layer {
                for &l in &alphabet {
                    let mut v = w.0.clone();
                    v.push(l);
                    next.push(Monomial(v));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Monomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p: NcPoly = s.parse()?;
        match p.terms.iter().next() {
            Some((m, c)) if p.terms.len() == 1 && *c == ONE => Ok(m.clone()),
            _ => Err(Error::Parse { pos: 0, msg: format!("{s:?} is not a monomial") }),
        }
    }
}

/// A finite linear combination of monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NcPoly {
    terms: BTreeMap<Monomial, C64>,
}

impl NcPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: C64) -> Self {
        Self::from_terms([(Monomial::unit(), c)])
    }

    pub fn generator(index: usize) -> Self {
        Self::letter(Letter::generator(index))
    }

    pub fn letter(l: Letter) -> Self {
        Self::from_terms([(Monomial(vec![l]), ONE)])
    }

    pub fn monomial(m: Monomial, c: C64) -> Self {
        Self::from_terms([(m, c)])
    }

    /// Sum of the given terms; repeated monomials are merged, then pruned.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, C64)>>(terms: I) -> Self {
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert(ZERO) += c;
        }
        let mut p = Self { terms: map };
        p.prune();
        p
    }

    fn prune(&mut self) {
        let max = self.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = PRUNE_RELATIVE * max;
        self.terms.retain(|_, c| {
            let n = c.norm();
            n > 0.0 && n >= cut
        });
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest generator index that occurs (0 for constants).
    pub fn max_index(&self) -> usize {
        self.terms.keys().map(Monomial::max_index).max().unwrap_or(0)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, a)| (m.clone(), a * c)))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.adjoint(), c.conj())))
    }

    /// `‖P − P*‖` measured as the largest coefficient gap, relative to the largest coefficient.
    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        let diff = self - &self.adjoint();
        let max = self.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        diff.terms.values().all(|c| c.norm() <= tol * max.max(1.0))
    }

    pub fn pow(&self, p: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..p {
            acc = &acc * self;
        }
        acc
    }

    /// Replace every letter by a polynomial.
    pub fn substitute<F: Fn(Letter) -> NcPoly>(&self, f: F) -> Self {
        let mut acc = Self::zero();
        for (m, c) in &self.terms {
            let mut term = Self::constant(*c);
            for &l in m.letters() {
                term = &term * &f(l);
            }
            acc = &acc + &term;
        }
        acc
    }

    /// Substitute `A_j` for `T_j` and `A_j*` for `T_j*`.
    pub fn evaluate(&self, mats: &[CMat]) -> Result<CMat> {
        let need = self.max_index();
        if need > mats.len() {
            return Err(Error::IndexOutOfRange { index: need, len: mats.len() });
        }
        let k = match mats.first() {
            Some(m) => m.nrows(),
            None => {
                return Err(Error::InvalidArgument("cannot evaluate on an empty tuple".into()));
            }
        };
        let adjoints: Vec<CMat> = mats.iter().map(|a| a.adjoint()).collect();
        let letter_matrix = |l: &Letter| if l.starred { &adjoints[l.index - 1] } else { &mats[l.index - 1] };

        // Walk words in lexicographic order so shared prefixes are multiplied once.
        let mut words: Vec<(&Monomial, C64)> = self.terms.iter().map(|(m, c)| (m, *c)).collect();
        words.sort_by(|a, b| a.0.letters().cmp(b.0.letters()));

        let mut out = CMat::zeros(k, k);
        let mut prefix: Vec<CMat> = Vec::new();
        let mut prev: &[Letter] = &[];
        for (m, c) in words {
            let w = m.letters();
            let common = prev.iter().zip(w).take_while(|(a, b)| a == b).count();
            prefix.truncate(common);
            for l in &w[common..] {
                let next = match prefix.last() {
                    Some(p) => p * letter_matrix(l),
                    None => letter_matrix(l).clone(),
                };
                prefix.push(next);
            }
            match prefix.last() {
                Some(p) => out += p * c,
                None => {
                    for i in 0..k {
                        out[(i, i)] += c;
                    }
                }
            }
            prev = w;
        }
        Ok(out)
    }
}

impl From<C64> for NcPoly {
    fn from(c: C64) -> Self {
        Self::constant(c)
    }
}

impl From<f64> for NcPoly {
    fn from(c: f64) -> Self {
        Self::constant(C64::new(c, 0.0))
    }
}

impl Add for &NcPoly {
    type Output = NcPoly;

    fn add(self, rhs: &NcPoly) -> NcPoly {
        NcPoly::from_terms(self.terms.iter().chain(rhs.terms.iter()).map(|(m, c)| (m.clone(), *c)))
    }
}

impl Sub for &NcPoly {
    type Output = NcPoly;

    fn sub(self, rhs: &NcPoly) -> NcPoly {
        NcPoly::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (m.clone(), *c))
                .chain(rhs.terms.iter().map(|(m, c)| (m.clone(), -*c))),
        )
    }
}

impl Mul for &NcPoly {
    type Output = NcPoly;

    fn mul(self, rhs: &NcPoly) -> NcPoly {
        let mut map: BTreeMap<Monomial, C64> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                *map.entry(a.concat(b)).or_insert(ZERO) += ca * cb;
            }
        }
        let mut p = NcPoly { terms: map };
        p.prune();
        p
    }
}

impl Neg for &NcPoly {
    type Output = NcPoly;

    fn neg(self) -> NcPoly {
        NcPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -*c)).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for NcPoly {
            type Output = NcPoly;
            fn $method(self, rhs: NcPoly) -> NcPoly {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

fn format_f64(x: f64) -> String {
    // `{:?}` is the shortest representation that parses back to the same value.
    format!("{x:?}")
}

fn format_coeff(c: C64) -> String {
    if c.im == 0.0 {
        format_f64(c.re)
    } else if c.re == 0.0 {
        format!("{}i", format_f64(c.im))
    } else if c.im < 0.0 {
        format!("({}-{}i)", format_f64(c.re), format_f64(-c.im))
    } else {
        format!("({}+{}i)", format_f64(c.re), format_f64(c.im))
    }
}

impl fmt::Display for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let text = if m.is_unit() {
                format_coeff(*c)
            } else if *c == ONE {
                m.to_string()
            } else if *c == -ONE {
                format!("-{m}")
            } else {
                format!("{}*{m}", format_coeff(*c))
            };
            if i == 0 {
                write!(f, "{text}")?;
            } else if let Some(rest) = text.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {text}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for NcPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let poly = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(poly)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<NcPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<NcPoly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(c) if c == b'T' || c == b'(' || c == b'i' || c == b'.' || c.is_ascii_digit() => {
                    acc = &acc * &self.factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<NcPoly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.factor()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            _ => {
                let mut base = self.primary()?;
                loop {
                    match self.peek() {
                        Some(b'\'') => {
                            self.pos += 1;
                            base = base.adjoint();
                        }
                        Some(b'^') => {
                            self.pos += 1;
                            self.skip_ws();
                            let start = self.pos;
                            let digits = self.digits();
                            let p: u32 = digits
                                .parse()
                                .map_err(|_| Error::Parse { pos: start, msg: "expected a nonnegative integer power".into() })?;
                            base = base.pow(p);
                        }
                        _ => return Ok(base),
                    }
                }
            }
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn primary(&mut self) -> Result<NcPoly> {
        match self.peek() {
            Some(b'T') => {
                let start = self.pos;
                self.pos += 1;
                let digits = self.digits();
                let index: usize =
                    digits.parse().map_err(|_| Error::Parse { pos: start, msg: "expected generator index after 'T'".into() })?;
                if index == 0 {
                    return Err(Error::Parse { pos: start, msg: "generator index 0 is not allowed".into() });
                }
                Ok(NcPoly::generator(index))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(NcPoly::constant(C64::new(0.0, 1.0)))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<NcPoly> {
        let start = self.pos;
        let src = self.src;
        let mut end = self.pos;
        while end < src.len() && (src[end].is_ascii_digit() || src[end] == b'.') {
            end += 1;
        }
        if end < src.len() && (src[end] == b'e' || src[end] == b'E') {
            let mut e = end + 1;
            if e < src.len() && (src[e] == b'+' || src[e] == b'-') {
                e += 1;
            }
            if e < src.len() && src[e].is_ascii_digit() {
                while e < src.len() && src[e].is_ascii_digit() {
                    e += 1;
                }
                end = e;
            }
        }
        let text = std::str::from_utf8(&src[start..end]).expect("ascii");
        let value: f64 = text.parse().map_err(|_| Error::Parse { pos: start, msg: format!("bad number {text:?}") })?;
        self.pos = end;
        if self.pos < src.len() && src[self.pos] == b'i' {
            self.pos += 1;
            return Ok(NcPoly::constant(C64::new(0.0, value)));
        }
        Ok(NcPoly::constant(C64::new(value, 0.0)))
    }
}
