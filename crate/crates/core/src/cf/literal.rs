//! Text forms of a continued fraction.
//!
//! ```text
//! [a0; a1, a2, ...]                      finite list
//! [a0; a1, ... (period: b1, b2)]         periodic tail
//! [a0; a1, ... (const: c)]               constant tail
//! [a0; a1, ... (arith: c*k+d)]           a_k = c*k + d past the list
//! [a0; a1, ... (rand: seed)]             seeded random tail, 256 bits
//! [a0; a1, ... (rand: seed, bits: 1024)]
//! (u+v*sqrt(d))/w                        quadratic irrational
//! ```
//!
//! Aliases: `sqrtN`, `golden`, `bessel` (`[0; 1, 2, 3, ...]`).

use num_bigint::BigInt;

use super::{CFNumber, TailRule, DEFAULT_RANDOM_BITS};
use crate::error::{Error, Result};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            column: self.src[..self.pos].chars().count() + 1,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.err(format!("expected '{c}', found '{found}'")),
                None => self.err(format!("expected '{c}', found end of input")),
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> &'a str {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
            .unwrap_or(self.rest().len());
        let s = &self.rest()[..len];
        self.pos += len;
        s
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let rest = self.rest();
        let mut len = 0;
        for (i, c) in rest.char_indices() {
            if c.is_ascii_digit() || (i == 0 && (c == '-' || c == '+')) {
                len = i + c.len_utf8();
            } else {
                break;
            }
        }
        let text = &rest[..len];
        match text.parse::<BigInt>() {
            Ok(n) => {
                self.pos += len;
                Ok(n)
            }
            Err(_) => self.err("expected an integer"),
        }
    }

    fn small<T: TryFrom<BigInt>>(&mut self, what: &str) -> Result<T> {
        let n = self.integer()?;
        match T::try_from(n) {
            Ok(v) => Ok(v),
            Err(_) => self.err(format!("{what} out of range")),
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(format!("unexpected trailing '{c}'")),
        }
    }
}

pub(super) fn parse(src: &str) -> Result<CFNumber> {
    let mut cur = Cursor::new(src);
    match cur.peek() {
        Some('[') => parse_list(&mut cur),
        Some('(') => parse_quadratic(&mut cur),
        Some(c) if c.is_ascii_alphabetic() => parse_alias(&mut cur),
        Some(c) => cur.err(format!("unexpected '{c}'")),
        None => cur.err("empty literal"),
    }
}

fn parse_alias(cur: &mut Cursor<'_>) -> Result<CFNumber> {
    let start = cur.pos;
    let name = cur.ident();
    let cf = match name {
        "golden" | "phi" => CFNumber::golden(),
        "bessel" => CFNumber::arithmetic_identity(),
        _ if name.starts_with("sqrt") => match name[4..].parse::<i64>() {
            Ok(d) => CFNumber::sqrt(d)?,
            Err(_) => {
                cur.pos = start;
                return cur.err(format!("unknown alias {name:?}"));
            }
        },
        _ => {
            cur.pos = start;
            return cur.err(format!("unknown alias {name:?}"));
        }
    };
    cur.finish()?;
    Ok(cf)
}

fn parse_quadratic(cur: &mut Cursor<'_>) -> Result<CFNumber> {
    cur.expect('(')?;
    // optional u, then a signed sqrt term with optional coefficient
    let mut u = 0i64;
    let mut sign = 1i64;
    let save = cur.pos;
    if !cur.keyword("sqrt") {
        cur.pos = save;
        u = cur.small("u")?;
        if cur.eat('+') {
            sign = 1;
        } else if cur.eat('-') {
            sign = -1;
        } else {
            return cur.err("expected '+' or '-' before the sqrt term");
        }
        if !cur.keyword("sqrt") {
            let v: i64 = cur.small("v")?;
            sign *= v;
            cur.expect('*')?;
            if !cur.keyword("sqrt") {
                return cur.err("expected 'sqrt'");
            }
        }
    }
    cur.expect('(')?;
    let d: i64 = cur.small("d")?;
    cur.expect(')')?;
    cur.expect(')')?;
    let w = if cur.eat('/') { cur.small("w")? } else { 1 };
    cur.finish()?;
    CFNumber::from_quadratic(u, sign, w, d)
}

fn parse_list(cur: &mut Cursor<'_>) -> Result<CFNumber> {
    cur.expect('[')?;
    let a0 = cur.integer()?;
    let mut head = Vec::new();
    let mut tail = TailRule::Terminate;
    if cur.eat(';') {
        loop {
            match cur.peek() {
                Some('(') => {
                    tail = parse_tail(cur)?;
                    break;
                }
                Some(']') => break,
                Some(_) => {
                    let col = cur.pos;
                    let a: u64 = cur.small("coefficient")?;
                    if a == 0 {
                        cur.pos = col;
                        return cur.err("coefficients after a_0 must be >= 1");
                    }
                    head.push(a);
                    cur.eat(',');
                }
                None => return cur.err("unterminated list"),
            }
        }
    }
    cur.expect(']')?;
    cur.finish()?;
    CFNumber::new(a0, head, tail)
}

fn parse_tail(cur: &mut Cursor<'_>) -> Result<TailRule> {
    cur.expect('(')?;
    let name_pos = cur.pos;
    let name = cur.ident();
    cur.expect(':')?;
    let rule = match name {
        "period" => {
            let mut period = vec![cur.small("period entry")?];
            while cur.eat(',') {
                period.push(cur.small("period entry")?);
            }
            TailRule::Periodic { period }
        }
        "const" => TailRule::Constant {
            value: cur.small("constant")?,
        },
        "arith" => parse_arith(cur)?,
        "rand" => {
            let seed = cur.small("seed")?;
            let mut bits = DEFAULT_RANDOM_BITS;
            if cur.eat(',') {
                if !cur.keyword("bits") {
                    return cur.err("expected 'bits'");
                }
                cur.expect(':')?;
                bits = cur.small("bits")?;
            }
            TailRule::SeededRandom { seed, bits }
        }
        _ => {
            cur.pos = name_pos;
            return cur.err(format!("unknown tail rule {name:?}"));
        }
    };
    cur.expect(')')?;
    Ok(rule)
}

/// `c*k+d`, `c*k-d`, `k+d`, `c*k`, `k`.
fn parse_arith(cur: &mut Cursor<'_>) -> Result<TailRule> {
    let mut c = 1i64;
    if !cur.keyword("k") {
        c = cur.small("c")?;
        cur.expect('*')?;
        if !cur.keyword("k") {
            return cur.err("expected 'k'");
        }
    }
    let d = if cur.eat('+') {
        cur.small("d")?
    } else if cur.eat('-') {
        -cur.small::<i64>("d")?
    } else {
        0
    };
    Ok(TailRule::Arithmetic { c, d })
}

pub(super) fn format(cf: &CFNumber) -> String {
    if let Some(q) = &cf.quadratic {
        return format!("({}{:+}*sqrt({}))/{}", q.u, q.v, q.d, q.w);
    }
    let mut s = format!("[{};", cf.a0);
    let list: Vec<String> = cf.head.iter().map(|a| a.to_string()).collect();
    if !list.is_empty() {
        s.push(' ');
        s.push_str(&list.join(", "));
    }
    let tail = match &cf.tail {
        TailRule::Terminate => None,
        TailRule::Constant { value } => Some(format!("(const: {value})")),
        TailRule::Periodic { period } => Some(format!(
            "(period: {})",
            period.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
        )),
        TailRule::Arithmetic { c, d } => Some(format!("(arith: {c}*k{d:+})")),
        TailRule::SeededRandom { seed, bits } if *bits == DEFAULT_RANDOM_BITS => {
            Some(format!("(rand: {seed})"))
        }
        TailRule::SeededRandom { seed, bits } => Some(format!("(rand: {seed}, bits: {bits})")),
    };
    if let Some(t) = tail {
        s.push(' ');
        s.push_str(&t);
    }
    s.push(']');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_tail_rules() {
        let cf = parse("[0; 1 (arith: 1*k+0)]").unwrap();
        assert_eq!(cf.coefficients(5).unwrap(), vec![1, 2, 3, 4, 5]);
        let cf = parse("[1; (const: 1)]").unwrap();
        assert_eq!(cf.coefficients(3).unwrap(), vec![1, 1, 1]);
        let cf = parse("[2; 1, 1 (period: 3, 4)]").unwrap();
        assert_eq!(cf.coefficients(6).unwrap(), vec![1, 1, 3, 4, 3, 4]);
        let cf = parse("[0; 1, 2, 3]").unwrap();
        assert_eq!(cf.available(), Some(3));
        let cf = parse("[0; (arith: k-1)]");
        assert!(cf.is_err(), "a_1 = 0 must be rejected");
        let cf = parse("[0; (rand: 9, bits: 512)]").unwrap();
        assert_eq!(cf.tail(), &TailRule::SeededRandom { seed: 9, bits: 512 });
    }

    #[test]
    fn parses_quadratic_forms() {
        let a = parse("(0+1*sqrt(2))/1").unwrap();
        let b = parse("sqrt2").unwrap();
        let c = parse("(sqrt(2))").unwrap();
        assert_eq!(a.coefficients(8).unwrap(), b.coefficients(8).unwrap());
        assert_eq!(a.coefficients(8).unwrap(), c.coefficients(8).unwrap());
        let g = parse("(1+sqrt(5))/2").unwrap();
        assert_eq!(g.coefficients(4).unwrap(), vec![1, 1, 1, 1]);
        let n = parse("(3-2*sqrt(7))/5").unwrap();
        assert_eq!(n.quadratic().unwrap().v, -2);
    }

    #[test]
    fn errors_carry_columns() {
        match parse("[0; 1, x]") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 8),
            other => panic!("{other:?}"),
        }
        match parse("[0; 1 (wobble: 3)]") {
            Err(Error::Parse { column, message }) => {
                assert_eq!(column, 8);
                assert!(message.contains("wobble"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("(1+1*sqrt(4))/1"), Err(Error::RationalInput(_))));
        assert!(matches!(parse(""), Err(Error::Parse { column: 1, .. })));
    }

    fn tail_strategy() -> impl Strategy<Value = TailRule> {
        prop_oneof![
            Just(TailRule::Terminate),
            (1u64..9).prop_map(|value| TailRule::Constant { value }),
            prop::collection::vec(1u64..9, 1..4).prop_map(|period| TailRule::Periodic { period }),
            (0i64..4, 1i64..5).prop_map(|(c, d)| TailRule::Arithmetic { c, d }),
            (0u64..1000, 64u32..300).prop_map(|(seed, bits)| TailRule::SeededRandom { seed, bits }),
        ]
    }

    proptest! {
        #[test]
        fn literal_round_trips(a0 in -5i64..5, head in prop::collection::vec(1u64..20, 0..6), tail in tail_strategy()) {
            let cf = CFNumber::new(a0, head, tail).unwrap();
            let back = parse(&cf.to_literal()).unwrap();
            prop_assert_eq!(back, cf);
        }
    }
}
