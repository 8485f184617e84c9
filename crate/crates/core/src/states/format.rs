//! Plain-text serialization of [`GenericState`]:
//!
//! ```text
//! m1=0
//! j1=0 a=0.609
//! j1=1 a=0.7931645479...
//! ```

use std::fmt;
use std::str::FromStr;

use super::GenericState;
use crate::error::Error;
use crate::halfint::HalfInt;

impl fmt::Display for GenericState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m1={}", self.m1)?;
        for (j1, a) in &self.amplitudes {
            writeln!(f, "j1={j1} a={a}")?;
        }
        Ok(())
    }
}

fn field<'a>(token: &'a str, key: &str, line: usize) -> Result<&'a str, Error> {
    token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("line {line}: expected '{key}=...', got '{token}'")))
}

impl FromStr for GenericState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (n, first) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty state".into()))?;
        let m1: HalfInt = field(first, "m1", n)?.parse()?;

        let mut amplitudes = Vec::new();
        for (n, line) in lines {
            let mut tokens = line.split_whitespace();
            let (Some(jt), Some(at), None) = (tokens.next(), tokens.next(), tokens.next()) else {
                return Err(Error::Parse(format!(
                    "line {n}: expected 'j1=<label> a=<amplitude>'"
                )));
            };
            let j1: HalfInt = field(jt, "j1", n)?.parse()?;
            let text = field(at, "a", n)?;
            if text.contains(['i', 'j']) && !text.eq_ignore_ascii_case("inf") {
                return Err(Error::Parse(format!(
                    "line {n}: complex amplitude '{text}' is not supported; amplitudes are real"
                )));
            }
            let a: f64 = text
                .parse()
                .map_err(|_| Error::Parse(format!("line {n}: '{text}' is not a decimal number")))?;
            amplitudes.push((j1, a));
        }
        GenericState::new(m1, amplitudes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_documented_layout() {
        let text = "m1=0\nj1=0 a=0.6\nj1=1 a=0.8\n";
        let s: GenericState = text.parse().unwrap();
        assert_eq!(s.m1(), HalfInt::ZERO);
        assert_eq!(s.amplitude(HalfInt::ONE), 0.8);
        assert_eq!(s.to_string(), text);

        let half: GenericState = "# comment\nm1=1/2\n\nj1=1/2 a=1\n".parse().unwrap();
        assert!(half.is_coherent());
        assert_eq!(half.to_string(), "m1=1/2\nj1=1/2 a=1\n");
    }

    #[test]
    fn rejects_bad_input() {
        assert!("j1=0 a=1".parse::<GenericState>().is_err());
        assert!("m1=0\nj1=0 a=0.5+0.5i".parse::<GenericState>().is_err());
        assert!("m1=0\nj1=0 a=0.5".parse::<GenericState>().is_err());
        assert!("m1=0\nj1=0".parse::<GenericState>().is_err());
        assert!("m1=0.5\nj1=1/2 a=1".parse::<GenericState>().is_err());
        assert!("m1=-1\nj1=1 a=1".parse::<GenericState>().is_err());
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(a in 0.0f64..=1.0) {
            let s = GenericState::two_term(a).unwrap();
            let back: GenericState = s.to_string().parse().unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
