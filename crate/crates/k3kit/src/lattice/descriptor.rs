//! Parsing of lattice descriptors such as `U^3+E8(-1)^2` or `<-4>+U^2`.

use super::{Lattice, LatticeError, Summand};

fn parse_summand(token: &str) -> Result<(Summand, usize), LatticeError> {
    let bad = || LatticeError::MalformedDescriptor(token.to_string());
    let (base, power) = match token.rsplit_once('^') {
        Some((b, p)) => {
            let k: usize = p.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            (b, k)
        }
        None => (token, 1),
    };
    let summand = match base {
        "U" => Summand::Hyperbolic,
        "E8(-1)" => Summand::E8,
        _ => {
            let inner = base
                .strip_prefix('<')
                .and_then(|s| s.strip_suffix('>'))
                .ok_or_else(bad)?;
            let d: i64 = inner.parse().map_err(|_| bad())?;
            if d >= 0 || d % 2 != 0 {
                return Err(bad());
            }
            Summand::Rank1(d)
        }
    };
    Ok((summand, power))
}

/// Builds the block-diagonal lattice named by `descriptor`. Whitespace is
/// ignored; summands are joined with `+` and may carry a power `^k`.
pub fn make_lattice(descriptor: &str) -> Result<Lattice, LatticeError> {
    let text: String = descriptor.chars().filter(|c| !c.is_whitespace()).collect();
    if text.is_empty() {
        return Err(LatticeError::EmptyDescriptor);
    }
    let mut summands = Vec::new();
    for token in text.split('+') {
        if token.is_empty() {
            return Err(LatticeError::MalformedDescriptor(descriptor.to_string()));
        }
        let (s, k) = parse_summand(token)?;
        summands.extend(std::iter::repeat_n(s, k));
    }
    Lattice::from_summands(summands)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_powers_and_blocks() {
        let l = make_lattice("U^2 + E8(-1) + <-6>").unwrap();
        assert_eq!(l.rank(), 13);
        assert_eq!(l.label(), "U^2+E8(-1)+<-6>");
        assert_eq!(l.signature(), (2, 11));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(make_lattice("").unwrap_err(), LatticeError::EmptyDescriptor);
        assert_eq!(
            make_lattice("  ").unwrap_err(),
            LatticeError::EmptyDescriptor
        );
        for bad in ["V", "U^0", "U+", "<3>", "<-3>", "<2>", "E8", "U^x"] {
            assert!(
                matches!(make_lattice(bad), Err(LatticeError::MalformedDescriptor(_))),
                "{bad}"
            );
        }
    }
}
