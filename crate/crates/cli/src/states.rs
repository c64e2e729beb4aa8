//! Text syntax for input states:
//!
//! - `basis:X`: computational-basis state with index `X` (qubit 1 most significant)
//! - `pair:X,Y`: `(|X> + |Y>)/sqrt(2)`
//! - `mixed`: the maximally mixed state
//! - `dense:FILE`: a density matrix, first matrix of a binary matrix file
//! - `pure:FILE`: JSON array of `[re, im]` amplitudes

use std::fs::File;
use std::io::BufReader;

use num_complex::Complex64;
use spcirc::dense::read_matrices;
use spcirc::gp_stats::StateSpec;
use spcirc::{Error, Result};

fn index(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Parse(format!("invalid basis index {s:?}")))
}

pub fn parse_state(n: usize, spec: &str) -> Result<StateSpec> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let state = match kind {
        "basis" => StateSpec::basis(n, index(arg)?)?,
        "pair" => {
            let (x, y) = arg.split_once(',').ok_or_else(|| Error::Parse(format!("pair needs two indices: {spec:?}")))?;
            StateSpec::pair(n, index(x)?, index(y)?)?
        }
        "mixed" => StateSpec::maximally_mixed(n)?,
        "dense" => {
            let mats = read_matrices(BufReader::new(File::open(arg)?))?;
            let rho = mats.into_iter().next().ok_or_else(|| Error::Parse(format!("{arg}: no matrix in file")))?;
            StateSpec::dense(rho)?
        }
        "pure" => {
            let raw: Vec<[f64; 2]> = serde_json::from_reader(BufReader::new(File::open(arg)?))?;
            StateSpec::pure(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())?
        }
        _ => return Err(Error::Parse(format!("unknown state specification {spec:?}"))),
    };
    if state.n() != n {
        return Err(Error::Dimension(format!("state {spec:?} is on {} qubits, expected {n}", state.n())));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inline_forms() {
        assert!(parse_state(3, "basis:5").unwrap().is_pure());
        assert!(parse_state(3, "pair:0,4").is_ok());
        assert!(!parse_state(3, "mixed").unwrap().is_pure());
        assert!(parse_state(3, "basis:8").is_err());
        assert!(parse_state(3, "pair:1").is_err());
        assert!(parse_state(3, "ghz").is_err());
    }
}
