//! Parsing of system and letter-set arguments.

use anyhow::{bail, Context, Result};
use thermo_spectrum::{GaussianLetter, LetterSet, OrderedAlphabet, SystemDescriptor};

pub fn parse_system(spec: &str) -> Result<SystemDescriptor> {
    Ok(match spec {
        "ccf" => SystemDescriptor::complex_cf(),
        "rcf" => SystemDescriptor::real_cf(),
        "lccf" => SystemDescriptor::linearized_cf(),
        _ => match spec.strip_prefix("file:") {
            Some(path) => SystemDescriptor::from_json_file(path).with_context(|| format!("--system {spec}"))?,
            None => bail!("--system must be ccf, rcf, lccf or file:<path>, got {spec:?}"),
        },
    })
}

/// `I:k`, `T:k`, `box:R`, `file:<path>` or a comma-separated letter list.
pub fn parse_subset(system: &SystemDescriptor, spec: &str) -> Result<LetterSet> {
    let count = |s: &str| s.parse::<usize>().with_context(|| format!("bad count in {spec:?}"));
    let alphabet = OrderedAlphabet::new(system.clone());
    let set = if let Some(k) = spec.strip_prefix("I:") {
        alphabet.initial_block(count(k)?)?
    } else if let Some(k) = spec.strip_prefix("T:") {
        alphabet.tilde_block(count(k)?)?.letters
    } else if let Some(r) = spec.strip_prefix("box:") {
        if !system.is_grid() {
            bail!("box:<R> subsets need a grid system");
        }
        let r = count(r)? as i64;
        (1..=r).flat_map(|m| (-r..=r).map(move |n| GaussianLetter::new(m, n).expect("m >= 1"))).collect()
    } else if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        LetterSet::from_json_str(&text).with_context(|| format!("parsing {path}"))?
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<GaussianLetter>().with_context(|| format!("bad letter {s:?}")))
            .collect::<Result<LetterSet>>()?
    };
    if set.is_empty() {
        bail!("letter set {spec:?} is empty");
    }
    if let Some(e) = set.iter().find(|&e| !system.contains(e)) {
        bail!("letter {e} is not in the {} system", system.name());
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_forms() {
        let s = SystemDescriptor::complex_cf();
        assert_eq!(parse_subset(&s, "I:3").unwrap().len(), 3);
        assert_eq!(parse_subset(&s, "T:16").unwrap().len(), 28);
        assert_eq!(parse_subset(&s, "box:2").unwrap().len(), 10);
        assert_eq!(parse_subset(&s, "1, 1+i,2-3i").unwrap().len(), 3);
        assert!(parse_subset(&s, "I:x").is_err());
        assert!(parse_system("nope").is_err());
    }
}
