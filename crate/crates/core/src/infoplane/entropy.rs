//! Plug-in entropies and mutual information over discrete symbols, in bits.
//!
//! Counts are summed in a canonical order (sorted), so results depend only on
//! the empirical distribution and never on sample order.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use crate::error::{Error, Result};

/// Shannon entropy of a histogram, with `0·log 0 = 0`.
pub fn entropy_bits(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument(
            "entropy of an empty histogram".into(),
        ));
    }
    let mut sorted: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    sorted.sort_unstable();
    let n = total as f64;
    Ok(sorted
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0))
}

fn histogram<T: Hash + Eq>(values: impl IntoIterator<Item = T>) -> Vec<usize> {
    let mut counts: HashMap<T, usize> = HashMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts.into_values().collect()
}

/// `H(T) − Σ_c p(c)·H(T | C = c)` for a conditioning variable `C`.
fn plug_in_mi<C: Ord + Copy>(symbols: &[usize], cond: &[C]) -> Result<f64> {
    if symbols.len() != cond.len() {
        return Err(Error::shape(
            "mutual information",
            format!(
                "{} symbols vs {} conditioning values",
                symbols.len(),
                cond.len()
            ),
        ));
    }
    if symbols.is_empty() {
        return Err(Error::InvalidArgument(
            "mutual information of no samples".into(),
        ));
    }
    let h_t = entropy_bits(&histogram(symbols.iter().copied()))?;
    let mut groups: BTreeMap<C, Vec<usize>> = BTreeMap::new();
    for (&s, &c) in symbols.iter().zip(cond) {
        groups.entry(c).or_default().push(s);
    }
    let n = symbols.len() as f64;
    let mut h_cond = 0.0;
    for members in groups.values() {
        let h = entropy_bits(&histogram(members.iter().copied()))?;
        h_cond += members.len() as f64 / n * h;
    }
    Ok((h_t - h_cond).max(0.0))
}

/// I(T;X) where each sample is identified by `sample_ids`. With unique ids
/// this is exactly H(T).
pub fn mi_with_input(symbols: &[usize], sample_ids: &[usize]) -> Result<f64> {
    plug_in_mi(symbols, sample_ids)
}

/// I(T;Y) from the empirical joint of symbols and class labels.
pub fn mi_with_labels(symbols: &[usize], labels: &[usize]) -> Result<f64> {
    plug_in_mi(symbols, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy_bits(&[1, 1, 1, 1]).unwrap(), 2.0);
        assert_eq!(entropy_bits(&[4]).unwrap(), 0.0);
        let h = entropy_bits(&[3, 1]).unwrap();
        let expected = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((h - expected).abs() < 1e-15);
        assert!((h - 0.811_278_124_459_132_8).abs() < 1e-15);
        assert!(entropy_bits(&[]).is_err());
        assert!(entropy_bits(&[0, 0]).is_err());
    }

    #[test]
    fn mi_with_input_examples() {
        let ids = [0, 1, 2, 3];
        assert_eq!(mi_with_input(&[0, 1, 2, 3], &ids).unwrap(), 2.0);
        assert_eq!(mi_with_input(&[7, 7, 7, 7], &ids).unwrap(), 0.0);
        // repeated input ids: T constant given X
        assert_eq!(mi_with_input(&[0, 0, 1, 1], &[5, 5, 6, 6]).unwrap(), 1.0);
        assert!(mi_with_input(&[0, 1], &[0]).is_err());
        assert!(mi_with_input(&[], &[]).is_err());
    }

    #[test]
    fn mi_with_labels_examples() {
        let labels = [0, 1, 0, 1, 1, 0];
        assert_eq!(mi_with_labels(&labels, &labels).unwrap(), 1.0);

        // product distribution: each symbol paired with each label equally
        let symbols = [0, 0, 1, 1, 2, 2];
        let labels = [0, 1, 0, 1, 0, 1];
        assert_eq!(mi_with_labels(&symbols, &labels).unwrap(), 0.0);

        let ten: Vec<usize> = (0..100).map(|i| i % 10).collect();
        let mi = mi_with_labels(&ten, &ten).unwrap();
        assert!((mi - 10f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn synthetic_ceiling() {
        let ids: Vec<usize> = (0..4096).collect();
        assert_eq!(mi_with_input(&ids, &ids).unwrap(), 12.0);
    }
}
