use crate::error::{Error, Result};

/// 1-based ranks with ties replaced by the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share the average of ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "correlation inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument(
            "correlation needs at least two observations".into(),
        ));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("correlation input contains NaN".into()));
    }
    Ok(())
}

fn pearson_unchecked(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson product-moment correlation. `None` when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    check_lengths(x, y)?;
    Ok(pearson_unchecked(x, y))
}

/// Spearman rank correlation with average ranks for ties. `None` when the
/// ranks of either input have zero variance.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    check_lengths(x, y)?;
    Ok(pearson_unchecked(&average_ranks(x), &average_ranks(y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn perfect_and_reversed() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert_eq!(spearman(&x, &x).unwrap(), Some(1.0));
        assert_eq!(spearman(&x, &rev).unwrap(), Some(-1.0));
    }

    #[test]
    fn constant_is_undefined() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]).unwrap(), None);
    }

    #[test]
    fn bad_inputs() {
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn matches_textbook_value() {
        // rho = 1 - 6*sum(d^2)/(n(n^2-1)) without ties: d = [0,-1,1,0,0] -> 1 - 12/120
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [1.0, 3.0, 2.0, 4.0, 5.0];
        assert!((spearman(&x, &y).unwrap().unwrap() - 0.9).abs() < 1e-12);
    }
}
