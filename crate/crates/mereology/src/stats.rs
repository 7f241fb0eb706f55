//! Small statistics helpers shared by the experiments and their tests.

/// Ranks with ties replaced by the average rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j - 1) as f64 / 2.0 + 1.0;
        for &k in &order[i..j] {
            out[k] = avg;
        }
        i = j;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in x.iter().zip(y) {
        num += (a - mx) * (b - my);
        dx += (a - mx) * (a - mx);
        dy += (b - my) * (b - my);
    }
    if dx == 0.0 || dy == 0.0 {
        return 0.0;
    }
    num / (dx * dy).sqrt()
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "paired samples required");
    if x.len() < 2 {
        return 0.0;
    }
    pearson(&ranks(x), &ranks(y))
}

/// Means of the four contiguous quartiles of a series (by index order).
/// The last quartile absorbs the remainder.
pub fn quartile_means(values: &[f64]) -> [f64; 4] {
    let n = values.len();
    let mut out = [0.0; 4];
    if n == 0 {
        return out;
    }
    let q = (n / 4).max(1);
    for (k, slot) in out.iter_mut().enumerate() {
        let start = (k * q).min(n - 1);
        let end = if k == 3 { n } else { ((k + 1) * q).min(n) };
        let slice = &values[start..end];
        *slot = slice.iter().sum::<f64>() / slice.len() as f64;
    }
    out
}

/// Least-squares decay rate `g` of `log_ratios[i] = -g t_i^2 / 2`.
pub fn gaussian_decay_rate(times: &[f64], log_ratios: &[f64]) -> f64 {
    assert_eq!(times.len(), log_ratios.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, lr) in times.iter().zip(log_ratios) {
        let x = -t * t / 2.0;
        num += x * lr;
        den += x * x;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
