//! Stand-alone BCa interval used to cross-check the library.
//!
//! Shares only the resample draws with the library (so both see the same
//! bootstrap samples); the statistic, the normal distribution, the bias and
//! acceleration terms and the percentile lookup are all written out here.

use revalign::eval::resample_indices;

/// (tp, fp, fn) for one paper.
pub type PaperCounts = (usize, usize, usize);

pub fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    if tp + fp + fn_ == 0 {
        100.0
    } else {
        200.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

pub fn micro(papers: &[PaperCounts], idx: &[usize]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for &i in idx {
        tp += papers[i].0;
        fp += papers[i].1;
        fn_ += papers[i].2;
    }
    f1(tp, fp, fn_)
}

pub fn macro_(papers: &[PaperCounts], idx: &[usize]) -> f64 {
    idx.iter()
        .map(|&i| f1(papers[i].0, papers[i].1, papers[i].2))
        .sum::<f64>()
        / idx.len() as f64
}

/// Standard normal CDF from its Taylor series around 0 (accurate to ~1e-15
/// for |x| < 8; clamped outside).
pub fn phi(x: f64) -> f64 {
    if x < -8.0 {
        return 0.0;
    }
    if x > 8.0 {
        return 1.0;
    }
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    while term.abs() > 1e-17 * sum.abs().max(1e-300) {
        term *= x * x / (2.0 * k + 1.0);
        sum += term;
        k += 1.0;
        if k > 2000.0 {
            break;
        }
    }
    0.5 + sum * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`phi`] by bisection.
pub fn phi_inv(p: f64) -> f64 {
    let (mut lo, mut hi) = (-8.0f64, 8.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let i = h.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] * (1.0 - (h - i as f64)) + sorted[i + 1] * (h - i as f64)
}

/// 95% BCa interval of `stat` over papers.
pub fn bca(
    papers: &[PaperCounts],
    stat: fn(&[PaperCounts], &[usize]) -> f64,
    resamples: u64,
    seed: u64,
) -> (f64, f64) {
    let n = papers.len();
    let all: Vec<usize> = (0..n).collect();
    let theta = stat(papers, &all);
    let mut boot: Vec<f64> = (0..resamples)
        .map(|b| stat(papers, &resample_indices(seed, b, n)))
        .collect();
    boot.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if boot[0] == boot[boot.len() - 1] {
        return (boot[0].min(theta), boot[0].max(theta));
    }
    let big_b = resamples as f64;
    let mut frac = 0.0;
    for &v in &boot {
        if v < theta {
            frac += 1.0;
        } else if v == theta {
            frac += 0.5;
        }
    }
    let frac = (frac / big_b).max(0.5 / big_b).min(1.0 - 0.5 / big_b);
    let z0 = phi_inv(frac);

    let loo: Vec<f64> = (0..n)
        .map(|k| {
            let rest: Vec<usize> = (0..n).filter(|&i| i != k).collect();
            stat(papers, &rest)
        })
        .collect();
    let mean = loo.iter().sum::<f64>() / n as f64;
    let s2: f64 = loo.iter().map(|v| (mean - v).powi(2)).sum();
    let s3: f64 = loo.iter().map(|v| (mean - v).powi(3)).sum();
    let a = if s2 == 0.0 {
        0.0
    } else {
        s3 / (6.0 * s2.powf(1.5))
    };

    let bound = |alpha: f64| {
        let z = phi_inv(alpha);
        percentile(&boot, phi(z0 + (z0 + z) / (1.0 - a * (z0 + z))))
    };
    (bound(0.025).min(theta), bound(0.975).max(theta))
}
