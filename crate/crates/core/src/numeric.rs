//! Scalar root finding, 1-D minimisation and small descriptive statistics.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Outcome of a bracketed bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection for an increasing or decreasing `f` on `[lo, hi]`.
///
/// Iterates until the bracket shrinks to floating-point resolution or
/// `max_iter` is hit, then checks `|f(root)| <= ftol`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, ftol: f64, max_iter: usize) -> Result<Bisection>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(Bisection { root: lo, residual: 0.0, iterations: 0 });
    }
    if fhi == 0.0 {
        return Ok(Bisection { root: hi, residual: 0.0, iterations: 0 });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoFit("bisection bracket has no sign change"));
    }
    let mut iterations = 0;
    while iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        iterations += 1;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let residual = f(root);
    if residual.abs() > ftol {
        return Err(Error::NoConvergence { what: "bisection", iterations });
    }
    Ok(Bisection { root, residual, iterations })
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
pub fn golden_min<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divides by `n`).
pub fn std_pop(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let m = mean(xs);
    libm::sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation (divides by `n - 1`); zero for a single value.
pub fn std_sample(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    libm::sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// `max - min`; zero for an empty slice.
pub fn span(xs: &[f64]) -> f64 {
    let (lo, hi) = min_max(xs);
    if xs.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

pub fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Summary of one quantity across an array.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub span: f64,
}

impl Summary {
    /// Uses the sample standard deviation, matching how array statistics
    /// are usually quoted for a finite set of devices.
    pub fn of(xs: &[f64]) -> Self {
        let (min, max) = min_max(xs);
        Summary { mean: mean(xs), std: std_sample(xs), min, max, span: if xs.is_empty() { 0.0 } else { max - min } }
    }
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::DimensionMismatch { what: "line fit", expected: n, found: ys.len() });
    }
    if n < 2 {
        return Err(Error::NoFit("need at least two points for a line"));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::NoFit("all abscissae are equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_stderr, intercept_stderr) = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        let s2 = rss / (n - 2) as f64;
        let sumx2: f64 = xs.iter().map(|x| x * x).sum();
        (libm::sqrt(s2 / sxx), libm::sqrt(s2 * sumx2 / (n as f64 * sxx)))
    } else {
        (0.0, 0.0)
    };
    Ok(LineFit { slope, intercept, slope_stderr, intercept_stderr })
}

/// Least-squares slope of a line through the origin and its standard error.
pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::DimensionMismatch { what: "origin fit", expected: n, found: ys.len() });
    }
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if n == 0 || sxx == 0.0 {
        return Err(Error::NoFit("no nonzero abscissa"));
    }
    let slope = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / sxx;
    let stderr = if n > 1 {
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x) * (y - slope * x)).sum();
        libm::sqrt(rss / (n - 1) as f64 / sxx)
    } else {
        0.0
    };
    Ok((slope, stderr))
}

/// Ranks with ties averaged (1-based).
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = alloc::vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = r;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation coefficient; NaN when either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / libm::sqrt(sxx * syy)
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&ranks(xs), &ranks(ys))
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * core::f64::consts::PI)
}
