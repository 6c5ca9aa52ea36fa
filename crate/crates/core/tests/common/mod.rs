#![allow(dead_code, clippy::needless_range_loop)]

//! Direct, unoptimized transcription of the cumulative-difference equations,
//! kept independent of the library's implementation path. Blocks are
//! indexed as `R^0_k` (block `2k`) and `R^1_k` (block `2k+1`), differences
//! use the even/odd formulas, and every sum is a plain left-to-right loop.

#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub score: f64,
    pub response: f64,
    pub weight: f64,
    pub first: bool,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub blocks: usize,
    pub d: Vec<f64>,
    pub w: Vec<f64>,
    pub c: Vec<f64>,
    pub a: Vec<f64>,
    pub g: f64,
    pub h: f64,
    pub sigma: f64,
}

/// Returns `None` when fewer than three blocks exist or a group is empty.
pub fn oracle(points: &[Point], weighted: bool) -> Option<OracleResult> {
    let mut pts = points.to_vec();
    // insertion sort by score
    for i in 1..pts.len() {
        let mut j = i;
        while j > 0 && pts[j - 1].score > pts[j].score {
            pts.swap(j - 1, j);
            j -= 1;
        }
    }
    if pts.iter().all(|p| p.first) || pts.iter().all(|p| !p.first) {
        return None;
    }
    let zero_is_first = pts[0].first;

    // blocks as lists of points
    let mut blocks: Vec<Vec<Point>> = Vec::new();
    for p in &pts {
        match blocks.last_mut() {
            Some(b) if b[0].first == p.first => b.push(*p),
            _ => blocks.push(vec![*p]),
        }
    }
    let nblocks = blocks.len();
    if nblocks < 3 {
        return None;
    }

    let mut r0 = Vec::new();
    let mut r1 = Vec::new();
    let mut t = Vec::new();
    for (idx, b) in blocks.iter().enumerate() {
        let mut sw = 0.0;
        let mut swr = 0.0;
        let mut plain_w = 0.0;
        for p in b {
            let w = if weighted { p.weight } else { 1.0 };
            sw += w;
            swr += w * p.response;
            plain_w += w;
        }
        let r = swr / sw;
        if idx % 2 == 0 {
            r0.push(r);
        } else {
            r1.push(r);
        }
        t.push(plain_w / b.len() as f64);
    }

    let n = nblocks - 2;
    let mut d = Vec::with_capacity(n);
    for j in 0..n {
        let k = j / 2;
        if j % 2 == 0 {
            d.push((r0[k] + r0[k + 1] - 2.0 * r1[k]) / 2.0);
        } else {
            d.push((2.0 * r0[k + 1] - r1[k] - r1[k + 1]) / 2.0);
        }
    }
    let w: Vec<f64> = (0..n).map(|k| t[k] + 2.0 * t[k + 1] + t[k + 2]).collect();

    let mut c = vec![0.0];
    let mut a = vec![0.0];
    if weighted {
        let mut total = 0.0;
        for x in &w {
            total += x;
        }
        for j in 1..=n {
            let mut num = 0.0;
            let mut den = 0.0;
            for k in 0..j {
                num += w[k] * d[k];
                den += w[k];
            }
            c.push(num / total);
            a.push(den / total);
        }
    } else {
        for j in 1..=n {
            let mut s = 0.0;
            for k in 0..j {
                s += d[k];
            }
            c.push(s / n as f64);
            a.push(j as f64 / n as f64);
        }
    }
    if !zero_is_first {
        for v in c.iter_mut() {
            *v = -*v;
        }
    }

    let mut g: f64 = 0.0;
    for v in &c[1..] {
        if v.abs() > g {
            g = v.abs();
        }
    }
    let mut hi = c[0];
    let mut lo = c[0];
    for v in &c {
        if *v > hi {
            hi = *v;
        }
        if *v < lo {
            lo = *v;
        }
    }

    let sigma = if weighted {
        let mut s2 = 0.0;
        let mut s1 = 0.0;
        for x in &w {
            s2 += x * x;
            s1 += x;
        }
        f64::sqrt(s2) / s1
    } else {
        1.0 / f64::sqrt(n as f64)
    };

    Some(OracleResult {
        blocks: nblocks,
        d,
        w,
        c,
        a,
        g,
        h: hi - lo,
        sigma,
    })
}

/// Number of maximal runs of equal labels, by direct scanning.
pub fn run_count(labels: &[bool]) -> usize {
    let mut runs = 0;
    let mut prev: Option<bool> = None;
    for &l in labels {
        if prev != Some(l) {
            runs += 1;
            prev = Some(l);
        }
    }
    runs
}

pub fn to_observations(points: &[Point]) -> (Vec<cumdiff::Observation>, Vec<cumdiff::Observation>) {
    let mut first = Vec::new();
    let mut second = Vec::new();
    for p in points {
        let label = if p.first { "first" } else { "second" };
        let o = cumdiff::Observation::weighted(p.score, p.response, p.weight, label);
        if p.first {
            first.push(o);
        } else {
            second.push(o);
        }
    }
    (first, second)
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

pub fn close_rel(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs())
}
