//! Brute-force reference implementations used as test oracles. Nothing here
//! calls into the library: configurations are plain bit masks over the
//! lexicographically ordered vertex pairs.

#![allow(dead_code)]

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut p = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            p.push((u, v));
        }
    }
    p
}

pub fn adjacency(n: usize, mask: u64) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for (k, &(u, v)) in pairs(n).iter().enumerate() {
        if mask >> k & 1 == 1 {
            a[u][v] = true;
            a[v][u] = true;
        }
    }
    a
}

pub fn edges(n: usize, mask: u64) -> usize {
    let _ = n;
    mask.count_ones() as usize
}

/// Present wedges: pairs of present edges sharing one vertex.
pub fn wedges(n: usize, mask: u64) -> usize {
    let a = adjacency(n, mask);
    let mut w = 0;
    for row in &a {
        let d = row.iter().filter(|&&x| x).count();
        w += d * d.saturating_sub(1) / 2;
    }
    w
}

pub fn triangles(n: usize, mask: u64) -> usize {
    let a = adjacency(n, mask);
    let mut t = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if a[i][j] && a[j][k] && a[i][k] {
                    t += 1;
                }
            }
        }
    }
    t
}

/// Edge-preserving maps `V(H) → [n]`, degenerate ones included.
pub fn homs(n: usize, mask: u64, hv: usize, he: &[(usize, usize)]) -> u64 {
    let a = adjacency(n, mask);
    let total = n.pow(hv as u32);
    let mut count = 0;
    let mut phi = vec![0usize; hv];
    for code in 0..total {
        let mut c = code;
        for slot in phi.iter_mut() {
            *slot = c % n;
            c /= n;
        }
        if he.iter().all(|&(x, y)| a[phi[x]][phi[y]]) {
            count += 1;
        }
    }
    count
}

pub fn hamiltonian(n: usize, alpha: f64, h: f64, mask: u64) -> f64 {
    alpha / n as f64 * wedges(n, mask) as f64 + h * edges(n, mask) as f64
}

/// Plain `ln Σ exp H`; only for moderate parameters.
pub fn log_z(n: usize, alpha: f64, h: f64) -> f64 {
    let m = n * (n - 1) / 2;
    (0..1u64 << m)
        .map(|x| hamiltonian(n, alpha, h, x).exp())
        .sum::<f64>()
        .ln()
}

pub fn expect(n: usize, alpha: f64, h: f64, f: impl Fn(u64) -> f64) -> f64 {
    let m = n * (n - 1) / 2;
    let (mut num, mut den) = (0.0, 0.0);
    for x in 0..1u64 << m {
        let w = hamiltonian(n, alpha, h, x).exp();
        num += w * f(x);
        den += w;
    }
    num / den
}

/// `E[x_A]` for a set of edge ids.
pub fn moment(n: usize, alpha: f64, h: f64, set: &[usize]) -> f64 {
    let mask: u64 = set.iter().map(|&i| 1u64 << i).fold(0, |a, b| a | b);
    expect(n, alpha, h, |x| if x & mask == mask { 1.0 } else { 0.0 })
}

pub fn u2(n: usize, alpha: f64, h: f64, i: usize, j: usize) -> f64 {
    moment(n, alpha, h, &[i, j]) - moment(n, alpha, h, &[i]) * moment(n, alpha, h, &[j])
}

/// Third joint cumulant straight from its definition.
pub fn u3(n: usize, alpha: f64, h: f64, i: usize, j: usize, k: usize) -> f64 {
    let e = |s: &[usize]| moment(n, alpha, h, s);
    e(&[i, j, k]) - e(&[i]) * e(&[j, k]) - e(&[j]) * e(&[i, k]) - e(&[k]) * e(&[i, j])
        + 2.0 * e(&[i]) * e(&[j]) * e(&[k])
}

pub fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Fixed point of `u = σ(2αu + h)` by plain iteration (contractive cases).
pub fn iterate_fixed_point(alpha: f64, h: f64, start: f64) -> f64 {
    let mut u = start;
    for _ in 0..100_000 {
        let next = sigmoid(2.0 * alpha * u + h);
        if (next - u).abs() < 1e-16 {
            return next;
        }
        u = next;
    }
    u
}
