//! Random draws and closed-form oracles shared by the integration tests.
//! Oracles are written in plain `f64` and share no code with the library.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random function of one variable, kept both as source text for the
/// parser and as a native closure for oracles.
#[derive(Debug, Clone)]
pub enum Univariate {
    /// Coefficients `a₀ + a₁ l + a₂ l² + a₃ l³`.
    Poly(Vec<f64>),
    /// `a sin(b l) + c cos(d l)`.
    Trig { a: f64, b: f64, c: f64, d: f64 },
}

fn lit(c: f64) -> String {
    if c < 0.0 {
        format!("(-{:?})", -c)
    } else {
        format!("{c:?}")
    }
}

impl Univariate {
    pub fn source(&self) -> String {
        match self {
            Univariate::Poly(cs) => cs
                .iter()
                .enumerate()
                .map(|(n, c)| match n {
                    0 => lit(*c),
                    1 => format!("{} * l", lit(*c)),
                    _ => format!("{} * l^{n}", lit(*c)),
                })
                .collect::<Vec<_>>()
                .join(" + "),
            Univariate::Trig { a, b, c, d } => format!(
                "{} * sin({} * l) + {} * cos({} * l)",
                lit(*a),
                lit(*b),
                lit(*c),
                lit(*d)
            ),
        }
    }

    pub fn eval(&self, l: f64) -> f64 {
        match self {
            Univariate::Poly(cs) => cs.iter().rev().fold(0.0, |acc, c| acc * l + c),
            Univariate::Trig { a, b, c, d } => a * (b * l).sin() + c * (d * l).cos(),
        }
    }
}

/// Polynomial of degree ≤ 3 or a sin/cos combination, coefficients in
/// `[-bound, bound]`, frequencies in `[0.5, 2]`.
pub fn random_univariate(rng: &mut TestRng, bound: f64) -> Univariate {
    if rng.gen_bool(0.5) {
        let degree = rng.gen_range(0..=3);
        Univariate::Poly((0..=degree).map(|_| rng.gen_range(-bound..=bound)).collect())
    } else {
        Univariate::Trig {
            a: rng.gen_range(-bound..=bound),
            b: rng.gen_range(0.5..=2.0),
            c: rng.gen_range(-bound..=bound),
            d: rng.gen_range(0.5..=2.0),
        }
    }
}

/// Composite 10-point Gauss–Legendre rule on panels no wider than 0.25.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const NODES: [f64; 5] = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const WEIGHTS: [f64; 5] = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982_0,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_1,
    ];
    let panels = (((b - a).abs() / 0.25).ceil() as usize).max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            total += w * half * (f(mid - half * x) + f(mid + half * x));
        }
    }
    total
}

/// `Ω₁ = e^{2x} (e^{x+t} − ¼ e^{x−t})^{−2}`.
pub fn omega1(t: f64, x: f64) -> f64 {
    (2.0 * x).exp() / ((x + t).exp() - 0.25 * (x - t).exp()).powi(2)
}

/// Denominator `e^{x+t} − ¼ e^{x−t}` of [`omega1`].
pub fn omega1_denominator(t: f64, x: f64) -> f64 {
    (x + t).exp() - 0.25 * (x - t).exp()
}

/// Closed form of the compactified `Ω₁` as printed:
/// `e^{tan((t+x)/2)} e^{tan((x−t)/2)} / ((2 cos((t+x)/2) cos((x−t)/2))² (e^{tan((t+x)/2)} − ¼ e^{tan((x−t)/2)})²)`.
pub fn omega2(t: f64, x: f64) -> f64 {
    let (a, b) = ((t + x) / 2.0, (x - t) / 2.0);
    let (ea, eb) = (a.tan().exp(), b.tan().exp());
    ea * eb / ((2.0 * a.cos() * b.cos()).powi(2) * (ea - 0.25 * eb).powi(2))
}

/// Denominator of [`omega2`].
pub fn omega2_denominator(t: f64, x: f64) -> f64 {
    let (a, b) = ((t + x) / 2.0, (x - t) / 2.0);
    a.tan().exp() - 0.25 * b.tan().exp()
}

/// Compactified Minkowski factor `(cos t + cos x)^{−2}`.
pub fn penrose(t: f64, x: f64) -> f64 {
    (t.cos() + x.cos()).powi(-2)
}

pub fn in_diamond((t, x): (f64, f64)) -> bool {
    t.abs() + x.abs() < std::f64::consts::PI
}

/// Cell centers of an `n × n` grid over `[t0, t1] × [x0, x1]`.
pub fn cell_centers(t: (f64, f64), x: (f64, f64), n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push((
                t.0 + (i as f64 + 0.5) * (t.1 - t.0) / n as f64,
                x.0 + (j as f64 + 0.5) * (x.1 - x.0) / n as f64,
            ));
        }
    }
    out
}

/// `|a − b|` relative to `max(1, |b|)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Vertices of every `<path>` in an SVG written by the exporter, with the
/// `data-level` value of each path, mapped back to `(t, x)` through the
/// 800×800 viewport over the given bounds.
pub fn svg_vertices(svg: &str, t: (f64, f64), x: (f64, f64)) -> Vec<(f64, (f64, f64))> {
    let mut out = Vec::new();
    for line in svg.lines().filter(|l| l.starts_with("<path ")) {
        let attr = |name: &str| {
            let start = line.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
            let end = start + line[start..].find('"').unwrap();
            &line[start..end]
        };
        let level: f64 = attr("data-level").parse().unwrap();
        for cmd in attr("d").split_whitespace() {
            let (px, py) = cmd[1..].split_once(',').unwrap();
            let (px, py): (f64, f64) = (px.parse().unwrap(), py.parse().unwrap());
            let xx = x.0 + px * (x.1 - x.0) / 800.0;
            let tt = t.1 - py * (t.1 - t.0) / 800.0;
            out.push((level, (tt, xx)));
        }
    }
    out
}
