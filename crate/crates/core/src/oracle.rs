//! Brute-force numeric checks: an upper bound on `min f` from sampling and
//! multistart descent, and a sampled test that `f >= r`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution};

use crate::poly::{monomial_value, Polynomial};

pub const DEFAULT_BOX_RADIUS: f64 = 10.0;
pub const WIDE_BOX_RADIUS: f64 = 100.0;
pub const DESCENT_STARTS: usize = 32;
pub const DESCENT_ITERS: usize = 500;
pub const BOUND_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingMethod {
    Grid,
    MultistartDescent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingReport {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    pub method: SamplingMethod,
    pub seed: u64,
}

struct Search<'a> {
    terms: Vec<(&'a [u32], f64)>,
    n: usize,
    evaluations: usize,
    best: Option<(f64, Vec<f64>, SamplingMethod)>,
}

impl<'a> Search<'a> {
    fn new(f: &'a Polynomial) -> Self {
        Search {
            terms: f
                .terms()
                .map(|(e, c)| (e.as_ref(), crate::poly::rational_to_f64(c)))
                .collect(),
            n: f.nvars(),
            evaluations: 0,
            best: None,
        }
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        self.terms.iter().map(|(e, c)| c * monomial_value(e, x)).sum()
    }

    fn offer(&mut self, x: &[f64], v: f64, method: SamplingMethod) {
        if !v.is_finite() {
            return;
        }
        let better = match &self.best {
            None => true,
            Some((bv, bx, _)) => v < *bv || (v == *bv && x.partial_cmp(bx.as_slice()) == Some(std::cmp::Ordering::Less)),
        };
        if better {
            self.best = Some((v, x.to_vec(), method));
        }
    }

    /// Log-spaced magnitudes in every sign orthant, plus zero.
    fn grid(&mut self, budget: usize, radius: f64, rng: &mut ChaCha8Rng) {
        let n = self.n;
        let per_axis = (budget as f64).powf(1.0 / n as f64).floor() as usize;
        if per_axis >= 3 && n <= 12 {
            // per axis: 0 and +-m for (per_axis - 1) / 2 magnitudes
            let mags = ((per_axis - 1) / 2).max(1);
            let mut axis = vec![0.0];
            for i in 0..mags {
                let t = if mags == 1 { 0.0 } else { i as f64 / (mags - 1) as f64 };
                let m = 10f64.powf(-3.0 + t * (radius.log10() + 3.0));
                axis.push(m);
                axis.push(-m);
            }
            let mut idx = vec![0usize; n];
            let mut x = vec![0.0; n];
            loop {
                for (xi, &k) in x.iter_mut().zip(&idx) {
                    *xi = axis[k];
                }
                let v = self.eval(&x);
                self.offer(&x, v, SamplingMethod::Grid);
                let mut d = 0;
                while d < n {
                    idx[d] += 1;
                    if idx[d] < axis.len() {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == n {
                    break;
                }
            }
        } else {
            let lo = -3.0f64;
            let hi = radius.log10();
            let mut x = vec![0.0; n];
            for _ in 0..budget {
                for xi in x.iter_mut() {
                    let m = 10f64.powf(rng.random_range(lo..=hi));
                    *xi = if rng.random::<bool>() { m } else { -m };
                }
                let v = self.eval(&x);
                self.offer(&x, v, SamplingMethod::Grid);
            }
        }
    }

    fn gradient(&mut self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        let mut y = x.to_vec();
        for i in 0..self.n {
            let h = 1e-6 * x[i].abs().max(1.0);
            y[i] = x[i] + h;
            let fp = self.eval(&y);
            y[i] = x[i] - h;
            let fm = self.eval(&y);
            y[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }

    fn descend(&mut self, start: Vec<f64>, radius: f64) {
        let mut x = start;
        let mut fx = self.eval(&x);
        if !fx.is_finite() {
            return;
        }
        let mut step = 1.0;
        for _ in 0..DESCENT_ITERS {
            let g = self.gradient(&x);
            let gg: f64 = g.iter().map(|v| v * v).sum();
            if !(gg.is_finite() && gg > 0.0) {
                break;
            }
            let mut t = step;
            let mut moved = false;
            while t > 1e-18 {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(&g)
                    .map(|(xi, gi)| (xi - t * gi).clamp(-radius, radius))
                    .collect();
                let ft = self.eval(&trial);
                if ft.is_finite() && ft <= fx - 1e-4 * t * gg.min(1e300) && ft < fx {
                    x = trial;
                    fx = ft;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
            step = t * 2.0;
        }
        self.offer(&x, fx, SamplingMethod::MultistartDescent);
    }

    fn run(&mut self, budget: usize, radius: f64, rng: &mut ChaCha8Rng) {
        self.grid(budget / 2, radius, rng);
        let mut starts = Vec::with_capacity(DESCENT_STARTS);
        if let Some((_, x, _)) = &self.best {
            starts.push(x.clone());
        }
        while starts.len() < DESCENT_STARTS {
            starts.push((0..self.n).map(|_| rng.random_range(-radius..=radius)).collect());
        }
        for s in starts {
            self.descend(s, radius);
        }
    }
}

/// Upper bound on `min f` from grid sampling and multistart descent in
/// `[-box_radius, box_radius]^n`. The box is widened to 100 when the best
/// point ends up on its boundary.
pub fn approx_min(f: &Polynomial, budget: usize, box_radius: f64, seed: u64) -> SamplingReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut search = Search::new(f);
    search.run(budget, box_radius, &mut rng);
    let on_boundary = |s: &Search| {
        s.best
            .as_ref()
            .is_some_and(|(_, x, _)| x.iter().any(|v| v.abs() >= 0.999 * box_radius))
    };
    if box_radius < WIDE_BOX_RADIUS && on_boundary(&search) {
        search.run(budget, WIDE_BOX_RADIUS, &mut rng);
    }
    let (best_value, best_point, method) = search.best.take().unwrap_or_else(|| {
        let x = vec![0.0; f.nvars()];
        (f.evaluate_unchecked(&x), x, SamplingMethod::Grid)
    });
    SamplingReport {
        best_point,
        best_value,
        evaluations: search.evaluations,
        method,
        seed,
    }
}

/// Sample points for bound checks: a structured log grid over all sign
/// orthants followed by heavy-tailed (Cauchy) random points.
pub fn sample_points(nvars: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    let mags = [0.0, 0.1, 0.5, 0.9, 1.0, 1.1, 2.0, 5.0];
    let structured = samples / 4;
    while out.len() < structured {
        let x: Vec<f64> = (0..nvars)
            .map(|_| {
                let m = mags[rng.random_range(0..mags.len())];
                if rng.random::<bool>() { m } else { -m }
            })
            .collect();
        out.push(x);
    }
    let cauchy = Cauchy::new(0.0, 1.0).expect("valid scale");
    while out.len() < samples {
        out.push((0..nvars).map(|_| cauchy.sample(&mut rng)).collect());
    }
    out
}

/// Whether `f(x) >= r - 1e-6` at every sample. Each comparison also allows
/// for floating-point cancellation, `1e-12 * sum |f_alpha x^alpha|`; samples
/// where `f` overflows are skipped.
pub fn check_lower_bound(f: &Polynomial, r: f64, samples: usize, seed: u64) -> bool {
    let terms: Vec<(&[u32], f64)> = f
        .terms()
        .map(|(e, c)| (e.as_ref(), crate::poly::rational_to_f64(c)))
        .collect();
    sample_points(f.nvars(), samples, seed).iter().all(|x| {
        let mut v = 0.0;
        let mut mag = 0.0;
        for (e, c) in &terms {
            let t = c * monomial_value(e, x);
            v += t;
            mag += t.abs();
        }
        !(v.is_finite() && mag.is_finite()) || v >= r - BOUND_SLACK - 1e-12 * mag
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    const MOTZKIN: &str = "1/3 + 1/3*x1^4*x2^2 + 1/3*x1^2*x2^4 - x1^2*x2^2";

    #[test]
    fn motzkin_minimum() {
        let f = parse_polynomial(MOTZKIN, 2).unwrap();
        let r = approx_min(&f, 4000, DEFAULT_BOX_RADIUS, 1);
        assert!(r.best_value <= 1e-6, "{}", r.best_value);
        assert!(r.best_value >= -1e-9);
        assert_eq!(r.best_value, f.evaluate(&r.best_point).unwrap());
    }

    #[test]
    fn example_one_minimum() {
        let f = parse_polynomial("1/4 + x1^8 + x1^2*x2^6 + 4*x1^3*x2^3", 2).unwrap();
        let r = approx_min(&f, 4000, DEFAULT_BOX_RADIUS, 3);
        assert!((r.best_value + 3.75).abs() < 1e-4, "{}", r.best_value);
    }

    #[test]
    fn shifted_square() {
        let f = parse_polynomial("1 + x1^2", 1).unwrap();
        let r = approx_min(&f, 1000, DEFAULT_BOX_RADIUS, 0);
        assert!((r.best_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_per_seed() {
        let f = parse_polynomial(MOTZKIN, 2).unwrap();
        assert_eq!(approx_min(&f, 2000, 10.0, 9), approx_min(&f, 2000, 10.0, 9));
    }

    #[test]
    fn bound_checks() {
        let f = parse_polynomial(MOTZKIN, 2).unwrap();
        assert!(check_lower_bound(&f, 0.0, 20_000, 5));
        assert!(!check_lower_bound(&f, 0.1, 20_000, 5));
        assert!(check_lower_bound(&f, -1e18, 1000, 5));
    }
}
