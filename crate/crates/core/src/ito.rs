//! Off-diagonal multiple stochastic integrals for Wiener and compensated
//! Poisson integrators, Hermite and Charlier polynomials, and Monte Carlo
//! checks of the martingale and Itô–Fock identities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::combinat::{block_mobius, block_mobius_f64, factorial, profiles, rho_multiplicity};
use crate::error::{domain, Error, Result};
use crate::moments::falling_power;
use crate::rng::StreamId;

/// Largest order for [`offdiag_wiener`].
pub const WIENER_MAX_ORDER: usize = 8;
/// Largest order for [`offdiag_poisson`].
pub const POISSON_MAX_ORDER: usize = 12;
/// Largest degree for [`hermite`] and [`charlier`].
pub const POLY_MAX_DEGREE: usize = 30;

/// Uniform grid on [0, t_end].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    t_end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, steps: usize) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return domain("t_end must be positive and finite");
        }
        if steps == 0 {
            return domain("a grid needs at least one step");
        }
        Ok(TimeGrid { t_end, steps })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.steps as f64
    }
}

/// Wiener increments on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerPath {
    grid: TimeGrid,
    increments: Vec<f64>,
    stream: StreamId,
}

impl WienerPath {
    /// A path with given increments, for deterministic use.
    pub fn from_increments(grid: TimeGrid, increments: Vec<f64>, stream: StreamId) -> Result<Self> {
        if increments.len() != grid.steps {
            return domain("need one increment per grid step");
        }
        Ok(WienerPath { grid, increments, stream })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn stream(&self) -> &StreamId {
        &self.stream
    }

    /// W at the end of the grid.
    pub fn end_value(&self) -> f64 {
        self.increments.iter().sum()
    }

    /// The same path on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> Result<WienerPath> {
        if factor == 0 || self.grid.steps % factor != 0 {
            return domain("coarsening factor must divide the step count");
        }
        let increments = self.increments.chunks(factor).map(|c| c.iter().sum()).collect();
        Ok(WienerPath {
            grid: TimeGrid::new(self.grid.t_end, self.grid.steps / factor)?,
            increments,
            stream: self.stream.clone(),
        })
    }
}

/// Jump times of a unit-rate Poisson process on (0, t_end].
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonJumps {
    t_end: f64,
    jump_times: Vec<f64>,
    stream: StreamId,
}

impl PoissonJumps {
    pub fn new(t_end: f64, jump_times: Vec<f64>, stream: StreamId) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return domain("t_end must be positive and finite");
        }
        if jump_times.windows(2).any(|w| w[0] >= w[1]) || jump_times.iter().any(|&s| !(s > 0.0 && s <= t_end)) {
            return domain("jump times must ascend strictly inside (0, t_end]");
        }
        Ok(PoissonJumps { t_end, jump_times, stream })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn stream(&self) -> &StreamId {
        &self.stream
    }

    /// N_t at t = t_end.
    pub fn count(&self) -> usize {
        self.jump_times.len()
    }

    /// N_s for s ≤ t_end.
    pub fn count_at(&self, s: f64) -> usize {
        self.jump_times.partition_point(|&u| u <= s)
    }

    /// Y_t = N_t − t at t_end.
    pub fn compensated(&self) -> f64 {
        self.count() as f64 - self.t_end
    }
}

/// Increments ΔW_i ~ N(0, dt), deterministic in the stream.
pub fn sample_wiener(grid: TimeGrid, stream: &StreamId) -> WienerPath {
    let mut r = stream.rng();
    let sd = grid.dt().sqrt();
    let increments = (0..grid.steps)
        .map(|_| sd * r.sample::<f64, _>(StandardNormal))
        .collect();
    WienerPath { grid, increments, stream: stream.clone() }
}

/// Unit-rate Poisson jumps from exponential inter-arrival times.
pub fn sample_poisson(t_end: f64, stream: &StreamId) -> Result<PoissonJumps> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return domain("t_end must be positive and finite");
    }
    let mut r = stream.rng();
    Ok(PoissonJumps { t_end, jump_times: poisson_times(&mut r, t_end), stream: stream.clone() })
}

fn poisson_times(r: &mut ChaCha8Rng, t_end: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut s = 0.0;
    loop {
        s += r.sample::<f64, _>(Exp1);
        if s > t_end {
            return times;
        }
        times.push(s);
    }
}

/// p_k = Σ_i (ΔX_i)^k for k = 1..=n.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSums {
    p: Vec<f64>,
}

impl PowerSums {
    pub fn new(increments: &[f64], n: usize) -> Result<Self> {
        if n == 0 {
            return domain("need at least one power sum");
        }
        let mut p = vec![0.0; n];
        for &d in increments {
            let mut pow = 1.0;
            for pk in p.iter_mut() {
                pow *= d;
                *pk += pow;
            }
        }
        Ok(PowerSums { p })
    }

    /// p_k for 1 ≤ k ≤ n.
    pub fn get(&self, k: usize) -> f64 {
        self.p[k - 1]
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Σ over distinct index tuples of ∏ ΔX: the partition inversion
/// Σ_{𝒜∈𝔓_n} ∏_{A∈𝒜} (−1)^{|A|−1}(|A|−1)! p_{|A|}, grouped by occupation
/// profile.
pub fn offdiag_from_power_sums(ps: &PowerSums, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    if n > ps.len() {
        return domain("not enough power sums for this order");
    }
    let mut acc = 0.0;
    for prof in profiles(n, None) {
        let mut term = rho_multiplicity(&prof).to_f64().unwrap_or(f64::NAN);
        for (j, c) in prof.occupied() {
            term *= (block_mobius_f64(j) * ps.get(j)).powi(c as i32);
        }
        acc += term;
    }
    Ok(acc)
}

/// The discrete off-diagonal integral of order n along a Wiener path.
pub fn offdiag_wiener(path: &WienerPath, n: usize) -> Result<f64> {
    if n > WIENER_MAX_ORDER {
        return Err(Error::Capacity { what: "off-diagonal Wiener order", got: n, limit: WIENER_MAX_ORDER });
    }
    if n == 0 {
        return Ok(1.0);
    }
    offdiag_from_power_sums(&PowerSums::new(&path.increments, n)?, n)
}

/// Direct sum over ordered tuples of distinct indices; O(stepsⁿ), for
/// cross-checking only.
pub fn offdiag_brute(increments: &[f64], n: usize) -> f64 {
    fn rec(inc: &[f64], n: usize, used: &mut Vec<bool>, prod: f64) -> f64 {
        if n == 0 {
            return prod;
        }
        let mut acc = 0.0;
        for i in 0..inc.len() {
            if !used[i] {
                used[i] = true;
                acc += rec(inc, n - 1, used, prod * inc[i]);
                used[i] = false;
            }
        }
        acc
    }
    rec(increments, n, &mut vec![false; increments.len()], 1.0)
}

/// Exact rational value of a float.
pub fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

/// The off-diagonal compensated-Poisson integral of order n, exactly: the
/// partition sum where singleton blocks contribute Y_t = N_t − t and larger
/// blocks N_t (since (dY)^k = dN for k ≥ 2).
pub fn offdiag_poisson(jumps: &PoissonJumps, n: usize) -> Result<BigRational> {
    offdiag_poisson_counts(jumps.count() as u64, &exact(jumps.t_end)?, n)
}

/// [`offdiag_poisson`] from N_t and t.
pub fn offdiag_poisson_counts(n_t: u64, t: &BigRational, n: usize) -> Result<BigRational> {
    if n > POISSON_MAX_ORDER {
        return Err(Error::Capacity { what: "off-diagonal Poisson order", got: n, limit: POISSON_MAX_ORDER });
    }
    if n == 0 {
        return Ok(BigRational::one());
    }
    let big_n = BigRational::from_integer(BigInt::from(n_t));
    let y = &big_n - t;
    let mut acc = BigRational::zero();
    for prof in profiles(n, None) {
        let mut term = BigRational::from_integer(BigInt::from(rho_multiplicity(&prof)));
        for (j, c) in prof.occupied() {
            let base = if j == 1 { y.clone() } else { big_n.clone() };
            let w = BigRational::from_integer(block_mobius(j)) * base;
            term *= num_traits::pow(w, c);
        }
        acc += term;
    }
    Ok(acc)
}

/// Coefficients of H_n (probabilists' convention) from the Cauchy product of
/// e^{xs} and e^{−s²/2}: `coeffs[k]` multiplies x^k.
pub fn hermite_coefficients(n: usize) -> Result<Vec<BigRational>> {
    if n > POLY_MAX_DEGREE {
        return Err(Error::Capacity { what: "Hermite degree", got: n, limit: POLY_MAX_DEGREE });
    }
    let nf = BigRational::from_integer(BigInt::from(factorial(n)));
    let mut coeffs = vec![BigRational::zero(); n + 1];
    // [s^n] e^{xs}e^{−s²/2} = Σ_j x^{n−2j}/(n−2j)! · (−½)^j/j!
    for j in 0..=n / 2 {
        let a = BigRational::new(BigInt::one(), BigInt::from(factorial(n - 2 * j)));
        let b = BigRational::new(BigInt::from(if j % 2 == 0 { 1 } else { -1 }), BigInt::from(factorial(j)) << j);
        coeffs[n - 2 * j] += &nf * a * b;
    }
    Ok(coeffs)
}

fn horner(coeffs: &[BigRational], x: f64) -> f64 {
    coeffs
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
}

/// H_n(x) with e^{xs − s²/2} = Σ sⁿ/n! H_n(x).
pub fn hermite(n: usize, x: f64) -> Result<f64> {
    Ok(horner(&hermite_coefficients(n)?, x))
}

/// t^{n/2} H_n(W/√t), the continuum off-diagonal Wiener integral.
pub fn scaled_hermite(n: usize, w: f64, t: f64) -> Result<f64> {
    Ok(t.powf(n as f64 / 2.0) * hermite(n, w / t.sqrt())?)
}

/// C_n(x, t) = n! Σ_{j+k=n} (−t)^j/j! · x^{↓k}/k!, read off from
/// e^{−zt}(1+z)^x = Σ zⁿ/n! C_n(x, t).
pub fn charlier_exact(n: usize, x: &BigRational, t: &BigRational) -> Result<BigRational> {
    if n > POLY_MAX_DEGREE {
        return Err(Error::Capacity { what: "Charlier degree", got: n, limit: POLY_MAX_DEGREE });
    }
    let nf = BigRational::from_integer(BigInt::from(factorial(n)));
    let mut acc = BigRational::zero();
    for j in 0..=n {
        let k = n - j;
        let tj = num_traits::pow(-t.clone(), j);
        let denom = BigRational::from_integer(BigInt::from(factorial(j) * factorial(k)));
        acc += tj * falling_power(x, k) / denom;
    }
    Ok(acc * nf)
}

pub fn charlier(n: usize, x: f64, t: f64) -> Result<f64> {
    Ok(charlier_exact(n, &exact(x)?, &exact(t)?)?.to_f64().unwrap_or(f64::NAN))
}

/// Σ_{n≤K} zⁿ/n! C_n(x, t) against e^{−zt}(1+z)^x, with the bound
/// e^{t}·max_k |C(x,k)|·|z|^{K+1}/(1−|z|) on the remainder for |z| < 1 and
/// integer x ≥ 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratingCheck {
    pub partial: f64,
    pub exact: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn charlier_generating_check(x: u64, t: f64, z: f64, k_max: usize) -> Result<GeneratingCheck> {
    if !(z.abs() < 1.0) {
        return domain("|z| must be below 1");
    }
    let xr = BigRational::from_integer(BigInt::from(x));
    let tr = exact(t)?;
    let mut partial = 0.0;
    for n in 0..=k_max {
        let c = charlier_exact(n, &xr, &tr)?.to_f64().unwrap_or(f64::NAN);
        partial += z.powi(n as i32) / factorial(n).to_f64().unwrap_or(f64::INFINITY) * c;
    }
    let exact_value = (-z * t).exp() * (1.0 + z).powf(x as f64);
    let max_binom = (0..=x)
        .map(|k| crate::combinat::binomial(x as usize, k as usize).to_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let bound = t.abs().exp() * max_binom * z.abs().powi(k_max as i32 + 1) / (1.0 - z.abs());
    let pass = (partial - exact_value).abs() <= bound + 1e-12 * exact_value.abs();
    Ok(GeneratingCheck { partial, exact: exact_value, bound, pass })
}

/// Result of a Monte Carlo identity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StochasticReport {
    pub check: String,
    pub target: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub paths: usize,
    pub seed: u64,
    pub stream: String,
    pub pass: bool,
    pub retried: bool,
}

/// Statistical tolerance in standard errors.
pub const SE_TOLERANCE: f64 = 5.0;
const BLOCK: usize = 10_000;

/// Mean and standard error of `f` over `paths` draws, split into blocks that
/// each draw from substream (name, block) and merged in block order.
pub fn mc_mean(
    paths: usize,
    seed: u64,
    name: &str,
    f: impl Fn(&mut ChaCha8Rng) -> f64 + Sync,
) -> Result<(f64, f64)> {
    if paths < 2 {
        return Err(Error::Diagnostic("need at least two paths for a standard error".into()));
    }
    let blocks = paths.div_ceil(BLOCK);
    let sums: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut r = StreamId::new(seed, name, b as u64).rng();
            let count = BLOCK.min(paths - b * BLOCK);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..count {
                let v = f(&mut r);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = paths as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    if !mean.is_finite() || !var.is_finite() {
        return Err(Error::Diagnostic("non-finite sample moments".into()));
    }
    Ok((mean, (var / n).sqrt()))
}

/// Runs a check; on failure reruns once with 4× paths on "retry" streams.
fn with_retry(
    check: &str,
    target: f64,
    paths: usize,
    seed: u64,
    f: impl Fn(&mut ChaCha8Rng) -> f64 + Sync,
) -> Result<StochasticReport> {
    let judge = |mean: f64, se: f64| (mean - target).abs() <= SE_TOLERANCE * se + 1e-12;
    let (mean, se) = mc_mean(paths, seed, check, &f)?;
    if judge(mean, se) {
        return Ok(StochasticReport {
            check: check.into(),
            target,
            estimate: mean,
            stderr: se,
            paths,
            seed,
            stream: check.into(),
            pass: true,
            retried: false,
        });
    }
    let name = format!("{check}/retry");
    let (mean, se) = mc_mean(4 * paths, seed, &name, &f)?;
    Ok(StochasticReport {
        check: check.into(),
        target,
        estimate: mean,
        stderr: se,
        paths: 4 * paths,
        seed,
        stream: name,
        pass: judge(mean, se),
        retried: true,
    })
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

/// A piecewise-constant function on [0, ∞): value `values[i]` on
/// [breaks[i], breaks[i+1]), zero beyond the last break.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || breaks.windows(2).any(|w| w[0] >= w[1]) || breaks[0] < 0.0 {
            return domain("need ascending non-negative breaks, one more than values");
        }
        Ok(StepFunction { breaks, values })
    }

    /// c·1_{[a,b)}.
    pub fn indicator(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![c])
    }

    pub fn at(&self, s: f64) -> f64 {
        match self.breaks.iter().rposition(|&b| b <= s) {
            Some(i) if i < self.values.len() => self.values[i],
            _ => 0.0,
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }
}

/// ∫ f g ds for step functions.
pub fn step_inner(f: &StepFunction, g: &StepFunction) -> f64 {
    let pts = merged_breaks(f, g);
    pts.windows(2).map(|w| (w[1] - w[0]) * f.at(w[0]) * g.at(w[0])).sum()
}

fn merged_breaks(f: &StepFunction, g: &StepFunction) -> Vec<f64> {
    let mut pts: Vec<f64> = f.breaks.iter().chain(&g.breaks).cloned().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Which exponentiated martingale to average.
#[derive(Clone, Debug, PartialEq)]
pub enum MartingaleKind {
    /// e^{zW_t − z²t/2}.
    Wiener { z: f64, t: f64 },
    /// e^{−zt}(1+z)^{N_t}.
    Poisson { z: f64, t: f64 },
    /// E^{W̃(f)}E^{W̃(g)} with E^{W̃(f)} = exp(∫f dW − ½∫f²); target exp ∫fg.
    General { f: StepFunction, g: StepFunction },
}

pub fn exponentiated_martingale_check(kind: &MartingaleKind, paths: usize, seed: u64) -> Result<StochasticReport> {
    match kind {
        MartingaleKind::Wiener { z, t } => {
            let (z, t) = (*z, *t);
            if !(t > 0.0) {
                return domain("t must be positive");
            }
            with_retry("wiener-martingale", 1.0, paths, seed, move |r| {
                let w = t.sqrt() * normal(r);
                (z * w - 0.5 * z * z * t).exp()
            })
        }
        MartingaleKind::Poisson { z, t } => {
            let (z, t) = (*z, *t);
            if !(z.abs() < 1.0) {
                return domain("|z| must be below 1");
            }
            if !(t > 0.0) {
                return domain("t must be positive");
            }
            with_retry("poisson-martingale", 1.0, paths, seed, move |r| {
                let n = poisson_times(r, t).len();
                (-z * t).exp() * (1.0 + z).powi(n as i32)
            })
        }
        MartingaleKind::General { f, g } => {
            let pts = merged_breaks(f, g);
            let target = step_inner(f, g).exp();
            let ff = step_inner(f, f);
            let gg = step_inner(g, g);
            with_retry("ito-fock", target, paths, seed, move |r| {
                let (mut xf, mut xg) = (0.0, 0.0);
                for w in pts.windows(2) {
                    let dw = (w[1] - w[0]).sqrt() * normal(r);
                    xf += f.at(w[0]) * dw;
                    xg += g.at(w[0]) * dw;
                }
                (xf - 0.5 * ff).exp() * (xg - 0.5 * gg).exp()
            })
        }
    }
}

/// 𝔼[I_n(t) I_m(s)] / (n! m!) against δ_{nm}(t∧s)ⁿ/n!, where I_n is the
/// off-diagonal Wiener integral t^{n/2}H_n(W_t/√t) at exactly sampled W_s, W_t.
pub fn iterated_moment_check(n: usize, m: usize, t: f64, s: f64, paths: usize, seed: u64) -> Result<StochasticReport> {
    if n > 4 || m > 4 {
        return Err(Error::Capacity { what: "iterated moment order", got: n.max(m), limit: 4 });
    }
    if !(t > 0.0 && s > 0.0) {
        return domain("times must be positive");
    }
    let nf = factorial(n).to_f64().unwrap_or(f64::NAN);
    let mf = factorial(m).to_f64().unwrap_or(f64::NAN);
    let target = if n == m { t.min(s).powi(n as i32) / nf } else { 0.0 };
    let (lo, hi) = (t.min(s), t.max(s));
    let hn = hermite_coefficients(n)?;
    let hm = hermite_coefficients(m)?;
    let scaled = move |c: &[BigRational], k: usize, w: f64, u: f64| u.powf(k as f64 / 2.0) * horner(c, w / u.sqrt());
    with_retry(&format!("iterated-moment-{n}-{m}"), target, paths, seed, move |r| {
        let w_lo = lo.sqrt() * normal(r);
        let w_hi = w_lo + (hi - lo).sqrt() * normal(r);
        let (wt, ws) = if t <= s { (w_lo, w_hi) } else { (w_hi, w_lo) };
        scaled(&hn, n, wt, t) * scaled(&hm, m, ws, s) / (nf * mf)
    })
}

/// Mean of the discrete off-diagonal Wiener integral of order n on a grid.
pub fn offdiag_wiener_mean_check(n: usize, t: f64, steps: usize, paths: usize, seed: u64) -> Result<StochasticReport> {
    let grid = TimeGrid::new(t, steps)?;
    if n == 0 || n > WIENER_MAX_ORDER {
        return Err(Error::Capacity { what: "off-diagonal Wiener order", got: n, limit: WIENER_MAX_ORDER });
    }
    let sd = grid.dt().sqrt();
    with_retry(&format!("offdiag-wiener-mean-{n}"), 0.0, paths, seed, move |r| {
        let inc: Vec<f64> = (0..steps).map(|_| sd * normal(r)).collect();
        offdiag_from_power_sums(&PowerSums::new(&inc, n).expect("n ≥ 1"), n).unwrap_or(f64::NAN)
    })
}

/// Mean of the exact off-diagonal compensated-Poisson integral of order n.
pub fn offdiag_poisson_mean_check(n: usize, t: f64, paths: usize, seed: u64) -> Result<StochasticReport> {
    if n == 0 || n > POISSON_MAX_ORDER {
        return Err(Error::Capacity { what: "off-diagonal Poisson order", got: n, limit: POISSON_MAX_ORDER });
    }
    let tr = exact(t)?;
    with_retry(&format!("offdiag-poisson-mean-{n}"), 0.0, paths, seed, move |r| {
        let count = poisson_times(r, t).len() as u64;
        offdiag_poisson_counts(count, &tr, n)
            .ok()
            .and_then(|v| v.to_f64())
            .unwrap_or(f64::NAN)
    })
}

/// Median over paths of |offdiag_wiener(n) − t^{n/2}H_n(W_t/√t)| for each
/// coarsening of paths sampled at the finest step count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub check: String,
    pub n: usize,
    pub steps: Vec<usize>,
    pub median_error: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    pub pass: bool,
}

pub fn hermite_convergence(
    n: usize,
    t: f64,
    steps: &[usize],
    paths: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    let finest = *steps.iter().max().ok_or_else(|| Error::Domain("no step counts".into()))?;
    if steps.iter().any(|&s| s == 0 || finest % s != 0) {
        return domain("every step count must divide the finest");
    }
    if paths == 0 {
        return domain("need at least one path");
    }
    let grid = TimeGrid::new(t, finest)?;
    let errors: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let path = sample_wiener(grid, &StreamId::new(seed, "hermite-convergence", p as u64));
            let target = scaled_hermite(n, path.end_value(), t)?;
            steps
                .iter()
                .map(|&s| Ok((offdiag_wiener(&path.coarsen(finest / s)?, n)? - target).abs()))
                .collect()
        })
        .collect::<Result<_>>()?;
    let median_error: Vec<f64> = (0..steps.len())
        .map(|k| {
            let mut col: Vec<f64> = errors.iter().map(|e| e[k]).collect();
            col.sort_by(f64::total_cmp);
            let mid = col.len() / 2;
            if col.len() % 2 == 1 {
                col[mid]
            } else {
                0.5 * (col[mid - 1] + col[mid])
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by_key(|&k| steps[k]);
    let pass = order.windows(2).all(|w| median_error[w[1]] < median_error[w[0]]);
    Ok(ConvergenceReport {
        check: format!("hermite-convergence-{n}"),
        n,
        steps: steps.to_vec(),
        median_error,
        paths,
        seed,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn small_polynomials() {
        assert_eq!(hermite(3, 2.0).unwrap(), 2.0);
        assert_eq!(hermite(0, 5.0).unwrap(), 1.0);
        assert_eq!(charlier_exact(0, &q(7, 1), &q(1, 1)).unwrap(), q(1, 1));
        assert_eq!(charlier_exact(2, &q(3, 1), &q(2, 1)).unwrap(), q(-2, 1));
        assert_eq!(charlier_exact(1, &q(5, 1), &q(3, 2)).unwrap(), q(7, 2));
    }

    #[test]
    fn offdiag_second_order() {
        let inc = [0.3, -0.2, 0.5];
        let ps = PowerSums::new(&inc, 2).unwrap();
        let w: f64 = inc.iter().sum();
        let v = offdiag_from_power_sums(&ps, 2).unwrap();
        assert!((v - (w * w - ps.get(2))).abs() < 1e-15);
    }

    #[test]
    fn capacities() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let p = sample_wiener(g, &StreamId::new(1, "x", 0));
        assert!(matches!(offdiag_wiener(&p, 9), Err(Error::Capacity { .. })));
        assert!(matches!(hermite(31, 0.0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn determinism() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let s = StreamId::new(11, "w", 3);
        assert_eq!(sample_wiener(g, &s), sample_wiener(g, &s));
    }

    #[test]
    fn step_functions() {
        let f = StepFunction::indicator(0.0, 1.0, 1.0).unwrap();
        let g = StepFunction::indicator(0.5, 1.0, 2.0).unwrap();
        assert!((step_inner(&f, &g) - 1.0).abs() < 1e-15);
        assert_eq!(f.at(1.0), 0.0);
    }
}
