//! The increment process of the fractal function: coefficients
//! `lambda_{m,k}`, the i.i.d. two-point and ternary Markov laws of the
//! normalized increments, exact finite laws of the partial sums
//! `S_n = sum_{m<=n} (alpha b)^-m Y_m`, and Monte Carlo estimation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::base::BaseFunction;
use crate::error::{CoreError, Result};
use crate::fractal::FractalSpec;
use crate::kahan::KahanSum;
use crate::DEFAULT_ATOM_BUDGET;

/// Normalized increment of `phi` at a b-adic site:
/// `(phi((k+1) b^-m) - phi(k b^-m)) * b^m`.
pub fn lambda_coeff(phi: &BaseFunction, b: u32, m: u32, k: u64) -> Result<f64> {
    if m < 1 {
        return Err(CoreError::invalid("lambda coefficients require m >= 1"));
    }
    let bm = u64::from(b)
        .checked_pow(m)
        .ok_or_else(|| CoreError::invalid("b^m overflows"))?;
    if k >= bm {
        return Err(CoreError::IndexOutOfRange { index: k, bound: bm });
    }
    let denom = bm as f64;
    Ok((phi.eval((k + 1) as f64 / denom) - phi.eval(k as f64 / denom)) * denom)
}

/// All coefficients `lambda_{m,k}`, `k = 0..b^m - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTable {
    pub b: u32,
    pub m: u32,
    pub values: Vec<f64>,
}

impl LambdaTable {
    pub fn new(phi: &BaseFunction, b: u32, m: u32) -> Result<Self> {
        let bm = u64::from(b)
            .checked_pow(m)
            .ok_or_else(|| CoreError::invalid("b^m overflows"))?;
        let values = (0..bm)
            .map(|k| lambda_coeff(phi, b, m, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { b, m, values })
    }
}

/// Increment sign of the tent map in integer arithmetic:
/// `Y_m` for `R_m = k` and grid size `b^m`, in `{-1, 0, +1}`.
pub fn tent_increment_sign(bm: u64, k: u64) -> i64 {
    let at = |j: u64| j.min(bm - j) as i64;
    at(k + 1) - at(k)
}

/// Whether the skewed tent increment at site `k` of grid `b^m` takes the
/// value `nu` (upward slope), i.e. `k < ell * b^{m-1}`.
pub fn skewed_increment_is_up(b: u32, ell: u32, m: u32, k: u64) -> bool {
    let threshold = u64::from(ell) * u64::from(b).pow(m - 1);
    k < threshold
}

/// The i.i.d. two-point law of the skewed-tent increments:
/// `mu = -b/(2(b-ell))`, `nu = b/(2 ell)`, `P[Y = nu] = ell/b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IIDTwoPointLaw {
    pub b: u32,
    pub ell: u32,
    pub mu: f64,
    pub nu: f64,
    pub p: f64,
}

impl IIDTwoPointLaw {
    pub fn mu_rational(&self) -> Ratio<i64> {
        Ratio::new(-i64::from(self.b), 2 * i64::from(self.b - self.ell))
    }

    pub fn nu_rational(&self) -> Ratio<i64> {
        Ratio::new(i64::from(self.b), 2 * i64::from(self.ell))
    }

    pub fn p_rational(&self) -> Ratio<i64> {
        Ratio::new(i64::from(self.ell), i64::from(self.b))
    }
}

pub fn iid_params(b: u32, ell: u32) -> Result<IIDTwoPointLaw> {
    if b < 2 || ell < 1 || ell > b - 1 {
        return Err(CoreError::invalid(format!(
            "two-point law requires 1 <= ell <= b-1, got ell={ell}, b={b}"
        )));
    }
    let bf = f64::from(b);
    let ellf = f64::from(ell);
    Ok(IIDTwoPointLaw {
        b,
        ell,
        mu: -bf / (2.0 * (bf - ellf)),
        nu: bf / (2.0 * ellf),
        p: ellf / bf,
    })
}

/// Ternary Markov law of the tent increments for odd `b`, with exact
/// rational entries. State order is `(-1, 0, +1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovTernaryLaw {
    pub b: u32,
    pub initial: [Ratio<i64>; 3],
    pub transition: [[Ratio<i64>; 3]; 3],
}

impl MarkovTernaryLaw {
    pub fn initial_f64(&self) -> [f64; 3] {
        self.initial.map(ratio_to_f64)
    }

    pub fn transition_f64(&self) -> [[f64; 3]; 3] {
        self.transition.map(|row| row.map(ratio_to_f64))
    }
}

fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn markov_params(b: u32) -> Result<MarkovTernaryLaw> {
    if b % 2 == 0 || b < 3 {
        return Err(CoreError::invalid(format!(
            "ternary Markov law requires odd b >= 3, got {b}"
        )));
    }
    let b_i = i64::from(b);
    let lo = Ratio::new(b_i - 1, 2 * b_i);
    let mid = Ratio::new(1, b_i);
    let hi = Ratio::new(b_i + 1, 2 * b_i);
    let zero = Ratio::new(0, 1);
    Ok(MarkovTernaryLaw {
        b,
        initial: [lo, mid, lo],
        transition: [[hi, zero, lo], [lo, mid, lo], [lo, zero, hi]],
    })
}

/// Enumeration strategy for the exact law of the partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionMode {
    /// Uniform enumeration of all sites `R_n`; works for any base function.
    GenericEnumeration,
    /// Branching over the two-point increment law (tent with even b, or
    /// skewed tent).
    IidTwoPoint,
    /// Path propagation of the ternary Markov chain (tent with odd b).
    MarkovTernary,
}

impl DistributionMode {
    pub fn name(self) -> &'static str {
        match self {
            DistributionMode::GenericEnumeration => "enumerate",
            DistributionMode::IidTwoPoint => "iid",
            DistributionMode::MarkovTernary => "markov",
        }
    }
}

/// Auxiliary state attached to an atom; paths are never merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomState {
    /// Site index `R_n` of a generic enumeration.
    Site(u64),
    /// Last two-point step: +1 for `nu`, -1 for `mu`.
    TwoPoint(i8),
    /// Last ternary chain state in `{-1, 0, +1}`.
    Ternary(i8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub probability: f64,
    pub state: AtomState,
}

/// Exact finite law of `S_n = sum_{m=1}^n (alpha b)^-m Y_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementDistribution {
    pub depth: u32,
    pub mode: DistributionMode,
    pub atoms: Vec<Atom>,
}

impl IncrementDistribution {
    pub fn total_probability(&self) -> f64 {
        let mut acc = KahanSum::new();
        for a in &self.atoms {
            acc += a.probability;
        }
        acc.value()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.atoms.iter().map(|a| a.value.abs()).fold(0.0, f64::max)
    }
}

/// Preferred enumeration mode for a spec's base function.
pub fn preferred_mode(spec: &FractalSpec) -> DistributionMode {
    match spec.phi() {
        BaseFunction::Tent if spec.b() % 2 == 0 => DistributionMode::IidTwoPoint,
        BaseFunction::Tent => DistributionMode::MarkovTernary,
        BaseFunction::SkewedTent { .. } => DistributionMode::IidTwoPoint,
        _ => DistributionMode::GenericEnumeration,
    }
}

/// The two-point law matching a spec, if its base is a (skewed) tent with
/// i.i.d. increments.
pub fn two_point_law_of(spec: &FractalSpec) -> Option<IIDTwoPointLaw> {
    match spec.phi() {
        BaseFunction::Tent if spec.b() % 2 == 0 => iid_params(spec.b(), spec.b() / 2).ok(),
        BaseFunction::SkewedTent { b, ell } if *b == spec.b() => iid_params(*b, *ell).ok(),
        _ => None,
    }
}

/// Exact law of the depth-`n` partial sum under the requested mode.
pub fn exact_partial_sum_distribution(
    spec: &FractalSpec,
    n: u32,
    mode: DistributionMode,
    budget: u64,
) -> Result<IncrementDistribution> {
    let gamma = spec.gamma();
    match mode {
        DistributionMode::GenericEnumeration => {
            let required = spec.badic_count(n)?;
            check_budget("exact_partial_sum_distribution", n, required, budget)?;
            Ok(generic_distribution(spec, n, gamma))
        }
        DistributionMode::IidTwoPoint => {
            let law = two_point_law_of(spec).ok_or(CoreError::ModeMismatch {
                mode: "iid",
                kind: spec.phi().kind_name(),
            })?;
            let required = 1u64
                .checked_shl(n)
                .ok_or_else(|| CoreError::invalid("2^n overflows"))?;
            check_budget("exact_partial_sum_distribution", n, required, budget)?;
            Ok(iid_distribution(&law, gamma, n))
        }
        DistributionMode::MarkovTernary => {
            let is_odd_tent = matches!(spec.phi(), BaseFunction::Tent) && spec.b() % 2 == 1;
            if !is_odd_tent {
                return Err(CoreError::ModeMismatch {
                    mode: "markov",
                    kind: spec.phi().kind_name(),
                });
            }
            let law = markov_params(spec.b())?;
            let required = if n == 0 {
                1
            } else {
                3u64.checked_mul(1u64 << (n - 1).min(62))
                    .ok_or_else(|| CoreError::invalid("atom count overflows"))?
            };
            check_budget("exact_partial_sum_distribution", n, required, budget)?;
            Ok(markov_distribution(&law, gamma, n))
        }
    }
}

fn check_budget(operation: &'static str, n: u32, required: u64, budget: u64) -> Result<()> {
    if required > budget {
        return Err(CoreError::BudgetExceeded {
            operation,
            n,
            required,
            budget,
        });
    }
    Ok(())
}

fn generic_distribution(spec: &FractalSpec, n: u32, gamma: f64) -> IncrementDistribution {
    let b = u64::from(spec.b());
    // Level-by-level extension: adding digit U_m only contributes the
    // m-th term gamma^m * lambda_{m, R_m}.
    let mut states: Vec<(u64, f64)> = vec![(0, 0.0)];
    let mut bm = 1u64;
    let mut weight = 1.0;
    for m in 1..=n {
        bm *= b;
        weight *= gamma;
        let denom = bm as f64;
        let mut next = Vec::with_capacity(states.len() * b as usize);
        for &(r, s) in &states {
            for u in 0..b {
                let site = r + u * (bm / b);
                let lam = (spec.phi().eval((site + 1) as f64 / denom)
                    - spec.phi().eval(site as f64 / denom))
                    * denom;
                next.push((site, s + weight * lam));
            }
        }
        let _ = m;
        states = next;
    }
    let prob = 1.0 / states.len() as f64;
    let atoms = states
        .into_iter()
        .map(|(r, s)| Atom {
            value: s,
            probability: prob,
            state: AtomState::Site(r),
        })
        .collect();
    IncrementDistribution {
        depth: n,
        mode: DistributionMode::GenericEnumeration,
        atoms,
    }
}

/// Law of `sum_{m=1}^n gamma^m Y_m` for i.i.d. two-point `Y`.
pub fn iid_distribution(law: &IIDTwoPointLaw, gamma: f64, n: u32) -> IncrementDistribution {
    let mut atoms = vec![Atom {
        value: 0.0,
        probability: 1.0,
        state: AtomState::TwoPoint(0),
    }];
    let mut weight = 1.0;
    for _ in 0..n {
        weight *= gamma;
        let mut next = Vec::with_capacity(atoms.len() * 2);
        for a in &atoms {
            next.push(Atom {
                value: a.value + weight * law.nu,
                probability: a.probability * law.p,
                state: AtomState::TwoPoint(1),
            });
            next.push(Atom {
                value: a.value + weight * law.mu,
                probability: a.probability * (1.0 - law.p),
                state: AtomState::TwoPoint(-1),
            });
        }
        atoms = next;
    }
    IncrementDistribution {
        depth: n,
        mode: DistributionMode::IidTwoPoint,
        atoms,
    }
}

/// Law of `sum_{m=1}^n gamma^m Y_m` for the ternary Markov chain; paths
/// with zero probability are not expanded.
pub fn markov_distribution(law: &MarkovTernaryLaw, gamma: f64, n: u32) -> IncrementDistribution {
    if n == 0 {
        return IncrementDistribution {
            depth: 0,
            mode: DistributionMode::MarkovTernary,
            atoms: vec![Atom {
                value: 0.0,
                probability: 1.0,
                state: AtomState::Ternary(0),
            }],
        };
    }
    let initial = law.initial_f64();
    let transition = law.transition_f64();
    let states = [-1i8, 0, 1];
    let mut atoms: Vec<Atom> = states
        .iter()
        .enumerate()
        .filter(|(i, _)| initial[*i] > 0.0)
        .map(|(i, &y)| Atom {
            value: gamma * f64::from(y),
            probability: initial[i],
            state: AtomState::Ternary(y),
        })
        .collect();
    let mut weight = gamma;
    for _ in 1..n {
        weight *= gamma;
        let mut next = Vec::with_capacity(atoms.len() * 2);
        for a in &atoms {
            let AtomState::Ternary(prev) = a.state else {
                unreachable!()
            };
            let row = transition[(prev + 1) as usize];
            for (j, &y) in states.iter().enumerate() {
                if row[j] > 0.0 {
                    next.push(Atom {
                        value: a.value + weight * f64::from(y),
                        probability: a.probability * row[j],
                        state: AtomState::Ternary(y),
                    });
                }
            }
        }
        atoms = next;
    }
    IncrementDistribution {
        depth: n,
        mode: DistributionMode::MarkovTernary,
        atoms,
    }
}

/// `E[|S|^p]` over the atoms.
pub fn expected_abs_power(dist: &IncrementDistribution, p: f64) -> f64 {
    let mut acc = KahanSum::new();
    for a in &dist.atoms {
        acc += a.probability * a.value.abs().powf(p);
    }
    acc.value()
}

/// Signed `E[S^k]` over the atoms.
pub fn expected_power(dist: &IncrementDistribution, k: u32) -> f64 {
    let mut acc = KahanSum::new();
    for a in &dist.atoms {
        acc += a.probability * a.value.powi(k as i32);
    }
    acc.value()
}

/// Moment-form evaluation of `V_{p,1,n}(f)`:
/// `(|alpha|^p b)^n * E[|S_n|^p]`. Analytically equal to the partition sum.
pub fn lemma1_value(spec: &FractalSpec, p: f64, n: u32) -> Result<f64> {
    lemma1_value_budgeted(spec, p, n, DEFAULT_ATOM_BUDGET)
}

pub fn lemma1_value_budgeted(spec: &FractalSpec, p: f64, n: u32, budget: u64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(CoreError::invalid(format!("p must be >= 1, got {p}")));
    }
    let dist = exact_partial_sum_distribution(spec, n, preferred_mode(spec), budget)?;
    let scale = (spec.alpha().abs().powf(p) * f64::from(spec.b())).powi(n as i32);
    Ok(scale * expected_abs_power(&dist, p))
}

/// Monte Carlo estimate of `E[|S_depth|^p]` (or signed `E[S_depth^q]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub depth: u32,
    pub samples: u64,
}

const MC_CHUNK: u64 = 1 << 16;

/// Depth at which the truncation tail `C gamma^{N+1}/(1-gamma)` drops
/// below `resolution`.
pub fn mc_default_depth(spec: &FractalSpec, resolution: f64) -> Result<u32> {
    let gamma = spec.gamma().abs();
    if gamma >= 1.0 {
        return Err(CoreError::OutOfRegime {
            alpha_abs: spec.alpha().abs(),
            b: spec.b(),
        });
    }
    let c = spec.phi().lipschitz_constant();
    let mut depth = 1u32;
    let mut tail = c * gamma * gamma / (1.0 - gamma);
    while tail > resolution && depth < 4000 {
        depth += 1;
        tail *= gamma;
    }
    Ok(depth)
}

/// Reproducible Monte Carlo: fixed (seed, samples) gives a fixed result;
/// chunks use independent ChaCha streams and are combined in index order.
pub fn mc_estimate(
    spec: &FractalSpec,
    p: f64,
    signed: bool,
    depth: Option<u32>,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let gamma = spec.gamma();
    if gamma.abs() >= 1.0 {
        return Err(CoreError::OutOfRegime {
            alpha_abs: spec.alpha().abs(),
            b: spec.b(),
        });
    }
    if samples == 0 {
        return Err(CoreError::invalid("samples must be >= 1"));
    }
    let q_int = p.round() as i32;
    if signed && ((p - q_int as f64).abs() > 1e-9 || q_int % 2 == 0) {
        return Err(CoreError::invalid(format!(
            "signed moments require an odd integer exponent, got {p}"
        )));
    }
    let depth = match depth {
        Some(d) => d,
        None => mc_default_depth(spec, 1e-6)?,
    };

    let b = spec.b();
    let law = two_point_law_of(spec);
    let markov = match spec.phi() {
        BaseFunction::Tent if b % 2 == 1 => Some(markov_params(b)?),
        _ => None,
    };

    let mut sum = KahanSum::new();
    let mut sum_sq = KahanSum::new();
    let chunks = samples.div_ceil(MC_CHUNK);
    for chunk in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let in_chunk = MC_CHUNK.min(samples - chunk * MC_CHUNK);
        let mut chunk_sum = KahanSum::new();
        let mut chunk_sq = KahanSum::new();
        for _ in 0..in_chunk {
            let s = if let Some(law) = &law {
                sample_iid(&mut rng, law, gamma, depth)
            } else if let Some(law) = &markov {
                sample_markov(&mut rng, law, gamma, depth)
            } else {
                sample_generic(&mut rng, spec, gamma, depth)
            };
            let x = if signed {
                s.powi(q_int)
            } else {
                s.abs().powf(p)
            };
            chunk_sum += x;
            chunk_sq += x * x;
        }
        sum += chunk_sum.value();
        sum_sq += chunk_sq.value();
    }
    let mean = sum.value() / samples as f64;
    let var = (sum_sq.value() / samples as f64 - mean * mean).max(0.0);
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / samples as f64).sqrt(),
        depth,
        samples,
    })
}

fn sample_iid(rng: &mut ChaCha8Rng, law: &IIDTwoPointLaw, gamma: f64, depth: u32) -> f64 {
    let mut acc = KahanSum::new();
    let mut weight = 1.0;
    for _ in 0..depth {
        weight *= gamma;
        let u: u32 = rng.random_range(0..law.b);
        acc += weight * if u < law.ell { law.nu } else { law.mu };
    }
    acc.value()
}

fn sample_markov(rng: &mut ChaCha8Rng, law: &MarkovTernaryLaw, gamma: f64, depth: u32) -> f64 {
    let b = law.b;
    let half = (b - 1) / 2;
    let mut acc = KahanSum::new();
    let mut weight = 1.0;
    // Simulate the chain through the underlying uniform digits; the first
    // digit sets the initial state, later digits drive the transitions.
    let mut state: i8 = 0;
    let mut at_center = true; // R_m = (b^m - 1)/2 so far
    for m in 0..depth {
        weight *= gamma;
        let u: u32 = rng.random_range(0..b);
        if m == 0 {
            state = if u < half {
                1
            } else if u == half {
                0
            } else {
                -1
            };
            at_center = u == half;
        } else if at_center {
            state = if u < half {
                1
            } else if u == half {
                0
            } else {
                -1
            };
            at_center = at_center && u == half;
        } else {
            // away from the center the chain keeps or flips sign
            let stay = match state {
                1 => u <= half,
                -1 => u >= half,
                _ => unreachable!(),
            };
            state = if stay { state } else { -state };
        }
        acc += weight * f64::from(state);
    }
    acc.value()
}

fn sample_generic(rng: &mut ChaCha8Rng, spec: &FractalSpec, gamma: f64, depth: u32) -> f64 {
    let b = spec.b();
    let bf = f64::from(b);
    let mut acc = KahanSum::new();
    let mut weight = 1.0;
    let mut frac = 0.0; // R_m b^-m
    let mut step = 1.0; // b^-m
    for _ in 0..depth {
        weight *= gamma;
        step /= bf;
        let u: u32 = rng.random_range(0..b);
        frac = (frac + f64::from(u)) / bf;
        let lam = (spec.phi().eval(frac + step) - spec.phi().eval(frac)) / step;
        acc += weight * lam;
    }
    acc.value()
}
