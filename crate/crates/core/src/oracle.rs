//! Brute-force representation counts over `o/p^k`.
//!
//! Counts matrices `x` in `M_{m,n}(o/p^k)` with `x^* S x = T (mod p^k)` for
//! diagonal `S = diag(p^{e_i})` and `n` in {1, 2}. This is the ground truth the
//! density formulas are checked against; it is deliberately naive apart from
//! filtering each column on its own diagonal condition before pairing.
//!
//! Columns are indexed as mixed-radix integers (one digit in `[0, p^{2k})` per
//! ring element). The outer column range is split into contiguous chunks that
//! are counted in parallel and summed in chunk order, so the result does not
//! depend on the number of workers.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, pow, Rational};
use crate::localfield::{InertLocalRing, LocalHermitianSpec, ResidueRingElem};

pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// A local Hermitian target of rank 1 or 2, with integer entries that are
/// reduced into whichever residue ring the job runs in.
///
/// The rank-two matrix is `((t1, off), (off', t2))`, `off = x + y delta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalTarget {
    Rank1 { t: i64 },
    Rank2 { t1: i64, t2: i64, off: (i64, i64) },
}

impl LocalTarget {
    pub fn diag(entries: &[i64]) -> Result<Self> {
        match *entries {
            [t] => Ok(LocalTarget::Rank1 { t }),
            [t1, t2] => Ok(LocalTarget::Rank2 { t1, t2, off: (0, 0) }),
            _ => Err(Error::pre("the oracle supports targets of rank 1 or 2")),
        }
    }

    /// Builds a rank-two target from all four entries `(re, delta-part)`,
    /// rejecting matrices that are not conjugate-symmetric.
    pub fn from_matrix(entries: [[(i64, i64); 2]; 2]) -> Result<Self> {
        let [[t11, t12], [t21, t22]] = entries;
        if t11.1 != 0 || t22.1 != 0 {
            return Err(Error::pre("diagonal entries of a Hermitian matrix must be rational"));
        }
        if t21 != (t12.0, -t12.1) {
            return Err(Error::pre("target is not conjugate-symmetric: T_21 must equal conj(T_12)"));
        }
        Ok(LocalTarget::Rank2 { t1: t11.0, t2: t22.0, off: t12 })
    }

    pub fn rank(&self) -> usize {
        match self {
            LocalTarget::Rank1 { .. } => 1,
            LocalTarget::Rank2 { .. } => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleJob {
    pub ring: InertLocalRing,
    pub s: LocalHermitianSpec,
    pub target: LocalTarget,
}

impl OracleJob {
    pub fn new(ring: InertLocalRing, s: LocalHermitianSpec, target: LocalTarget) -> Result<Self> {
        if s.rank() < target.rank() {
            return Err(Error::pre(format!(
                "need rank(S) = {} >= rank(T) = {}",
                s.rank(),
                target.rank()
            )));
        }
        Ok(OracleJob { ring, s, target })
    }

    /// The same job over `o/p^k` for another precision, keeping `eps`.
    pub fn at_precision(&self, k: u32) -> Result<Self> {
        let ring = InertLocalRing::with_eps(self.ring.p(), k, self.ring.eps())?;
        OracleJob::new(ring, self.s.clone(), self.target.clone())
    }

    pub fn m(&self) -> usize {
        self.s.rank()
    }

    pub fn n(&self) -> usize {
        self.target.rank()
    }

    /// Nominal enumeration size `p^{2kmn}`, or `None` on overflow.
    pub fn enumeration_size(&self) -> Option<u128> {
        let exp = 2 * self.ring.k() * (self.m() * self.n()) as u32;
        (self.ring.p() as u128).checked_pow(exp)
    }

    fn column_count(&self) -> Result<u64> {
        (self.ring.size() as u128)
            .checked_pow(self.m() as u32)
            .filter(|c| *c <= u64::MAX as u128)
            .map(|c| c as u64)
            .ok_or_else(|| Error::pre("column space too large"))
    }
}

#[derive(Clone, Copy)]
pub struct OracleConfig<'a> {
    pub budget: u128,
    /// Worker count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Called as `(chunks_done, chunks_total)`; never writes to the result stream.
    pub progress: Option<&'a (dyn Fn(u64, u64) + Sync)>,
}

impl Default for OracleConfig<'_> {
    fn default() -> Self {
        OracleConfig { budget: DEFAULT_BUDGET, threads: None, progress: None }
    }
}

impl<'a> OracleConfig<'a> {
    pub fn with_budget(budget: u128) -> Self {
        OracleConfig { budget, ..Default::default() }
    }
}

struct Columns<'j> {
    ring: &'j InertLocalRing,
    scale: Vec<u64>,
    m: usize,
}

impl Columns<'_> {
    fn decode(&self, mut idx: u64, out: &mut [ResidueRingElem]) {
        let base = self.ring.size();
        for slot in out.iter_mut().take(self.m) {
            *slot = self.ring.from_index(idx % base);
            idx /= base;
        }
    }

    /// `sum_l s_l N(x_l)`.
    fn norm_form(&self, x: &[ResidueRingElem]) -> u64 {
        let q = self.ring.modulus();
        x.iter().zip(&self.scale).fold(0, |acc, (xl, s)| (acc + s * self.ring.norm(xl)) % q)
    }
}

/// Exact number of `x` with `x^* S x = T (mod p^k)`.
pub fn count_solutions(job: &OracleJob) -> Result<u64> {
    count_solutions_with(job, &OracleConfig::default())
}

pub fn count_solutions_with(job: &OracleJob, config: &OracleConfig<'_>) -> Result<u64> {
    let size = job.enumeration_size().unwrap_or(u128::MAX);
    if size > config.budget {
        return Err(Error::BudgetExceeded { size, budget: config.budget });
    }
    match config.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::pre(format!("cannot start worker pool: {e}")))?;
            pool.install(|| count_inner(job, config))
        }
        None => count_inner(job, config),
    }
}

fn count_inner(job: &OracleJob, config: &OracleConfig<'_>) -> Result<u64> {
    let ring = &job.ring;
    let m = job.m();
    let q = ring.modulus();
    let cols = Columns {
        ring,
        scale: job.s.exponents().iter().map(|&e| pow_mod_q(ring.p(), e, q)).collect(),
        m,
    };
    let total = job.column_count()?;

    let (t1, t2, off) = match job.target {
        LocalTarget::Rank1 { t } => (ring.reduce(t), None, None),
        LocalTarget::Rank2 { t1, t2, off } => {
            (ring.reduce(t1), Some(ring.reduce(t2)), Some(ring.elem(off.0, off.1)))
        }
    };

    // Second-column candidates: everything with the right (2,2) entry.
    let inner: Vec<ResidueRingElem> = match t2 {
        None => Vec::new(),
        Some(t2) => {
            let mut buf = vec![ResidueRingElem { a: 0, b: 0 }; m];
            let mut flat = Vec::new();
            for idx in 0..total {
                cols.decode(idx, &mut buf);
                if cols.norm_form(&buf) == t2 {
                    flat.extend_from_slice(&buf);
                }
            }
            flat
        }
    };

    let chunks = 256u64.min(total).max(1);
    let step = total.div_ceil(chunks);
    let done = AtomicU64::new(0);
    let partials: Vec<u64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * step;
            let hi = ((c + 1) * step).min(total);
            let mut x = vec![ResidueRingElem { a: 0, b: 0 }; m];
            let mut sx = vec![ResidueRingElem { a: 0, b: 0 }; m];
            let mut count = 0u64;
            for idx in lo..hi {
                cols.decode(idx, &mut x);
                if cols.norm_form(&x) != t1 {
                    continue;
                }
                let Some(off) = off else {
                    count += 1;
                    continue;
                };
                // s_l * conj(x_l), reused against every candidate.
                for l in 0..m {
                    let c = ring.conj(&x[l]);
                    sx[l] = ResidueRingElem { a: c.a * cols.scale[l] % q, b: c.b * cols.scale[l] % q };
                }
                count += inner
                    .chunks_exact(m)
                    .filter(|y| {
                        let mut acc = ResidueRingElem { a: 0, b: 0 };
                        for l in 0..m {
                            acc = ring.add(&acc, &ring.mul(&sx[l], &y[l]));
                        }
                        acc == off
                    })
                    .count() as u64;
            }
            if let Some(progress) = config.progress {
                progress(done.fetch_add(1, Ordering::Relaxed) + 1, chunks);
            }
            count
        })
        .collect();
    Ok(partials.into_iter().sum())
}

fn pow_mod_q(p: u64, e: u32, q: u64) -> u64 {
    (0..e).fold(1 % q, |acc, _| acc * p % q)
}

/// `count * p^{-k n (2m - n)}`.
pub fn density_estimate(job: &OracleJob) -> Result<Rational> {
    density_estimate_with(job, &OracleConfig::default())
}

pub fn density_estimate_with(job: &OracleJob, config: &OracleConfig<'_>) -> Result<Rational> {
    let count = count_solutions_with(job, config)?;
    let (k, m, n) = (job.ring.k() as i64, job.m() as i64, job.n() as i64);
    let scale = pow(&int(job.ring.p() as i64), -k * n * (2 * m - n));
    Ok(Rational::from_integer(BigInt::from(count)) * scale)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilization {
    /// The estimate at precision `k + 1`.
    #[serde(with = "crate::exact::rational_str")]
    pub value: Rational,
    #[serde(with = "crate::exact::rational_str")]
    pub previous: Rational,
    pub k: u32,
    /// `true` when the estimates at `k` and `k + 1` agree. An unset flag means
    /// "undetermined", not that the limit differs.
    pub stabilized: bool,
}

/// Compares the estimates at the job's precision `k` and at `k + 1`.
pub fn stabilized_density(job: &OracleJob, config: &OracleConfig<'_>) -> Result<Stabilization> {
    let previous = density_estimate_with(job, config)?;
    let next = job.at_precision(job.ring.k() + 1)?;
    let value = density_estimate_with(&next, config)?;
    Ok(Stabilization {
        stabilized: previous == value,
        value,
        previous,
        k: job.ring.k(),
    })
}
