//! Trait-structured discrete Verhulst model.
//!
//! A population is a vector of (real-valued) head counts indexed by an
//! integer trait `v = 1..=v_max`. One generation applies trait-dependent
//! mortality to the parents, then adds offspring whose traits are the parent
//! trait displaced by a symmetric mutation kernel. Births are damped by the
//! logistic factor `1 - total/K` and switched off entirely once the total
//! population exceeds the capacity `K`.
//!
//! Traits are 1-based in every public signature that takes a trait value;
//! slices are 0-based (`counts[v - 1]` holds trait `v`).

use crate::error::{ModelError, Result};

/// Absolute tolerance on the kernel normalization `sum f_mut(u) = 1`.
pub const KERNEL_SUM_TOLERANCE: f64 = 1e-12;

/// Totals below this are treated as an empty population.
pub const EMPTY_POPULATION: f64 = 1e-300;

/// Symmetric mutation kernel `f_mut(u)` on `u = -v_max..=v_max`.
///
/// Construction only checks the table length. Whether the four kernel
/// axioms hold is a question for [`MutationKernel::validate`]; invalid
/// kernels are representable so they can be reported on.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationKernel {
    v_max: usize,
    mass: Vec<f64>,
}

/// One violated kernel axiom.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelViolation {
    /// `f_mut(u)` outside `[0, 1]` (or not finite).
    OutOfRange { u: isize, value: f64 },
    /// `f_mut(-u) != f_mut(u)`.
    Asymmetric { u: isize, left: f64, right: f64 },
    /// `f_mut(u) < f_mut(u + 1)` for some `u >= 0`.
    IncreasingTail { u: isize, value: f64, next: f64 },
    /// The masses do not sum to one.
    NotNormalized { sum: f64 },
}

impl std::fmt::Display for KernelViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelViolation::OutOfRange { u, value } => {
                write!(f, "f_mut({u}) = {value} is outside [0, 1]")
            }
            KernelViolation::Asymmetric { u, left, right } => {
                write!(f, "f_mut(-{u}) = {left} differs from f_mut({u}) = {right}")
            }
            KernelViolation::IncreasingTail { u, value, next } => write!(
                f,
                "f_mut({u}) = {value} is smaller than f_mut({}) = {next}",
                u + 1
            ),
            KernelViolation::NotNormalized { sum } => {
                write!(f, "kernel mass sums to {sum}, not 1")
            }
        }
    }
}

impl MutationKernel {
    /// Builds a kernel from the full table `f_mut(-v_max), ..., f_mut(v_max)`.
    pub fn new(v_max: usize, mass: Vec<f64>) -> Result<Self> {
        if v_max == 0 {
            return Err(ModelError::invalid("v_max", "must be at least 1"));
        }
        if mass.len() != 2 * v_max + 1 {
            return Err(ModelError::DimensionMismatch {
                expected: 2 * v_max + 1,
                actual: mass.len(),
            });
        }
        Ok(MutationKernel { v_max, mass })
    }

    /// Builds a symmetric kernel from its one-sided profile:
    /// `profile[k]` is `f_mut(k) = f_mut(-k)`. Missing entries are zero.
    pub fn symmetric(v_max: usize, profile: &[f64]) -> Result<Self> {
        if profile.len() > v_max + 1 {
            return Err(ModelError::invalid(
                "profile",
                format!("{} entries exceed v_max + 1 = {}", profile.len(), v_max + 1),
            ));
        }
        let mut mass = vec![0.0; 2 * v_max + 1];
        for (k, &p) in profile.iter().enumerate() {
            mass[v_max + k] = p;
            mass[v_max - k] = p;
        }
        MutationKernel::new(v_max, mass)
    }

    /// Offspring keep the parent trait with probability 0.9 and move one step
    /// up or down with probability 0.05 each.
    pub fn nearest_neighbour(v_max: usize) -> Result<Self> {
        MutationKernel::symmetric(v_max, &[0.9, 0.05])
    }

    /// No mutation at all: `f_mut(0) = 1`.
    pub fn point_mass(v_max: usize) -> Result<Self> {
        MutationKernel::symmetric(v_max, &[1.0])
    }

    pub fn v_max(&self) -> usize {
        self.v_max
    }

    /// `f_mut(u)`, zero outside `-v_max..=v_max`.
    pub fn at(&self, u: isize) -> f64 {
        let idx = u + self.v_max as isize;
        if idx < 0 {
            return 0.0;
        }
        self.mass.get(idx as usize).copied().unwrap_or(0.0)
    }

    /// The full table, `f_mut(-v_max)` first.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Checks the four kernel axioms and lists every violation found.
    pub fn validate(&self) -> KernelReport {
        let mut violations = Vec::new();
        let r = self.v_max as isize;

        for u in -r..=r {
            let value = self.at(u);
            if !(0.0..=1.0).contains(&value) {
                violations.push(KernelViolation::OutOfRange { u, value });
            }
        }
        for u in 1..=r {
            let (left, right) = (self.at(-u), self.at(u));
            if left != right {
                violations.push(KernelViolation::Asymmetric { u, left, right });
            }
        }
        for u in 0..r {
            let (value, next) = (self.at(u), self.at(u + 1));
            if value < next {
                violations.push(KernelViolation::IncreasingTail { u, value, next });
            }
        }
        let sum: f64 = self.mass.iter().sum();
        if !((sum - 1.0).abs() <= KERNEL_SUM_TOLERANCE) {
            violations.push(KernelViolation::NotNormalized { sum });
        }

        KernelReport { violations }
    }

    /// `F_mut(u) = sum_{v=1}^{v_max} f_mut(v - u)` for `u = 1..=v_max`: the
    /// fraction of a trait-`u` parent's offspring that lands inside the trait
    /// range.
    pub fn marginal(&self) -> Marginal {
        let r = self.v_max as isize;
        let values: Vec<f64> = (1..=r)
            .map(|u| (1..=r).map(|v| self.at(v - u)).sum())
            .collect();
        let sup = values.iter().copied().fold(0.0, f64::max);
        Marginal { values, sup }
    }
}

/// Result of [`MutationKernel::validate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelReport {
    pub violations: Vec<KernelViolation>,
}

impl KernelReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The in-range offspring fractions `F_mut(1..=v_max)` and their maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub values: Vec<f64>,
    pub sup: f64,
}

/// Per-generation death probability `f_mort(v)` for `v = 1..=v_max`.
///
/// Values must lie in `(0, 1]`. A value of exactly 1 (as in `f_mort(v) = 1/v`
/// at `v = 1`) is admitted; [`MortalityTable::certain_death_traits`] lists
/// such traits so callers can flag them.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityTable {
    values: Vec<f64>,
}

impl MortalityTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(ModelError::invalid("mortality", "table is empty"));
        }
        for (i, &m) in values.iter().enumerate() {
            if !(m > 0.0 && m <= 1.0) {
                return Err(ModelError::invalid(
                    "mortality",
                    format!("f_mort({}) = {m} is outside (0, 1]", i + 1),
                ));
            }
        }
        Ok(MortalityTable { values })
    }

    /// `f_mort(v) = 1 / v`: faster individuals die less often.
    pub fn inverse_trait(v_max: usize) -> Result<Self> {
        MortalityTable::new((1..=v_max).map(|v| 1.0 / v as f64).collect())
    }

    pub fn constant(v_max: usize, rate: f64) -> Result<Self> {
        MortalityTable::new(vec![rate; v_max])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `||1 - f_mort||_inf`, the best survival probability over all traits.
    pub fn survival_sup(&self) -> f64 {
        self.values.iter().map(|m| 1.0 - m).fold(0.0, f64::max)
    }

    /// Traits with `f_mort(v) = 1`.
    pub fn certain_death_traits(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == 1.0)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

/// Birth rate, capacity, mutation kernel and mortality of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct VerhulstParams {
    birth_rate: f64,
    capacity: f64,
    kernel: MutationKernel,
    mortality: MortalityTable,
}

pub const DEFAULT_V_MAX: usize = 25;
pub const DEFAULT_CAPACITY: f64 = 10_000.0;
pub const DEFAULT_BIRTH_RATE: f64 = 0.5;
pub const DEFAULT_INITIAL_SIZE: f64 = 100.0;

impl VerhulstParams {
    pub fn new(
        birth_rate: f64,
        capacity: f64,
        kernel: MutationKernel,
        mortality: MortalityTable,
    ) -> Result<Self> {
        if !(birth_rate > 0.0 && birth_rate.is_finite()) {
            return Err(ModelError::invalid("b", format!("{birth_rate} is not positive")));
        }
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(ModelError::invalid("K", format!("{capacity} is not positive")));
        }
        if mortality.len() != kernel.v_max() {
            return Err(ModelError::DimensionMismatch {
                expected: kernel.v_max(),
                actual: mortality.len(),
            });
        }
        let report = kernel.validate();
        if let Some(v) = report.violations.first() {
            return Err(ModelError::invalid("kernel", v.to_string()));
        }
        Ok(VerhulstParams {
            birth_rate,
            capacity,
            kernel,
            mortality,
        })
    }

    /// `v_max = 25`, `K = 10^4`, `b = 0.5`, nearest-neighbour kernel and
    /// `f_mort(v) = 1/v`.
    pub fn standard() -> Self {
        let kernel = MutationKernel::nearest_neighbour(DEFAULT_V_MAX).expect("valid kernel");
        let mortality = MortalityTable::inverse_trait(DEFAULT_V_MAX).expect("valid mortality");
        VerhulstParams::new(DEFAULT_BIRTH_RATE, DEFAULT_CAPACITY, kernel, mortality)
            .expect("valid defaults")
    }

    pub fn birth_rate(&self) -> f64 {
        self.birth_rate
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn v_max(&self) -> usize {
        self.kernel.v_max()
    }

    pub fn kernel(&self) -> &MutationKernel {
        &self.kernel
    }

    pub fn mortality(&self) -> &MortalityTable {
        &self.mortality
    }

    /// Left-hand side of the extinction condition,
    /// `||1 - f_mort||_inf + b * ||F_mut||_inf`.
    pub fn growth_factor(&self) -> f64 {
        self.mortality.survival_sup() + self.birth_rate * self.kernel.marginal().sup
    }
}

/// Head counts per trait, `counts[v - 1] = P(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationVector {
    counts: Vec<f64>,
}

impl PopulationVector {
    pub fn new(counts: Vec<f64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(ModelError::invalid("population", "no traits"));
        }
        if let Some((i, c)) = counts
            .iter()
            .enumerate()
            .find(|(_, c)| !(**c >= 0.0 && c.is_finite()))
        {
            return Err(ModelError::invalid(
                "population",
                format!("P({}) = {c} is not a finite non-negative count", i + 1),
            ));
        }
        Ok(PopulationVector { counts })
    }

    pub fn zeros(v_max: usize) -> Self {
        PopulationVector {
            counts: vec![0.0; v_max],
        }
    }

    /// `size` individuals, all with trait `trait_value` (1-based).
    pub fn concentrated(v_max: usize, trait_value: usize, size: f64) -> Result<Self> {
        if trait_value == 0 || trait_value > v_max {
            return Err(ModelError::invalid(
                "trait",
                format!("{trait_value} is outside 1..={v_max}"),
            ));
        }
        let mut counts = vec![0.0; v_max];
        counts[trait_value - 1] = size;
        PopulationVector::new(counts)
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn v_max(&self) -> usize {
        self.counts.len()
    }

    /// `P(v)` for 1-based `v`.
    pub fn get(&self, v: usize) -> f64 {
        self.counts[v - 1]
    }

    /// `||P||_1`, summed left to right.
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Population-weighted mean trait `(1/||P||_1) * sum v P(v)`.
    pub fn expected_velocity(&self) -> Result<f64> {
        let total = self.total();
        if total <= EMPTY_POPULATION {
            return Err(ModelError::EmptyPopulation);
        }
        let weighted: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * c)
            .sum();
        Ok(weighted / total)
    }
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(ModelError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Newborns per trait: `v -> b * sum_{u=1}^{v_max} P(u) f_mut(v - u)`.
///
/// Offspring whose trait would fall outside `1..=v_max` are dropped.
pub fn convolve_mutation(
    population: &PopulationVector,
    kernel: &MutationKernel,
    birth_rate: f64,
) -> Result<PopulationVector> {
    check_dims(kernel.v_max(), population.v_max())?;
    let r = kernel.v_max() as isize;
    let counts = (1..=r)
        .map(|v| {
            let inner: f64 = (1..=r)
                .map(|u| population.counts[(u - 1) as usize] * kernel.at(v - u))
                .sum();
            birth_rate * inner
        })
        .collect();
    Ok(PopulationVector { counts })
}

/// One generation of the unstructured model:
/// `(1 - m) P + b P (1 - P/K) 1[0,K](P)`.
pub fn scalar_step(population: f64, mortality: f64, birth_rate: f64, capacity: f64) -> f64 {
    let survivors = (1.0 - mortality) * population;
    if population <= capacity {
        survivors + birth_rate * population * (1.0 - population / capacity)
    } else {
        survivors
    }
}

/// Logistic damping `(1 - total/K)` on `[0, K]`, zero above `K`.
fn logistic_factor(total: f64, capacity: f64) -> f64 {
    if total <= capacity {
        1.0 - total / capacity
    } else {
        0.0
    }
}

/// One generation of the trait-structured model.
///
/// The logistic factor uses the total population, not the per-trait count.
pub fn population_step(
    population: &PopulationVector,
    params: &VerhulstParams,
) -> Result<PopulationVector> {
    check_dims(params.v_max(), population.v_max())?;
    let damping = logistic_factor(population.total(), params.capacity);
    let survivors = population
        .counts
        .iter()
        .zip(params.mortality.values())
        .map(|(p, m)| (1.0 - m) * p);

    if damping == 0.0 {
        return Ok(PopulationVector {
            counts: survivors.collect(),
        });
    }

    let births = convolve_mutation(population, &params.kernel, params.birth_rate)?;
    let counts = survivors
        .zip(&births.counts)
        .map(|(s, n)| s + n * damping)
        .collect();
    Ok(PopulationVector { counts })
}

/// The generations of one run with their totals and mean traits.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub generations: Vec<PopulationVector>,
    pub totals: Vec<f64>,
    /// `None` once the population is empty.
    pub expected_velocities: Vec<Option<f64>>,
}

impl SimulationTrace {
    fn with_capacity(n: usize) -> Self {
        SimulationTrace {
            generations: Vec::with_capacity(n),
            totals: Vec::with_capacity(n),
            expected_velocities: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, p: PopulationVector) {
        self.totals.push(p.total());
        self.expected_velocities.push(p.expected_velocity().ok());
        self.generations.push(p);
    }

    pub fn len(&self) -> usize {
        self.generations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generations.is_empty()
    }

    pub fn last(&self) -> &PopulationVector {
        self.generations.last().expect("trace holds the initial generation")
    }

    /// `P_n(v)` over all generations.
    pub fn section(&self, v: usize) -> Vec<f64> {
        self.generations.iter().map(|p| p.get(v)).collect()
    }
}

/// Runs `generations` steps from `initial`; the trace has `generations + 1`
/// entries. Zero generations yields the initial state alone.
pub fn simulate(
    initial: &PopulationVector,
    params: &VerhulstParams,
    generations: usize,
) -> Result<SimulationTrace> {
    check_dims(params.v_max(), initial.v_max())?;
    let mut trace = SimulationTrace::with_capacity(generations + 1);
    let mut current = initial.clone();
    for _ in 0..generations {
        let next = population_step(&current, params)?;
        trace.push(std::mem::replace(&mut current, next));
    }
    trace.push(current);
    Ok(trace)
}

/// Both readings of the population bound.
///
/// `bound` uses the survival supremum `||1 - f_mort||_inf`, the quantity the
/// boundedness argument actually controls. `literal_bound` substitutes
/// `||1 - f_mut||_2` as the bound is sometimes written; it is reported for
/// comparison only.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub survival_sup: f64,
    pub marginal_sup: f64,
    pub kernel_defect_l2: f64,
    pub bound: f64,
    pub literal_bound: f64,
    pub certain_death_traits: Vec<usize>,
}

fn bound_with(first: f64, params: &VerhulstParams, marginal_sup: f64, initial_total: f64) -> f64 {
    let b_f = params.birth_rate * marginal_sup;
    let peak = (first + b_f).powi(2) / (4.0 * b_f) * params.capacity;
    peak.max(params.capacity).max(initial_total)
}

pub fn bound_report(params: &VerhulstParams, initial: &PopulationVector) -> BoundReport {
    let marginal_sup = params.kernel.marginal().sup;
    let survival_sup = params.mortality.survival_sup();
    let kernel_defect_l2 = params
        .kernel
        .mass()
        .iter()
        .map(|f| (1.0 - f).powi(2))
        .sum::<f64>()
        .sqrt();
    let total = initial.total();
    BoundReport {
        survival_sup,
        marginal_sup,
        kernel_defect_l2,
        bound: bound_with(survival_sup, params, marginal_sup, total),
        literal_bound: bound_with(kernel_defect_l2, params, marginal_sup, total),
        certain_death_traits: params.mortality.certain_death_traits(),
    }
}

/// Upper bound on `||P_n||_1` over all generations:
/// `max((s + bF)^2 / (4bF) * K, K, ||P_0||_1)` with `s = ||1 - f_mort||_inf`
/// and `F = ||F_mut||_inf`.
pub fn upper_bound(params: &VerhulstParams, initial: &PopulationVector) -> f64 {
    bound_with(
        params.mortality.survival_sup(),
        params,
        params.kernel.marginal().sup,
        initial.total(),
    )
}

/// Sufficient condition for extinction: `||1 - f_mort||_inf + b ||F_mut||_inf <= 1`.
pub fn extinction_condition_holds(params: &VerhulstParams) -> bool {
    params.growth_factor() <= 1.0
}
