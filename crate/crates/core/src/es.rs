//! (μ,λ) and (μ+λ) evolution strategies over generator matrices.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code::{validate_instance, FitnessEvaluator, ProblemInstance};
use crate::error::{Error, Result};
use crate::gf2::{subspace_distance, GeneratorMatrix};
use crate::operators::{crossover, mutate};

/// Default generation budget.
pub const DEFAULT_GENERATIONS: u64 = 20_000;

/// Default spacing of diversity snapshots, in generations.
pub const DEFAULT_DIVERSITY_EVERY: u64 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Replacement {
    /// Offspring replace the whole population.
    Comma,
    /// The selected parents survive next to their offspring.
    Plus,
}

/// How truncation selection orders individuals of equal fitness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Uniformly random among equal fitness.
    Random,
    /// Parents carried over by plus replacement rank ahead of offspring of
    /// equal fitness; remaining ties are random. Identical to `Random` for
    /// comma replacement.
    #[default]
    PreferParents,
}

/// Replacement scheme plus the crossover switch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub replacement: Replacement,
    pub crossover: bool,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::new(Replacement::Comma, false),
        Variant::new(Replacement::Comma, true),
        Variant::new(Replacement::Plus, false),
        Variant::new(Replacement::Plus, true),
    ];

    pub const fn new(replacement: Replacement, crossover: bool) -> Self {
        Variant {
            replacement,
            crossover,
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.replacement, self.crossover) {
            (Replacement::Comma, false) => "comma",
            (Replacement::Comma, true) => "comma+xo",
            (Replacement::Plus, false) => "plus",
            (Replacement::Plus, true) => "plus+xo",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown variant {s:?}")))
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EsConfig {
    pub instance: ProblemInstance,
    pub lambda: usize,
    pub mu: usize,
    pub p_mut: f64,
    pub variant: Variant,
    pub max_generations: u64,
    pub seed: u64,
    pub tie_break: TieBreak,
    /// Snapshot spacing; `Some` also disables early stopping on success.
    pub diversity_every: Option<u64>,
}

impl EsConfig {
    /// `λ = n`, `μ = ⌊n/3⌋`, `p_mut = 1/n` and a 20 000 generation budget.
    pub fn with_defaults(instance: ProblemInstance, variant: Variant, seed: u64) -> Self {
        let n = instance.n;
        EsConfig {
            instance,
            lambda: n,
            mu: (n / 3).max(1),
            p_mut: 1.0 / n as f64,
            variant,
            max_generations: DEFAULT_GENERATIONS,
            seed,
            tie_break: TieBreak::default(),
            diversity_every: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_instance(&self.instance)?;
        if self.mu == 0 || self.mu > self.lambda {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= mu <= lambda, got mu = {}, lambda = {}",
                self.mu, self.lambda
            )));
        }
        if self.variant.replacement == Replacement::Plus && self.lambda == self.mu {
            return Err(Error::InvalidConfig(
                "plus replacement needs lambda > mu".into(),
            ));
        }
        if !(self.p_mut > 0.0 && self.p_mut <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "mutation probability {} outside (0, 1]",
                self.p_mut
            )));
        }
        if self.diversity_every == Some(0) {
            return Err(Error::InvalidConfig("diversity_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Individual {
    pub genotype: GeneratorMatrix,
    pub fitness: u64,
    /// 1-based ordinal of the evaluation that scored this genotype.
    pub birth_evaluation: u64,
}

#[derive(Clone, Debug)]
pub struct EsState {
    pub generation: u64,
    pub population: Vec<Individual>,
    pub evaluations: u64,
    pub best: Individual,
    /// Leading entries of `population` that are parents carried over by
    /// plus replacement.
    pub survivors: usize,
    /// Ordinal of the first evaluation that produced an optimal genotype.
    pub first_optimal: Option<u64>,
}

/// One diversity/convergence sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub generation: u64,
    pub best_fitness: u64,
    pub avg_fitness: f64,
    pub avg_pairwise_distance: f64,
    pub evaluations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub success: bool,
    pub evaluations_to_success: Option<u64>,
    pub generations_used: u64,
    pub evaluations: u64,
    pub best: Individual,
    pub trace: Vec<TracePoint>,
}

struct Scorer<'a> {
    eval: &'a mut FitnessEvaluator,
}

impl Scorer<'_> {
    fn score(&mut self, state_evals: &mut u64, first: &mut Option<u64>, g: GeneratorMatrix) -> Individual {
        let fitness = self
            .eval
            .evaluate(&g)
            .expect("genotype shape fixed by the instance");
        *state_evals += 1;
        if fitness == self.eval.optimum() && first.is_none() {
            *first = Some(*state_evals);
        }
        Individual {
            genotype: g,
            fitness,
            birth_evaluation: *state_evals,
        }
    }
}

fn better(a: &Individual, b: &Individual) -> bool {
    a.fitness > b.fitness
}

/// Random initial population of `λ` full-rank matrices.
pub fn initialize<R: Rng + ?Sized>(
    cfg: &EsConfig,
    eval: &mut FitnessEvaluator,
    rng: &mut R,
) -> Result<EsState> {
    cfg.validate()?;
    let ProblemInstance { n, k, .. } = cfg.instance;
    let mut scorer = Scorer { eval };
    let mut evaluations = 0;
    let mut first_optimal = None;
    let mut population = Vec::with_capacity(cfg.lambda);
    for _ in 0..cfg.lambda {
        let g = GeneratorMatrix::random(k, n, rng)?;
        population.push(scorer.score(&mut evaluations, &mut first_optimal, g));
    }
    let best = population
        .iter()
        .fold(&population[0], |b, x| if better(x, b) { x } else { b })
        .clone();
    Ok(EsState {
        generation: 0,
        population,
        evaluations,
        best,
        survivors: 0,
        first_optimal,
    })
}

/// The `mu` fittest individuals, best first. Ties are broken uniformly at
/// random.
pub fn select_truncation<R: Rng + ?Sized>(
    pop: &[Individual],
    mu: usize,
    rng: &mut R,
) -> Vec<Individual> {
    select_truncation_ranked(pop, mu, |_| 0, rng)
}

/// Truncation selection where ties in fitness are ordered by ascending
/// `priority(index)` and only then broken at random.
pub fn select_truncation_ranked<R: Rng + ?Sized>(
    pop: &[Individual],
    mu: usize,
    priority: impl Fn(usize) -> u8,
    rng: &mut R,
) -> Vec<Individual> {
    assert!(mu <= pop.len(), "cannot select {mu} of {}", pop.len());
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| {
        pop[b]
            .fitness
            .cmp(&pop[a].fitness)
            .then_with(|| priority(a).cmp(&priority(b)))
    });
    order.into_iter().take(mu).map(|i| pop[i].clone()).collect()
}

/// Offspring per parent, in parent rank order. The remainder of a
/// non-exact division goes one each to the best-ranked parents.
pub fn offspring_quota(lambda: usize, mu: usize, replacement: Replacement) -> Result<Vec<usize>> {
    if mu == 0 || mu > lambda {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= mu <= lambda, got mu = {mu}, lambda = {lambda}"
        )));
    }
    let target = match replacement {
        Replacement::Comma => lambda,
        Replacement::Plus if lambda == mu => {
            return Err(Error::InvalidConfig(
                "plus replacement with lambda = mu produces no offspring".into(),
            ))
        }
        Replacement::Plus => lambda - mu,
    };
    let (base, extra) = (target / mu, target % mu);
    Ok((0..mu).map(|i| base + usize::from(i < extra)).collect())
}

/// One generation: select, vary, evaluate and replace.
pub fn step<R: Rng + ?Sized>(
    state: &EsState,
    cfg: &EsConfig,
    eval: &mut FitnessEvaluator,
    rng: &mut R,
) -> Result<EsState> {
    let survivors = match cfg.tie_break {
        TieBreak::PreferParents => state.survivors,
        TieBreak::Random => 0,
    };
    let parents = select_truncation_ranked(
        &state.population,
        cfg.mu,
        |i| u8::from(i >= survivors),
        rng,
    );
    let quotas = offspring_quota(cfg.lambda, cfg.mu, cfg.variant.replacement)?;
    let mut evaluations = state.evaluations;
    let mut first_optimal = state.first_optimal;
    let mut scorer = Scorer { eval };
    let mut next = Vec::with_capacity(cfg.lambda);
    let plus = cfg.variant.replacement == Replacement::Plus;
    if plus {
        next.extend(parents.iter().cloned());
    }

    for (idx, (parent, &quota)) in parents.iter().zip(&quotas).enumerate() {
        for _ in 0..quota {
            let base = if cfg.variant.crossover {
                let mate = if cfg.mu > 1 {
                    let j = rng.gen_range(0..cfg.mu - 1);
                    &parents[if j >= idx { j + 1 } else { j }]
                } else {
                    parent
                };
                crossover(&parent.genotype, &mate.genotype, rng)?
            } else {
                parent.genotype.clone()
            };
            let child = mutate(&base, cfg.p_mut, rng);
            next.push(scorer.score(&mut evaluations, &mut first_optimal, child));
        }
    }
    debug_assert_eq!(next.len(), cfg.lambda);

    let mut best = state.best.clone();
    for ind in &next {
        if better(ind, &best) {
            best = ind.clone();
        }
    }
    Ok(EsState {
        generation: state.generation + 1,
        population: next,
        evaluations,
        best,
        survivors: if plus { cfg.mu } else { 0 },
        first_optimal,
    })
}

/// Mean fitness and mean pairwise subspace distance of a population.
pub fn diversity_snapshot(pop: &[Individual]) -> Result<(f64, f64)> {
    if pop.len() < 2 {
        return Err(Error::PopulationTooSmall);
    }
    let avg_fitness = pop.iter().map(|i| i.fitness as f64).sum::<f64>() / pop.len() as f64;
    let mut total = 0usize;
    let mut pairs = 0usize;
    for (i, a) in pop.iter().enumerate() {
        for b in &pop[i + 1..] {
            total += subspace_distance(&a.genotype, &b.genotype)?;
            pairs += 1;
        }
    }
    Ok((avg_fitness, total as f64 / pairs as f64))
}

fn trace_point(state: &EsState) -> Result<TracePoint> {
    let (avg_fitness, avg_pairwise_distance) = diversity_snapshot(&state.population)?;
    Ok(TracePoint {
        generation: state.generation,
        best_fitness: state.best.fitness,
        avg_fitness,
        avg_pairwise_distance,
        evaluations: state.evaluations,
    })
}

/// Runs one ES from a random population.
///
/// Stops at the first optimal genotype unless diversity tracing is on, in
/// which case the whole budget is used and a snapshot is taken every
/// `diversity_every` generations (generation 0 included).
pub fn run(cfg: &EsConfig) -> Result<RunResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut eval = FitnessEvaluator::new(cfg.instance)?;
    let optimum = eval.optimum();
    let mut state = initialize(cfg, &mut eval, &mut rng)?;
    let mut trace = Vec::new();
    let tracing = cfg.diversity_every;
    if tracing.is_some() && cfg.lambda >= 2 {
        trace.push(trace_point(&state)?);
    }
    while state.generation < cfg.max_generations {
        if tracing.is_none() && state.best.fitness == optimum {
            break;
        }
        state = step(&state, cfg, &mut eval, &mut rng)?;
        if let Some(every) = tracing {
            if cfg.lambda >= 2 && state.generation % every == 0 {
                trace.push(trace_point(&state)?);
            }
        }
    }
    Ok(RunResult {
        success: state.best.fitness == optimum,
        evaluations_to_success: state.first_optimal,
        generations_used: state.generation,
        evaluations: state.evaluations,
        best: state.best,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{min_distance_bruteforce, optimal_fitness};

    fn inst(n: usize, k: usize, d: usize) -> ProblemInstance {
        ProblemInstance::new(n, k, d).unwrap()
    }

    fn fake_pop(fits: &[u64]) -> Vec<Individual> {
        let g = GeneratorMatrix::from_strs(&["10", "01"]).unwrap();
        fits.iter()
            .enumerate()
            .map(|(i, &f)| Individual {
                genotype: g.clone(),
                fitness: f,
                birth_evaluation: i as u64 + 1,
            })
            .collect()
    }

    #[test]
    fn quotas() {
        use Replacement::*;
        assert_eq!(offspring_quota(12, 4, Comma).unwrap(), vec![3, 3, 3, 3]);
        assert_eq!(offspring_quota(13, 4, Comma).unwrap(), vec![4, 3, 3, 3]);
        assert_eq!(offspring_quota(12, 4, Plus).unwrap(), vec![2, 2, 2, 2]);
        assert_eq!(offspring_quota(16, 5, Plus).unwrap(), vec![3, 2, 2, 2, 2]);
        assert!(offspring_quota(4, 4, Plus).is_err());
        assert!(offspring_quota(4, 0, Comma).is_err());
    }

    #[test]
    fn truncation_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = fake_pop(&[5, 9, 1, 7, 3]);
        let sel = select_truncation(&pop, 5, &mut rng);
        assert_eq!(sel.len(), 5);
        let top: Vec<u64> = select_truncation(&pop, 2, &mut rng).iter().map(|i| i.fitness).collect();
        assert_eq!(top, vec![9, 7]);
    }

    #[test]
    fn truncation_ties_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (lambda, mu) = (8, 3);
        let pop = fake_pop(&[4; 8]);
        let trials = 10_000;
        let mut hits = vec![0usize; lambda];
        for _ in 0..trials {
            for ind in select_truncation(&pop, mu, &mut rng) {
                hits[ind.birth_evaluation as usize - 1] += 1;
            }
        }
        for h in hits {
            let freq = h as f64 / trials as f64;
            assert!((freq - mu as f64 / lambda as f64).abs() < 0.02, "{freq}");
        }
    }

    #[test]
    fn zero_budget_returns_initial_best() {
        let mut cfg = EsConfig::with_defaults(inst(12, 6, 4), Variant::ALL[0], 9);
        cfg.max_generations = 0;
        let r = run(&cfg).unwrap();
        assert_eq!(r.evaluations, 12);
        assert_eq!(r.generations_used, 0);
    }

    #[test]
    fn repetition_code_found_by_every_variant() {
        for v in Variant::ALL {
            let mut cfg = EsConfig::with_defaults(inst(3, 1, 3), v, 1);
            cfg.max_generations = 500;
            let r = run(&cfg).unwrap();
            assert!(r.success, "{v}");
            assert_eq!(r.best.genotype.rows(), &[0b111]);
        }
    }

    #[test]
    fn evaluation_accounting() {
        for v in Variant::ALL {
            let cfg = EsConfig {
                max_generations: 100,
                diversity_every: Some(25),
                ..EsConfig::with_defaults(inst(10, 5, 4), v, 4)
            };
            let per_gen = match v.replacement {
                Replacement::Comma => cfg.lambda,
                Replacement::Plus => cfg.lambda - cfg.mu,
            } as u64;
            let r = run(&cfg).unwrap();
            assert_eq!(r.generations_used, 100);
            assert_eq!(r.evaluations, cfg.lambda as u64 + 100 * per_gen);
            assert_eq!(r.trace.len(), 5);
            for p in &r.trace {
                assert_eq!(p.evaluations, cfg.lambda as u64 + p.generation * per_gen);
            }
        }
    }

    #[test]
    fn plus_keeps_population_best_monotone_and_comma_copies_parents() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let i = inst(12, 6, 4);
        let mut eval = FitnessEvaluator::new(i).unwrap();
        let cfg = EsConfig::with_defaults(i, Variant::new(Replacement::Plus, true), 0);
        let mut state = initialize(&cfg, &mut eval, &mut rng).unwrap();
        let mut prev = state.population.iter().map(|x| x.fitness).max().unwrap();
        for _ in 0..300 {
            state = step(&state, &cfg, &mut eval, &mut rng).unwrap();
            assert_eq!(state.population.len(), cfg.lambda);
            let cur = state.population.iter().map(|x| x.fitness).max().unwrap();
            assert!(cur >= prev);
            assert!(state.population.iter().all(|x| x.genotype.matrix().rank() == 6));
            prev = cur;
        }

        // p_mut small enough that no row ever triggers within one step
        let cfg = EsConfig {
            p_mut: 1e-300,
            ..EsConfig::with_defaults(i, Variant::ALL[0], 0)
        };
        let state = initialize(&cfg, &mut eval, &mut rng).unwrap();
        let next = step(&state, &cfg, &mut eval, &mut rng).unwrap();
        let parents = select_truncation(&state.population, cfg.mu, &mut rng);
        let mut got: Vec<u64> = next.population.iter().map(|x| x.fitness).collect();
        let mut want: Vec<u64> = parents
            .iter()
            .zip(offspring_quota(cfg.lambda, cfg.mu, Replacement::Comma).unwrap())
            .flat_map(|(p, q)| std::iter::repeat_n(p.fitness, q))
            .collect();
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn deterministic_and_verified() {
        let cfg = EsConfig::with_defaults(inst(12, 6, 4), Variant::ALL[1], 77);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.success);
        assert_eq!(a.best.fitness, optimal_fitness(&cfg.instance));
        assert!(min_distance_bruteforce(&a.best.genotype.span()).unwrap() >= 4);
        assert_eq!(a.evaluations_to_success, Some(a.best.birth_evaluation));
    }

    #[test]
    fn diversity_snapshot_cases() {
        let pop = fake_pop(&[1, 3, 5]);
        let (f, d) = diversity_snapshot(&pop).unwrap();
        assert_eq!((f, d), (3.0, 0.0));
        let a = GeneratorMatrix::from_strs(&["100"]).unwrap();
        let b = GeneratorMatrix::from_strs(&["010"]).unwrap();
        let two = vec![
            Individual { genotype: a, fitness: 1, birth_evaluation: 1 },
            Individual { genotype: b, fitness: 1, birth_evaluation: 2 },
        ];
        assert_eq!(diversity_snapshot(&two).unwrap().1, 2.0);
        assert_eq!(diversity_snapshot(&pop[..1]), Err(Error::PopulationTooSmall));
    }

    #[test]
    fn config_validation() {
        let base = EsConfig::with_defaults(inst(12, 6, 4), Variant::ALL[2], 0);
        assert!(base.validate().is_ok());
        assert!(EsConfig { mu: 13, ..base.clone() }.validate().is_err());
        assert!(EsConfig { mu: 12, ..base.clone() }.validate().is_err());
        assert!(EsConfig { p_mut: 0.0, ..base.clone() }.validate().is_err());
        assert!(EsConfig {
            instance: ProblemInstance { n: 10, k: 5, d: 7 },
            ..base
        }
        .validate()
        .is_err());
    }
}
