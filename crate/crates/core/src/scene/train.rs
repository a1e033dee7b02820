use super::ground::{best_assignment, corpus_objective_capped, score_table, Formula, SceneExample};
use super::model::PredicateSet;
use super::SceneError;
use crate::algebra::DEFAULT_GROUNDING_CAP;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Restart `r > 0` starts from `PredicateSet::random(n, dim,
    /// init_scale, seed + r)`; the descent itself draws no randomness.
    pub seed: u64,
    pub grounding_cap: usize,
    pub regrounding_period: usize,
    /// Number of descents; the first starts from the given models and the
    /// one with the highest final objective is kept.
    pub restarts: usize,
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 20.0,
            epochs: 500,
            seed: 0,
            grounding_cap: DEFAULT_GROUNDING_CAP,
            regrounding_period: 1,
            restarts: 32,
            init_scale: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainResult {
    pub models: PredicateSet,
    /// Corpus objective before training and after every epoch of the kept
    /// descent.
    pub trace: Vec<f64>,
    /// Index of the kept descent.
    pub restart: usize,
}

impl TrainResult {
    pub fn final_objective(&self) -> f64 {
        *self.trace.last().expect("trace holds the initial objective")
    }
}

/// A corpus compiled against a predicate set.
pub struct Compiled<'a> {
    corpus: &'a [SceneExample],
    formulas: Vec<Formula>,
    arity: Vec<usize>,
}

impl<'a> Compiled<'a> {
    pub fn new(models: &PredicateSet, corpus: &'a [SceneExample]) -> Result<Self, SceneError> {
        let mut formulas = Vec::with_capacity(corpus.len());
        let mut arity = Vec::with_capacity(corpus.len());
        for (index, ex) in corpus.iter().enumerate() {
            let wrap = |e| SceneError::InExample { index, source: Box::new(e) };
            if let (Some(a), Some(b)) = (models.dim(), ex.scene.dim()) {
                if a != b {
                    return Err(wrap(SceneError::DimensionMismatch { expected: a, found: b }));
                }
            }
            let vars = ex.variables();
            formulas.push(Formula::compile(&ex.formula, models, &vars).map_err(wrap)?);
            arity.push(vars.len());
        }
        Ok(Compiled { corpus, formulas, arity })
    }

    pub fn len(&self) -> usize {
        self.corpus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corpus.is_empty()
    }

    /// Best assignment (object indices) of every example.
    pub fn groundings(&self, models: &PredicateSet, cap: usize) -> Result<Vec<Vec<usize>>, SceneError> {
        self.corpus
            .iter()
            .zip(&self.formulas)
            .zip(&self.arity)
            .enumerate()
            .map(|(index, ((ex, f), &k))| {
                best_assignment(f, k, &ex.scene, &score_table(models, &ex.scene), cap)
                    .map(|(_, a)| a)
                    .map_err(|e| SceneError::InExample { index, source: Box::new(e) })
            })
            .collect()
    }

    /// Mean of `1 − value` with each example grounded by `groundings`.
    pub fn frozen_loss(&self, models: &PredicateSet, groundings: &[Vec<usize>]) -> f64 {
        let sum: f64 = self
            .corpus
            .iter()
            .zip(&self.formulas)
            .zip(groundings)
            .map(|((ex, f), a)| 1.0 - f.eval(&score_table(models, &ex.scene), a))
            .sum();
        sum / self.corpus.len() as f64
    }

    /// Gradient of [`Compiled::frozen_loss`] in the layout of
    /// [`PredicateSet::flat_params`].
    pub fn frozen_gradient(&self, models: &PredicateSet, groundings: &[Vec<usize>]) -> Vec<f64> {
        let dim = models.dim().unwrap_or(0);
        let per = dim + 1;
        let mut grad = vec![0.0; per * models.len()];
        let scale = -1.0 / self.corpus.len() as f64;
        for ((ex, f), a) in self.corpus.iter().zip(&self.formulas).zip(groundings) {
            let scores = score_table(models, &ex.scene);
            let mut ds = vec![vec![0.0; ex.scene.len()]; models.len()];
            f.backprop(&scores, a, scale, &mut ds);
            for (p, row) in ds.iter().enumerate() {
                for (o, &d) in row.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let s = scores[p][o];
                    let dz = d * s * (1.0 - s);
                    let x = &ex.scene.objects()[o].1;
                    let g = &mut grad[p * per..(p + 1) * per];
                    for (gi, xi) in g[..dim].iter_mut().zip(x) {
                        *gi += dz * xi;
                    }
                    g[dim] += dz;
                }
            }
        }
        grad
    }
}

/// Alternates between regrounding every example with the current models
/// (every `regrounding_period` epochs) and one full-batch gradient step on
/// the frozen-grounding loss.
pub fn train(init: &PredicateSet, corpus: &[SceneExample], cfg: &TrainConfig) -> Result<TrainResult, SceneError> {
    if corpus.is_empty() {
        return Err(SceneError::EmptyCorpus);
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) || cfg.regrounding_period == 0 {
        return Err(SceneError::Invalid("learning rate and regrounding period must be positive".into()));
    }
    if cfg.restarts == 0 || !(cfg.init_scale >= 0.0 && cfg.init_scale.is_finite()) {
        return Err(SceneError::Invalid("restarts must be positive and the init scale finite".into()));
    }
    let compiled = Compiled::new(init, corpus)?;
    let mut best: Option<TrainResult> = None;
    for r in 0..cfg.restarts {
        let start = if r == 0 {
            init.clone()
        } else {
            let fresh = PredicateSet::random(init.len(), init.dim().unwrap_or(0), cfg.init_scale, cfg.seed.wrapping_add(r as u64));
            PredicateSet::new(init.names().to_vec(), fresh.models().to_vec())?
        };
        let mut run = descend(&compiled, start, corpus, cfg)?;
        run.restart = r;
        if best.as_ref().is_none_or(|b| run.final_objective() > b.final_objective()) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one descent"))
}

fn descend(
    compiled: &Compiled<'_>,
    mut models: PredicateSet,
    corpus: &[SceneExample],
    cfg: &TrainConfig,
) -> Result<TrainResult, SceneError> {
    let objective = |m: &PredicateSet| -> Result<f64, SceneError> {
        let v = corpus_objective_capped(m, corpus, cfg.grounding_cap)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(SceneError::NonFiniteLoss)
        }
    };
    let mut params = models.flat_params();
    let mut trace = vec![objective(&models)?];
    let mut groundings = Vec::new();
    for epoch in 0..cfg.epochs {
        if epoch % cfg.regrounding_period == 0 {
            groundings = compiled.groundings(&models, cfg.grounding_cap)?;
        }
        let grad = compiled.frozen_gradient(&models, &groundings);
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= cfg.learning_rate * g;
        }
        if !params.iter().all(|p| p.is_finite()) {
            return Err(SceneError::NonFiniteLoss);
        }
        models = models.with_flat_params(&params)?;
        trace.push(objective(&models)?);
    }
    Ok(TrainResult { models, trace, restart: 0 })
}
