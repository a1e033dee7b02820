use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::fuzzy::Connective;
use super::SceneError;

/// Logistic linear scorer `σ(w·o + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PredicateModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl PredicateModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Self {
        PredicateModel { weights, bias }
    }

    pub fn zeros(dim: usize) -> Self {
        PredicateModel { weights: vec![0.0; dim], bias: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn logit(&self, o: &[f64]) -> f64 {
        self.weights.iter().zip(o).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    pub fn score(&self, o: &[f64]) -> f64 {
        logistic(self.logit(o)).clamp(0.0, 1.0)
    }

    /// Weights followed by the bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.push(self.bias);
        p
    }

    pub fn from_params(p: &[f64]) -> Self {
        let (w, b) = p.split_at(p.len() - 1);
        PredicateModel { weights: w.to_vec(), bias: b[0] }
    }
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Named predicate models of one common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PredicateSet {
    names: Vec<String>,
    models: Vec<PredicateModel>,
}

impl PredicateSet {
    pub fn new(names: Vec<String>, models: Vec<PredicateModel>) -> Result<Self, SceneError> {
        if names.len() != models.len() {
            return Err(SceneError::Invalid(format!("{} names for {} models", names.len(), models.len())));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(SceneError::Invalid(format!("duplicate predicate `{n}`")));
            }
            if Connective::from_name(n).is_some() {
                return Err(SceneError::Invalid(format!("predicate `{n}` clashes with a connective")));
            }
        }
        if let Some(first) = models.first() {
            for m in &models {
                if m.dim() != first.dim() {
                    return Err(SceneError::DimensionMismatch { expected: first.dim(), found: m.dim() });
                }
                if !m.params().iter().all(|v| v.is_finite()) {
                    return Err(SceneError::Invalid("non-finite model parameter".into()));
                }
            }
        }
        Ok(PredicateSet { names, models })
    }

    /// Models named `p1`, `p2`, ….
    pub fn numbered(models: Vec<PredicateModel>) -> Result<Self, SceneError> {
        let names = (1..=models.len()).map(|i| format!("p{i}")).collect();
        Self::new(names, models)
    }

    /// `n` numbered models with weights drawn from `N(0, scale²)` and zero
    /// bias.
    pub fn random(n: usize, dim: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, scale.abs()).expect("finite scale");
        let models = (0..n)
            .map(|_| PredicateModel::new((0..dim).map(|_| normal.sample(&mut rng)).collect(), 0.0))
            .collect();
        Self::numbered(models).expect("numbered names are valid")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn models(&self) -> &[PredicateModel] {
        &self.models
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.models.first().map(PredicateModel::dim)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<&PredicateModel> {
        self.index_of(name).map(|i| &self.models[i])
    }

    /// All parameters, predicate by predicate.
    pub fn flat_params(&self) -> Vec<f64> {
        self.models.iter().flat_map(PredicateModel::params).collect()
    }

    pub fn with_flat_params(&self, p: &[f64]) -> Result<Self, SceneError> {
        let per = self.dim().unwrap_or(0) + 1;
        if p.len() != per * self.len() {
            return Err(SceneError::Invalid(format!("expected {} parameters, found {}", per * self.len(), p.len())));
        }
        let models = p.chunks(per).map(PredicateModel::from_params).collect();
        Ok(PredicateSet { names: self.names.clone(), models })
    }

    /// The same models in a different order; `order[i]` is the old index of
    /// the new `i`-th model. Names stay in place.
    pub fn permuted(&self, order: &[usize]) -> Self {
        PredicateSet { names: self.names.clone(), models: order.iter().map(|&i| self.models[i].clone()).collect() }
    }
}
