use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::ground::{best_assignment, Attribute, Attributes, Formula, Scene, SceneExample, OBJ, TRUTH};
use super::model::{PredicateModel, PredicateSet};
use super::SceneError;
use crate::algebra::ObjectId;
use crate::grammar::{rtg_generate, GenerationMode, RegularTreeGrammar};
use crate::term::{Alphabet, Term, TypedSymbol};

/// Minimal value under the ground-truth semantics for a formula to be kept.
pub const FAITHFUL_THRESHOLD: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub struct SceneGenConfig {
    pub num_scenes: usize,
    pub min_objects: usize,
    pub max_objects: usize,
    pub noise_sigma: f64,
    pub dimension: usize,
    /// Derivation layers after which the grammar only closes off.
    pub formula_depth: usize,
    /// Variables `x1 … xk` available to formulas.
    pub max_variables: usize,
    /// The attribute each predicate `p1, p2, …` denotes.
    pub denotations: Vec<Attribute>,
    pub seed: u64,
}

impl Default for SceneGenConfig {
    fn default() -> Self {
        SceneGenConfig {
            num_scenes: 200,
            min_objects: 1,
            max_objects: 3,
            noise_sigma: 0.05,
            dimension: 16,
            formula_depth: 6,
            max_variables: 3,
            denotations: ["cube", "red", "large", "metal"]
                .iter()
                .map(|n| Attribute::from_name(n).expect("known attribute"))
                .collect(),
            seed: 0,
        }
    }
}

impl SceneGenConfig {
    pub fn predicate_names(&self) -> Vec<String> {
        (1..=self.denotations.len()).map(|i| format!("p{i}")).collect()
    }
}

/// Models that score 1 exactly on objects carrying their attribute, read
/// off noise-free one-hot features.
pub fn truth_predicates(denotations: &[Attribute], dimension: usize) -> PredicateSet {
    PredicateSet::numbered(
        denotations
            .iter()
            .map(|a| {
                let mut w = vec![0.0; dimension];
                w[a.0] = 1.0;
                PredicateModel::new(w, 0.0)
            })
            .collect(),
    )
    .expect("numbered names")
}

/// Formula grammar: conjunctions of clauses over literals,
///
/// ```text
/// F → and[F,F] | C        C → L | or[L,L] | implies[L,L]
/// L → P | not[P]          P → pᵢ[V]          V → xⱼ
/// ```
///
/// Variables are generated as α-constants and renamed after derivation.
pub fn formula_grammar(predicates: &[String], variables: usize) -> RegularTreeGrammar {
    let mut terminals = vec![
        TypedSymbol::new("and", &[TRUTH, TRUTH], TRUTH),
        TypedSymbol::new("or", &[TRUTH, TRUTH], TRUTH),
        TypedSymbol::new("implies", &[TRUTH, TRUTH], TRUTH),
        TypedSymbol::new("not", &[TRUTH], TRUTH),
    ];
    terminals.extend(predicates.iter().map(|p| TypedSymbol::new(p, &[OBJ], TRUTH)));
    terminals.extend((1..=variables).map(|j| TypedSymbol::constant(&format!("x{j}"), OBJ)));
    let nt = |n: &str| Term::constant(n);
    let mut rules = vec![
        ("F", Term::apply("and", vec![nt("F"), nt("F")])),
        ("F", nt("C")),
        ("C", nt("L")),
        ("C", Term::apply("or", vec![nt("L"), nt("L")])),
        ("C", Term::apply("implies", vec![nt("L"), nt("L")])),
        ("L", nt("P")),
        ("L", Term::apply("not", vec![nt("P")])),
    ];
    rules.extend(predicates.iter().map(|p| ("P", Term::apply(p, vec![nt("V")]))));
    let names: Vec<String> = (1..=variables).map(|j| format!("x{j}")).collect();
    rules.extend(names.iter().map(|x| ("V", Term::constant(x))));
    RegularTreeGrammar::from_parts(
        Alphabet::from_symbols(terminals).expect("distinct names"),
        &[("F", TRUTH), ("C", TRUTH), ("L", TRUTH), ("P", TRUTH), ("V", OBJ)],
        rules,
        "F",
    )
    .expect("well-formed grammar")
}

fn to_variables(t: &Term, object_position: bool) -> Term {
    match t {
        Term::Apply { op, args } if args.is_empty() && object_position => Term::var(op),
        Term::Apply { op, args } => {
            let is_pred = !matches!(op.as_str(), "and" | "or" | "implies" | "not");
            Term::apply(op, args.iter().map(|a| to_variables(a, is_pred)).collect())
        }
        Term::Var(_) => t.clone(),
    }
}

/// Crisp value of the formula with every predicate reading the scene's
/// ground truth.
pub fn truth_value(ex: &SceneExample, predicates: &PredicateSet, denotations: &[Attribute]) -> Result<f64, SceneError> {
    let truth = ex.scene.truth().ok_or(SceneError::MissingTruth)?;
    let vars = ex.variables();
    let f = Formula::compile(&ex.formula, predicates, &vars)?;
    let scores: Vec<Vec<f64>> =
        denotations.iter().map(|a| truth.iter().map(|t| if t.has(*a) { 1.0 } else { 0.0 }).collect()).collect();
    Ok(best_assignment(&f, vars.len(), &ex.scene, &scores, usize::MAX)?.0)
}

fn random_attributes(rng: &mut ChaCha8Rng) -> Attributes {
    let [s, c, z, m] = Attributes::block_sizes();
    Attributes {
        shape: rng.random_range(0..s),
        color: rng.random_range(0..c),
        size: rng.random_range(0..z),
        material: rng.random_range(0..m),
    }
}

pub fn random_scene(cfg: &SceneGenConfig, rng: &mut ChaCha8Rng) -> Result<Scene, SceneError> {
    let normal = Normal::new(0.0, cfg.noise_sigma).map_err(|e| SceneError::Invalid(e.to_string()))?;
    let n = rng.random_range(cfg.min_objects..=cfg.max_objects);
    let truth: Vec<Attributes> = (0..n).map(|_| random_attributes(rng)).collect();
    let objects = truth
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut v = vec![0.0; cfg.dimension];
            v[..15].copy_from_slice(&t.one_hot());
            if cfg.noise_sigma > 0.0 {
                for x in &mut v {
                    *x += normal.sample(rng);
                }
            }
            (ObjectId(i), v)
        })
        .collect();
    Scene::new(objects, Some(truth))
}

/// Random scenes paired with random formulas that some injective grounding
/// makes true under the ground truth. Fails with `GenerationStalled` once
/// more than 99% of the drawn (scene, formula) pairs have been rejected.
pub fn generate_scene_corpus(cfg: &SceneGenConfig) -> Result<Vec<SceneExample>, SceneError> {
    generate_filtered(cfg, |v| v >= FAITHFUL_THRESHOLD)
}

fn generate_filtered(cfg: &SceneGenConfig, keep: impl Fn(f64) -> bool) -> Result<Vec<SceneExample>, SceneError> {
    if cfg.dimension < 15 {
        return Err(SceneError::Invalid(format!("dimension {} is below the 15 attribute features", cfg.dimension)));
    }
    if cfg.min_objects == 0 || cfg.min_objects > cfg.max_objects {
        return Err(SceneError::Invalid("object range must be nonempty and start at 1 or more".into()));
    }
    if !(cfg.noise_sigma >= 0.0 && cfg.noise_sigma.is_finite()) {
        return Err(SceneError::Invalid("noise sigma must be a finite nonnegative number".into()));
    }
    if cfg.denotations.is_empty() || cfg.max_variables == 0 || cfg.formula_depth == 0 {
        return Err(SceneError::Invalid("need at least one predicate, variable and derivation layer".into()));
    }
    let names = cfg.predicate_names();
    let grammar = formula_grammar(&names, cfg.max_variables);
    let predicates = truth_predicates(&cfg.denotations, cfg.dimension);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.num_scenes);
    let budget = cfg.num_scenes.max(1).saturating_mul(100);
    let mut attempts = 0usize;
    while out.len() < cfg.num_scenes {
        if attempts >= budget {
            return Err(SceneError::GenerationStalled { accepted: out.len(), attempts });
        }
        attempts += 1;
        let scene = random_scene(cfg, &mut rng)?;
        let seed = rng.random();
        let raw = rtg_generate(&grammar, GenerationMode::Random { count: 1, seed, cutoff: cfg.formula_depth })
            .map_err(|e| SceneError::Invalid(e.to_string()))?;
        let ex = SceneExample::new(to_variables(&raw[0], false), scene);
        match truth_value(&ex, &predicates, &cfg.denotations) {
            Ok(v) if keep(v) => out.push(ex),
            Ok(_) | Err(SceneError::NoGrounding) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Accuracy of each predicate, thresholded at 0.5, against the attribute it
/// is matched with; the matching of predicates to `denotations` maximises
/// the mean accuracy, the first such matching in lexicographic order
/// winning ties.
pub fn evaluate_predicates(
    models: &PredicateSet,
    corpus: &[SceneExample],
    denotations: &[Attribute],
) -> Result<Vec<f64>, SceneError> {
    if models.len() != denotations.len() {
        return Err(SceneError::Invalid(format!(
            "{} predicates for {} attributes",
            models.len(),
            denotations.len()
        )));
    }
    if models.len() > 9 {
        return Err(SceneError::Invalid("matching search supports at most 9 predicates".into()));
    }
    let n = models.len();
    let mut hits = vec![vec![0usize; n]; n];
    let mut total = 0usize;
    for ex in corpus {
        let truth = ex.scene.truth().ok_or(SceneError::MissingTruth)?;
        for ((_, o), t) in ex.scene.objects().iter().zip(truth) {
            total += 1;
            for (i, m) in models.models().iter().enumerate() {
                let said = m.score(o) >= 0.5;
                for (j, a) in denotations.iter().enumerate() {
                    if said == t.has(*a) {
                        hits[i][j] += 1;
                    }
                }
            }
        }
    }
    if total == 0 {
        return Err(SceneError::EmptyCorpus);
    }
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let score: usize = (0..n).map(|i| hits[i][perm[i]]).sum();
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let (_, perm) = best.expect("one permutation");
    Ok((0..n).map(|i| hits[i][perm[i]] as f64 / total as f64).collect())
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else { return false };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}
