use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::algebra::{corpus_loss, CollageError, CollageTemplate, DistanceKind};
use super::raster::{mask_hausdorff, mask_sym_diff, rasterize, RasterMask};
use crate::algebra::{Example, Payload};
use crate::term::Term;

/// Descent settings. `step` is the initial step length along the
/// normalised negative gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub step: f64,
    pub max_iters: usize,
    pub fd_epsilon: f64,
    pub min_fd_epsilon: f64,
    pub tolerance: f64,
    pub max_halvings: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            step: 0.02,
            max_iters: 500,
            fd_epsilon: 0.04,
            min_fd_epsilon: 1e-4,
            tolerance: 1e-4,
            max_halvings: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Loss at the start and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn final_loss(&self) -> f64 {
        *self.trace.last().expect("trace holds the initial loss")
    }
}

/// Examples of the form `(delta[x, t], {target})` with the target
/// rasterized once.
struct Prepared {
    terms: Vec<Term>,
    targets: Vec<RasterMask>,
}

fn prepare(template: &CollageTemplate, corpus: &[Example]) -> Option<Prepared> {
    let d = template.distance();
    let mut terms = Vec::with_capacity(corpus.len());
    let mut targets = Vec::with_capacity(corpus.len());
    for ex in corpus {
        let Term::Apply { op, args } = &ex.term else { return None };
        if op != "delta" || args.len() != 2 || ex.objects.len() != 1 || !args[1].is_ground() {
            return None;
        }
        let Term::Var(_) = &args[0] else { return None };
        let Payload::Picture(p) = &ex.objects[0].1.payload else { return None };
        terms.push(args[1].clone());
        targets.push(rasterize(p, d.viewport, d.grid));
    }
    Some(Prepared { terms, targets })
}

fn fast_loss(template: &CollageTemplate, prep: &Prepared, params: &[f64]) -> Result<f64, CollageError> {
    let inst = template.instantiate(params)?;
    let d = template.distance();
    let mut sum = 0.0;
    for (t, target) in prep.terms.iter().zip(&prep.targets) {
        let Payload::Picture(p) = inst.eval_closed(t)?.payload else { return Err(CollageError::NotAPicture) };
        let m = rasterize(&p, d.viewport, d.grid);
        sum += match d.kind {
            DistanceKind::SymDiff => mask_sym_diff(target, &m).expect("same grid"),
            DistanceKind::Hausdorff => mask_hausdorff(target, &m).unwrap_or(f64::INFINITY),
        };
    }
    Ok(sum / prep.terms.len() as f64)
}

/// Gradient descent on [`corpus_loss`] with central finite differences and
/// a step-halving line search, in coordinates where each translation is
/// taken at the centre of the unit square. When the line search fails, the
/// best improving difference probe is taken as a coordinate step; when no
/// probe improves, the difference width is halved. The run ends once the
/// width falls below `min_fd_epsilon`, the loss drops below `tolerance`, or
/// `max_iters` is reached.
pub fn fit_transforms(
    template: &CollageTemplate,
    corpus: &[Example],
    init: &[f64],
    cfg: &FitConfig,
) -> Result<FitResult, CollageError> {
    if corpus.is_empty() {
        return Err(CollageError::EmptyCorpus);
    }
    if init.len() != template.param_count() {
        return Err(CollageError::ParameterLength { expected: template.param_count(), found: init.len() });
    }
    let prep = prepare(template, corpus);
    let loss = |z: &[f64]| -> Result<f64, CollageError> {
        let p = uncentred(z);
        let l = match &prep {
            Some(prep) => fast_loss(template, prep, &p)?,
            None => corpus_loss(template, &p, corpus)?,
        };
        if l.is_finite() {
            Ok(l)
        } else {
            Err(CollageError::NonFiniteLoss)
        }
    };

    let mut x = centred(init);
    let mut fx = loss(&x)?;
    let mut trace = vec![fx];
    let mut eps = cfg.fd_epsilon;
    let mut step = cfg.step;
    let mut iterations = 0;
    let mut grad = vec![0.0; x.len()];
    let mut probes = vec![(0.0, 0.0); x.len()];
    while iterations < cfg.max_iters && fx >= cfg.tolerance && eps >= cfg.min_fd_epsilon {
        iterations += 1;
        let mut probe = x.clone();
        for i in 0..x.len() {
            probe[i] = x[i] + eps;
            let up = loss(&probe)?;
            probe[i] = x[i] - eps;
            let down = loss(&probe)?;
            probe[i] = x[i];
            grad[i] = (up - down) / (2.0 * eps);
            probes[i] = (up, down);
        }
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let mut accepted = false;
        if norm > 0.0 {
            let mut t = step;
            for _ in 0..=cfg.max_halvings {
                let cand: Vec<f64> = x.iter().zip(&grad).map(|(xi, g)| xi - t * g / norm).collect();
                let fc = loss(&cand)?;
                if fc < fx {
                    x = cand;
                    fx = fc;
                    accepted = true;
                    break;
                }
                t /= 2.0;
            }
            if accepted {
                step = (2.0 * t).min(cfg.step);
            }
        }
        if !accepted {
            // Compass move: the best single-coordinate probe, if it improves.
            let mut best: Option<(f64, usize, f64)> = None;
            for (i, &(up, down)) in probes.iter().enumerate() {
                for (fc, d) in [(up, eps), (down, -eps)] {
                    if fc < best.map_or(fx, |b| b.0) {
                        best = Some((fc, i, d));
                    }
                }
            }
            match best {
                Some((fc, i, d)) => {
                    x[i] += d;
                    fx = fc;
                    accepted = true;
                }
                None => eps /= 2.0,
            }
        }
        if accepted {
            trace.push(fx);
        }
    }
    Ok(FitResult { params: uncentred(&x), trace, iterations, converged: fx < cfg.tolerance })
}

/// Replaces each translation `b` by the image `M·(½,½) + b` of the centre
/// of the unit square, which decouples it from the linear part.
fn centred(p: &[f64]) -> Vec<f64> {
    let mut z = p.to_vec();
    for t in z.chunks_mut(6) {
        t[4] += 0.5 * (t[0] + t[1]);
        t[5] += 0.5 * (t[2] + t[3]);
    }
    z
}

fn uncentred(z: &[f64]) -> Vec<f64> {
    let mut p = z.to_vec();
    for t in p.chunks_mut(6) {
        t[4] -= 0.5 * (t[0] + t[1]);
        t[5] -= 0.5 * (t[2] + t[3]);
    }
    p
}

/// `params` with independent uniform offsets in `[-amplitude, amplitude]`.
pub fn perturb(params: &[f64], amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = amplitude.abs();
    params.iter().map(|p| if a > 0.0 { p + rng.random_range(-a..=a) } else { *p }).collect()
}
