use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use templar_core::algebra::{EvalError, Payload, DEFAULT_GROUNDING_CAP};
use templar_core::collage::{
    eval_picture_term, export_png_mask, fit_transforms, perturb, rasterize, reference_algebra, svg_string,
    CollageError, CollageOp, CollageTemplate, DistanceConfig, FitConfig, Grid, DEFAULT_VIEWPORT,
};
use templar_core::dfa::{admissible_instance, check_sufficient, generate_sufficient, infer, InferError};
use templar_core::io::{
    parse_dfa, parse_models, parse_params, parse_term, read_corpus, read_text, write_atomic,
    write_corpus_text, write_dfa, write_models, write_params, write_picture, Corpus, FormatError, SceneCorpus,
};
use templar_core::scene::{
    evaluate_predicates, generate_scene_corpus, ground_best, scene_algebra, train, Attribute, PredicateSet,
    SceneError, SceneGenConfig, TrainConfig,
};
use templar_core::{Term, VariableContext};

#[derive(Parser)]
#[command(name = "templar", version, about = "Learn operator interpretations and groundings from examples")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the primary result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Dot,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Infer an automaton from a regular corpus.
    InferDfa {
        corpus: PathBuf,
        /// Also write the automaton as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check a regular corpus against a reference automaton; exits 3 when
    /// any condition fails.
    CheckSufficient {
        corpus: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Generate a sufficient regular corpus for a target automaton.
    GenDfaCorpus {
        #[arg(long)]
        target: PathBuf,
    },
    /// Evaluate a corpus under a complete instance: an automaton file for
    /// regular corpora, a models file for scene corpora, a parameter file
    /// for collage corpora.
    Eval {
        corpus: PathBuf,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Render a closed collage term under the reference operators.
    CollageRender {
        term_file: PathBuf,
        /// Side of the raster grid for `.png` output.
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        /// Parameters for `F` replacing the reference grid operator.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Fit the open operator of a collage corpus.
    CollageFit {
        corpus: PathBuf,
        /// Initial parameters; defaults to the reference operator perturbed
        /// by `--perturb` under `--seed`.
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        perturb: f64,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = 0.02)]
        lr: f64,
        #[arg(long, default_value_t = 128)]
        resolution: usize,
    },
    /// Generate a synthetic scene corpus.
    SceneGen {
        #[arg(long, default_value_t = 200)]
        scenes: usize,
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        min_objects: usize,
        #[arg(long, default_value_t = 3)]
        max_objects: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        variables: usize,
        /// Attribute names denoted by p1, p2, …
        #[arg(long, value_delimiter = ',', default_value = "cube,red,large,metal")]
        denotes: Vec<String>,
    },
    /// Train predicate models on a scene corpus.
    SceneTrain {
        corpus: PathBuf,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 20.0)]
        lr: f64,
        #[arg(long, default_value_t = DEFAULT_GROUNDING_CAP)]
        cap: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0.1)]
        init_scale: f64,
    },
    /// Best grounding and value of every scene example.
    SceneGround {
        corpus: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GROUNDING_CAP)]
        cap: usize,
    },
}

enum Failure {
    Usage(String),
    Parse(String),
    Constraint(String),
    Cap(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Constraint(_) => 3,
            Failure::Cap(_) => 4,
            Failure::Io(_) => 5,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Constraint(m) | Failure::Cap(m) | Failure::Io(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

impl From<InferError> for Failure {
    fn from(e: InferError) -> Self {
        Failure::Constraint(e.to_string())
    }
}

fn eval_capped(e: &EvalError) -> bool {
    match e {
        EvalError::CapExceeded { .. } => true,
        EvalError::InExample { source, .. } => eval_capped(source),
        _ => false,
    }
}

fn scene_capped(e: &SceneError) -> bool {
    match e {
        SceneError::CapExceeded { .. } => true,
        SceneError::InExample { source, .. } => scene_capped(source),
        _ => false,
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        if eval_capped(&e) {
            Failure::Cap(e.to_string())
        } else {
            Failure::Constraint(e.to_string())
        }
    }
}

impl From<SceneError> for Failure {
    fn from(e: SceneError) -> Self {
        if scene_capped(&e) {
            Failure::Cap(e.to_string())
        } else {
            Failure::Constraint(e.to_string())
        }
    }
}

impl From<CollageError> for Failure {
    fn from(e: CollageError) -> Self {
        match e {
            CollageError::Eval(inner) => inner.into(),
            other => Failure::Constraint(other.to_string()),
        }
    }
}

struct Outcome {
    stdout: Vec<u8>,
    code: u8,
}

impl Outcome {
    fn ok(stdout: impl Into<Vec<u8>>) -> Self {
        Outcome { stdout: stdout.into(), code: 0 }
    }
}

fn emit(out: &Option<PathBuf>, bytes: Vec<u8>) -> Result<Vec<u8>, Failure> {
    match out {
        Some(p) => {
            write_file(p, &bytes)?;
            Ok(Vec::new())
        }
        None => Ok(bytes),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn format_payload(p: &Payload) -> String {
    match p {
        Payload::Bool(b) => b.to_string(),
        Payload::Real(r) => r.to_string(),
        Payload::Str(s) => format!("{s:?}"),
        Payload::Vector(v) => format!("{v:?}"),
        Payload::Picture(pic) => format!("<picture with {} polygons>", pic.polygons.len()),
    }
}

fn read_kind<'a>(corpus: &'a Corpus, want: &str) -> Result<&'a Corpus, Failure> {
    if corpus.kind() == want {
        Ok(corpus)
    } else {
        Err(Failure::Parse(format!("expected a {want} corpus, found a {} corpus", corpus.kind())))
    }
}

fn scene_corpus(path: &Path) -> Result<SceneCorpus, Failure> {
    match read_corpus(path)? {
        Corpus::Scene(s) => Ok(s),
        other => Err(Failure::Parse(format!("expected a scene corpus, found a {} corpus", other.kind()))),
    }
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let fmt = cli.format;
    match cli.command {
        Command::InferDfa { corpus, dot } => {
            let c = read_corpus(&corpus)?;
            let Corpus::Regular(s) = read_kind(&c, "regular")? else { unreachable!() };
            let m = infer(s)?;
            if let Some(p) = dot {
                write_file(&p, m.to_dot(true).as_bytes())?;
            }
            let text = match fmt {
                None | Some(Format::Text) => write_dfa(&m),
                Some(Format::Dot) => m.to_dot(true),
                Some(Format::Svg) => return Err(Failure::Usage("infer-dfa writes text or dot".into())),
            };
            Ok(Outcome::ok(emit(&cli.out, text.into_bytes())?))
        }
        Command::CheckSufficient { corpus, reference } => {
            let c = read_corpus(&corpus)?;
            let Corpus::Regular(s) = read_kind(&c, "regular")? else { unreachable!() };
            let m = parse_dfa(&read_text(&reference)?)?;
            let report = check_sufficient(s, &m);
            let stdout = emit(&cli.out, report.to_string().into_bytes())?;
            if report.passed() {
                Ok(Outcome::ok(stdout))
            } else {
                eprintln!("error: the example set is not sufficient");
                Ok(Outcome { stdout, code: 3 })
            }
        }
        Command::GenDfaCorpus { target } => {
            let m = parse_dfa(&read_text(&target)?)?;
            let corpus = Corpus::Regular(generate_sufficient(&m, cli.seed));
            Ok(Outcome::ok(emit(&cli.out, write_corpus_text(&corpus).into_bytes())?))
        }
        Command::Eval { corpus, instance } => {
            let c = read_corpus(&corpus)?;
            let alg = match &c {
                Corpus::Regular(_) => admissible_instance(&parse_dfa(&read_text(&instance)?)?),
                Corpus::Scene(s) => {
                    let models = parse_models(&read_text(&instance)?)?;
                    if models.names() != s.predicates.as_slice() {
                        return Err(Failure::Constraint(format!(
                            "models name {:?}, the corpus declares {:?}",
                            models.names(),
                            s.predicates
                        )));
                    }
                    if models.dim() != Some(s.dimension) {
                        return Err(Failure::Constraint(format!("models are not of dimension {}", s.dimension)));
                    }
                    scene_algebra(&models)
                }
                Corpus::Collage(col) => {
                    let params = parse_params(&read_text(&instance)?)?;
                    CollageTemplate::new(&col.unknown, DistanceConfig::default())?.instantiate(&params)?
                }
            };
            let examples = c.examples();
            let mut text = String::new();
            for (i, ex) in examples.iter().enumerate() {
                let v = alg.example_value(ex).map_err(|e| EvalError::InExample { index: i, source: Box::new(e) })?;
                text.push_str(&format!("{} {}\n", i + 1, format_payload(&v.payload)));
            }
            let total = alg.total_value(&examples)?;
            text.push_str(&format!("total {}\n", format_payload(&total.payload)));
            Ok(Outcome::ok(emit(&cli.out, text.into_bytes())?))
        }
        Command::CollageRender { term_file, resolution, params } => {
            let text = read_text(&term_file)?;
            let body: String = text
                .lines()
                .filter(|l| !l.trim_start().starts_with('#'))
                .collect::<Vec<_>>()
                .join(" ");
            let alg = match params {
                None => reference_algebra(DistanceConfig::default()),
                Some(p) => CollageTemplate::new("F", DistanceConfig::default())?
                    .instantiate(&parse_params(&read_text(&p)?)?)?,
            };
            let term: Term = parse_term(&body, alg.alphabet(), &VariableContext::new())?;
            let pic = eval_picture_term(&alg, &term)?;
            let png = cli.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "png"));
            if png {
                if resolution == 0 {
                    return Err(Failure::Usage("resolution must be positive".into()));
                }
                let mask = rasterize(&pic, DEFAULT_VIEWPORT, Grid::square(resolution));
                let path = cli.out.as_ref().expect("png output has a path");
                export_png_mask(&mask, path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                return Ok(Outcome::ok(Vec::new()));
            }
            let out = match fmt {
                None | Some(Format::Svg) => svg_string(&pic, DEFAULT_VIEWPORT),
                Some(Format::Text) => write_picture(&pic),
                Some(Format::Dot) => return Err(Failure::Usage("collage-render writes svg, text or png".into())),
            };
            Ok(Outcome::ok(emit(&cli.out, out.into_bytes())?))
        }
        Command::CollageFit { corpus, init, perturb: amplitude, steps, lr, resolution } => {
            let c = read_corpus(&corpus)?;
            let Corpus::Collage(col) = read_kind(&c, "collage")? else { unreachable!() };
            if resolution == 0 {
                return Err(Failure::Usage("resolution must be positive".into()));
            }
            let template = CollageTemplate::new(&col.unknown, DistanceConfig::default().with_resolution(resolution))?;
            let start = match init {
                Some(p) => parse_params(&read_text(&p)?)?,
                None => {
                    let reference = match col.unknown.as_str() {
                        "F" => CollageOp::grid(),
                        other => templar_core::collage::reference_operator(other)
                            .ok_or_else(|| Failure::Constraint(format!("`{other}` is not a collage operator")))?,
                    };
                    perturb(&reference.params(), amplitude, cli.seed)
                }
            };
            let cfg = FitConfig { step: lr, max_iters: steps, ..FitConfig::default() };
            let r = fit_transforms(&template, &c.examples(), &start, &cfg)?;
            eprintln!(
                "loss {} -> {} after {} iterations{}",
                r.trace[0],
                r.final_loss(),
                r.iterations,
                if r.converged { " (converged)" } else { "" }
            );
            Ok(Outcome::ok(emit(&cli.out, write_params(&r.params).into_bytes())?))
        }
        Command::SceneGen { scenes, dim, noise, min_objects, max_objects, depth, variables, denotes } => {
            let denotations = denotes
                .iter()
                .map(|n| Attribute::from_name(n).ok_or_else(|| Failure::Usage(format!("unknown attribute `{n}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = SceneGenConfig {
                num_scenes: scenes,
                min_objects,
                max_objects,
                noise_sigma: noise,
                dimension: dim,
                formula_depth: depth,
                max_variables: variables,
                denotations,
                seed: cli.seed,
            };
            let examples = generate_scene_corpus(&cfg)?;
            let corpus = Corpus::Scene(SceneCorpus {
                dimension: dim,
                predicates: cfg.predicate_names(),
                denotations: Some(cfg.denotations.clone()),
                examples,
            });
            Ok(Outcome::ok(emit(&cli.out, write_corpus_text(&corpus).into_bytes())?))
        }
        Command::SceneTrain { corpus, epochs, lr, cap, restarts, init_scale } => {
            let s = scene_corpus(&corpus)?;
            let fresh = PredicateSet::random(s.predicates.len(), s.dimension, init_scale, cli.seed);
            let init = PredicateSet::new(s.predicates.clone(), fresh.models().to_vec())?;
            let cfg = TrainConfig {
                learning_rate: lr,
                epochs,
                seed: cli.seed,
                grounding_cap: cap,
                restarts,
                init_scale,
                ..TrainConfig::default()
            };
            let r = train(&init, &s.examples, &cfg)?;
            eprintln!("objective {} -> {} (restart {})", r.trace[0], r.final_objective(), r.restart + 1);
            if let Some(den) = &s.denotations {
                if let Ok(acc) = evaluate_predicates(&r.models, &s.examples, den) {
                    let words: Vec<String> = acc.iter().map(|a| format!("{a:.4}")).collect();
                    eprintln!("matched accuracy {}", words.join(" "));
                }
            }
            Ok(Outcome::ok(emit(&cli.out, write_models(&r.models).into_bytes())?))
        }
        Command::SceneGround { corpus, models, cap } => {
            let s = scene_corpus(&corpus)?;
            let m = parse_models(&read_text(&models)?)?;
            let mut text = String::new();
            for (i, ex) in s.examples.iter().enumerate() {
                let (v, g) = ground_best(&m, ex, cap)
                    .map_err(|e| SceneError::InExample { index: i, source: Box::new(e) })?;
                text.push_str(&format!("{} {v} {g}\n", i + 1));
            }
            Ok(Outcome::ok(emit(&cli.out, text.into_bytes())?))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(o) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(&o.stdout).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::from(5);
            }
            ExitCode::from(o.code)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
