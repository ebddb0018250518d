use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use mbmom::costmodel::{emit_surface, write_csv, CostAlgorithm};
use mbmom::{
    g_bruteforce, g_convolution, indices_from_constants, mbmom_solve_with, mom_solve_with, mva, state_probability,
    Branching, ExactScalar, MeanIndices, SolveOptions, StateVector, ValidatedModel,
};

use crate::model_file::ModelFile;
use crate::report::{CompareEntry, CompareReport, IndicesReport, ProbReport, SolveReport, Value};

/// Failure with its exit code: 1 for usage and parse errors, 2 for solver
/// errors and disagreements.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 1, error: error.into() }
    }

    pub fn solver(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, error: error.into() }
    }
}

pub type CmdResult<T> = Result<T, Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Algorithm {
    Mbmom,
    Mom,
    Conv,
    Mva,
    Brute,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mbmom => "mbmom",
            Algorithm::Mom => "mom",
            Algorithm::Conv => "conv",
            Algorithm::Mva => "mva",
            Algorithm::Brute => "brute",
        }
    }
}

pub struct Loaded {
    pub file: ModelFile,
    pub model: ValidatedModel,
}

pub fn load(path: &Path) -> CmdResult<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::usage)?;
    let file = ModelFile::parse(&text).map_err(|e| Failure::usage(anyhow!("{}: {e}", path.display())))?;
    let model = file.to_model().map_err(|e| Failure::usage(anyhow!("{}: {e}", path.display())))?;
    Ok(Loaded { file, model })
}

/// Output of one algorithm run.
pub struct Outcome {
    pub g: Option<ExactScalar>,
    pub indices: MeanIndices,
    pub steps: Option<usize>,
    pub fallbacks: usize,
}

pub fn run(model: &ValidatedModel, algorithm: Algorithm, branching: Branching, options: SolveOptions) -> mbmom::Result<Outcome> {
    let from_solution = |sol: mbmom::Solution| -> mbmom::Result<Outcome> {
        Ok(Outcome {
            g: Some(sol.normalizing_constant()),
            indices: sol.indices()?,
            steps: Some(sol.stats().steps),
            fallbacks: sol.stats().fallbacks.len(),
        })
    };
    match algorithm {
        Algorithm::Mbmom => from_solution(mbmom_solve_with(model, branching, options)?),
        Algorithm::Mom => from_solution(mom_solve_with(model, options)?),
        Algorithm::Conv => Ok(Outcome {
            g: Some(g_convolution(model, &model.root_index())),
            indices: indices_from_constants(model, |idx| Ok(g_convolution(model, idx)))?,
            steps: None,
            fallbacks: 0,
        }),
        Algorithm::Brute => Ok(Outcome {
            g: Some(g_bruteforce(model, &model.root_index())?),
            indices: indices_from_constants(model, |idx| g_bruteforce(model, idx))?,
            steps: None,
            fallbacks: 0,
        }),
        Algorithm::Mva => Ok(Outcome { g: None, indices: mva(model)?, steps: None, fallbacks: 0 }),
    }
}

fn check_branching(model: &ValidatedModel, branching: Branching) -> CmdResult<()> {
    branching.resolve(model.queues()).map(|_| ()).map_err(Failure::usage)
}

pub fn solve(path: &Path, algorithm: Algorithm, branching: Branching, options: SolveOptions) -> CmdResult<SolveReport> {
    let Loaded { file, model } = load(path)?;
    if algorithm == Algorithm::Mbmom {
        check_branching(&model, branching)?;
    }
    let out = run(&model, algorithm, branching, options).map_err(Failure::solver)?;
    Ok(SolveReport {
        model: file.name.clone(),
        algorithm: algorithm.name().to_string(),
        branching: (algorithm == Algorithm::Mbmom).then(|| branching.to_string()),
        steps: out.steps,
        fallbacks: out.fallbacks,
        classes: file.class_names(),
        queues: file.queue_names(),
        normalizing_constant: out.g.as_ref().map(Value::from),
        indices: IndicesReport::from(&out.indices),
    })
}

/// Labelled exact entries of an outcome, for entry-by-entry comparison.
fn labelled(out: &Outcome, file: &ModelFile) -> Vec<(String, ExactScalar)> {
    let (classes, queues) = (file.class_names(), file.queue_names());
    let ix = &out.indices;
    let mut v = Vec::new();
    if let Some(g) = &out.g {
        v.push(("G".to_string(), g.clone()));
    }
    for (c, cl) in classes.iter().enumerate() {
        v.push((format!("X[{cl}]"), ix.throughput[c].clone()));
        v.push((format!("R[{cl}]"), ix.response_time[c].clone()));
    }
    for (k, q) in queues.iter().enumerate() {
        for (c, cl) in classes.iter().enumerate() {
            v.push((format!("Q[{q},{cl}]"), ix.queue_length[k][c].clone()));
            v.push((format!("U[{q},{cl}]"), ix.utilization[k][c].clone()));
            v.push((format!("W[{q},{cl}]"), ix.residence_time[k][c].clone()));
        }
    }
    v
}

pub fn compare(path: &Path, options: SolveOptions) -> CmdResult<CompareReport> {
    let Loaded { file, model } = load(path)?;
    let reference = run(&model, Algorithm::Conv, Branching::Max, options).map_err(Failure::solver)?;
    let want = labelled(&reference, &file);
    let mut runs: Vec<(String, Algorithm, Branching)> = vec![
        ("mbmom-b1".into(), Algorithm::Mbmom, Branching::Fixed(1)),
        ("mbmom-bm".into(), Algorithm::Mbmom, Branching::Max),
        ("mom".into(), Algorithm::Mom, Branching::Max),
        ("mva".into(), Algorithm::Mva, Branching::Max),
        ("brute".into(), Algorithm::Brute, Branching::Max),
    ];
    if model.queues() == 1 {
        runs.remove(1);
    }
    let mut results = Vec::new();
    let mut all_equal = true;
    for (label, algorithm, branching) in runs {
        let entry = match run(&model, algorithm, branching, options) {
            Err(mbmom::Error::StateSpaceTooLarge { states }) => CompareEntry {
                algorithm: label,
                status: format!("skipped: {states} states"),
                entries: 0,
                agreeing: 0,
                disagreements: vec![],
            },
            Err(e) => {
                all_equal = false;
                CompareEntry { algorithm: label, status: format!("error: {e}"), entries: 0, agreeing: 0, disagreements: vec![] }
            }
            Ok(out) => {
                let got = labelled(&out, &file);
                let mut disagreements = Vec::new();
                let mut agreeing = 0;
                for (name, value) in &got {
                    let expected = want.iter().find(|(n, _)| n == name).map(|(_, v)| v);
                    if expected == Some(value) {
                        agreeing += 1;
                    } else {
                        disagreements.push(format!("{name}: {value} vs {}", expected.map_or("-".into(), |v| v.to_string())));
                    }
                }
                all_equal &= disagreements.is_empty();
                let status = if out.fallbacks > 0 { format!("ok ({} fallback steps)", out.fallbacks) } else { "ok".into() };
                CompareEntry { algorithm: label, status, entries: got.len(), agreeing, disagreements }
            }
        };
        results.push(entry);
    }
    Ok(CompareReport { model: file.name, reference: "conv".into(), results, all_equal })
}

/// Queue or class counts given as `a..b` (inclusive), `a,b,c`, or a single
/// value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts(pub Vec<u64>);

pub fn parse_range(s: &str) -> Result<Counts, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("`{t}` is not a non-negative integer"));
    let values = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range `{s}`"));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if values.contains(&0) {
        return Err("queue and class counts must be at least 1".into());
    }
    Ok(Counts(values))
}

pub fn cost(queues: &[u64], classes: &[u64], population: u64, algorithms: &[CostAlgorithm], output: Option<&Path>) -> CmdResult<()> {
    let reports = emit_surface(queues, classes, population, algorithms);
    match output {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display())).map_err(Failure::usage)?;
            write_csv(file, &reports).map_err(Failure::usage)
        }
        None => match write_csv(std::io::stdout().lock(), &reports) {
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe) => Ok(()),
            other => other.map_err(Failure::usage),
        },
    }
}

pub fn prob(path: &Path, queue_rows: &[Vec<u32>], delay: &[u32]) -> CmdResult<ProbReport> {
    let Loaded { file, model } = load(path)?;
    let mut counts = queue_rows.to_vec();
    counts.push(delay.to_vec());
    let state = StateVector { counts };
    let g = mbmom_solve_with(&model, Branching::Max, SolveOptions::default()).map_err(Failure::solver)?.normalizing_constant();
    let p = state_probability(&model, &state, &g).map_err(|e| match e {
        mbmom::Error::InfeasibleState(_) => Failure::usage(e),
        other => Failure::solver(other),
    })?;
    Ok(ProbReport { model: file.name, state: state.counts, probability: Value::from(&p) })
}
