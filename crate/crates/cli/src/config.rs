//! Experiment configuration: a flat `key = value` text format with typed
//! parsing; every key can be overridden from the command line.

use std::fmt::Write as _;
use std::str::FromStr;

use coreset::sampling::Problem;
use coreset::streaming::StreamSolver;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pipeline {
    Offline,
    Streaming,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub n: usize,
    pub delta_exp: f64,
    pub epsilon: f64,
    pub c_const: f64,
    pub trials: usize,
    pub rng_seed: u64,
    pub pipeline: Pipeline,
    pub solver: SolverChoice,
    pub output: String,
    /// Planted clusters (signed instances only).
    pub clusters: usize,
    /// Sign-flip noise (signed instances only).
    pub noise: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SolverChoice {
    Exact,
    LocalSearch { restarts: usize },
    Est,
}

impl SolverChoice {
    pub fn to_stream_solver(self) -> StreamSolver {
        match self {
            SolverChoice::Exact => StreamSolver::Exact,
            SolverChoice::LocalSearch { restarts } => StreamSolver::LocalSearch { restarts },
            SolverChoice::Est => StreamSolver::Est,
        }
    }
}

impl std::fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverChoice::Exact => write!(f, "exact"),
            SolverChoice::LocalSearch { restarts } => write!(f, "local-search:{restarts}"),
            SolverChoice::Est => write!(f, "est"),
        }
    }
}

impl FromStr for SolverChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(SolverChoice::Exact),
            "est" => Ok(SolverChoice::Est),
            other => {
                if let Some(rest) = other.strip_prefix("local-search") {
                    let restarts = match rest.strip_prefix(':') {
                        Some(r) => r
                            .parse()
                            .map_err(|e| format!("bad restart count '{r}': {e}"))?,
                        None if rest.is_empty() => 20,
                        _ => return Err(format!("unknown solver '{other}'")),
                    };
                    Ok(SolverChoice::LocalSearch { restarts })
                } else {
                    Err(format!("unknown solver '{other}'"))
                }
            }
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: Problem::MaxCut,
            n: 512,
            delta_exp: 0.5,
            epsilon: 0.25,
            c_const: 0.016,
            trials: 4,
            rng_seed: 1,
            pipeline: Pipeline::Offline,
            solver: SolverChoice::LocalSearch { restarts: 20 },
            output: "report".into(),
            clusters: 3,
            noise: 0.2,
        }
    }
}

impl ExperimentConfig {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "problem = {}",
            match self.problem {
                Problem::MaxCut => "maxcut",
                Problem::Cc => "cc",
            }
        );
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "delta_exp = {}", self.delta_exp);
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "c_const = {}", self.c_const);
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "rng_seed = {}", self.rng_seed);
        let _ = writeln!(
            s,
            "pipeline = {}",
            match self.pipeline {
                Pipeline::Offline => "offline",
                Pipeline::Streaming => "streaming",
            }
        );
        let _ = writeln!(s, "solver = {}", self.solver);
        let _ = writeln!(s, "output = {}", self.output);
        let _ = writeln!(s, "clusters = {}", self.clusters);
        let _ = writeln!(s, "noise = {}", self.noise);
        s
    }

    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected 'key = value'", lineno + 1))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: FromStr>(value: &str, what: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| format!("bad {what} '{value}': {e}"))
        }
        match key {
            "problem" => {
                self.problem = match value {
                    "maxcut" => Problem::MaxCut,
                    "cc" => Problem::Cc,
                    other => return Err(format!("unknown problem '{other}'")),
                }
            }
            "n" => self.n = parse(value, "n")?,
            "delta_exp" => self.delta_exp = parse(value, "delta_exp")?,
            "epsilon" => self.epsilon = parse(value, "epsilon")?,
            "c_const" => self.c_const = parse(value, "c_const")?,
            "trials" => self.trials = parse(value, "trials")?,
            "rng_seed" => self.rng_seed = parse(value, "rng_seed")?,
            "pipeline" => {
                self.pipeline = match value {
                    "offline" => Pipeline::Offline,
                    "streaming" => Pipeline::Streaming,
                    other => return Err(format!("unknown pipeline '{other}'")),
                }
            }
            "solver" => self.solver = value.parse()?,
            "output" => self.output = value.to_string(),
            "clusters" => self.clusters = parse(value, "clusters")?,
            "noise" => self.noise = parse(value, "noise")?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n < 2 {
            return Err(format!("n = {} out of range (need >= 2)", self.n));
        }
        if !(self.delta_exp > 0.0 && self.delta_exp <= 1.0) {
            return Err(format!("delta_exp = {} outside (0, 1]", self.delta_exp));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(format!("epsilon = {} outside (0, 1)", self.epsilon));
        }
        if self.c_const <= 0.0 {
            return Err(format!("c_const = {} must be positive", self.c_const));
        }
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(format!("noise = {} outside [0, 1]", self.noise));
        }
        if self.clusters == 0 || self.clusters > self.n {
            return Err(format!("clusters = {} outside [1, n]", self.clusters));
        }
        Ok(())
    }
}
