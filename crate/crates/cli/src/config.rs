//! Experiment configuration with a lossless line-based text form.

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub m: usize,
    pub q: usize,
    pub sparsity: usize,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algo: String,
    pub data_path: Option<String>,
    pub synth: Option<SynthSpec>,
    pub lambda: f64,
    pub batches: usize,
    pub graph: String,
    pub alpha: f64,
    pub theta: f64,
    pub delta_hat: f64,
    pub rho_frac: f64,
    pub gamma: f64,
    pub r: f64,
    pub s: f64,
    pub seed: u64,
    pub max_iters: u64,
    pub tol: f64,
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algo: "fb".into(),
            data_path: None,
            synth: None,
            lambda: 0.1,
            batches: 4,
            graph: "ring".into(),
            alpha: 0.3,
            theta: 0.01,
            delta_hat: 1.0,
            rho_frac: 0.9,
            gamma: 1.9,
            r: 1.0,
            s: 1.0,
            seed: 0,
            max_iters: 200_000,
            tol: 1e-10,
            out: None,
        }
    }
}

impl ExperimentConfig {
    /// Lossless text form: one `key = value` line per field. Floats use
    /// the shortest round-trip representation.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("algo = {}\n", self.algo));
        if let Some(p) = &self.data_path {
            s.push_str(&format!("data = {p}\n"));
        }
        if let Some(sy) = &self.synth {
            s.push_str(&format!(
                "synth = {},{},{},{}\n",
                sy.m, sy.q, sy.sparsity, sy.noise
            ));
        }
        s.push_str(&format!("lambda = {}\n", self.lambda));
        s.push_str(&format!("batches = {}\n", self.batches));
        s.push_str(&format!("graph = {}\n", self.graph));
        s.push_str(&format!("alpha = {}\n", self.alpha));
        s.push_str(&format!("theta = {}\n", self.theta));
        s.push_str(&format!("delta_hat = {}\n", self.delta_hat));
        s.push_str(&format!("rho_frac = {}\n", self.rho_frac));
        s.push_str(&format!("gamma = {}\n", self.gamma));
        s.push_str(&format!("r = {}\n", self.r));
        s.push_str(&format!("s = {}\n", self.s));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("max_iters = {}\n", self.max_iters));
        s.push_str(&format!("tol = {}\n", self.tol));
        if let Some(o) = &self.out {
            s.push_str(&format!("out = {o}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
            v.parse()
                .map_err(|_| CliError::Config(format!("bad value `{v}` for {key}")))
        }
        match key {
            "algo" => self.algo = value.to_string(),
            "data" => self.data_path = Some(value.to_string()),
            "synth" => self.synth = Some(parse_synth(value)?),
            "lambda" => self.lambda = num(key, value)?,
            "batches" => self.batches = num(key, value)?,
            "graph" => self.graph = value.to_string(),
            "alpha" => self.alpha = num(key, value)?,
            "theta" => self.theta = num(key, value)?,
            "delta_hat" | "delta-hat" => self.delta_hat = num(key, value)?,
            "rho_frac" | "rho-frac" => self.rho_frac = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "r" => self.r = num(key, value)?,
            "s" => self.s = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "max_iters" | "max-iters" => self.max_iters = num(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "out" => self.out = Some(value.to_string()),
            other => {
                return Err(CliError::Config(format!("unknown key `{other}`")));
            }
        }
        Ok(())
    }
}

pub fn parse_synth(value: &str) -> Result<SynthSpec, CliError> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Config(format!(
            "synth expects m,q,k,noise — got `{value}`"
        )));
    }
    Ok(SynthSpec {
        m: parts[0]
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad m in `{value}`")))?,
        q: parts[1]
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad q in `{value}`")))?,
        sparsity: parts[2]
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad k in `{value}`")))?,
        noise: parts[3]
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad noise in `{value}`")))?,
    })
}

pub const KNOWN_ALGOS: [&str; 9] = [
    "fb",
    "condat",
    "ipds",
    "iadmm",
    "padmm",
    "minibatch",
    "psmpds",
    "dist-padmm",
    "pdapds",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_field_exact() {
        let cfg = ExperimentConfig {
            algo: "psmpds".into(),
            data_path: None,
            synth: Some(SynthSpec {
                m: 50,
                q: 20,
                sparsity: 5,
                noise: 0.012345678901234567,
            }),
            lambda: 0.1,
            batches: 4,
            graph: "ring".into(),
            alpha: 0.3,
            theta: 0.01,
            delta_hat: 1.0,
            rho_frac: 0.9,
            gamma: 1.9,
            r: 1.0,
            s: 1.0,
            seed: 777,
            max_iters: 123_456,
            tol: 1e-10,
            out: Some("trace.csv".into()),
        };
        let text = cfg.serialize();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(ExperimentConfig::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn synth_spec_requires_four_fields() {
        assert!(parse_synth("50,20,5").is_err());
        assert!(parse_synth("50,20,5,0.01").is_ok());
    }
}
