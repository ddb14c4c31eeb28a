use std::process::ExitCode;

use proxsplit_cli::config::{parse_synth, ExperimentConfig, KNOWN_ALGOS};
use proxsplit_cli::experiment::{run_experiment, validate_only};
use proxsplit_cli::CliError;

const USAGE: &str = "proxsplit <solve|sweep|validate> [flags]

flags:
  --algo <id>          one of fb, condat, ipds, iadmm, padmm, minibatch,
                       psmpds, dist-padmm, pdapds
  --data <path>        sparse `label idx:val` dataset (logistic problems)
  --synth m,q,k,noise  synthetic least-squares problem (l1 regularized)
  --lambda <v>         l1 weight (default 0.1)
  --batches <N>        batch/agent count (default 4)
  --graph <spec>       ring | path | complete | <edge-list file>
  --alpha --theta --delta-hat --rho-frac     inertial schedule
  --gamma --r --s      preconditioner parameters
  --seed <u64>         RNG seed
  --max-iters <n>      iteration budget
  --tol <v>            residual tolerance
  --out <csv>          trace output path
  --config <path>      load a saved config file first
  --seeds a,b,c        (sweep) seed grid
  --alphas x,y         (sweep) alpha grid

exit codes: 0 converged, 2 max-iters, 1 validation/usage error";

fn parse_flags(args: &[String]) -> Result<(ExperimentConfig, Vec<u64>, Vec<f64>), CliError> {
    let mut cfg = ExperimentConfig::default();
    let mut seeds: Vec<u64> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let mut take = || {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("flag {flag} needs a value")))
        };
        match flag.as_str() {
            "--config" => {
                let path = take()?;
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
                cfg = ExperimentConfig::parse(&text)?;
            }
            "--algo" => cfg.algo = take()?,
            "--data" => cfg.data_path = Some(take()?),
            "--synth" => cfg.synth = Some(parse_synth(&take()?)?),
            "--lambda" => cfg.set("lambda", &take()?)?,
            "--batches" => cfg.set("batches", &take()?)?,
            "--graph" => cfg.graph = take()?,
            "--alpha" => cfg.set("alpha", &take()?)?,
            "--theta" => cfg.set("theta", &take()?)?,
            "--delta-hat" => cfg.set("delta_hat", &take()?)?,
            "--rho-frac" => cfg.set("rho_frac", &take()?)?,
            "--gamma" => cfg.set("gamma", &take()?)?,
            "--r" => cfg.set("r", &take()?)?,
            "--s" => cfg.set("s", &take()?)?,
            "--seed" => cfg.set("seed", &take()?)?,
            "--max-iters" => cfg.set("max_iters", &take()?)?,
            "--tol" => cfg.set("tol", &take()?)?,
            "--out" => cfg.out = Some(take()?),
            "--seeds" => {
                seeds = take()?
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse()
                            .map_err(|_| CliError::Usage(format!("bad seed `{t}`")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "--alphas" => {
                alphas = take()?
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse()
                            .map_err(|_| CliError::Usage(format!("bad alpha `{t}`")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            other => {
                return Err(CliError::Usage(format!("unknown flag `{other}`")));
            }
        }
    }
    Ok((cfg, seeds, alphas))
}

fn run(verb: &str, rest: &[String]) -> Result<i32, CliError> {
    match verb {
        "solve" => {
            let (cfg, _, _) = parse_flags(rest)?;
            let summary = run_experiment(&cfg)?;
            println!("{}", summary.line());
            Ok(summary.exit_code())
        }
        "sweep" => {
            let (base, seeds, alphas) = parse_flags(rest)?;
            let seeds = if seeds.is_empty() {
                vec![base.seed]
            } else {
                seeds
            };
            let alphas = if alphas.is_empty() {
                vec![base.alpha]
            } else {
                alphas
            };
            let mut worst = 0;
            for &alpha in &alphas {
                for &seed in &seeds {
                    let mut cfg = base.clone();
                    cfg.seed = seed;
                    cfg.alpha = alpha;
                    if let Some(stem) = &base.out {
                        let stem = stem.trim_end_matches(".csv");
                        cfg.out = Some(format!("{stem}-seed{seed}-alpha{alpha}.csv"));
                    }
                    let summary = run_experiment(&cfg)?;
                    println!("seed={seed} alpha={alpha} {}", summary.line());
                    worst = worst.max(summary.exit_code());
                }
            }
            Ok(worst)
        }
        "validate" => {
            let (cfg, _, _) = parse_flags(rest)?;
            let report = validate_only(&cfg)?;
            for line in report {
                println!("{line}");
            }
            println!("all validators passed");
            Ok(0)
        }
        other => Err(CliError::Usage(format!(
            "unknown verb `{other}`; known algos: {}",
            KNOWN_ALGOS.join(", ")
        ))),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(verb) = args.first() else {
        eprintln!("{USAGE}");
        return ExitCode::from(1);
    };
    if verb == "--help" || verb == "-h" || verb == "help" {
        println!("{USAGE}");
        return ExitCode::from(0);
    }
    match run(verb, &args[1..]) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
