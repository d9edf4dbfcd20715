use std::path::{Path, PathBuf};
use std::process::{Command as Process, Output};

use darwin_core::cli::{
    Command, HessenbergArgs, InitialPopulation, KernelSource, MarkovGenArgs, MortalitySource,
    OutputArgs, RunConfig, SolverMethod, StateRange, StationaryArgs, SweepArgs, VerhulstArgs,
    VerifyArgs,
};
use proptest::prelude::*;

fn darwin(args: &[&str]) -> Output {
    Process::new(env!("CARGO_BIN_EXE_darwin"))
        .args(args)
        .env_remove("DARWIN_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn hessenberg_closed_form_smoke() {
    let o = darwin(&["hessenberg", "--n", "50", "--epsilon", "0.1", "--delta", "0.05", "--closed-form"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "state,pi");
    assert_eq!(lines.len(), 51);
    assert!(lines[50].starts_with("50,"));
    assert!(stderr(&o).contains("expected state: "));
}

#[test]
fn hessenberg_rejects_small_chain() {
    let o = darwin(&["hessenberg", "--n", "3", "--delta", "0.2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_passes_on_default_grid() {
    let o = darwin(&["verify", "--n-range", "4:12", "--delta-grid", "0.05,0.1,0.2,0.25,0.4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1 + 9 * 5);
}

#[test]
fn verify_flags_deviation_with_exit_two() {
    let o = darwin(&["verify", "--n-range", "4:12", "--tolerance", "1e-300"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("deviation above"));
}

#[test]
fn sweep_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = darwin(&[
            "sweep", "--n", "50", "--deltas", "0.4,0.2,0.1,0.05", "--seeds", "1,2,3,4,5", "--output",
            path_str(p),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let text = String::from_utf8(first).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta,seed,expected_state,residual");
    assert_eq!(lines.len(), 1 + 4 * 5);
}

#[test]
fn sweep_with_invalid_delta_keeps_going() {
    let o = darwin(&["sweep", "--n", "10", "--deltas", "0.2,0.7", "--seeds", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3);
    assert!(out.lines().nth(2).unwrap().ends_with(",1,,"));
}

#[test]
fn generated_matrix_feeds_both_solvers() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("m.csv");
    let o = darwin(&["markov-gen", "--n", "20", "--delta", "0.1", "--seed", "4", "-o", path_str(&matrix)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let mut dists = Vec::new();
    for method in ["power", "direct"] {
        let out = dir.path().join(format!("{method}.csv"));
        let o = darwin(&["stationary", "--input", path_str(&matrix), "--method", method, "-o", path_str(&out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = std::fs::read_to_string(&out).unwrap();
        let pi: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(pi.len(), 20);
        dists.push(pi);
    }
    let diff: f64 = dists[0].iter().zip(&dists[1]).map(|(a, b)| (a - b).abs()).sum();
    assert!(diff < 1e-9);

    let o = darwin(&["stationary", "--input", path_str(&matrix), "--method", "power", "--max-iterations", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_from_environment() {
    let from_env = Process::new(env!("CARGO_BIN_EXE_darwin"))
        .args(["markov-gen", "--n", "6"])
        .env("DARWIN_SEED", "7")
        .output()
        .unwrap();
    let explicit = darwin(&["markov-gen", "--n", "6", "--seed", "7"]);
    let default = darwin(&["markov-gen", "--n", "6"]);
    assert_eq!(from_env.stdout, explicit.stdout);
    assert_ne!(from_env.stdout, default.stdout);
}

#[test]
fn bad_matrix_input_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "2\n0.5,0.6\n0.1,0.9\n").unwrap();
    assert_eq!(darwin(&["stationary", "--input", path_str(&bad)]).status.code(), Some(1));
    std::fs::write(&bad, "3\n1,0,0\n").unwrap();
    assert_eq!(darwin(&["stationary", "--input", path_str(&bad)]).status.code(), Some(1));
    let missing = dir.path().join("missing.csv");
    assert_eq!(darwin(&["stationary", "--input", path_str(&missing)]).status.code(), Some(1));
}

#[test]
fn reducible_matrix_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("reducible.csv");
    std::fs::write(&m, "3\n1,0,0\n0,1,0\n0.5,0,0.5\n").unwrap();
    assert_eq!(darwin(&["stationary", "--input", path_str(&m)]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let o = darwin(&["sweep", "--frobnicate", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
    assert_eq!(darwin(&["hessenberg", "--n", "ten", "--delta", "0.1"]).status.code(), Some(1));
    assert_eq!(darwin(&[]).status.code(), Some(1));
    assert_eq!(darwin(&["--help"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("no/such/dir/out.csv");
    let o = darwin(&["hessenberg", "--n", "5", "--delta", "0.2", "-o", path_str(&target)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verhulst_zero_generations_and_charts() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let o = darwin(&["verhulst", "--generations", "0", "--svg", path_str(&prefix)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
    for curve in ["total", "expected-velocity", "sections", "histogram"] {
        let svg = std::fs::read_to_string(dir.path().join(format!("run-{curve}.svg"))).unwrap();
        assert!(svg.starts_with("<svg"));
    }
    assert!(stderr(&o).contains("population bound: 10658"));
}

#[test]
fn verhulst_custom_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let kernel = dir.path().join("k.csv");
    std::fs::write(&kernel, "u,mass\n-1,0.1\n0,0.8\n1,0.1\n").unwrap();
    let mort = dir.path().join("m.csv");
    std::fs::write(&mort, "v,f_mort\n1,0.5\n2,0.4\n3,0.3\n").unwrap();
    let o = darwin(&[
        "verhulst", "--vmax", "3", "--generations", "10", "--kernel", path_str(&kernel),
        "--mortality", path_str(&mort), "--p0", "5,5,5", "--K", "100", "--b", "0.7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 12);
    assert!(stdout(&o).starts_with("generation,total,E_n,P_1,P_2,P_3\n"));

    std::fs::write(&kernel, "u,mass\n-1,0.0\n0,0.8\n1,0.2\n").unwrap();
    let o = darwin(&["verhulst", "--vmax", "3", "--kernel", path_str(&kernel), "--generations", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("f_mut(-1)"));

    let o = darwin(&["verhulst", "--mortality", "constant:0", "--generations", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = darwin(&["verhulst", "--p0", "1,2", "--generations", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

fn real() -> impl Strategy<Value = f64> {
    prop_oneof![0.001f64..0.499, 1.0f64..1e6, Just(0.1)]
}

fn out_args() -> impl Strategy<Value = OutputArgs> {
    (prop::option::of("[a-z]{1,8}\\.csv"), prop::option::of("[a-z]{1,8}")).prop_map(|(o, s)| OutputArgs {
        output: o.map(PathBuf::from),
        svg: s.map(PathBuf::from),
    })
}

fn config() -> impl Strategy<Value = RunConfig> {
    let verhulst = (
        0usize..10_000,
        real(),
        real(),
        1usize..40,
        prop_oneof![Just(KernelSource::NearestNeighbour), "[a-z]{1,8}\\.csv".prop_map(|p| KernelSource::File(p.into()))],
        prop_oneof![
            Just(MortalitySource::InverseTrait),
            real().prop_map(MortalitySource::Constant),
            "[a-z]{1,8}\\.csv".prop_map(|p| MortalitySource::File(p.into()))
        ],
        prop_oneof![
            real().prop_map(InitialPopulation::AtFirstTrait),
            prop::collection::vec(real(), 2..6).prop_map(InitialPopulation::Counts)
        ],
        out_args(),
    )
        .prop_map(|(generations, birth_rate, capacity, vmax, kernel, mortality, p0, out)| {
            Command::Verhulst(VerhulstArgs { generations, birth_rate, capacity, vmax, kernel, mortality, p0, out })
        });
    let gen = (2usize..200, real(), real(), any::<u64>(), prop::option::of("[a-z]{1,8}"))
        .prop_map(|(n, epsilon, delta, seed, o)| {
            Command::MarkovGen(MarkovGenArgs { n, epsilon, delta, seed, output: o.map(PathBuf::from) })
        });
    let stationary = ("[a-z]{1,8}", any::<bool>(), real(), 1usize..1_000_000, out_args()).prop_map(
        |(input, power, tol, max_iterations, out)| {
            Command::Stationary(StationaryArgs {
                input: input.into(),
                method: if power { SolverMethod::Power } else { SolverMethod::Direct },
                tol,
                max_iterations,
                out,
            })
        },
    );
    let hessenberg = (4usize..100, real(), real(), any::<bool>(), out_args()).prop_map(
        |(n, epsilon, delta, closed_form, out)| {
            Command::Hessenberg(HessenbergArgs { n, epsilon, delta, closed_form, out })
        },
    );
    let sweep = (
        2usize..100,
        real(),
        prop::collection::vec(real(), 1..5),
        prop::collection::vec(any::<u64>(), 1..6),
        out_args(),
    )
        .prop_map(|(n, epsilon, deltas, seeds, out)| Command::Sweep(SweepArgs { n, epsilon, deltas, seeds, out }));
    let verify = (4usize..10, 0usize..10, prop::collection::vec(real(), 1..5), real(), real())
        .prop_map(|(lo, width, delta_grid, epsilon, tolerance)| {
            Command::Verify(VerifyArgs {
                n_range: StateRange { lo, hi: lo + width },
                delta_grid,
                epsilon,
                tolerance,
                output: None,
            })
        });
    prop_oneof![verhulst, gen, stationary, hessenberg, sweep, verify].prop_map(|command| RunConfig { command })
}

proptest! {
    #[test]
    fn config_round_trips(cfg in config()) {
        let args = cfg.to_args();
        let parsed = RunConfig::parse_args(&args).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.to_args(), args);
    }
}

#[test]
fn defaults_round_trip() {
    for sub in ["verhulst", "markov-gen", "sweep", "verify"] {
        let cfg = RunConfig::parse_args(["darwin", sub]).unwrap();
        assert_eq!(RunConfig::parse_args(cfg.to_args()).unwrap(), cfg);
    }
}
