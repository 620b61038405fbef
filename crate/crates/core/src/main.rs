//! Command-line front end: classify matrices, regenerate count tables, run
//! the Jaynes-Cummings comparison, drive the real classifier and the golden
//! self-test.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use padic_williamson::classify::{classify2, classify4, witness, NormalForm};
use padic_williamson::census;
use padic_williamson::error::ArithError;
use padic_williamson::integrable::{jc_local_models, ModelCase};
use padic_williamson::json::{normal_form_to_json, MatrixInput, RealMatrixInput};
use padic_williamson::padic::Prime;
use padic_williamson::reals::{classify_real, ten_forms_dim4};
use padic_williamson::symplin::MatQ;

#[derive(Parser)]
#[command(name = "padic-williamson", about = "Symplectic classification of p-adic symmetric matrices and local models of integrable systems", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Path to a JSON matrix file; "-" or omitted reads stdin
    #[arg(long)]
    input: Option<String>,
    /// Inline JSON matrix
    #[arg(long, conflicts_with = "input")]
    inline: Option<String>,
}

impl InputArgs {
    fn read(&self) -> std::io::Result<String> {
        if let Some(text) = &self.inline {
            return Ok(text.clone());
        }
        match self.input.as_deref() {
            None | Some("-") => {
                let mut buf = String::new();
                std::io::stdin().read_to_string(&mut buf)?;
                Ok(buf)
            }
            Some(path) => std::fs::read_to_string(path),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify a symmetric 2x2 or 4x4 matrix over Q_p
    Classify {
        #[command(flatten)]
        input: InputArgs,
        /// Prime override (defaults to the "p" field of the input)
        #[arg(long)]
        prime: Option<u64>,
        /// Working precision in digits for lifted values
        #[arg(long)]
        precision: Option<usize>,
        /// Also construct and verify a witness matrix where supported
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Regenerate the table of block and form counts
    Census {
        /// Even dimensions, e.g. 2,4,6
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10,12,14,16,18,20")]
        dims: Vec<usize>,
        /// Primes, e.g. 2,3,5,7
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        primes: Vec<u64>,
        /// Worker threads for the table cells
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Compare the two Jaynes-Cummings critical points at a prime
    Jc {
        #[arg(long)]
        prime: u64,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Classify a real symmetric matrix (floating point)
    Real {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Run the built-in golden examples and count checks
    Selftest,
}

#[derive(Clone, Copy, PartialEq, clap::ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                ArithError::Parse(_) | ArithError::InvalidPrime(_) => 2,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, ArithError> {
    match cli.command {
        Command::Classify {
            input,
            prime,
            precision,
            witness: want_witness,
            format,
        } => {
            if let Some(n) = precision.or_else(|| {
                std::env::var("PADIC_PRECISION")
                    .ok()
                    .and_then(|v| v.parse().ok())
            }) {
                padic_williamson::padic::set_working_precision(n)
                    .map_err(|_| ArithError::Parse("precision must be at least 8".into()))?;
            }
            let text = input.read().map_err(|e| ArithError::Parse(e.to_string()))?;
            let mut parsed = MatrixInput::parse(&text)?;
            if let Some(n) = parsed.precision {
                padic_williamson::padic::set_working_precision(n)
                    .map_err(|_| ArithError::Parse("precision must be at least 8".into()))?;
            }
            if let Some(p) = prime {
                parsed.p = p;
            }
            let (p, m) = parsed.to_matrix()?;
            let nf = match m.dim {
                2 => classify2(&m)?,
                4 => classify4(&m)?,
                d => return Err(ArithError::BadDimension(d)),
            };
            let mut report = normal_form_to_json(&nf);
            report["p"] = serde_json::json!(p.get());
            if want_witness {
                match witness(&m, &nf) {
                    Ok(w) => {
                        report["witness_verified"] = serde_json::json!(w.verified);
                        report["witness_precision"] = serde_json::json!(w.residual_precision);
                    }
                    Err(ArithError::WitnessOutOfScope) => {
                        report["witness_verified"] = serde_json::Value::Null;
                    }
                    Err(e) => return Err(e),
                }
            }
            match format {
                Format::Json => println!("{report}"),
                _ => {
                    println!("{report}");
                    println!("p = {}: {}", p.get(), nf.summary());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Census {
            dims,
            primes,
            jobs,
            format,
        } => {
            let primes: Vec<Prime> = primes
                .into_iter()
                .map(Prime::new)
                .collect::<Result<_, _>>()?;
            let rows = if jobs > 1 {
                census_parallel(&dims, &primes, jobs)?
            } else {
                census::table_numforms(&dims, &primes)?
            };
            match format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&rows).unwrap())
                }
                Format::Csv => {
                    let mut head = String::from("dim,real_blocks,real_forms");
                    for p in &primes {
                        head.push_str(&format!(",Q{p}_blocks,Q{p}_forms", p = p.get()));
                    }
                    println!("{head}");
                    for row in &rows {
                        let mut line =
                            format!("{},{},{}", row.dim, row.real_blocks, row.real_forms);
                        for cell in &row.cells {
                            line.push_str(&format!(",{},{}", cell.blocks, cell.forms));
                        }
                        println!("{line}");
                    }
                }
                Format::Text => {
                    print!("{:>4} {:>6} {:>11}", "2n", "R blk", "R forms");
                    for p in &primes {
                        print!(" {:>10} {:>12}", format!("Q{} blk", p.get()), format!("Q{} forms", p.get()));
                    }
                    println!();
                    for row in &rows {
                        print!("{:>4} {:>6} {:>11}", row.dim, row.real_blocks, row.real_forms);
                        for cell in &row.cells {
                            print!(" {:>10} {:>12}", cell.blocks, cell.forms);
                        }
                        println!();
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Jc { prime, format } => {
            let p = Prime::new(prime)?;
            let rep = jc_local_models(p)?;
            let case_str = |c: &ModelCase| match c {
                ModelCase::Case1 { c1, c2 } => format!("case (1), c1 = {c1}, c2 = {c2}"),
                ModelCase::Case2 { c } => format!("case (2), c = {c}"),
                ModelCase::Case3 { c, .. } => format!("case (3), c = {c}"),
                ModelCase::Rank1 { c } => format!("rank 1, c = {c}"),
            };
            if format == Format::Json {
                println!(
                    "{}",
                    serde_json::json!({
                        "p": prime,
                        "m1": case_str(&rep.model_at_m1.case),
                        "m2": case_str(&rep.model_at_m2.case),
                        "equivalent": rep.equivalent,
                    })
                );
            } else {
                println!("p = {prime}");
                println!("  m1: {}", case_str(&rep.model_at_m1.case));
                println!("  m2: {}", case_str(&rep.model_at_m2.case));
                println!("  equivalent: {}", rep.equivalent);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Real { input, tol, format } => {
            let text = input.read().map_err(|e| ArithError::Parse(e.to_string()))?;
            let m = RealMatrixInput::parse(&text)?.to_matrix()?;
            let blocks = classify_real(&m, tol)?;
            if format == Format::Json {
                let items: Vec<serde_json::Value> = blocks
                    .iter()
                    .map(|b| serde_json::json!(format!("{b:?}")))
                    .collect();
                let mut out = serde_json::json!({"blocks": items});
                if m.dim == 4 {
                    if let Ok((idx, params)) = ten_forms_dim4(&m, tol) {
                        out["form"] = serde_json::json!(idx);
                        out["params"] = serde_json::json!(params);
                    }
                }
                println!("{out}");
            } else {
                for b in &blocks {
                    println!("{b:?}");
                }
                if m.dim == 4 {
                    if let Ok((idx, params)) = ten_forms_dim4(&m, tol) {
                        println!("form {idx} of 10, parameters {params:?}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => {
            let failures = selftest();
            if failures == 0 {
                println!("selftest: all checks passed");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("selftest: {failures} check(s) FAILED");
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn census_parallel(
    dims: &[usize],
    primes: &[Prime],
    jobs: usize,
) -> Result<Vec<census::NumFormsRow>, ArithError> {
    let mut rows: Vec<Option<census::NumFormsRow>> = vec![None; dims.len()];
    std::thread::scope(|scope| -> Result<(), ArithError> {
        let mut handles = Vec::new();
        for chunk in dims
            .iter()
            .enumerate()
            .collect::<Vec<_>>()
            .chunks(dims.len().div_ceil(jobs))
        {
            let chunk: Vec<(usize, usize)> = chunk.iter().map(|&(i, &d)| (i, d)).collect();
            handles.push(scope.spawn(move || -> Result<Vec<(usize, census::NumFormsRow)>, ArithError> {
                let mut out = Vec::new();
                for (i, d) in chunk {
                    let row = census::table_numforms(&[d], primes)?.pop().unwrap();
                    out.push((i, row));
                }
                Ok(out)
            }));
        }
        for h in handles {
            for (i, row) in h.join().expect("census worker panicked")? {
                rows[i] = Some(row);
            }
        }
        Ok(())
    })?;
    Ok(rows.into_iter().map(Option::unwrap).collect())
}

/// Golden worked examples and the count triples; returns the failure count.
fn selftest() -> usize {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("  [{}] {name}", if ok { "ok" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    let m1 = |p: Prime| {
        MatQ::from_i64_rows(
            p,
            4,
            &[
                &[1, 2, 3, 4],
                &[2, 5, 6, 7],
                &[3, 6, 8, 9],
                &[4, 7, 9, 10],
            ],
        )
    };
    let m2 = |p: Prime| {
        MatQ::from_i64_rows(
            p,
            4,
            &[
                &[2, 6, -2, -3],
                &[6, 11, 1, -5],
                &[-2, 1, -6, -2],
                &[-3, -5, -2, 3],
            ],
        )
    };
    let s = |p: Prime, n: i64| padic_williamson::padic::PadicScalar::from_i64(p, n);

    let p2 = Prime::new(2).unwrap();
    check(
        "worked example at p=2: case 3 with c=3, t=(1,1), (a,b)=(-1,0)",
        matches!(
            classify4(&m1(p2)),
            Ok(NormalForm::Dim4Case3 { c, t1, t2, a, b, .. })
                if c == s(p2, 3) && t1 == s(p2, 1) && t2 == s(p2, 1)
                    && a == s(p2, -1) && b.is_zero()
        ),
    );
    let p3 = Prime::new(3).unwrap();
    check(
        "worked example at p=3: case 2 with c=-1",
        matches!(
            classify4(&m1(p3)),
            Ok(NormalForm::Dim4Case2 { c, .. }) if c == s(p3, -1)
        ),
    );
    let p5 = Prime::new(5).unwrap();
    check(
        "worked example at p=5: case 1 with c1=1, c2=2",
        matches!(
            classify4(&m1(p5)),
            Ok(NormalForm::Dim4Case1 { b1, b2 }) if b1.c == s(p5, 1) && b2.c == s(p5, 2)
        ),
    );
    check(
        "degenerate example at p=5: deg 3 with c=5, r=1, a=1",
        matches!(
            classify4(&m2(p5)),
            Ok(NormalForm::Deg3 { c, r, a })
                if c == s(p5, 5) && r == s(p5, 1) && a == s(p5, 1)
        ),
    );
    let p11 = Prime::new(11).unwrap();
    check(
        "degenerate example at p=11: deg 2",
        matches!(classify4(&m2(p11)), Ok(NormalForm::Deg2 { .. })),
    );

    for (pr, fams, iso) in [(5u64, 7, 4), (7, 5, 4), (2, 11, 8)] {
        let p = Prime::new(pr).unwrap();
        let c = census::count_dim2(p);
        check(
            &format!("dim-2 counts at p={pr}: ({fams}, {iso})"),
            c.one_dof == fams && c.isolated == iso,
        );
    }
    for (pr, want) in [(5u64, (49, 35, 20)), (7, (32, 27, 20)), (2, (211, 103, 72))] {
        let p = Prime::new(pr).unwrap();
        let ok = census::count_dim4(p)
            .map(|c| (c.two_dof, c.one_dof, c.isolated) == want)
            .unwrap_or(false);
        check(&format!("dim-4 counts at p={pr}: {want:?}"), ok);
    }
    failures
}
