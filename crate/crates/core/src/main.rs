use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hermite_vlasov::app::{self, CONVERGENCE_FILE};
use hermite_vlasov::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "hermite-vlasov",
    version,
    about = "Conservative Hermite-DG Vlasov-Poisson solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its time series and snapshots.
    Run(CommonArgs),
    /// Spatial convergence study against a refined reference run.
    Converge(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file.
    config: PathBuf,
    /// Override the final time.
    #[arg(long)]
    t_end: Option<f64>,
    /// Override the output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Run everything on one thread.
    #[arg(long)]
    seedless_deterministic: bool,
}

impl CommonArgs {
    fn load(&self) -> hermite_vlasov::Result<RunConfig> {
        let mut cfg = RunConfig::from_path(&self.config)?;
        if let Some(t) = self.t_end {
            cfg.numerics.t_end = t;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output.dir = dir.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(args: &CommonArgs) -> hermite_vlasov::Result<()> {
    let cfg = args.load()?;
    let summary = app::run(&cfg, !args.seedless_deterministic)?;
    let r = &summary.final_record;
    println!(
        "t={} steps={} max_deviation={:e} E_l2={:e}",
        r.t, summary.steps, summary.max_deviation, r.e_l2
    );
    match summary.rate {
        Some(Ok(rate)) => println!("fitted rate {rate}"),
        Some(Err(e)) => eprintln!("rate fit failed: {e}"),
        None => {}
    }
    println!("wrote {}", summary.timeseries.display());
    Ok(())
}

fn converge(args: &CommonArgs) -> hermite_vlasov::Result<()> {
    let cfg = args.load()?;
    std::fs::create_dir_all(&cfg.output.dir)?;
    std::fs::write(cfg.output.dir.join(app::CONFIG_ECHO_FILE), cfg.to_toml())?;
    let rows = app::converge(&cfg, !args.seedless_deterministic)?;
    let path = cfg.output.dir.join(CONVERGENCE_FILE);
    app::write_convergence_csv(&rows, &path)?;
    for r in &rows {
        let order = r.order_c0.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into());
        println!(
            "P{} N={:<4} C0 error {:.3e} order {}",
            r.degree, r.n_cells, r.error_c0, order
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => run(a),
        Command::Converge(a) => converge(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
