use clap::{Parser, Subcommand};
use mapsp::harness::{
    emit_csv, emit_prediction_csv, emit_profile_csv, emit_schedule_csv, run_mse_sweep,
    run_prediction_sweep, selftest, ExperimentConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mapsp",
    version,
    about = "Multi-group adjustable phase-shift pilot simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo estimation sweep from a config file and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Also run the channel-prediction sweep, writing `<out>.prediction.csv`.
        #[arg(long, default_value_t = false)]
        prediction: bool,
    },
    /// Emit the interference profile of one basic-pilot pair as CSV.
    Profile {
        #[arg(long)]
        nc: usize,
        #[arg(long)]
        root_a: u64,
        #[arg(long, default_value_t = 0)]
        shift_a: usize,
        #[arg(long)]
        root_b: u64,
        #[arg(long, default_value_t = 0)]
        shift_b: usize,
        /// Use the prime-base cyclically extended construction.
        #[arg(long, default_value_t = false)]
        extended: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the pilot scheduler for the first grid point of a config.
    Schedule {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in oracle checks.
    Selftest,
}

fn run(cli: Cli) -> Result<(), mapsp::Error> {
    match cli.command {
        Command::Sweep { config, prediction } => {
            let cfg = ExperimentConfig::load(&config)?;
            let records = run_mse_sweep(&cfg)?;
            let out = PathBuf::from(&cfg.out);
            emit_csv(&records, &out)?;
            println!("wrote {} records to {}", records.len(), out.display());
            if prediction {
                let pred = run_prediction_sweep(&cfg)?;
                let pred_out = out.with_extension("prediction.csv");
                emit_prediction_csv(&pred, &pred_out)?;
                println!("wrote {} records to {}", pred.len(), pred_out.display());
            }
            Ok(())
        }
        Command::Profile {
            nc,
            root_a,
            shift_a,
            root_b,
            shift_b,
            extended,
            out,
        } => {
            emit_profile_csv(nc, root_a, shift_a, root_b, shift_b, extended, &out)?;
            println!("wrote profile to {}", out.display());
            Ok(())
        }
        Command::Schedule { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            emit_schedule_csv(&cfg, &out)?;
            println!("wrote schedule to {}", out.display());
            Ok(())
        }
        Command::Selftest => {
            let results = selftest();
            let mut ok = true;
            for (name, passed) in &results {
                println!("{} {name}", if *passed { "PASS" } else { "FAIL" });
                ok &= passed;
            }
            if ok {
                Ok(())
            } else {
                Err(mapsp::Error::InvalidConfig("selftest failures".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
