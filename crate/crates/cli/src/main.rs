use clap::Parser;
use paradox_cli::{run, ExitStatus, RunConfig};

fn main() {
    let config = RunConfig::parse();
    match run(&config) {
        Ok(output) => {
            println!("{}", output.render(config.format));
            if output.status == ExitStatus::InfeasibleCalibration {
                eprintln!("error: effect calibration is infeasible");
            }
            std::process::exit(output.status.code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(ExitStatus::InputError.code());
        }
    }
}
