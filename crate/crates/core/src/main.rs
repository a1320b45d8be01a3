use clap::error::ErrorKind;
use clap::Parser;

use ssfgen::cli::{self, Cli};

fn fail(msg: &str) -> ! {
    eprintln!("error: {}", msg.replace('\n', " "));
    std::process::exit(1);
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            fail("missing subcommand (eval, max-as, acf-check or gen); see --help")
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            fail(first.trim_start_matches("error:").trim())
        }
    };
    if let Err(e) = cli::run(&cli) {
        fail(&e.to_string());
    }
}
