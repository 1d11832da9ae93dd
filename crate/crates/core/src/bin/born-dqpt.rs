fn main() {
    if let Err(e) = ctrlc::set_handler(born_dqpt::cancel::request) {
        eprintln!("warning: no interrupt handler: {e}");
    }
    std::process::exit(born_dqpt::cli::main_with_args(std::env::args_os()));
}
