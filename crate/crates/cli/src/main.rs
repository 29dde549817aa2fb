fn main() {
    if let Err(e) = rpp_cli::run(std::env::args().collect()) {
        eprintln!("rpp: {e}");
        std::process::exit(e.exit_code());
    }
}
