fn main() {
    if let Err(e) = fedransel::cli::run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
