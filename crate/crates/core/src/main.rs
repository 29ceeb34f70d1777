fn main() {
    std::process::exit(loewner_witt::cli::run(std::env::args_os()));
}
