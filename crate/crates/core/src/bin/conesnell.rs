fn main() {
    std::process::exit(conesnell::cli::run(std::env::args_os()));
}
