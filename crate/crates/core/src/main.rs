fn main() {
    std::process::exit(siegel_lab::cli::run(std::env::args_os()));
}
