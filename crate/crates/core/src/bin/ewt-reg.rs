fn main() {
    std::process::exit(ewt_reg::cli::run(std::env::args_os()));
}
