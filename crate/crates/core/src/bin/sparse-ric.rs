fn main() {
    std::process::exit(sparse_ric::harness::cli::run(std::env::args_os()));
}
