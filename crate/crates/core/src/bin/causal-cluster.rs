fn main() {
    std::process::exit(causal_cluster::cli::run(std::env::args_os()));
}
