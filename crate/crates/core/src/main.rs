fn main() {
    std::process::exit(qubit_topo::cli::run(std::env::args_os()));
}
