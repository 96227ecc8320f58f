fn main() {
    std::process::exit(hpmetric::cli::main());
}
