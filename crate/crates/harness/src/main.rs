fn main() {
    std::process::exit(lowrank_harness::cli::main());
}
