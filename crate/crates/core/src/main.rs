fn main() {
    std::process::exit(stnn_ddi::cli::main());
}
