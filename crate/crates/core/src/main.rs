fn main() {
    std::process::exit(ou_epr::cli::main());
}
