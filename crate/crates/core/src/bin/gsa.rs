fn main() {
    std::process::exit(gsa_core::cli::main_from_env());
}
