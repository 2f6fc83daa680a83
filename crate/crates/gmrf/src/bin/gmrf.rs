fn main() {
    std::process::exit(gmrf::cli::main_exit_code());
}
