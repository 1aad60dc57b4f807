fn main() {
    std::process::exit(isodg::cli::main_entry());
}
