fn main() {
    std::process::exit(vring::cli::main_entry());
}
