fn main() {
    std::process::exit(soliton_lab::cli::main_from_env());
}
