fn main() {
    std::process::exit(hydroshear_sim::cli::main_with(std::env::args_os()));
}
