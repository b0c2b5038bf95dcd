fn main() {
    std::process::exit(sobolev_ball::cli::run(std::env::args_os()));
}
