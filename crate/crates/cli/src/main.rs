fn main() {
    std::process::exit(euler_chaos_cli::dispatch(std::env::args_os()));
}
