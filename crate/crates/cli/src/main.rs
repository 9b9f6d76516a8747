fn main() {
    std::process::exit(mhd_rt_cli::run_command(std::env::args_os()));
}
