fn main() -> std::process::ExitCode {
    vrpl_cli::run(std::env::args_os())
}
