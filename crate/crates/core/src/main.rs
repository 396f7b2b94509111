fn main() -> std::process::ExitCode {
    qproc::cli::main()
}
