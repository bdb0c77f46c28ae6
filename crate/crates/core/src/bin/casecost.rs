fn main() -> std::process::ExitCode {
    casecost::cli::main()
}
