fn main() -> std::process::ExitCode {
    tdiv::cli::main()
}
