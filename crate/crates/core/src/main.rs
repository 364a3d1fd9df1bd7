fn main() -> std::process::ExitCode {
    mcnf::harness::cli::main()
}
