fn main() {
    std::process::exit(bmstab::run(std::env::args_os()));
}
