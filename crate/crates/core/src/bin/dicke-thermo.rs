fn main() {
    std::process::exit(dicke_thermo::runner::run(std::env::args_os()));
}
