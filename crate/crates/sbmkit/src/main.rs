fn main() {
    sbmkit::cli::init_thread_pool();
    std::process::exit(sbmkit::cli::run(std::env::args_os()));
}
