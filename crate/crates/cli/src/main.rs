fn main() {
    std::process::exit(unitheta::run(std::env::args_os()));
}
