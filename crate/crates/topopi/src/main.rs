fn main() {
    println!("topopi CLI placeholder");
}
