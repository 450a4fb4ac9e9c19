use schwarzian::inequalities::appendix_suite;

fn main() -> schwarzian::Result<()> {
    for r in appendix_suite(0)? {
        println!("{:<32} constant {:>8.4}  required {:>10.6}  points {:>7}  violations {}", r.name, r.constant, r.required, r.points, r.violations);
    }
    Ok(())
}
