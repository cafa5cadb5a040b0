use picalc::{bisimilar, depth_of, norm_of, parse, Lts, Mode, NameUniverse};

fn main() -> picalc::Result<()> {
    let q = parse("new z.a!z.0 | a?(x).x!a.0")?;
    println!("Q = {q}");
    println!("depth {} norm {:?}", depth_of(&q)?, norm_of(&q)?);

    let lts = Lts::build(&q, &NameUniverse::for_processes([&q]))?;
    for s in 0..lts.len() {
        for (a, t) in lts.edges(s) {
            println!("  {}  --{a}-->  {}", lts.process(s), lts.process(*t));
        }
    }

    let p = parse("x!y.0")?;
    let p2 = parse("tau.tau.x!y.0")?;
    println!("{p} ~ {p2}: {}", bisimilar(&p, &p2, Mode::Strong)?);
    println!("{p} ≈ {p2}: {}", bisimilar(&p, &p2, Mode::Weak)?);
    Ok(())
}
