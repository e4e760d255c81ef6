use cutjoin_core::elsv::*;
use cutjoin_core::hurwitz::*;
fn main() {
    let conn = hurwitz_connected(15, 30);
    match elsv_solve(0, 7, &conn) {
        Ok(t) => println!("ok {} entries", t.len()),
        Err(e) => println!("err: {e}"),
    }
    // try to see where rank stalls: print hurwitz numbers for the first tuples
    for tuple in [vec![1u32; 7], {
        let mut v = vec![1; 6];
        v.push(2);
        v
    }] {
        let p = Profile::new(0, tuple.clone());
        println!(
            "{:?} m={} h={:?}",
            tuple,
            p.transpositions(),
            hurwitz_number(&conn, &p).map(|r| r.to_string())
        );
    }
}
