// scratch probe - will be removed
use magpix::matrix::sylvester_permutation_pool;
use magpix::scoring::local_score;

#[test]
fn probe_floor_survivors() {
    let pool = sylvester_permutation_pool(3).unwrap();
    let t = std::time::Instant::now();
    let mut survivors = 0usize;
    let mut hist = std::collections::BTreeMap::new();
    for m in &pool {
        let s = local_score(m).unwrap();
        *hist.entry((s * 64.0).round() as i64).or_insert(0usize) += 1;
        if s >= -0.2 {
            survivors += 1;
        }
    }
    println!("survivors: {survivors} / {} in {:?}", pool.len(), t.elapsed());
    println!("S_L numerator histogram (num = -s*64): {hist:?}");
}
