/// Greedy weak design for `m` sets over an `l x c` grid (seed bit `j*c + v`
/// is grid cell `(j, v)`). Candidates are the lines `v = a*j + b mod c`,
/// tried with `a` outer and `b` inner; a line is kept when it meets every
/// kept line in at most one cell. `c` grows until `m` lines fit.
///
/// Returns `c` and the sets, each listing one seed position per row `j`.
pub fn weak_design(l: usize, m: usize) -> (usize, Vec<Vec<usize>>) {
    assert!(l > 0 && m > 0);
    let mut c = 1;
    loop {
        let mut kept: Vec<Vec<usize>> = Vec::new();
        'lines: for a in 0..c {
            for b in 0..c {
                let set: Vec<usize> = (0..l).map(|j| j * c + (a * j + b) % c).collect();
                let fits = kept
                    .iter()
                    .all(|k| k.iter().zip(&set).filter(|(x, y)| x == y).count() <= 1);
                if fits {
                    kept.push(set);
                    if kept.len() == m {
                        break 'lines;
                    }
                }
            }
        }
        if kept.len() == m {
            return (c, kept);
        }
        c += 1;
    }
}
