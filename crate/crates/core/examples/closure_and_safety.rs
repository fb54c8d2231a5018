//! Safety and closure of sets of linear forms over the block layout.

use bclique::f2::{closure, is_safe, safety_report, Layout, LinearForm};

fn main() {
    // k = 3 blocks of 2 bits: variable 2i + j is bit j of block i
    let l = Layout::new(3, 2);
    let form = |vars: &[usize]| LinearForm::from_vars(l.dims(), vars.iter().copied());
    let cases = [
        ("x00", vec![form(&[0])]),
        ("x00, x01", vec![form(&[0]), form(&[1])]),
        ("x00, x01, x10", vec![form(&[0]), form(&[1]), form(&[2])]),
        ("x00 + x10, x01 + x20", vec![form(&[0, 2]), form(&[1, 4])]),
    ];
    for (name, forms) in &cases {
        let rep = safety_report(&l, forms);
        let cl: Vec<usize> = closure(&l, forms).iter().collect();
        println!("{name:<22} rank {} safe {:<5} closure {cl:?}", rep.rank, is_safe(&l, forms));
    }
}
