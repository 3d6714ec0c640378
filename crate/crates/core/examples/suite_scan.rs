use std::time::Instant;

use fxy::certify::{certify_suite, split_range, CertifyOptions, Status};

fn main() {
    let opts = CertifyOptions::default();
    let start = Instant::now();
    let mut worst = 0;
    let mut bad = 0;
    for c in split_range(-0.99, -0.01, 98) {
        let certs = certify_suite(c, &opts).expect("suite runs");
        for cert in &certs {
            worst = worst.max(cert.max_depth_used);
            if cert.status != Status::Certified {
                bad += 1;
                println!("{}", cert.to_json_line());
                for p in &cert.parts {
                    if p.status != Status::Certified {
                        println!("  part {} {:?} depth {} leaves {}", p.name, p.status, p.depth, p.leaves);
                    }
                }
            }
        }
    }
    println!("bad {bad}, worst depth {worst}, {:.1?}", start.elapsed());
}
