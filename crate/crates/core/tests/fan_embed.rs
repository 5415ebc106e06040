use std::sync::Arc;

use bartool::bars::{find_uniform_bound, BarRep};
use bartool::fan_embed::{closure_image, phi, phi_modulus, psi, transfer_uniform_bound};
use bartool::instances::random::{nodes_up_to, random_dec_bar, random_fan, rng};
use bartool::trees::{level, Fan, KaryFan, Limits};
use rand::Rng;

#[test]
fn psi_inverts_phi_after_a_closing_zero() {
    for k in [2, 3, 4] {
        let t = KaryFan::new(k);
        for a in nodes_up_to(&t, 5) {
            let c = phi(&a);
            assert_eq!(psi(&c.child(0)).unwrap(), a);
            if let Some(init) = a.entries().split_last().map(|(_, init)| init) {
                assert_eq!(psi(&c).unwrap().entries(), init);
            }
        }
    }
}

#[test]
fn phi_modulus_reads_n_entries() {
    let lim = Limits::default();
    for k in [2, 3] {
        let t: Arc<dyn Fan> = Arc::new(KaryFan::new(k));
        let img = closure_image(t.clone());
        for n in 0..=3 {
            let m = phi_modulus(t.as_ref(), n, &lim).unwrap() as usize;
            for c in level(&img, m, &lim).unwrap() {
                let a = psi(&c).unwrap();
                assert!(a.len() >= n, "k={k} n={n} c={c}");
                assert!(t.member(&a));
                for bit in img.children(&c) {
                    let ext = psi(&c.child(bit)).unwrap();
                    assert_eq!(ext.prefix(n).unwrap(), a.prefix(n).unwrap());
                }
            }
        }
    }
}

#[test]
fn transfer_on_random_bars() {
    let lim = Limits::default();
    let mut r = rng(41);
    for i in 0..20 {
        let depth = r.random_range(1..=3);
        let t: Arc<dyn Fan> = Arc::new(random_fan(&mut r, 2, depth));
        let p = BarRep::Dec(random_dec_bar(&mut r, t.as_ref(), depth, 0.3).bar);
        let direct = find_uniform_bound(t.as_ref(), &p, 8, 0, &lim).unwrap();
        let moved = transfer_uniform_bound(t, &p, 24, 0, &lim).unwrap();
        assert!(moved.m >= direct.n, "instance {i}");
    }
}
