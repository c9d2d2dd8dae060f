//! The two building blocks on their own: relabeling a TPF label under a new
//! key, and splitting Paillier decryption across two servers.

use brasp_core::crypto::{
    tpf_keygen, tpf_reckeygen, tpf_reenc, tpf_rnd, tur_add, tur_dec, tur_enc, tur_keygen,
    tur_pdec, tur_reenc, PaillierKeyPair,
};
use brasp_core::protocol::SystemConfig;
use brasp_sim::fixtures::sample_grid;
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha20Rng::seed_from_u64(14);
    let group = SystemConfig::new(sample_grid(), 512).group;

    let k1 = tpf_keygen(&group, &mut rng);
    let k2 = tpf_keygen(&group, &mut rng);
    let label = tpf_rnd(&group, &k1, b"w4");
    let moved = tpf_reenc(&group, &label, &tpf_reckeygen(&group, &k1, &k2))?;
    assert_eq!(moved, tpf_rnd(&group, &k2, b"w4"));
    println!("relabel: {} -> {}", hex::encode(&label.as_bytes()[..8]), hex::encode(&moved.as_bytes()[..8]));

    let kp = PaillierKeyPair::generate(512, &mut rng)?;
    let pk = &kp.public;
    let (d1, d2) = tur_keygen(&kp, &mut rng);
    let a = tur_enc(&BigUint::from(20u32), pk, &mut rng)?;
    let b = tur_enc(&BigUint::from(22u32), pk, &mut rng)?;
    let sum = tur_reenc(&tur_add(pk, &a, &b), pk, &mut rng)?;
    let partial = tur_pdec(&sum, &d1, pk)?;
    let m = tur_dec(&partial, &d2, pk)?;
    println!("two-step decryption of Enc(20) + Enc(22) = {m}");
    assert_eq!(m, BigUint::from(42u32));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
