use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::crypto::group::GroupParams;
use crate::crypto::tpf::scalar_bytes;
use crate::crypto::{
    tpf_keygen, tpf_reckeygen, tur_keygen, tur_setup, ObjectKey, PaillierKeyPair,
    PaillierPublicKey, PartialDecKey, ReEncKey, ShareIndex, TagKey, TpfKey,
};
use crate::error::Result;
use crate::index::packing::{PackingParams, DEFAULT_SLOT_BITS};
use crate::spatial::GridSpec;

/// Public system parameters shared by every party.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub group: GroupParams,
    pub grid: GridSpec,
    pub paillier_bits: u64,
    pub slot_bits: u8,
}

impl SystemConfig {
    pub fn new(grid: GridSpec, paillier_bits: u64) -> Self {
        Self {
            group: GroupParams::ristretto255(),
            grid,
            paillier_bits,
            slot_bits: DEFAULT_SLOT_BITS,
        }
    }

    pub fn bits(&self) -> u8 {
        self.grid.bits()
    }
}

/// What the data owner keeps after setup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnerKeys {
    pub k_m: TpfKey,
    pub paillier: PaillierKeyPair,
    pub k_t: TagKey,
    pub k_o: ObjectKey,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientKeys {
    pub k_u: TpfKey,
    pub r1: ReEncKey,
    pub r2: ReEncKey,
    pub k_t: TagKey,
    pub k_o: ObjectKey,
    pub k_p: TagKey,
    pub pk: PaillierPublicKey,
}

impl ClientKeys {
    /// Scalar encodings of `r1`, `r2`, which also drive the tag chain.
    pub fn chain_inputs(&self, group: &GroupParams) -> (Vec<u8>, Vec<u8>) {
        (
            scalar_bytes(group, self.r1.scalar()),
            scalar_bytes(group, self.r2.scalar()),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerKeys {
    pub side: ShareIndex,
    pub pk: PaillierPublicKey,
    /// `r1` at the first server, `r2` at the second.
    pub r: ReEncKey,
    pub d: PartialDecKey,
    pub rk_u_to_m: ReEncKey,
    pub k_p: TagKey,
}

impl ServerKeys {
    pub fn chain_input(&self, group: &GroupParams) -> Vec<u8> {
        scalar_bytes(group, self.r.scalar())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMaterial {
    pub owner: OwnerKeys,
    pub client: ClientKeys,
    pub servers: [ServerKeys; 2],
}

/// Generates every key and decides who receives which.
pub fn setup<R: RngCore + CryptoRng>(config: &SystemConfig, rng: &mut R) -> Result<KeyMaterial> {
    let group = &config.group;
    let paillier = tur_setup(config.paillier_bits, rng)?;
    // fail early on an unusable slot width
    PackingParams::for_key(&paillier.public, config.slot_bits)?;
    let (d1, d2) = tur_keygen(&paillier, rng);
    let k_m = tpf_keygen(group, rng);
    let k_u = tpf_keygen(group, rng);
    let r1 = ReEncKey::random(group, rng);
    let r2 = ReEncKey::random(group, rng);
    let k_t = TagKey::generate(rng);
    let k_o = ObjectKey::generate(rng);
    let k_p = TagKey::generate(rng);
    let rk_u_to_m = tpf_reckeygen(group, &k_u, &k_m);
    let pk = paillier.public.clone();
    let servers = [(ShareIndex::One, &r1, d1), (ShareIndex::Two, &r2, d2)].map(|(side, r, d)| {
        ServerKeys {
            side,
            pk: pk.clone(),
            r: r.clone(),
            d,
            rk_u_to_m: rk_u_to_m.clone(),
            k_p: k_p.clone(),
        }
    });
    Ok(KeyMaterial {
        owner: OwnerKeys {
            k_m,
            paillier,
            k_t: k_t.clone(),
            k_o: k_o.clone(),
        },
        client: ClientKeys {
            k_u,
            r1,
            r2,
            k_t,
            k_o,
            k_p,
            pk,
        },
        servers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{tpf_reenc, tpf_rnd, tur_dec, tur_enc, tur_pdec};
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn distributed_keys_fit_together() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let config = SystemConfig::new(GridSpec::unit(3).unwrap(), 512);
        let km = setup(&config, &mut rng).unwrap();
        let g = &config.group;
        let t = tpf_rnd(g, &km.client.k_u, b"term");
        let at_server = tpf_reenc(g, &t, &km.servers[0].rk_u_to_m).unwrap();
        assert_eq!(at_server, tpf_rnd(g, &km.owner.k_m, b"term"));
        let c = tur_enc(&BigUint::from(42u32), &km.client.pk, &mut rng).unwrap();
        let pd = tur_pdec(&c, &km.servers[1].d, &km.servers[1].pk).unwrap();
        assert_eq!(tur_dec(&pd, &km.servers[0].d, &km.servers[0].pk).unwrap(), 42u32.into());
        assert_eq!(km.servers[0].r, km.client.r1);
        assert_eq!(km.servers[1].r, km.client.r2);
    }

    #[test]
    fn same_seed_same_keys() {
        let config = SystemConfig::new(GridSpec::unit(3).unwrap(), 512);
        let a = setup(&config, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        let b = setup(&config, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
