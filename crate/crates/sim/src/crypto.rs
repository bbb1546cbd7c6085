use std::collections::BTreeSet;

use hqs_core::ProcessId;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Signature token. Only [`SignatureRegistry::sign`] creates valid ones;
/// the fields are private so protocol code cannot mint them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Signature {
    signer: ProcessId,
    digest: String,
}

impl Signature {
    pub fn signer(&self) -> ProcessId {
        self.signer
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// A syntactically well-formed token that was never issued. Used by
    /// adversaries to exercise verification.
    pub fn bogus(signer: ProcessId, digest: &str) -> Signature {
        Signature {
            signer,
            digest: digest.to_string(),
        }
    }
}

pub fn digest_of<T: Serialize + ?Sized>(payload: &T) -> String {
    let bytes = serde_json::to_vec(payload).expect("payload serializes");
    let out = Sha256::digest(&bytes);
    out.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Default, Clone)]
pub struct SignatureRegistry {
    issued: BTreeSet<(ProcessId, String)>,
    log: Vec<(ProcessId, String)>,
}

impl SignatureRegistry {
    pub fn sign<T: Serialize + ?Sized>(&mut self, signer: ProcessId, payload: &T) -> Signature {
        let digest = digest_of(payload);
        if self.issued.insert((signer, digest.clone())) {
            self.log.push((signer, digest.clone()));
        }
        Signature { signer, digest }
    }

    pub fn verify<T: Serialize + ?Sized>(&self, sig: &Signature, signer: ProcessId, payload: &T) -> bool {
        sig.signer == signer
            && sig.digest == digest_of(payload)
            && self.issued.contains(&(signer, sig.digest.clone()))
    }

    /// Sign events not yet drained into the trace.
    pub(crate) fn drain_log(&mut self) -> Vec<(ProcessId, String)> {
        std::mem::take(&mut self.log)
    }

    pub fn was_issued(&self, signer: ProcessId, digest: &str) -> bool {
        self.issued.contains(&(signer, digest.to_string()))
    }
}
