//! Messages, the only thing flows exchange.

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::FlowError;
use crate::value::{canonical_bytes, Payload};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn fresh() -> Self {
                Self(uuid::Uuid::new_v4().to_string())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

id_type!(
    /// Identifies one message within a run.
    MessageId
);
id_type!(
    /// Identifies one flow instance.
    InstanceId
);

/// An immutable unit of information passed between flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    id: MessageId,
    created_at: DateTime<Utc>,
    created_by: InstanceId,
    payload: Payload,
    parents: Vec<MessageId>,
}

impl Message {
    pub fn id(&self) -> &MessageId {
        &self.id
    }

    pub fn created_at(&self) -> DateTime<Utc> {
        self.created_at
    }

    pub fn created_by(&self) -> &InstanceId {
        &self.created_by
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn parents(&self) -> &[MessageId] {
        &self.parents
    }

    pub fn into_payload(self) -> Payload {
        self.payload
    }

    /// Canonical byte serialization (sorted keys, compact).
    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        canonical_bytes(self)
    }
}

/// Packages a payload into a fresh message.
pub fn package_input(
    payload: Payload,
    created_by: &InstanceId,
    parents: Vec<MessageId>,
) -> Result<Message, FlowError> {
    if payload.keys().any(|k| k.is_empty()) {
        return Err(FlowError::EmptyPayloadKey);
    }
    Ok(Message {
        id: MessageId::fresh(),
        created_at: Utc::now(),
        created_by: created_by.clone(),
        payload,
        parents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payload;

    #[test]
    fn package_copies_fields() {
        let root = InstanceId::from("root");
        let msg = package_input(payload! {"a" => 1i64}, &root, vec![]).unwrap();
        assert_eq!(msg.payload(), &payload! {"a" => 1i64});
        assert!(msg.parents().is_empty());
        assert_eq!(msg.created_by(), &root);
    }

    #[test]
    fn empty_key_is_rejected() {
        let root = InstanceId::from("root");
        let err = package_input(payload! {"" => 1i64}, &root, vec![]).unwrap_err();
        assert!(matches!(err, FlowError::EmptyPayloadKey));
    }

    #[test]
    fn successive_ids_differ() {
        let root = InstanceId::from("root");
        let a = package_input(Payload::new(), &root, vec![]).unwrap();
        let b = package_input(Payload::new(), &root, vec![]).unwrap();
        assert_ne!(a.id(), b.id());
    }

    #[test]
    fn serialization_is_stable() {
        let root = InstanceId::from("root");
        let msg = package_input(payload! {"z" => "1", "a" => 2i64}, &root, vec![]).unwrap();
        let first = msg.to_canonical_bytes();
        let clone = msg.clone();
        assert_eq!(first, clone.to_canonical_bytes());
        let back: Message = serde_json::from_slice(&first).unwrap();
        assert_eq!(back, msg);
    }
}
