"""Decentralized sequencer committee: replicated state machine and friends."""

from .blocks import (
    Batch,
    BatchBuilder,
    BatchHeader,
    SequencerBlock,
    WireBlock,
    build_batch,
    compress,
    decompress,
    genesis_block,
    parse_block_stream,
    serialize_block,
)
from .crypto import MockThresholdScheme, sha256, sign_digest, tx_hash, verify_signature
from .l1 import DelayedMsg, ForceIncludeError, L1Stub, delayed_plaintext
from .merkle import MerkleAccumulator, leaf_hash, node_hash
from .messages import (
    BatchSignature,
    BlockSignature,
    DecryptionShare,
    EncTx,
    LocalTimestamp,
    Msg,
    NewEpoch,
    Recover,
    StateHash,
    decode_message,
    encode_message,
)
from .state import (
    CoreState,
    PendingRecord,
    Sequencer,
    adjusted_timestamp,
    encode_state,
    pack_user_tx,
    parse_user_tx,
    state_digest,
    submit,
    submit_delayed,
)
from .timestamps import TimestampIssuer, TimestampTriple

__all__ = [
    "Batch",
    "BatchBuilder",
    "BatchHeader",
    "BatchSignature",
    "BlockSignature",
    "CoreState",
    "DecryptionShare",
    "DelayedMsg",
    "EncTx",
    "ForceIncludeError",
    "L1Stub",
    "LocalTimestamp",
    "MerkleAccumulator",
    "MockThresholdScheme",
    "Msg",
    "NewEpoch",
    "PendingRecord",
    "Recover",
    "Sequencer",
    "SequencerBlock",
    "StateHash",
    "TimestampIssuer",
    "TimestampTriple",
    "WireBlock",
    "adjusted_timestamp",
    "build_batch",
    "compress",
    "decode_message",
    "decompress",
    "delayed_plaintext",
    "encode_message",
    "encode_state",
    "genesis_block",
    "leaf_hash",
    "node_hash",
    "pack_user_tx",
    "parse_block_stream",
    "parse_user_tx",
    "serialize_block",
    "sha256",
    "sign_digest",
    "state_digest",
    "submit",
    "submit_delayed",
    "tx_hash",
    "verify_signature",
]
