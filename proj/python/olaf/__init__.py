"""Python access to the Olaf simulator.

Scenario and verifier configs are the same JSON files the `olaf` CLI reads;
every entry point accepts either a path or the JSON text itself.
"""

from ._olaf import (
    BoundTooLarge,
    ConfigError,
    DecodeError,
    EncodeError,
    StructuralError,
    avg_aom,
    decode_ack,
    decode_update,
    encode_ack,
    encode_update,
    jain_fairness,
    load_config,
    peak_aom,
    simulate,
    tx_probability,
    verify,
)

__all__ = [
    "BoundTooLarge",
    "ConfigError",
    "DecodeError",
    "EncodeError",
    "StructuralError",
    "avg_aom",
    "decode_ack",
    "decode_update",
    "encode_ack",
    "encode_update",
    "jain_fairness",
    "load_config",
    "peak_aom",
    "simulate",
    "tx_probability",
    "verify",
]
