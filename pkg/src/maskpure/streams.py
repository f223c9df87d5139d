"""Reproducible random streams keyed by (seed, purpose, index).

Every random draw in the package comes from a stream derived here, so a
result depends only on the key and never on the order in which trials or
copies are scheduled.
"""
import hashlib
import random


def rng_stream(seed: int, tag: str, *index: int) -> random.Random:
    key = repr((int(seed), str(tag)) + tuple(int(i) for i in index)).encode()
    digest = hashlib.blake2b(key, digest_size=16).digest()
    return random.Random(int.from_bytes(digest, "little"))
