"""Actor-scoped random streams.

A stream's seed is ``splitmix64(master_seed ^ splitmix64(code))`` where
``code`` is the actor id's stable 64-bit encoding. SplitMix64 is a bijection
on 64-bit integers, so distinct actors get distinct seeds under one master
seed and every actor's seed changes with the master seed. The seed drives a
numpy PCG64 generator.
"""
import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class RngStream:
    def __init__(self, seed: int):
        self.seed = seed
        self.generator = np.random.Generator(np.random.PCG64(seed))

    def random(self) -> float:
        return float(self.generator.random())

    def normal(self, sigma: float) -> float:
        if sigma <= 0:
            return 0.0
        return float(self.generator.normal(0.0, sigma))

    def binomial(self, n: int, p: float) -> int:
        return int(self.generator.binomial(n, p))


def actor_rng(master_seed: int, actor_id) -> RngStream:
    code = actor_id.code if hasattr(actor_id, "code") else int(actor_id)
    seed = splitmix64((master_seed & MASK64) ^ splitmix64(code & MASK64))
    return RngStream(seed)
