#!/usr/bin/env python3
# Copyright 2026 The Segfuse Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent derivation of the frozen values in the acceptance suite.

Re-implements the SplitMix64 stream and the handful of per-pixel operations
the frozen cases need with numpy float32 arithmetic, then prints the values
pasted into tests/acceptance/acceptance.cpp. Shares no code with the engine.
"""

import struct
from fractions import Fraction

import numpy as np

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def unit(self):
        return np.float32(self.next() >> 40) * np.float32(2.0**-24)

    def below(self, n):
        return ((self.next() >> 32) * n) >> 32

    def chance(self, p):
        return self.unit() < np.float32(p)


def random_map(rng, h, w):
    return np.array([rng.unit() for _ in range(h * w)],
                    dtype=np.float32).reshape(h, w)


def random_labels(rng, h, w, classes):
    out = []
    for _ in range(h * w):
        rng.chance(0.0)  # the ignore draw is always consumed
        out.append(rng.below(classes))
    return np.array(out, dtype=np.uint16).reshape(h, w)


def fnv1a(data):
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & MASK
    return h


def map_digest(m):
    return fnv1a(m.astype("<f4").tobytes())


def label_digest(labels):
    h, w = labels.shape
    raw = b"LBL1" + struct.pack("<HHII", 1, 0, h, w)
    return fnv1a(raw + labels.astype("<u2").tobytes())


def iou(pred, truth, classes):
    out = []
    for c in range(classes):
        inter = int(np.sum((pred == c) & (truth == c)))
        union = int(np.sum((pred == c) | (truth == c)))
        out.append(Fraction(inter, union) if union else None)
    return out


def main():
    rng = SplitMix64(0)
    print("splitmix64 seed 0:", ", ".join(hex(rng.next()) for _ in range(3)))

    rng = SplitMix64(11)
    a, b = random_map(rng, 8, 8), random_map(rng, 8, 8)
    agg = np.maximum(np.maximum(np.float32(0), a * np.float32(0.6)),
                     b * np.float32(0.9))
    print("aggregate seed 11: %016x" % map_digest(agg))

    rng = SplitMix64(3)
    s, i = random_map(rng, 16, 16), random_map(rng, 16, 16)
    print("fuse seed 3: %016x" % map_digest(np.maximum(s, i)))

    rng = SplitMix64(5)
    maps = [random_map(rng, 8, 8) for _ in range(3)]
    print("reduce seed 5: %016x" % map_digest(np.maximum.reduce(maps)))

    rng = SplitMix64(9)
    stack = np.stack([random_map(rng, 16, 16) for _ in range(3)])
    labels = np.argmax(stack, axis=0).astype(np.uint16)  # first max wins
    best = np.max(stack, axis=0)
    labels[best < np.float32(0.2)] = 3
    print("argmax seed 9: %016x" % label_digest(labels))

    print("presence 0.37: %r %r" % (float(np.float32(0.5) * np.float32(0.37)),
                                    float(np.float32(1.0) * np.float32(0.37))))

    rng = SplitMix64(2)
    truth, pred = random_labels(rng, 8, 8, 2), random_labels(rng, 8, 8, 2)
    print("iou seed 2:", [str(v) for v in iou(pred, truth, 2)])

    rng = SplitMix64(4)
    truth, pred = random_labels(rng, 8, 8, 3), random_labels(rng, 8, 8, 3)
    per = iou(pred, truth, 3)
    defined = [v for v in per if v is not None]
    print("iou seed 4:", [str(v) for v in per],
          "miou", str(sum(defined) / len(defined)))


if __name__ == "__main__":
    main()
