"""Smoke test for the simdix_py extension module."""

import os
import random
import tempfile

import simdix_py as sx


def main():
    x = sx.generate(10_000, 1 << 24, "clusterdata", seed=1)
    assert x == sorted(set(x)) and len(x) == 10_000
    for codec in sx.codecs():
        data = sx.encode(codec, x)
        assert sx.decode(codec, data, len(x)) == x, codec
    print("codecs ok:", len(sx.codecs()), "bits/int s4-bp128-d4 =",
          round(sx.compressed_bits_per_int("s4-bp128-d4", x), 3))

    small, large = sx.generate_pair(200, 50_000, 1 << 22, "third", "uniform", seed=2)
    want = sorted(set(small) & set(large))
    for algo in sx.algorithms():
        assert sx.intersect(small, large, algo) == want, algo
    assert sx.svs([large, small, small], "v1") == want
    print("intersections ok:", len(want), "common values")

    rng = random.Random(3)
    universe = 5_000
    postings = [sorted(rng.sample(range(universe), k)) for k in (4000, 900, 120, 7)]
    ix = sx.HybridIndex(postings, universe, b=8, codec="s4-fastpfor-d1", parts=4, skip_block=32)
    q = [0, 1, 2]
    want = sorted(set(postings[0]) & set(postings[1]) & set(postings[2]))
    assert ix.query(q) == want
    assert ix.query(q, skipmode=True) == want
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "ix.bin")
        ix.save(path)
        back = sx.HybridIndex.load(path)
    assert back.query(q) == want
    assert sx.HybridIndex.from_bytes(ix.to_bytes()).query([3]) == postings[3]
    print("index ok:", ix, ix.stats()["bits_per_int"])

    try:
        sx.encode("nope", x)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown codec accepted")
    print("all smoke tests passed")


if __name__ == "__main__":
    main()
