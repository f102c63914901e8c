"""Compare the successor-expansion backends on a batch and on a full area search.

    python benchmarks/bench_kernels.py --states 20000 --length 12 --repeat 5
"""
import argparse
import time
import warnings

import numpy as np

from vankampen import kernels
from vankampen.families import G, w_word
from vankampen.oracles import SearchCaps, area_search, reduced_words

warnings.filterwarnings("ignore", message="The TBB threading layer")


def random_batch(rng, count, length):
    pool = list(reduced_words(2, length))
    pick = rng.choice(len(pool), size=count)
    words = np.array([pool[i] for i in pick], dtype=np.int8)
    return words, np.full(count, length, dtype=np.int32)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=20_000)
    ap.add_argument("--length", type=int, default=12)
    ap.add_argument("--max-len", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--search-m", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    words, lens = random_batch(rng, args.states, args.length)
    rels, rel_lens = kernels.pack_relators([r.letters for r in G(2).relators])
    codec = kernels.KeyCodec(2, args.max_len)

    variants = [("numpy", "numpy", False)]
    if kernels.HAS_NUMBA:
        variants += [("numba", "numba", False), ("numba-parallel", "numba", True)]
        # compile outside the timed region
        for _, backend, par in variants[1:]:
            kernels.expand(words[:2], lens[:2], rels, rel_lens, args.max_len, codec,
                           backend=backend, parallel=par)

    print(f"expand: {args.states} words of length {args.length}, best of {args.repeat}")
    reference = None
    base = None
    for name, backend, par in variants:
        run = lambda: kernels.expand(words, lens, rels, rel_lens, args.max_len, codec,
                                     backend=backend, parallel=par)
        keys = run()
        if reference is None:
            reference = keys
        assert np.array_equal(keys, reference), f"{name} disagrees with numpy"
        t = best_of(run, args.repeat)
        base = base or t
        print(f"  {name:<15} {t * 1e3:9.2f} ms   x{base / t:6.1f}")

    w = w_word(args.search_m)
    caps = SearchCaps(20, 16, 5_000_000)
    print(f"area search for w_{args.search_m} under {caps}")
    base = None
    for name, backend, par in variants:
        res = area_search(G(2), w, caps, backend=backend, parallel=par)
        t = best_of(lambda: area_search(G(2), w, caps, backend=backend, parallel=par),
                    max(1, args.repeat // 2))
        base = base or t
        print(f"  {name:<15} {t:9.3f} s    x{base / t:6.1f}   cost {res.witness.cost}")


if __name__ == "__main__":
    main()
