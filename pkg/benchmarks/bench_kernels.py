"""Benchmark the numba kernels against the pure-numpy fallback.

Times the fused attention and layer-norm kernels (forward and backward) at
a few sizes, then a full model loss+backward step.  The numba path is
warmed before timing so JIT compilation is excluded.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from mcner import backend
from mcner import kernels_numba, kernels_numpy
from mcner.catalog import EntityCatalog
from mcner.corpus import sentence_from_pairs
from mcner.encoder import EncoderConfig
from mcner.hrca import HrcaConfig
from mcner.model import McModel, ModelConfig, build_vocabulary
from mcner.reconstruct import reconstruct

MODULES = {"numpy": kernels_numpy, "numba": kernels_numba}


def time_fn(fn, repeats):
    fn()  # warmup (JIT compile / cache load)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def bench_attention(repeats):
    rng = np.random.default_rng(0)
    print(f"\n{'attention fwd+bwd':<28}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for n_q, n_k, width, heads in [(8, 8, 64, 8), (32, 32, 64, 8), (64, 64, 128, 16), (16, 16, 512, 16)]:
        q = rng.normal(size=(n_q, width))
        k = rng.normal(size=(n_k, width))
        v = rng.normal(size=(n_k, width))
        d_out = rng.normal(size=(n_q, width))
        times = {}
        for name, mod in MODULES.items():
            def step(mod=mod):
                ctx, attn = mod.mha_forward(q, k, v, heads)
                mod.mha_backward(d_out, q, k, v, attn, heads)
            times[name] = time_fn(step, repeats)
        label = f"q{n_q} k{n_k} w{width} h{heads}"
        print(f"{label:<28}{times['numpy']*1e6:>10.1f}us{times['numba']*1e6:>10.1f}us"
              f"{times['numpy']/times['numba']:>9.2f}x")


def bench_layer_norm(repeats):
    rng = np.random.default_rng(1)
    print(f"\n{'layer norm fwd+bwd':<28}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for n, d in [(16, 64), (64, 64), (256, 128)]:
        x = rng.normal(size=(n, d))
        gamma = rng.uniform(0.5, 1.5, size=d)
        beta = rng.normal(size=d)
        dy = rng.normal(size=(n, d))
        times = {}
        for name, mod in MODULES.items():
            def step(mod=mod):
                y, mean, rstd = mod.layer_norm_forward(x, gamma, beta, 1e-5)
                mod.layer_norm_backward(dy, x, gamma, mean, rstd)
            times[name] = time_fn(step, repeats)
        label = f"rows {n} width {d}"
        print(f"{label:<28}{times['numpy']*1e6:>10.1f}us{times['numba']*1e6:>10.1f}us"
              f"{times['numpy']/times['numba']:>9.2f}x")


def bench_model_step(repeats):
    rng = np.random.default_rng(2)
    catalog = EntityCatalog((("PER", "names of people"),
                             ("LOC", "names of places"),
                             ("ORG", "names of organizations")), "name_only", "bench")
    words = [f"tok{i}" for i in range(40)]
    sent = sentence_from_pairs(
        (words[int(rng.integers(40))], tag)
        for tag in ["B-PER", "O", "B-LOC", "O", "O", "B-ORG", "O", "O"])
    config = ModelConfig(EncoderConfig(width=64, n_layers=2, n_heads=4, max_len=128),
                         HrcaConfig(n_heads=8, head_dim=8), "full")
    vocab = build_vocabulary([sent], catalog, "full")
    triplet = reconstruct(sent, catalog)
    print(f"\n{'full model loss+backward':<28}{'per step':>12}")
    restore = backend.active_backend()
    for name in ("numpy", "numba"):
        backend.set_backend(name)
        model = McModel(config, vocab, catalog, seed=0)

        def step():
            model.zero_grad()
            loss = model.loss_for(sent, triplet)
            loss.backward()

        t = time_fn(step, repeats)
        print(f"{name:<28}{t*1e3:>10.2f}ms")
    backend.set_backend(restore)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()
    print(f"default backend: {backend.active_backend()}")
    bench_attention(args.repeats)
    bench_layer_norm(args.repeats)
    bench_model_step(max(20, args.repeats // 4))


if __name__ == "__main__":
    main()
