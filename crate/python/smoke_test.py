"""Builds the extension module and exercises it end to end.

    python3 python/smoke_test.py
"""

import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "tempsketch-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = os.path.join(ROOT, "target", "release", "libtempsketch_py.so")
    if not os.path.exists(lib):
        lib = lib.replace(".so", ".dylib")
    out = tempfile.mkdtemp()
    shutil.copy(lib, os.path.join(out, "tempsketch_py.so"))
    sys.path.insert(0, out)
    return out


def ring(n, chords):
    edges, times = [], []
    for i in range(n):
        edges.append((f"n{i}", f"n{(i + 1) % n}"))
        times.append(i)
    for i in range(chords):
        edges.append((f"n{i * 7 % n}", f"n{(i * 13 + 5) % n}"))
        times.append(100 + i)
    return edges, times


def main():
    workdir = build()
    import tempsketch_py as ts

    edges, times = ring(300, 200)
    g = ts.Graph.from_edges(edges, timestamps=times)
    assert g.num_nodes == 300 and g.is_temporal, g

    z = ts.embed(g, seed=5)
    assert (z.num_rows, z.num_bits) == (300, 128), z
    assert len(z.to_bytes()) == 300 * 16
    assert ts.embed(g, seed=5).to_bytes() == z.to_bytes()
    assert 0.0 <= z.similarity("n0", "n1") <= 1.0

    path = os.path.join(workdir, "z.txt")
    z.save(path)
    assert ts.Sketches.load(path).to_bytes() == z.to_bytes()

    bits = ts.simhash([1.0, 2.0, 0.0, 5.0], 16, seed=1)
    assert bits == ts.simhash([10.0, 20.0, 0.0, 50.0], 16, seed=1)

    dist = ts.transition_distribution(g, "n1", t_prev=0, policy="short")
    assert abs(sum(p for _, _, p in dist) - 1.0) < 1e-9

    perturbed, truth = ts.inject_replicas(g, fraction=0.2, seed=3)
    assert perturbed.num_nodes == 300 + len(truth) and truth

    pairs = z.candidate_pairs(band_bits=8)
    assert all(a != b for a, b in pairs)

    m = ts.compute_metrics([0.9, 0.8, 0.3, 0.1], [True, True, False, False])
    assert m["auc"] == 1.0 and m["f1"] == 1.0

    report = ts.evaluate(g, seed=2, fraction=0.2)
    assert 0.0 <= report["auc"] <= 1.0

    static = ts.Graph.from_edges([("a", "b"), ("b", "c")])
    try:
        ts.embed(static, policy="short")
    except ValueError as e:
        assert "walks" in str(e)
    else:
        raise AssertionError("temporal policy on a static graph should fail")

    print("smoke test passed:", g, z, f"auc={report['auc']:.3f}")


if __name__ == "__main__":
    main()
