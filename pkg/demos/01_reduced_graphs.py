"""Every reduced graph of a small complete network still has a node that reaches all others.

Removing b Byzantine nodes and then b incoming edges per survivor leaves
C(2b, b) ** (2b + 1) possible graphs. For b <= 2 we can check all of them.
"""

import time

from relay_iabc import graph as gr

for b in (1, 2):
    start = time.perf_counter()
    count = ok = 0
    for rg in gr.enumerate_reduced_graphs(b):
        count += 1
        g = rg.graph
        ok += bool(gr.find_source_components(g)) and gr.max_outdegree(g)[1] >= b
    print(f"b={b}: {ok}/{count} reduced graphs have a source component "
          f"and a node with >= {b} out-edges ({time.perf_counter() - start:.2f}s)")

# Past b=2 the space explodes, so sample instead.
n = 3
print(f"b={n}: {gr.reduced_graph_count(n):,} reduced graphs; sampling 2000")
sample = list(gr.sample_reduced_graphs(n, 2000, seed=1))
print("all sampled graphs have a source component:",
      all(gr.find_source_components(rg.graph) for rg in sample))
