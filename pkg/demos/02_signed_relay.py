"""Signed relay on a directed ring: values flood hop by hop, forgeries bounce.

Each node keeps one signed entry per origin. After D iterations (the ring's
diameter) every node holds every origin's value for the current phase.
"""

from relay_iabc import graph as gr
from relay_iabc.protocol import Message, RelayNode, SignedEntry
from relay_iabc.signatures import KeyDirectory, keygen

m, b = 5, 1
ring = gr.directed_cycle(m)
D = gr.diameter(ring)
keys = {i: keygen(42, i) for i in range(m)}
directory = KeyDirectory({i: k.verification_key for i, k in keys.items()})
nodes = [RelayNode(i, m, b, keys[i], directory, D, initial_value=10.0 * i) for i in range(m)]

for t in range(D):
    out = [n.outgoing() for n in nodes]
    for n in nodes:
        n.ingest([(s, out[s]) for s in ring.in_neighbors(n.id)])
    held = [sum(e is not None for e in n.entries) for n in nodes]
    print(f"iteration {t}: entries held per node {held}")

update = nodes[0].phase_update()
print(f"node 0 trims {[v for _, v, _ in update.values]} -> {update.new_value}")

# a relay that changes a value in transit is caught by the tag check
genuine = nodes[1].outgoing().entries[0]
tampered = SignedEntry(genuine.payload._replace(value=1e6), genuine.tag)
victim = nodes[2]
victim.ingest([(1, Message([tampered]))])
print("tampered entry rejected:", victim.rejections == 1)
