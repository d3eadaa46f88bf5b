"""Regenerate the shipped UCC3 ansatz (src/himit/data/ucc3.json).

Reference |1100> followed by three Pauli-gadget rotations exp(-i t P / 2):
slot 0 the double excitation XXXY, slots 1 and 2 the spin-conserving singles
Y Z X on qubits (0,1,2) and (1,2,3). Each gadget is a CX parity ladder, so
every CX appears twice on the same ordered pair.

    python tools/gen_ucc3.py > src/himit/data/ucc3.json
"""

import json
import math

GADGETS = [(0, "XXXY"), (1, "YZXI"), (2, "IYZX")]


def gadget(slot, pauli):
    ops, pre, post = [], [], []
    support = [q for q, c in enumerate(pauli) if c != "I"]
    for q in support:
        c = pauli[q]
        if c == "X":
            pre.append({"label": "H", "targets": [q]})
            post.append({"label": "H", "targets": [q]})
        elif c == "Y":
            pre.append({"label": "RX", "targets": [q], "fixed_angle": math.pi / 2})
            post.append({"label": "RX", "targets": [q], "fixed_angle": -math.pi / 2})
    ladder = [{"label": "CX", "targets": [a, b]} for a, b in zip(support, support[1:])]
    ops = pre + ladder
    ops.append({"label": "RZ", "targets": [support[-1]], "param_slot": slot})
    ops += ladder[::-1] + post
    return ops


ops = [{"label": "X", "targets": [0]}, {"label": "X", "targets": [1]}]
for slot, p in GADGETS:
    ops += gadget(slot, p)
for op in ops:
    op["inverted"] = False
print(json.dumps({"n_qubits": 4, "ops": ops}, indent=1))
