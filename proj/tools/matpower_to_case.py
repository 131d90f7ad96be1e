#!/usr/bin/env python3
"""Convert a PYPOWER/MATPOWER case into the plain-text case and measurement files.

Usage:
    python3 tools/matpower_to_case.py case118 data/ieee118

Writes <prefix>.case (topology), <prefix>.meas (all flows plus one injection
meter per load and per generator) and <prefix>_bus.meas (all flows plus one
injection meter per bus). Requires the ``pypower`` package.
"""
import importlib
import sys

SIGMA = 0.01


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__)
        return 2
    name, prefix = sys.argv[1], sys.argv[2]
    ppc = getattr(importlib.import_module(f"pypower.{name}"), name)()
    bus, branch, gen = ppc["bus"], ppc["branch"], ppc["gen"]

    ids = [int(b[0]) for b in bus]
    if ids != list(range(1, len(ids) + 1)):
        raise SystemExit("bus numbers must be contiguous 1..N")
    slack = next(int(b[0]) for b in bus if int(b[1]) == 3)
    loads = [int(b[0]) for b in bus if b[2] != 0]
    gens = [int(g[0]) for g in gen]
    lines = [f"buses {len(ids)} slack {slack}"]
    for br in branch:
        lines.append(f"branch {int(br[0])} {int(br[1])} {float(br[3])!r}")
    lines += [f"load {b}" for b in loads]
    lines += [f"gen {b}" for b in gens]
    with open(prefix + ".case", "w") as f:
        f.write(f"# {name}: {len(ids)} buses, {len(branch)} branches, "
                f"{len(loads)} loads, {len(gens)} generators; x in p.u. on 100 MVA\n")
        f.write("\n".join(lines) + "\n")

    flows = [f"flow {k + 1} {SIGMA}" for k in range(len(branch))]
    with open(prefix + ".meas", "w") as f:
        f.write(f"# all flows + one injection meter per load and per generator\n")
        f.write("\n".join(flows + [f"inj {b} {SIGMA}" for b in loads + gens]) + "\n")
    with open(prefix + "_bus.meas", "w") as f:
        f.write(f"# all flows + one injection meter per bus\n")
        f.write("\n".join(flows + [f"inj {b} {SIGMA}" for b in ids]) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
