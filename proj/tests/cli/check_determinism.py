"""Same command line twice (including seed) must give byte-identical artifacts."""

import filecmp
import os
import subprocess
import sys
import tempfile

QASDYN, DATA = sys.argv[1:3]
d = lambda name: os.path.join(DATA, name)


def run_twice(make_args, artifacts):
    outs = []
    for k in range(2):
        tmp = tempfile.mkdtemp(prefix=f"run{k}_")
        p = subprocess.run([QASDYN, *make_args(tmp, k)], capture_output=True, timeout=600)
        outs.append((p.returncode, p.stdout, [os.path.join(tmp, a) for a in artifacts]))
    (c0, s0, f0), (c1, s1, f1) = outs
    return c0 == c1 and s0 == s1 and all(filecmp.cmp(a, b, shallow=False) for a, b in zip(f0, f1))


cases = {
    "verify-all ref_t3": (
        lambda t, k: ["--json", "verify-all", "--family", d("ref_t3.family"), "--n", "4", "--seed", "11",
                   "--out", os.path.join(t, "report.json")],
        ["report.json"],
    ),
    "green-grid workers": (
        # The worker count differs between the two runs; the output must not.
        lambda t, k: ["green-grid", "--map", d("ref_t3.map"), "--base", "0.2,1,0.5", "--e1", "1,0,0", "--e2", "0,i,0",
                   "--res", "24", "--workers", str(1 + 2 * k),
                   "--csv", os.path.join(t, "g.csv"), "--pgm", os.path.join(t, "g.pgm")],
        ["g.csv", "g.pgm", "g.pgm.json"],
    ),
    "family-gen": (
        lambda t, k: ["family-gen", "--seed", "42", "--deg-p", "2", "--deg-q", "2", "--out", os.path.join(t, "f.family")],
        ["f.family"],
    ),
}

bad = 0
for name, (args, artifacts) in cases.items():
    ok = run_twice(args, artifacts)
    bad += not ok
    print(("identical " if ok else "DIFFERENT ") + name)
sys.exit(1 if bad else 0)
