"""Compare the gmpy2 and fractions rational backends.

Each workload runs in a fresh interpreter per backend (the backend is fixed at
import time), and the script checks that both backends print identical output.

    python benchmarks/bench_backends.py            # quick workloads
    python benchmarks/bench_backends.py --full     # adds the full SU(2) pipeline
"""

import argparse
import os
import statistics
import subprocess
import sys

WORKLOADS = {
    "cyclic5": """
from diracgb.groebner import buchberger
from diracgb.ingest import parse_expression
from diracgb.poly import MonomialOrder, Ring, VariableTable, make_field
names = ["a", "b", "c", "d", "e"]
R = Ring(VariableTable(names, ["coordinate"] * 5), MonomialOrder.degrevlex(5), make_field(None))
F = ["a+b+c+d+e", "a*b+b*c+c*d+d*e+e*a", "a*b*c+b*c*d+c*d*e+d*e*a+e*a*b",
     "a*b*c*d+b*c*d*e+c*d*e*a+d*e*a*b+e*a*b*c", "a*b*c*d*e-1"]
G = buchberger([parse_expression(f, R) for f in F])
print(len(G.basis), G.basis[-1])
""",
    "su2_separate": """
from diracgb.analysis import analyze
from diracgb.cli import corpus_dir
from diracgb.ingest import load_model
from diracgb.report import build_report, to_json
an = analyze(load_model(corpus_dir() / "su2_lightcone.model"), "separate")
print(to_json(build_report(an, "separate")))
""",
    "su2_all": """
from diracgb.analysis import analyze
from diracgb.cli import corpus_dir
from diracgb.ingest import load_model
from diracgb.report import build_report, to_json
an = analyze(load_model(corpus_dir() / "su2_lightcone.model"))
print(to_json(build_report(an)))
""",
}

TIMER = """
import time
_t = time.perf_counter()
{body}
print("__elapsed__", time.perf_counter() - _t)
"""


def run(code, backend):
    env = dict(os.environ, DIRACGB_RATIONAL=backend)
    r = subprocess.run([sys.executable, "-c", TIMER.format(body=code)], env=env,
                       capture_output=True, text=True, check=True)
    out, _, tail = r.stdout.rpartition("__elapsed__")
    return out, float(tail)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--full", action="store_true", help="include the full SU(2) pipeline")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = [n for n in WORKLOADS if args.full or n != "su2_all"]
    print(f"{'workload':<14}{'gmpy2 [s]':>12}{'fraction [s]':>14}{'ratio':>8}  same output")
    for name in names:
        times, outs = {}, {}
        for backend in ("gmpy2", "fraction"):
            samples = []
            for _ in range(args.repeat):
                out, t = run(WORKLOADS[name], backend)
                samples.append(t)
            times[backend] = statistics.median(samples)
            outs[backend] = out
        same = outs["gmpy2"] == outs["fraction"]
        print(f"{name:<14}{times['gmpy2']:>12.2f}{times['fraction']:>14.2f}"
              f"{times['fraction'] / times['gmpy2']:>8.2f}  {same}")
        if not same:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
