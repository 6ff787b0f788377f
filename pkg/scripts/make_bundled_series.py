"""Regenerate the bundled synthetic series (src/betarc/data/model2_synthetic.csv).

The series is a seeded simulation of the betaARC(1) model with
Manneville-Pomeau dynamics and cloglog mean link at the published
stored-energy estimates (nu=10.5798, alpha=-0.3653, phi1=0.7107, s=0.3706,
u0=0.423177621111067), length 196 = 190 fitting + 6 holdout rows.

Note: the process at these parameters is explosive (see README), so much of
the path sits at the upper boundary guard; the file documents the criterion
protocol rather than providing a well-behaved demo dataset.
"""

import pathlib

import numpy as np

from betarc.model import CLOGLOG, ModelSpec, ParamVector, simulate
from betarc.dynamics import MapSpec

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "betarc" / "data" / "model2_synthetic.csv"

spec = ModelSpec(map=MapSpec("mp", (0.3706,)), g=CLOGLOG, p=1)
gamma = ParamVector(nu=10.5798, alpha=-0.3653, phi=(0.7107,),
                    theta=(0.3706,), u0=0.423177621111067)
rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((1,))))
sample = simulate(spec, gamma, 196, rng)

OUT.parent.mkdir(parents=True, exist_ok=True)
with open(OUT, "w", encoding="utf-8") as fh:
    fh.write("y\n")
    for v in sample.y:
        fh.write(f"{float(v)!r}\n")
print(f"wrote {len(sample.y)} rows to {OUT}")
