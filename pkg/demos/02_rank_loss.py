"""Information lost by keeping only the ranked list over GF(64).

For each channel Es/N0 the script fits the rank-position post-processor on
a training stream and reports, on an independent evaluation stream,
I(X;Y), the mixed-information lower bound on I(X;Z) and their difference.
Both bitwise BPSK (six binary symbols per GF(64) symbol) and 64-QAM are run.

    python3 demos/02_rank_loss.py [n_samples]
"""

import sys

import numpy as np

from rankexit.exitlab import SweepConfig, rank_loss_sweep
from rankexit.galois import FieldSpec
from rankexit.simspace import ChannelConfig

n = int(sys.argv[1]) if len(sys.argv) > 1 else 50_000
gf = FieldSpec(6)
grid = tuple(np.arange(0.0, 20.0 + 1e-9, 2.0))

for mod in ("bpsk", "qam"):
    cfg = SweepConfig(ChannelConfig(gf, mod, 0.0), grid, n_train=n, n_eval=n, seed=1)
    print(f"\n{mod}: Es/N0   I(X;Y)   I'(X;Z)    loss")
    for r in rank_loss_sweep(cfg):
        print(f"      {r.snr_db:5.1f}  {r.i_xy:7.4f}  {r.i_xz_lower:7.4f}  {r.loss:6.4f} +- {r.loss_std:.4f}")
