"""Regenerate the bundled rank-1 demo fixture in data/.

Writes the fully-known ground truth and an observed copy with ~30% of the
entries replaced by `nan`. Deterministic; run from the repository root.
"""

import pathlib

import numpy as np

from sirmc import SyntheticSpec, gen_synthetic, save_matrix

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "data"
SEED = 20240102

spec = SyntheticSpec(m=20, n=15, f_r=1 / 15, f_m=0.3, seed=SEED)
X_full, X_obs = gen_synthetic(spec)

OUT_DIR.mkdir(exist_ok=True)
save_matrix(X_full, OUT_DIR / "demo_rank1_full.csv")
save_matrix(np.where(X_obs.mask, X_full, np.nan), OUT_DIR / "demo_rank1_obs.csv")
print(f"wrote {OUT_DIR}/demo_rank1_full.csv and demo_rank1_obs.csv "
      f"(rank {spec.rank}, {X_obs.n_observed}/{spec.m * spec.n} observed)")
