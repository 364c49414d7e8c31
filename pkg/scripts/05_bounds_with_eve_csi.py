"""Key-rate bounds when Eve knows her own channel coefficients."""

import numpy as np

from skreflect import ModelParams, bounds_full_csie
from skreflect.bounds import sweep

print("SNR dB   lower    upper")
for snr_db in range(-10, 61, 10):
    est = bounds_full_csie(ModelParams.from_db(snr_db, sigma2_e=1.0), n_channel_draws=1000, seed=2014)
    print(f"{snr_db:6d}   {est.lower:.4f}   {est.upper:.4f}")

# a coarse (SNR_Alice, SNR_Eve) map of the lower bound
snr_axis = np.arange(-20, 51, 10)
eve_axis = np.arange(-40, 41, 10)
grid = [ModelParams.from_db(s, e) for s in snr_axis for e in eve_axis]
lower = np.array([r.lower for r in sweep(grid, "full_csie", seed=2014)]).reshape(len(snr_axis), -1)
print("\nlower bound, rows SNR_Alice, columns SNR_Eve (dB)")
print("       " + "".join(f"{e:7d}" for e in eve_axis))
for s, row in zip(snr_axis, lower):
    print(f"{s:5d}  " + "".join(f"{v:7.3f}" for v in row))
