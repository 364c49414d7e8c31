"""Sampling the reflection channel model and checking its second moments."""

import numpy as np

from skreflect import ModelParams, derived_snrs, sample_observations
from skreflect.gauss import build_conditional_covariance

params = ModelParams.from_db(20.0, sigma2_e=1.0, alpha=0.05, rho_ab=0.9, rho_e=0.1)
snr, snr_eve = derived_snrs(params)
print(f"SNR = {10 * np.log10(snr):.1f} dB, Eve's SNR = {10 * np.log10(snr_eve):.2f} dB")

batch = sample_observations(params, 100_000, seed=1)
print("columns:", batch.columns)
print("sample covariance:")
print(np.round(np.cov(batch.data, rowvar=False), 3))

# Eve's observations are products of Gaussians, so they are not Gaussian:
# the excess kurtosis of y_E3 is clearly positive at this SNR
y = batch.column("y_E3")
kurt = np.mean((y - y.mean()) ** 4) / np.var(y) ** 2 - 3
print(f"excess kurtosis of y_E3: {kurt:.2f}")

# with Eve's coefficients fixed the joint distribution is Gaussian again
print("covariance given h_AE = 1, h_BE = -0.5:")
print(np.round(build_conditional_covariance(params, 1.0, -0.5).m, 3))
